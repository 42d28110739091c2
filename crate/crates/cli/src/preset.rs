//! Named sweeps for the figure datasets: one preset per plotted quantity.

use std::f64::consts::PI;

use lambda_relax::state::Polarization;

use crate::error::{CliError, Result};
use crate::spec::{all_kets, Format, Grid, Quantity, SpecFile, SweepSpec};

pub const PRESETS: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "conditioned"];

/// The two spacings of the N = 4 chiral concurrence matrices.
pub const FIG4_K0D: (f64, f64) = (PI / 4.0, 2.0 * PI / 3.0);

fn base(initial: Vec<String>, quantities: Vec<Quantity>) -> SweepSpec {
    let spec = SpecFile::default()
        .with_initial(initial)
        .with_quantities(quantities.iter().map(|q| q.name().to_string()).collect())
        .into_spec()
        .expect("preset specs are valid");
    SweepSpec {
        condition: Polarization::Plus,
        format: Format::Csv,
        ..spec
    }
}

fn kets(list: &[&str]) -> Vec<String> {
    list.iter().map(|k| k.to_string()).collect()
}

/// `fig2`: C₁₂ for |e+⟩ and |+e⟩. `fig3`: pairwise concurrences of three
/// atoms from every {e,+} ket with one or two ground atoms. `fig4`: chiral
/// four-atom concurrence matrices from every {e,+} ket with at least one
/// excitation, at two spacings. `fig5`: atom–photon negativities from |e⟩^N.
/// `fig6`: photon-pair negativity from |e⟩^N. `conditioned`: negativities
/// of the atoms after detecting a `+` photon, from |e⟩^N.
pub fn figure_preset(name: &str) -> Result<SweepSpec> {
    let spec = match name {
        "fig2" => base(kets(&["e+", "+e"]), vec![Quantity::PairwiseConcurrence]),
        "fig3" => {
            let initial = all_kets(3, &['e', '+'])
                .into_iter()
                .filter(|k| (1..=2).contains(&k.matches('+').count()))
                .collect();
            base(initial, vec![Quantity::PairwiseConcurrence])
        }
        "fig4" => {
            let initial = all_kets(4, &['e', '+'])
                .into_iter()
                .filter(|k| k.contains('e'))
                .collect();
            SweepSpec {
                s_values: vec![0.0],
                grid: Grid::new(FIG4_K0D.0, FIG4_K0D.1, 2)?,
                ..base(initial, vec![Quantity::PairwiseConcurrence])
            }
        }
        "fig5" => base(kets(&["ee", "eee"]), vec![Quantity::AtomPhotonNegativity]),
        "fig6" => base(kets(&["ee", "eee"]), vec![Quantity::TwoPhotonNegativity]),
        "conditioned" => base(kets(&["ee", "eee"]), vec![Quantity::ConditionedNegativity]),
        other => {
            return Err(CliError::Usage(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::DEFAULT_S_VALUES;

    #[test]
    fn every_preset_is_valid() {
        for name in PRESETS {
            figure_preset(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn fig2_axes() {
        let s = figure_preset("fig2").unwrap();
        assert_eq!(
            s.initial.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
            vec!["e+", "+e"]
        );
        assert_eq!(s.s_values, DEFAULT_S_VALUES.to_vec());
        assert_eq!(s.grid, Grid::full_period());
        assert_eq!(s.quantities, vec![Quantity::PairwiseConcurrence]);
    }

    #[test]
    fn fig3_uses_six_configurations() {
        let s = figure_preset("fig3").unwrap();
        let k: Vec<_> = s.initial.iter().map(|k| k.to_string()).collect();
        assert_eq!(k, vec!["ee+", "e+e", "e++", "+ee", "+e+", "++e"]);
    }

    #[test]
    fn fig4_is_chiral_at_two_spacings() {
        let s = figure_preset("fig4").unwrap();
        assert_eq!(s.s_values, vec![0.0]);
        let v = s.grid.values();
        assert_eq!(v.len(), 2);
        assert!(v[0] != v[1]);
        assert_eq!(s.initial.len(), 15);
        assert!(s.initial.iter().all(|k| k.len() == 4 && k.excitations() >= 1));
    }

    #[test]
    fn photon_presets() {
        assert_eq!(
            figure_preset("fig5").unwrap().quantities,
            vec![Quantity::AtomPhotonNegativity]
        );
        assert_eq!(
            figure_preset("fig6").unwrap().quantities,
            vec![Quantity::TwoPhotonNegativity]
        );
        let c = figure_preset("conditioned").unwrap();
        assert_eq!(c.quantities, vec![Quantity::ConditionedNegativity]);
        assert_eq!(c.condition, Polarization::Plus);
    }

    #[test]
    fn unknown_preset() {
        let err = figure_preset("fig9").unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
