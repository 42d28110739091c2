//! Sweep specifications: quantities, k₀d grids and the TOML config layer.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lambda_relax::state::{KetString, Polarization, MAX_ATOMS};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Largest array for which photon-pair quantities are computed.
pub const TWO_PHOTON_MAX_ATOMS: usize = 4;

/// Default number of k₀d samples over `[0, π]`.
pub const DEFAULT_GRID_POINTS: usize = 201;

pub const DEFAULT_S_VALUES: [f64; 3] = [0.0, 0.5, 1.0];

/// Declaration order is the row order within a sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    PairwiseConcurrence,
    BipartitionNegativity,
    AtomPhotonNegativity,
    ConditionedConcurrence,
    ConditionedNegativity,
    TwoPhotonNegativity,
    FinalStateDump,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::PairwiseConcurrence,
        Quantity::BipartitionNegativity,
        Quantity::AtomPhotonNegativity,
        Quantity::ConditionedConcurrence,
        Quantity::ConditionedNegativity,
        Quantity::TwoPhotonNegativity,
        Quantity::FinalStateDump,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::PairwiseConcurrence => "pairwise_concurrence",
            Quantity::BipartitionNegativity => "bipartition_negativity",
            Quantity::AtomPhotonNegativity => "atom_photon_negativity",
            Quantity::ConditionedConcurrence => "conditioned_concurrence",
            Quantity::ConditionedNegativity => "conditioned_negativity",
            Quantity::TwoPhotonNegativity => "two_photon_negativity",
            Quantity::FinalStateDump => "final_state_dump",
        }
    }

    fn min_atoms(self) -> usize {
        match self {
            Quantity::PairwiseConcurrence
            | Quantity::BipartitionNegativity
            | Quantity::ConditionedConcurrence
            | Quantity::ConditionedNegativity => 2,
            _ => 1,
        }
    }

    fn min_excitations(self) -> usize {
        match self {
            Quantity::AtomPhotonNegativity | Quantity::ConditionedConcurrence | Quantity::ConditionedNegativity => 1,
            Quantity::TwoPhotonNegativity => 2,
            _ => 0,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s.trim())
            .ok_or_else(|| CliError::Usage(format!("unknown quantity {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Usage(format!("unknown format {other:?} (csv or json)"))),
        }
    }
}

/// Parses an angle in radians: a number, `pi`, `a*pi`, `pi/b` or `a*pi/b`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let bad = || CliError::Usage(format!("cannot parse angle {text:?}"));
    let t = text.trim().to_ascii_lowercase().replace('π', "pi");
    let Some((head, tail)) = t.split_once("pi") else {
        return t.parse::<f64>().map_err(|_| bad());
    };
    let head = head.trim().trim_end_matches('*').trim();
    let factor = match head {
        "" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let tail = tail.trim();
    let divisor = if tail.is_empty() {
        1.0
    } else {
        let d = tail.strip_prefix('/').ok_or_else(bad)?.trim();
        d.parse::<f64>().map_err(|_| bad())?
    };
    let v = factor * PI / divisor;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Evenly spaced k₀d values, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(CliError::Usage("grid count must be at least 1".into()));
        }
        if !start.is_finite() || !stop.is_finite() {
            return Err(CliError::Usage("grid endpoints must be finite".into()));
        }
        Ok(Grid { start, stop, count })
    }

    /// `[0, π]` with [`DEFAULT_GRID_POINTS`] samples.
    pub fn full_period() -> Self {
        Grid {
            start: 0.0,
            stop: PI,
            count: DEFAULT_GRID_POINTS,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = self.count - 1;
        (0..self.count)
            .map(|k| {
                if k == last {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * (k as f64 / last as f64)
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = CliError;

    /// `start:stop:count`, e.g. `0:pi:201`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(CliError::Usage(format!("grid {s:?} is not start:stop:count")));
        };
        let count = count
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("grid count {count:?} is not a nonnegative integer")))?;
        Grid::new(parse_angle(start)?, parse_angle(stop)?, count)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum AngleField {
    Number(f64),
    Text(String),
}

impl AngleField {
    fn value(&self) -> Result<f64> {
        match self {
            AngleField::Number(v) => Ok(*v),
            AngleField::Text(t) => parse_angle(t),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GridField {
    Text(String),
    Table {
        start: AngleField,
        stop: AngleField,
        count: usize,
    },
}

impl GridField {
    fn grid(&self) -> Result<Grid> {
        match self {
            GridField::Text(t) => t.parse(),
            GridField::Table { start, stop, count } => Grid::new(start.value()?, stop.value()?, *count),
        }
    }
}

/// A validated parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub initial: Vec<KetString>,
    pub s_values: Vec<f64>,
    pub grid: Grid,
    /// Sorted and free of duplicates.
    pub quantities: Vec<Quantity>,
    /// Polarization of the detected photon for conditioned quantities.
    pub condition: Polarization,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.initial.is_empty() {
            return Err(CliError::Usage("no initial states given".into()));
        }
        if self.s_values.is_empty() {
            return Err(CliError::Usage("no chirality values given".into()));
        }
        if let Some(s) = self.s_values.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(CliError::Usage(format!("chirality {s} outside [0, 1]")));
        }
        Grid::new(self.grid.start, self.grid.stop, self.grid.count)?;
        if self.quantities.is_empty() {
            return Err(CliError::Usage("quantity list is empty".into()));
        }
        for ket in &self.initial {
            let n = ket.len();
            for &q in &self.quantities {
                if n < q.min_atoms() {
                    return Err(CliError::Usage(format!(
                        "{q} needs at least {} atoms, |{ket}⟩ has {n}",
                        q.min_atoms()
                    )));
                }
                if ket.excitations() < q.min_excitations() {
                    return Err(CliError::Usage(format!(
                        "{q} needs at least {} excited atoms in |{ket}⟩",
                        q.min_excitations()
                    )));
                }
                if q == Quantity::TwoPhotonNegativity && n > TWO_PHOTON_MAX_ATOMS {
                    return Err(CliError::Usage(format!(
                        "{q} is limited to {TWO_PHOTON_MAX_ATOMS} atoms"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Config-file view, used to layer overrides on a preset.
    pub fn to_file(&self) -> SpecFile {
        SpecFile {
            initial: Some(self.initial.iter().map(|k| k.to_string()).collect()),
            s_values: Some(self.s_values.clone()),
            grid: Some(GridField::Table {
                start: AngleField::Number(self.grid.start),
                stop: AngleField::Number(self.grid.stop),
                count: self.grid.count,
            }),
            quantities: Some(self.quantities.iter().map(|q| q.name().to_string()).collect()),
            condition: Some(self.condition.symbol().to_string()),
            out: self.out.clone(),
            format: Some(self.format),
        }
    }
}

/// Partially specified sweep as read from a TOML file or assembled from
/// command-line flags. Later layers override earlier ones field by field.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    initial: Option<Vec<String>>,
    s_values: Option<Vec<f64>>,
    grid: Option<GridField>,
    quantities: Option<Vec<String>>,
    condition: Option<String>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

impl SpecFile {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_toml(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn with_initial(mut self, kets: Vec<String>) -> Self {
        self.initial = Some(kets);
        self
    }

    pub fn with_s_values(mut self, s: Vec<f64>) -> Self {
        self.s_values = Some(s);
        self
    }

    pub fn with_grid(mut self, grid: &str) -> Self {
        self.grid = Some(GridField::Text(grid.to_string()));
        self
    }

    pub fn with_quantities(mut self, q: Vec<String>) -> Self {
        self.quantities = Some(q);
        self
    }

    pub fn with_condition(mut self, sigma: &str) -> Self {
        self.condition = Some(sigma.to_string());
        self
    }

    pub fn with_out(mut self, out: PathBuf) -> Self {
        self.out = Some(out);
        self
    }

    pub fn with_format(mut self, format: Format) -> Self {
        self.format = Some(format);
        self
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: SpecFile) -> SpecFile {
        SpecFile {
            initial: top.initial.or(self.initial),
            s_values: top.s_values.or(self.s_values),
            grid: top.grid.or(self.grid),
            quantities: top.quantities.or(self.quantities),
            condition: top.condition.or(self.condition),
            out: top.out.or(self.out),
            format: top.format.or(self.format),
        }
    }

    /// Fills defaults and validates. `initial` and `quantities` are required.
    pub fn into_spec(self) -> Result<SweepSpec> {
        let initial = self
            .initial
            .ok_or_else(|| CliError::Usage("no initial states given".into()))?
            .iter()
            .map(|k| k.parse::<KetString>())
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut quantities = self
            .quantities
            .ok_or_else(|| CliError::Usage("quantity list is empty".into()))?
            .iter()
            .map(|q| q.parse::<Quantity>())
            .collect::<Result<Vec<_>>>()?;
        quantities.sort_unstable();
        quantities.dedup();
        let condition = match self.condition {
            Some(c) => c.parse::<Polarization>()?,
            None => Polarization::Plus,
        };
        let grid = match self.grid {
            Some(g) => g.grid()?,
            None => Grid::full_period(),
        };
        let spec = SweepSpec {
            initial,
            s_values: self.s_values.unwrap_or_else(|| DEFAULT_S_VALUES.to_vec()),
            grid,
            quantities,
            condition,
            out: self.out,
            format: self.format.unwrap_or_default(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Every ket over `alphabet` of length `n`, atom 1 varying slowest.
pub fn all_kets(n: usize, alphabet: &[char]) -> Vec<String> {
    assert!(n <= MAX_ATOMS);
    let mut out = vec![String::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| alphabet.iter().map(move |&c| format!("{prefix}{c}")))
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0").unwrap(), 0.0);
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("π/2").unwrap(), PI / 2.0);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("0.5pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("-pi").unwrap(), -PI);
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("x").is_err());
        assert!(parse_angle("pi/0").is_err());
    }

    #[test]
    fn grid_parsing_and_values() {
        let g: Grid = "0:pi:5".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[4], PI);
        assert!((v[2] - PI / 2.0).abs() < 1e-15);
        assert_eq!("0.3:2:1".parse::<Grid>().unwrap().values(), vec![0.3]);
        assert!("0:pi:0".parse::<Grid>().is_err());
        assert!("0:pi".parse::<Grid>().is_err());
        assert!("0:pi:-3".parse::<Grid>().is_err());
    }

    #[test]
    fn quantity_names_round_trip() {
        for q in Quantity::ALL {
            assert_eq!(q.name().parse::<Quantity>().unwrap(), q);
            assert_eq!(serde_json::to_string(&q).unwrap(), format!("\"{}\"", q.name()));
        }
        assert!("entropy".parse::<Quantity>().is_err());
    }

    #[test]
    fn toml_config_with_table_grid() {
        let text = r#"
            initial = ["e+", "+e"]
            s_values = [0.0, 1.0]
            quantities = ["pairwise_concurrence", "pairwise_concurrence"]
            format = "json"

            [grid]
            start = 0.0
            stop = "pi"
            count = 3
        "#;
        let spec = SpecFile::from_toml(text).unwrap().into_spec().unwrap();
        assert_eq!(spec.initial.len(), 2);
        assert_eq!(spec.quantities, vec![Quantity::PairwiseConcurrence]);
        assert_eq!(
            spec.grid,
            Grid {
                start: 0.0,
                stop: PI,
                count: 3
            }
        );
        assert_eq!(spec.format, Format::Json);
        assert_eq!(spec.condition, Polarization::Plus);
    }

    #[test]
    fn overlay_prefers_top_layer() {
        let base = SpecFile::from_toml("initial = [\"e+\"]\nquantities = [\"pairwise_concurrence\"]\ngrid = \"0:1:4\"")
            .unwrap();
        let spec = base
            .overlay(SpecFile::default().with_grid("0:pi:2").with_s_values(vec![0.5]))
            .into_spec()
            .unwrap();
        assert_eq!(spec.grid.count, 2);
        assert_eq!(spec.s_values, vec![0.5]);
        assert_eq!(spec.initial[0].to_string(), "e+");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(SpecFile::from_toml("seed = 3").is_err());
    }

    #[test]
    fn validation_errors() {
        let base = || SpecFile::default().with_initial(vec!["e+".into()]);
        let empty = base().with_quantities(vec![]).into_spec().unwrap_err();
        assert_eq!(empty.exit_code(), 1);
        assert!(base().into_spec().is_err());
        let photons = base().with_quantities(vec!["two_photon_negativity".into()]).into_spec();
        assert!(photons.is_err());
        let single = SpecFile::default()
            .with_initial(vec!["e".into()])
            .with_quantities(vec!["pairwise_concurrence".into()])
            .into_spec();
        assert!(single.is_err());
        let big = SpecFile::default()
            .with_initial(vec!["eeeee".into()])
            .with_quantities(vec!["two_photon_negativity".into()])
            .into_spec();
        assert!(big.is_err());
        let s = base()
            .with_quantities(vec!["pairwise_concurrence".into()])
            .with_s_values(vec![1.5])
            .into_spec();
        assert!(s.is_err());
        let ket = SpecFile::default()
            .with_initial(vec!["ex".into()])
            .with_quantities(vec!["pairwise_concurrence".into()])
            .into_spec()
            .unwrap_err();
        assert_eq!(ket.exit_code(), 1);
    }

    #[test]
    fn spec_survives_file_round_trip() {
        let spec = SpecFile::default()
            .with_initial(vec!["ee".into(), "eee".into()])
            .with_quantities(vec!["atom_photon_negativity".into()])
            .with_condition("-")
            .into_spec()
            .unwrap();
        assert_eq!(spec.to_file().into_spec().unwrap(), spec);
    }

    #[test]
    fn ket_enumeration() {
        let k = all_kets(2, &['e', '+']);
        assert_eq!(k, vec!["ee", "e+", "+e", "++"]);
        assert_eq!(all_kets(4, &['e', '+']).len(), 16);
    }
}
