use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lambda_relax::acceptance::run_acceptance;
use lambda_relax::reference::catalog_dump;
use lambda_relax::state::{KetString, Polarization};
use lambda_relax_cli::point::{conditioned_report, final_report, two_photon_report};
use lambda_relax_cli::spec::parse_angle;
use lambda_relax_cli::sweep::{describe_point, evaluate_point, write_csv, write_json};
use lambda_relax_cli::{execute, figure_preset, CliError, Format, Grid, Quantity, Result, SpecFile};

#[derive(Parser)]
#[command(
    name = "lambda-relax",
    version,
    about = "Collective relaxation of Λ-atom arrays coupled to a waveguide"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Final ground state of the atoms, its concurrences and negativities.
    Final(PointArgs),
    /// Atomic state after detecting the first photon with a given polarization.
    Conditioned {
        #[command(flatten)]
        point: PointArgs,
        /// Polarization of the detected photon.
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        polarization: String,
    },
    /// State and log-negativity of the first two emitted photons.
    TwoPhoton(PointArgs),
    /// Sweep over initial states, chirality and spacing.
    Sweep(SweepArgs),
    /// Run the sweep behind one of the figure datasets.
    Preset {
        /// fig2, fig3, fig4, fig5, fig6 or conditioned.
        name: String,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Run the acceptance suite and write a JSON report.
    Acceptance {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the closed-form reference states as JSON.
    DumpReference {
        #[arg(long, default_value = "0:pi:25")]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PointArgs {
    /// Initial product state, e.g. `e+` or `eee`.
    #[arg(long, allow_hyphen_values = true)]
    init: String,
    /// Chirality parameter in [0, 1].
    #[arg(long)]
    s: f64,
    /// Phase between neighbours; accepts `pi/2` style values.
    #[arg(long, value_parser = angle, allow_hyphen_values = true)]
    k0d: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `json` for the full report, `csv` for the sweep rows of this point.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file with sweep settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated initial kets.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init: Option<Vec<String>>,
    /// Comma-separated chirality values.
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<f64>>,
    /// k₀d grid as `start:stop:count`.
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated quantities.
    #[arg(long = "quantity", value_delimiter = ',')]
    quantities: Option<Vec<String>>,
    /// Polarization for conditioned quantities.
    #[arg(long, allow_hyphen_values = true)]
    condition: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

fn angle(s: &str) -> std::result::Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

impl SweepArgs {
    fn layer(&self) -> Result<SpecFile> {
        let mut f = SpecFile::default();
        if let Some(k) = &self.init {
            f = f.with_initial(k.clone());
        }
        if let Some(s) = &self.s {
            f = f.with_s_values(s.clone());
        }
        if let Some(g) = &self.grid {
            f = f.with_grid(g);
        }
        if let Some(q) = &self.quantities {
            f = f.with_quantities(q.clone());
        }
        if let Some(c) = &self.condition {
            f = f.with_condition(c);
        }
        if let Some(o) = &self.out {
            f = f.with_out(o.clone());
        }
        if let Some(fmt) = &self.format {
            f = f.with_format(fmt.parse()?);
        }
        Ok(f)
    }

    fn run(&self, base: SpecFile) -> Result<()> {
        let base = match &self.config {
            Some(path) => base.overlay(SpecFile::load(path)?),
            None => base,
        };
        let spec = base.overlay(self.layer()?).into_spec()?;
        execute(&spec)?;
        Ok(())
    }
}

fn with_writer(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let io = |source| CliError::Io {
                path: path.to_path_buf(),
                source,
            };
            let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
            f(&mut w)?;
            w.flush().map_err(io)
        }
        None => f(&mut std::io::stdout().lock()),
    }
}

/// Emits either the JSON report or the sweep rows of a single point.
fn point_command<T: serde::Serialize>(
    args: &PointArgs,
    min_excitations: usize,
    quantities: &[Quantity],
    condition: Polarization,
    report: impl FnOnce(&KetString) -> Result<T>,
) -> Result<()> {
    let ket: KetString = args.init.parse()?;
    if ket.excitations() < min_excitations {
        return Err(CliError::Usage(format!(
            "|{ket}⟩ needs at least {min_excitations} excited atoms"
        )));
    }
    match args.format.parse::<Format>()? {
        Format::Json => {
            let r = report(&ket)?;
            with_writer(args.out.as_deref(), |w| write_json(&r, w))
        }
        Format::Csv => {
            let qs: Vec<Quantity> = if ket.len() < 2 {
                quantities
                    .iter()
                    .copied()
                    .filter(|q| *q == Quantity::TwoPhotonNegativity)
                    .collect()
            } else {
                quantities.to_vec()
            };
            let (rows, _) =
                evaluate_point(&ket, args.s, args.k0d, &qs, condition).map_err(|source| CliError::Point {
                    point: describe_point(&ket, args.s, args.k0d),
                    source,
                })?;
            with_writer(args.out.as_deref(), |w| write_csv(&rows, w))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Final(p) => point_command(
            &p,
            0,
            &[Quantity::PairwiseConcurrence, Quantity::BipartitionNegativity],
            Polarization::Plus,
            |ket| final_report(ket, p.s, p.k0d),
        ),
        Command::Conditioned { point: p, polarization } => {
            let sigma: Polarization = polarization.parse()?;
            point_command(
                &p,
                1,
                &[Quantity::ConditionedConcurrence, Quantity::ConditionedNegativity],
                sigma,
                |ket| conditioned_report(ket, p.s, p.k0d, sigma),
            )
        }
        Command::TwoPhoton(p) => point_command(&p, 2, &[Quantity::TwoPhotonNegativity], Polarization::Plus, |ket| {
            two_photon_report(ket, p.s, p.k0d)
        }),
        Command::Sweep(args) => args.run(SpecFile::default()),
        Command::Preset { name, sweep } => sweep.run(figure_preset(&name)?.to_file()),
        Command::Acceptance { out } => {
            let report = run_acceptance();
            for c in &report.criteria {
                eprintln!("{}", c.line());
            }
            with_writer(out.as_deref(), |w| write_json(&report, w))?;
            let failed = report.failures().count();
            if failed > 0 {
                return Err(CliError::Acceptance { failed });
            }
            Ok(())
        }
        Command::DumpReference { grid, out } => {
            let grid: Grid = grid.parse()?;
            let dump = catalog_dump(&grid.values())?;
            with_writer(out.as_deref(), |w| write_json(&dump, w))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprint!(": {s}");
                source = s.source();
            }
            eprintln!();
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
