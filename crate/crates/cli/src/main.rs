use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use foamfab_core::calib::{hex_side, CalibrationTable};
use foamfab_core::gcode::{parse, simulate, SimConfig};
use foamfab_core::job::{
    plan_job, write_marking, write_preview, write_slice, JobConfig, JobError, JobPlan,
};

mod analyze;

#[derive(Parser)]
#[command(
    name = "foamfab",
    version,
    about = "Hydrogel-injection toolpaths for foam composites"
)]
struct Cli {
    /// Job file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the job file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Progress on stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan the job and write injection files, the marking file and the report.
    Slice,
    /// Write only the outline marking file.
    Mark,
    /// Write an SVG preview of cells, print files and outlines.
    Preview,
    /// Material calculators.
    Analyze {
        #[command(subcommand)]
        what: analyze::Analyze,
    },
    /// Validate a calibration table and show cell sizes.
    CalibrateCheck {
        /// Calibration CSV; defaults to the one named by --config.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Injection speed to evaluate, mm/min; defaults to the job's.
        #[arg(long)]
        speed: Option<f64>,
    },
    /// Simulate a G-code file against the job's machine and report rule violations.
    Lint {
        file: PathBuf,
        /// Cell area for volume tracking, mm^2; defaults to the file header.
        #[arg(long)]
        cell_area: Option<f64>,
        /// Syringe capacity, mm^3; defaults to the file header.
        #[arg(long)]
        capacity: Option<f64>,
    },
}

/// A failure with its exit code: 2 for bad input, 1 for internal faults.
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn user(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<JobError> for Failure {
    fn from(e: JobError) -> Self {
        Self {
            code: if e.is_user_error() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

struct Ui {
    verbose: bool,
    color: bool,
}

impl Ui {
    fn progress(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn error(&self, msg: &str) {
        if self.color {
            eprintln!("\x1b[1;31merror:\x1b[0m {msg}");
        } else {
            eprintln!("error: {msg}");
        }
    }
}

fn load_config(cli: &Cli) -> Result<JobConfig, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::user("this command needs --config <job.toml>"))?;
    let mut cfg = JobConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = std::env::current_dir()
            .map(|d| d.join(out))
            .unwrap_or_else(|_| out.clone());
    }
    Ok(cfg)
}

fn plan(cli: &Cli, ui: &Ui) -> Result<JobPlan, Failure> {
    let cfg = load_config(cli)?;
    ui.progress(format!(
        "planning {} bod{}",
        cfg.bodies.len(),
        if cfg.bodies.len() == 1 { "y" } else { "ies" }
    ));
    let plan = plan_job(&cfg)?;
    for (i, g) in plan.groups.iter().enumerate() {
        ui.progress(format!(
            "group {}: hydration {} infill {}, cell area {:.4} mm^2, {} columns",
            i + 1,
            g.hydration_ratio,
            g.infill_ratio,
            g.grid.cell_area(),
            g.columns.len()
        ));
    }
    Ok(plan)
}

fn show(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(cli: &Cli, ui: &Ui) -> Result<(), Failure> {
    match &cli.command {
        Command::Slice => {
            let plan = plan(cli, ui)?;
            show(&write_slice(&plan)?);
            println!(
                "{} columns, {} file(s), {:.1} mm^3",
                plan.total_columns(),
                plan.files.len(),
                plan.total_volume()
            );
        }
        Command::Mark => {
            let plan = plan(cli, ui)?;
            show(&[write_marking(&plan)?]);
        }
        Command::Preview => {
            let plan = plan(cli, ui)?;
            show(&[write_preview(&plan)?]);
        }
        Command::Analyze { what } => analyze::run(what)?,
        Command::CalibrateCheck { calibration, speed } => {
            calibrate_check(cli, calibration.as_deref(), *speed)?
        }
        Command::Lint {
            file,
            cell_area,
            capacity,
        } => lint(cli, file, *cell_area, *capacity)?,
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::user(format!("cannot read {}: {e}", path.display())))
}

fn calibrate_check(
    cli: &Cli,
    calibration: Option<&Path>,
    speed: Option<f64>,
) -> Result<(), Failure> {
    let cfg = match (&cli.config, calibration) {
        (Some(_), _) => Some(load_config(cli)?),
        (None, Some(_)) => None,
        (None, None) => {
            return Err(Failure::user(
                "give --calibration <file.csv> or --config <job.toml>",
            ))
        }
    };
    let path = match (calibration, &cfg) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(c)) => c.resolve(&c.calibration),
        (None, None) => unreachable!(),
    };
    let table = CalibrationTable::from_csv(&read(&path)?)
        .map_err(|e| Failure::user(format!("{}: {e}", path.display())))?;
    let speed = speed.or(cfg.as_ref().map(|c| c.inject_speed));
    println!("{}: ok", path.display());
    for ratio in table.ratios() {
        let (lo, hi) = table
            .speed_range(ratio)
            .expect("ratio comes from the table");
        let mut line = format!("ratio {ratio}: speeds {lo}..{hi} mm/min");
        if let Some(s) = speed {
            match table.cell_area(s, ratio) {
                Ok(a) => {
                    let side = hex_side(a).expect("cell area is positive");
                    line +=
                        &format!(", at {s} mm/min: cell area {a:.4} mm^2, hex side {side:.4} mm");
                }
                Err(e) => line += &format!(", at {s} mm/min: {e}"),
            }
        }
        println!("{line}");
    }
    Ok(())
}

fn lint(
    cli: &Cli,
    file: &Path,
    cell_area: Option<f64>,
    capacity: Option<f64>,
) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let mp = cfg.machine()?;
    let program =
        parse(&read(file)?).map_err(|e| Failure::user(format!("{}: {e}", file.display())))?;
    let sim = simulate(
        &program,
        &SimConfig {
            mp,
            cell_area,
            capacity,
        },
    );
    for d in &sim.diagnostics {
        println!("{}:{d}", file.display());
    }
    println!("dispensed: {:.3} mm^3", sim.trace.volume());
    if sim.is_clean() {
        println!("no problems found");
        Ok(())
    } else {
        Err(Failure::user(format!(
            "{} problem(s) in {}",
            sim.diagnostics.len(),
            file.display()
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ui = Ui {
        verbose: cli.verbose,
        color: std::env::var_os("FOAMFAB_NO_COLOR").is_none() && std::io::stderr().is_terminal(),
    };
    match run(&cli, &ui) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            ui.error(&f.message);
            ExitCode::from(f.code)
        }
    }
}
