//! Command-line front end: argument parsing, config merging and report output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use morphoporo_core::diagnostics::{oscillation_indicator, total_variation, tv_sweep};
use morphoporo_core::io::{read_field_csv, write_field_csv, write_field_vtk, ConfigEntries};
use morphoporo_core::stability::{continuous_mode, semidiscrete_symbol};
use morphoporo_core::{
    Error, GridField, Mesh, ModeReport, OutputFormat, RunConfig, SchurAnalysis, State, TimeStepper,
};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for bad arguments, configuration, input files or IO.
pub const EXIT_INPUT: i32 = 1;
/// Exit status when the numerical solve fails.
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "morphoporo",
    version,
    about = "Morpho-visco-poroelastic solver and 1D analysis tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the 2D model and write the fields after every step.
    Simulate(Settings),
    /// One step from rest per beta value; prints a beta,tv table.
    SweepBeta(Settings),
    /// Fourier-mode stability reports for the 1D model.
    Stability(Settings),
    /// Schur-complement M-matrix analysis for the 1D model.
    Monotonicity(Settings),
    /// Total variation of the pressure column of a field CSV.
    Tv {
        /// Field file written by `simulate`.
        field: PathBuf,
    },
}

/// Config file plus per-key overrides. Every flag maps to the config key of
/// the same name with dashes replaced by underscores.
#[derive(Debug, Args)]
struct Settings {
    /// `key = value` configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu2: Option<String>,
    /// Sets mu1 = mu2 = mu_vis / 2.
    #[arg(long, allow_hyphen_values = true)]
    mu_vis: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p0: Option<String>,
    /// Grid size for the 1D analyses.
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mesh_n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    n_steps: Option<String>,
    /// fixed or moving.
    #[arg(long, allow_hyphen_values = true)]
    domain_mode: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    output_dir: Option<String>,
    /// Comma-separated subset of csv, vtk.
    #[arg(long, allow_hyphen_values = true)]
    output_formats: Option<String>,
    /// Comma-separated, ascending.
    #[arg(long, allow_hyphen_values = true)]
    beta_list: Option<String>,
    /// paper_bodyforce or unforced.
    #[arg(long, allow_hyphen_values = true)]
    scenario: Option<String>,
}

impl Settings {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut entries = match &self.config {
            Some(path) => ConfigEntries::load(path)?,
            None => ConfigEntries::default(),
        };
        let overrides = [
            ("rho", &self.rho),
            ("mu", &self.mu),
            ("lambda", &self.lambda),
            ("mu1", &self.mu1),
            ("mu2", &self.mu2),
            ("mu_vis", &self.mu_vis),
            ("kappa", &self.kappa),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("dt", &self.dt),
            ("p0", &self.p0),
            ("h", &self.h),
            ("mesh_n", &self.mesh_n),
            ("n_steps", &self.n_steps),
            ("domain_mode", &self.domain_mode),
            ("output_dir", &self.output_dir),
            ("output_formats", &self.output_formats),
            ("beta_list", &self.beta_list),
            ("scenario", &self.scenario),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                entries.set(key, v)?;
            }
        }
        entries.resolve()
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status. Reports go to stdout, diagnostics to stderr.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(report) => {
            print!("{report}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_solver_failure() {
                EXIT_SOLVER
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn execute(command: Command) -> Result<String, Error> {
    match command {
        Command::Simulate(s) => simulate(&s.resolve()?),
        Command::SweepBeta(s) => sweep_beta(&s.resolve()?),
        Command::Stability(s) => stability(&s.resolve()?),
        Command::Monotonicity(s) => monotonicity(&s.resolve()?),
        Command::Tv { field } => tv(&field),
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_fields(cfg: &RunConfig, state: &State, step: usize) -> Result<(), Error> {
    for format in &cfg.output_formats {
        let path = cfg
            .output_dir
            .join(format!("step_{step:04}.{}", format.extension()));
        match format {
            OutputFormat::Csv => write_field_csv(state, &path)?,
            OutputFormat::Vtk => write_field_vtk(state, &path)?,
        }
    }
    Ok(())
}

fn simulate(cfg: &RunConfig) -> Result<String, Error> {
    let stepper = TimeStepper::new(cfg.params, &cfg.scenario)?.with_mode(cfg.domain_mode);
    let initial = State::at_rest(Mesh::unit_square(cfg.mesh_n)?, cfg.params.p0);
    fs::create_dir_all(&cfg.output_dir).map_err(|e| io_error(&cfg.output_dir, e))?;
    write_fields(cfg, &initial, 0)?;
    let mut out = String::from("step,t,iterations,update_norm,p_min,p_max,tv,oscillation\n");
    let mut failure = None;
    let summary = stepper.run(&initial, cfg.n_steps, &mut |state, report| {
        if failure.is_some() {
            return;
        }
        let step = (state.t / cfg.params.dt).round() as usize;
        if let Err(e) = write_fields(cfg, state, step) {
            failure = Some(e);
            return;
        }
        let grid = GridField::pressure(state).expect("unit-square meshes carry a lattice");
        writeln!(
            out,
            "{step},{},{},{:e},{:e},{:e},{:e},{}",
            state.t,
            report.fixed_point_iters,
            report.final_update_norm,
            grid.min(),
            grid.max(),
            total_variation(&grid),
            oscillation_indicator(&grid)
        )
        .expect("writing to a String cannot fail");
    });
    if let Some(e) = failure {
        return Err(e);
    }
    summary?;
    Ok(out)
}

fn sweep_beta(cfg: &RunConfig) -> Result<String, Error> {
    let mesh = Mesh::unit_square(cfg.mesh_n)?;
    let rows = tv_sweep(&cfg.params, &cfg.beta_list, &mesh, &cfg.scenario)?;
    let mut out = String::from("beta,tv\n");
    for r in rows {
        writeln!(out, "{:e},{:.16e}", r.beta, r.tv).expect("writing to a String cannot fail");
    }
    Ok(out)
}

fn mode_line(out: &mut String, kind: &str, r: &ModeReport) {
    writeln!(
        out,
        "{kind},{},{},{:e},{:e},{:e},{:e},{}",
        r.l, r.h, r.eig_real_parts[0], r.eig_real_parts[1], r.criterion1, r.criterion2, r.stable
    )
    .expect("writing to a String cannot fail");
}

fn stability(cfg: &RunConfig) -> Result<String, Error> {
    let n = cfg.mesh_n;
    let mut out = String::from("model,l,h,eig_re_1,eig_re_2,criterion1,criterion2,stable\n");
    for l in 1..n {
        mode_line(&mut out, "continuous", &continuous_mode(l, &cfg.params)?);
    }
    for l in 1..n {
        match semidiscrete_symbol(l, n, &cfg.params) {
            Ok(r) => mode_line(&mut out, "semidiscrete", &r),
            Err(Error::DegenerateMode { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn monotonicity(cfg: &RunConfig) -> Result<String, Error> {
    let a = SchurAnalysis::new(cfg.analysis_h(), &cfg.params)?;
    let mut out = String::new();
    for (key, value) in [
        ("h", a.h.to_string()),
        ("nu", a.nu.to_string()),
        ("kappa", cfg.params.kappa.to_string()),
        ("beta", cfg.params.beta.to_string()),
        ("h_critical", format!("{:.6e}", a.h_critical)),
        ("beta_star", format!("{:.6e}", a.beta_star)),
        ("is_a_m_matrix", a.is_a_m_matrix.to_string()),
        ("is_b_m_matrix", a.is_b_m_matrix.to_string()),
    ] {
        writeln!(out, "{key} = {value}").expect("writing to a String cannot fail");
    }
    Ok(out)
}

fn tv(path: &Path) -> Result<String, Error> {
    let grid = read_field_csv(path)?.pressure_grid()?;
    Ok(format!("{:.16e}\n", total_variation(&grid)))
}
