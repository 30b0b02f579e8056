use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use csck_core::bergman::{bergman_sample, expansion_report};
use csck_core::config::{Format, JobConfig};
use csck_core::geom1d::{Grid, MetricJson, QuadratureSpec};
use csck_core::invariants::{
    df_coefficient_route, df_intersection_exact, df_intersection_fano, futaki_classical, futaki_twisted,
    invariance_scan, invariant_report,
};
use csck_core::rational::{fixed, fmt_q};
use csck_core::solver::{convergence_order, solve_coupled_csck, solve_coupled_ke, Equation};
use csck_core::toriclat::{coefficient_table, s_hat, untwisted_table, Model, Normalization};
use csck_core::{verify, Error};

#[derive(Parser, Debug)]
#[command(name = "csck", version, about = "Coupled cscK invariants, Bergman densities and solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Job configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Total number of quadrature nodes (rounded up to whole panels).
    #[arg(long, global = true)]
    quad_nodes: Option<usize>,
    /// Quadrature truncation |t| <= T.
    #[arg(long, global = true)]
    quad_cutoff: Option<f64>,
    /// Route-agreement tolerance; solver tolerance for `solve`.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
enum Command {
    /// Print the exact constant Ŝ.
    Shat,
    /// Riemann–Roch coefficient table.
    Coeffs,
    /// Futaki invariants by every available route.
    Futaki,
    /// Donaldson–Futaki invariant of the product configuration.
    Df,
    TwistedFutaki,
    /// Twisted Bergman densities for the configured k values.
    Bergman,
    /// Solve the coupled cscK (or KE) equation from the configured start.
    Solve,
    /// Run the built-in acceptance checks.
    Verify {
        /// Run only these criteria.
        #[arg(long = "criterion")]
        criteria: Vec<u32>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum FormatArg {
    Json,
    Csv,
}

/// Exit statuses.
const EXIT_VERIFY: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_SCOPE: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Core(#[from] Error),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::Scope(_) | Error::TwistInfeasible(_) => EXIT_SCOPE,
                Error::Quadrature(_) | Error::Solver(_) => EXIT_NUMERIC,
                _ => EXIT_SCHEMA,
            },
            CliError::Read { .. } | CliError::Usage(_) => EXIT_SCHEMA,
            CliError::Write { .. } => EXIT_NUMERIC,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// A rendered report.
struct Output {
    name: &'static str,
    format: Format,
    /// Printed on stdout when no `--out` directory is given.
    body: String,
    /// Written instead of `body` into report files.
    file_body: Option<String>,
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    if let Command::Verify { criteria } = &cli.command {
        return run_verify(cli, criteria);
    }
    let cfg = load_config(cli)?;
    let format = cli.format.map(|f| match f {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    });
    let format = format.or(cfg.output.as_ref().and_then(|o| o.format)).unwrap_or_default();
    let out = match &cli.command {
        Command::Shat => shat(&cfg)?,
        Command::Coeffs => coeffs(&cfg)?,
        Command::Futaki => futaki(cli, &cfg)?,
        Command::Df => df(cli, &cfg)?,
        Command::TwistedFutaki => twisted(cli, &cfg)?,
        Command::Bergman => bergman(cli, &cfg, format)?,
        Command::Solve => solve(cli, &cfg, format)?,
        Command::Verify { .. } => unreachable!(),
    };
    if format == Format::Csv && out.format != Format::Csv {
        return Err(CliError::Usage(format!("csv output is not available for `{}`", out.name)));
    }
    let dir = cli.out.clone().or(cfg.output.as_ref().and_then(|o| o.dir.as_ref().map(PathBuf::from)));
    emit(&out, dir.as_deref())?;
    Ok(0)
}

fn load_config(cli: &Cli) -> Result<JobConfig> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("--config <path> is required".into()))?;
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
    let cfg = JobConfig::from_json(&text)?;
    if let Some(c) = &cfg.command {
        let expected = command_name(&cli.command);
        if c != expected {
            return Err(CliError::Usage(format!("config is for `{c}`, not `{expected}`")));
        }
    }
    Ok(cfg)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Shat => "shat",
        Command::Coeffs => "coeffs",
        Command::Futaki => "futaki",
        Command::Df => "df",
        Command::TwistedFutaki => "twisted-futaki",
        Command::Bergman => "bergman",
        Command::Solve => "solve",
        Command::Verify { .. } => "verify",
    }
}

fn emit(out: &Output, dir: Option<&Path>) -> Result<()> {
    match dir {
        None => print!("{}", out.body),
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
            let ext = if out.format == Format::Csv { "csv" } else { "json" };
            let path = dir.join(format!("{}.{ext}", out.name));
            fs::write(&path, out.file_body.as_ref().unwrap_or(&out.body)).map_err(|source| CliError::Write { path: path.clone(), source })?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn quadrature(cli: &Cli, cfg: &JobConfig) -> QuadratureSpec {
    let mut spec = cfg.quadrature();
    if let Some(n) = cli.quad_nodes {
        spec.panels = n.div_ceil(spec.order).max(1);
    }
    if let Some(t) = cli.quad_cutoff {
        spec.cutoff = t;
    }
    spec
}

fn tolerance(cli: &Cli, cfg: &JobConfig) -> f64 {
    cli.tol.unwrap_or(cfg.tolerance())
}

fn json_out(name: &'static str, v: &impl Serialize) -> Output {
    Output { name, format: Format::Json, body: pretty(v), file_body: None }
}

fn shat(cfg: &JobConfig) -> Result<Output> {
    let v = s_hat(&cfg.tuple()?)?;
    // bare rational on stdout, an object in report files
    Ok(Output {
        name: "shat",
        format: Format::Json,
        body: format!("{}\n", fmt_q(&v)),
        file_body: Some(pretty(&json!({ "s_hat": fmt_q(&v) }))),
    })
}

fn coeffs(cfg: &JobConfig) -> Result<Output> {
    let tuple = cfg.tuple()?;
    let action = cfg.action(&tuple)?;
    let table = match coefficient_table(&tuple, &action) {
        Ok(t) => t,
        Err(Error::TwistInfeasible(_)) => untwisted_table(&tuple, &action)?,
        Err(e) => return Err(e.into()),
    };
    Ok(json_out("coeffs", &table))
}

fn futaki(cli: &Cli, cfg: &JobConfig) -> Result<Output> {
    let tuple = cfg.tuple()?;
    let action = cfg.action(&tuple)?;
    if tuple.model() != Model::Cp1 {
        // no metric data off CP1: exact routes only
        let table = untwisted_table(&tuple, &action)?;
        let df = match coefficient_table(&tuple, &action) {
            Ok(t) => Some(fmt_q(&df_coefficient_route(&t)?)),
            Err(Error::TwistInfeasible(_)) => None,
            Err(e) => return Err(e.into()),
        };
        let report = json!({
            "s_hat": fmt_q(&s_hat(&tuple)?),
            "normalization": action.normalization,
            "fut_classical": fmt_q(&futaki_classical(&table)),
            "df_coefficient_route": df,
        });
        return Ok(json_out("futaki", &report));
    }
    let grid = Grid::new(quadrature(cli, cfg))?;
    let mt = cfg.metric()?;
    let report = invariant_report(&mt, &action, &grid, tolerance(cli, cfg))?;
    let mut v = serde_json::to_value(&report).expect("report serializes");
    if let Some(scan) = &cfg.scan {
        let r = invariance_scan(&mt, &action, &scan.directions, &scan.s, scan.invariant, &grid)?;
        v["scan"] = json!({
            "kind": r.kind,
            "values": r.values.iter().map(|(s, f)| [fixed(*s), fixed(*f)]).collect::<Vec<_>>(),
            "max_deviation": fixed(r.max_deviation),
        });
    }
    Ok(json_out("futaki", &v))
}

fn df(cli: &Cli, cfg: &JobConfig) -> Result<Output> {
    let tuple = cfg.tuple()?;
    let action = cfg.action(&tuple)?;
    let mut skipped = Vec::new();
    let coefficient = match coefficient_table(&tuple, &action) {
        Ok(t) => Some(fmt_q(&df_coefficient_route(&t)?)),
        Err(e @ Error::TwistInfeasible(_)) => {
            skipped.push(format!("coefficient route: {e}"));
            None
        }
        Err(e) => return Err(e.into()),
    };
    let table = untwisted_table(&tuple, &action)?;
    let exact = match df_intersection_exact(&tuple, &table) {
        Ok(v) => Some(fmt_q(&v)),
        Err(e @ Error::Scope(_)) => {
            skipped.push(format!("exact intersection route: {e}"));
            None
        }
        Err(e) => return Err(e.into()),
    };
    let numeric = if tuple.model() == Model::Cp1 && tuple.is_fano() {
        let grid = Grid::new(quadrature(cli, cfg))?;
        Some(fixed(df_intersection_fano(&cfg.metric()?, &action, &grid)?))
    } else {
        skipped.push("quadrature intersection route: needs an anticanonical CP1 tuple".into());
        None
    };
    let zero_mean = action.normalization == Normalization::ZeroMean;
    let report = json!({
        "normalization": action.normalization,
        "df_coefficient_route": coefficient,
        "df_intersection_exact": exact,
        "df_intersection_quadrature": numeric,
        "coefficient_route_is_futaki": zero_mean,
        "skipped": skipped,
    });
    Ok(json_out("df", &report))
}

fn twisted(cli: &Cli, cfg: &JobConfig) -> Result<Output> {
    let tuple = cfg.tuple()?;
    let action = cfg.action(&tuple)?;
    if cfg.twist.is_none() {
        return Err(CliError::Usage("twisted-futaki needs a `twist` section".into()));
    }
    let grid = Grid::new(quadrature(cli, cfg))?;
    let tf = futaki_twisted(&cfg.metric()?, &action, &grid)?;
    let report = json!({
        "t": fixed(tf.t),
        "value": fixed(tf.value),
        "coupled": fixed(tf.coupled),
        "correction": fixed(tf.correction),
        "w_preserves_twist": tf.w_preserves_twist,
    });
    Ok(json_out("twisted-futaki", &report))
}

fn bergman(cli: &Cli, cfg: &JobConfig, format: Format) -> Result<Output> {
    let spec = cfg.bergman.as_ref().ok_or_else(|| CliError::Usage("bergman needs a `bergman` section".into()))?;
    let tuple = cfg.tuple()?;
    let action = cfg.action(&tuple)?;
    let mt = cfg.metric()?;
    let quad = quadrature(cli, cfg);
    match spec.ks.as_slice() {
        [] => Err(CliError::Usage("bergman.ks is empty".into())),
        [k] => {
            let s = bergman_sample(&mt, &action, *k, &cfg.bergman_nodes(), quad)?;
            Ok(match format {
                Format::Csv => Output { name: "bergman", format, body: s.to_csv(), file_body: None },
                Format::Json => json_out("bergman", &s),
            })
        }
        ks => {
            let r = expansion_report(&mt, &action, ks, quad, spec.samples)?;
            Ok(match format {
                Format::Csv => {
                    let mut body = String::from(
                        "k,dimension,weight,trace_dimension,trace_weight,rho_residual,rho_deviation,equivariant_leading,equivariant_residual\n",
                    );
                    for row in &r.rows {
                        body.push_str(&format!(
                            "{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                            row.k,
                            row.dimension,
                            row.weight,
                            row.trace_dimension,
                            row.trace_weight,
                            row.rho_residual,
                            row.rho_deviation,
                            row.equivariant_leading,
                            row.equivariant_residual
                        ));
                    }
                    Output { name: "bergman", format, body, file_body: None }
                }
                Format::Json => json_out("bergman", &r),
            })
        }
    }
}

fn solve(cli: &Cli, cfg: &JobConfig, format: Format) -> Result<Output> {
    let spec = cfg.solver.clone().unwrap_or_else(|| csck_core::config::SolverSpec {
        equation: Equation::CoupledCscK,
        config: Default::default(),
    });
    let mut sc = spec.config;
    if let Some(t) = cli.tol {
        sc.tol = t;
    }
    let start = cfg.metric()?;
    let outcome = match spec.equation {
        Equation::CoupledCscK => solve_coupled_csck(&start, &sc)?,
        Equation::CoupledKE => solve_coupled_ke(&start, &sc)?,
    };
    if format == Format::Csv {
        return Ok(Output { name: "solve", format, body: outcome.trace_csv(), file_body: None });
    }
    let trace: Vec<Value> = outcome
        .trace
        .iter()
        .map(|r| {
            json!({
                "iteration": r.iteration,
                "residual": fixed(r.residual),
                "residual_l2": fixed(r.residual_l2),
                "damping": fixed(r.damping),
                "accepted": r.accepted,
            })
        })
        .collect();
    let report = json!({
        "equation": spec.equation,
        "iterations": outcome.iterations,
        "residual": fixed(outcome.residual),
        "convergence_order": fixed(convergence_order(&outcome.trace)),
        "trace": trace,
        "metric": MetricJson::from_metric(&outcome.metric)?,
    });
    Ok(json_out("solve", &report))
}

fn run_verify(cli: &Cli, criteria: &[u32]) -> Result<u8> {
    let ids: Vec<u32> = if criteria.is_empty() {
        verify::CRITERIA.iter().map(|c| c.0).collect()
    } else {
        criteria.to_vec()
    };
    if let Some(bad) = ids.iter().find(|&&i| !(1..=verify::CRITERIA.len() as u32).contains(&i)) {
        return Err(CliError::Usage(format!("no criterion {bad}")));
    }
    let results: Vec<_> = ids.iter().map(|&i| verify::run_criterion(i)).collect();
    let passed = results.iter().filter(|r| r.passed).count();
    let json = matches!(cli.format, Some(FormatArg::Json)) || cli.out.is_some();
    let out = if json {
        Output { name: "verify", format: Format::Json, body: pretty(&results), file_body: None }
    } else {
        let mut body = String::new();
        for r in &results {
            body.push_str(&format!("{r}\n"));
        }
        body.push_str(&format!("{passed}/{} criteria passed\n", results.len()));
        Output { name: "verify", format: Format::Json, body, file_body: None }
    };
    emit(&out, cli.out.as_deref())?;
    Ok(if passed == results.len() { 0 } else { EXIT_VERIFY })
}
