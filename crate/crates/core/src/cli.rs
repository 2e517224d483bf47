//! Command-line front end: flag parsing, experiment orchestration and
//! bit-stable file emission with manifest sidecars.
//!
//! Exit codes: 0 on success, 2 on invalid flags (one-line diagnostic), 1 on
//! internal numeric-invariant failures or I/O errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::emit;
use crate::error::Error;
use crate::measurement::{ejm_basis, PointerKind};
use crate::scenario::{run_validated, ScenarioConfig, SourceSpec, TriadAngles};
use crate::sweep::{
    find_critical_visibility, g_grid, sweep_g, theta_scan, OnsetMode, SweepSpec, VisibilityBound,
};
use crate::tbg::ZMode;

/// Parse an angle given in radians or as a fraction of pi, e.g. "0.5",
/// "pi/8", "3pi/8", "-pi/4", "0.5pi".
pub fn parse_angle(input: &str) -> Result<f64, String> {
    let text = input.trim().to_ascii_lowercase();
    if text.is_empty() {
        return Err("empty angle".to_string());
    }
    if let Some(pos) = text.find("pi") {
        let coef_text = &text[..pos];
        let rest = &text[pos + 2..];
        let coef = match coef_text {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other
                .parse::<f64>()
                .map_err(|_| format!("invalid angle '{input}'"))?,
        };
        let denom = if rest.is_empty() {
            1.0
        } else if let Some(denom_text) = rest.strip_prefix('/') {
            let denom: f64 = denom_text
                .parse()
                .map_err(|_| format!("invalid angle '{input}'"))?;
            if denom == 0.0 {
                return Err(format!("zero denominator in angle '{input}'"));
            }
            denom
        } else {
            return Err(format!("invalid angle '{input}'"));
        };
        Ok(coef * std::f64::consts::PI / denom)
    } else {
        text.parse::<f64>()
            .map_err(|_| format!("invalid angle '{input}'"))
    }
}

/// Parse a comma-separated angle triple "alpha,beta,gamma".
pub fn parse_angle_triple(input: &str) -> Result<TriadAngles, String> {
    let parts: Vec<&str> = input.split(',').collect();
    if parts.len() != 3 {
        return Err(format!(
            "expected three comma-separated angles in '{input}'"
        ));
    }
    Ok(TriadAngles::new(
        parse_angle(parts[0])?,
        parse_angle(parts[1])?,
        parse_angle(parts[2])?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PointerArg {
    Square,
    Optimal,
}

impl From<PointerArg> for PointerKind {
    fn from(value: PointerArg) -> Self {
        match value {
            PointerArg::Square => PointerKind::Square,
            PointerArg::Optimal => PointerKind::Optimal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ZModeArg {
    Computed,
    Dial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Singlet,
    Werner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl FormatArg {
    fn extension(self) -> &'static str {
        match self {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bilocal",
    version,
    about = "Exact simulator for sequential nonlocality sharing in the extended bilocal network"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the shared sharpness G and evaluate all four pair inequalities.
    Sweep(SweepArgs),
    /// Extract the Z onset of simultaneous violation per (theta, pointer).
    Thresholds(ThresholdsArgs),
    /// Search the critical Werner visibility for simultaneous violation.
    Visibility(VisibilityArgs),
    /// Dump the exact joint correlation tensor for one configuration.
    Distribution(DistributionArgs),
    /// Dump the joint-measurement basis states, tetrahedron data and
    /// concurrences for one theta.
    #[command(name = "ejm-info", alias = "ejm_info")]
    EjmInfo(EjmInfoArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output path (defaults to <command>.<format> in the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct SourceArgs {
    #[arg(long, value_enum, default_value_t = SourceArg::Singlet)]
    source: SourceArg,
    /// Visibility of the first source (werner only).
    #[arg(long)]
    v1: Option<f64>,
    /// Visibility of the second source (werner only).
    #[arg(long)]
    v2: Option<f64>,
}

impl SourceArgs {
    fn resolve(&self) -> Result<(SourceSpec, SourceSpec), CliError> {
        match self.source {
            SourceArg::Singlet => {
                if self.v1.is_some() || self.v2.is_some() {
                    return Err(CliError::Usage(
                        "--v1/--v2 apply only with --source werner".into(),
                    ));
                }
                Ok((SourceSpec::Singlet, SourceSpec::Singlet))
            }
            SourceArg::Werner => {
                let v1 = self.v1.unwrap_or(1.0);
                let v2 = self.v2.unwrap_or(1.0);
                for v in [v1, v2] {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(CliError::Usage(format!("visibility {v} outside [0, 1]")));
                    }
                }
                Ok((SourceSpec::Werner { v: v1 }, SourceSpec::Werner { v: v2 }))
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Joint-measurement angle (radians or a pi fraction like "pi/8").
    #[arg(long, value_parser = parse_angle, default_value = "0")]
    theta: f64,
    #[arg(long, value_enum, default_value_t = PointerArg::Square)]
    pointer: PointerArg,
    /// Number of G grid points covering [0, 1].
    #[arg(long, default_value_t = 101)]
    g_steps: usize,
    #[arg(long, value_enum, default_value_t = ZModeArg::Computed)]
    z_mode: ZModeArg,
    /// Dial bound parameter (required with --z-mode dial).
    #[arg(long, required_if_eq("z_mode", "dial"))]
    z: Option<f64>,
    #[command(flatten)]
    sources: SourceArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdsArgs {
    /// Comma-separated list of thetas.
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, default_value = "0,pi/8,pi/4,3pi/8")]
    thetas: Vec<f64>,
    #[arg(long, value_enum, default_value_t = PointerArg::Square)]
    pointer: PointerArg,
    #[arg(long, value_enum, default_value_t = ZModeArg::Computed)]
    z_mode: ZModeArg,
    #[command(flatten)]
    sources: SourceArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VisibilityArgs {
    #[arg(long, value_parser = parse_angle, default_value = "0")]
    theta: f64,
    /// Dial bound parameter (required with --z-mode dial).
    #[arg(long, required_if_eq("z_mode", "dial"))]
    z: Option<f64>,
    #[arg(long, value_enum, default_value_t = PointerArg::Square)]
    pointer: PointerArg,
    #[arg(long, value_enum, default_value_t = ZModeArg::Dial)]
    z_mode: ZModeArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DistributionArgs {
    #[arg(long, value_parser = parse_angle, default_value = "0")]
    theta: f64,
    #[arg(long, value_enum, default_value_t = PointerArg::Square)]
    pointer: PointerArg,
    /// Sharpness of the first A-side observer.
    #[arg(long, default_value_t = 1.0)]
    g1: f64,
    /// Sharpness of the first C-side observer.
    #[arg(long, default_value_t = 1.0)]
    g2: f64,
    #[arg(long, value_parser = parse_angle_triple, default_value = "pi/4,pi/4,0")]
    angles_a1: TriadAngles,
    #[arg(long, value_parser = parse_angle_triple, default_value = "pi/4,pi/4,0")]
    angles_a2: TriadAngles,
    #[arg(long, value_parser = parse_angle_triple, default_value = "pi/4,pi/4,0")]
    angles_c1: TriadAngles,
    #[arg(long, value_parser = parse_angle_triple, default_value = "pi/4,pi/4,0")]
    angles_c2: TriadAngles,
    #[command(flatten)]
    sources: SourceArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EjmInfoArgs {
    #[arg(long, value_parser = parse_angle, default_value = "0")]
    theta: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Failure(err.to_string())
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Thresholds(args) => cmd_thresholds(args),
        Command::Visibility(args) => cmd_visibility(args),
        Command::Distribution(args) => cmd_distribution(args),
        Command::EjmInfo(args) => cmd_ejm_info(args),
    }
}

fn check_theta(theta: f64) -> Result<(), CliError> {
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(CliError::Usage(format!("theta {theta} outside [0, pi/2]")));
    }
    Ok(())
}

fn check_unit(name: &str, value: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(CliError::Usage(format!("{name} {value} outside [0, 1]")));
    }
    Ok(())
}

fn resolve_z_mode(mode: ZModeArg, z: Option<f64>) -> Result<ZMode, CliError> {
    match mode {
        ZModeArg::Computed => Ok(ZMode::Computed),
        ZModeArg::Dial => {
            let z = z.ok_or_else(|| CliError::Usage("--z required with --z-mode dial".into()))?;
            if z < 0.0 || !z.is_finite() {
                return Err(CliError::Usage(format!("dial z {z} must be >= 0")));
            }
            Ok(ZMode::Dial(z))
        }
    }
}

fn write_with_manifest(
    command: &str,
    config: Value,
    output: &OutputArgs,
    content: &str,
) -> Result<(), CliError> {
    let path = output
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{command}.{}", output.format.extension())));
    let path_text = path.display().to_string();
    let manifest_value = emit::manifest(command, config, &[(path_text.clone(), content)]);
    let manifest_text = emit::to_canonical_json(&manifest_value);
    let manifest_path = PathBuf::from(format!("{path_text}.manifest.json"));
    std::fs::write(&path, content)
        .map_err(|e| CliError::Failure(format!("writing {path_text}: {e}")))?;
    std::fs::write(&manifest_path, &manifest_text)
        .map_err(|e| CliError::Failure(format!("writing {}: {e}", manifest_path.display())))?;
    println!("wrote {path_text}");
    println!("wrote {}", manifest_path.display());
    Ok(())
}

fn source_value(spec: &SourceSpec) -> Value {
    serde_json::to_value(spec).expect("source serialization")
}

fn angles_value(angles: &TriadAngles) -> Value {
    json!({
        "alpha": emit::num(angles.alpha),
        "beta": emit::num(angles.beta),
        "gamma": emit::num(angles.gamma),
    })
}

fn z_mode_value(z_mode: &ZMode) -> Value {
    match z_mode {
        ZMode::Computed => json!("computed"),
        ZMode::Dial(z) => json!({ "dial": emit::num(*z) }),
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    check_theta(args.theta)?;
    if args.g_steps < 2 {
        return Err(CliError::Usage("--g-steps must be at least 2".into()));
    }
    let (source1, source2) = args.sources.resolve()?;
    let z_mode = resolve_z_mode(args.z_mode, args.z)?;
    let spec = SweepSpec::new(args.theta, args.pointer.into())
        .with_sources(source1, source2)
        .with_z_mode(z_mode);
    let grid = g_grid(args.g_steps);
    let rows = sweep_g(&spec, &grid)?;

    let config = json!({
        "theta": emit::num(args.theta),
        "pointer": PointerKind::from(args.pointer).to_string(),
        "g_steps": args.g_steps,
        "z_mode": z_mode_value(&z_mode),
        "source1": source_value(&source1),
        "source2": source_value(&source2),
        "angles_a1": angles_value(&spec.angles_a1),
        "angles_a2": angles_value(&spec.angles_a2),
        "angles_c1": angles_value(&spec.angles_c1),
        "angles_c2": angles_value(&spec.angles_c2),
    });
    let content = match args.output.format {
        FormatArg::Csv => emit::sweep_csv(&rows),
        FormatArg::Json => emit::to_canonical_json(&emit::sweep_json(config.clone(), &rows)),
    };
    write_with_manifest("sweep", config, &args.output, &content)
}

fn cmd_thresholds(args: ThresholdsArgs) -> Result<(), CliError> {
    for &theta in &args.thetas {
        check_theta(theta)?;
    }
    if args.thetas.is_empty() {
        return Err(CliError::Usage(
            "--thetas must name at least one angle".into(),
        ));
    }
    let (source1, source2) = args.sources.resolve()?;
    let mode = match args.z_mode {
        ZModeArg::Computed => OnsetMode::Computed,
        ZModeArg::Dial => OnsetMode::Dial,
    };
    let results = theta_scan(
        &args.thetas,
        &[args.pointer.into()],
        (source1, source2),
        mode,
    )?;

    let config = json!({
        "thetas": args.thetas.iter().map(|&t| emit::num(t)).collect::<Vec<_>>(),
        "pointer": PointerKind::from(args.pointer).to_string(),
        "z_mode": match mode {
            OnsetMode::Computed => "computed",
            OnsetMode::Dial => "dial",
        },
        "source1": source_value(&source1),
        "source2": source_value(&source2),
    });
    let content = match args.output.format {
        FormatArg::Csv => emit::thresholds_csv(&results),
        FormatArg::Json => {
            emit::to_canonical_json(&emit::thresholds_json(config.clone(), &results))
        }
    };
    write_with_manifest("thresholds", config, &args.output, &content)
}

fn cmd_visibility(args: VisibilityArgs) -> Result<(), CliError> {
    check_theta(args.theta)?;
    let (bound, mode_name) = match args.z_mode {
        ZModeArg::Computed => (VisibilityBound::Computed, "computed"),
        ZModeArg::Dial => {
            let z = args
                .z
                .ok_or_else(|| CliError::Usage("--z required with --z-mode dial".into()))?;
            if z < 0.0 || !z.is_finite() {
                return Err(CliError::Usage(format!("dial z {z} must be >= 0")));
            }
            (VisibilityBound::Dial(z), "dial")
        }
    };
    let pointer: PointerKind = args.pointer.into();
    let v = find_critical_visibility(args.theta, pointer, bound)?;

    let config = json!({
        "theta": emit::num(args.theta),
        "z": args.z.map(emit::num).unwrap_or(Value::Null),
        "pointer": pointer.to_string(),
        "z_mode": mode_name,
    });
    let content = match args.output.format {
        FormatArg::Csv => {
            emit::visibility_csv(args.theta, args.z, &pointer.to_string(), mode_name, v)
        }
        FormatArg::Json => emit::to_canonical_json(&emit::visibility_json(
            config.clone(),
            args.theta,
            args.z,
            &pointer.to_string(),
            mode_name,
            v,
        )),
    };
    write_with_manifest("visibility", config, &args.output, &content)
}

fn cmd_distribution(args: DistributionArgs) -> Result<(), CliError> {
    check_theta(args.theta)?;
    check_unit("--g1", args.g1)?;
    check_unit("--g2", args.g2)?;
    let (source1, source2) = args.sources.resolve()?;
    let config = ScenarioConfig {
        source1,
        source2,
        theta: args.theta,
        pointer: args.pointer.into(),
        g1: args.g1,
        g2: args.g2,
        angles_a1: args.angles_a1,
        angles_a2: args.angles_a2,
        angles_c1: args.angles_c1,
        angles_c2: args.angles_c2,
    };
    let tensor = run_validated(&config)?;

    let config_value = json!({
        "theta": emit::num(args.theta),
        "pointer": config.pointer.to_string(),
        "g1": emit::num(args.g1),
        "g2": emit::num(args.g2),
        "source1": source_value(&source1),
        "source2": source_value(&source2),
        "angles_a1": angles_value(&config.angles_a1),
        "angles_a2": angles_value(&config.angles_a2),
        "angles_c1": angles_value(&config.angles_c1),
        "angles_c2": angles_value(&config.angles_c2),
    });
    let content = match args.output.format {
        FormatArg::Csv => emit::distribution_csv(&tensor),
        FormatArg::Json => {
            emit::to_canonical_json(&emit::distribution_json(config_value.clone(), &tensor))
        }
    };
    write_with_manifest("distribution", config_value, &args.output, &content)
}

fn cmd_ejm_info(args: EjmInfoArgs) -> Result<(), CliError> {
    check_theta(args.theta)?;
    let basis = ejm_basis(args.theta)?;
    let config = json!({ "theta": emit::num(args.theta) });
    let content = match args.output.format {
        FormatArg::Csv => emit::ejm_csv(&basis),
        FormatArg::Json => emit::to_canonical_json(&emit::ejm_json(&basis)),
    };
    write_with_manifest("ejm_info", config, &args.output, &content)
}
