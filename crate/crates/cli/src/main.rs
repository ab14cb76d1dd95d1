//! `mhd` — Galerkin runs, inequality constants and datum tools.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mhd_core::constants::{estimate_constants, ConstantKind, ConstantsPolicy, ConstantsSource};
use mhd_core::control::CertificateKind;
use mhd_core::data::{save_datum, DatumSpec};
use mhd_core::pipeline::{run_pipeline, RunConfig};

#[derive(Parser)]
#[command(
    name = "mhd",
    about = "Spectral Galerkin solutions of incompressible MHD with a-posteriori existence certificates",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: integrate, estimate, control, certify.
    Run(RunArgs),
    /// Print inequality constants (tabulated or computed lattice sums).
    Constants(ConstantsArgs),
    /// Build a named initial datum and write or describe it.
    Datum(DatumArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override: set viscosity and resistivity to a common value.
    #[arg(long)]
    mu: Option<f64>,
    /// Override: final time of the Galerkin integration.
    #[arg(long)]
    tf: Option<f64>,
    /// Override: output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, default_value_t = 3.0)]
    p: f64,
    #[arg(long, default_value_t = 3.0)]
    n: f64,
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// `tabulated` or `computed`.
    #[arg(long, default_value = "tabulated")]
    policy: String,
    /// Truncation radius R of the lattice sums (computed mode).
    #[arg(long, default_value_t = 40.0)]
    truncation_radius: f64,
    /// Scan |k| up to this radius for the sup (computed mode).
    #[arg(long, default_value_t = 6.0)]
    scan_radius: f64,
}

#[derive(Args)]
struct DatumArgs {
    /// `abc:A,B,C,D`, `ot:BETA` or `file:PATH`.
    #[arg(long)]
    datum: String,
    /// Write the datum to this path in the spectral JSON format.
    #[arg(long)]
    emit: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Constants(args) => constants(args),
        Command::Datum(args) => datum(args),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = RunConfig::from_file(&args.config)
        .with_context(|| format!("loading config {}", args.config.display()))?;
    if let Some(mu) = args.mu {
        config.nu = mu;
        config.eta = mu;
    }
    if let Some(tf) = args.tf {
        config.t_final = tf;
    }
    if let Some(out) = args.out {
        config.out_dir = out.display().to_string();
    }
    let report = run_pipeline(&config)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("run {} -> {}", report.config_hash, report.out_dir.display());
    for (p, v) in &report.datum_norms {
        println!("  ||u0||_{p} = {v}");
    }
    match &report.certificate.kind {
        CertificateKind::Global { t1, value } => {
            println!(
                "  certificate: GLOBAL existence; (D_n + R_n)({t1:.6}) = {value:.6} <= mu/G_hat_n = {:.6}",
                report.certificate.mu / report.certificate.g_hat_n
            );
        }
        CertificateKind::Finite { t_c } => {
            println!("  certificate: existence granted on [0, {t_c:.6}) only");
        }
    }
    println!("  control domain end T_c = {:.6}", report.t_c);
    for f in &report.files {
        println!("  wrote {}", f.display());
    }
    Ok(())
}

fn constants(args: ConstantsArgs) -> Result<()> {
    let policy = match args.policy.as_str() {
        "tabulated" => ConstantsPolicy::Tabulated,
        "computed" => ConstantsPolicy::Computed {
            truncation_radius: args.truncation_radius,
            k_scan_radius: args.scan_radius,
        },
        other => bail!("unknown constants policy `{other}` (use tabulated|computed)"),
    };
    let bundle = estimate_constants(args.p, args.n, args.d, policy)?;
    let (source, radius, scan) = match &bundle.source {
        ConstantsSource::Tabulated => ("tabulated", None, None),
        ConstantsSource::Computed {
            truncation_radius,
            scan_radius,
        } => ("computed", Some(*truncation_radius), Some(*scan_radius)),
    };
    let k_argmax = bundle
        .entries
        .iter()
        .find(|e| e.kind == ConstantKind::K)
        .and_then(|e| e.k_argmax.clone());
    let table = serde_json::json!({
        "d": args.d,
        "p": args.p,
        "n": args.n,
        "K": bundle.get(args.p, args.n, ConstantKind::K),
        "G": bundle.get(args.p, args.n, ConstantKind::G),
        "K_hat": bundle.get(args.p, args.n, ConstantKind::KHat),
        "G_hat": bundle.get(args.p, args.n, ConstantKind::GHat),
        "source": source,
        "R": radius,
        "k_scan_radius": scan,
        "k_argmax": k_argmax,
        "tail_indicator": bundle.entries.iter().find_map(|e| e.tail_indicator),
    });
    println!("{}", serde_json::to_string_pretty(&table)?);
    Ok(())
}

fn datum(args: DatumArgs) -> Result<()> {
    let spec = DatumSpec::parse(&args.datum)?;
    let (pair, warnings) = spec.realize()?;
    for w in &warnings {
        eprintln!(
            "warning: coefficient at k = {:?} was not solenoidal (relative violation {:.3e}); projected",
            w.mode, w.relative_violation
        );
    }
    for p in [0.0, 3.0, 4.0, 5.0, 6.0] {
        println!("||u0||_{p} = {}", pair.pair_norm(p));
    }
    if let Some(path) = args.emit {
        save_datum(&pair, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
