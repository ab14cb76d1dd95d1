//! Configuration-driven end-to-end runs with deterministic file outputs.
//!
//! One run integrates the Galerkin system, samples the estimators, solves
//! the control equations, and writes:
//!
//! - `trajectory.csv` — |γ_k|, |β_k| for the watch-list modes,
//! - `estimators.csv` — the `D_p` and `ε_p` columns,
//! - `control.csv` — `R_n` and the requested `R_p`,
//! - `certificate.json` — the existence certificate,
//! - `summary.json` — config hash, datum norms, certificate, `T_c`, timings.
//!
//! Outside of the `timings` field of the summary, two runs with the same
//! config produce byte-identical files. With `emit_plots` set, an SVG line
//! plot per curve is generated from the same samples.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constants::{ConstantKind, ConstantsBundle, ConstantsPolicy, estimate_constants};
use crate::control::{
    check_global_certificate, solve_control_n, solve_control_p_linear, ControlProblem,
    ControlSolution, ExistenceCertificate, LinearControlProblem, BLOWUP_THRESHOLD,
};
use crate::data::DatumSpec;
use crate::error::{Error, Result};
use crate::estimators::{
    datum_error, eps_tautological_many, growth_many, DatumErrorMode, EstimatorTrajectory, GridSpec,
};
use crate::field::StatePair;
use crate::galerkin::{GalerkinProblem, Trajectory};
use crate::mode::{Mode, ModeSet};

/// How the Galerkin mode set is specified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeSetSpec {
    Cube { radius: i64 },
    File { path: String },
}

/// Constants policy in configuration form.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ConstantsPolicyConfig {
    #[default]
    Tabulated,
    Computed {
        truncation_radius: f64,
        k_scan_radius: f64,
    },
}

/// Full description of one pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub datum: DatumSpec,
    pub mode_set: ModeSetSpec,
    pub nu: f64,
    pub eta: f64,
    pub t_final: f64,
    /// Basic control order (must exceed d/2 + 1).
    pub n: f64,
    /// Higher orders for the linear control problems.
    pub p_orders: Vec<f64>,
    /// Growth orders exported to estimators.csv (the orders needed by the
    /// control problems are added automatically).
    pub estimator_orders: Vec<f64>,
    pub grid_samples: usize,
    pub rtol: f64,
    pub atol: f64,
    pub constants: ConstantsPolicyConfig,
    pub blowup_threshold: f64,
    /// Modes whose coefficient magnitudes go to trajectory.csv.
    pub watch_modes: Vec<Vec<i64>>,
    pub out_dir: String,
    pub emit_plots: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 3,
            datum: DatumSpec::Abc {
                a: 1.0,
                b: 1.0,
                c: 1.0,
                d: 1.0,
            },
            mode_set: ModeSetSpec::Cube { radius: 2 },
            nu: 1.0,
            eta: 1.0,
            t_final: 0.5,
            n: 3.0,
            p_orders: vec![5.0],
            estimator_orders: vec![3.0, 4.0, 5.0, 6.0],
            grid_samples: 41,
            rtol: 1e-9,
            atol: 1e-12,
            constants: ConstantsPolicyConfig::Tabulated,
            blowup_threshold: BLOWUP_THRESHOLD,
            watch_modes: vec![vec![0, 1, 0], vec![1, 1, 0]],
            out_dir: "out".into(),
            emit_plots: false,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::Config(format!("dim must be >= 2, got {}", self.dim)));
        }
        if !(self.n > self.dim as f64 / 2.0 + 1.0) {
            return Err(Error::Config(format!(
                "basic order n = {} must exceed d/2 + 1 = {}",
                self.n,
                self.dim as f64 / 2.0 + 1.0
            )));
        }
        for &p in &self.p_orders {
            if !(p > self.n) {
                return Err(Error::Config(format!(
                    "higher order p = {p} must exceed n = {}",
                    self.n
                )));
            }
        }
        if self.nu < 0.0 || self.eta < 0.0 {
            return Err(Error::Config(
                "viscosity and resistivity must be nonnegative".into(),
            ));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::Config("t_final must be positive".into()));
        }
        if self.grid_samples < 2 {
            return Err(Error::Config("grid_samples must be at least 2".into()));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::Config("blowup_threshold must be positive".into()));
        }
        for k in &self.watch_modes {
            if k.len() != self.dim {
                return Err(Error::Config(format!(
                    "watch mode {k:?} has wrong dimension"
                )));
            }
        }
        Ok(())
    }

    pub fn mu(&self) -> f64 {
        self.nu.min(self.eta)
    }

    /// Hash of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        let mut out = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            write!(out, "{byte:02x}").unwrap();
        }
        out
    }

    fn build_mode_set(&self) -> Result<ModeSet> {
        match &self.mode_set {
            ModeSetSpec::Cube { radius } => emit_mode_cube(*radius, self.dim),
            ModeSetSpec::File { path } => {
                let text = std::fs::read_to_string(path)?;
                let coords: Vec<Vec<i64>> = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("{path}: {e}")))?;
                let modes: Result<Vec<Mode>> =
                    coords.into_iter().map(Mode::new).collect();
                ModeSet::symmetrized(self.dim, modes?)
            }
        }
    }

    fn constants_bundle(&self) -> Result<ConstantsBundle> {
        match &self.constants {
            ConstantsPolicyConfig::Tabulated => {
                if self.dim == 3 {
                    ConstantsBundle::tabulated(3)
                } else {
                    Err(Error::ConstantUnavailable {
                        d: self.dim,
                        p: self.n,
                        n: self.n,
                        kind: "any".into(),
                        available: "tabulated constants exist only for d = 3".into(),
                    })
                }
            }
            ConstantsPolicyConfig::Computed {
                truncation_radius,
                k_scan_radius,
            } => {
                let policy = ConstantsPolicy::Computed {
                    truncation_radius: *truncation_radius,
                    k_scan_radius: *k_scan_radius,
                };
                // every (p, n) pair the control problems will ask for
                let mut pairs = vec![(self.n, self.n)];
                for &p in &self.p_orders {
                    pairs.push((p, p));
                    pairs.push((p, self.n));
                }
                let mut entries = Vec::new();
                for (p, n) in pairs {
                    let bundle = estimate_constants(p, n, self.dim, policy)?;
                    entries.extend(bundle.entries);
                }
                Ok(ConstantsBundle {
                    d: self.dim,
                    source: crate::constants::ConstantsSource::Computed {
                        truncation_radius: *truncation_radius,
                        scan_radius: *k_scan_radius,
                    },
                    entries,
                })
            }
        }
    }
}

/// All nonzero modes with coordinates in `[-radius, radius]^d`.
pub fn emit_mode_cube(radius: i64, dim: usize) -> Result<ModeSet> {
    ModeSet::cube(radius, dim)
}

/// Everything a finished run hands back to the caller.
pub struct RunReport {
    pub config_hash: String,
    pub out_dir: PathBuf,
    pub certificate: ExistenceCertificate,
    pub t_c: f64,
    pub datum_norms: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
}

/// Intermediate products, exposed for tests and for callers that want the
/// curves rather than the files.
pub struct RunProducts {
    pub trajectory: Trajectory,
    pub growth: Vec<EstimatorTrajectory>,
    pub eps: Vec<EstimatorTrajectory>,
    pub r_n: ControlSolution,
    pub r_p: Vec<ControlSolution>,
    pub certificate: ExistenceCertificate,
    pub u0: StatePair,
}

/// Runs integrate → estimators → control → certificate and returns the
/// in-memory products without touching the filesystem.
pub fn run_products(config: &RunConfig) -> Result<(RunProducts, Vec<String>)> {
    config.validate()?;
    let mut warnings = Vec::new();
    let (u0, div_reports) = config.datum.realize()?;
    for w in &div_reports {
        warnings.push(format!(
            "datum coefficient at k = {:?} was not solenoidal (relative violation {:.3e}); projected",
            w.mode, w.relative_violation
        ));
    }
    if u0.dim() != config.dim {
        return Err(Error::DimMismatch {
            expected: config.dim,
            found: u0.dim(),
        });
    }
    let g = config.build_mode_set()?;
    let constants = config.constants_bundle()?;
    let n = config.n;

    let problem = GalerkinProblem::new(g.clone(), config.nu, config.eta, u0.clone(), config.t_final)?
        .with_tolerances(config.rtol, config.atol);
    let trajectory = problem.integrate()?;

    let grid = GridSpec {
        samples: config.grid_samples,
    };
    // growth orders: the configured list plus everything the control needs
    let mut growth_orders = config.estimator_orders.clone();
    for needed in [n, n + 1.0]
        .into_iter()
        .chain(config.p_orders.iter().flat_map(|&p| [p, p + 1.0]))
    {
        if !growth_orders.contains(&needed) {
            growth_orders.push(needed);
        }
    }
    growth_orders.sort_by(|a, b| a.partial_cmp(b).unwrap());
    growth_orders.dedup();
    let growth = growth_many(&trajectory, &growth_orders, &grid)?;

    let mut eps_orders: Vec<f64> = vec![n];
    eps_orders.extend(config.p_orders.iter().copied());
    eps_orders.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eps_orders.dedup();
    let eps = eps_tautological_many(&trajectory, &eps_orders, &grid)?;

    let find_growth = |p: f64| -> Result<EstimatorTrajectory> {
        growth
            .iter()
            .find(|e| e.order == p)
            .cloned()
            .ok_or_else(|| Error::InvalidOrders(format!("missing growth order {p}")))
    };
    let find_eps = |p: f64| -> Result<EstimatorTrajectory> {
        eps.iter()
            .find(|e| e.order == p)
            .cloned()
            .ok_or_else(|| Error::InvalidOrders(format!("missing eps order {p}")))
    };

    let delta_n = datum_error(&u0, &g, n, DatumErrorMode::Tautological)?;
    let control_problem = ControlProblem {
        dim: config.dim,
        n,
        mu: config.mu(),
        g_hat_n: constants.require(n, n, ConstantKind::GHat)?,
        k_hat_n: constants.require(n, n, ConstantKind::KHat)?,
        d_n: find_growth(n)?,
        d_n1: find_growth(n + 1.0)?,
        eps_n: find_eps(n)?,
        delta_n: delta_n.value,
        t_final: config.t_final,
        blowup_threshold: config.blowup_threshold,
        rtol: config.rtol.min(1e-9),
        atol: config.atol.min(1e-12),
    };
    let r_n = solve_control_n(&control_problem)?;
    let certificate = check_global_certificate(
        &control_problem.d_n,
        &r_n,
        config.mu(),
        control_problem.g_hat_n,
    );

    let mut r_p = Vec::new();
    for &p in &config.p_orders {
        let delta_p = datum_error(&u0, &g, p, DatumErrorMode::Tautological)?;
        let lp = LinearControlProblem {
            p,
            n,
            mu: config.mu(),
            g_hat_p: constants.require(p, p, ConstantKind::GHat)?,
            k_hat_p: constants.require(p, p, ConstantKind::KHat)?,
            g_hat_pn: constants.require(p, n, ConstantKind::GHat)?,
            d_p: find_growth(p)?,
            d_p1: find_growth(p + 1.0)?,
            eps_p: find_eps(p)?,
            delta_p: delta_p.value,
            blowup_threshold: config.blowup_threshold,
            rtol: config.rtol.min(1e-9),
            atol: config.atol.min(1e-12),
        };
        r_p.push(solve_control_p_linear(&lp, &r_n)?);
    }

    Ok((
        RunProducts {
            trajectory,
            growth,
            eps,
            r_n,
            r_p,
            certificate,
            u0,
        },
        warnings,
    ))
}

/// Runs the full pipeline and writes every output file.
pub fn run_pipeline(config: &RunConfig) -> Result<RunReport> {
    let t_start = Instant::now();
    let (products, warnings) = run_products(config)?;
    let t_compute = t_start.elapsed().as_secs_f64();

    let out_dir = PathBuf::from(&config.out_dir);
    std::fs::create_dir_all(&out_dir)?;
    let mut files = Vec::new();

    let grid = GridSpec {
        samples: config.grid_samples,
    };
    let times = grid.times(config.t_final);

    // trajectory.csv: watch-list coefficient magnitudes
    let watch: Result<Vec<Mode>> = config
        .watch_modes
        .iter()
        .map(|k| Mode::new(k.clone()))
        .collect();
    let watch = watch?;
    let mut csv = String::new();
    write!(csv, "t").unwrap();
    for k in &watch {
        let tag = mode_tag(k);
        write!(csv, ",gamma_{tag},beta_{tag}").unwrap();
    }
    csv.push('\n');
    for &t in &times {
        let state = products.trajectory.state_at(t)?;
        write!(csv, "{t}").unwrap();
        for k in &watch {
            let gu: f64 = state.u.coeff(k).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let gb: f64 = state.b.coeff(k).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            write!(csv, ",{gu},{gb}").unwrap();
        }
        csv.push('\n');
    }
    files.push(write_file(&out_dir, "trajectory.csv", &csv)?);

    // estimators.csv
    let export_growth: Vec<&EstimatorTrajectory> = products
        .growth
        .iter()
        .filter(|e| config.estimator_orders.contains(&e.order))
        .collect();
    let mut csv = String::new();
    write!(csv, "t").unwrap();
    for e in &export_growth {
        write!(csv, ",D_{}", order_tag(e.order)).unwrap();
    }
    for e in &products.eps {
        write!(csv, ",eps_{}", order_tag(e.order)).unwrap();
    }
    csv.push('\n');
    for (i, &t) in times.iter().enumerate() {
        write!(csv, "{t}").unwrap();
        for e in &export_growth {
            write!(csv, ",{}", e.values()[i]).unwrap();
        }
        for e in &products.eps {
            write!(csv, ",{}", e.values()[i]).unwrap();
        }
        csv.push('\n');
    }
    files.push(write_file(&out_dir, "estimators.csv", &csv)?);

    // control.csv on the grid, up to the control domain
    let mut csv = String::new();
    write!(csv, "t,R_{}", order_tag(config.n)).unwrap();
    for r in &products.r_p {
        write!(csv, ",R_{}", order_tag(r.order)).unwrap();
    }
    csv.push('\n');
    for &t in &times {
        if t > products.r_n.t_c {
            break;
        }
        write!(csv, "{t},{}", products.r_n.eval(t)).unwrap();
        for r in &products.r_p {
            if t <= r.t_c {
                write!(csv, ",{}", r.eval(t)).unwrap();
            } else {
                write!(csv, ",").unwrap();
            }
        }
        csv.push('\n');
    }
    files.push(write_file(&out_dir, "control.csv", &csv)?);

    // certificate.json
    let cert_json = serde_json::to_string_pretty(&products.certificate.to_record())?;
    files.push(write_file(&out_dir, "certificate.json", &cert_json)?);

    // summary.json
    let datum_norms: Vec<(f64, f64)> = {
        let mut orders = config.estimator_orders.clone();
        if !orders.contains(&config.n) {
            orders.push(config.n);
        }
        orders.sort_by(|a, b| a.partial_cmp(b).unwrap());
        orders
            .iter()
            .map(|&p| (p, products.u0.pair_norm(p)))
            .collect()
    };
    let summary = Summary {
        config_hash: config.hash(),
        datum_norms: datum_norms
            .iter()
            .map(|(p, v)| (order_tag(*p), *v))
            .collect(),
        certificate: serde_json::to_value(products.certificate.to_record())?,
        t_c: products.r_n.t_c,
        blew_up: products.r_n.blew_up,
        warnings: warnings.clone(),
        timings: Timings {
            compute_s: t_compute,
            total_s: t_start.elapsed().as_secs_f64(),
        },
    };
    files.push(write_file(
        &out_dir,
        "summary.json",
        &serde_json::to_string_pretty(&summary)?,
    )?);

    if config.emit_plots {
        for e in &export_growth {
            let name = format!("plot_D_{}.svg", order_tag(e.order));
            files.push(write_file(&out_dir, &name, &svg_curve(e.times(), e.values()))?);
        }
        for e in &products.eps {
            let name = format!("plot_eps_{}.svg", order_tag(e.order));
            files.push(write_file(&out_dir, &name, &svg_curve(e.times(), e.values()))?);
        }
        let r_times: Vec<f64> = times.iter().copied().filter(|&t| t <= products.r_n.t_c).collect();
        let r_values: Vec<f64> = r_times.iter().map(|&t| products.r_n.eval(t)).collect();
        let name = format!("plot_R_{}.svg", order_tag(config.n));
        files.push(write_file(&out_dir, &name, &svg_curve(&r_times, &r_values))?);
    }

    Ok(RunReport {
        config_hash: config.hash(),
        out_dir,
        certificate: products.certificate,
        t_c: products.r_n.t_c,
        datum_norms,
        warnings,
        files,
    })
}

#[derive(Serialize)]
struct Summary {
    config_hash: String,
    datum_norms: std::collections::BTreeMap<String, f64>,
    certificate: serde_json::Value,
    #[serde(rename = "Tc")]
    t_c: f64,
    blew_up: bool,
    warnings: Vec<String>,
    timings: Timings,
}

#[derive(Serialize)]
struct Timings {
    compute_s: f64,
    total_s: f64,
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    Ok(path)
}

fn mode_tag(k: &Mode) -> String {
    k.coords()
        .iter()
        .map(|&c| {
            if c < 0 {
                format!("m{}", -c)
            } else {
                c.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("_")
}

fn order_tag(p: f64) -> String {
    if p == p.floor() {
        format!("{}", p as i64)
    } else {
        format!("{p}")
    }
}

/// Minimal deterministic SVG polyline plot.
fn svg_curve(times: &[f64], values: &[f64]) -> String {
    let (w, h, margin) = (640.0, 400.0, 40.0);
    let tmax = times.iter().cloned().fold(f64::MIN, f64::max).max(1e-300);
    let tmin = times.iter().cloned().fold(f64::MAX, f64::min);
    let vmax = values.iter().cloned().fold(f64::MIN, f64::max).max(1e-300);
    let vmin = values.iter().cloned().fold(f64::MAX, f64::min).min(0.0);
    let sx = |t: f64| margin + (t - tmin) / (tmax - tmin).max(1e-300) * (w - 2.0 * margin);
    let sy = |v: f64| h - margin - (v - vmin) / (vmax - vmin).max(1e-300) * (h - 2.0 * margin);
    let mut points = String::new();
    for (t, v) in times.iter().zip(values) {
        write!(points, "{:.2},{:.2} ", sx(*t), sy(*v)).unwrap();
    }
    format!(
        concat!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            r#"<rect width="{w}" height="{h}" fill="white"/>"#,
            r#"<line x1="{m}" y1="{hm}" x2="{wm}" y2="{hm}" stroke="black"/>"#,
            r#"<line x1="{m}" y1="{m}" x2="{m}" y2="{hm}" stroke="black"/>"#,
            r#"<text x="{wm}" y="{hlabel}" text-anchor="end" font-size="12">t = {tmax}</text>"#,
            r#"<text x="{m}" y="{vlabel}" font-size="12">max = {vmax}</text>"#,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{points}"/>"#,
            "</svg>\n"
        ),
        w = w,
        h = h,
        m = margin,
        wm = w - margin,
        hm = h - margin,
        hlabel = h - margin + 16.0,
        vlabel = margin - 8.0,
        tmax = tmax,
        vmax = vmax,
        points = points.trim_end()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_config(out: &str) -> RunConfig {
        RunConfig {
            mode_set: ModeSetSpec::Cube { radius: 1 },
            nu: 8.0,
            eta: 8.0,
            t_final: 0.4,
            grid_samples: 21,
            out_dir: out.into(),
            ..RunConfig::default()
        }
    }

    #[test]
    fn validation_catches_bad_orders() {
        let mut c = test_config("unused");
        c.n = 2.0;
        assert!(c.validate().is_err());
        let mut c = test_config("unused");
        c.p_orders = vec![2.5];
        assert!(c.validate().is_err());
        let mut c = test_config("unused");
        c.nu = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn cube_sizes_match() {
        assert_eq!(emit_mode_cube(2, 3).unwrap().len(), 124);
        assert_eq!(emit_mode_cube(1, 3).unwrap().len(), 26);
        assert!(emit_mode_cube(0, 3).is_err());
    }

    #[test]
    fn pipeline_writes_all_outputs() {
        let dir = std::env::temp_dir().join("mhd_pipeline_smoke");
        let _ = std::fs::remove_dir_all(&dir);
        let config = test_config(dir.to_str().unwrap());
        let report = run_pipeline(&config).unwrap();
        assert!(report.out_dir.join("trajectory.csv").exists());
        assert!(report.out_dir.join("estimators.csv").exists());
        assert!(report.out_dir.join("control.csv").exists());
        assert!(report.out_dir.join("certificate.json").exists());
        assert!(report.out_dir.join("summary.json").exists());
        // μ = 8 with the 26-mode cube: existence certificate present either way
        assert!(report.t_c > 0.0);
        // header sanity
        let est = std::fs::read_to_string(report.out_dir.join("estimators.csv")).unwrap();
        assert!(est.starts_with("t,D_3,D_4,D_5,D_6,eps_3,eps_5"));
        let traj = std::fs::read_to_string(report.out_dir.join("trajectory.csv")).unwrap();
        assert!(traj.starts_with("t,gamma_0_1_0,beta_0_1_0,gamma_1_1_0,beta_1_1_0"));
    }

    #[test]
    fn pipeline_outputs_are_deterministic() {
        // two runs with an identical config: everything byte-identical
        // except the wall-clock timings block of the summary
        let dir = std::env::temp_dir().join("mhd_pipeline_det");
        let _ = std::fs::remove_dir_all(&dir);
        let config = test_config(dir.to_str().unwrap());
        run_pipeline(&config).unwrap();
        let names = ["trajectory.csv", "estimators.csv", "control.csv", "certificate.json"];
        let first: Vec<Vec<u8>> = names.iter().map(|n| std::fs::read(dir.join(n)).unwrap()).collect();
        let strip = |p: &Path| -> serde_json::Value {
            let mut v: serde_json::Value =
                serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
            v.as_object_mut().unwrap().remove("timings");
            v
        };
        let first_summary = strip(&dir.join("summary.json"));
        run_pipeline(&config).unwrap();
        for (name, before) in names.iter().zip(&first) {
            let after = std::fs::read(dir.join(name)).unwrap();
            assert_eq!(&after, before, "{name} differs between identical runs");
        }
        assert_eq!(strip(&dir.join("summary.json")), first_summary);
    }

    #[test]
    fn plots_emitted_when_requested() {
        let dir = std::env::temp_dir().join("mhd_pipeline_plots");
        let _ = std::fs::remove_dir_all(&dir);
        let mut config = test_config(dir.to_str().unwrap());
        config.emit_plots = true;
        let report = run_pipeline(&config).unwrap();
        assert!(report.out_dir.join("plot_D_3.svg").exists());
        assert!(report.out_dir.join("plot_eps_3.svg").exists());
        assert!(report.out_dir.join("plot_R_3.svg").exists());
        let svg = std::fs::read_to_string(report.out_dir.join("plot_D_3.svg")).unwrap();
        assert!(svg.starts_with("<svg"));
    }
}
