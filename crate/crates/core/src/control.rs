//! Control Cauchy problems and existence certificates.
//!
//! The order-n control problem is the Riccati-type scalar ODE
//!
//! ```text
//! dR_n/dt = -μ R_n + (Ĝ_n D_n + K̂_n D_{n+1}) R_n + Ĝ_n R_n² + ε_n,   R_n(0) = δ_n,
//! ```
//!
//! whose solution bounds `‖u - u_a‖_n`; its blow-up time `T_c` is a lower
//! bound on the exact solution's lifespan. For any `p > n` the linear
//! problem
//!
//! ```text
//! dR_p/dt = -μ R_p + (Ĝ_p D_p + K̂_p D_{p+1} + Ĝ_pn R_n) R_p + ε_p,   R_p(0) = δ_p
//! ```
//!
//! bounds the order-p distance, and has the quadrature closed form
//! `R_p(t) = e^{-μt + A_p(t)} (δ_p + ∫ e^{μs - A_p(s)} ε_p(s) ds)`, kept
//! here as a cross-check on the direct integration. With the zero
//! approximate solution everything collapses to closed formulas, including
//! the global-existence threshold `‖u0‖_n ≤ μ/Ĝ_n` and the decay envelope.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::EstimatorTrajectory;
use crate::ode::{self, OdeOptions, OdeSolution};
use crate::spline::CubicSpline;

/// `e_μ(t) = (1 - e^{-μt})/μ`, continuously extended by `e_0(t) = t`.
pub fn e_mu(mu: f64, t: f64) -> f64 {
    if mu == 0.0 {
        t
    } else {
        -(-mu * t).exp_m1() / mu
    }
}

/// Inputs of the order-n (nonlinear) control problem.
pub struct ControlProblem {
    pub dim: usize,
    pub n: f64,
    pub mu: f64,
    pub g_hat_n: f64,
    pub k_hat_n: f64,
    pub d_n: EstimatorTrajectory,
    pub d_n1: EstimatorTrajectory,
    pub eps_n: EstimatorTrajectory,
    pub delta_n: f64,
    pub t_final: f64,
    /// R above this value counts as blown up (vertical asymptote nearby).
    pub blowup_threshold: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl ControlProblem {
    fn validate(&self) -> Result<()> {
        if !(self.n > self.dim as f64 / 2.0 + 1.0) {
            return Err(Error::InvalidOrders(format!(
                "control order must exceed d/2 + 1 = {}, got n = {}",
                self.dim as f64 / 2.0 + 1.0,
                self.n
            )));
        }
        if self.delta_n < 0.0 {
            return Err(Error::InvalidOrders(format!(
                "datum error must be nonnegative, got {}",
                self.delta_n
            )));
        }
        for (name, est) in [("D_n", &self.d_n), ("D_n+1", &self.d_n1), ("eps_n", &self.eps_n)] {
            if est.values().iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidOrders(format!(
                    "estimator {name} carries a negative or non-finite sample"
                )));
            }
        }
        Ok(())
    }
}

/// Default blow-up threshold for the control equations.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

/// A solved control problem: `R` on `[0, T_c]`, with dense evaluation.
pub struct ControlSolution {
    pub order: f64,
    pub mu: f64,
    /// End of the computed domain: the blow-up time when `blew_up`,
    /// otherwise the full horizon.
    pub t_c: f64,
    pub blew_up: bool,
    solution: OdeSolution,
    /// Accumulated exponent `A_p` of the linear closed form (linear
    /// problems only).
    pub a_exponent: Option<CubicSpline>,
}

impl ControlSolution {
    /// Sample times of the underlying integration (within `[0, T_c]`).
    pub fn times(&self) -> &[f64] {
        &self.solution.times
    }

    /// `R(t)`, clamping `t` into the computed domain.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.solution.t_end());
        self.solution.eval(t).map(|y| y[0].max(0.0)).unwrap_or(0.0)
    }
}

/// Solves the order-n control Cauchy problem, detecting blow-up.
pub fn solve_control_n(problem: &ControlProblem) -> Result<ControlSolution> {
    problem.validate()?;
    let opts = OdeOptions {
        rtol: problem.rtol,
        atol: problem.atol,
        stop_above: Some((0, problem.blowup_threshold)),
        stop_on_underflow: true,
        ..OdeOptions::default()
    };
    let mu = problem.mu;
    let g_hat = problem.g_hat_n;
    let k_hat = problem.k_hat_n;
    let f = |t: f64, y: &[f64], dy: &mut [f64]| {
        let r = y[0];
        let coeff = -mu + g_hat * problem.d_n.eval(t) + k_hat * problem.d_n1.eval(t);
        dy[0] = coeff * r + g_hat * r * r + problem.eps_n.eval(t);
    };
    let solution = ode::integrate(f, 0.0, problem.t_final, &[problem.delta_n], &opts)?;
    let (t_c, blew_up) = match solution.stopped_at {
        Some(t) => (t, true),
        None => (problem.t_final, false),
    };
    Ok(ControlSolution {
        order: problem.n,
        mu,
        t_c,
        blew_up,
        solution,
        a_exponent: None,
    })
}

/// Inputs of the linear order-p control problem (`p > n`).
pub struct LinearControlProblem {
    pub p: f64,
    pub n: f64,
    pub mu: f64,
    pub g_hat_p: f64,
    pub k_hat_p: f64,
    pub g_hat_pn: f64,
    pub d_p: EstimatorTrajectory,
    pub d_p1: EstimatorTrajectory,
    pub eps_p: EstimatorTrajectory,
    pub delta_p: f64,
    pub blowup_threshold: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl LinearControlProblem {
    fn validate(&self) -> Result<()> {
        if !(self.p > self.n) {
            return Err(Error::InvalidOrders(format!(
                "linear control requires p > n, got p = {}, n = {}",
                self.p, self.n
            )));
        }
        if self.delta_p < 0.0 {
            return Err(Error::InvalidOrders(format!(
                "datum error must be nonnegative, got {}",
                self.delta_p
            )));
        }
        Ok(())
    }

    /// Coefficient `Ĝ_p D_p + K̂_p D_{p+1} + Ĝ_pn R_n` at time `t`.
    fn coeff(&self, t: f64, rn: &ControlSolution) -> f64 {
        self.g_hat_p * self.d_p.eval(t) + self.k_hat_p * self.d_p1.eval(t)
            + self.g_hat_pn * rn.eval(t)
    }

    /// Cumulative exponent `A_p(t) = ∫_0^t coeff(s) ds` on a fine grid.
    fn a_exponent(&self, rn: &ControlSolution, t_end: f64, samples: usize) -> CubicSpline {
        let n = samples.max(8);
        let mut times = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n + 1);
        let h = t_end / n as f64;
        let mut acc = 0.0;
        times.push(0.0);
        values.push(0.0);
        let mut prev = self.coeff(0.0, rn);
        for i in 1..=n {
            let t = i as f64 * h;
            let mid = self.coeff(t - 0.5 * h, rn);
            let cur = self.coeff(t, rn);
            acc += h / 6.0 * (prev + 4.0 * mid + cur);
            times.push(t);
            values.push(acc);
            prev = cur;
        }
        CubicSpline::new(times, values)
    }
}

/// Solves the linear order-p problem by direct adaptive integration on the
/// domain of `rn`. Also records the accumulated exponent `A_p`.
pub fn solve_control_p_linear(
    problem: &LinearControlProblem,
    rn: &ControlSolution,
) -> Result<ControlSolution> {
    problem.validate()?;
    let t_end = rn.t_c.min(problem.d_p.t_final());
    let opts = OdeOptions {
        rtol: problem.rtol,
        atol: problem.atol,
        stop_above: Some((0, problem.blowup_threshold)),
        stop_on_underflow: true,
        ..OdeOptions::default()
    };
    let mu = problem.mu;
    let f = |t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = (-mu + problem.coeff(t, rn)) * y[0] + problem.eps_p.eval(t);
    };
    let solution = ode::integrate(f, 0.0, t_end, &[problem.delta_p], &opts)?;
    let (t_c, blew_up) = match solution.stopped_at {
        Some(t) => (t, true),
        None => (t_end, false),
    };
    let a_exponent = problem.a_exponent(rn, t_c, 2000);
    Ok(ControlSolution {
        order: problem.p,
        mu,
        t_c,
        blew_up,
        solution,
        a_exponent: Some(a_exponent),
    })
}

/// Evaluates the closed form
/// `R_p(t) = e^{-μt + A_p(t)} (δ_p + ∫_0^t e^{μs - A_p(s)} ε_p(s) ds)`
/// by composite quadrature, as an independent route to the linear solution.
pub fn linear_control_quadrature(
    problem: &LinearControlProblem,
    rn: &ControlSolution,
    times: &[f64],
) -> Result<Vec<f64>> {
    problem.validate()?;
    let t_end = times.iter().cloned().fold(0.0, f64::max);
    let samples = 4000usize;
    let a_spline = problem.a_exponent(rn, t_end.max(1e-12), samples);
    let mu = problem.mu;
    let integrand = |s: f64| (mu * s - a_spline.eval(s)).exp() * problem.eps_p.eval(s);

    // cumulative Simpson on the same fine grid, then interpolation
    let n = samples;
    let h = t_end.max(1e-12) / n as f64;
    let mut grid_t = Vec::with_capacity(n + 1);
    let mut grid_v = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    grid_t.push(0.0);
    grid_v.push(0.0);
    let mut prev = integrand(0.0);
    for i in 1..=n {
        let t = i as f64 * h;
        let mid = integrand(t - 0.5 * h);
        let cur = integrand(t);
        acc += h / 6.0 * (prev + 4.0 * mid + cur);
        grid_t.push(t);
        grid_v.push(acc);
        prev = cur;
    }
    let integral = CubicSpline::new(grid_t, grid_v);
    Ok(times
        .iter()
        .map(|&t| {
            (-mu * t + a_spline.eval(t)).exp() * (problem.delta_p + integral.eval(t))
        })
        .collect())
}

/// Closed forms for the zero approximate solution: `D ≡ 0`, `ε ≡ 0`,
/// `δ_p = ‖u0‖_p`.
pub struct ZeroSolutionBounds {
    pub n: f64,
    pub mu: f64,
    pub g_hat_n: f64,
    pub t_c: f64,
    norm_n: f64,
    norms: Vec<(f64, f64)>,
    g_hat_pn: Vec<(f64, f64)>,
}

impl ZeroSolutionBounds {
    /// `R_n(t) = ‖u0‖_n e^{-μt} / (1 - Ĝ_n ‖u0‖_n e_μ(t))`.
    pub fn r_n(&self, t: f64) -> f64 {
        if self.norm_n == 0.0 {
            return 0.0;
        }
        self.norm_n * (-self.mu * t).exp() / (1.0 - self.g_hat_n * self.norm_n * e_mu(self.mu, t))
    }

    /// `R_p(t) = ‖u0‖_p e^{-μt} / (1 - Ĝ_n ‖u0‖_n e_μ(t))^(Ĝ_pn/Ĝ_n)`.
    pub fn r_p(&self, p: f64, t: f64) -> Result<f64> {
        let norm_p = self
            .norms
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::InvalidOrders(format!("no ‖u0‖_p supplied for p = {p}")))?;
        let g_pn = self
            .g_hat_pn
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::InvalidOrders(format!("no Ĝ_pn supplied for p = {p}")))?;
        if norm_p == 0.0 {
            return Ok(0.0);
        }
        let denom = 1.0 - self.g_hat_n * self.norm_n * e_mu(self.mu, t);
        Ok(norm_p * (-self.mu * t).exp() / denom.powf(g_pn / self.g_hat_n))
    }

    pub fn is_global(&self) -> bool {
        self.t_c.is_infinite()
    }
}

/// Builds the zero-solution bounds from datum norms and constants.
/// `u0_norms` maps orders to `‖u0‖_p` and must contain the basic order `n`;
/// `g_hat_pn` supplies `Ĝ_pn` for the higher orders to be queried.
pub fn zero_solution_bounds(
    u0_norms: &[(f64, f64)],
    n: f64,
    mu: f64,
    g_hat_n: f64,
    g_hat_pn: &[(f64, f64)],
    dim: usize,
) -> Result<ZeroSolutionBounds> {
    if !(n > dim as f64 / 2.0 + 1.0) {
        return Err(Error::InvalidOrders(format!(
            "zero-solution bounds need n > d/2 + 1 = {}, got n = {n}",
            dim as f64 / 2.0 + 1.0
        )));
    }
    let norm_n = u0_norms
        .iter()
        .find(|(q, _)| *q == n)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::InvalidOrders(format!("u0_norms must contain the basic order {n}")))?;
    // norm_n = 0 falls under the first case (1/(G_hat·0) := +inf)
    let t_c = if norm_n == 0.0 || (mu > 0.0 && norm_n <= mu / g_hat_n) {
        f64::INFINITY
    } else if mu > 0.0 {
        -(1.0 - mu / (g_hat_n * norm_n)).ln() / mu
    } else {
        1.0 / (g_hat_n * norm_n)
    };
    Ok(ZeroSolutionBounds {
        n,
        mu,
        g_hat_n,
        t_c,
        norm_n,
        norms: u0_norms.to_vec(),
        g_hat_pn: g_hat_pn.to_vec(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertificateKind {
    /// Existence on `[0, ∞)` with an explicit decay envelope from `t1`.
    Global { t1: f64, value: f64 },
    /// Existence granted only up to `T_c`.
    Finite { t_c: f64 },
}

#[derive(Clone, Debug)]
pub struct ExistenceCertificate {
    pub n: f64,
    pub mu: f64,
    pub g_hat_n: f64,
    pub kind: CertificateKind,
}

/// Serialization form of a certificate.
#[derive(Serialize)]
pub struct CertificateRecord {
    pub order_n: f64,
    pub mu: f64,
    pub g_hat_n: f64,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(rename = "T_c", skip_serializing_if = "Option::is_none")]
    pub t_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<EnvelopeRecord>,
}

#[derive(Serialize)]
pub struct EnvelopeRecord {
    pub coeff: f64,
    pub rate: f64,
    pub denom_coeff: f64,
}

impl ExistenceCertificate {
    pub fn is_global(&self) -> bool {
        matches!(self.kind, CertificateKind::Global { .. })
    }

    pub fn to_record(&self) -> CertificateRecord {
        match self.kind {
            CertificateKind::Global { t1, value } => CertificateRecord {
                order_n: self.n,
                mu: self.mu,
                g_hat_n: self.g_hat_n,
                kind: "global",
                t1: Some(t1),
                value: Some(value),
                t_c: None,
                envelope: Some(EnvelopeRecord {
                    coeff: value,
                    rate: self.mu,
                    denom_coeff: self.g_hat_n * value,
                }),
            },
            CertificateKind::Finite { t_c } => CertificateRecord {
                order_n: self.n,
                mu: self.mu,
                g_hat_n: self.g_hat_n,
                kind: "finite",
                t1: None,
                value: None,
                t_c: Some(t_c),
                envelope: None,
            },
        }
    }
}

/// Looks for the earliest `t1` with `(D_n + R_n)(t1) ≤ μ/Ĝ_n`; success
/// upgrades the finite lifespan bound to global existence.
pub fn check_global_certificate(
    d_n: &EstimatorTrajectory,
    r_n: &ControlSolution,
    mu: f64,
    g_hat_n: f64,
) -> ExistenceCertificate {
    let threshold = mu / g_hat_n;
    let total = |t: f64| d_n.eval(t) + r_n.eval(t);
    // scan the estimator grid strictly inside the control domain
    let mut found: Option<(usize, f64)> = None;
    let times = d_n.times();
    for (i, &t) in times.iter().enumerate() {
        if t > r_n.t_c {
            break;
        }
        if r_n.blew_up && t >= r_n.t_c {
            break;
        }
        if total(t) <= threshold {
            found = Some((i, t));
            break;
        }
    }
    match found {
        None => ExistenceCertificate {
            n: d_n.order,
            mu,
            g_hat_n,
            kind: CertificateKind::Finite { t_c: r_n.t_c },
        },
        Some((i, t_hit)) => {
            // refine the earliest qualifying time within the previous interval
            let t1 = if i == 0 {
                t_hit
            } else {
                let mut lo = times[i - 1]; // total(lo) > threshold
                let mut hi = t_hit;
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if total(mid) <= threshold {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            };
            ExistenceCertificate {
                n: d_n.order,
                mu,
                g_hat_n,
                kind: CertificateKind::Global {
                    t1,
                    value: total(t1),
                },
            }
        }
    }
}

/// Evaluates the decay envelope of a global certificate at `t ≥ t1`:
/// `value · e^{-μ(t-t1)} / (1 - Ĝ_n · value · e_μ(t-t1))`.
pub fn decay_envelope(cert: &ExistenceCertificate, t: f64) -> Result<f64> {
    match cert.kind {
        CertificateKind::Finite { .. } => Err(Error::NotGlobal),
        CertificateKind::Global { t1, value } => {
            if t < t1 {
                return Err(Error::TimeOutOfRange { t, t_final: t1 });
            }
            let tau = t - t1;
            Ok(value * (-cert.mu * tau).exp() / (1.0 - cert.g_hat_n * value * e_mu(cert.mu, tau)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::EstimatorKind;

    fn const_estimator(order: f64, t_final: f64, value: f64) -> EstimatorTrajectory {
        let times: Vec<f64> = (0..=40).map(|i| t_final * i as f64 / 40.0).collect();
        let values = vec![value; times.len()];
        EstimatorTrajectory::from_samples(order, EstimatorKind::Growth, times, values)
    }

    fn zero_problem(mu: f64, delta: f64, t_final: f64) -> ControlProblem {
        ControlProblem {
            dim: 3,
            n: 3.0,
            mu,
            g_hat_n: 0.620,
            k_hat_n: 0.453,
            d_n: const_estimator(3.0, t_final, 0.0),
            d_n1: const_estimator(4.0, t_final, 0.0),
            eps_n: const_estimator(3.0, t_final, 0.0),
            delta_n: delta,
            t_final,
            blowup_threshold: BLOWUP_THRESHOLD,
            rtol: 1e-10,
            atol: 1e-13,
        }
    }

    #[test]
    fn e_mu_limits() {
        assert_eq!(e_mu(0.0, 1.7), 1.7);
        for t in [0.1, 0.5, 1.0, 2.0] {
            assert!((e_mu(1e-8, t) - t).abs() < 1e-7);
        }
        assert!((e_mu(2.0, 1.0) - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_inputs_stay_zero() {
        let sol = solve_control_n(&zero_problem(1.0, 0.0, 1.0)).unwrap();
        assert!(!sol.blew_up);
        assert_eq!(sol.t_c, 1.0);
        for &t in sol.times() {
            assert_eq!(sol.eval(t), 0.0);
        }
    }

    #[test]
    fn riccati_matches_zero_solution_closed_form() {
        // D ≡ 0, ε ≡ 0, δ_n > 0: the control solution must match
        // the closed form R_n(t) = δ e^{-μt} / (1 - Ĝ δ e_μ(t))
        for (mu, delta, t_final) in [(2.0, 1.5, 0.8), (0.0, 2.0, 0.5), (5.0, 12.0, 0.1)] {
            let problem = zero_problem(mu, delta, t_final);
            let sol = solve_control_n(&problem).unwrap();
            let bounds = zero_solution_bounds(&[(3.0, delta)], 3.0, mu, 0.620, &[], 3).unwrap();
            for i in 0..=20 {
                let t = t_final * i as f64 / 20.0;
                if t >= sol.t_c {
                    break;
                }
                let a = sol.eval(t);
                let b = bounds.r_n(t);
                assert!((a - b).abs() <= 1e-8 * b.max(1e-12), "t={t} {a} vs {b}");
            }
        }
    }

    #[test]
    fn riccati_blowup_matches_closed_form_tc() {
        // μ = 0: T_c = 1/(Ĝ_n δ)
        let delta = 10.0;
        let problem = zero_problem(0.0, delta, 2.0);
        let sol = solve_control_n(&problem).unwrap();
        assert!(sol.blew_up);
        let expected = 1.0 / (0.620 * delta);
        assert!((sol.t_c - expected).abs() <= 1e-3 * expected, "{} vs {expected}", sol.t_c);
    }

    #[test]
    fn riccati_monotone_in_eps() {
        let t_final = 0.5;
        let mut base = zero_problem(1.0, 0.0, t_final);
        base.eps_n = const_estimator(3.0, t_final, 1.0);
        let sol1 = solve_control_n(&base).unwrap();
        let mut bigger = zero_problem(1.0, 0.0, t_final);
        bigger.eps_n = const_estimator(3.0, t_final, 2.0);
        let sol2 = solve_control_n(&bigger).unwrap();
        for i in 0..=10 {
            let t = t_final * i as f64 / 10.0;
            assert!(sol2.eval(t) >= sol1.eval(t) - 1e-12);
        }
    }

    #[test]
    fn invalid_orders_rejected() {
        let mut p = zero_problem(1.0, 0.0, 1.0);
        p.n = 2.0; // not > d/2 + 1 = 2.5
        assert!(solve_control_n(&p).is_err());
        let mut p = zero_problem(1.0, 0.0, 1.0);
        p.delta_n = -1.0;
        assert!(solve_control_n(&p).is_err());
    }

    fn linear_problem(mu: f64, t_final: f64, eps: f64, delta: f64) -> LinearControlProblem {
        LinearControlProblem {
            p: 5.0,
            n: 3.0,
            mu,
            g_hat_p: 1.06,
            k_hat_p: 0.930,
            g_hat_pn: 1.79,
            d_p: const_estimator(5.0, t_final, 0.4),
            d_p1: const_estimator(6.0, t_final, 0.9),
            eps_p: const_estimator(5.0, t_final, eps),
            delta_p: delta,
            blowup_threshold: BLOWUP_THRESHOLD,
            rtol: 1e-10,
            atol: 1e-13,
        }
    }

    #[test]
    fn linear_zero_sources_stay_zero() {
        let rn = solve_control_n(&zero_problem(1.0, 0.5, 1.0)).unwrap();
        let lp = linear_problem(1.0, 1.0, 0.0, 0.0);
        let sol = solve_control_p_linear(&lp, &rn).unwrap();
        for &t in sol.times() {
            assert_eq!(sol.eval(t), 0.0);
        }
    }

    #[test]
    fn linear_ode_agrees_with_quadrature() {
        let t_final = 1.0;
        let mut nl = zero_problem(2.0, 0.3, t_final);
        nl.eps_n = const_estimator(3.0, t_final, 0.7);
        nl.d_n = const_estimator(3.0, t_final, 1.1);
        nl.d_n1 = const_estimator(4.0, t_final, 2.3);
        let rn = solve_control_n(&nl).unwrap();
        let lp = linear_problem(2.0, t_final, 0.5, 0.2);
        let sol = solve_control_p_linear(&lp, &rn).unwrap();
        let times: Vec<f64> = (0..=20).map(|i| t_final * i as f64 / 20.0).collect();
        let quad = linear_control_quadrature(&lp, &rn, &times).unwrap();
        for (&t, &q) in times.iter().zip(&quad) {
            let a = sol.eval(t);
            assert!((a - q).abs() <= 1e-6 * q.max(1e-9), "t={t}: ode {a} vs quad {q}");
        }
        assert!(sol.a_exponent.is_some());
    }

    #[test]
    fn linear_requires_p_above_n() {
        let rn = solve_control_n(&zero_problem(1.0, 0.0, 1.0)).unwrap();
        let mut lp = linear_problem(1.0, 1.0, 0.0, 0.0);
        lp.p = 3.0;
        assert!(solve_control_p_linear(&lp, &rn).is_err());
    }

    #[test]
    fn zero_solution_thresholds() {
        // ‖u0‖_n = 0: global with R ≡ 0
        let b = zero_solution_bounds(&[(3.0, 0.0)], 3.0, 1.0, 0.620, &[], 3).unwrap();
        assert!(b.is_global());
        assert_eq!(b.r_n(1.0), 0.0);
        // μ = 0: T_c = 1/(Ĝ_n ‖u0‖_n)
        let b = zero_solution_bounds(&[(3.0, 4.0)], 3.0, 0.0, 0.620, &[], 3).unwrap();
        assert!((b.t_c - 1.0 / (0.620 * 4.0)).abs() < 1e-15);
        // μ above the threshold: global
        let b = zero_solution_bounds(&[(3.0, 4.0)], 3.0, 3.0, 0.620, &[], 3).unwrap();
        assert!(b.is_global());
        // μ just below Ĝ_n ‖u0‖_n: finite
        let b = zero_solution_bounds(&[(3.0, 4.0)], 3.0, 2.0, 0.620, &[], 3).unwrap();
        assert!(!b.is_global());
        let expected = -(1.0f64 - 2.0 / (0.620 * 4.0)).ln() / 2.0;
        assert!((b.t_c - expected).abs() < 1e-14);
    }

    #[test]
    fn zero_solution_higher_order() {
        let b = zero_solution_bounds(
            &[(3.0, 4.0), (5.0, 9.0)],
            3.0,
            2.0,
            0.620,
            &[(5.0, 1.79)],
            3,
        )
        .unwrap();
        // at t = 0 the bound is the datum norm
        assert!((b.r_p(5.0, 0.0).unwrap() - 9.0).abs() < 1e-12);
        assert!(b.r_p(4.0, 0.0).is_err());
    }

    #[test]
    fn certificate_scan_and_envelope() {
        // declining D with R from zero sources: certificate fires once
        // D + R drops below μ/Ĝ
        let t_final = 2.0;
        let times: Vec<f64> = (0..=40).map(|i| t_final * i as f64 / 40.0).collect();
        let d_values: Vec<f64> = times.iter().map(|&t| 4.0 * (-1.5 * t).exp()).collect();
        let d3 = EstimatorTrajectory::from_samples(3.0, EstimatorKind::Growth, times, d_values);
        let rn = solve_control_n(&zero_problem(1.0, 0.0, t_final)).unwrap();
        let cert = check_global_certificate(&d3, &rn, 1.0, 0.620);
        // D(t1) = μ/Ĝ = 1.6129 → t1 = ln(4/1.6129)/1.5
        let expected_t1 = (4.0f64 / (1.0 / 0.620)).ln() / 1.5;
        match cert.kind {
            CertificateKind::Global { t1, value } => {
                assert!((t1 - expected_t1).abs() < 1e-6, "t1 = {t1} vs {expected_t1}");
                assert!((value - 1.0 / 0.620).abs() < 1e-6);
                // envelope starts at the certified value and decays
                let v0 = decay_envelope(&cert, t1).unwrap();
                assert!((v0 - value).abs() < 1e-12);
                let mut prev = v0;
                for i in 1..=50 {
                    let v = decay_envelope(&cert, t1 + i as f64 * 0.1).unwrap();
                    assert!(v <= prev + 1e-12);
                    prev = v;
                }
                assert!(decay_envelope(&cert, t1 - 0.1).is_err());
            }
            _ => panic!("expected a global certificate"),
        }
    }

    #[test]
    fn certificate_finite_when_never_qualifying() {
        let t_final = 0.5;
        let d3 = const_estimator(3.0, t_final, 100.0);
        let rn = solve_control_n(&zero_problem(1.0, 0.0, t_final)).unwrap();
        let cert = check_global_certificate(&d3, &rn, 1.0, 0.620);
        assert!(matches!(cert.kind, CertificateKind::Finite { t_c } if t_c == t_final));
        assert!(decay_envelope(&cert, 1.0).is_err());
    }
}
