//! Growth, differential-error and datum-error estimators for a Galerkin
//! trajectory.
//!
//! `D_p(t) = ‖u_G(t)‖_p` is tautological. The differential error of a
//! Galerkin solution is `-(1 - E^G) P(u_G, u_G)`, supported on `dG`, so its
//! tautological estimator `ε_p` is an exact norm over dG; the rough variant
//! `ε'_pq = K̂_q / |G|^(q-p) · ‖u_G‖_q ‖u_G‖_{q+1}` avoids the dG sum at the
//! price of overestimation. Sampled curves are interpolated by a piecewise
//! cubic through an equispaced grid, mirroring how the certificates are
//! meant to consume them.

use crate::constants::{ConstantKind, ConstantsBundle};
use crate::error::{Error, Result};
use crate::field::{neumaier_sum, StatePair};
use crate::galerkin::{GalerkinSystem, Trajectory};
use crate::mode::ModeSet;
use crate::spline::CubicSpline;

/// Equispaced sampling grid on `[0, T_F]`, endpoints included.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub samples: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { samples: 41 }
    }
}

impl GridSpec {
    pub fn times(&self, t_final: f64) -> Vec<f64> {
        let n = self.samples.max(2);
        (0..n)
            .map(|i| t_final * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorKind {
    Growth,
    DiffError,
}

/// A sampled, interpolated, nonnegative scalar function of time.
#[derive(Clone, Debug)]
pub struct EstimatorTrajectory {
    pub order: f64,
    pub kind: EstimatorKind,
    times: Vec<f64>,
    values: Vec<f64>,
    spline: CubicSpline,
}

impl EstimatorTrajectory {
    pub fn from_samples(order: f64, kind: EstimatorKind, times: Vec<f64>, values: Vec<f64>) -> Self {
        assert!(values.iter().all(|v| *v >= 0.0), "estimator values must be nonnegative");
        let spline = CubicSpline::new(times.clone(), values.clone());
        EstimatorTrajectory {
            order,
            kind,
            times,
            values,
            spline,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t_final(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Interpolated value, clamped to stay nonnegative.
    pub fn eval(&self, t: f64) -> f64 {
        self.spline.eval(t).max(0.0)
    }

    /// Interpolated maximum over `[a, b]` by dense sampling.
    pub fn max_on(&self, a: f64, b: f64) -> f64 {
        self.spline.max_on(a, b, 4096).max(0.0)
    }
}

/// `D_p` sampled from the dense trajectory output.
pub fn growth_d(traj: &Trajectory, p: f64, grid: &GridSpec) -> Result<EstimatorTrajectory> {
    Ok(growth_many(traj, &[p], grid)?.pop().unwrap())
}

/// Several growth orders sharing one sweep over the grid.
pub fn growth_many(traj: &Trajectory, orders: &[f64], grid: &GridSpec) -> Result<Vec<EstimatorTrajectory>> {
    let times = grid.times(traj.t_final());
    let mut values = vec![Vec::with_capacity(times.len()); orders.len()];
    for &t in &times {
        let state = traj.state_at(t)?;
        for (vals, &p) in values.iter_mut().zip(orders) {
            vals.push(state.pair_norm(p));
        }
    }
    Ok(values
        .into_iter()
        .zip(orders)
        .map(|(vals, &p)| EstimatorTrajectory::from_samples(p, EstimatorKind::Growth, times.clone(), vals))
        .collect())
}

/// The differential error `-(1 - E^G) P(state, state)` of a state supported
/// on G, as a spectral pair living on dG.
pub fn diff_error_field(state: &StatePair, g: &ModeSet) -> Result<StatePair> {
    for field in [&state.u, &state.b] {
        for (k, _) in field.iter_canonical() {
            if !g.contains(k) {
                return Err(Error::SupportLeak {
                    k: k.coords().to_vec(),
                });
            }
        }
    }
    let system = GalerkinSystem::new(g);
    let table = system.dg_table();
    let y = system.pair_to_state(state);
    let dim = g.dim();
    let n_out = table.out_modes().len();
    let mut rho = vec![0.0; 2 * dim * n_out];
    let mut sigma = vec![0.0; 2 * dim * n_out];
    table.eval(&y, &mut rho, &mut sigma);

    use num_complex::Complex64;
    use std::collections::BTreeMap;
    let mut cu = BTreeMap::new();
    let mut cb = BTreeMap::new();
    for (i, k) in table.out_modes().iter().enumerate() {
        let mut u = Vec::with_capacity(dim);
        let mut b = Vec::with_capacity(dim);
        for c in 0..dim {
            // e(u_G) = -(coefficients of P(u_G, u_G)) off G
            u.push(-Complex64::new(rho[i * 2 * dim + 2 * c], rho[i * 2 * dim + 2 * c + 1]));
            b.push(-Complex64::new(
                sigma[i * 2 * dim + 2 * c],
                sigma[i * 2 * dim + 2 * c + 1],
            ));
        }
        cu.insert(k.clone(), u);
        cb.insert(k.clone(), b);
    }
    Ok(StatePair {
        u: crate::field::SpectralField::from_canonical_coeffs(dim, cu),
        b: crate::field::SpectralField::from_canonical_coeffs(dim, cb),
    })
}

/// `ε_p(t) = ‖e(u_G)(t)‖_p` sampled on the grid.
pub fn eps_tautological(traj: &Trajectory, p: f64, grid: &GridSpec) -> Result<EstimatorTrajectory> {
    Ok(eps_tautological_many(traj, &[p], grid)?.pop().unwrap())
}

/// Several ε orders sharing the dG coefficients at each sample; the dG sum
/// is the expensive part and is never subsampled.
pub fn eps_tautological_many(
    traj: &Trajectory,
    orders: &[f64],
    grid: &GridSpec,
) -> Result<Vec<EstimatorTrajectory>> {
    let system = traj.system();
    let table = system.dg_table();
    let dim = system.dim();
    let out_modes = table.out_modes().to_vec();
    let n_out = out_modes.len();

    // accumulate norms in order of increasing |k|
    let mut order_idx: Vec<usize> = (0..n_out).collect();
    order_idx.sort_by_key(|&i| out_modes[i].norm_sq());
    let weights: Vec<Vec<f64>> = orders
        .iter()
        .map(|&p| {
            out_modes
                .iter()
                .map(|k| (k.norm_sq() as f64).powf(p))
                .collect()
        })
        .collect();

    let times = grid.times(traj.t_final());
    let mut y = vec![0.0; system.state_len()];
    let mut rho = vec![0.0; 2 * dim * n_out];
    let mut sigma = vec![0.0; 2 * dim * n_out];
    let mut values = vec![Vec::with_capacity(times.len()); orders.len()];
    for &t in &times {
        traj.state_vec_at_into(t, &mut y)?;
        table.eval(&y, &mut rho, &mut sigma);
        let mag_sq: Vec<f64> = (0..n_out)
            .map(|i| {
                let mut s = 0.0;
                for c in 0..2 * dim {
                    s += rho[i * 2 * dim + c] * rho[i * 2 * dim + c]
                        + sigma[i * 2 * dim + c] * sigma[i * 2 * dim + c];
                }
                s
            })
            .collect();
        for (vals, w) in values.iter_mut().zip(&weights) {
            let sum = neumaier_sum(order_idx.iter().map(|&i| 2.0 * w[i] * mag_sq[i]));
            vals.push(sum.sqrt());
        }
    }
    Ok(values
        .into_iter()
        .zip(orders)
        .map(|(vals, &p)| {
            EstimatorTrajectory::from_samples(p, EstimatorKind::DiffError, times.clone(), vals)
        })
        .collect())
}

/// Rough differential-error estimator
/// `ε'_pq(t) = K̂_q / |G|^(q-p) · D_q(t) D_{q+1}(t)`, `q ≥ p`.
pub fn eps_rough(
    traj: &Trajectory,
    p: f64,
    q: f64,
    constants: &ConstantsBundle,
    grid: &GridSpec,
) -> Result<EstimatorTrajectory> {
    if q < p {
        return Err(Error::InvalidOrders(format!(
            "rough estimator requires q >= p, got p = {p}, q = {q}"
        )));
    }
    let k_hat_q = constants.require(q, q, ConstantKind::KHat)?;
    let tail = traj.mode_set().tail_radius().powf(q - p);
    let grown = growth_many(traj, &[q, q + 1.0], grid)?;
    let times = grown[0].times().to_vec();
    let values: Vec<f64> = grown[0]
        .values()
        .iter()
        .zip(grown[1].values())
        .map(|(a, b)| k_hat_q / tail * a * b)
        .collect();
    Ok(EstimatorTrajectory::from_samples(
        p,
        EstimatorKind::DiffError,
        times,
        values,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DatumErrorMode {
    /// Exact norm of the off-G part of the datum.
    Tautological,
    /// `‖u0‖_q / |G|^(q-p)` via the projection tail bound.
    Rough { q: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct DatumError {
    pub p: f64,
    pub value: f64,
    pub mode: DatumErrorMode,
}

/// `δ_p`, the initial-condition mismatch `‖E^G u0 - u0‖_p` or its rough bound.
pub fn datum_error(u0: &StatePair, g: &ModeSet, p: f64, mode: DatumErrorMode) -> Result<DatumError> {
    let value = match mode {
        DatumErrorMode::Tautological => u0.tail_off(g).pair_norm(p),
        DatumErrorMode::Rough { q } => {
            if q < p {
                return Err(Error::InvalidOrders(format!(
                    "rough datum error requires q >= p, got p = {p}, q = {q}"
                )));
            }
            u0.pair_norm(q) / g.tail_radius().powf(q - p)
        }
    };
    Ok(DatumError { p, value, mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::bilinear_bold_p;
    use crate::data::make_abc;
    use crate::field::SpectralField;
    use crate::galerkin::GalerkinProblem;
    use crate::mode::Mode;
    use num_complex::Complex64;

    fn abc_traj(mu: f64, t_final: f64) -> Trajectory {
        let g = ModeSet::cube(1, 3).unwrap();
        GalerkinProblem::new(g, mu, mu, make_abc(1.0, 1.0, 1.0, 1.0), t_final)
            .unwrap()
            .integrate()
            .unwrap()
    }

    #[test]
    fn growth_at_time_zero_matches_datum_norm() {
        let traj = abc_traj(1.0, 0.5);
        let d3 = growth_d(&traj, 3.0, &GridSpec::default()).unwrap();
        assert!((d3.values()[0] - 41.6695).abs() < 1e-3);
        // D_p is exactly the Sobolev norm of the state
        let s = traj.state_at(0.25).unwrap();
        let direct = s.pair_norm(3.0);
        let sampled = growth_d(&traj, 3.0, &GridSpec { samples: 3 }).unwrap().values()[1];
        assert!((direct - sampled).abs() <= 1e-14 * direct);
    }

    #[test]
    fn inviscid_l2_growth_constant() {
        let traj = abc_traj(0.0, 1.0);
        let d0 = growth_d(&traj, 0.0, &GridSpec::default()).unwrap();
        let first = d0.values()[0];
        for v in d0.values() {
            assert!((v - first).abs() <= 1e-8 * first);
        }
    }

    #[test]
    fn diff_error_matches_bold_p_route() {
        // independent code paths: indexed dG tables vs direct convolution
        let g = ModeSet::cube(1, 3).unwrap();
        let state = make_abc(1.0, 1.0, 1.0, 1.0).project_onto(&g);
        let err = diff_error_field(&state, &g).unwrap();
        let dg = g.d_set();
        let full = bilinear_bold_p(&state, &state, &dg).unwrap();
        // e = -(1 - E^G) P(u,u); on dG this is minus the full convolution
        let diff = err.add(&full).unwrap().pair_norm(0.0);
        let scale = full.pair_norm(0.0).max(1e-300);
        assert!(diff <= 1e-12 * scale, "relative diff {}", diff / scale);
        // supported strictly off G
        for (k, _) in err.u.iter_canonical() {
            assert!(!g.contains(k));
            assert!(dg.contains(k));
        }
    }

    #[test]
    fn diff_error_zero_under_full_containment() {
        // datum supported on cube(1): the convolution lives inside cube(2),
        // so a cube(2) Galerkin set captures it entirely even though the
        // convolution itself is far from zero
        let small = ModeSet::cube(1, 3).unwrap();
        let big = ModeSet::cube(2, 3).unwrap();
        let state = make_abc(1.0, 1.0, 1.0, 1.0).project_onto(&small);
        let conv = bilinear_bold_p(&state, &state, &big).unwrap();
        assert!(conv.pair_norm(0.0) > 1.0);
        let err = diff_error_field(&state, &big).unwrap();
        assert!(err.pair_norm(3.0) <= 1e-12 * conv.pair_norm(3.0));
    }

    #[test]
    fn diff_error_zero_when_convolution_stays_inside() {
        // a single ±pair: P(v,v) lives on ±2k and 0... for one Beltrami pair
        // the self-advection vanishes entirely
        let mut u = SpectralField::new(3);
        // Beltrami mode: v ∝ (0, -i, 1) on k = (1,0,0)
        u.set_coeff(
            Mode::new(vec![1, 0, 0]).unwrap(),
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        let g = ModeSet::cube(1, 3).unwrap();
        let state = StatePair::new(u, SpectralField::new(3)).unwrap();
        let err = diff_error_field(&state, &g).unwrap();
        assert!(err.pair_norm(3.0) <= 1e-12);
    }

    #[test]
    fn eps_rejects_support_leak() {
        let g = ModeSet::cube(1, 3).unwrap();
        let mut u = SpectralField::new(3);
        u.set_coeff(
            Mode::new(vec![2, 0, 0]).unwrap(),
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let state = StatePair::new(u, SpectralField::new(3)).unwrap();
        assert!(diff_error_field(&state, &g).is_err());
    }

    #[test]
    fn beltrami_only_velocity_keeps_eps_zero() {
        // ν = η and b = 0 with a Beltrami velocity: the solution stays a
        // decaying Beltrami field and ε_p ≡ 0
        let g = ModeSet::cube(1, 3).unwrap();
        let datum = StatePair::new(make_abc(1.0, 0.0, 0.0, 0.0).u, SpectralField::new(3)).unwrap();
        let traj = GalerkinProblem::new(g, 2.0, 2.0, datum, 1.0)
            .unwrap()
            .integrate()
            .unwrap();
        let eps = eps_tautological(&traj, 3.0, &GridSpec::default()).unwrap();
        for v in eps.values() {
            assert!(*v <= 1e-10);
        }
    }

    #[test]
    fn eps_zero_trajectory() {
        let g = ModeSet::cube(1, 3).unwrap();
        let traj = GalerkinProblem::new(g, 1.0, 1.0, StatePair::zero(3), 1.0)
            .unwrap()
            .integrate()
            .unwrap();
        let eps = eps_tautological(&traj, 3.0, &GridSpec::default()).unwrap();
        assert!(eps.values().iter().all(|v| *v == 0.0));
        let d3 = growth_d(&traj, 3.0, &GridSpec::default()).unwrap();
        assert!(d3.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rough_eps_dominates_tautological() {
        let traj = abc_traj(2.0, 0.5);
        let grid = GridSpec::default();
        let taut = eps_tautological(&traj, 3.0, &grid).unwrap();
        let bundle = ConstantsBundle::tabulated(3).unwrap();
        let rough = eps_rough(&traj, 3.0, 3.0, &bundle, &grid).unwrap();
        for (a, b) in taut.values().iter().zip(rough.values()) {
            assert!(b >= a, "rough {b} below tautological {a}");
        }
        // p = q: ε' = K̂_q D_q D_{q+1}
        let d3 = growth_d(&traj, 3.0, &grid).unwrap();
        let d4 = growth_d(&traj, 4.0, &grid).unwrap();
        let expected = 0.453 * d3.values()[0] * d4.values()[0];
        assert!((rough.values()[0] - expected).abs() <= 1e-12 * expected);
        assert!(eps_rough(&traj, 4.0, 3.0, &bundle, &grid).is_err());
    }

    #[test]
    fn datum_errors() {
        let g = ModeSet::cube(2, 3).unwrap();
        let abc = make_abc(1.0, 1.0, 1.0, 1.0);
        // ABC datum lives inside the 124-mode cube: δ_p = 0 for all p
        for p in [0.0, 3.0, 5.0] {
            let d = datum_error(&abc, &g, p, DatumErrorMode::Tautological).unwrap();
            assert_eq!(d.value, 0.0);
        }
        // a single ±pair outside G: δ_p = |k|^p √2 |coefficient|
        let mut u = SpectralField::new(3);
        let k = Mode::new(vec![3, 0, 0]).unwrap();
        u.set_coeff(
            k,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.6, 0.8),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let datum = StatePair::new(u, SpectralField::new(3)).unwrap();
        let d = datum_error(&datum, &g, 3.0, DatumErrorMode::Tautological).unwrap();
        let expected = 27.0 * 2f64.sqrt() * 1.0;
        assert!((d.value - expected).abs() <= 1e-12 * expected);
        // rough dominates tautological (equality here: the only mode sits
        // exactly at the tail radius)
        let r = datum_error(&datum, &g, 3.0, DatumErrorMode::Rough { q: 5.0 }).unwrap();
        assert!(r.value >= d.value * (1.0 - 1e-12));
        assert!(datum_error(&datum, &g, 5.0, DatumErrorMode::Rough { q: 3.0 }).is_err());
    }

    #[test]
    fn grid_refinement_stability() {
        // doubling the grid moves the interpolated maximum of ε_3 by < 0.5%
        let traj = abc_traj(2.0, 0.5);
        let coarse = eps_tautological(&traj, 3.0, &GridSpec { samples: 41 }).unwrap();
        let fine = eps_tautological(&traj, 3.0, &GridSpec { samples: 81 }).unwrap();
        let m1 = coarse.max_on(0.0, 0.5);
        let m2 = fine.max_on(0.0, 0.5);
        assert!((m1 - m2).abs() <= 0.005 * m2, "{m1} vs {m2}");
    }
}
