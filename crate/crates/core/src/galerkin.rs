//! The Galerkin ODE system for the Fourier coefficients `(γ_k, β_k)`, k ∈ G:
//!
//! ```text
//! dγ_k/dt = -ν|k|² γ_k - i (2π)^(-d/2) Σ_{h∈G} ( [γ_h·(k-h)] L_k γ_{k-h} - [β_h·(k-h)] L_k β_{k-h} )
//! dβ_k/dt = -η|k|² β_k - i (2π)^(-d/2) Σ_{h∈G} ( [γ_h·(k-h)] L_k β_{k-h} - [β_h·(k-h)] L_k γ_{k-h} )
//! ```
//!
//! with `γ_{k-h}, β_{k-h} := 0` outside G. Realness reduces the unknowns to
//! one representative per ±pair; the state vector holds those coefficients
//! in fixed lexicographic mode order, real/imaginary interleaved, the γ
//! block first. The convolution is precompiled into index tables once per
//! mode set, so the right-hand side runs without hash lookups or
//! allocations; the same tables evaluate the differential-error
//! coefficients on dG for the estimators.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::bilinear::fourier_prefactor;
use crate::error::{Error, Result};
use crate::field::{SpectralField, StatePair};
use crate::mode::{Mode, ModeSet};
use crate::ode::{self, OdeOptions, OdeSolution};

const FLAG_H_CONJ: u8 = 1;
const FLAG_KH_CONJ: u8 = 2;

struct Term {
    /// Offset of γ_h in the γ block (index * 2d).
    h_off: u32,
    /// Offset of γ_{k-h} in the γ block.
    kh_off: u32,
    flags: u8,
}

/// A compiled convolution: for each output mode k, the ordered list of
/// contributing pairs (h, k-h) with h ∈ G and k-h ∈ G, exactly the double
/// loop of the component equations.
pub(crate) struct ConvTable {
    dim: usize,
    out_modes: Vec<Mode>,
    out_k: Vec<f64>,
    out_ksq: Vec<f64>,
    ranges: Vec<(usize, usize)>,
    terms: Vec<Term>,
    m_data: Vec<f64>,
    beta_shift: usize,
    prefactor: f64,
}

impl ConvTable {
    fn build(out_modes: Vec<Mode>, g: &ModeSet, index: &BTreeMap<Mode, usize>, dim: usize) -> Self {
        let beta_shift = index.len() * 2 * dim;
        let mut terms = Vec::new();
        let mut m_data = Vec::new();
        let mut ranges = Vec::with_capacity(out_modes.len());
        let mut out_k = Vec::with_capacity(out_modes.len() * dim);
        let mut out_ksq = Vec::with_capacity(out_modes.len());
        for k in &out_modes {
            let start = terms.len();
            for h in g.iter() {
                let diff = k.sub(h);
                if diff.iter().all(|&c| c == 0) || !g.contains_coords(&diff) {
                    continue;
                }
                let mut flags = 0u8;
                let h_idx = if h.is_canonical() {
                    index[h]
                } else {
                    flags |= FLAG_H_CONJ;
                    index[&h.neg()]
                };
                let kh = Mode::new(diff.clone()).unwrap();
                let kh_idx = if kh.is_canonical() {
                    index[&kh]
                } else {
                    flags |= FLAG_KH_CONJ;
                    index[&kh.neg()]
                };
                terms.push(Term {
                    h_off: (h_idx * 2 * dim) as u32,
                    kh_off: (kh_idx * 2 * dim) as u32,
                    flags,
                });
                m_data.extend(diff.iter().map(|&c| c as f64));
            }
            ranges.push((start, terms.len()));
            out_k.extend(k.coords().iter().map(|&c| c as f64));
            out_ksq.push(k.norm_sq() as f64);
        }
        ConvTable {
            dim,
            out_modes,
            out_k,
            out_ksq,
            ranges,
            terms,
            m_data,
            beta_shift,
            prefactor: fourier_prefactor(dim),
        }
    }

    pub(crate) fn out_modes(&self) -> &[Mode] {
        &self.out_modes
    }

    /// Evaluates the two convolution components of `P(u_G, u_G)` at every
    /// output mode: `rho` receives the velocity-equation coefficients and
    /// `sigma` the magnetic ones, each `2·dim` floats per mode (re, im
    /// interleaved). `y` is a Galerkin state vector over G.
    pub(crate) fn eval(&self, y: &[f64], rho: &mut [f64], sigma: &mut [f64]) {
        let d = self.dim;
        let bs = self.beta_shift;
        let mut su = vec![0.0f64; 2 * d];
        let mut sb = vec![0.0f64; 2 * d];
        for (out_idx, &(t0, t1)) in self.ranges.iter().enumerate() {
            su.iter_mut().for_each(|x| *x = 0.0);
            sb.iter_mut().for_each(|x| *x = 0.0);
            for (term, m) in self.terms[t0..t1]
                .iter()
                .zip(self.m_data[t0 * d..t1 * d].chunks_exact(d))
            {
                let gh = term.h_off as usize;
                let bh = gh + bs;
                let gkh = term.kh_off as usize;
                let bkh = gkh + bs;

                // a = γ_h·(k-h), b = β_h·(k-h)
                let (mut ar, mut ai, mut br, mut bi) = (0.0, 0.0, 0.0, 0.0);
                for c in 0..d {
                    let mc = m[c];
                    ar += y[gh + 2 * c] * mc;
                    ai += y[gh + 2 * c + 1] * mc;
                    br += y[bh + 2 * c] * mc;
                    bi += y[bh + 2 * c + 1] * mc;
                }
                if term.flags & FLAG_H_CONJ != 0 {
                    ai = -ai;
                    bi = -bi;
                }
                let s = if term.flags & FLAG_KH_CONJ != 0 {
                    -1.0
                } else {
                    1.0
                };
                // su += a γ_{k-h} - b β_{k-h};  sb += a β_{k-h} - b γ_{k-h}
                for c in 0..d {
                    let gr = y[gkh + 2 * c];
                    let gi = s * y[gkh + 2 * c + 1];
                    let hr = y[bkh + 2 * c];
                    let hi = s * y[bkh + 2 * c + 1];
                    su[2 * c] += ar * gr - ai * gi - (br * hr - bi * hi);
                    su[2 * c + 1] += ar * gi + ai * gr - (br * hi + bi * hr);
                    sb[2 * c] += ar * hr - ai * hi - (br * gr - bi * gi);
                    sb[2 * c + 1] += ar * hi + ai * hr - (br * gi + bi * gr);
                }
            }
            // Leray projection of the summed convolution, then -i (2π)^(-d/2)
            let k = &self.out_k[out_idx * d..(out_idx + 1) * d];
            let ksq = self.out_ksq[out_idx];
            project_and_scale(k, ksq, self.prefactor, &su, &mut rho[out_idx * 2 * d..]);
            project_and_scale(k, ksq, self.prefactor, &sb, &mut sigma[out_idx * 2 * d..]);
        }
    }
}

/// `out[0..2d] = -i c · (z - (k·z) k / |k|²)`.
fn project_and_scale(k: &[f64], ksq: f64, c: f64, z: &[f64], out: &mut [f64]) {
    let d = k.len();
    let mut dot_re = 0.0;
    let mut dot_im = 0.0;
    for i in 0..d {
        dot_re += k[i] * z[2 * i];
        dot_im += k[i] * z[2 * i + 1];
    }
    dot_re /= ksq;
    dot_im /= ksq;
    for i in 0..d {
        let re = z[2 * i] - dot_re * k[i];
        let im = z[2 * i + 1] - dot_im * k[i];
        // (-i)(re + i im) = im - i re
        out[2 * i] = c * im;
        out[2 * i + 1] = -c * re;
    }
}

/// The compiled Galerkin system over a mode set G.
pub struct GalerkinSystem {
    dim: usize,
    mode_set: ModeSet,
    modes: Vec<Mode>,
    index: BTreeMap<Mode, usize>,
    ksq: Vec<f64>,
    table: ConvTable,
}

impl GalerkinSystem {
    pub fn new(g: &ModeSet) -> Self {
        let modes = g.canonical_half();
        let index: BTreeMap<Mode, usize> = modes
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let ksq = modes.iter().map(|m| m.norm_sq() as f64).collect();
        let table = ConvTable::build(modes.clone(), g, &index, g.dim());
        GalerkinSystem {
            dim: g.dim(),
            mode_set: g.clone(),
            modes,
            index,
            ksq,
            table,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode_set(&self) -> &ModeSet {
        &self.mode_set
    }

    /// Canonical representatives in state order.
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn state_len(&self) -> usize {
        4 * self.dim * self.modes.len()
    }

    fn beta_shift(&self) -> usize {
        2 * self.dim * self.modes.len()
    }

    /// Compiles a convolution table whose outputs live on `dG`.
    pub(crate) fn dg_table(&self) -> ConvTable {
        let dg = self.mode_set.d_set();
        ConvTable::build(dg.canonical_half(), &self.mode_set, &self.index, self.dim)
    }

    /// Projects a pair onto G and packs it into a state vector.
    pub fn pair_to_state(&self, pair: &StatePair) -> Vec<f64> {
        let d = self.dim;
        let mut y = vec![0.0; self.state_len()];
        let bs = self.beta_shift();
        for (i, k) in self.modes.iter().enumerate() {
            let cu = pair.u.coeff(k);
            let cb = pair.b.coeff(k);
            for c in 0..d {
                y[i * 2 * d + 2 * c] = cu[c].re;
                y[i * 2 * d + 2 * c + 1] = cu[c].im;
                y[bs + i * 2 * d + 2 * c] = cb[c].re;
                y[bs + i * 2 * d + 2 * c + 1] = cb[c].im;
            }
        }
        y
    }

    pub fn state_to_pair(&self, y: &[f64]) -> StatePair {
        let d = self.dim;
        let bs = self.beta_shift();
        let mut cu = BTreeMap::new();
        let mut cb = BTreeMap::new();
        for (i, k) in self.modes.iter().enumerate() {
            let mut u = Vec::with_capacity(d);
            let mut b = Vec::with_capacity(d);
            for c in 0..d {
                u.push(Complex64::new(y[i * 2 * d + 2 * c], y[i * 2 * d + 2 * c + 1]));
                b.push(Complex64::new(
                    y[bs + i * 2 * d + 2 * c],
                    y[bs + i * 2 * d + 2 * c + 1],
                ));
            }
            cu.insert(k.clone(), u);
            cb.insert(k.clone(), b);
        }
        StatePair {
            u: SpectralField::from_canonical_coeffs(d, cu),
            b: SpectralField::from_canonical_coeffs(d, cb),
        }
    }

    /// Right-hand side: diffusion plus the projected convolution.
    pub fn eval_rhs(&self, y: &[f64], dy: &mut [f64], nu: f64, eta: f64, scratch: &mut RhsScratch) {
        let d = self.dim;
        let bs = self.beta_shift();
        self.table.eval(y, &mut scratch.rho, &mut scratch.sigma);
        for i in 0..self.modes.len() {
            let ksq = self.ksq[i];
            for c in 0..2 * d {
                dy[i * 2 * d + c] = -nu * ksq * y[i * 2 * d + c] + scratch.rho[i * 2 * d + c];
                dy[bs + i * 2 * d + c] =
                    -eta * ksq * y[bs + i * 2 * d + c] + scratch.sigma[i * 2 * d + c];
            }
        }
    }

    pub fn rhs_scratch(&self) -> RhsScratch {
        RhsScratch {
            rho: vec![0.0; 2 * self.dim * self.modes.len()],
            sigma: vec![0.0; 2 * self.dim * self.modes.len()],
        }
    }
}

pub struct RhsScratch {
    rho: Vec<f64>,
    sigma: Vec<f64>,
}

/// The Galerkin right-hand side as a pure map on pairs supported in G;
/// equal to `A·state + E^G P(state, state)`.
pub fn rhs(state: &StatePair, g: &ModeSet, nu: f64, eta: f64) -> Result<StatePair> {
    check_support(state, g)?;
    let system = GalerkinSystem::new(g);
    let y = system.pair_to_state(state);
    let mut dy = vec![0.0; y.len()];
    let mut scratch = system.rhs_scratch();
    system.eval_rhs(&y, &mut dy, nu, eta, &mut scratch);
    Ok(system.state_to_pair(&dy))
}

fn check_support(state: &StatePair, g: &ModeSet) -> Result<()> {
    for field in [&state.u, &state.b] {
        for (k, _) in field.iter_canonical() {
            if !g.contains(k) {
                return Err(Error::SupportLeak {
                    k: k.coords().to_vec(),
                });
            }
        }
    }
    Ok(())
}

/// Setup for one Galerkin integration.
#[derive(Clone, Debug)]
pub struct GalerkinProblem {
    pub mode_set: ModeSet,
    pub nu: f64,
    pub eta: f64,
    pub u0: StatePair,
    pub t_final: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl GalerkinProblem {
    pub fn new(mode_set: ModeSet, nu: f64, eta: f64, u0: StatePair, t_final: f64) -> Result<Self> {
        if u0.dim() != mode_set.dim() {
            return Err(Error::DimMismatch {
                expected: mode_set.dim(),
                found: u0.dim(),
            });
        }
        if nu < 0.0 || eta < 0.0 {
            return Err(Error::Config(format!(
                "viscosity and resistivity must be nonnegative, got nu = {nu}, eta = {eta}"
            )));
        }
        if !(t_final > 0.0) {
            return Err(Error::Config(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        Ok(GalerkinProblem {
            mode_set,
            nu,
            eta,
            u0,
            t_final,
            rtol: 1e-9,
            atol: 1e-12,
        })
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    /// `μ = min(ν, η)`, the dissipation rate in every decay bound.
    pub fn mu(&self) -> f64 {
        self.nu.min(self.eta)
    }

    /// Integrates the system on `[0, T_F]` with the datum `E^G u0`.
    /// Galerkin solutions are global, so this never stops early.
    pub fn integrate(&self) -> Result<Trajectory> {
        let system = GalerkinSystem::new(&self.mode_set);
        let y0 = system.pair_to_state(&self.u0);
        let mut scratch = system.rhs_scratch();
        let opts = OdeOptions {
            rtol: self.rtol,
            atol: self.atol,
            ..OdeOptions::default()
        };
        let solution = ode::integrate(
            |_t, y, dy| system.eval_rhs(y, dy, self.nu, self.eta, &mut scratch),
            0.0,
            self.t_final,
            &y0,
            &opts,
        )?;
        Ok(Trajectory {
            system,
            nu: self.nu,
            eta: self.eta,
            t_final: self.t_final,
            solution,
        })
    }
}

/// A dense-output Galerkin trajectory over `[0, T_F]`.
pub struct Trajectory {
    system: GalerkinSystem,
    nu: f64,
    eta: f64,
    t_final: f64,
    solution: OdeSolution,
}

impl Trajectory {
    pub fn system(&self) -> &GalerkinSystem {
        &self.system
    }

    pub fn mode_set(&self) -> &ModeSet {
        self.system.mode_set()
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn mu(&self) -> f64 {
        self.nu.min(self.eta)
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Accepted step endpoints (strictly increasing, first 0, last T_F).
    pub fn sample_times(&self) -> &[f64] {
        &self.solution.times
    }

    pub fn n_steps(&self) -> usize {
        self.solution.n_steps
    }

    pub fn state_vec_at_into(&self, t: f64, buf: &mut [f64]) -> Result<()> {
        self.solution.eval_into(t, buf)
    }

    /// The state at any `t ∈ [0, T_F]`, through the integrator's dense output.
    pub fn state_at(&self, t: f64) -> Result<StatePair> {
        let mut buf = vec![0.0; self.system.state_len()];
        self.solution.eval_into(t, &mut buf)?;
        Ok(self.system.state_to_pair(&buf))
    }
}
