//! The fundamental bilinear map `P(v,w) = -L(v·∂w)` and its two-component
//! MHD pairing `P((v,b),(w,c)) = (P(v,w) - P(b,c), P(v,c) - P(b,w))`.
//!
//! Everything is evaluated by direct convolution over the finite supports:
//! the k-th coefficient of `P(v,w)` is
//! `-i (2π)^(-d/2) Σ_h [v_h·(k-h)] L_k w_{k-h}`.
//! Supports stay in the low hundreds of modes here, and the tautological
//! error estimator needs these coefficients exactly, so no FFT is involved.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{leray_project, SpectralField, StatePair};
use crate::mode::{Mode, ModeSet};

/// `(2π)^(-d/2)`, the prefactor tied to the `e_k` normalization.
pub fn fourier_prefactor(dim: usize) -> f64 {
    (2.0 * std::f64::consts::PI).powf(-(dim as f64) / 2.0)
}

/// Evaluates `P(v,w)` on the modes of `out`.
pub fn bilinear_p(v: &SpectralField, w: &SpectralField, out: &ModeSet) -> Result<SpectralField> {
    let dim = v.dim();
    if w.dim() != dim {
        return Err(Error::DimMismatch {
            expected: dim,
            found: w.dim(),
        });
    }
    if out.dim() != dim {
        return Err(Error::DimMismatch {
            expected: dim,
            found: out.dim(),
        });
    }
    let minus_i_c = Complex64::new(0.0, -fourier_prefactor(dim));
    let support = v.support_full();
    let mut coeffs = BTreeMap::new();
    for k in out.canonical_half() {
        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        for h in &support {
            let diff = k.sub(h);
            if diff.iter().all(|&c| c == 0) {
                continue; // w has no zero mode
            }
            let w_kh = w.coeff(&Mode::new(diff.clone())?);
            if w_kh.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            let v_h = v.coeff(h);
            let mut dot = Complex64::new(0.0, 0.0);
            for (a, &m) in v_h.iter().zip(&diff) {
                dot += a * (m as f64);
            }
            for (a, b) in acc.iter_mut().zip(&w_kh) {
                *a += dot * b;
            }
        }
        // L_k is linear, so one projection of the summed convolution equals
        // projecting term by term
        let projected = leray_project(&k, &acc)?;
        let coeff: Vec<Complex64> = projected.iter().map(|z| minus_i_c * z).collect();
        coeffs.insert(k, coeff);
    }
    Ok(SpectralField::from_canonical_coeffs(dim, coeffs))
}

/// Evaluates the two-component map on the modes of `out`:
/// first component `P(v,w) - P(b,c)`, second `P(v,c) - P(b,w)`.
pub fn bilinear_bold_p(v: &StatePair, w: &StatePair, out: &ModeSet) -> Result<StatePair> {
    let first = bilinear_p(&v.u, &w.u, out)?.sub(&bilinear_p(&v.b, &w.b, out)?)?;
    let second = bilinear_p(&v.u, &w.b, out)?.sub(&bilinear_p(&v.b, &w.u, out)?)?;
    StatePair::new(first, second)
}
