//! Divergence-free, mean-zero vector fields on the torus, in Fourier space.
//!
//! The expansion convention is `v = Σ_k v_k e_k` with
//! `e_k(x) = (2π)^(-d/2) exp(i k·x)`; realness means `v_{-k} = conj(v_k)`.
//! Storage keeps one coefficient per ±pair (the canonical representative),
//! so realness holds by construction, and every stored coefficient is kept
//! orthogonal to its wavenumber by Leray projection at insertion time.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::Mode;

/// Relative tolerance below which an ingested coefficient counts as
/// divergence free; larger violations are still projected, but reported.
pub const DIV_TOLERANCE: f64 = 1e-12;

/// Mode-wise Leray projection: `c - (k·c) k / |k|²`, the orthogonal
/// projection of `C^d` onto the plane orthogonal to `k`.
pub fn leray_project(k: &Mode, c: &[Complex64]) -> Result<Vec<Complex64>> {
    if k.dim() != c.len() {
        return Err(Error::DimMismatch {
            expected: k.dim(),
            found: c.len(),
        });
    }
    let ksq = k.norm_sq() as f64;
    let mut dot = Complex64::new(0.0, 0.0);
    for (kc, cc) in k.coords().iter().zip(c) {
        dot += cc * (*kc as f64);
    }
    let factor = dot / ksq;
    Ok(k.coords()
        .iter()
        .zip(c)
        .map(|(kc, cc)| cc - factor * (*kc as f64))
        .collect())
}

fn dot_with_k(k: &Mode, c: &[Complex64]) -> Complex64 {
    k.coords()
        .iter()
        .zip(c)
        .map(|(kc, cc)| cc * (*kc as f64))
        .sum()
}

fn vec_norm(c: &[Complex64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A finite-support spectral vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    dim: usize,
    /// Canonical representatives only; the -k coefficient is conj(v_k).
    coeffs: BTreeMap<Mode, Vec<Complex64>>,
}

/// How far an ingested coefficient was from divergence free.
#[derive(Clone, Debug)]
pub struct DivergenceReport {
    pub mode: Vec<i64>,
    pub relative_violation: f64,
}

impl SpectralField {
    pub fn new(dim: usize) -> Self {
        SpectralField {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_pairs(&self) -> usize {
        self.coeffs.len()
    }

    /// Sets the coefficient of `k` (and, implicitly, of `-k`). The input is
    /// Leray-projected; the relative size of the removed longitudinal part is
    /// returned so callers can warn about non-solenoidal data.
    pub fn set_coeff(&mut self, k: Mode, c: &[Complex64]) -> Result<f64> {
        if k.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: k.dim(),
            });
        }
        let projected = leray_project(&k, c)?;
        let norm = vec_norm(c);
        let violation = if norm > 0.0 {
            (dot_with_k(&k, c).norm()) / (k.norm() * norm)
        } else {
            0.0
        };
        let (key, value) = if k.is_canonical() {
            (k, projected)
        } else {
            (k.neg(), projected.iter().map(|z| z.conj()).collect())
        };
        if value.iter().all(|z| z.norm_sqr() == 0.0) {
            self.coeffs.remove(&key);
        } else {
            self.coeffs.insert(key, value);
        }
        Ok(violation)
    }

    /// Builds a field from already-projected coefficients keyed by canonical
    /// representatives. Zero coefficients are dropped.
    pub(crate) fn from_canonical_coeffs(
        dim: usize,
        coeffs: BTreeMap<Mode, Vec<Complex64>>,
    ) -> Self {
        let mut coeffs = coeffs;
        coeffs.retain(|_, c| c.iter().any(|z| z.norm_sqr() != 0.0));
        SpectralField { dim, coeffs }
    }

    /// The coefficient `v_k`, reconstructing the conjugate for non-canonical
    /// modes; zero vector if the mode is not in the support.
    pub fn coeff(&self, k: &Mode) -> Vec<Complex64> {
        if k.is_canonical() {
            self.coeffs
                .get(k)
                .cloned()
                .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); self.dim])
        } else {
            match self.coeffs.get(&k.neg()) {
                Some(c) => c.iter().map(|z| z.conj()).collect(),
                None => vec![Complex64::new(0.0, 0.0); self.dim],
            }
        }
    }

    /// Canonical representatives with their coefficients, in lexicographic order.
    pub fn iter_canonical(&self) -> impl Iterator<Item = (&Mode, &Vec<Complex64>)> {
        self.coeffs.iter()
    }

    /// The full support (both members of every ±pair), lexicographically sorted.
    pub fn support_full(&self) -> Vec<Mode> {
        let mut out: Vec<Mode> = Vec::with_capacity(2 * self.coeffs.len());
        for k in self.coeffs.keys() {
            out.push(k.clone());
            out.push(k.neg());
        }
        out.sort();
        out
    }

    /// `‖v‖_p = sqrt( Σ_k |k|^(2p) |v_k|² )`, summed over the full support in
    /// order of increasing |k| with compensated accumulation.
    pub fn sobolev_norm(&self, p: f64) -> f64 {
        let mut terms: Vec<(i64, f64)> = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                let w = (k.norm_sq() as f64).powf(p);
                (k.norm_sq(), 2.0 * w * c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            })
            .collect();
        terms.sort_by_key(|t| t.0);
        neumaier_sum(terms.iter().map(|t| t.1)).sqrt()
    }

    /// `⟨v|w⟩_p = Σ_k |k|^(2p) conj(v_k)·w_k` (real for real fields).
    pub fn sobolev_inner(&self, other: &SpectralField, p: f64) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut terms: Vec<(i64, f64)> = Vec::new();
        for (k, c) in &self.coeffs {
            let oc = other.coeff(k);
            let mut re = 0.0;
            for (a, b) in c.iter().zip(&oc) {
                re += (a.conj() * b).re;
            }
            // the ±pair contributes conj(z) + z = 2 Re z
            terms.push((k.norm_sq(), 2.0 * (k.norm_sq() as f64).powf(p) * re));
        }
        terms.sort_by_key(|t| t.0);
        Ok(neumaier_sum(terms.iter().map(|t| t.1)))
    }

    /// Restriction to the modes of `g` (the Galerkin projection `E^G`).
    pub fn project_onto(&self, g: &crate::mode::ModeSet) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| g.contains(k))
            .map(|(k, c)| (k.clone(), c.clone()))
            .collect();
        SpectralField {
            dim: self.dim,
            coeffs,
        }
    }

    /// The part of the field outside `g` (what `1 - E^G` keeps).
    pub fn tail_off(&self, g: &crate::mode::ModeSet) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| !g.contains(k))
            .map(|(k, c)| (k.clone(), c.clone()))
            .collect();
        SpectralField {
            dim: self.dim,
            coeffs,
        }
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &SpectralField, sign: f64) -> Result<SpectralField> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            let entry = coeffs
                .entry(k.clone())
                .or_insert_with(|| vec![Complex64::new(0.0, 0.0); self.dim]);
            for (e, v) in entry.iter_mut().zip(c) {
                *e += v * sign;
            }
        }
        coeffs.retain(|_, c| c.iter().any(|z| z.norm_sqr() != 0.0));
        Ok(SpectralField {
            dim: self.dim,
            coeffs,
        })
    }

    /// Largest relative divergence violation over the support (diagnostic;
    /// stays at rounding level because coefficients are projected on entry).
    pub fn max_divergence(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| {
                let n = vec_norm(c);
                if n == 0.0 {
                    0.0
                } else {
                    dot_with_k(k, c).norm() / (k.norm() * n)
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Neumaier compensated summation.
pub(crate) fn neumaier_sum<I: Iterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// The evolved and certified object: a velocity/magnetic pair `(u, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StatePair {
    pub u: SpectralField,
    pub b: SpectralField,
}

impl StatePair {
    pub fn new(u: SpectralField, b: SpectralField) -> Result<Self> {
        if u.dim() != b.dim() {
            return Err(Error::DimMismatch {
                expected: u.dim(),
                found: b.dim(),
            });
        }
        Ok(StatePair { u, b })
    }

    pub fn zero(dim: usize) -> Self {
        StatePair {
            u: SpectralField::new(dim),
            b: SpectralField::new(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }

    /// `‖(u,b)‖_p = sqrt(‖u‖_p² + ‖b‖_p²)`.
    pub fn pair_norm(&self, p: f64) -> f64 {
        self.u.sobolev_norm(p).hypot(self.b.sobolev_norm(p))
    }

    pub fn pair_inner(&self, other: &StatePair, p: f64) -> Result<f64> {
        Ok(self.u.sobolev_inner(&other.u, p)? + self.b.sobolev_inner(&other.b, p)?)
    }

    pub fn project_onto(&self, g: &crate::mode::ModeSet) -> StatePair {
        StatePair {
            u: self.u.project_onto(g),
            b: self.b.project_onto(g),
        }
    }

    pub fn tail_off(&self, g: &crate::mode::ModeSet) -> StatePair {
        StatePair {
            u: self.u.tail_off(g),
            b: self.b.tail_off(g),
        }
    }

    pub fn add(&self, other: &StatePair) -> Result<StatePair> {
        Ok(StatePair {
            u: self.u.add(&other.u)?,
            b: self.b.add(&other.b)?,
        })
    }

    pub fn sub(&self, other: &StatePair) -> Result<StatePair> {
        Ok(StatePair {
            u: self.u.sub(&other.u)?,
            b: self.b.sub(&other.b)?,
        })
    }
}

// ---------------------------------------------------------------------------
// JSON serialization: one record per ±pair, sorted lexicographically by k.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct CoeffRecord {
    pub k: Vec<i64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct StatePairRecord {
    pub u: Vec<CoeffRecord>,
    pub b: Vec<CoeffRecord>,
}

impl SpectralField {
    pub fn to_records(&self) -> Vec<CoeffRecord> {
        self.coeffs
            .iter()
            .map(|(k, c)| CoeffRecord {
                k: k.coords().to_vec(),
                re: c.iter().map(|z| z.re).collect(),
                im: c.iter().map(|z| z.im).collect(),
            })
            .collect()
    }

    /// Rebuilds a field from records. Accepts either representative of a
    /// ±pair (or both, if conjugate-consistent); rejects k = 0 entries.
    /// Returns the field together with the divergence violations found.
    pub fn from_records(dim: usize, records: &[CoeffRecord]) -> Result<(Self, Vec<DivergenceReport>)> {
        let mut field = SpectralField::new(dim);
        let mut reports = Vec::new();
        let mut seen: BTreeMap<Mode, Vec<Complex64>> = BTreeMap::new();
        for rec in records {
            if rec.k.len() != dim || rec.re.len() != dim || rec.im.len() != dim {
                return Err(Error::Datum(format!(
                    "record for k = {:?} has components of wrong dimension (expected {dim})",
                    rec.k
                )));
            }
            let k = Mode::new(rec.k.clone()).map_err(|_| Error::ZeroMode)?;
            let c: Vec<Complex64> = rec
                .re
                .iter()
                .zip(&rec.im)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect();
            // as stored under the canonical representative
            let (key, value): (Mode, Vec<Complex64>) = if k.is_canonical() {
                (k.clone(), c.clone())
            } else {
                (k.neg(), c.iter().map(|z| z.conj()).collect())
            };
            if let Some(prev) = seen.get(&key) {
                let diff: f64 = prev
                    .iter()
                    .zip(&value)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                let scale = vec_norm(prev).max(vec_norm(&value)).max(1e-300);
                if diff / scale > 1e-10 {
                    return Err(Error::ConjugateMismatch {
                        k: k.coords().to_vec(),
                    });
                }
                continue;
            }
            seen.insert(key, value);
            let violation = field.set_coeff(k.clone(), &c)?;
            if violation > DIV_TOLERANCE {
                reports.push(DivergenceReport {
                    mode: k.coords().to_vec(),
                    relative_violation: violation,
                });
            }
        }
        Ok((field, reports))
    }
}

impl StatePair {
    pub fn to_record(&self) -> StatePairRecord {
        StatePairRecord {
            u: self.u.to_records(),
            b: self.b.to_records(),
        }
    }

    pub fn from_record(dim: usize, rec: &StatePairRecord) -> Result<(Self, Vec<DivergenceReport>)> {
        let (u, mut warns) = SpectralField::from_records(dim, &rec.u)?;
        let (b, warns_b) = SpectralField::from_records(dim, &rec.b)?;
        warns.extend(warns_b);
        Ok((StatePair { u, b }, warns))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(c: &[i64]) -> Mode {
        Mode::new(c.to_vec()).unwrap()
    }

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn leray_examples() {
        // c parallel to k is annihilated
        let r = leray_project(&m(&[1, 0, 0]), &[cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]).unwrap();
        assert!(r.iter().all(|z| z.norm() == 0.0));
        // c orthogonal to k is untouched
        let r = leray_project(&m(&[1, 0, 0]), &[cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)]).unwrap();
        assert_eq!(r[1], cx(1.0, 0.0));
        // direct evaluation of c - (k·c) k / |k|²
        let r = leray_project(&m(&[1, 1, 0]), &[cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]).unwrap();
        assert!((r[0] - cx(0.5, 0.0)).norm() < 1e-15);
        assert!((r[1] - cx(-0.5, 0.0)).norm() < 1e-15);
        assert!(r[2].norm() < 1e-15);
    }

    #[test]
    fn leray_idempotent() {
        let k = m(&[2, -1, 3]);
        let c = [cx(0.3, -1.2), cx(2.0, 0.7), cx(-0.5, 0.25)];
        let once = leray_project(&k, &c).unwrap();
        let twice = leray_project(&k, &once).unwrap();
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn single_pair_norm() {
        // one ±pair at |k| = 1 with coefficient magnitude |γ|, p = 0:
        // ‖v‖_0 = sqrt(2) |γ|
        let mut f = SpectralField::new(3);
        f.set_coeff(m(&[1, 0, 0]), &[cx(0.0, 0.0), cx(0.3, 0.4), cx(0.0, 0.0)])
            .unwrap();
        let gamma = 0.5;
        assert!((f.sobolev_norm(0.0) - 2f64.sqrt() * gamma).abs() < 1e-15);
        // at order p the pair picks up |k|^p = 1
        assert!((f.sobolev_norm(3.0) - 2f64.sqrt() * gamma).abs() < 1e-15);
    }

    #[test]
    fn zero_field_norm() {
        assert_eq!(SpectralField::new(3).sobolev_norm(2.0), 0.0);
    }

    #[test]
    fn norm_monotone_in_order() {
        let mut f = SpectralField::new(3);
        f.set_coeff(m(&[1, 0, 0]), &[cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 1.0)])
            .unwrap();
        f.set_coeff(m(&[1, 1, 2]), &[cx(0.4, 0.1), cx(-0.2, 0.0), cx(0.0, 0.3)])
            .unwrap();
        // all |k| >= 1, so p >= q implies ‖·‖_p >= ‖·‖_q
        assert!(f.sobolev_norm(3.0) >= f.sobolev_norm(2.0));
        assert!(f.sobolev_norm(2.0) >= f.sobolev_norm(0.0));
    }

    #[test]
    fn reality_by_construction() {
        let mut f = SpectralField::new(3);
        // set via the non-canonical representative
        f.set_coeff(m(&[-1, 0, 2]), &[cx(0.0, 0.0), cx(1.0, -2.0), cx(0.0, 0.0)])
            .unwrap();
        let plus = f.coeff(&m(&[1, 0, -2]));
        let minus = f.coeff(&m(&[-1, 0, 2]));
        for (a, b) in plus.iter().zip(&minus) {
            assert_eq!(a.conj(), *b);
        }
    }

    #[test]
    fn ingestion_projects_and_reports() {
        let mut f = SpectralField::new(3);
        // blatantly non-solenoidal coefficient along k
        let violation = f
            .set_coeff(m(&[1, 0, 0]), &[cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)])
            .unwrap();
        assert!(violation > 0.5);
        let c = f.coeff(&m(&[1, 0, 0]));
        assert!(c[0].norm() < 1e-15);
        assert!((c[1] - cx(1.0, 0.0)).norm() < 1e-15);
        assert!(f.max_divergence() < 1e-15);
    }

    #[test]
    fn pair_norm_with_zero_component() {
        let mut u = SpectralField::new(3);
        u.set_coeff(m(&[0, 1, 0]), &[cx(2.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)])
            .unwrap();
        let s = StatePair::new(u.clone(), SpectralField::new(3)).unwrap();
        assert_eq!(s.pair_norm(2.5), u.sobolev_norm(2.5));
    }

    #[test]
    fn record_roundtrip_rejects_zero_mode() {
        let rec = CoeffRecord {
            k: vec![0, 0, 0],
            re: vec![1.0, 0.0, 0.0],
            im: vec![0.0, 0.0, 0.0],
        };
        assert!(SpectralField::from_records(3, &[rec]).is_err());
    }

    #[test]
    fn record_conjugate_consistency() {
        let a = CoeffRecord {
            k: vec![1, 0, 0],
            re: vec![0.0, 1.0, 0.0],
            im: vec![0.0, 2.0, 0.0],
        };
        let good = CoeffRecord {
            k: vec![-1, 0, 0],
            re: vec![0.0, 1.0, 0.0],
            im: vec![0.0, -2.0, 0.0],
        };
        let bad = CoeffRecord {
            k: vec![-1, 0, 0],
            re: vec![0.0, 5.0, 0.0],
            im: vec![0.0, 2.0, 0.0],
        };
        assert!(SpectralField::from_records(3, &[a.clone(), good]).is_ok());
        assert!(SpectralField::from_records(3, &[a, bad]).is_err());
    }

    #[test]
    fn parallelogram_law() {
        let mut w = SpectralField::new(3);
        w.set_coeff(m(&[1, 0, 0]), &[cx(0.0, 0.1), cx(0.7, 0.0), cx(0.0, -0.4)])
            .unwrap();
        w.set_coeff(m(&[1, 2, 0]), &[cx(0.2, 0.0), cx(-0.1, 0.5), cx(0.3, 0.0)])
            .unwrap();
        let mut c = SpectralField::new(3);
        c.set_coeff(m(&[1, 0, 0]), &[cx(0.0, 0.0), cx(0.0, 0.9), cx(0.5, 0.0)])
            .unwrap();
        c.set_coeff(m(&[0, 1, 1]), &[cx(1.0, -0.2), cx(0.1, 0.0), cx(-0.1, 0.2)])
            .unwrap();
        for p in [0.0, 1.5, 3.0] {
            let lhs = w.add(&c).unwrap().sobolev_norm(p).powi(2)
                + w.sub(&c).unwrap().sobolev_norm(p).powi(2);
            let rhs = 2.0 * w.sobolev_norm(p).powi(2) + 2.0 * c.sobolev_norm(p).powi(2);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }
}
