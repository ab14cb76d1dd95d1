//! Lattice wavenumbers and finite symmetric mode sets.
//!
//! A mode is a nonzero point of the integer lattice; a mode set `G` is a
//! finite symmetric subset of the nonzero lattice. `G` determines the
//! Galerkin subspace, the convolution support `G + G`, the differential
//! error support `dG = (G + G) \ (G ∪ {0})` and the tail radius
//! `|G| = min { |k| : k nonzero, k ∉ G }` driving the projection bound
//! `‖(1 - E^G) v‖_p ≤ ‖v‖_q / |G|^(q-p)`.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A nonzero lattice wavenumber in dimension `d`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Mode(Vec<i64>);

impl Mode {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.iter().all(|&c| c == 0) {
            return Err(Error::ZeroMode);
        }
        Ok(Mode(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// |k|^2 as an exact integer.
    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|&c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    pub fn neg(&self) -> Mode {
        Mode(self.0.iter().map(|&c| -c).collect())
    }

    /// One representative per ±pair is stored throughout the crate: the one
    /// whose first nonzero coordinate is positive.
    pub fn is_canonical(&self) -> bool {
        for &c in &self.0 {
            if c != 0 {
                return c > 0;
            }
        }
        false
    }

    pub fn canonical(&self) -> Mode {
        if self.is_canonical() {
            self.clone()
        } else {
            self.neg()
        }
    }

    pub(crate) fn add(&self, other: &Mode) -> Vec<i64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()
    }

    pub(crate) fn sub(&self, other: &Mode) -> Vec<i64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A finite symmetric set of nonzero modes (`k ∈ G ⇔ -k ∈ G`, `0 ∉ G`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeSet {
    dim: usize,
    modes: BTreeSet<Mode>,
}

impl ModeSet {
    /// Builds a set from arbitrary modes, validating symmetry.
    pub fn new<I: IntoIterator<Item = Mode>>(dim: usize, modes: I) -> Result<Self> {
        let set: BTreeSet<Mode> = modes.into_iter().collect();
        for k in &set {
            if k.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: k.dim(),
                });
            }
            if !set.contains(&k.neg()) {
                return Err(Error::AsymmetricModeSet {
                    k: k.coords().to_vec(),
                });
            }
        }
        Ok(ModeSet { dim, modes: set })
    }

    /// Builds a set from arbitrary modes, adding the missing negatives.
    pub fn symmetrized<I: IntoIterator<Item = Mode>>(dim: usize, modes: I) -> Result<Self> {
        let mut set = BTreeSet::new();
        for k in modes {
            if k.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: k.dim(),
                });
            }
            set.insert(k.neg());
            set.insert(k);
        }
        Ok(ModeSet { dim, modes: set })
    }

    pub fn empty(dim: usize) -> Self {
        ModeSet {
            dim,
            modes: BTreeSet::new(),
        }
    }

    /// All nonzero modes with every coordinate in `[-radius, radius]`.
    pub fn cube(radius: i64, dim: usize) -> Result<Self> {
        if radius < 1 {
            return Err(Error::Config(format!(
                "cube radius must be >= 1, got {radius}"
            )));
        }
        let mut modes = BTreeSet::new();
        let mut coords = vec![-radius; dim];
        loop {
            if coords.iter().any(|&c| c != 0) {
                modes.insert(Mode(coords.clone()));
            }
            // odometer over [-radius, radius]^d
            let mut i = 0;
            loop {
                if i == dim {
                    return Ok(ModeSet { dim, modes });
                }
                coords[i] += 1;
                if coords[i] > radius {
                    coords[i] = -radius;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn contains(&self, k: &Mode) -> bool {
        self.modes.contains(k)
    }

    pub fn contains_coords(&self, coords: &[i64]) -> bool {
        if coords.iter().all(|&c| c == 0) {
            return false;
        }
        self.modes.contains(&Mode(coords.to_vec()))
    }

    /// Modes in ascending lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &Mode> {
        self.modes.iter()
    }

    /// The canonical representatives, one per ±pair, in lexicographic order.
    pub fn canonical_half(&self) -> Vec<Mode> {
        self.modes
            .iter()
            .filter(|k| k.is_canonical())
            .cloned()
            .collect()
    }

    /// The nonzero part of the sum set `G + G = { p + q : p, q ∈ G }`.
    /// (0 always belongs to G + G for nonempty G but is dropped here, since
    /// the only consumer is `dG`, which excludes it anyway.)
    pub fn sum_set(&self) -> BTreeSet<Mode> {
        let mut out = BTreeSet::new();
        for p in &self.modes {
            for q in &self.modes {
                let s = p.add(q);
                if s.iter().any(|&c| c != 0) {
                    out.insert(Mode(s));
                }
            }
        }
        out
    }

    /// `dG := (G + G) \ (G ∪ {0})`, the support of the Galerkin differential error.
    pub fn d_set(&self) -> ModeSet {
        let sums = self.sum_set();
        let modes: BTreeSet<Mode> = sums
            .into_iter()
            .filter(|k| !self.modes.contains(k))
            .collect();
        ModeSet {
            dim: self.dim,
            modes,
        }
    }

    /// `|G| = min { |k| : k ∈ Z^d \ {0}, k ∉ G }`, found by scanning the
    /// bounding box of G extended by one layer (the layer always contains an
    /// excluded mode, and anything outside it is farther away).
    pub fn tail_radius(&self) -> f64 {
        if self.modes.is_empty() {
            return 1.0;
        }
        let dim = self.dim;
        let mut lo = vec![0i64; dim];
        let mut hi = vec![0i64; dim];
        for k in &self.modes {
            for (i, &c) in k.coords().iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        for i in 0..dim {
            lo[i] -= 1;
            hi[i] += 1;
        }
        let mut best: Option<i64> = None;
        let mut coords = lo.clone();
        loop {
            let nonzero = coords.iter().any(|&c| c != 0);
            if nonzero && !self.contains_coords(&coords) {
                let ns: i64 = coords.iter().map(|&c| c * c).sum();
                best = Some(match best {
                    Some(b) => b.min(ns),
                    None => ns,
                });
            }
            let mut i = 0;
            loop {
                if i == dim {
                    return (best.expect("extended bounding box holds an excluded mode") as f64)
                        .sqrt();
                }
                coords[i] += 1;
                if coords[i] > hi[i] {
                    coords[i] = lo[i];
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }
}

/// Galerkin tail bound `‖(1 - E^G) v‖_p ≤ ‖v‖_q / |G|^(q-p)` for `q ≥ p`.
pub fn galerkin_tail_bound(f_norm_q: f64, p: f64, q: f64, g: &ModeSet) -> Result<f64> {
    if q < p {
        return Err(Error::InvalidOrders(format!(
            "tail bound requires q >= p, got p = {p}, q = {q}"
        )));
    }
    Ok(f_norm_q / g.tail_radius().powf(q - p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(c: &[i64]) -> Mode {
        Mode::new(c.to_vec()).unwrap()
    }

    #[test]
    fn zero_mode_rejected() {
        assert!(Mode::new(vec![0, 0, 0]).is_err());
    }

    #[test]
    fn canonical_representative() {
        assert!(m(&[1, -2, 0]).is_canonical());
        assert!(!m(&[-1, 2, 0]).is_canonical());
        assert!(m(&[0, 0, 1]).is_canonical());
        assert_eq!(m(&[0, -1, 2]).canonical(), m(&[0, 1, -2]));
    }

    #[test]
    fn cube_sizes() {
        // 3^3 - 1 and 5^3 - 1 nonzero points
        assert_eq!(ModeSet::cube(1, 3).unwrap().len(), 26);
        let g2 = ModeSet::cube(2, 3).unwrap();
        assert_eq!(g2.len(), 124);
        assert_eq!(g2.canonical_half().len(), 62);
        assert_eq!(ModeSet::cube(3, 3).unwrap().len(), 342);
    }

    #[test]
    fn dg_of_single_pair() {
        let g = ModeSet::new(3, [m(&[1, 0, 0]), m(&[-1, 0, 0])]).unwrap();
        let dg = g.d_set();
        assert_eq!(dg.len(), 2);
        assert!(dg.contains(&m(&[2, 0, 0])));
        assert!(dg.contains(&m(&[-2, 0, 0])));
    }

    #[test]
    fn dg_of_124_mode_cube() {
        // G + G is the full side-9 cube; minus the origin and the 124 modes
        // of G leaves 9^3 - 1 - 124 = 604 modes.
        let g = ModeSet::cube(2, 3).unwrap();
        let dg = g.d_set();
        assert_eq!(dg.len(), 604);
        // dG is symmetric
        for k in dg.iter() {
            assert!(dg.contains(&k.neg()));
        }
    }

    #[test]
    fn dg_of_empty_set() {
        let g = ModeSet::empty(3);
        assert!(g.d_set().is_empty());
    }

    #[test]
    fn asymmetric_set_rejected() {
        assert!(ModeSet::new(3, [m(&[1, 0, 0])]).is_err());
        let s = ModeSet::symmetrized(3, [m(&[1, 0, 0])]).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn tail_radius_of_cube() {
        // every mode with coordinates in [-2,2] is inside; the nearest
        // excluded modes are of type (3,0,0)
        let g = ModeSet::cube(2, 3).unwrap();
        assert_eq!(g.tail_radius(), 3.0);
    }

    #[test]
    fn tail_radius_of_small_sets() {
        // for G = {±(1,0,0)} the excluded mode (0,1,0) already has norm 1
        let g = ModeSet::new(3, [m(&[1, 0, 0]), m(&[-1, 0, 0])]).unwrap();
        assert_eq!(g.tail_radius(), 1.0);
        // with all six unit modes inside, the nearest excluded is (1,1,0)
        let units = ModeSet::symmetrized(3, [m(&[1, 0, 0]), m(&[0, 1, 0]), m(&[0, 0, 1])]).unwrap();
        assert!((units.tail_radius() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tail_bound_orders() {
        let g = ModeSet::cube(2, 3).unwrap();
        // p = q: exponent zero, bound equals the norm
        assert_eq!(galerkin_tail_bound(7.5, 3.0, 3.0, &g).unwrap(), 7.5);
        assert!((galerkin_tail_bound(9.0, 3.0, 5.0, &g).unwrap() - 1.0).abs() < 1e-15);
        assert!(galerkin_tail_bound(1.0, 5.0, 3.0, &g).is_err());
    }
}
