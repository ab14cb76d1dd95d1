//! Constants for the Sobolev inequalities obeyed by the bilinear maps.
//!
//! Two sources are supported. The `tabulated` policy returns the published
//! certified values for d = 3 (K_3 = 0.320, G_3 = 0.438, K_5 = 0.657,
//! G_5 = 0.749, G_53 = 1.26, and the √2-scaled two-component variants
//! rounded up to three digits). The `computed` policy evaluates the lattice
//! sums behind those constants, truncated to a ball |h| ≤ R and maximized
//! over a scanned range of k; truncation only loses mass, so the result is a
//! lower estimate of the sup, not a certified bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mode::Mode;

/// Published values, d = 3: (p, n, K_pn, G_pn); K_53 was never published.
const TABLE_D3: &[(f64, f64, Option<f64>, f64)] = &[
    (3.0, 3.0, Some(0.320), 0.438),
    (5.0, 5.0, Some(0.657), 0.749),
    (5.0, 3.0, None, 1.26),
];

/// Hatted values, d = 3: √2 times the above, rounded up to three digits.
const TABLE_D3_HAT: &[(f64, f64, Option<f64>, f64)] = &[
    (3.0, 3.0, Some(0.453), 0.620),
    (5.0, 5.0, Some(0.930), 1.06),
    (5.0, 3.0, None, 1.79),
];

/// Rounds up to three significant digits (the paper's presentation rule).
pub fn round_up_3sig(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let exp = x.abs().log10().floor() as i32 - 2;
    let scale = 10f64.powi(exp);
    (x / scale).ceil() * scale
}

/// The geometric factor `Q_{h,l}`: `sin θ_{h,l}` for d ≥ 3, and
/// `|sin θ_{h,l} cos θ_{h+l,l}|` for d = 2 (only its square enters the
/// sums, so the magnitude is returned). Zero when `h + l = 0` in d = 2.
pub fn q_factor(h: &[i64], l: &[i64]) -> Result<f64> {
    Ok(q_factor_sq(h, l)?.sqrt())
}

fn q_factor_sq(h: &[i64], l: &[i64]) -> Result<f64> {
    if h.len() != l.len() {
        return Err(Error::DimMismatch {
            expected: h.len(),
            found: l.len(),
        });
    }
    let d = h.len();
    let hsq: i64 = h.iter().map(|&c| c * c).sum();
    let lsq: i64 = l.iter().map(|&c| c * c).sum();
    if hsq == 0 || lsq == 0 {
        return Err(Error::ZeroMode);
    }
    let hl: i64 = h.iter().zip(l).map(|(&a, &b)| a * b).sum();
    let sin_sq = (1.0 - (hl * hl) as f64 / (hsq * lsq) as f64).max(0.0);
    if d >= 3 {
        return Ok(sin_sq);
    }
    // d = 2: the extra cos θ_{h+l,l} factor
    let s: Vec<i64> = h.iter().zip(l).map(|(&a, &b)| a + b).collect();
    let ssq: i64 = s.iter().map(|&c| c * c).sum();
    if ssq == 0 {
        // sin θ_{h,l} vanishes anyway; the cosine is immaterial
        return Ok(0.0);
    }
    let sl: i64 = s.iter().zip(l).map(|(&a, &b)| a * b).sum();
    let cos_sq = (sl * sl) as f64 / (ssq * lsq) as f64;
    Ok(sin_sq * cos_sq)
}

/// |x|^p from |x|² and |x|, with a cheap path for small integer p.
fn pow_norm(nsq: f64, n1: f64, p: f64) -> f64 {
    let rounded = p.round();
    if (p - rounded).abs() < 1e-12 && rounded.abs() <= 16.0 {
        let ip = rounded as i32;
        if ip % 2 == 0 {
            nsq.powi(ip / 2)
        } else {
            n1.powi(ip)
        }
    } else {
        n1.powf(p)
    }
}

/// A truncated lattice sum with a heuristic convergence indicator:
/// the share contributed by the outermost unit shell `R - 1 < |h| ≤ R`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LatticeSum {
    pub value: f64,
    pub last_shell_ratio: f64,
}

fn check_k_orders(kind: char, d: usize, p: f64, n: f64, k: &Mode, r: f64) -> Result<()> {
    let floor = if kind == 'K' {
        d as f64 / 2.0
    } else {
        d as f64 / 2.0 + 1.0
    };
    if !(p >= n && n > floor) {
        return Err(Error::InvalidOrders(format!(
            "{kind}-sum requires p >= n > {floor}, got p = {p}, n = {n} (d = {d})"
        )));
    }
    if r < 2.0 * k.norm() {
        return Err(Error::InvalidOrders(format!(
            "truncation radius R = {r} below 2|k| = {}",
            2.0 * k.norm()
        )));
    }
    Ok(())
}

fn lattice_sum_impl(
    k: &Mode,
    p: f64,
    n: f64,
    r: f64,
    g_kind: bool, // false: K-sum, true: G-sum
) -> LatticeSum {
    let d = k.dim();
    let kc = k.coords();
    let ksq = k.norm_sq() as f64;
    let k1 = ksq.sqrt();
    let kp = pow_norm(ksq, k1, p);
    let rmax = r.floor() as i64;
    let r_sq = r * r;
    let shell_inner_sq = (r - 1.0) * (r - 1.0);

    let mut total = 0.0;
    let mut shell = 0.0;
    let mut h = vec![-rmax; d];
    let mut l = vec![0i64; d];
    'outer: loop {
        let hsq_i: i64 = h.iter().map(|&c| c * c).sum();
        let hsq = hsq_i as f64;
        if hsq_i != 0 && hsq <= r_sq {
            // l = k - h, skipped when it vanishes (h = k)
            let mut lsq_i: i64 = 0;
            let mut hl_i: i64 = 0;
            for i in 0..d {
                l[i] = kc[i] - h[i];
                lsq_i += l[i] * l[i];
                hl_i += h[i] * l[i];
            }
            if lsq_i != 0 {
                let lsq = lsq_i as f64;
                let q_sq = {
                    let sin_sq = (1.0 - (hl_i * hl_i) as f64 / (hsq * lsq)).max(0.0);
                    if d >= 3 {
                        sin_sq
                    } else {
                        // h + l = k ≠ 0 inside the sum, so the cosine is defined
                        let sl: i64 = kc.iter().zip(&l).map(|(&a, &b)| a * b).sum();
                        sin_sq * (sl * sl) as f64 / (ksq * lsq)
                    }
                };
                if q_sq > 0.0 {
                    let h1 = hsq.sqrt();
                    let l1 = lsq.sqrt();
                    let term = if !g_kind {
                        let denom = pow_norm(hsq, h1, p) * pow_norm(lsq, l1, n)
                            + pow_norm(hsq, h1, n) * pow_norm(lsq, l1, p);
                        4.0 * kp * q_sq / (denom * denom)
                    } else {
                        let num = kp - pow_norm(lsq, l1, p);
                        let denom = pow_norm(hsq, h1, p) * pow_norm(lsq, l1, n - 1.0)
                            + pow_norm(hsq, h1, n) * pow_norm(lsq, l1, p - 1.0);
                        4.0 * num * num * q_sq / (denom * denom)
                    };
                    total += term;
                    if hsq > shell_inner_sq {
                        shell += term;
                    }
                }
            }
        }
        // odometer over [-rmax, rmax]^d
        let mut i = 0;
        loop {
            if i == d {
                break 'outer;
            }
            h[i] += 1;
            if h[i] > rmax {
                h[i] = -rmax;
                i += 1;
            } else {
                break;
            }
        }
    }
    LatticeSum {
        value: total,
        last_shell_ratio: if total > 0.0 { shell / total } else { 0.0 },
    }
}

/// Truncated `K_pn` lattice sum at wavenumber `k`:
/// `4 |k|^{2p} Σ_h Q²_{h,k-h} / (|h|^p |k-h|^n + |h|^n |k-h|^p)²`
/// over `0 < |h| ≤ R`, `h ≠ k`. Requires `p ≥ n > d/2` and `R ≥ 2|k|`.
pub fn lattice_k(k: &Mode, p: f64, n: f64, r: f64) -> Result<LatticeSum> {
    check_k_orders('K', k.dim(), p, n, k, r)?;
    Ok(lattice_sum_impl(k, p, n, r, false))
}

/// Truncated `G_pn` lattice sum at wavenumber `k`:
/// `4 Σ_h (|k|^p - |k-h|^p)² Q²_{h,k-h} / (|h|^p |k-h|^{n-1} + |h|^n |k-h|^{p-1})²`
/// over `0 < |h| ≤ R`, `h ≠ k`. Requires `p ≥ n > d/2 + 1` and `R ≥ 2|k|`.
pub fn lattice_g(k: &Mode, p: f64, n: f64, r: f64) -> Result<LatticeSum> {
    check_k_orders('G', k.dim(), p, n, k, r)?;
    Ok(lattice_sum_impl(k, p, n, r, true))
}

/// Which constant a bundle entry carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    K,
    G,
    KHat,
    GHat,
}

impl std::fmt::Display for ConstantKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConstantKind::K => "K",
            ConstantKind::G => "G",
            ConstantKind::KHat => "K_hat",
            ConstantKind::GHat => "G_hat",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ConstantsSource {
    Tabulated,
    /// Truncated sup over the scanned k-range; a lower estimate, not a bound.
    Computed {
        truncation_radius: f64,
        scan_radius: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantEntry {
    pub p: f64,
    pub n: f64,
    pub kind: ConstantKind,
    pub value: f64,
    /// Argmax of the scanned sup (computed mode only).
    pub k_argmax: Option<Vec<i64>>,
    /// Outermost-shell share of the truncated sum at the argmax.
    pub tail_indicator: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantsBundle {
    pub d: usize,
    pub source: ConstantsSource,
    pub entries: Vec<ConstantEntry>,
}

impl ConstantsBundle {
    pub fn get(&self, p: f64, n: f64, kind: ConstantKind) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.p == p && e.n == n && e.kind == kind)
            .map(|e| e.value)
    }

    pub fn require(&self, p: f64, n: f64, kind: ConstantKind) -> Result<f64> {
        self.get(p, n, kind).ok_or_else(|| {
            let available = self
                .entries
                .iter()
                .map(|e| format!("{}({},{})", e.kind, e.p, e.n))
                .collect::<Vec<_>>()
                .join(", ");
            Error::ConstantUnavailable {
                d: self.d,
                p,
                n,
                kind: kind.to_string(),
                available,
            }
        })
    }

    /// All published d = 3 entries.
    pub fn tabulated(d: usize) -> Result<Self> {
        if d != 3 {
            return Err(Error::ConstantUnavailable {
                d,
                p: f64::NAN,
                n: f64::NAN,
                kind: "any".into(),
                available: "tabulated constants exist only for d = 3".into(),
            });
        }
        let mut entries = Vec::new();
        for ((p, n, k, g), (hp, hn, kh, gh)) in TABLE_D3.iter().zip(TABLE_D3_HAT) {
            debug_assert!(p == hp && n == hn);
            if let (Some(k), Some(kh)) = (k, kh) {
                entries.push(ConstantEntry {
                    p: *p,
                    n: *n,
                    kind: ConstantKind::K,
                    value: *k,
                    k_argmax: None,
                    tail_indicator: None,
                });
                entries.push(ConstantEntry {
                    p: *p,
                    n: *n,
                    kind: ConstantKind::KHat,
                    value: *kh,
                    k_argmax: None,
                    tail_indicator: None,
                });
            }
            entries.push(ConstantEntry {
                p: *p,
                n: *n,
                kind: ConstantKind::G,
                value: *g,
                k_argmax: None,
                tail_indicator: None,
            });
            entries.push(ConstantEntry {
                p: *p,
                n: *n,
                kind: ConstantKind::GHat,
                value: *gh,
                k_argmax: None,
                tail_indicator: None,
            });
        }
        Ok(ConstantsBundle {
            d,
            source: ConstantsSource::Tabulated,
            entries,
        })
    }
}

/// Policy for `estimate_constants`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum ConstantsPolicy {
    #[default]
    Tabulated,
    Computed {
        truncation_radius: f64,
        k_scan_radius: f64,
    },
}

/// Returns the constants for one `(p, n)` pair.
///
/// Tabulated mode requires `(d, p, n)` in the published set. Computed mode
/// scans all k with `|k| ≤ k_scan_radius` (one representative per ±pair;
/// the sums are even in k) and reports
/// `(2π)^{-d/2} sqrt(max_k of the truncated sum)` with the argmax.
pub fn estimate_constants(p: f64, n: f64, d: usize, policy: ConstantsPolicy) -> Result<ConstantsBundle> {
    match policy {
        ConstantsPolicy::Tabulated => {
            let all = ConstantsBundle::tabulated(d)?;
            let entries: Vec<ConstantEntry> = all
                .entries
                .into_iter()
                .filter(|e| e.p == p && e.n == n)
                .collect();
            if entries.is_empty() {
                let pairs = TABLE_D3
                    .iter()
                    .map(|(p, n, _, _)| format!("(p={p}, n={n})"))
                    .collect::<Vec<_>>()
                    .join(", ");
                return Err(Error::ConstantUnavailable {
                    d,
                    p,
                    n,
                    kind: "any".into(),
                    available: pairs,
                });
            }
            Ok(ConstantsBundle {
                d,
                source: ConstantsSource::Tabulated,
                entries,
            })
        }
        ConstantsPolicy::Computed {
            truncation_radius: r,
            k_scan_radius,
        } => {
            let (k_best, k_sup) = scan_sup(d, p, n, r, k_scan_radius, false)?;
            let (g_best, g_sup) = scan_sup(d, p, n, r, k_scan_radius, true)?;
            let prefactor = (2.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
            let k_val = prefactor * k_sup.value.sqrt();
            let g_val = prefactor * g_sup.value.sqrt();
            let entries = vec![
                ConstantEntry {
                    p,
                    n,
                    kind: ConstantKind::K,
                    value: k_val,
                    k_argmax: Some(k_best.coords().to_vec()),
                    tail_indicator: Some(k_sup.last_shell_ratio),
                },
                ConstantEntry {
                    p,
                    n,
                    kind: ConstantKind::KHat,
                    value: 2f64.sqrt() * k_val,
                    k_argmax: Some(k_best.coords().to_vec()),
                    tail_indicator: Some(k_sup.last_shell_ratio),
                },
                ConstantEntry {
                    p,
                    n,
                    kind: ConstantKind::G,
                    value: g_val,
                    k_argmax: Some(g_best.coords().to_vec()),
                    tail_indicator: Some(g_sup.last_shell_ratio),
                },
                ConstantEntry {
                    p,
                    n,
                    kind: ConstantKind::GHat,
                    value: 2f64.sqrt() * g_val,
                    k_argmax: Some(g_best.coords().to_vec()),
                    tail_indicator: Some(g_sup.last_shell_ratio),
                },
            ];
            Ok(ConstantsBundle {
                d,
                source: ConstantsSource::Computed {
                    truncation_radius: r,
                    scan_radius: k_scan_radius,
                },
                entries,
            })
        }
    }
}

fn scan_sup(
    d: usize,
    p: f64,
    n: f64,
    r: f64,
    k_scan_radius: f64,
    g_kind: bool,
) -> Result<(Mode, LatticeSum)> {
    if k_scan_radius < 1.0 {
        return Err(Error::InvalidOrders(format!(
            "k scan radius must be >= 1, got {k_scan_radius}"
        )));
    }
    let kmax = k_scan_radius.floor() as i64;
    let scan_sq = k_scan_radius * k_scan_radius;
    let mut best: Option<(Mode, LatticeSum)> = None;
    let mut coords = vec![-kmax; d];
    loop {
        let nsq: i64 = coords.iter().map(|&c| c * c).sum();
        if nsq != 0 && (nsq as f64) <= scan_sq {
            let k = Mode::new(coords.clone()).unwrap();
            // ±k give identical sums; scan the canonical representative only
            if k.is_canonical() {
                let s = if g_kind {
                    lattice_g(&k, p, n, r)?
                } else {
                    lattice_k(&k, p, n, r)?
                };
                let better = match &best {
                    Some((_, cur)) => s.value > cur.value,
                    None => true,
                };
                if better {
                    best = Some((k, s));
                }
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                return Ok(best.expect("scan radius >= 1 covers at least one mode"));
            }
            coords[i] += 1;
            if coords[i] > kmax {
                coords[i] = -kmax;
                i += 1;
            } else {
                break;
            }
        }
    }
}
