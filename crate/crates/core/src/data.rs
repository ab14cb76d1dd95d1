//! Benchmark initial data in Fourier space, and datum file I/O.
//!
//! The Orszag-Tang vortex and the magnetically perturbed ABC flow are built
//! directly from their exact Fourier coefficients; the trigonometric
//! physical-space formulas never enter. Closed-form norms:
//! `‖u0‖_3 = (2π)^(3/2) sqrt(4 + 132 β²)` (Orszag-Tang) and
//! `(2π)^(3/2) sqrt(A² + B² + C² + 4 D²)` (ABC).

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{CoeffRecord, DivergenceReport, SpectralField, StatePair};
use crate::mode::Mode;

fn c3() -> f64 {
    (2.0 * std::f64::consts::PI).powf(1.5)
}

fn set(field: &mut SpectralField, k: [i64; 3], c: [Complex64; 3]) {
    // named data are exactly solenoidal; the projection is a no-op
    field
        .set_coeff(Mode::new(k.to_vec()).unwrap(), &c)
        .expect("benchmark coefficient");
}

/// Orszag-Tang vortex with magnetic amplitude `beta` (d = 3).
pub fn make_orszag_tang(beta: f64) -> StatePair {
    let s = c3();
    let i = Complex64::i();
    let zero = Complex64::new(0.0, 0.0);
    let re = |x: f64| Complex64::new(x, 0.0);

    let mut u = SpectralField::new(3);
    // u_{0,+a1} = -(2π)^{3/2} i (0,1,0),  u_{0,+a2} = +(2π)^{3/2} i (1,0,0)
    set(&mut u, [1, 0, 0], [zero, -i * s, zero]);
    set(&mut u, [0, 1, 0], [i * s, zero, zero]);

    let mut b = SpectralField::new(3);
    if beta != 0.0 {
        let ib = i * s * beta;
        // b_{0,+a1} = -(2π)^{3/2} i β (0, 1, 1/2)
        set(&mut b, [1, 0, 0], [zero, -ib, -ib * re(0.5)]);
        // b_{0,+a2} = -(2π)^{3/2} i β (0, 0, 1/2)
        set(&mut b, [0, 1, 0], [zero, zero, -ib * re(0.5)]);
        // b_{0,+a3} = -(2π)^{3/2} i β (1/2, 1/2, 0)
        set(&mut b, [0, 0, 1], [-ib * re(0.5), -ib * re(0.5), zero]);
        // b_{0,+a4} = +(2π)^{3/2} i β (1, 0, 0), a4 = (0,2,0)
        set(&mut b, [0, 2, 0], [ib, zero, zero]);
    }
    StatePair::new(u, b).unwrap()
}

/// ABC flow with a perturbing magnetic field of amplitude `d_amp` (d = 3).
pub fn make_abc(a: f64, b_amp: f64, c_amp: f64, d_amp: f64) -> StatePair {
    let s = c3();
    let i = Complex64::i();
    let zero = Complex64::new(0.0, 0.0);
    let re = |x: f64| Complex64::new(x, 0.0);

    let mut u = SpectralField::new(3);
    // u_{0,+a1} = (2π)^{3/2} (A/2) (0, -i, 1)
    set(&mut u, [1, 0, 0], [zero, -i * s * (a / 2.0), re(s * a / 2.0)]);
    // u_{0,+a2} = (2π)^{3/2} (B/2) (1, 0, -i)
    set(
        &mut u,
        [0, 1, 0],
        [re(s * b_amp / 2.0), zero, -i * s * (b_amp / 2.0)],
    );
    // u_{0,+a3} = (2π)^{3/2} (C/2) (-i, 1, 0)
    set(
        &mut u,
        [0, 0, 1],
        [-i * s * (c_amp / 2.0), re(s * c_amp / 2.0), zero],
    );

    let mut b = SpectralField::new(3);
    if d_amp != 0.0 {
        let id = i * s * (d_amp / 4.0);
        // b_{0,+a5} = +(2π)^{3/2} i (D/4) (-1, 1, 0), a5 = (1,1,0)
        set(&mut b, [1, 1, 0], [-id, id, zero]);
        // b_{0,+a6} = +(2π)^{3/2} i (D/4) (-1, -1, 0), a6 = (1,-1,0)
        set(&mut b, [1, -1, 0], [-id, -id, zero]);
    }
    StatePair::new(u, b).unwrap()
}

/// Closed-form `‖u0‖_3` for the Orszag-Tang datum.
pub fn orszag_tang_norm3(beta: f64) -> f64 {
    c3() * (4.0 + 132.0 * beta * beta).sqrt()
}

/// Closed-form `‖u0‖_3` for the ABC datum.
pub fn abc_norm3(a: f64, b: f64, c: f64, d: f64) -> f64 {
    c3() * (a * a + b * b + c * c + 4.0 * d * d).sqrt()
}

/// How a run obtains its initial datum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum DatumSpec {
    OrszagTang { beta: f64 },
    Abc { a: f64, b: f64, c: f64, d: f64 },
    File { path: String },
}

impl DatumSpec {
    /// Parses the CLI forms `ot:BETA`, `abc:A,B,C,D`, `file:PATH`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("datum spec `{s}` lacks a `kind:` prefix")))?;
        match kind {
            "ot" => {
                let beta: f64 = rest
                    .parse()
                    .map_err(|_| Error::Config(format!("bad Orszag-Tang beta `{rest}`")))?;
                Ok(DatumSpec::OrszagTang { beta })
            }
            "abc" => {
                let parts: Vec<&str> = rest.split(',').collect();
                if parts.len() != 4 {
                    return Err(Error::Config(format!(
                        "ABC datum needs four amplitudes, got `{rest}`"
                    )));
                }
                let mut vals = [0.0; 4];
                for (v, p) in vals.iter_mut().zip(&parts) {
                    *v = p
                        .parse()
                        .map_err(|_| Error::Config(format!("bad ABC amplitude `{p}`")))?;
                }
                Ok(DatumSpec::Abc {
                    a: vals[0],
                    b: vals[1],
                    c: vals[2],
                    d: vals[3],
                })
            }
            "file" => Ok(DatumSpec::File {
                path: rest.to_string(),
            }),
            other => Err(Error::Config(format!("unknown datum kind `{other}`"))),
        }
    }

    /// Builds the datum; file-backed data may carry divergence warnings.
    pub fn realize(&self) -> Result<(StatePair, Vec<DivergenceReport>)> {
        match self {
            DatumSpec::OrszagTang { beta } => Ok((make_orszag_tang(*beta), Vec::new())),
            DatumSpec::Abc { a, b, c, d } => Ok((make_abc(*a, *b, *c, *d), Vec::new())),
            DatumSpec::File { path } => load_datum(Path::new(path)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DatumFile {
    #[serde(default)]
    dim: Option<usize>,
    u: Vec<CoeffRecord>,
    b: Vec<CoeffRecord>,
}

/// Writes a state pair in the spectral JSON format.
pub fn save_datum(pair: &StatePair, path: &Path) -> Result<()> {
    let rec = pair.to_record();
    let file = DatumFile {
        dim: Some(pair.dim()),
        u: rec.u,
        b: rec.b,
    };
    let json = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, json)?;
    Ok(())
}

/// Reads and validates a state pair: rejects zero modes and inconsistent
/// ±pairs, Leray-projects everything, and reports divergence violations
/// beyond the projection tolerance.
pub fn load_datum(path: &Path) -> Result<(StatePair, Vec<DivergenceReport>)> {
    let text = std::fs::read_to_string(path)?;
    let file: DatumFile = serde_json::from_str(&text)
        .map_err(|e| Error::Datum(format!("{}: {e}", path.display())))?;
    let dim = match file.dim {
        Some(d) => d,
        None => file
            .u
            .first()
            .or_else(|| file.b.first())
            .map(|r| r.k.len())
            .ok_or_else(|| Error::Datum("empty datum with no dim field".into()))?,
    };
    let (u, mut warns) = SpectralField::from_records(dim, &file.u)?;
    let (b, warns_b) = SpectralField::from_records(dim, &file.b)?;
    warns.extend(warns_b);
    Ok((StatePair::new(u, b)?, warns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::Mode;

    #[test]
    fn abc_norm_matches_closed_form() {
        let pair = make_abc(1.0, 1.0, 1.0, 1.0);
        let n3 = pair.pair_norm(3.0);
        assert!((n3 - 41.6695).abs() < 1e-3, "got {n3}");
        assert!((n3 - abc_norm3(1.0, 1.0, 1.0, 1.0)).abs() <= 1e-12 * n3);
    }

    #[test]
    fn abc_generic_parameters() {
        let (a, b, c, d) = (0.7, -1.3, 2.1, 0.4);
        let pair = make_abc(a, b, c, d);
        let n3 = pair.pair_norm(3.0);
        assert!((n3 - abc_norm3(a, b, c, d)).abs() <= 1e-12 * n3);
    }

    #[test]
    fn abc_zero_magnetic() {
        let pair = make_abc(1.0, 2.0, 3.0, 0.0);
        assert!(pair.b.is_zero());
    }

    #[test]
    fn orszag_tang_norms() {
        // β = 0: magnetic part vanishes and ‖u0‖_3 = 2 (2π)^{3/2}
        let pair = make_orszag_tang(0.0);
        assert!(pair.b.is_zero());
        let expected = 2.0 * (2.0 * std::f64::consts::PI).powf(1.5);
        assert!((pair.pair_norm(3.0) - expected).abs() <= 1e-12 * expected);

        // β = 1: (2π)^{3/2} sqrt(136)
        let pair = make_orszag_tang(1.0);
        let expected = (2.0 * std::f64::consts::PI).powf(1.5) * 136f64.sqrt();
        assert!((pair.pair_norm(3.0) - expected).abs() <= 1e-12 * expected);
        assert!((pair.pair_norm(3.0) - orszag_tang_norm3(1.0)).abs() <= 1e-12 * expected);
    }

    #[test]
    fn named_data_are_solenoidal() {
        for pair in [make_abc(1.0, 1.0, 1.0, 1.0), make_orszag_tang(0.8)] {
            assert!(pair.u.max_divergence() <= 1e-15);
            assert!(pair.b.max_divergence() <= 1e-15);
        }
    }

    #[test]
    fn datum_file_roundtrip() {
        let dir = std::env::temp_dir().join("mhd_core_datum_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("abc.json");
        let pair = make_abc(1.0, 1.0, 1.0, 1.0);
        save_datum(&pair, &path).unwrap();
        let (loaded, warns) = load_datum(&path).unwrap();
        assert!(warns.is_empty());
        for (k, c) in pair.u.iter_canonical() {
            let lc = loaded.u.coeff(k);
            for (a, b) in c.iter().zip(&lc) {
                assert!((a - b).norm() <= 1e-15);
            }
        }
        let diff = pair.sub(&loaded).unwrap();
        assert!(diff.pair_norm(3.0) <= 1e-15 * pair.pair_norm(3.0));
    }

    #[test]
    fn loading_non_solenoidal_data_warns_and_projects() {
        let dir = std::env::temp_dir().join("mhd_core_datum_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("nonsolenoidal.json");
        let file = r#"{"dim":3,"u":[{"k":[1,0,0],"re":[1.0,1.0,0.0],"im":[0.0,0.0,0.0]}],"b":[]}"#;
        std::fs::write(&path, file).unwrap();
        let (pair, warns) = load_datum(&path).unwrap();
        assert_eq!(warns.len(), 1);
        assert!(warns[0].relative_violation > 0.5);
        // the stored coefficient agrees with a direct Leray projection
        let c = pair.u.coeff(&Mode::new(vec![1, 0, 0]).unwrap());
        assert!(c[0].norm() < 1e-15);
        assert!((c[1].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_mode_entry_rejected() {
        let dir = std::env::temp_dir().join("mhd_core_datum_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("zeromode.json");
        let file = r#"{"dim":3,"u":[{"k":[0,0,0],"re":[1.0,0.0,0.0],"im":[0.0,0.0,0.0]}],"b":[]}"#;
        std::fs::write(&path, file).unwrap();
        assert!(load_datum(&path).is_err());
    }

    #[test]
    fn datum_spec_parsing() {
        assert_eq!(
            DatumSpec::parse("abc:1,1,1,1").unwrap(),
            DatumSpec::Abc {
                a: 1.0,
                b: 1.0,
                c: 1.0,
                d: 1.0
            }
        );
        assert_eq!(
            DatumSpec::parse("ot:0.5").unwrap(),
            DatumSpec::OrszagTang { beta: 0.5 }
        );
        assert!(DatumSpec::parse("abc:1,2").is_err());
        assert!(DatumSpec::parse("nope").is_err());
    }
}
