//! Embedded Dormand-Prince 5(4) integrator with fourth-order dense output.
//!
//! The solver is deliberately small: explicit, FSAL, PI-free step control
//! with the usual safety clamps, and the classical continuous extension
//! stored per accepted step so any interior time can be queried afterwards.
//! A stop threshold on one state component supports blow-up detection in the
//! control equations: the crossing time is bracketed inside the step by
//! bisection on the dense output.

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
// b - b_hat, the embedded 4th-order error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// dense output weights
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Stop early once `y[component] >= threshold` (crossing time bisected).
    pub stop_above: Option<(usize, f64)>,
    /// Treat a step-size underflow as a stop at the current time instead of
    /// an error (used for blow-up detection, where the underflow marks the
    /// asymptote itself).
    pub stop_on_underflow: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-12,
            max_steps: 10_000_000,
            stop_above: None,
            stop_on_underflow: false,
        }
    }
}

/// One accepted step with its quartic interpolation coefficients.
#[derive(Clone, Debug)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    /// 5 coefficients per component, laid out [c0, c1, c2, c3, c4] * dim.
    cont: Vec<f64>,
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let theta = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - theta;
        for (i, o) in out.iter_mut().enumerate() {
            let c = &self.cont[5 * i..5 * i + 5];
            *o = c[0] + theta * (c[1] + th1 * (c[2] + theta * (c[3] + th1 * c[4])));
        }
    }
}

/// The full solution: accepted nodes plus dense output over `[t0, t_end]`.
#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub segments: Vec<DenseSegment>,
    pub y_end: Vec<f64>,
    /// Set when a stop threshold fired before the requested final time.
    pub stopped_at: Option<f64>,
    pub n_steps: usize,
    pub n_evals: usize,
}

impl OdeSolution {
    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn dim(&self) -> usize {
        self.y_end.len()
    }

    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let t0 = self.t_start();
        let t1 = self.t_end();
        // tolerate endpoint rounding
        let slack = 1e-12 * (1.0 + t1.abs());
        if t < t0 - slack || t > t1 + slack {
            return Err(Error::TimeOutOfRange { t, t_final: t1 });
        }
        if self.segments.is_empty() {
            out.copy_from_slice(&self.y_end);
            return Ok(());
        }
        let idx = match self
            .segments
            .binary_search_by(|s| s.t0.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        self.segments[idx].eval_into(t, out);
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }
}

struct Work {
    k: [Vec<f64>; 7],
    y_stage: Vec<f64>,
    y_new: Vec<f64>,
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t_end > t0`.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    t_end: f64,
    y0: &[f64],
    opts: &OdeOptions,
) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    assert!(t_end > t0, "integration interval must be nonempty");
    let dim = y0.len();
    let mut w = Work {
        k: std::array::from_fn(|_| vec![0.0; dim]),
        y_stage: vec![0.0; dim],
        y_new: vec![0.0; dim],
    };
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut n_evals = 0usize;
    let mut n_steps = 0usize;

    f(t, &y, &mut w.k[0]);
    n_evals += 1;

    let k0 = w.k[0].clone();
    let mut h = initial_step(&mut f, t0, t_end, &y, &k0, opts, &mut n_evals);
    let mut sol = OdeSolution {
        times: vec![t0],
        segments: Vec::new(),
        y_end: y.clone(),
        stopped_at: None,
        n_steps: 0,
        n_evals: 0,
    };
    let mut rejected = false;

    loop {
        if t >= t_end {
            break;
        }
        if n_steps >= opts.max_steps {
            return Err(Error::MaxSteps {
                t,
                max_steps: opts.max_steps,
            });
        }
        let h_min = 1e-14 * (1.0 + t.abs());
        if h < h_min {
            if opts.stop_on_underflow {
                sol.stopped_at = Some(t);
                break;
            }
            return Err(Error::StepUnderflow { t });
        }
        let mut last = false;
        if t + h >= t_end {
            h = t_end - t;
            last = true;
        }

        step_stages(&mut f, t, h, &y, &mut w);
        n_evals += 6;
        n_steps += 1;

        // error estimate against the embedded 4th-order result
        let mut err_sq = 0.0;
        for i in 0..dim {
            let e = h
                * (E1 * w.k[0][i]
                    + E3 * w.k[2][i]
                    + E4 * w.k[3][i]
                    + E5 * w.k[4][i]
                    + E6 * w.k[5][i]
                    + E7 * w.k[6][i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(w.y_new[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / dim as f64).sqrt();

        if err <= 1.0 {
            // accept: store the dense segment, advance (FSAL: k7 is the new k1)
            sol.segments.push(make_dense(&y, h, t, &w));
            y.copy_from_slice(&w.y_new);
            let k6 = w.k[6].clone();
            w.k[0].copy_from_slice(&k6);
            t += h;
            sol.times.push(t);

            if let Some((comp, threshold)) = opts.stop_above {
                if y[comp] >= threshold {
                    let seg = sol.segments.last().unwrap();
                    let t_cross = bisect_crossing(seg, comp, threshold, dim);
                    sol.stopped_at = Some(t_cross);
                    // clip the final node to the crossing
                    *sol.times.last_mut().unwrap() = t_cross;
                    let mut yc = vec![0.0; dim];
                    seg.eval_into(t_cross, &mut yc);
                    y = yc;
                    break;
                }
            }

            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, if rejected { 1.0 } else { 5.0 })
            };
            rejected = false;
            if !last {
                h *= fac;
            } else if t < t_end {
                h = (t_end - t).max(h * fac);
            }
        } else {
            rejected = true;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0).min(0.9);
        }
    }

    sol.y_end = y;
    sol.n_steps = n_steps;
    sol.n_evals = n_evals;
    Ok(sol)
}

fn step_stages<F>(f: &mut F, t: f64, h: f64, y: &[f64], w: &mut Work)
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let dim = y.len();
    for i in 0..dim {
        w.y_stage[i] = y[i] + h * A21 * w.k[0][i];
    }
    f(t + C2 * h, &w.y_stage, &mut w.k[1]);
    for i in 0..dim {
        w.y_stage[i] = y[i] + h * (A31 * w.k[0][i] + A32 * w.k[1][i]);
    }
    f(t + C3 * h, &w.y_stage, &mut w.k[2]);
    for i in 0..dim {
        w.y_stage[i] = y[i] + h * (A41 * w.k[0][i] + A42 * w.k[1][i] + A43 * w.k[2][i]);
    }
    f(t + C4 * h, &w.y_stage, &mut w.k[3]);
    for i in 0..dim {
        w.y_stage[i] = y[i]
            + h * (A51 * w.k[0][i] + A52 * w.k[1][i] + A53 * w.k[2][i] + A54 * w.k[3][i]);
    }
    f(t + C5 * h, &w.y_stage, &mut w.k[4]);
    for i in 0..dim {
        w.y_stage[i] = y[i]
            + h * (A61 * w.k[0][i]
                + A62 * w.k[1][i]
                + A63 * w.k[2][i]
                + A64 * w.k[3][i]
                + A65 * w.k[4][i]);
    }
    f(t + h, &w.y_stage, &mut w.k[5]);
    for i in 0..dim {
        w.y_new[i] = y[i]
            + h * (B1 * w.k[0][i]
                + B3 * w.k[2][i]
                + B4 * w.k[3][i]
                + B5 * w.k[4][i]
                + B6 * w.k[5][i]);
    }
    f(t + h, &w.y_new, &mut w.k[6]);
}

fn make_dense(y: &[f64], h: f64, t: f64, w: &Work) -> DenseSegment {
    let dim = y.len();
    let mut cont = vec![0.0; 5 * dim];
    for i in 0..dim {
        let ydiff = w.y_new[i] - y[i];
        let bspl = h * w.k[0][i] - ydiff;
        cont[5 * i] = y[i];
        cont[5 * i + 1] = ydiff;
        cont[5 * i + 2] = bspl;
        cont[5 * i + 3] = ydiff - h * w.k[6][i] - bspl;
        cont[5 * i + 4] = h
            * (D1 * w.k[0][i]
                + D3 * w.k[2][i]
                + D4 * w.k[3][i]
                + D5 * w.k[4][i]
                + D6 * w.k[5][i]
                + D7 * w.k[6][i]);
    }
    DenseSegment { t0: t, h, cont }
}

/// Locates the first time in the segment where component `comp` reaches
/// `threshold` (the segment end is known to be at or above it).
fn bisect_crossing(seg: &DenseSegment, comp: usize, threshold: f64, dim: usize) -> f64 {
    let mut buf = vec![0.0; dim];
    seg.eval_into(seg.t0, &mut buf);
    if buf[comp] >= threshold {
        return seg.t0;
    }
    let mut lo = seg.t0;
    let mut hi = seg.t1();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= f64::EPSILON * (1.0 + hi.abs()) {
            break;
        }
        seg.eval_into(mid, &mut buf);
        if buf[comp] >= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Standard starting-step heuristic from the reference DOPRI5 codes.
fn initial_step<F>(
    f: &mut F,
    t0: f64,
    t_end: f64,
    y0: &[f64],
    f0: &[f64],
    opts: &OdeOptions,
    n_evals: &mut usize,
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let dim = y0.len();
    let sc: Vec<f64> = y0
        .iter()
        .map(|&yi| opts.atol + opts.rtol * yi.abs())
        .collect();
    let d0 = (y0
        .iter()
        .zip(&sc)
        .map(|(&y, &s)| (y / s) * (y / s))
        .sum::<f64>()
        / dim as f64)
        .sqrt();
    let d1 = (f0
        .iter()
        .zip(&sc)
        .map(|(&v, &s)| (v / s) * (v / s))
        .sum::<f64>()
        / dim as f64)
        .sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(t_end - t0);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(&y, &k)| y + h0 * k).collect();
    let mut f1 = vec![0.0; dim];
    f(t0 + h0, &y1, &mut f1);
    *n_evals += 1;
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&sc)
        .map(|((&a, &b), &s)| ((a - b) / s) * ((a - b) / s))
        .sum::<f64>()
        / dim as f64)
        .sqrt()
        / h0;
    let d_max = d1.max(d2);
    let h1 = if d_max <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d_max).powf(0.2)
    };
    (100.0 * h0).min(h1).min(t_end - t0)
}
