//! Cubic spline interpolation for sampled scalar curves.
//!
//! Not-a-knot boundary conditions: the interpolant is the classical C²
//! piecewise cubic through the samples, exact for cubic polynomials and
//! fourth-order accurate up to the endpoints (natural boundaries would lose
//! two orders there, which matters because the control equations read the
//! estimator curves right from t = 0).

/// C² cubic spline through strictly increasing knots.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    t: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    /// Needs at least two knots; two knots give a line, three the parabola.
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(t.len(), y.len());
        assert!(t.len() >= 2, "spline needs at least two knots");
        for w in t.windows(2) {
            assert!(w[1] > w[0], "knots must be strictly increasing");
        }
        let n = t.len();
        let m = match n {
            2 => vec![0.0; 2],
            3 => {
                // the unique parabola through three points
                let f01 = (y[1] - y[0]) / (t[1] - t[0]);
                let f12 = (y[2] - y[1]) / (t[2] - t[1]);
                let m_all = 2.0 * (f12 - f01) / (t[2] - t[0]);
                vec![m_all; 3]
            }
            _ => solve_not_a_knot(&t, &y),
        };
        CubicSpline { t, y, m }
    }

    pub fn t_start(&self) -> f64 {
        self.t[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.t, &self.y)
    }

    /// Evaluates the spline; arguments outside the knot range clamp to it.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(self.t[0], *self.t.last().unwrap());
        let i = match self.t.partition_point(|&x| x <= t) {
            0 => 0,
            i => i - 1,
        };
        let i = i.min(self.t.len() - 2);
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - t) / h;
        let b = (t - self.t[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    /// Maximum of the spline over `[a, b]`, by dense sampling.
    pub fn max_on(&self, a: f64, b: f64, samples: usize) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..=samples {
            let t = a + (b - a) * i as f64 / samples as f64;
            best = best.max(self.eval(t));
        }
        best
    }
}

/// Second derivatives for the not-a-knot spline, n >= 4.
///
/// The boundary conditions pin the third derivative across the first and
/// last interior knots, i.e. `M0` and `M_{n-1}` are linear extrapolations of
/// their neighbours; eliminating them leaves a tridiagonal system for
/// `M_1 .. M_{n-2}`.
fn solve_not_a_knot(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    let nu = n - 2; // unknowns M_1 .. M_{n-2}
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let slope: Vec<f64> = y
        .windows(2)
        .zip(&h)
        .map(|(w, &hi)| (w[1] - w[0]) / hi)
        .collect();

    let mut lower = vec![0.0; nu];
    let mut diag = vec![0.0; nu];
    let mut upper = vec![0.0; nu];
    let mut rhs = vec![0.0; nu];
    for j in 0..nu {
        let i = j + 1; // knot index
        rhs[j] = 6.0 * (slope[i] - slope[i - 1]);
        lower[j] = h[i - 1];
        diag[j] = 2.0 * (h[i - 1] + h[i]);
        upper[j] = h[i];
    }
    // M0 = ((h0 + h1) M1 - h0 M2) / h1 substituted into the first row
    diag[0] = (h[0] + h[1]) * (h[0] + 2.0 * h[1]) / h[1];
    upper[0] = (h[1] * h[1] - h[0] * h[0]) / h[1];
    // M_{n-1} = ((h_{n-3} + h_{n-2}) M_{n-2} - h_{n-2} M_{n-3}) / h_{n-3}
    let a = h[n - 3];
    let b = h[n - 2];
    diag[nu - 1] = (a + b) * (2.0 * a + b) / a;
    lower[nu - 1] = (a * a - b * b) / a;

    // Thomas algorithm
    for j in 1..nu {
        let w = lower[j] / diag[j - 1];
        diag[j] -= w * upper[j - 1];
        rhs[j] -= w * rhs[j - 1];
    }
    let mut mi = vec![0.0; nu];
    mi[nu - 1] = rhs[nu - 1] / diag[nu - 1];
    for j in (0..nu - 1).rev() {
        mi[j] = (rhs[j] - upper[j] * mi[j + 1]) / diag[j];
    }

    let mut m = vec![0.0; n];
    m[1..=nu].copy_from_slice(&mi);
    m[0] = ((h[0] + h[1]) * m[1] - h[0] * m[2]) / h[1];
    m[n - 1] = ((a + b) * m[n - 2] - b * m[n - 3]) / a;
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_knots_exactly() {
        let t = vec![0.0, 0.5, 1.2, 2.0, 2.3];
        let y = vec![1.0, -0.3, 0.7, 2.5, 2.0];
        let s = CubicSpline::new(t.clone(), y.clone());
        for (a, b) in t.iter().zip(&y) {
            assert!((s.eval(*a) - b).abs() < 1e-13);
        }
    }

    #[test]
    fn reproduces_cubics_exactly() {
        // not-a-knot is exact on cubic polynomials
        let f = |x: f64| 0.5 * x * x * x - 2.0 * x * x + x - 3.0;
        let t: Vec<f64> = (0..=10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = t.iter().map(|&x| f(x)).collect();
        let s = CubicSpline::new(t, y);
        for i in 0..=60 {
            let x = i as f64 * 0.05;
            assert!((s.eval(x) - f(x)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn reproduces_parabola_with_three_knots() {
        let f = |x: f64| 2.0 * x * x - x + 1.0;
        let s = CubicSpline::new(vec![0.0, 1.0, 3.0], vec![f(0.0), f(1.0), f(3.0)]);
        for i in 0..=30 {
            let x = i as f64 * 0.1;
            assert!((s.eval(x) - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn approximates_smooth_curves() {
        let t: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = t.iter().map(|&x| (3.0 * x).sin()).collect();
        let s = CubicSpline::new(t, y);
        for i in 0..=200 {
            let x = i as f64 * 0.01;
            assert!(
                (s.eval(x) - (3.0 * x).sin()).abs() < 1e-5,
                "x = {x}: {}",
                (s.eval(x) - (3.0 * x).sin()).abs()
            );
        }
    }

    #[test]
    fn clamps_outside_range() {
        let s = CubicSpline::new(vec![0.0, 1.0], vec![2.0, 3.0]);
        assert_eq!(s.eval(-1.0), 2.0);
        assert_eq!(s.eval(5.0), 3.0);
    }
}
