//! Shape-preserving cubic interpolation (Fritsch–Carlson) used for the
//! cached tail tables. Tails are interpolated in log-log coordinates, so a
//! pure power law is reproduced exactly and extrapolation beyond the table
//! continues the terminal power law.

/// Monotone cubic Hermite interpolant on knots `(s[i], y[i])`, `s` strictly
/// increasing. Extrapolates linearly with the boundary slope.
#[derive(Debug, Clone)]
pub struct Pchip {
    s: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(s: Vec<f64>, y: Vec<f64>) -> Self {
        let n = s.len();
        assert!(n >= 2, "need at least two knots");
        assert!(
            s.windows(2).all(|w| w[0] < w[1]),
            "knots must be strictly increasing"
        );
        let mut d = vec![0.0; n];
        if n == 2 {
            let slope = (y[1] - y[0]) / (s[1] - s[0]);
            d[0] = slope;
            d[1] = slope;
            return Pchip { s, y, d };
        }
        let h: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        for i in 1..n - 1 {
            if del[i - 1] * del[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
            }
        }
        d[0] = edge_slope(h[0], h[1], del[0], del[1]);
        d[n - 1] = edge_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        Pchip { s, y, d }
    }

    /// Hermite evaluation; linear continuation outside the knot range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.s.len();
        if x <= self.s[0] {
            return self.y[0] + self.d[0] * (x - self.s[0]);
        }
        if x >= self.s[n - 1] {
            return self.y[n - 1] + self.d[n - 1] * (x - self.s[n - 1]);
        }
        let i = match self.s.partition_point(|&v| v <= x) {
            0 => 0,
            k => k - 1,
        };
        let h = self.s[i + 1] - self.s[i];
        let t = (x - self.s[i]) / h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i], self.d[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    }

    pub fn knots(&self) -> &[f64] {
        &self.s
    }
}

/// One-sided three-point slope estimate, clamped so monotone data stay
/// monotone (Fritsch–Carlson end condition).
fn edge_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let mut d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d * del0 <= 0.0 {
        d = 0.0;
    } else if del0 * del1 < 0.0 && d.abs() > 3.0 * del0.abs() {
        d = 3.0 * del0;
    }
    d
}

/// Positive monotone function tabulated on a log grid, interpolated as
/// `ln f` against `ln x`. Zero values are clipped to a tiny floor so the
/// log transform stays defined; `eval` returns exactly 0 past a recorded
/// hard-zero point (e.g. a tail beyond a bounded support).
#[derive(Debug, Clone)]
pub struct LogLogInterp {
    interp: Pchip,
    /// Smallest x at which the tabulated function is identically zero.
    zero_from: Option<f64>,
}

const LOG_FLOOR: f64 = -745.0; // ln of roughly the smallest positive double

impl LogLogInterp {
    /// `x` strictly increasing and positive; `f` nonnegative. Trailing zeros
    /// are recorded and reproduced exactly.
    pub fn new(x: &[f64], f: &[f64]) -> Self {
        assert_eq!(x.len(), f.len());
        assert!(x.len() >= 2, "need at least two table points");
        let mut n_pos = f.len();
        while n_pos > 0 && f[n_pos - 1] == 0.0 {
            n_pos -= 1;
        }
        let zero_from = if n_pos < f.len() { Some(x[n_pos]) } else { None };
        if n_pos < 2 {
            // identically (or all but one point) zero: a flat floor table
            let s = vec![x[0].ln(), x[1].ln()];
            let y0 = if n_pos == 1 && f[0] > 0.0 { f[0].ln() } else { LOG_FLOOR };
            return LogLogInterp {
                interp: Pchip::new(s, vec![y0, LOG_FLOOR]),
                zero_from,
            };
        }
        let s: Vec<f64> = x[..n_pos].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = f[..n_pos]
            .iter()
            .map(|v| if *v > 0.0 { v.ln() } else { LOG_FLOOR })
            .collect();
        LogLogInterp { interp: Pchip::new(s, y), zero_from }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if let Some(z) = self.zero_from {
            if x >= z {
                return 0.0;
            }
        }
        let ln = self.interp.eval(x.ln());
        if ln <= LOG_FLOOR {
            0.0
        } else {
            ln.exp()
        }
    }

    /// Invert a strictly decreasing tabulated function: find x with
    /// f(x) = target. Used by the jump sampler (inverse-tail sampling).
    pub fn invert_decreasing(&self, target: f64, x_lo: f64, x_hi: f64) -> f64 {
        let t = target.ln();
        let mut lo = x_lo.ln();
        let mut hi = x_hi.ln();
        // f decreasing => ln f decreasing in ln x: bisection on the interpolant.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.interp.eval(mid) > t {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        (0.5 * (lo + hi)).exp()
    }
}
