//! Monotone piecewise-cubic interpolation (Fritsch-Carlson) with power-law
//! extrapolation outside the table. Shared by tabulated growth functions and
//! the radial inverse-CDF tables of the sampler.

/// Monotone cubic interpolant through `(x_i, y_i)` with non-decreasing `y`.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Hermite derivatives at the nodes.
    ds: Vec<f64>,
    /// log-log slope used below the first / above the last node.
    pow_lo: f64,
    pow_hi: f64,
}

impl MonotoneCubic {
    /// Builds the interpolant. Requires strictly increasing `xs`, x ≥ 0,
    /// non-decreasing non-negative `ys` and at least two nodes.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, String> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err("need at least two (x, y) pairs".into());
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(format!("x values must be strictly increasing near {}", w[0]));
            }
        }
        for w in ys.windows(2) {
            if !(w[1] >= w[0]) {
                return Err(format!("y values must be non-decreasing near {}", w[0]));
            }
        }
        if xs[0] < 0.0 || ys[0] < 0.0 {
            return Err("table must live on [0, inf)".into());
        }
        let n = xs.len();
        let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
        let sec: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![0.0; n];
        ds[0] = sec[0];
        ds[n - 1] = sec[n - 2];
        for i in 1..n - 1 {
            if sec[i - 1] * sec[i] <= 0.0 {
                ds[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                ds[i] = (w1 + w2) / (w1 / sec[i - 1] + w2 / sec[i]);
            }
        }
        // Fritsch-Carlson limiter keeps the cubic monotone on each segment.
        for i in 0..n - 1 {
            if sec[i] == 0.0 {
                ds[i] = 0.0;
                ds[i + 1] = 0.0;
            } else {
                let a = ds[i] / sec[i];
                let b = ds[i + 1] / sec[i];
                let s = a * a + b * b;
                if s > 9.0 {
                    let tau = 3.0 / s.sqrt();
                    ds[i] = tau * a * sec[i];
                    ds[i + 1] = tau * b * sec[i];
                }
            }
        }
        let slope_of = |x0: f64, y0: f64, x1: f64, y1: f64| -> f64 {
            if x0 > 0.0 && y0 > 0.0 && y1 > y0 {
                (y1 / y0).ln() / (x1 / x0).ln()
            } else if y1 == y0 {
                0.0 // flat segment: constant continuation
            } else {
                1.0
            }
        };
        let pow_lo = slope_of(xs[0], ys[0], xs[1], ys[1]);
        let pow_hi = slope_of(xs[n - 2], ys[n - 2], xs[n - 1], ys[n - 1]);
        Ok(Self { xs, ys, ds, pow_lo, pow_hi })
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.xs.len() - 2),
        }
    }

    pub fn min_x(&self) -> f64 {
        self.xs[0]
    }

    pub fn max_x(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] {
            // Power-law decay toward zero keeps the extension monotone.
            if self.ys[0] == 0.0 || self.xs[0] == 0.0 {
                return self.ys[0];
            }
            return self.ys[0] * (x / self.xs[0]).powf(self.pow_lo.max(1e-12));
        }
        if x > self.xs[n - 1] {
            let yn = self.ys[n - 1];
            if yn == 0.0 {
                return 0.0;
            }
            return yn * (x / self.xs[n - 1]).powf(self.pow_hi);
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1, d0, d1) = (self.ys[i], self.ys[i + 1], self.ds[i], self.ds[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * h * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * h * (t3 - t2)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] {
            if self.ys[0] == 0.0 || self.xs[0] == 0.0 {
                return self.ds[0];
            }
            let g = self.pow_lo.max(1e-12);
            return self.ys[0] * g * (x / self.xs[0]).powf(g - 1.0) / self.xs[0];
        }
        if x > self.xs[n - 1] {
            let yn = self.ys[n - 1];
            if yn == 0.0 {
                return 0.0;
            }
            let xn = self.xs[n - 1];
            return yn * self.pow_hi * (x / xn).powf(self.pow_hi - 1.0) / xn;
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1, d0, d1) = (self.ys[i], self.ys[i + 1], self.ds[i], self.ds[i + 1]);
        let t2 = t * t;
        (y0 * (6.0 * t2 - 6.0 * t) / h)
            + d0 * (3.0 * t2 - 4.0 * t + 1.0)
            + (y1 * (6.0 * t - 6.0 * t2) / h)
            + d1 * (3.0 * t2 - 2.0 * t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_stays_monotone() {
        let xs: Vec<f64> = (0..40).map(|i| 0.1 * (i as f64 + 1.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let c = MonotoneCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((c.eval(*x) - y).abs() < 1e-12);
        }
        let mut prev = -1.0;
        for i in 0..4000 {
            let x = 0.001 + 4.2 * i as f64 / 3999.0;
            let v = c.eval(x);
            assert!(v >= prev - 1e-12, "not monotone at {x}");
            prev = v;
        }
    }

    #[test]
    fn quadratic_interpolation_is_accurate() {
        let xs: Vec<f64> = (0..200).map(|i| 0.05 * (i as f64 + 1.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        for i in 0..500 {
            let x = 0.3 + 9.0 * i as f64 / 499.0;
            assert!((c.eval(x) - x * x).abs() / (x * x) < 1e-3);
            assert!((c.derivative(x) - 2.0 * x).abs() / (2.0 * x) < 2e-2);
        }
    }

    #[test]
    fn power_law_extrapolation() {
        let xs: Vec<f64> = (1..=64).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.powf(1.5)).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        // Above the table the last-segment log-log slope is close to 1.5.
        let v = c.eval(1000.0);
        assert!((v / 1000f64.powf(1.5) - 1.0).abs() < 0.02, "got {v}");
        // Below the table the extension decays to zero.
        assert!(c.eval(0.01) < c.eval(1.0));
        assert!(c.eval(0.0) == 0.0 || c.eval(0.0) > 0.0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0], vec![0.0]).is_err());
    }
}
