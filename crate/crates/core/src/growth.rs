//! Growth functions Φ : [0,∞) → [0,∞) and their calculus: upper/lower types,
//! the indices a_Φ and b_Φ, the Δ₂ and ∇₂ conditions, Young conjugates and
//! compositions Φ₁∘Φ₂⁻¹.
//!
//! A growth function here is continuous, non-decreasing, surjective and has
//! Φ(0) = 0. Values may be `+∞` where a Young conjugate diverges; infinities
//! are signal values, not errors.

use crate::interp::MonotoneCubic;
use crate::{Error, Result};
use serde::Serialize;

/// Log grid used for all index/type scans.
const GRID_LO: f64 = 1e-8;
const GRID_HI: f64 = 1e8;
const GRID_N: usize = 400;

/// Numeric resolution of the grid-based indices; the ∇₂ decision uses it as
/// the strictness margin for `a_Φ > 1`.
pub const INDEX_RESOLUTION: f64 = 1e-3;

pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ConjShape {
    /// Φ′ non-decreasing: solve Φ′(t) = s and use the stationary point.
    Stationary,
    /// Φ(t)/t non-increasing: the conjugate is 0 below the slope limit and
    /// +∞ above it.
    Concave,
    /// No usable structure: brute-force sup over a refined log grid.
    GridSup,
}

#[derive(Debug, Clone)]
pub enum GrowthFamily {
    /// Φ(t) = t^p with p > 0.
    Power { p: f64 },
    /// Φ(t) = t^p · ln(e + t)^a with p > 0.
    PowerLog { p: f64, a: f64 },
    /// Tabulated samples with monotone cubic interpolation; beyond the table
    /// the last-segment power law extends the function.
    Table(MonotoneCubic),
    /// t ↦ outer(inner⁻¹(t)).
    ComposeInv {
        outer: Box<GrowthFunction>,
        inner: Box<GrowthFunction>,
    },
    /// The inverse of another growth function, viewed as a growth function.
    InverseOf(Box<GrowthFunction>),
    /// Young conjugate Ψ(s) = sup_t { ts − Φ(t) }, evaluated per point.
    Conjugate {
        base: Box<GrowthFunction>,
        /// Finite limit of Φ(t)/t at infinity, when one exists; the
        /// conjugate is +∞ strictly above it.
        finite_slope: Option<f64>,
        shape: ConjShapeTag,
    },
}

// Serde-free tag wrapper so GrowthFamily can stay Debug/Clone friendly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConjShapeTag(ConjShape);

/// A growth function with evaluation, derivative and inverse.
///
/// Values are immutable after construction and all operations are pure, so
/// sharing across threads is safe.
#[derive(Debug, Clone)]
pub struct GrowthFunction {
    family: GrowthFamily,
}

/// Outcome of [`GrowthFunction::classify`].
#[derive(Debug, Clone, Serialize)]
pub struct TypeReport {
    /// Reported lower type p (the grid-extremal index a_Φ).
    pub lower_type: f64,
    /// Reported upper type q (the grid-extremal index b_Φ).
    pub upper_type: f64,
    pub a_index: f64,
    pub b_index: f64,
    pub in_class_u: bool,
    pub in_class_l: bool,
    pub delta2: bool,
    pub nabla2: bool,
    /// sup over the grid of Φ(2t)/Φ(t).
    pub delta2_constant: f64,
    /// Empirical constant C with Φ(st) ≤ C·t^q·Φ(s) on the scan grid.
    pub upper_type_constant: f64,
    /// Empirical constant C with Φ(st) ≤ C·t^p·Φ(s) for t ≤ 1 on the scan grid.
    pub lower_type_constant: f64,
    /// Indices moved by less than `INDEX_RESOLUTION` when the grid doubled.
    pub index_grid_stable: bool,
    pub witness_grid: Vec<f64>,
}

impl GrowthFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Domain(format!("power exponent must be positive, got {p}")));
        }
        Ok(Self { family: GrowthFamily::Power { p } })
    }

    pub fn power_log(p: f64, a: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() || !a.is_finite() {
            return Err(Error::Domain(format!(
                "power-log parameters must be finite with p > 0, got p={p} a={a}"
            )));
        }
        let cand = Self { family: GrowthFamily::PowerLog { p, a } };
        // Negative log exponents can break monotonicity; check on the grid.
        if a < 0.0 {
            let mut prev = 0.0;
            for t in log_grid(GRID_LO, GRID_HI, 200) {
                let v = cand.apply(t);
                if v < prev * (1.0 - 1e-12) {
                    return Err(Error::Degenerate(format!(
                        "t^{p} ln(e+t)^{a} is not non-decreasing (drops near t={t})"
                    )));
                }
                prev = v;
            }
        }
        Ok(cand)
    }

    /// Builds a tabulated growth function from `(t, Φ(t))` samples.
    pub fn from_table(points: &[(f64, f64)]) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = points.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let cubic = MonotoneCubic::new(xs, ys).map_err(Error::Degenerate)?;
        let f = Self { family: GrowthFamily::Table(cubic) };
        // Surjectivity: Φ must keep growing along t = 10^k.
        let mut prev = f.apply(1.0);
        let mut grew = false;
        for k in 1..=8 {
            let v = f.apply(10f64.powi(k));
            if v > prev * (1.0 + 1e-9) {
                grew = true;
            }
            prev = v;
        }
        if !grew || !prev.is_finite() {
            return Err(Error::Degenerate(
                "table does not grow to infinity (flat tail)".into(),
            ));
        }
        if f.apply(0.0) != 0.0 {
            return Err(Error::Degenerate("table must have Φ(0) = 0".into()));
        }
        Ok(f)
    }

    /// The inverse viewed as a growth function in its own right.
    pub fn inverse_function(&self) -> Self {
        Self { family: GrowthFamily::InverseOf(Box::new(self.clone())) }
    }

    /// Checked evaluation: Φ(t) for t ≥ 0.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::Domain(format!("growth functions live on [0, ∞), got t={t}")));
        }
        Ok(self.apply(t))
    }

    /// Unchecked evaluation used in hot loops; the argument must be ≥ 0.
    pub fn apply(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match &self.family {
            GrowthFamily::Power { p } => t.powf(*p),
            GrowthFamily::PowerLog { p, a } => {
                if t == 0.0 {
                    return 0.0;
                }
                t.powf(*p) * (std::f64::consts::E + t).ln().powf(*a)
            }
            GrowthFamily::Table(c) => c.eval(t).max(0.0),
            GrowthFamily::ComposeInv { outer, inner } => outer.apply(inner.inv_raw(t)),
            GrowthFamily::InverseOf(base) => base.inv_raw(t),
            GrowthFamily::Conjugate { base, finite_slope, shape } => {
                conjugate_value(base, *finite_slope, shape.0, t).0
            }
        }
    }

    /// Derivative Φ′(t); numeric for tabulated families.
    pub fn derivative(&self, t: f64) -> f64 {
        match &self.family {
            GrowthFamily::Power { p } => p * t.powf(p - 1.0),
            GrowthFamily::PowerLog { p, a } => {
                if t == 0.0 {
                    return if *p < 1.0 {
                        f64::INFINITY
                    } else if *p == 1.0 {
                        1.0
                    } else {
                        0.0
                    };
                }
                let l = (std::f64::consts::E + t).ln();
                t.powf(p - 1.0) * l.powf(a - 1.0) * (p * l + a * t / (std::f64::consts::E + t))
            }
            GrowthFamily::Table(c) => c.derivative(t).max(0.0),
            GrowthFamily::ComposeInv { outer, inner } => {
                let u = inner.inv_raw(t);
                let di = inner.derivative(u);
                if di > 0.0 && di.is_finite() {
                    outer.derivative(u) / di
                } else {
                    // Flat inner derivative: fall back to a centred difference.
                    let h = (t * 1e-6).max(1e-12);
                    (self.apply(t + h) - self.apply((t - h).max(0.0))) / (2.0 * h)
                }
            }
            GrowthFamily::InverseOf(base) => {
                let u = base.inv_raw(t);
                let d = base.derivative(u);
                if d > 0.0 && d.is_finite() {
                    1.0 / d
                } else {
                    let h = (t * 1e-6).max(1e-12);
                    (self.apply(t + h) - self.apply((t - h).max(0.0))) / (2.0 * h)
                }
            }
            GrowthFamily::Conjugate { base, finite_slope, shape } => {
                // Envelope theorem: Ψ′(s) is the maximizing t.
                conjugate_value(base, *finite_slope, shape.0, t).1
            }
        }
    }

    /// Checked inverse: the smallest t with Φ(t) ≥ s, bisected to relative
    /// tolerance ~1e-12.
    pub fn inverse(&self, s: f64) -> Result<f64> {
        if s < 0.0 || s.is_nan() {
            return Err(Error::Domain(format!("inverse argument must be ≥ 0, got {s}")));
        }
        let v = self.inv_raw(s);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::BracketDiverged { what: "growth-function inverse", attempts: 200 })
        }
    }

    /// Inverse without the error plumbing; +∞ signals bracket failure.
    pub(crate) fn inv_raw(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match &self.family {
            GrowthFamily::Power { p } => s.powf(1.0 / p),
            GrowthFamily::ComposeInv { outer, inner } => inner.apply(outer.inv_raw(s)),
            GrowthFamily::InverseOf(base) => base.apply(s),
            _ => self.bisect_inverse(s),
        }
    }

    fn bisect_inverse(&self, s: f64) -> f64 {
        let mut lo = 1.0f64;
        let mut n = 0u32;
        while self.apply(lo) > s {
            lo *= 0.1;
            n += 1;
            if n > 200 {
                return 0.0;
            }
        }
        let mut hi = lo.max(1.0);
        n = 0;
        while self.apply(hi) < s {
            hi *= 10.0;
            n += 1;
            if n > 200 {
                return f64::INFINITY;
            }
        }
        // Geometric bisection keeps relative accuracy uniform across scales.
        for _ in 0..160 {
            if hi - lo <= 1e-13 * hi + 1e-300 {
                break;
            }
            let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
            if self.apply(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// The lower and upper indices (a_Φ, b_Φ) = (inf, sup) of tΦ′(t)/Φ(t)
    /// over the standard log grid.
    pub fn indices(&self) -> Result<(f64, f64)> {
        self.indices_on(&log_grid(GRID_LO, GRID_HI, GRID_N))
    }

    fn indices_on(&self, grid: &[f64]) -> Result<(f64, f64)> {
        let mut a = f64::INFINITY;
        let mut b = f64::NEG_INFINITY;
        for &t in grid {
            let phi = self.apply(t);
            if phi <= 0.0 || !phi.is_finite() {
                return Err(Error::Degenerate(format!(
                    "Φ(t) = {phi} at grid point t = {t}; indices undefined"
                )));
            }
            let r = t * self.derivative(t) / phi;
            if !r.is_finite() {
                return Err(Error::Degenerate(format!("index ratio non-finite at t = {t}")));
            }
            a = a.min(r);
            b = b.max(r);
        }
        Ok((a, b))
    }

    /// Full class/type report.
    pub fn classify(&self) -> Result<TypeReport> {
        let grid = log_grid(GRID_LO, GRID_HI, GRID_N);
        let (a, b) = self.indices_on(&grid)?;
        let dense = log_grid(GRID_LO, GRID_HI, 2 * GRID_N);
        let (a2, b2) = self.indices_on(&dense)?;
        let index_grid_stable =
            (a - a2).abs() <= INDEX_RESOLUTION && (b - b2).abs() <= INDEX_RESOLUTION;

        // Δ₂: sup of Φ(2t)/Φ(t), required finite and stable when the grid
        // range extends by two decades on each side.
        let ratio2 = |g: &[f64]| -> f64 {
            g.iter().map(|&t| self.apply(2.0 * t) / self.apply(t)).fold(0.0, f64::max)
        };
        let k_base = ratio2(&grid);
        let k_ext = ratio2(&log_grid(GRID_LO * 1e-2, GRID_HI * 1e2, GRID_N + 100));
        let delta2 = k_base.is_finite() && k_ext <= k_base * 1.01;

        // Monotonicity of Φ(t)/t decides the U/L classes.
        let mut nondec = true;
        let mut noninc = true;
        let mut prev = self.apply(grid[0]) / grid[0];
        for &t in &grid[1..] {
            let q = self.apply(t) / t;
            if q < prev * (1.0 - 1e-10) {
                nondec = false;
            }
            if q > prev * (1.0 + 1e-10) {
                noninc = false;
            }
            prev = q;
        }
        let in_class_u = nondec && b.is_finite() && index_grid_stable;
        let in_class_l = noninc && a > 0.0 && index_grid_stable;

        // For convex Φ the ∇₂-condition is the index criterion 1 < a ≤ b < ∞.
        let nabla2 = delta2 && a > 1.0 + INDEX_RESOLUTION && b.is_finite();

        // Empirical type constants on an (s, t) scan.
        let s_grid = log_grid(1e-6, 10.0, 40);
        let t_up = log_grid(1.0, 100.0, 30);
        let t_dn = log_grid(1e-4, 1.0, 30);
        let mut c_up = 0.0f64;
        let mut c_dn = 0.0f64;
        for &s in &s_grid {
            let phis = self.apply(s);
            if phis <= 0.0 {
                continue;
            }
            for &t in &t_up {
                c_up = c_up.max(self.apply(s * t) / (t.powf(b) * phis));
            }
            for &t in &t_dn {
                c_dn = c_dn.max(self.apply(s * t) / (t.powf(a) * phis));
            }
        }

        Ok(TypeReport {
            lower_type: a,
            upper_type: b,
            a_index: a,
            b_index: b,
            in_class_u,
            in_class_l,
            delta2,
            nabla2,
            delta2_constant: k_base,
            upper_type_constant: c_up,
            lower_type_constant: c_dn,
            index_grid_stable,
            witness_grid: grid,
        })
    }

    /// p_Φ: 1 for Φ ∈ 𝒰, the lower type for Φ ∈ 𝓛.
    pub fn p_of_phi(&self) -> Result<f64> {
        let rep = self.classify()?;
        if rep.in_class_u {
            Ok(1.0)
        } else if rep.in_class_l {
            Ok(rep.lower_type)
        } else {
            Err(Error::Unclassifiable)
        }
    }

    /// Young conjugate Ψ(s) = sup_{t ≥ 0} { ts − Φ(t) }.
    ///
    /// Where the sup diverges (e.g. concave Φ and s above the slope limit)
    /// the returned function evaluates to +∞ instead of erroring.
    pub fn complementary(&self) -> Result<Self> {
        // Shape detection on a coarse grid.
        let grid = log_grid(GRID_LO, GRID_HI, 120);
        let mut deriv_nondec = true;
        let mut prevd = -f64::INFINITY;
        for &t in &grid {
            let d = self.derivative(t);
            if !d.is_finite() && t > GRID_LO {
                deriv_nondec = false;
                break;
            }
            if d < prevd * (1.0 - 1e-9) - 1e-300 {
                deriv_nondec = false;
            }
            prevd = d;
        }
        let mut slope_noninc = true;
        let mut prevs = f64::INFINITY;
        for &t in &grid {
            let q = self.apply(t) / t;
            if q > prevs * (1.0 + 1e-10) {
                slope_noninc = false;
            }
            prevs = q;
        }
        let shape = if deriv_nondec {
            ConjShape::Stationary
        } else if slope_noninc {
            ConjShape::Concave
        } else {
            ConjShape::GridSup
        };

        // Tail test for a finite slope limit of Φ(t)/t.
        let s_mid = self.apply(1e4) / 1e4;
        let s_hi = self.apply(GRID_HI) / GRID_HI;
        let finite_slope = if s_hi > s_mid * (1.0 + 1e-9) {
            None // slope still growing: conjugate finite everywhere
        } else if s_hi >= 0.99 * s_mid {
            Some(s_hi) // slope converged
        } else {
            Some(0.0) // slope decaying to zero: conjugate infinite for s > 0
        };

        Ok(Self {
            family: GrowthFamily::Conjugate {
                base: Box::new(self.clone()),
                finite_slope,
                shape: ConjShapeTag(shape),
            },
        })
    }

    /// t ↦ Φ₁(Φ₂⁻¹(t)) where `self` is Φ₁ and `inner` is Φ₂.
    /// Power/Power pairs compose exactly to `Power(p₁/p₂)`.
    pub fn compose_with_inverse(&self, inner: &Self) -> Self {
        if let (GrowthFamily::Power { p: p1 }, GrowthFamily::Power { p: p2 }) =
            (&self.family, &inner.family)
        {
            return Self { family: GrowthFamily::Power { p: p1 / p2 } };
        }
        Self {
            family: GrowthFamily::ComposeInv {
                outer: Box::new(self.clone()),
                inner: Box::new(inner.clone()),
            },
        }
    }

    /// Exact power exponent when the family is a pure power.
    pub fn as_power(&self) -> Option<f64> {
        match self.family {
            GrowthFamily::Power { p } => Some(p),
            _ => None,
        }
    }

    pub fn family(&self) -> &GrowthFamily {
        &self.family
    }
}

/// Computes (Ψ(s), argmax t) for the conjugate.
fn conjugate_value(
    base: &GrowthFunction,
    finite_slope: Option<f64>,
    shape: ConjShape,
    s: f64,
) -> (f64, f64) {
    if s == 0.0 {
        return (0.0, 0.0);
    }
    if let Some(limit) = finite_slope {
        if s > limit * (1.0 + 1e-12) {
            return (f64::INFINITY, f64::INFINITY);
        }
    }
    match shape {
        ConjShape::Concave => (0.0, 0.0),
        ConjShape::Stationary => {
            // Solve Φ′(t) = s by monotone bisection with a geometric bracket.
            let mut hi = 1.0f64;
            let mut n = 0;
            while base.derivative(hi) < s {
                hi *= 4.0;
                n += 1;
                if n > 300 {
                    return (f64::INFINITY, f64::INFINITY);
                }
            }
            let mut lo = hi;
            n = 0;
            while base.derivative(lo) > s {
                lo *= 0.25;
                n += 1;
                if n > 300 {
                    lo = 0.0;
                    break;
                }
            }
            for _ in 0..110 {
                if hi - lo <= 1e-14 * hi.max(1e-300) {
                    break;
                }
                let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
                if base.derivative(mid) < s {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = 0.5 * (lo + hi);
            ((t * s - base.apply(t)).max(0.0), t)
        }
        ConjShape::GridSup => {
            let mut best = 0.0f64;
            let mut best_t = 0.0f64;
            let scan = |grid: &[f64], best: &mut f64, best_t: &mut f64| {
                for &t in grid {
                    let v = t * s - base.apply(t);
                    if v > *best {
                        *best = v;
                        *best_t = t;
                    }
                }
            };
            let g0 = log_grid(GRID_LO, GRID_HI, GRID_N);
            scan(&g0, &mut best, &mut best_t);
            // Refine twice around the argmax.
            let mut width = (GRID_HI / GRID_LO).powf(1.0 / (GRID_N - 1) as f64);
            for _ in 0..2 {
                if best_t == 0.0 {
                    break;
                }
                let g = log_grid(best_t / width, best_t * width, 60);
                scan(&g, &mut best, &mut best_t);
                width = width.powf(0.05);
            }
            (best.max(0.0), best_t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn power_eval_and_zero() {
        let phi = GrowthFunction::power(2.0).unwrap();
        assert_eq!(phi.eval(3.0).unwrap(), 9.0);
        assert_eq!(phi.eval(0.0).unwrap(), 0.0);
        assert!(phi.eval(-1.0).is_err());
        let pl = GrowthFunction::power_log(1.0, 1.0).unwrap();
        assert_eq!(pl.eval(0.0).unwrap(), 0.0);
        let mut prev = -1.0;
        for i in 0..=100 {
            let v = pl.apply(0.1 * i as f64);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn inverse_round_trips() {
        let phi = GrowthFunction::power(2.0).unwrap();
        assert_abs_diff_eq!(phi.inverse(9.0).unwrap(), 3.0, epsilon = 1e-12);
        assert_eq!(phi.inverse(0.0).unwrap(), 0.0);

        let pl = GrowthFunction::power_log(2.0, 1.0).unwrap();
        // Independently computed: Φ(5) = 25·ln(e+5) = 51.089794454646441.
        let s = pl.eval(5.0).unwrap();
        assert_relative_eq!(s, 51.089794454646441, max_relative = 1e-13);
        assert_abs_diff_eq!(pl.inverse(s).unwrap(), 5.0, epsilon = 1e-8);

        for f in [
            GrowthFunction::power(0.5).unwrap(),
            GrowthFunction::power_log(3.0, -0.5).unwrap(),
            GrowthFunction::power_log(1.0, 2.0).unwrap(),
        ] {
            for s in log_grid(1e-6, 1e6, 25) {
                let t = f.inverse(s).unwrap();
                assert_relative_eq!(f.apply(t), s, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn power_indices_are_exact() {
        for p in [0.5, 1.0, 2.0, 3.7] {
            let (a, b) = GrowthFunction::power(p).unwrap().indices().unwrap();
            assert_relative_eq!(a, p, max_relative = 1e-9);
            assert_relative_eq!(b, p, max_relative = 1e-9);
        }
    }

    #[test]
    fn powerlog_indices_match_dense_grid_oracle() {
        // Oracle (10^4-point grid + stationary refinement, computed
        // independently): a = 1.00000000368, b = 1.3178444329.
        let (a, b) = GrowthFunction::power_log(1.0, 1.0).unwrap().indices().unwrap();
        assert_abs_diff_eq!(a, 1.00000000368, epsilon = 1e-6);
        assert_abs_diff_eq!(b, 1.3178444329, epsilon = 1.5e-3);
        let rep = GrowthFunction::power_log(1.0, 1.0).unwrap().classify().unwrap();
        assert!(rep.index_grid_stable);
    }

    #[test]
    fn classify_powers() {
        let rep = GrowthFunction::power(2.0).unwrap().classify().unwrap();
        assert!(rep.delta2);
        assert_relative_eq!(rep.delta2_constant, 4.0, max_relative = 1e-9);
        assert!(rep.nabla2);
        assert!(rep.in_class_u);
        assert!(!rep.in_class_l);

        // a_Φ = 1 fails the strict ∇₂ index criterion.
        let rep1 = GrowthFunction::power(1.0).unwrap().classify().unwrap();
        assert!(!rep1.nabla2);
        assert!(rep1.in_class_u && rep1.in_class_l);

        let rep_h = GrowthFunction::power(0.5).unwrap().classify().unwrap();
        assert!(rep_h.in_class_l);
        assert!(!rep_h.in_class_u);
        assert_relative_eq!(rep_h.lower_type, 0.5, max_relative = 1e-9);
    }

    #[test]
    fn p_of_phi_cases() {
        assert_eq!(GrowthFunction::power(3.0).unwrap().p_of_phi().unwrap(), 1.0);
        assert_relative_eq!(
            GrowthFunction::power(0.5).unwrap().p_of_phi().unwrap(),
            0.5,
            max_relative = 1e-9
        );
        assert_eq!(GrowthFunction::power(1.0).unwrap().p_of_phi().unwrap(), 1.0);
    }

    #[test]
    fn conjugate_of_linear_is_zero_then_infinite() {
        let psi = GrowthFunction::power(1.0).unwrap().complementary().unwrap();
        assert_eq!(psi.apply(0.5), 0.0);
        assert_eq!(psi.apply(1.0), 0.0);
        assert!(psi.apply(1.0 + 1e-6).is_infinite());
    }

    #[test]
    fn conjugate_of_square_matches_closed_form() {
        let psi = GrowthFunction::power(2.0).unwrap().complementary().unwrap();
        for s in [0.5, 1.0, 2.0, 10.0] {
            assert_relative_eq!(psi.apply(s), s * s / 4.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn conjugate_general_power_closed_form() {
        // Ψ(s) = (p−1)·(s/p)^{p/(p−1)} for Φ = t^p, p > 1; checked by hand
        // from the stationary point and against a brute-force grid oracle.
        for (p, s, expect) in [
            (3.0, 1.0, 0.384900179459751),
            (1.5, 2.0, 1.18518518518519),
        ] {
            let psi = GrowthFunction::power(p).unwrap().complementary().unwrap();
            assert_relative_eq!(psi.apply(s), expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn conjugate_powerlog_matches_brute_oracle() {
        // Brute-force sup over a 4·10^4-point grid, computed independently.
        let psi = GrowthFunction::power_log(2.0, 1.0).unwrap().complementary().unwrap();
        for (s, expect) in [(1.0, 0.218306603507), (2.0, 0.80055760307), (10.0, 14.7031738144)] {
            assert_relative_eq!(psi.apply(s), expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn conjugate_of_concave_is_infinite() {
        let psi = GrowthFunction::power(0.5).unwrap().complementary().unwrap();
        assert!(psi.apply(0.3).is_infinite());
        assert_eq!(psi.apply(0.0), 0.0);
    }

    #[test]
    fn young_inequality_on_grid() {
        for phi in [
            GrowthFunction::power(2.0).unwrap(),
            GrowthFunction::power(3.0).unwrap(),
            GrowthFunction::power_log(2.0, 1.0).unwrap(),
        ] {
            let psi = phi.complementary().unwrap();
            for t in log_grid(1e-3, 1e3, 50) {
                for s in log_grid(1e-3, 1e3, 50) {
                    let lhs = t * s;
                    let rhs = phi.apply(t) + psi.apply(s);
                    assert!(
                        lhs <= rhs + 1e-6 * lhs.max(1.0),
                        "Young fails at t={t} s={s}: {lhs} > {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn compose_with_inverse_powers() {
        let p4 = GrowthFunction::power(4.0).unwrap();
        let p2 = GrowthFunction::power(2.0).unwrap();
        let c = p4.compose_with_inverse(&p2);
        assert_eq!(c.as_power(), Some(2.0));
        let id = p2.compose_with_inverse(&p2);
        assert_eq!(id.as_power(), Some(1.0));

        let pl = GrowthFunction::power_log(2.0, 1.0).unwrap();
        let c2 = pl.compose_with_inverse(&p2);
        // Φ₁(Φ₂⁻¹(4)) = Φ₁(2), round-tripped through eval/inverse.
        assert_relative_eq!(c2.apply(4.0), pl.apply(2.0), max_relative = 1e-8);
    }

    #[test]
    fn lemma_phi_p_lands_in_class_u() {
        // For Φ ∈ L_p the function t ↦ Φ(t^{1/p}) is in class U.
        for (phi, p) in [
            (GrowthFunction::power(0.5).unwrap(), 0.5),
            (GrowthFunction::power_log(0.5, 1.0).unwrap(), 0.5),
        ] {
            let rep = phi.classify().unwrap();
            assert!(rep.in_class_l, "premise: Φ ∈ L");
            // Build the p-lift as a table over the scan grid.
            let pts: Vec<(f64, f64)> = log_grid(1e-9, 1e9, 600)
                .into_iter()
                .map(|t| (t, phi.apply(t.powf(1.0 / p))))
                .collect();
            let lifted = GrowthFunction::from_table(&pts).unwrap();
            let grid = log_grid(1e-8, 1e8, 200);
            let mut prev = 0.0;
            for &t in &grid {
                let q = lifted.apply(t) / t;
                assert!(q >= prev * (1.0 - 1e-6), "Φ(t^(1/p))/t decreasing at {t}");
                prev = q;
            }
        }
    }

    #[test]
    fn proposition_inverse_duality() {
        // Φ ∈ L iff Φ⁻¹ ∈ U, on the power and power-log families.
        for (phi, in_l) in [
            (GrowthFunction::power(0.5).unwrap(), true),
            (GrowthFunction::power_log(0.5, 0.5).unwrap(), true),
            (GrowthFunction::power(2.0).unwrap(), false),
            (GrowthFunction::power_log(2.0, 1.0).unwrap(), false),
        ] {
            let rep = phi.classify().unwrap();
            let inv_rep = phi.inverse_function().classify().unwrap();
            assert_eq!(rep.in_class_l, in_l);
            assert_eq!(
                rep.in_class_l, inv_rep.in_class_u,
                "inverse duality broken for {:?}",
                phi.family()
            );
        }
    }

    #[test]
    fn upper_type_inequality_with_reported_constant() {
        for phi in [
            GrowthFunction::power(2.0).unwrap(),
            GrowthFunction::power_log(2.0, 1.0).unwrap(),
        ] {
            let rep = phi.classify().unwrap();
            let c = rep.upper_type_constant * 1.05;
            // Independent grid, shifted off the scan nodes.
            for s in log_grid(3e-3, 9.7, 21) {
                for t in log_grid(1.03, 97.0, 17) {
                    assert!(
                        phi.apply(s * t) <= c * t.powf(rep.upper_type) * phi.apply(s),
                        "upper-type bound fails at s={s} t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn table_function_round_trip() {
        let pts: Vec<(f64, f64)> = log_grid(1e-6, 1e6, 300)
            .into_iter()
            .map(|t| (t, t * t))
            .collect();
        let f = GrowthFunction::from_table(&pts).unwrap();
        for s in log_grid(1e-3, 1e3, 20) {
            let t = f.inverse(s).unwrap();
            assert_relative_eq!(f.apply(t), s, max_relative = 1e-9);
        }
        // Flat table is rejected as non-surjective.
        let flat: Vec<(f64, f64)> = (1..100).map(|i| (i as f64, 1.0)).collect();
        assert!(GrowthFunction::from_table(&flat).is_err());
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        fn arb_family() -> impl Strategy<Value = GrowthFunction> {
            prop_oneof![
                (0.3f64..4.0).prop_map(|p| GrowthFunction::power(p).unwrap()),
                ((0.5f64..3.0), (0.0f64..1.5))
                    .prop_map(|(p, a)| GrowthFunction::power_log(p, a).unwrap()),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn round_trip(phi in arb_family(), ls in -5.0f64..5.0) {
                let s = 10f64.powf(ls);
                let t = phi.inverse(s).unwrap();
                let back = phi.apply(t);
                prop_assert!((back - s).abs() <= 1e-9 * s.max(1.0));
            }

            #[test]
            fn young(phi in arb_family(), lt in -3.0f64..3.0, lsep in -3.0f64..3.0) {
                let psi = phi.complementary().unwrap();
                let t = 10f64.powf(lt);
                let s = 10f64.powf(lsep);
                let rhs = phi.apply(t) + psi.apply(s);
                prop_assert!(t * s <= rhs + 1e-6 * (t * s).max(1.0));
            }
        }
    }
}
