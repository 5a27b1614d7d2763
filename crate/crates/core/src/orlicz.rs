//! Modulars and Luxemburg (quasi)-norms over ν_α and over arbitrary
//! measures, plus the weighted sequence spaces ℓ^Φ_{a,α} attached to a
//! lattice.
//!
//! Infinite modulars and norms are signal values (`f64::INFINITY`), not
//! errors: the Carleson harness legitimately probes divergent cases.

use crate::geometry::BallPoint;
use crate::growth::GrowthFunction;
use crate::lattice::Lattice;
use crate::measure::{measure_samples, Measure, MeasureSamples};
use crate::quadrature::{integrate_with_mode, ExecMode, IntegralEstimate, QuadratureSpec};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;

/// Relative tolerance of the Luxemburg bisection.
pub const LUX_TOL: f64 = 1e-4;

/// ∫ Φ(|f|) dμ together with the quadrature metadata.
#[derive(Debug, Clone)]
pub struct Modular {
    pub value: f64,
    pub estimate: Option<IntegralEstimate>,
}

/// |f| evaluated once on a cached sample cloud of μ; the Luxemburg
/// bisection then reuses the values for every trial λ.
pub struct SampledModular {
    values: Vec<f64>,
    weights: Vec<f64>,
    normalize_by_count: bool,
    pub seed: u64,
}

impl SampledModular {
    pub fn new<F>(f: F, mu: &Measure, n: usize, spec: &QuadratureSpec, tag: u64) -> Result<Self>
    where
        F: Fn(&BallPoint) -> f64 + Sync,
    {
        let cloud = measure_samples(mu, n, spec, tag)?;
        let values = cloud.values(|p| f(p).abs());
        let MeasureSamples { weights, normalize_by_count, seed, .. } = cloud;
        Ok(Self { values, weights, normalize_by_count, seed })
    }

    pub fn from_parts(values: Vec<f64>, weights: Vec<f64>, normalize_by_count: bool, seed: u64) -> Self {
        Self { values, weights, normalize_by_count, seed }
    }

    /// ∫ Φ(|f|/λ) dμ from the cached values; +∞ propagates as a signal.
    pub fn modular_at(&self, phi: &GrowthFunction, lambda: f64) -> f64 {
        let mut acc = 0.0;
        for (v, w) in self.values.iter().zip(&self.weights) {
            let t = phi.apply(v / lambda);
            if !t.is_finite() {
                return f64::INFINITY;
            }
            acc += w * t;
        }
        if self.normalize_by_count {
            acc / self.values.len().max(1) as f64
        } else {
            acc
        }
    }

    pub fn all_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Luxemburg norm from the cached values.
    pub fn luxemburg(&self, phi: &GrowthFunction) -> f64 {
        if self.all_zero() || self.values.is_empty() {
            return 0.0;
        }
        luxemburg_bisect(|lambda| self.modular_at(phi, lambda))
    }
}

/// inf{λ > 0 : m(λ) ≤ 1} for a non-increasing modular curve m, by geometric
/// bracketing and bisection to relative tolerance [`LUX_TOL`].
/// Returns +∞ when no finite λ satisfies the bound after 200 doublings.
pub fn luxemburg_bisect<M: Fn(f64) -> f64>(modular_at: M) -> f64 {
    let mut lo;
    let mut hi;
    if modular_at(1.0) <= 1.0 {
        hi = 1.0;
        lo = 0.5;
        let mut n = 0;
        while modular_at(lo) <= 1.0 {
            hi = lo;
            lo *= 0.5;
            n += 1;
            if n > 200 {
                return 0.0;
            }
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        let mut n = 0;
        while modular_at(hi) > 1.0 {
            lo = hi;
            hi *= 2.0;
            n += 1;
            if n > 200 {
                return f64::INFINITY;
            }
        }
    }
    while hi / lo > 1.0 + LUX_TOL {
        let mid = (lo * hi).sqrt();
        if modular_at(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// ∫ Φ(|f|) dμ.
pub fn modular<F>(
    f: F,
    phi: &GrowthFunction,
    mu: &Measure,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<Modular>
where
    F: Fn(&BallPoint) -> f64 + Sync,
{
    let sm = SampledModular::new(&f, mu, n, spec, TAG_MODULAR)?;
    let value = sm.modular_at(phi, 1.0);
    Ok(Modular { value, estimate: None })
}

const TAG_MODULAR: u64 = 0x4d4f444c;

/// Luxemburg norm inf{λ : ∫Φ(|f|/λ)dμ ≤ 1}; +∞ when no finite λ works.
pub fn luxemburg<F>(
    f: F,
    phi: &GrowthFunction,
    mu: &Measure,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: Fn(&BallPoint) -> f64 + Sync,
{
    let sm = SampledModular::new(&f, mu, n, spec, TAG_MODULAR)?;
    Ok(sm.luxemburg(phi))
}

/// A coefficient sequence over a fixed lattice.
#[derive(Clone)]
pub struct SeqSpaceElement {
    pub lattice: Arc<Lattice>,
    pub coeffs: Vec<Complex64>,
}

impl SeqSpaceElement {
    pub fn new(lattice: Arc<Lattice>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != lattice.len() {
            return Err(Error::Precondition(format!(
                "coefficient length {} does not match lattice cardinality {}",
                coeffs.len(),
                lattice.len()
            )));
        }
        Ok(Self { lattice, coeffs })
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            lattice: Arc::clone(&self.lattice),
            coeffs: self.coeffs.iter().map(|c| c * t).collect(),
        }
    }
}

/// Σ_k (1−|a_k|²)^{n+1+α} Φ(|c_k| / (1−|a_k|²)^b), with b = 0 when
/// `scale_b` is absent. +∞ propagates as a signal.
pub fn seq_modular(
    c: &SeqSpaceElement,
    phi: &GrowthFunction,
    alpha: f64,
    scale_b: Option<f64>,
) -> f64 {
    let n = c.lattice.n as f64;
    let e = n + 1.0 + alpha;
    let b = scale_b.unwrap_or(0.0);
    let mut acc = 0.0;
    for (a, ck) in c.lattice.points.iter().zip(&c.coeffs) {
        let q = a.one_minus_norm_sq();
        let t = phi.apply(ck.norm() / q.powf(b));
        if !t.is_finite() {
            return f64::INFINITY;
        }
        acc += q.powf(e) * t;
    }
    acc
}

/// Luxemburg norm of a sequence: the same infimum with the weighted sum as
/// modular.
pub fn seq_luxemburg(
    c: &SeqSpaceElement,
    phi: &GrowthFunction,
    alpha: f64,
    scale_b: Option<f64>,
) -> f64 {
    if c.coeffs.iter().all(|v| v.norm() == 0.0) {
        return 0.0;
    }
    luxemburg_bisect(|lambda| {
        let scaled = c.scaled(1.0 / lambda);
        seq_modular(&scaled, phi, alpha, scale_b)
    })
}

/// ⟨c,d⟩ = Σ_k (1−|a_k|²)^{n+1+α} c_k d̄_k on a shared lattice.
pub fn pairing(c: &SeqSpaceElement, d: &SeqSpaceElement, alpha: f64) -> Result<Complex64> {
    if !Arc::ptr_eq(&c.lattice, &d.lattice) || c.coeffs.len() != d.coeffs.len() {
        return Err(Error::LatticeMismatch);
    }
    let n = c.lattice.n as f64;
    let e = n + 1.0 + alpha;
    let mut acc = Complex64::new(0.0, 0.0);
    for ((a, ck), dk) in c.lattice.points.iter().zip(&c.coeffs).zip(&d.coeffs) {
        acc += a.one_minus_norm_sq().powf(e) * ck * dk.conj();
    }
    Ok(acc)
}

/// Outcome of the Hölder-type check: the ∫|fg| integral against both the
/// product of modulars (the stated bound) and the product of Luxemburg
/// norms (the scale-invariant form that is asserted).
#[derive(Debug, Clone, Serialize)]
pub struct HolderReport {
    pub lhs: f64,
    pub rhs_modular: f64,
    pub rhs_norm: f64,
    pub ratio_modular: f64,
    pub ratio_norm: f64,
}

/// Computes ∫|fg|dν_α against 2·modular(f,Φ)·modular(g,Ψ) and
/// 2·‖f‖_Φ·‖g‖_Ψ with Ψ the complementary function of Φ.
pub fn holder_check<F, G>(
    f: F,
    g: G,
    phi: &GrowthFunction,
    alpha: f64,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<HolderReport>
where
    F: Fn(&BallPoint) -> f64 + Sync,
    G: Fn(&BallPoint) -> f64 + Sync,
{
    let psi = phi.complementary()?;
    let mu = Measure::nu_alpha(alpha);
    let lhs = integrate_with_mode(
        n,
        |z| (f(z) * g(z)).abs(),
        &QuadratureSpec { alpha, ..*spec },
        ExecMode::default_mode(),
    )?
    .value;
    let mf = modular(&f, phi, &mu, n, spec)?.value;
    let mg = modular(&g, &psi, &mu, n, spec)?.value;
    let nf = luxemburg(&f, phi, &mu, n, spec)?;
    let ng = luxemburg(&g, &psi, &mu, n, spec)?;
    let rhs_modular = 2.0 * mf * mg;
    let rhs_norm = 2.0 * nf * ng;
    Ok(HolderReport {
        lhs,
        rhs_modular,
        rhs_norm,
        ratio_modular: lhs / rhs_modular,
        ratio_norm: lhs / rhs_norm,
    })
}
