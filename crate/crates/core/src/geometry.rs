//! Geometry of the complex unit ball 𝔹ⁿ: Hermitian inner products, the
//! Möbius automorphisms φ_a, the Bergman metric and its balls, and the
//! normalized reproducing kernel k_{α,w}.

use crate::quadrature::{self, IntegralEstimate, QuadratureSpec};
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::atomic::{AtomicU64, Ordering};

/// Maximum supported complex dimension. Points are stored inline so that
/// sampling loops stay allocation-free.
pub const MAX_DIM: usize = 4;

/// Points whose modulus rounds to ≥ 1 − BOUNDARY_GUARD are pulled back onto
/// that sphere; the metric and the kernels blow up beyond it.
pub const BOUNDARY_GUARD: f64 = 1e-14;

static CLAMP_EVENTS: AtomicU64 = AtomicU64::new(0);

/// A point z ∈ 𝔹ⁿ with |z| < 1, n ≤ [`MAX_DIM`].
#[derive(Debug, Clone, Copy)]
pub struct BallPoint {
    coords: [Complex64; MAX_DIM],
    dim: u8,
    norm_sq: f64,
}

impl BallPoint {
    pub fn new(coords: &[Complex64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::Domain(format!(
                "dimension must be in 1..={MAX_DIM}, got {}",
                coords.len()
            )));
        }
        let norm_sq: f64 = coords.iter().map(|c| c.norm_sqr()).sum();
        if !(norm_sq < 1.0) {
            return Err(Error::Domain(format!("|z|^2 = {norm_sq} is not < 1")));
        }
        let mut arr = [Complex64::new(0.0, 0.0); MAX_DIM];
        arr[..coords.len()].copy_from_slice(coords);
        Ok(Self { coords: arr, dim: coords.len() as u8, norm_sq })
    }

    pub fn origin(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_DIM);
        Self { coords: [Complex64::new(0.0, 0.0); MAX_DIM], dim: n as u8, norm_sq: 0.0 }
    }

    /// x·e₁ for a real x ∈ (−1, 1).
    pub fn axis(n: usize, x: f64) -> Result<Self> {
        let mut c = [Complex64::new(0.0, 0.0); MAX_DIM];
        c[0] = Complex64::new(x, 0.0);
        if n < 1 || n > MAX_DIM {
            return Err(Error::Domain(format!("dimension {n} out of range")));
        }
        if !(x.abs() < 1.0) {
            return Err(Error::Domain(format!("|{x}| is not < 1")));
        }
        Ok(Self { coords: c, dim: n as u8, norm_sq: x * x })
    }

    /// Builds a point from raw parts, clamping just inside the ball when
    /// round-off pushed it onto or past the boundary. Clamp events are
    /// counted and logged.
    pub(crate) fn clamped(coords: [Complex64; MAX_DIM], dim: u8) -> Self {
        let norm_sq: f64 = coords[..dim as usize].iter().map(|c| c.norm_sqr()).sum();
        let limit = 1.0 - BOUNDARY_GUARD;
        if norm_sq >= limit * limit {
            let n = CLAMP_EVENTS.fetch_add(1, Ordering::Relaxed);
            if n < 8 {
                log::warn!("ball point clamped to the boundary guard (|z|^2 = {norm_sq})");
            }
            let scale = limit / norm_sq.sqrt();
            let mut c = coords;
            for v in &mut c[..dim as usize] {
                *v *= scale;
            }
            return Self { coords: c, dim, norm_sq: limit * limit };
        }
        Self { coords, dim, norm_sq }
    }

    /// Number of boundary clamp events since the process started.
    pub fn clamp_event_count() -> u64 {
        CLAMP_EVENTS.load(Ordering::Relaxed)
    }

    #[inline]
    pub fn coords(&self) -> &[Complex64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    /// 1 − |z|², clamped away from zero by the boundary guard.
    #[inline]
    pub fn one_minus_norm_sq(&self) -> f64 {
        (1.0 - self.norm_sq).max(BOUNDARY_GUARD)
    }
}

/// Hermitian inner product ⟨z,w⟩ = z₁w̄₁ + … + zₙw̄ₙ.
#[inline]
pub fn inner(z: &BallPoint, w: &BallPoint) -> Complex64 {
    debug_assert_eq!(z.dim, w.dim);
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in z.coords().iter().zip(w.coords()) {
        acc += a * b.conj();
    }
    acc
}

/// The Möbius automorphism φ_a of 𝔹ⁿ taking 0 to a (and a to 0), with the
/// convention φ_0(z) = −z.
///
/// φ_a(z) = (a − P_a z − √(1−|a|²)·Q_a z) / (1 − ⟨z,a⟩), where P_a projects
/// onto the span of a and Q_a = I − P_a.
pub fn mobius(a: &BallPoint, z: &BallPoint) -> BallPoint {
    debug_assert_eq!(a.dim, z.dim);
    let dim = a.dim as usize;
    if a.norm_sq == 0.0 {
        let mut c = z.coords;
        for v in &mut c[..dim] {
            *v = -*v;
        }
        return BallPoint { coords: c, dim: z.dim, norm_sq: z.norm_sq };
    }
    let za = inner(z, a);
    let s = (1.0 - a.norm_sq).max(0.0).sqrt();
    let proj = za / a.norm_sq;
    let den = Complex64::new(1.0, 0.0) - za;
    let mut out = [Complex64::new(0.0, 0.0); MAX_DIM];
    for j in 0..dim {
        let p = proj * a.coords[j];
        let q = z.coords[j] - p;
        out[j] = (a.coords[j] - p - s * q) / den;
    }
    BallPoint::clamped(out, a.dim)
}

/// Bergman distance d(z,w) = ½ log((1+|φ_z(w)|)/(1−|φ_z(w)|)) = atanh|φ_z(w)|.
pub fn bergman_distance(z: &BallPoint, w: &BallPoint) -> f64 {
    let m = mobius(z, w).norm().min(1.0 - BOUNDARY_GUARD);
    m.atanh()
}

/// |φ_z(w)|² without constructing the image point, via
/// 1 − |φ_z(w)|² = (1−|z|²)(1−|w|²)/|1−⟨z,w⟩|².
#[inline]
pub fn mobius_norm_sq(z: &BallPoint, w: &BallPoint) -> f64 {
    let denom = (Complex64::new(1.0, 0.0) - inner(z, w)).norm_sqr();
    (1.0 - (1.0 - z.norm_sq) * (1.0 - w.norm_sq) / denom).clamp(0.0, 1.0)
}

/// The normalized reproducing kernel
/// k_{α,w}(z) = (1−|w|²)^{(n+1+α)/2} / (1−⟨z,w⟩)^{n+1+α}
/// using the principal branch (1−⟨z,w⟩ has positive real part on 𝔹ⁿ×𝔹ⁿ).
pub fn kernel(alpha: f64, w: &BallPoint, z: &BallPoint) -> Complex64 {
    let e = z.dim() as f64 + 1.0 + alpha;
    let num = (1.0 - w.norm_sq).powf(0.5 * e);
    let den = (Complex64::new(1.0, 0.0) - inner(z, w)).powf(e);
    num / den
}

/// |k_{α,w}(z)|² = (1−|w|²)^{n+1+α} / |1−⟨z,w⟩|^{2(n+1+α)}; real arithmetic
/// only, for quadrature hot loops.
#[inline]
pub fn kernel_sq_modulus(alpha: f64, w: &BallPoint, z: &BallPoint) -> f64 {
    let e = z.dim() as f64 + 1.0 + alpha;
    let den = (Complex64::new(1.0, 0.0) - inner(z, w)).norm_sqr();
    ((1.0 - w.norm_sq) / den).powf(e)
}

/// Bergman metric ball D(center, radius).
#[derive(Debug, Clone, Copy)]
pub struct BergmanBall {
    pub center: BallPoint,
    pub radius: f64,
}

impl BergmanBall {
    pub fn new(center: BallPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, w: &BallPoint) -> bool {
        bergman_distance(&self.center, w) < self.radius
    }

    /// Euclidean over-approximation of the farthest Euclidean distance from
    /// the center to a point of the ball, from the ellipsoid description of
    /// D(z, r): |w − z| ≤ t√ρ + |z| t² ρ with t = tanh r,
    /// ρ = (1−|z|²)/(1−t²|z|²).
    pub fn euclid_radius_bound(&self) -> f64 {
        let t = self.radius.tanh();
        let zz = self.center.norm_sq;
        let rho = (1.0 - zz) / (1.0 - t * t * zz);
        t * rho.sqrt() + zz.sqrt() * t * t * rho
    }
}

/// Monte-Carlo estimate of ν_α(D) for a Bergman ball D.
///
/// The ball is the Möbius image of the Euclidean ball {|u| < tanh r}, so the
/// estimate importance-samples that Euclidean ball exactly (no indicator
/// waste) and weights by the real Jacobian of φ_center and the ν_α density.
pub fn ball_volume(alpha: f64, ball: &BergmanBall, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    if alpha <= -1.0 {
        return Err(Error::Domain(format!("alpha must be > -1, got {alpha}")));
    }
    let n = ball.center.dim();
    if ball.radius > 25.0 {
        // tanh(25) is 1 to machine precision: the whole ball.
        return Ok(IntegralEstimate {
            value: 1.0,
            stderr: 0.0,
            sample_count: 0,
            seed: spec.seed,
        });
    }
    let c_a = quadrature::c_alpha(n, alpha);
    let est = quadrature::integrate_bergman_ball(
        &ball.center,
        ball.radius,
        spec,
        0x42414c56, // tag "BALV"
        move |zeta: &BallPoint, _u: &BallPoint| c_a * zeta.one_minus_norm_sq().powf(alpha),
    )?;
    if est.value <= 0.0 {
        return Err(Error::VolumeUnderflow(est.value));
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, n: usize, rmax: f64) -> BallPoint {
        loop {
            let mut c = [Complex64::new(0.0, 0.0); MAX_DIM];
            for v in c.iter_mut().take(n) {
                *v = Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0);
            }
            if let Ok(p) = BallPoint::new(&c[..n]) {
                if p.norm() < rmax {
                    return p;
                }
            }
        }
    }

    #[test]
    fn mobius_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = 1 + (rng.random::<u64>() % 2) as usize;
            let a = random_point(&mut rng, n, 0.95);
            let z = random_point(&mut rng, n, 0.95);
            let zero = BallPoint::origin(n);
            // φ_a(0) = a and φ_a(a) = 0
            let at0 = mobius(&a, &zero);
            for (x, y) in at0.coords().iter().zip(a.coords()) {
                assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-13);
                assert_abs_diff_eq!(x.im, y.im, epsilon = 1e-13);
            }
            assert!(mobius(&a, &a).norm() < 1e-13);
            // involution
            let round = mobius(&a, &mobius(&a, &z));
            for (x, y) in round.coords().iter().zip(z.coords()) {
                assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-12);
                assert_abs_diff_eq!(x.im, y.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mobius_at_origin_is_negation() {
        let z = BallPoint::axis(2, 0.3).unwrap();
        let w = mobius(&BallPoint::origin(2), &z);
        assert_eq!(w.coords()[0], Complex64::new(-0.3, 0.0));
    }

    #[test]
    fn distance_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // d(0, w) = atanh|w|; independently, atanh(0.5) = 0.54930614433405485.
        let w = BallPoint::axis(1, 0.5).unwrap();
        let d = bergman_distance(&BallPoint::origin(1), &w);
        assert_abs_diff_eq!(d, 0.54930614433405485, epsilon = 1e-9);
        assert_eq!(bergman_distance(&w, &w), 0.0);
        // symmetry on random pairs
        for _ in 0..100 {
            let n = 1 + (rng.random::<u64>() % 2) as usize;
            let z = random_point(&mut rng, n, 0.98);
            let v = random_point(&mut rng, n, 0.98);
            assert_abs_diff_eq!(
                bergman_distance(&z, &v),
                bergman_distance(&v, &z),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn mobius_invariance_of_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = 1 + (rng.random::<u64>() % 2) as usize;
            let a = random_point(&mut rng, n, 0.9);
            let z = random_point(&mut rng, n, 0.9);
            let w = random_point(&mut rng, n, 0.9);
            let d1 = bergman_distance(&z, &w);
            let d2 = bergman_distance(&mobius(&a, &z), &mobius(&a, &w));
            assert_abs_diff_eq!(d1, d2, epsilon = 1e-10);
        }
    }

    #[test]
    fn mobius_norm_sq_identity_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let n = 1 + (rng.random::<u64>() % 2) as usize;
            let z = random_point(&mut rng, n, 0.97);
            let w = random_point(&mut rng, n, 0.97);
            let direct = mobius(&z, &w).norm_sq();
            assert_abs_diff_eq!(direct, mobius_norm_sq(&z, &w), epsilon = 1e-11);
        }
    }

    #[test]
    fn kernel_values() {
        // w = 0 makes the kernel identically 1.
        let z = BallPoint::axis(1, 0.4).unwrap();
        let k = kernel(0.0, &BallPoint::origin(1), &z);
        assert_abs_diff_eq!(k.re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k.im, 0.0, epsilon = 1e-14);
        // |k_{α,w}(w)|² = (1−|w|²)^{−(n+1+α)}
        let w = BallPoint::axis(2, 0.6).unwrap();
        let alpha = 0.5;
        let e = 2.0 + 1.0 + alpha;
        assert_relative_eq!(
            kernel(alpha, &w, &w).norm_sqr(),
            (1.0 - 0.36f64).powf(-e),
            max_relative = 1e-12
        );
        // n=1, α=0, w=0.5, z=0: exponent (n+1+α)/2 = 1 so k = 0.75.
        let w = BallPoint::axis(1, 0.5).unwrap();
        let k = kernel(0.0, &w, &BallPoint::origin(1));
        assert_relative_eq!(k.re, 0.75, max_relative = 1e-14);
        // fast modulus path agrees with the complex kernel
        let z = BallPoint::new(&[Complex64::new(0.2, -0.4)]).unwrap();
        assert_relative_eq!(
            kernel(1.3, &w, &z).norm_sqr(),
            kernel_sq_modulus(1.3, &w, &z),
            max_relative = 1e-12
        );
    }

    #[test]
    fn euclid_radius_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..2000 {
            let n = 1 + (rng.random::<u64>() % 2) as usize;
            let z = random_point(&mut rng, n, 0.995);
            let r = 0.05 + 0.95 * rng.random::<f64>();
            let ball = BergmanBall::new(z, r).unwrap();
            let bound = ball.euclid_radius_bound();
            // random point of the ball: φ_z(t·u·dir)
            let t = r.tanh() * rng.random::<f64>().powf(1.0 / (2.0 * n as f64));
            let dir = random_point(&mut rng, n, 1.0);
            let scale = t / dir.norm().max(1e-12);
            let mut c = [Complex64::new(0.0, 0.0); MAX_DIM];
            for (j, v) in dir.coords().iter().enumerate() {
                c[j] = v * scale;
            }
            let u = BallPoint::new(&c[..n]).unwrap();
            let w = mobius(&z, &u);
            let dist_euclid: f64 = w
                .coords()
                .iter()
                .zip(z.coords())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(
                dist_euclid <= bound * (1.0 + 1e-9),
                "bound violated: {dist_euclid} > {bound}"
            );
        }
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(128))]
            #[test]
            fn involution_n1(re_a in -0.9f64..0.9, im_a in -0.9f64..0.9,
                             re_z in -0.9f64..0.9, im_z in -0.9f64..0.9) {
                prop_assume!(re_a * re_a + im_a * im_a < 0.9);
                prop_assume!(re_z * re_z + im_z * im_z < 0.9);
                let a = BallPoint::new(&[Complex64::new(re_a, im_a)]).unwrap();
                let z = BallPoint::new(&[Complex64::new(re_z, im_z)]).unwrap();
                let back = mobius(&a, &mobius(&a, &z));
                prop_assert!((back.coords()[0] - z.coords()[0]).norm() < 1e-11);
            }
        }
    }
}
