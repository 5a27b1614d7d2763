//! Positive Borel measures on 𝔹ⁿ and their derived objects: ball masses
//! μ(D(z,δ)), average functions μ̂_δ, Berezin transforms μ̃, and the
//! pull-back measures μ_{φ,β} behind the composition-operator corollary.

use crate::geometry::{
    bergman_distance, kernel_sq_modulus, mobius, BallPoint, BergmanBall,
};
use crate::interp::MonotoneCubic;
use crate::quadrature::{
    self, c_alpha, integrate_bergman_ball_pair, integrate_with_mode, ExecMode, IntegralEstimate,
    QuadratureSpec,
};
use crate::{Error, Result};
use num_complex::Complex64;

/// A holomorphic self-map of 𝔹ⁿ, restricted to the families the corollary
/// scenarios exercise.
#[derive(Debug, Clone)]
pub enum HoloSelfMap {
    Identity,
    /// z ↦ c·z with |c| ≤ 1.
    Scalar(Complex64),
    /// z ↦ φ_a(z).
    Mobius(BallPoint),
    Composite(Vec<HoloSelfMap>),
}

impl HoloSelfMap {
    pub fn apply(&self, z: &BallPoint) -> BallPoint {
        match self {
            HoloSelfMap::Identity => *z,
            HoloSelfMap::Scalar(c) => {
                let mut coords = [Complex64::new(0.0, 0.0); crate::geometry::MAX_DIM];
                for (j, v) in z.coords().iter().enumerate() {
                    coords[j] = c * v;
                }
                BallPoint::clamped(coords, z.dim() as u8)
            }
            HoloSelfMap::Mobius(a) => mobius(a, z),
            HoloSelfMap::Composite(maps) => {
                let mut w = *z;
                for m in maps {
                    w = m.apply(&w);
                }
                w
            }
        }
    }

    /// Checks the self-map property on 10⁴ seeded points.
    pub fn validate(&self, n: usize) -> Result<()> {
        if let HoloSelfMap::Scalar(c) = self {
            if c.norm() > 1.0 + 1e-12 {
                return Err(Error::Domain(format!("scalar map must have |c| ≤ 1, got {}", c.norm())));
            }
        }
        if let HoloSelfMap::Composite(maps) = self {
            for m in maps {
                m.validate(n)?;
            }
        }
        let spec = QuadratureSpec::new(10_000, 0x4d415056, 0.0);
        let pts = quadrature::sample_nu_alpha(n, &spec)?;
        for (p, _) in pts {
            let w = self.apply(&p);
            if !(w.norm_sq() < 1.0) {
                return Err(Error::Domain(format!(
                    "map sends |z|={} to |w|={} outside the ball",
                    p.norm(),
                    w.norm()
                )));
            }
        }
        Ok(())
    }
}

/// Radial density weight against the (normalized) Lebesgue measure ν.
#[derive(Debug, Clone)]
pub enum DensityProfile {
    /// w(z) = scale·c_β·(1−|z|²)^β, i.e. μ = scale·ν_β.
    BetaPower { beta: f64, scale: f64 },
    /// Tabulated radial profile w(r), interpolated monotonically in r.
    Radial(MonotoneCubic),
}

/// A positive measure on 𝔹ⁿ.
#[derive(Debug, Clone)]
pub enum Measure {
    /// Finite sum of point masses.
    Atomic(Vec<(BallPoint, f64)>),
    /// Density against ν.
    Density(DensityProfile),
    /// μ(E) = scale·ν_β(φ⁻¹(E)).
    Pullback { map: HoloSelfMap, beta: f64, scale: f64 },
}

impl Measure {
    pub fn nu_alpha(alpha: f64) -> Self {
        Measure::Density(DensityProfile::BetaPower { beta: alpha, scale: 1.0 })
    }

    pub fn dirac(at: BallPoint, mass: f64) -> Self {
        Measure::Atomic(vec![(at, mass)])
    }

    pub fn pullback(map: HoloSelfMap, beta: f64) -> Self {
        Measure::Pullback { map, beta, scale: 1.0 }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            Measure::Atomic(atoms) => {
                if atoms.iter().any(|(_, m)| !(*m > 0.0)) {
                    return Err(Error::Domain("atomic masses must be positive".into()));
                }
                Ok(())
            }
            Measure::Density(DensityProfile::BetaPower { beta, scale }) => {
                if *beta <= -1.0 {
                    return Err(Error::Domain(format!("beta must be > -1, got {beta}")));
                }
                if !(*scale > 0.0) {
                    return Err(Error::Domain("density scale must be positive".into()));
                }
                Ok(())
            }
            Measure::Density(DensityProfile::Radial(_)) => Ok(()),
            Measure::Pullback { map, beta, scale } => {
                if *beta <= -1.0 {
                    return Err(Error::Domain(format!("beta must be > -1, got {beta}")));
                }
                if !(*scale > 0.0) {
                    return Err(Error::Domain("pullback scale must be positive".into()));
                }
                map.validate(n)
            }
        }
    }

    /// μ scaled by a positive constant.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Measure::Atomic(atoms) => {
                Measure::Atomic(atoms.iter().map(|(p, m)| (*p, m * c)).collect())
            }
            Measure::Density(DensityProfile::BetaPower { beta, scale }) => {
                Measure::Density(DensityProfile::BetaPower { beta: *beta, scale: scale * c })
            }
            Measure::Density(DensityProfile::Radial(t)) => {
                // fold the constant into a fresh table
                let xs: Vec<f64> = (0..=256).map(|i| t.min_x() + (t.max_x() - t.min_x()) * i as f64 / 256.0).collect();
                let ys: Vec<f64> = xs.iter().map(|x| c * t.eval(*x)).collect();
                Measure::Density(DensityProfile::Radial(
                    MonotoneCubic::new(xs, ys).expect("scaled table stays monotone"),
                ))
            }
            Measure::Pullback { map, beta, scale } => {
                Measure::Pullback { map: map.clone(), beta: *beta, scale: scale * c }
            }
        }
    }

    fn density_weight(&self, z: &BallPoint) -> f64 {
        match self {
            Measure::Density(DensityProfile::BetaPower { beta, scale }) => {
                scale * c_alpha(z.dim(), *beta) * z.one_minus_norm_sq().powf(*beta)
            }
            Measure::Density(DensityProfile::Radial(t)) => t.eval(z.norm()).max(0.0),
            _ => unreachable!("density_weight called on a non-density measure"),
        }
    }
}

/// Sampled representation of a measure: `Σ weights[i]·g(points[i])`
/// (divided by the sample count for the Monte-Carlo variants) estimates
/// ∫ g dμ. Atomic measures are exact.
pub struct MeasureSamples {
    pub points: Vec<BallPoint>,
    pub weights: Vec<f64>,
    /// Divide the weighted sum by `points.len()` (false for atomic sums).
    pub normalize_by_count: bool,
    pub seed: u64,
}

impl MeasureSamples {
    /// ∫ g dμ from the cached samples.
    pub fn integrate<G: Fn(&BallPoint) -> f64>(&self, g: G) -> f64 {
        let s: f64 = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * g(p))
            .sum();
        if self.normalize_by_count {
            s / self.points.len() as f64
        } else {
            s
        }
    }

    /// Applies `g` once per point and caches the values.
    pub fn values<G: Fn(&BallPoint) -> f64 + Sync>(&self, g: G) -> Vec<f64> {
        let chunk = 8192;
        let chunks = self.points.len().div_ceil(chunk);
        let groups: Vec<Vec<f64>> =
            quadrature::run_chunks(chunks, ExecMode::default_mode(), |c| {
                let start = c * chunk;
                let len = chunk.min(self.points.len() - start);
                (0..len).map(|j| g(&self.points[start + j])).collect()
            });
        groups.into_iter().flatten().collect()
    }
}

/// Draws a reusable sample cloud of μ. The weighted mean of g over the cloud
/// estimates ∫ g dμ; caching the cloud makes Luxemburg bisections cheap.
pub fn measure_samples(mu: &Measure, n: usize, spec: &QuadratureSpec, tag: u64) -> Result<MeasureSamples> {
    match mu {
        Measure::Atomic(atoms) => Ok(MeasureSamples {
            points: atoms.iter().map(|(p, _)| *p).collect(),
            weights: atoms.iter().map(|(_, m)| *m).collect(),
            normalize_by_count: false,
            seed: spec.seed,
        }),
        Measure::Density(DensityProfile::BetaPower { beta, scale }) => {
            let beta_spec = QuadratureSpec { alpha: *beta, ..*spec };
            let pts = sample_points(n, &beta_spec, tag)?;
            let w = vec![*scale; pts.len()];
            Ok(MeasureSamples { points: pts, weights: w, normalize_by_count: true, seed: spec.seed })
        }
        Measure::Density(DensityProfile::Radial(_)) => {
            // sample ν and weight by the radial profile
            let base_spec = QuadratureSpec { alpha: 0.0, ..*spec };
            let pts = sample_points(n, &base_spec, tag)?;
            let w: Vec<f64> = pts.iter().map(|p| mu.density_weight(p)).collect();
            Ok(MeasureSamples { points: pts, weights: w, normalize_by_count: true, seed: spec.seed })
        }
        Measure::Pullback { map, beta, scale } => {
            let beta_spec = QuadratureSpec { alpha: *beta, ..*spec };
            let pts = sample_points(n, &beta_spec, tag)?;
            let mapped: Vec<BallPoint> = pts.iter().map(|p| map.apply(p)).collect();
            let w = vec![*scale; mapped.len()];
            Ok(MeasureSamples { points: mapped, weights: w, normalize_by_count: true, seed: spec.seed })
        }
    }
}

fn sample_points(n: usize, spec: &QuadratureSpec, tag: u64) -> Result<Vec<BallPoint>> {
    let sampler = quadrature::NuAlphaSampler::new(n, spec)?;
    let total = spec.sample_count;
    let chunk = 8192usize;
    let chunks = total.div_ceil(chunk);
    let stratified = spec.stratified;
    let groups: Vec<Vec<BallPoint>> = quadrature::run_chunks(chunks, ExecMode::default_mode(), |c| {
        let mut rng = quadrature::chunk_rng(spec.seed, tag, c as u64);
        let start = c * chunk;
        let len = chunk.min(total - start);
        (0..len)
            .map(|j| sampler.draw(&mut rng, stratified.then_some((start + j, total))))
            .collect()
    });
    Ok(groups.into_iter().flatten().collect())
}

/// ∫ f dμ.
pub fn integrate_measure<F>(
    f: F,
    mu: &Measure,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate>
where
    F: Fn(&BallPoint) -> f64 + Sync,
{
    match mu {
        Measure::Atomic(atoms) => {
            let mut acc = 0.0;
            for (p, m) in atoms {
                let v = f(p);
                if !v.is_finite() {
                    return Err(Error::IntegrandSingularity {
                        count: 1,
                        total: atoms.len(),
                        first: vec![[p.coords()[0].re, p.coords()[0].im]],
                    });
                }
                acc += m * v;
            }
            Ok(IntegralEstimate::exact(acc, spec.seed))
        }
        Measure::Density(DensityProfile::BetaPower { beta, scale }) => {
            let beta_spec = QuadratureSpec { alpha: *beta, ..*spec };
            let s = *scale;
            let est = integrate_with_mode(n, |z| s * f(z), &beta_spec, ExecMode::default_mode())?;
            Ok(est)
        }
        Measure::Density(DensityProfile::Radial(_)) => {
            let base_spec = QuadratureSpec { alpha: 0.0, ..*spec };
            let est = integrate_with_mode(
                n,
                |z| mu.density_weight(z) * f(z),
                &base_spec,
                ExecMode::default_mode(),
            )?;
            Ok(est)
        }
        Measure::Pullback { map, beta, scale } => {
            let beta_spec = QuadratureSpec { alpha: *beta, ..*spec };
            let s = *scale;
            let est = integrate_with_mode(
                n,
                |z| s * f(&map.apply(z)),
                &beta_spec,
                ExecMode::default_mode(),
            )?;
            Ok(est)
        }
    }
}

const TAG_MU_BALL: u64 = 0x4d55424c;

/// μ(D(z, δ)).
pub fn mu_ball(
    mu: &Measure,
    z: &BallPoint,
    delta: f64,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("ball radius must be positive, got {delta}")));
    }
    match mu {
        Measure::Atomic(atoms) => {
            let mass: f64 = atoms
                .iter()
                .filter(|(p, _)| bergman_distance(z, p) < delta)
                .map(|(_, m)| m)
                .sum();
            Ok(IntegralEstimate::exact(mass, spec.seed))
        }
        Measure::Density(_) => {
            let est = quadrature::integrate_bergman_ball(z, delta, spec, TAG_MU_BALL, |zeta, _| {
                mu.density_weight(zeta)
            })?;
            Ok(est)
        }
        Measure::Pullback { map, beta, scale } => {
            let beta_spec = QuadratureSpec { alpha: *beta, ..*spec };
            let s = *scale;
            integrate_with_mode(
                n_of(z),
                |w| {
                    if bergman_distance(z, &map.apply(w)) < delta {
                        s
                    } else {
                        0.0
                    }
                },
                &beta_spec,
                ExecMode::default_mode(),
            )
        }
    }
}

fn n_of(z: &BallPoint) -> usize {
    z.dim()
}

/// The average function μ̂_δ(z) = μ(D(z,δ)) / ν_α(D(z,δ)).
///
/// For density measures both integrals share one sample stream, so the
/// ratio is exact when μ is a multiple of ν_α itself.
pub fn average_function(
    mu: &Measure,
    delta: f64,
    alpha: f64,
    z: &BallPoint,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let n = z.dim();
    match mu {
        Measure::Density(_) => {
            let ca = c_alpha(n, alpha);
            let (num, den) = integrate_bergman_ball_pair(z, delta, spec, TAG_MU_BALL, |zeta, _| {
                (
                    mu.density_weight(zeta),
                    ca * zeta.one_minus_norm_sq().powf(alpha),
                )
            })?;
            if den.value <= 0.0 {
                return Err(Error::VolumeUnderflow(den.value));
            }
            Ok(num.value / den.value)
        }
        _ => {
            let num = mu_ball(mu, z, delta, spec)?;
            let ball = BergmanBall::new(*z, delta)?;
            let den = crate::geometry::ball_volume(alpha, &ball, spec)?;
            if den.value <= 0.0 {
                return Err(Error::VolumeUnderflow(den.value));
            }
            Ok(num.value / den.value)
        }
    }
}

/// Berezin transform μ̃(w) = ∫ |k_{α,w}(z)|² dμ(z).
pub fn berezin(
    mu: &Measure,
    alpha: f64,
    w: &BallPoint,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate> {
    if alpha <= -1.0 {
        return Err(Error::Domain(format!("alpha must be > -1, got {alpha}")));
    }
    integrate_measure(|z| kernel_sq_modulus(alpha, w, z), mu, w.dim(), spec)
}

/// Berezin transform of a function g against ν_α (the measure g dν_α).
pub fn berezin_of_function<G>(
    g: G,
    alpha: f64,
    w: &BallPoint,
    n: usize,
    spec: &QuadratureSpec,
) -> Result<IntegralEstimate>
where
    G: Fn(&BallPoint) -> f64 + Sync,
{
    integrate_with_mode(
        n,
        |z| g(z) * kernel_sq_modulus(alpha, w, z),
        spec,
        ExecMode::default_mode(),
    )
}

/// ∫_{D(z,r)} g(w) dν(w)/(1−|w|²)^{n+1}: the invariant-measure ball
/// integral behind the sub-mean-value inequality. Exact radial quantiles.
pub fn hyperbolic_ball_integral<G>(
    g: G,
    z: &BallPoint,
    r: f64,
    spec: &QuadratureSpec,
    tag: u64,
) -> Result<IntegralEstimate>
where
    G: Fn(&BallPoint) -> f64 + Sync,
{
    let n = z.dim();
    // λ(D(z,r)) = sinh^{2n}(r) by Möbius invariance.
    let mass = r.sinh().powi(2 * n as i32);
    let x_cap = {
        let v = r.tanh() * r.tanh();
        v / (1.0 - v)
    };
    let total = spec.sample_count;
    let chunk = 8192usize;
    let chunks = total.div_ceil(chunk);
    let center = *z;
    let groups: Vec<Vec<f64>> = quadrature::run_chunks(chunks, ExecMode::default_mode(), |c| {
        let mut rng = quadrature::chunk_rng(spec.seed, tag, c as u64);
        let start = c * chunk;
        let len = chunk.min(total - start);
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let x = x_cap * rng.random::<f64>().powf(1.0 / n as f64);
            let v = x / (1.0 + x);
            let mut coords = quadrature::unit_direction(n, &mut rng);
            for d in coords.iter_mut().take(n) {
                *d *= v.sqrt();
            }
            let u = BallPoint::clamped(coords, n as u8);
            // λ is invariant under φ_z, so the integrand is just g∘φ_z.
            out.push(g(&mobius(&center, &u)));
        }
        out
    });
    let vals: Vec<f64> = groups.into_iter().flatten().collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let stderr = quadrature::jackknife_stderr(&vals);
    Ok(IntegralEstimate {
        value: mean * mass,
        stderr: stderr * mass,
        sample_count: vals.len(),
        seed: spec.seed,
    })
}

use rand::Rng;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(samples: usize, seed: u64, alpha: f64) -> QuadratureSpec {
        QuadratureSpec::new(samples, seed, alpha)
    }

    #[test]
    fn atomic_ball_masses_are_exact() {
        let mu = Measure::dirac(BallPoint::origin(1), 1.0);
        let z0 = BallPoint::origin(1);
        let s = spec(1000, 1, 0.0);
        assert_eq!(mu_ball(&mu, &z0, 0.7, &s).unwrap().value, 1.0);
        let far = BallPoint::axis(1, 0.9).unwrap();
        assert_eq!(mu_ball(&mu, &far, 0.7, &s).unwrap().value, 0.0);
    }

    #[test]
    fn density_ball_mass_matches_volume_oracle() {
        // μ = ν_0: μ(D(0,δ)) = tanh²δ for n = 1.
        let mu = Measure::nu_alpha(0.0);
        let s = spec(50_000, 3, 0.0);
        let est = mu_ball(&mu, &BallPoint::origin(1), 1.0, &s).unwrap();
        assert_relative_eq!(est.value, 0.58002565838597393, max_relative = 1e-10);
    }

    #[test]
    fn average_of_nu_alpha_is_one() {
        let mu = Measure::nu_alpha(0.7);
        let s = spec(20_000, 5, 0.7);
        for x in [0.0, 0.4, 0.9] {
            let z = BallPoint::axis(1, x).unwrap();
            let v = average_function(&mu, 0.5, 0.7, &z, &s).unwrap();
            assert_relative_eq!(v, 1.0, max_relative = 1e-12);
        }
        // homogeneity
        let v2 = average_function(&mu.scaled(2.0), 0.5, 0.7, &BallPoint::origin(1), &s).unwrap();
        assert_relative_eq!(v2, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn average_of_dirac_matches_inverse_volume() {
        let mu = Measure::dirac(BallPoint::origin(1), 1.0);
        let s = spec(400_000, 7, 0.0);
        let v = average_function(&mu, 1.0, 0.0, &BallPoint::origin(1), &s).unwrap();
        assert_relative_eq!(v, 1.0 / 0.58002565838597393, max_relative = 1e-9);
    }

    #[test]
    fn berezin_identities() {
        let s = spec(200_000, 9, 0.0);
        // Dirac: μ̃(w) = |k_{α,w}(z₀)|², and at w = 0 the kernel is 1.
        let mu = Measure::dirac(BallPoint::axis(1, 0.3).unwrap(), 1.0);
        let est = berezin(&mu, 0.0, &BallPoint::origin(1), &s).unwrap();
        assert_eq!(est.value, 1.0);
        // μ = ν_α: μ̃ ≡ 1 (reproducing identity), MC tolerance.
        let nu = Measure::nu_alpha(0.0);
        for x in [0.0, 0.3, 0.8] {
            let w = BallPoint::axis(1, x).unwrap();
            let est = berezin(&nu, 0.0, &w, &s).unwrap();
            assert!(
                (est.value - 1.0).abs() <= 3.0 * est.stderr + 2e-3,
                "w={x}: {est:?}"
            );
        }
        // linear scaling
        let est2 = berezin(&nu.scaled(3.0), 0.0, &BallPoint::axis(1, 0.3).unwrap(), &s).unwrap();
        let est1 = berezin(&nu, 0.0, &BallPoint::axis(1, 0.3).unwrap(), &s).unwrap();
        assert_relative_eq!(est2.value, 3.0 * est1.value, max_relative = 1e-12);
    }

    #[test]
    fn pullback_basics() {
        let s = spec(50_000, 11, 0.0);
        // identity pullback of ν_β is ν_β
        let mu = Measure::pullback(HoloSelfMap::Identity, 0.5);
        let est = integrate_measure(|_| 1.0, &mu, 1, &s).unwrap();
        assert_eq!(est.value, 1.0);
        // constant map to 0 gives a Dirac at 0
        let mu0 = Measure::pullback(HoloSelfMap::Scalar(Complex64::new(0.0, 0.0)), 0.5);
        let est0 = integrate_measure(|z| 3.0 + z.norm_sq(), &mu0, 1, &s).unwrap();
        assert_relative_eq!(est0.value, 3.0, max_relative = 1e-12);
        // Möbius pullback preserves total mass
        let a = BallPoint::axis(1, 0.4).unwrap();
        let mum = Measure::pullback(HoloSelfMap::Mobius(a), 0.0);
        let estm = integrate_measure(|_| 1.0, &mum, 1, &s).unwrap();
        assert!((estm.value - 1.0).abs() <= 3.0 * estm.stderr + 1e-9);
    }

    #[test]
    fn self_map_validation() {
        assert!(HoloSelfMap::Scalar(Complex64::new(1.5, 0.0)).validate(1).is_err());
        assert!(HoloSelfMap::Scalar(Complex64::new(0.5, 0.5)).validate(1).is_ok());
        assert!(HoloSelfMap::Mobius(BallPoint::axis(2, 0.7).unwrap()).validate(2).is_ok());
    }

    #[test]
    fn hyperbolic_ball_integral_of_one() {
        // ∫_{D(z,r)} dλ = sinh²(r) for n = 1, any center.
        let s = spec(20_000, 13, 0.0);
        for x in [0.0, 0.6] {
            let z = BallPoint::axis(1, x).unwrap();
            let est = hyperbolic_ball_integral(|_| 1.0, &z, 0.8, &s, 1).unwrap();
            let expect = 0.8f64.sinh().powi(2);
            assert_relative_eq!(est.value, expect, max_relative = 1e-9);
        }
    }

    #[test]
    fn measure_samples_reproduce_integrals() {
        let s = spec(100_000, 17, 0.0);
        let mu = Measure::nu_alpha(1.0);
        let cloud = measure_samples(&mu, 1, &s, 99).unwrap();
        let direct = integrate_measure(|z| z.norm_sq(), &mu, 1, &s).unwrap();
        let via_cloud = cloud.integrate(|z| z.norm_sq());
        assert!((direct.value - via_cloud).abs() < 5e-3, "{direct:?} vs {via_cloud}");
    }
}
