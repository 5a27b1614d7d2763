//! Seeded stochastic integration against ν_α over (truncations of) 𝔹ⁿ.
//!
//! This module is the single randomness authority of the crate. Every
//! estimate is a pure function of `(seed, spec, integrand)`: samples are
//! generated in fixed-size chunks, each chunk owning an independent
//! substream derived from the master seed, and chunk results are merged in
//! chunk order. Parallel evaluation (rayon, default feature `parallel`) is
//! therefore bit-identical to the sequential fallback.

use crate::geometry::{mobius, BallPoint, MAX_DIM};
use crate::interp::MonotoneCubic;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Samples per chunk; one RNG substream per chunk.
const CHUNK: usize = 8192;

/// Jackknife block count for standard errors.
const JK_BLOCKS: usize = 20;

/// Fraction of non-finite integrand values tolerated before erroring.
const SINGULARITY_BUDGET: f64 = 1e-3;

/// How a chunked computation is executed. `Parallel` silently falls back to
/// sequential when the `parallel` feature is disabled; results are identical
/// either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl ExecMode {
    pub fn default_mode() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Maps chunk indices to results, in parallel when requested, always
/// returning results in chunk order.
pub fn run_chunks<T, F>(n: usize, mode: ExecMode, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

/// splitmix64 step; the standard 64-bit mixer.
#[inline]
fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derives the substream seed for `(master, tag, index)`.
pub fn seed_for(master: u64, tag: u64, index: u64) -> u64 {
    splitmix(splitmix(master ^ tag.rotate_left(17)) ^ index)
}

pub(crate) fn chunk_rng(master: u64, tag: u64, chunk: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed_for(master, tag, chunk))
}

/// Specification of a stochastic quadrature run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub sample_count: usize,
    pub seed: u64,
    /// Weight exponent of ν_α; must be > −1.
    pub alpha: f64,
    /// Euclidean truncation radius of the ball.
    pub r_max: f64,
    /// Stratify the radial uniform over the whole run.
    pub stratified: bool,
}

impl QuadratureSpec {
    pub fn new(sample_count: usize, seed: u64, alpha: f64) -> Self {
        Self { sample_count, seed, alpha, r_max: 1.0 - 1e-6, stratified: false }
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.sample_count = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha <= -1.0 {
            return Err(Error::Domain(format!("alpha must be > -1, got {}", self.alpha)));
        }
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return Err(Error::Domain(format!("r_max must lie in (0,1), got {}", self.r_max)));
        }
        if self.sample_count == 0 {
            return Err(Error::Domain("sample_count must be >= 1".into()));
        }
        Ok(())
    }
}

/// A Monte-Carlo estimate with a jackknife standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub stderr: f64,
    pub sample_count: usize,
    pub seed: u64,
}

impl IntegralEstimate {
    pub fn exact(value: f64, seed: u64) -> Self {
        Self { value, stderr: 0.0, sample_count: 0, seed }
    }
}

/// Normalizing constant c_α with ν_α(𝔹ⁿ) = 1:
/// c_α = Π_{j=1..n} (α+j) / n!.
pub fn c_alpha(n: usize, alpha: f64) -> f64 {
    let mut num = 1.0;
    let mut den = 1.0;
    for j in 1..=n {
        num *= alpha + j as f64;
        den *= j as f64;
    }
    num / den
}

/// Raw radial CDF of ν_α in the variable v = r²:
/// F(V) = ∫₀^V v^{n−1}(1−v)^α dv (up to the constant n·c_α), via the exact
/// binomial antiderivative.
pub fn radial_cdf_raw(n: usize, alpha: f64, v: f64) -> f64 {
    debug_assert!(n >= 1 && n <= MAX_DIM);
    let w = (1.0 - v).max(0.0);
    let mut acc = 0.0;
    let mut binom = 1.0f64;
    for j in 0..n {
        let e = alpha + j as f64 + 1.0;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * (1.0 - w.powf(e)) / e;
        binom *= (n - 1 - j) as f64 / (j as f64 + 1.0);
    }
    acc
}

/// Inverse radial CDF of ν_α restricted to v ∈ [0, v_max], tabulated on
/// 2048 nodes with monotone interpolation. Direct inversion keeps sampling
/// alive for α near −1 where rejection would starve at the boundary.
#[derive(Debug, Clone)]
pub struct RadialQuantile {
    table: MonotoneCubic,
    v_max: f64,
}

impl RadialQuantile {
    pub fn new(n: usize, alpha: f64, v_max: f64) -> Result<Self> {
        if alpha <= -1.0 {
            return Err(Error::Domain(format!("alpha must be > -1, got {alpha}")));
        }
        let half = 0.5f64.min(v_max * 0.5);
        let mut vs: Vec<f64> = Vec::with_capacity(2048);
        for i in 0..1024 {
            vs.push(half * i as f64 / 1024.0);
        }
        // Geometric spacing in 1−v resolves the boundary mass for small α.
        let w_hi = 1.0 - half;
        let w_lo = (1.0 - v_max).max(1e-16);
        for i in 0..1024 {
            let t = i as f64 / 1023.0;
            vs.push(1.0 - w_hi * (w_lo / w_hi).powf(t));
        }
        vs.sort_by(|a, b| a.total_cmp(b));
        vs.dedup_by(|a, b| (*a - *b).abs() < 1e-18);
        let total = radial_cdf_raw(n, alpha, v_max);
        let mut us: Vec<f64> = Vec::with_capacity(vs.len());
        let mut keep: Vec<f64> = Vec::with_capacity(vs.len());
        let mut last = -1.0;
        for &v in &vs {
            let u = radial_cdf_raw(n, alpha, v) / total;
            if u > last + 1e-15 {
                us.push(u);
                keep.push(v);
                last = u;
            }
        }
        let table = MonotoneCubic::new(us, keep).map_err(Error::Degenerate)?;
        Ok(Self { table, v_max })
    }

    /// v = r² such that the normalized CDF equals u ∈ [0,1].
    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        self.table.eval(u.clamp(0.0, 1.0)).clamp(0.0, self.v_max)
    }
}

/// Uniform direction on the unit sphere of ℝ²ⁿ, as n complex coordinates.
pub(crate) fn unit_direction(n: usize, rng: &mut ChaCha8Rng) -> [Complex64; MAX_DIM] {
    let mut c = [Complex64::new(0.0, 0.0); MAX_DIM];
    if n == 1 {
        let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        c[0] = Complex64::new(theta.cos(), theta.sin());
        return c;
    }
    let mut norm_sq = 0.0;
    for v in c.iter_mut().take(n) {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v = Complex64::new(re, im);
        norm_sq += re * re + im * im;
    }
    let scale = 1.0 / norm_sq.sqrt().max(1e-300);
    for v in c.iter_mut().take(n) {
        *v *= scale;
    }
    c
}

/// Draws a uniform direction on the unit sphere of ℝ²ⁿ (as n complex
/// coordinates) scaled by `r`.
#[inline]
fn direction_scaled(rng: &mut ChaCha8Rng, n: usize, r: f64) -> BallPoint {
    let mut c = [Complex64::new(0.0, 0.0); MAX_DIM];
    if n == 1 {
        let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        c[0] = Complex64::new(r * theta.cos(), r * theta.sin());
        return BallPoint::clamped(c, 1);
    }
    let mut norm_sq = 0.0;
    for v in c.iter_mut().take(n) {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v = Complex64::new(re, im);
        norm_sq += re * re + im * im;
    }
    let scale = r / norm_sq.sqrt().max(1e-300);
    for v in c.iter_mut().take(n) {
        *v *= scale;
    }
    BallPoint::clamped(c, n as u8)
}

/// Sampler for ν_α conditioned on |z| ≤ r_max (a probability measure).
#[derive(Debug, Clone)]
pub struct NuAlphaSampler {
    pub n: usize,
    pub alpha: f64,
    pub r_max: f64,
    quantile: RadialQuantile,
}

impl NuAlphaSampler {
    pub fn new(n: usize, spec: &QuadratureSpec) -> Result<Self> {
        spec.validate()?;
        if n < 1 || n > MAX_DIM {
            return Err(Error::Domain(format!("dimension must be in 1..={MAX_DIM}, got {n}")));
        }
        Ok(Self {
            n,
            alpha: spec.alpha,
            r_max: spec.r_max,
            quantile: RadialQuantile::new(n, spec.alpha, spec.r_max * spec.r_max)?,
        })
    }

    /// One sample; `strat` carries `(global_index, total)` when the radial
    /// uniform is stratified over the whole run.
    #[inline]
    pub fn draw(&self, rng: &mut ChaCha8Rng, strat: Option<(usize, usize)>) -> BallPoint {
        let u = match strat {
            Some((idx, total)) => (idx as f64 + rng.random::<f64>()) / total as f64,
            None => rng.random::<f64>(),
        };
        let v = self.quantile.quantile(u);
        direction_scaled(rng, self.n, v.sqrt())
    }
}

/// Weighted sample stream of ν_α: points z_i with weights w_i ≡ 1 such that
/// Σ w_i f(z_i)/N estimates ∫ f dν_α on the truncated ball.
pub fn sample_nu_alpha(n: usize, spec: &QuadratureSpec) -> Result<Vec<(BallPoint, f64)>> {
    let sampler = NuAlphaSampler::new(n, spec)?;
    let chunks = spec.sample_count.div_ceil(CHUNK);
    let total = spec.sample_count;
    let per_chunk: Vec<Vec<(BallPoint, f64)>> =
        run_chunks(chunks, ExecMode::default_mode(), |c| {
            let mut rng = chunk_rng(spec.seed, TAG_NU, c as u64);
            let start = c * CHUNK;
            let len = CHUNK.min(total - start);
            let mut out = Vec::with_capacity(len);
            for j in 0..len {
                let strat = spec.stratified.then_some((start + j, total));
                out.push((sampler.draw(&mut rng, strat), 1.0));
            }
            out
        });
    Ok(per_chunk.into_iter().flatten().collect())
}

const TAG_NU: u64 = 0x4e55414c;

/// Delete-block jackknife standard error of the mean of `values`.
pub fn jackknife_stderr(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let blocks = JK_BLOCKS.min(n);
    let total: f64 = values.iter().sum();
    let mut block_sums = vec![0.0f64; blocks];
    let mut block_lens = vec![0usize; blocks];
    for (i, v) in values.iter().enumerate() {
        let b = i * blocks / n;
        block_sums[b] += v;
        block_lens[b] += 1;
    }
    let mut loo = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let len = n - block_lens[b];
        if len == 0 {
            return 0.0;
        }
        loo.push((total - block_sums[b]) / len as f64);
    }
    let m = loo.iter().sum::<f64>() / blocks as f64;
    let var: f64 = loo.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    ((blocks - 1) as f64 / blocks as f64 * var).sqrt()
}

/// Shared core: sample points via `make_point`, evaluate `eval`, average.
fn run_mc<S, F>(
    total: usize,
    seed: u64,
    tag: u64,
    mode: ExecMode,
    make_point: S,
    eval: F,
) -> Result<IntegralEstimate>
where
    S: Fn(&mut ChaCha8Rng, usize) -> BallPoint + Sync,
    F: Fn(&BallPoint) -> f64 + Sync,
{
    let chunks = total.div_ceil(CHUNK);
    let per_chunk: Vec<(Vec<f64>, Vec<[f64; 2]>)> = run_chunks(chunks, mode, |c| {
        let mut rng = chunk_rng(seed, tag, c as u64);
        let start = c * CHUNK;
        let len = CHUNK.min(total - start);
        let mut vals = Vec::with_capacity(len);
        let mut bad = Vec::new();
        for j in 0..len {
            let p = make_point(&mut rng, start + j);
            let v = eval(&p);
            if !v.is_finite() && bad.len() < 4 {
                let c0 = p.coords()[0];
                bad.push([c0.re, c0.im]);
            }
            vals.push(v);
        }
        (vals, bad)
    });

    let mut values = Vec::with_capacity(total);
    let mut first_bad = Vec::new();
    for (vals, bad) in per_chunk {
        values.extend(vals);
        if first_bad.len() < 4 {
            first_bad.extend(bad);
        }
    }
    let non_finite = values.iter().filter(|v| !v.is_finite()).count();
    if non_finite as f64 > (total as f64 * SINGULARITY_BUDGET).max(1.0) {
        first_bad.truncate(4);
        return Err(Error::IntegrandSingularity { count: non_finite, total, first: first_bad });
    }
    if non_finite > 0 {
        log::debug!("dropping {non_finite} non-finite integrand values out of {total}");
        values.retain(|v| v.is_finite());
    }
    if values.is_empty() {
        return Err(Error::SamplingFailure("all samples rejected".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let stderr = jackknife_stderr(&values);
    Ok(IntegralEstimate { value: mean, stderr, sample_count: values.len(), seed })
}

/// ∫ f dν_α over the truncated ball (probability normalization), in the
/// default execution mode.
pub fn integrate<F>(n: usize, f: F, spec: &QuadratureSpec) -> Result<IntegralEstimate>
where
    F: Fn(&BallPoint) -> f64 + Sync,
{
    integrate_with_mode(n, f, spec, ExecMode::default_mode())
}

/// Same as [`integrate`] with an explicit execution mode; the result is
/// bit-identical across modes.
pub fn integrate_with_mode<F>(
    n: usize,
    f: F,
    spec: &QuadratureSpec,
    mode: ExecMode,
) -> Result<IntegralEstimate>
where
    F: Fn(&BallPoint) -> f64 + Sync,
{
    let sampler = NuAlphaSampler::new(n, spec)?;
    let total = spec.sample_count;
    let stratified = spec.stratified;
    run_mc(
        total,
        spec.seed,
        TAG_NU,
        mode,
        move |rng, idx| sampler.draw(rng, stratified.then_some((idx, total))),
        f,
    )
}

/// ∫_{D(center, radius)} h dν for a Bergman ball, by importance-sampling the
/// Euclidean ball {|u| < tanh radius} and mapping through φ_center.
///
/// `h` receives both the mapped point ζ = φ_center(u) and the raw sample u.
/// The change of variables contributes the real Jacobian
/// ((1−|center|²)/|1−⟨u,center⟩|²)^{n+1}; the Euclidean-ball mass R^{2n} is
/// exact, so there is no indicator waste and no additional truncation.
pub fn integrate_bergman_ball<H>(
    center: &BallPoint,
    radius: f64,
    spec: &QuadratureSpec,
    tag: u64,
    h: H,
) -> Result<IntegralEstimate>
where
    H: Fn(&BallPoint, &BallPoint) -> f64 + Sync,
{
    let (num, _den) = integrate_bergman_ball_pair(center, radius, spec, tag, |z, u| (h(z, u), 1.0))?;
    Ok(num)
}

/// Paired version of [`integrate_bergman_ball`]: both components are
/// integrated over the same sample stream, and the ratio numerator/denominator
/// is returned with a jackknife error that honors the correlation.
pub fn integrate_bergman_ball_pair<H>(
    center: &BallPoint,
    radius: f64,
    spec: &QuadratureSpec,
    tag: u64,
    h: H,
) -> Result<(IntegralEstimate, IntegralEstimate)>
where
    H: Fn(&BallPoint, &BallPoint) -> (f64, f64) + Sync,
{
    spec.validate()?;
    let n = center.dim();
    let r_euclid = radius.tanh().min(1.0 - 1e-12);
    let v_r = r_euclid * r_euclid;
    let mass = v_r.powi(n as i32);
    let one_minus_z = center.one_minus_norm_sq();
    let jac_exp = n as f64 + 1.0;
    let total = spec.sample_count;
    let chunks = total.div_ceil(CHUNK);
    let per_chunk: Vec<(Vec<f64>, Vec<f64>)> = run_chunks(chunks, ExecMode::default_mode(), |c| {
        let mut rng = chunk_rng(spec.seed, tag, c as u64);
        let start = c * CHUNK;
        let len = CHUNK.min(total - start);
        let mut xs = Vec::with_capacity(len);
        let mut ys = Vec::with_capacity(len);
        for _ in 0..len {
            // ν₀ conditioned on |u| < R: v = V_R · u^(1/n), exact quantile.
            let v = v_r * rng.random::<f64>().powf(1.0 / n as f64);
            let u = direction_scaled(&mut rng, n, v.sqrt());
            let zeta = mobius(center, &u);
            let den = (Complex64::new(1.0, 0.0) - crate::geometry::inner(&u, center)).norm_sqr();
            let jac = (one_minus_z / den).powf(jac_exp);
            let (a, b) = h(&zeta, &u);
            xs.push(a * jac * mass);
            ys.push(b * jac * mass);
        }
        (xs, ys)
    });
    let mut xs = Vec::with_capacity(total);
    let mut ys = Vec::with_capacity(total);
    for (a, b) in per_chunk {
        xs.extend(a);
        ys.extend(b);
    }
    let bad = xs.iter().chain(ys.iter()).filter(|v| !v.is_finite()).count();
    if bad > 0 {
        return Err(Error::IntegrandSingularity { count: bad, total, first: vec![] });
    }
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    Ok((
        IntegralEstimate { value: mx, stderr: jackknife_stderr(&xs), sample_count: xs.len(), seed: spec.seed },
        IntegralEstimate { value: my, stderr: jackknife_stderr(&ys), sample_count: ys.len(), seed: spec.seed },
    ))
}

/// Jackknife standard error of the ratio mean(xs)/mean(ys) over shared
/// samples.
pub fn ratio_jackknife(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let blocks = JK_BLOCKS.min(n.max(1));
    let tx: f64 = xs.iter().sum();
    let ty: f64 = ys.iter().sum();
    if n < 2 || ty == 0.0 {
        return (if ty != 0.0 { tx / ty } else { f64::INFINITY }, 0.0);
    }
    let mut bx = vec![0.0f64; blocks];
    let mut by = vec![0.0f64; blocks];
    for i in 0..n {
        let b = i * blocks / n;
        bx[b] += xs[i];
        by[b] += ys[i];
    }
    let full = tx / ty;
    let mut loo = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let dy = ty - by[b];
        if dy == 0.0 {
            return (full, 0.0);
        }
        loo.push((tx - bx[b]) / dy);
    }
    let m = loo.iter().sum::<f64>() / blocks as f64;
    let var: f64 = loo.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    (full, ((blocks - 1) as f64 / blocks as f64 * var).sqrt())
}

/// Samples of the hyperbolic (Möbius-invariant) measure λ restricted to
/// |z| ≤ r_cap, with the exact total mass. dλ = (1−|z|²)^{−(n+1)} dν has the
/// closed-form radial CDF x^n with x = v/(1−v), so quantiles are exact.
pub struct HyperbolicSampler {
    pub n: usize,
    x_cap: f64,
}

impl HyperbolicSampler {
    pub fn new(n: usize, r_cap: f64) -> Self {
        let v = (r_cap * r_cap).min(1.0 - 1e-15);
        Self { n, x_cap: v / (1.0 - v) }
    }

    /// λ({|z| ≤ r_cap}) = x_cap^n (with ν normalized to ν(𝔹ⁿ) = 1).
    pub fn total_mass(&self) -> f64 {
        self.x_cap.powi(self.n as i32)
    }

    #[inline]
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> BallPoint {
        let x = self.x_cap * rng.random::<f64>().powf(1.0 / self.n as f64);
        let v = x / (1.0 + x);
        direction_scaled(rng, self.n, v.sqrt())
    }
}
