//! Generative models for the experiments: Gaussian mixtures with exact
//! closed-form moments, the worst-case discrete laws behind the lower
//! bounds, seeded samplers, and the classical empirical statistics.
//!
//! Sampling is counter-based: the randomness of draw `i` is derived from
//! `(seed, i)` through a SplitMix64-style mixer, so parallel generation is
//! bitwise identical to sequential generation.

use crate::bounds::norm_quantile;
use crate::error::{Error, Result};
use crate::mean_catoni::Sample;

/// 64-bit seed for the deterministic samplers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeed(pub u64);

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream key for item `index` under `seed`; used for per-draw and
/// per-replication derivation.
#[inline]
pub(crate) fn derive_stream(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Small counter-based generator: draw `j`-th uniform of a stream.
struct StreamRng {
    state: u64,
}

impl StreamRng {
    fn new(seed: u64, index: u64) -> Self {
        StreamRng { state: derive_stream(seed, index) }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in the open interval (0, 1).
    fn next_unit(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }
}

/// One Gaussian mixture component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Mixture of Gaussians with exact closed-form moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSpec {
    components: Vec<MixtureComponent>,
}

impl MixtureSpec {
    /// Validates weights (positive, summing to 1 within 1e-9) and renormalizes
    /// them exactly.
    pub fn new(mut components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("mixture needs at least one component".into()));
        }
        let mut total = 0.0;
        for c in &components {
            if !(c.weight > 0.0) || !c.weight.is_finite() {
                return Err(Error::InvalidParameter(format!("weight must be positive, got {}", c.weight)));
            }
            if !c.mean.is_finite() || !c.sd.is_finite() || c.sd < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "component N({}, {}^2) is not admissible",
                    c.mean, c.sd
                )));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        for c in &mut components {
            c.weight /= total;
        }
        Ok(MixtureSpec { components })
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    /// Parse the `weight:mean:sd,weight:mean:sd,...` text form.
    pub fn parse(text: &str) -> Result<Self> {
        let mut components = Vec::new();
        for part in text.split(',') {
            let fields: Vec<&str> = part.split(':').collect();
            if fields.len() != 3 {
                return Err(Error::InvalidParameter(format!(
                    "mixture component {part:?} is not weight:mean:sd"
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("cannot parse {s:?} as a number"))
                })
            };
            components.push(MixtureComponent {
                weight: parse(fields[0])?,
                mean: parse(fields[1])?,
                sd: parse(fields[2])?,
            });
        }
        MixtureSpec::new(components)
    }
}

/// Finite discrete law given by its atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpec {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteSpec {
    /// Validates probabilities (non-negative, summing to 1 within 1e-9) and
    /// renormalizes them exactly.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("discrete law needs at least one atom".into()));
        }
        let mut total = 0.0;
        for &(value, prob) in &atoms {
            if !value.is_finite() || !prob.is_finite() || prob < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "atom ({value}, {prob}) is not admissible"
                )));
            }
            total += prob;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "atom probabilities sum to {total}, expected 1"
            )));
        }
        for (_, p) in &mut atoms {
            *p /= total;
        }
        Ok(DiscreteSpec { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// Exact moments of a generative law: mean, variance, kurtosis (absent when
/// the variance vanishes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureMoments {
    pub m: f64,
    pub v: f64,
    pub kappa: Option<f64>,
}

/// Closed-form moments of a Gaussian mixture.
pub fn mixture_moments(spec: &MixtureSpec) -> MixtureMoments {
    let m: f64 = spec.components.iter().map(|c| c.weight * c.mean).sum();
    let mut v = 0.0;
    let mut fourth = 0.0;
    for c in &spec.components {
        let d2 = (c.mean - m) * (c.mean - m);
        let s2 = c.sd * c.sd;
        v += c.weight * (s2 + d2);
        fourth += c.weight * (3.0 * s2 * s2 + 6.0 * s2 * d2 + d2 * d2);
    }
    let kappa = if v > 0.0 { Some(fourth / (v * v)) } else { None };
    MixtureMoments { m, v, kappa }
}

/// Exact moments of a finite discrete law.
pub fn discrete_moments(spec: &DiscreteSpec) -> MixtureMoments {
    let m: f64 = spec.atoms.iter().map(|&(x, p)| p * x).sum();
    let v: f64 = spec.atoms.iter().map(|&(x, p)| p * (x - m) * (x - m)).sum();
    let fourth: f64 = spec.atoms.iter().map(|&(x, p)| p * (x - m).powi(4)).sum();
    let kappa = if v > 0.0 { Some(fourth / (v * v)) } else { None };
    MixtureMoments { m, v, kappa }
}

/// Draw `n` i.i.d. values from a mixture. Component selection by inverse-CDF
/// on the cumulative weights, Gaussian draws by the normal quantile, both
/// from the per-draw stream of `(seed, i)`.
pub fn sample_mixture(spec: &MixtureSpec, n: usize, seed: RngSeed) -> Result<Sample> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be >= 1".into()));
    }
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let mut rng = StreamRng::new(seed.0, i as u64);
            let u_component = rng.next_unit();
            let u_normal = rng.next_unit();
            let mut acc = 0.0;
            let mut chosen = *spec.components.last().expect("non-empty");
            for c in &spec.components {
                acc += c.weight;
                if u_component <= acc {
                    chosen = *c;
                    break;
                }
            }
            chosen.mean + chosen.sd * norm_quantile(u_normal)
        })
        .collect();
    Sample::new(values)
}

/// Draw `n` i.i.d. values from a discrete law, inverse-CDF on the atom
/// cumulative probabilities.
pub fn sample_discrete(spec: &DiscreteSpec, n: usize, seed: RngSeed) -> Result<Sample> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be >= 1".into()));
    }
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let mut rng = StreamRng::new(seed.0, i as u64);
            let u = rng.next_unit();
            let mut acc = 0.0;
            let mut chosen = spec.atoms.last().expect("non-empty").0;
            for &(value, prob) in &spec.atoms {
                acc += prob;
                if u <= acc {
                    chosen = value;
                    break;
                }
            }
            chosen
        })
        .collect();
    Sample::new(values)
}

/// Three-point law on `{-n eta, 0, n eta}` with mean 0 and variance exactly
/// `v`: the worst case for the empirical mean under a variance constraint.
pub fn three_point_spec(v: f64, eta: f64, n: u64) -> Result<DiscreteSpec> {
    if !(v > 0.0) || !(eta > 0.0) || n < 1 {
        return Err(Error::InvalidParameter(
            "three-point law needs v > 0, eta > 0, n >= 1".into(),
        ));
    }
    let spike = n as f64 * eta;
    let mass = v / (spike * spike);
    if mass > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "atom mass v/(n eta)^2 = {mass} exceeds 1"
        )));
    }
    DiscreteSpec::new(vec![(-spike, mass / 2.0), (0.0, 1.0 - mass), (spike, mass / 2.0)])
}

/// Increasing map whose inverse pins the spike-to-shoulder ratio of the
/// four-point law: `f_q(x) = (1 - 2q + 2q x^4) / (1 - 2q + 2q x^2)^2`.
fn f_q(q: f64, x: f64) -> f64 {
    let base = 1.0 - 2.0 * q;
    (base + 2.0 * q * x.powi(4)) / (base + 2.0 * q * x * x).powi(2)
}

/// Four-point law on `{-n eta, -xi, xi, n eta}` with mean 0, variance `v`
/// and kurtosis exactly `kappa`: the worst case under variance and kurtosis
/// constraints. Requires `1 < kappa < 1/(2q)`.
pub fn four_point_spec(v: f64, kappa: f64, q: f64, n: u64) -> Result<DiscreteSpec> {
    if !(v > 0.0) || n < 1 {
        return Err(Error::InvalidParameter("four-point law needs v > 0, n >= 1".into()));
    }
    if !(q > 0.0 && q < 0.5) {
        return Err(Error::InvalidParameter(format!("q must lie in (0, 1/2), got {q}")));
    }
    if !(kappa > 1.0 && kappa < 1.0 / (2.0 * q)) {
        return Err(Error::InvalidParameter(format!(
            "kappa = {kappa} outside the attainable range (1, {})",
            1.0 / (2.0 * q)
        )));
    }
    // f_q is increasing from f_q(1) = 1 with limit 1/(2q); bracket then bisect.
    let mut hi = 2.0;
    let mut doublings = 0;
    while f_q(q, hi) < kappa {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::Numerical("bracketing f_q failed".into()));
        }
    }
    let mut lo = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f_q(q, mid) < kappa {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    let xi = (v / (1.0 - 2.0 * q + 2.0 * q * x * x)).sqrt();
    let spike = xi * x;
    DiscreteSpec::new(vec![
        (-spike, q),
        (-xi, 0.5 - q),
        (xi, 0.5 - q),
        (spike, q),
    ])
}

/// Pin for the spike probability of the four-point law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomProbPin {
    /// `chi = (n eps)^{1/4} / 2`.
    Quartic,
    /// `chi = 1/2`.
    Half,
}

/// Spike probability tying the four-point law to a confidence parameter:
/// `q = (eps / (n (1 - chi))) (1 - 4 eps / (n (1 - chi)))^{-(n-1)}` with the
/// two candidate pins for `chi`.
pub fn four_point_prob_for_epsilon(n: u64, epsilon: f64, pin: AtomProbPin) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0 / 16.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1/16], got {epsilon}"
        )));
    }
    let nf = n as f64;
    let chi = match pin {
        AtomProbPin::Quartic => (nf * epsilon).powf(0.25) / 2.0,
        AtomProbPin::Half => 0.5,
    };
    if !(chi < 1.0) {
        return Err(Error::InvalidParameter("chi pin must stay below 1".into()));
    }
    let base = epsilon / (nf * (1.0 - chi));
    Ok(base * (1.0 - 4.0 * base).powi(-(n as i32 - 1)))
}

/// Arithmetic mean.
pub fn empirical_mean(sample: &Sample) -> f64 {
    sample.values().iter().sum::<f64>() / sample.len() as f64
}

/// Sample median; the average of the two central order statistics for even n.
pub fn empirical_median(sample: &Sample) -> f64 {
    let mut sorted = sample.values().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Unbiased variance `(1/(n-1)) sum (Y_i - mean)^2`. Needs n >= 2.
pub fn unbiased_variance(sample: &Sample) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::DegenerateData(
            "the unbiased variance needs at least two observations".into(),
        ));
    }
    let m = empirical_mean(sample);
    let ss: f64 = sample.values().iter().map(|&y| (y - m) * (y - m)).sum();
    Ok(ss / (sample.len() - 1) as f64)
}
