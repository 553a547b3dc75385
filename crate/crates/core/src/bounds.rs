//! Closed-form deviation bounds for the empirical mean, the Gaussian
//! minimax benchmark, worst-case lower bounds, and the quantile primitives
//! backing them. Curve tabulation over an epsilon grid feeds the CLI.

use std::f64::consts::{LN_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::kurtosis_mean;
use crate::lepski::GeometricGrid;
use crate::mean_catoni::{self, AlphaMode};
use crate::variance_blocks;

/// Inputs shared by every bound: sample size, variance, optional kurtosis
/// bound, confidence parameter, and the optional truncation split of the
/// kurtosis-aware upper bound.
#[derive(Debug, Clone, Copy)]
pub struct BoundQuery {
    pub n: u64,
    pub v: f64,
    pub kappa: Option<f64>,
    pub epsilon: f64,
    pub lambda: Option<f64>,
}

impl BoundQuery {
    pub fn new(n: u64, v: f64, kappa: Option<f64>, epsilon: f64) -> Result<Self> {
        let q = BoundQuery { n, v, kappa, epsilon, lambda: None };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if !(self.v > 0.0) || !self.v.is_finite() {
            return Err(Error::InvalidParameter(format!("v must be positive, got {}", self.v)));
        }
        if let Some(k) = self.kappa {
            if !(k >= 1.0) || !k.is_finite() {
                return Err(Error::InvalidParameter(format!("kappa must be >= 1, got {k}")));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1/2), got {}",
                self.epsilon
            )));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l < 1.0) {
                return Err(Error::InvalidParameter(format!("lambda must lie in (0,1), got {l}")));
            }
        }
        Ok(())
    }

    fn kappa_required(&self) -> Result<f64> {
        self.kappa.ok_or_else(|| {
            Error::InvalidParameter("this bound requires a kurtosis value".into())
        })
    }
}

/// Chebyshev bound on the empirical mean: `sqrt(v / (2 eps n))`.
pub fn chebyshev_halfwidth(q: &BoundQuery) -> f64 {
    (q.v / (2.0 * q.epsilon * q.n as f64)).sqrt()
}

/// Simplified truncation split for the kurtosis-aware bound. Falls back to
/// 1e-6 when the balancing formula degenerates.
pub fn default_lambda(n: u64, kappa: f64, epsilon: f64) -> f64 {
    let arg = kappa / (2.0 * n as f64 * epsilon.powi(5));
    let log_term = arg.ln();
    let candidate = if log_term <= 0.0 {
        0.0
    } else {
        2f64.powf(1.75) * (n as f64 * epsilon / kappa).powf(0.25) * log_term.sqrt()
    };
    let lambda = candidate.min(0.5);
    if lambda <= 0.0 {
        1e-6
    } else {
        lambda
    }
}

fn kurtosis_halfwidth_at(q: &BoundQuery, lambda: f64) -> Result<f64> {
    let kappa = q.kappa_required()?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must lie in (0,1), got {lambda}")));
    }
    let n = q.n as f64;
    let l = (1.0 / (lambda * q.epsilon)).ln();
    let term1 = (2.0 * l / n).sqrt();
    let term2 = kappa.sqrt() * l / (3.0 * n);
    let corr = 1.0
        + 3.0 * (n - 1.0) * kappa * l * l
            / (64.0 * (1.0 + SQRT_2).powi(4) * n * n);
    let term3 = (kappa / (2.0 * (1.0 - lambda) * n.powi(3) * q.epsilon)).powf(0.25)
        * corr.powf(0.25);
    Ok(q.v.sqrt() * (term1 + term2 + term3))
}

/// Kurtosis-refined upper bound on the empirical mean deviations. Uses the
/// query's lambda when present, the simplified split otherwise.
pub fn kurtosis_halfwidth(q: &BoundQuery) -> Result<f64> {
    let lambda = match q.lambda {
        Some(l) => l,
        None => default_lambda(q.n, q.kappa_required()?, q.epsilon),
    };
    kurtosis_halfwidth_at(q, lambda)
}

/// Kurtosis-refined upper bound with the truncation split minimized by
/// golden-section search over (0, 1).
pub fn kurtosis_halfwidth_optimized(q: &BoundQuery) -> Result<f64> {
    q.kappa_required()?;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1e-9, 1.0 - 1e-9);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = kurtosis_halfwidth_at(q, c)?;
    let mut fd = kurtosis_halfwidth_at(q, d)?;
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = kurtosis_halfwidth_at(q, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = kurtosis_halfwidth_at(q, d)?;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    kurtosis_halfwidth_at(q, 0.5 * (a + b))
}

/// Fourth-moment Chebyshev bound: `((3(n-1)+kappa)/(2 n eps))^{1/4} sqrt(v/n)`.
pub fn fourth_moment_halfwidth(q: &BoundQuery) -> Result<f64> {
    let kappa = q.kappa_required()?;
    let n = q.n as f64;
    Ok(((3.0 * (n - 1.0) + kappa) / (2.0 * n * q.epsilon)).powf(0.25) * (q.v / n).sqrt())
}

/// Best available upper bound for the empirical mean: minimum of the
/// Chebyshev, kurtosis-refined and fourth-moment bounds (the latter two only
/// when a kurtosis value is present).
pub fn empirical_mean_best_halfwidth(q: &BoundQuery) -> f64 {
    let mut best = chebyshev_halfwidth(q);
    if q.kappa.is_some() {
        if let Ok(k) = kurtosis_halfwidth(q) {
            best = best.min(k);
        }
        if let Ok(f) = fourth_moment_halfwidth(q) {
            best = best.min(f);
        }
    }
    best
}

/// Exact Gaussian benchmark: `sqrt(v/n) * Phi^{-1}(1 - eps)`. No estimator
/// can beat this across Gaussian sample distributions.
pub fn gaussian_halfwidth(q: &BoundQuery) -> f64 {
    (q.v / q.n as f64).sqrt() * norm_quantile(1.0 - q.epsilon)
}

/// Worst-case lower bound for the empirical mean under a variance constraint:
/// `sqrt(v/(2 n eps)) (1 - 2 e eps / n)^{(n-1)/2}`, valid for `eps <= 1/(2e)`.
pub fn lower_bound_plain(q: &BoundQuery) -> Result<f64> {
    if q.epsilon > 1.0 / (2.0 * std::f64::consts::E) {
        return Err(Error::Domain(format!(
            "lower bound requires eps <= 1/(2e), got {}",
            q.epsilon
        )));
    }
    let n = q.n as f64;
    Ok((q.v / (2.0 * n * q.epsilon)).sqrt()
        * (1.0 - 2.0 * std::f64::consts::E * q.epsilon / n).powf((n - 1.0) / 2.0))
}

/// Atom term of the kurtosis-aware lower bound, without the Gaussian
/// correction: `(((kappa-1)/(2 n eps)) (1 - (n eps/16)^{1/4} - 4 eps))^{1/4} sqrt(v/n)`.
/// This is the term whose small-`n eps` asymptotics the upper bound matches
/// up to `(kappa/(kappa-1))^{1/4}`.
pub fn lower_bound_kurtosis_leading(q: &BoundQuery) -> Result<f64> {
    let kappa = q.kappa_required()?;
    let n = q.n as f64;
    let ne = n * q.epsilon;
    let inner = 1.0 - (ne / 16.0).powf(0.25) - 4.0 * q.epsilon;
    if inner <= 0.0 {
        return Err(Error::Domain("degenerate inner factor".into()));
    }
    Ok(((kappa - 1.0) / (2.0 * ne) * inner).powf(0.25) * (q.v / n).sqrt())
}

/// Worst-case lower bound for the empirical mean under variance and kurtosis
/// constraints, valid for `1/eps >= n >= 16`: the larger of a pure-atom term
/// and an atom term corrected for the Gaussian part of the sample.
pub fn lower_bound_kurtosis(q: &BoundQuery) -> Result<f64> {
    let kappa = q.kappa_required()?;
    let n = q.n as f64;
    if q.n < 16 || 1.0 / q.epsilon < n {
        return Err(Error::Domain(format!(
            "lower bound requires 1/eps >= n >= 16, got n={} eps={}",
            q.n, q.epsilon
        )));
    }
    let ne = n * q.epsilon;
    let scale = (q.v / n).sqrt();
    let mut best = f64::NEG_INFINITY;
    let inner_a = (kappa - 1.0) * (1.0 - 8.0 * q.epsilon) / (4.0 * ne);
    if inner_a > 0.0 {
        best = best.max(inner_a.powf(0.25) * scale);
    }
    if let Ok(lead) = lower_bound_kurtosis_leading(q) {
        best = best.max(lead - ((16.0 / ne).ln() * q.v / (2.0 * n)).sqrt());
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::Domain("both terms of the lower bound degenerate".into()));
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Quantile primitives
// ---------------------------------------------------------------------------

/// Standard normal quantile, absolute error below 1e-9 on
/// [1e-15, 1 - 1e-15]. Errors outside (0, 1).
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile argument must lie in (0,1), got {p}")));
    }
    Ok(norm_quantile(p))
}

/// Rational minimax approximation refined by one Halley step on the erfc
/// based distribution function.
pub(crate) fn norm_quantile(p: f64) -> f64 {
    let x = ppnd16(p);
    // One Halley step: x <- x - u / (1 + x u / 2) with u = (Phi(x) - p)/phi(x).
    let err = std_normal_cdf(x) - p;
    let u = err * (2.0 * PI).sqrt() * (x * x / 2.0).exp();
    if u.is_finite() {
        x - u / (1.0 + x * u / 2.0)
    } else {
        x
    }
}

/// Wichura-style rational approximation of the normal quantile.
fn ppnd16(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608e0,
        1.331_416_678_917_843_774_5e2,
        1.971_590_950_306_551_442_7e3,
        1.373_169_376_550_946_112_5e4,
        4.592_195_393_154_987_145_7e4,
        6.726_577_092_700_870_085_3e4,
        3.343_057_558_358_812_810_5e4,
        2.509_080_928_730_122_672_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_125_2e1,
        6.871_870_074_920_579_083e2,
        5.394_196_021_424_751_107_7e3,
        2.121_379_430_158_659_586_7e4,
        3.930_789_580_009_271_061e4,
        2.872_908_573_572_194_267_4e4,
        5.226_495_278_852_854_561e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34e0,
        4.630_337_846_156_545_295_9e0,
        5.769_497_221_460_691_405_5e0,
        3.647_848_324_763_204_605_04e0,
        1.270_458_252_452_368_382_58e0,
        2.417_807_251_774_506_117_7e-1,
        2.272_384_498_926_918_458_33e-2,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87e0,
        1.676_384_830_183_803_849_4e0,
        6.897_673_349_851_000_045_5e-1,
        1.481_039_764_274_800_745_9e-1,
        1.519_866_656_361_645_719_66e-2,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2e0,
        5.463_784_911_164_114_369_9e0,
        1.784_826_539_917_291_335_8e0,
        2.965_605_718_285_048_912_3e-1,
        2.653_218_952_657_612_309_3e-2,
        1.242_660_947_388_078_438_6e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_879_376_9e-1,
        1.369_298_809_227_358_053_1e-1,
        1.487_536_129_085_061_485_25e-2,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    fn poly(coef: &[f64; 8], x: f64) -> f64 {
        coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        q * poly(&A, r) / poly(&B, r)
    } else {
        let r = if q < 0.0 { p } else { 1.0 - p };
        let r = (-r.ln()).sqrt();
        let x = if r <= 5.0 {
            let r = r - 1.6;
            poly(&C, r) / poly(&D, r)
        } else {
            let r = r - 5.0;
            poly(&E, r) / poly(&F, r)
        };
        if q < 0.0 {
            -x
        } else {
            x
        }
    }
}

/// Standard normal distribution function via the complementary error
/// function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Complementary error function, Cody-style rational approximations.
pub(crate) fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= 0.46875 {
        return 1.0 - erf_small(x);
    }
    let r = if y <= 4.0 { erfc_mid(y) } else { erfc_large(y) };
    if x < 0.0 {
        2.0 - r
    } else {
        r
    }
}

fn erf_small(x: f64) -> f64 {
    const A: [f64; 5] = [
        3.161_123_743_870_565_6e0,
        1.138_641_541_510_501_56e2,
        3.774_852_376_853_020_21e2,
        3.209_377_589_138_469_47e3,
        1.857_777_061_846_031_53e-1,
    ];
    const B: [f64; 4] = [
        2.360_129_095_234_412_09e1,
        2.440_246_379_344_441_73e2,
        1.282_616_526_077_372_28e3,
        2.844_236_833_439_170_62e3,
    ];
    let z = x * x;
    let mut num = A[4] * z;
    let mut den = z;
    for i in 0..3 {
        num = (num + A[i]) * z;
        den = (den + B[i]) * z;
    }
    x * (num + A[3]) / (den + B[3])
}

fn erfc_mid(y: f64) -> f64 {
    const C: [f64; 9] = [
        5.641_884_969_886_700_89e-1,
        8.883_149_794_388_375_94e0,
        6.611_919_063_714_162_95e1,
        2.986_351_381_974_001_31e2,
        8.819_522_212_417_690_9e2,
        1.712_047_612_634_070_58e3,
        2.051_078_377_826_071_47e3,
        1.230_339_354_797_997_25e3,
        2.153_115_354_744_038_46e-8,
    ];
    const D: [f64; 8] = [
        1.574_492_611_070_983_47e1,
        1.176_939_508_913_124_99e2,
        5.371_811_018_620_098_58e2,
        1.621_389_574_566_690_19e3,
        3.290_799_235_733_459_63e3,
        4.362_619_090_143_247_16e3,
        3.439_367_674_143_721_64e3,
        1.230_339_354_803_749_42e3,
    ];
    let mut num = C[8] * y;
    let mut den = y;
    for i in 0..7 {
        num = (num + C[i]) * y;
        den = (den + D[i]) * y;
    }
    let ratio = (num + C[7]) / (den + D[7]);
    scaled_exp(y) * ratio
}

fn erfc_large(y: f64) -> f64 {
    const P: [f64; 6] = [
        3.053_266_349_612_323_44e-1,
        3.603_448_999_498_044_39e-1,
        1.257_817_261_112_292_46e-1,
        1.608_378_514_874_227_66e-2,
        6.587_491_615_298_378_03e-4,
        1.631_538_713_730_209_78e-2,
    ];
    const Q: [f64; 5] = [
        2.568_520_192_289_822_42e0,
        1.872_952_849_923_460_47e0,
        5.279_051_029_514_284_12e-1,
        6.051_834_131_244_131_91e-2,
        2.335_204_976_268_691_85e-3,
    ];
    if y >= 26.6 {
        return 0.0;
    }
    let z = 1.0 / (y * y);
    let mut num = P[5] * z;
    let mut den = z;
    for i in 0..4 {
        num = (num + P[i]) * z;
        den = (den + Q[i]) * z;
    }
    let ratio = z * (num + P[4]) / (den + Q[4]);
    scaled_exp(y) * (1.0 / PI.sqrt() - ratio) / y
}

/// `exp(-y^2)` split to recover accuracy lost when `y^2` rounds.
fn scaled_exp(y: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp()
}

/// Natural log of the gamma function (Lanczos).
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000000000190015;
    for (j, &c) in COEF.iter().enumerate() {
        ser += c / (x + 1.0 + j as f64);
    }
    -tmp + (2.5066282746310005 * ser / x).ln()
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub(crate) fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_continued_fraction(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut term = sum;
    for _ in 0..500 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Chi-square quantile with `dof` degrees of freedom: Wilson-Hilferty
/// initialization refined by safeguarded Newton iterations on the
/// regularized incomplete gamma. Relative error below 1e-6 for dof >= 10.
pub fn chi_square_quantile(p: f64, dof: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile argument must lie in (0,1), got {p}")));
    }
    if dof < 1 {
        return Err(Error::Domain("degrees of freedom must be >= 1".into()));
    }
    let a = dof as f64 / 2.0;
    let z = norm_quantile(p);
    let k = dof as f64;
    let mut x = k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3);
    if !(x > 0.0) {
        // Small-quantile start from P(a, t) ~ t^a / (a Gamma(a)).
        x = 2.0 * (((p * a).ln() + ln_gamma(a)) / a).exp();
    }
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for _ in 0..60 {
        let f = reg_lower_gamma(a, x / 2.0) - p;
        if f > 0.0 {
            hi = hi.min(x);
        } else {
            lo = lo.max(x);
        }
        let ln_pdf = (a - 1.0) * (x / 2.0).ln() - x / 2.0 - ln_gamma(a) - LN_2;
        let pdf = ln_pdf.exp();
        let mut next = x - f / pdf;
        if !next.is_finite() || next <= lo || next >= hi {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { x * 2.0 };
        }
        if (next - x).abs() <= 1e-13 * x.abs() {
            x = next;
            break;
        }
        x = next;
    }
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Numerical(format!(
            "chi-square quantile iteration failed at p={p}, dof={dof}"
        )));
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Curve tabulation
// ---------------------------------------------------------------------------

/// A named bound tabulated against an epsilon grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    Chebyshev,
    Gaussian,
    /// Known-variance M-estimator halfwidth, epsilon-dependent tuning.
    Catoni,
    /// Known-variance M-estimator halfwidth, epsilon-free tuning.
    CatoniEpsFree,
    KurtosisUpper,
    FourthMoment,
    EmpiricalBest,
    LowerPlain,
    LowerKurtosis,
    /// Variance-adaptive estimator bound over a geometric grid.
    Adaptive(GeometricGrid),
    /// Observable-interval halfwidth of the kurtosis-calibrated mean
    /// estimator at the query variance.
    KurtosisMean,
    /// Log-accuracy bound of the kurtosis-calibrated variance estimator.
    VarianceZeta,
}

impl BoundKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundKind::Chebyshev => "chebyshev",
            BoundKind::Gaussian => "gaussian",
            BoundKind::Catoni => "catoni",
            BoundKind::CatoniEpsFree => "catoni-eps-free",
            BoundKind::KurtosisUpper => "kurtosis-upper",
            BoundKind::FourthMoment => "fourth-moment",
            BoundKind::EmpiricalBest => "empirical-best",
            BoundKind::LowerPlain => "lower-plain",
            BoundKind::LowerKurtosis => "lower-kurtosis",
            BoundKind::Adaptive(_) => "adaptive",
            BoundKind::KurtosisMean => "kurtosis-mean",
            BoundKind::VarianceZeta => "variance-zeta",
        }
    }

    /// Evaluate at one epsilon; infeasible points map to +infinity.
    fn eval(&self, q: &BoundQuery) -> f64 {
        let inf = f64::INFINITY;
        match self {
            BoundKind::Chebyshev => chebyshev_halfwidth(q),
            BoundKind::Gaussian => gaussian_halfwidth(q),
            BoundKind::Catoni => mean_catoni::halfwidth_known_variance(
                q.n,
                q.v,
                q.epsilon,
                AlphaMode::EpsDependent,
            )
            .unwrap_or(inf),
            BoundKind::CatoniEpsFree => {
                mean_catoni::halfwidth_known_variance(q.n, q.v, q.epsilon, AlphaMode::EpsFree)
                    .unwrap_or(inf)
            }
            BoundKind::KurtosisUpper => kurtosis_halfwidth(q).unwrap_or(inf),
            BoundKind::FourthMoment => fourth_moment_halfwidth(q).unwrap_or(inf),
            BoundKind::EmpiricalBest => empirical_mean_best_halfwidth(q),
            BoundKind::LowerPlain => lower_bound_plain(q).unwrap_or(inf),
            BoundKind::LowerKurtosis => lower_bound_kurtosis(q).unwrap_or(inf),
            BoundKind::Adaptive(grid) => {
                crate::lepski::adaptive_halfwidth(q.v, grid, q.epsilon, q.n).unwrap_or(inf)
            }
            BoundKind::KurtosisMean => match q.kappa {
                Some(kappa) => kurtosis_mean::plugin_params(
                    q.n,
                    q.epsilon,
                    kappa,
                    kurtosis_mean::ZetaSource::Auto,
                )
                .map(|p| (p.eta * q.v / (1.0 - p.eta)).sqrt())
                .unwrap_or(inf),
                None => inf,
            },
            BoundKind::VarianceZeta => match q.kappa {
                Some(kappa) => variance_blocks::zeta_bound_auto(q.n, kappa, q.epsilon)
                    .unwrap_or(inf),
                None => inf,
            },
        }
    }
}

impl std::str::FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chebyshev" => Ok(BoundKind::Chebyshev),
            "gaussian" => Ok(BoundKind::Gaussian),
            "catoni" => Ok(BoundKind::Catoni),
            "catoni-eps-free" => Ok(BoundKind::CatoniEpsFree),
            "kurtosis-upper" => Ok(BoundKind::KurtosisUpper),
            "fourth-moment" => Ok(BoundKind::FourthMoment),
            "empirical-best" => Ok(BoundKind::EmpiricalBest),
            "lower-plain" => Ok(BoundKind::LowerPlain),
            "lower-kurtosis" => Ok(BoundKind::LowerKurtosis),
            "kurtosis-mean" => Ok(BoundKind::KurtosisMean),
            "variance-zeta" => Ok(BoundKind::VarianceZeta),
            other => Err(Error::InvalidParameter(format!("unknown bound name {other:?}"))),
        }
    }
}

/// `(epsilon, halfwidth)` tabulation of one bound.
#[derive(Debug, Clone)]
pub struct BoundCurve {
    pub bound_name: String,
    pub points: Vec<(f64, f64)>,
}

/// Tabulate one bound over a strictly increasing epsilon grid in (0, 1/2).
/// Infeasible grid points are recorded as +infinity.
pub fn bound_curve(template: &BoundQuery, kind: &BoundKind, eps_grid: &[f64]) -> Result<BoundCurve> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidParameter("empty epsilon grid".into()));
    }
    for w in eps_grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidParameter("epsilon grid must be strictly increasing".into()));
        }
    }
    let mut points = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "epsilon grid values must lie in (0, 1/2), got {eps}"
            )));
        }
        let q = BoundQuery { epsilon: eps, ..*template };
        points.push((eps, kind.eval(&q)));
    }
    Ok(BoundCurve { bound_name: kind.name().to_string(), points })
}
