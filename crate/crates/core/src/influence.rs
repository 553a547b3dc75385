//! Scalar influence functions and the convexified comparison function.
//!
//! Every estimator in this crate is built on a bounded influence function
//! `psi` squeezed between the two logarithmic envelopes
//! `-log(1 - x + x^2/2) <= psi(x) <= log(1 + x + x^2/2)`.
//! Two extreme choices are provided: the narrow one saturating at
//! `+/- log 2` beyond `|x| = 1`, and the wide one following the envelopes on
//! each half line. The comparison function `chi` and the remainder
//! `g(x) = x - psi_wide(x)` back the constant computations and the deviation
//! bounds for the empirical mean.

use std::f64::consts::LN_2;
use std::sync::LazyLock;

use crate::error::{Error, Result};

/// Which of the two admissible influence functions to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfluenceKind {
    /// Saturates at `+/- log 2` for `|x| >= 1`.
    Narrow,
    /// Follows the logarithmic envelopes on each half line.
    Wide,
}

impl InfluenceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InfluenceKind::Narrow => "narrow",
            InfluenceKind::Wide => "wide",
        }
    }
}

impl std::str::FromStr for InfluenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "narrow" => Ok(InfluenceKind::Narrow),
            "wide" => Ok(InfluenceKind::Wide),
            other => Err(Error::InvalidParameter(format!(
                "unknown influence function {other:?} (expected \"narrow\" or \"wide\")"
            ))),
        }
    }
}

/// Constants of the comparison function `chi` and the convexity constant `a`.
///
/// All values are computed from their closed forms at first use so the
/// invariants hold to machine precision.
#[derive(Debug, Clone, Copy)]
pub struct ChiConstants {
    /// Breakpoint where `chi` leaves the narrow `psi`: `1 - sqrt(4 sqrt 2 - 5)`.
    pub x1: f64,
    /// `chi(x1) = -log(2 (sqrt 2 - 1))`.
    pub y1: f64,
    /// Slope of `chi` at `x1`: `sqrt(4 sqrt 2 - 5) / (2 (sqrt 2 - 1))`.
    pub p1: f64,
    /// Supremum of `chi`: `y1 + 2 p1^2 <= 2.103`.
    pub chi_sup: f64,
    /// Convexity constant `3 exp(chi_sup) / (4 log 4) <= 4.43`.
    pub a: f64,
}

static CHI_CONSTANTS: LazyLock<ChiConstants> = LazyLock::new(|| {
    let root = (4.0 * std::f64::consts::SQRT_2 - 5.0).sqrt();
    let x1 = 1.0 - root;
    let y1 = -(2.0 * (std::f64::consts::SQRT_2 - 1.0)).ln();
    let p1 = root / (2.0 * (std::f64::consts::SQRT_2 - 1.0));
    let chi_sup = y1 + 2.0 * p1 * p1;
    let a = 3.0 * chi_sup.exp() / (4.0 * (4f64).ln());
    ChiConstants { x1, y1, p1, chi_sup, a }
});

/// Constants of the comparison function, computed once from closed forms.
pub fn chi_constants() -> ChiConstants {
    *CHI_CONSTANTS
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite argument {x}")))
    }
}

/// Influence function value. Errors on non-finite input.
pub fn psi(kind: InfluenceKind, x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(psi_raw(kind, x))
}

/// Influence function on validated input.
#[inline]
pub(crate) fn psi_raw(kind: InfluenceKind, x: f64) -> f64 {
    match kind {
        InfluenceKind::Narrow => psi_narrow(x),
        InfluenceKind::Wide => psi_wide(x),
    }
}

#[inline]
fn psi_narrow(x: f64) -> f64 {
    if x >= 1.0 {
        LN_2
    } else if x >= 0.0 {
        // -log(1 - x + x^2/2) written so the two central branches share one
        // expression and oddness holds bitwise.
        -f64::ln_1p(x * x / 2.0 - x)
    } else if x >= -1.0 {
        f64::ln_1p(x * x / 2.0 + x)
    } else {
        -LN_2
    }
}

#[inline]
fn psi_wide(x: f64) -> f64 {
    if x < 0.0 {
        -psi_wide_pos(-x)
    } else {
        psi_wide_pos(x)
    }
}

/// `log(1 + x + x^2/2)` for `x >= 0`, overflow-safe for huge `x`. Internal
/// callers can feed an overflowed product, so infinity maps to infinity.
#[inline]
fn psi_wide_pos(x: f64) -> f64 {
    if x > 1e150 {
        // log(x^2/2) + log1p(2/x + 2/x^2); x^2 would overflow past ~1.9e154
        2.0 * x.ln() - LN_2 + f64::ln_1p(2.0 / x + 2.0 / (x * x))
    } else {
        f64::ln_1p(x + x * x / 2.0)
    }
}

/// Remainder `g(x) = x - psi(Wide, x)`. Errors on non-finite input.
pub fn g(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(g_raw(x))
}

#[inline]
pub(crate) fn g_raw(x: f64) -> f64 {
    if x < 0.0 {
        -g_pos(-x)
    } else {
        g_pos(x)
    }
}

#[inline]
fn g_pos(x: f64) -> f64 {
    if x < 1e-4 {
        // x - log(1 + x + x^2/2) cancels catastrophically near zero; the
        // series keeps the relative error at the 1e-12 level there.
        ((x / 20.0 - 0.125) * x + 1.0 / 6.0) * x * x * x
    } else {
        x - psi_wide_pos(x)
    }
}

/// Comparison function squeezed between the narrow `psi` and the upper
/// envelope: follows `psi` up to `x1`, continues as a quadratic with the
/// matching slope, and is constant at `chi_sup` once its derivative vanishes.
pub fn chi(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(chi_raw(x))
}

#[inline]
pub(crate) fn chi_raw(x: f64) -> f64 {
    let c = chi_constants();
    if x <= c.x1 {
        psi_narrow(x)
    } else if x <= c.x1 + 4.0 * c.p1 {
        let t = x - c.x1;
        c.y1 + c.p1 * t - t * t / 8.0
    } else {
        c.chi_sup
    }
}
