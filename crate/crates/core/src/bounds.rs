//! Closed-form cost bounds of FHC(v) and the commitment trade-off curve.
//!
//! Independent noise:
//! `E cost(FHC(v)) <= opt + 2 T beta D / v + 2 G T sigma^alpha`.
//!
//! Exponentially decaying correlated noise with `alpha = 1`:
//! `E cost(FHC(v)) <= opt + 2 T beta D / v + 2 G T ||f_v||`, where
//! `||f_v||^2 = sum_{s=0}^{v} c^2 sigma^2 a^(2s)
//!            = c^2 sigma^2 (1 - a^(2(v+1))) / (1 - a^2)`.
//! The sum is evaluated with its stated limits `0..=v`; the closed forms
//! derived from it elsewhere (`1 - a^(2v)` in the numerator, or an extra
//! factor 1/2) are not used.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Which closed form [`bound_expdecay`] evaluates.
pub const EXPDECAY_FORM: &str = "norm = sqrt(sum_{s=0}^{v} c^2 sigma^2 a^(2s)) = sqrt(c^2 sigma^2 (1 - a^(2(v+1))) / (1 - a^2))";

/// Parameters of both bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct BoundParams {
    /// Horizon length `T` in steps.
    pub t: f64,
    /// Switching weight.
    pub beta: f64,
    /// Diameter of the action set.
    pub diam: f64,
    /// Hölder constant of the cost.
    pub g_lip: f64,
    /// Hölder exponent in `(0, 1]`.
    pub alpha: f64,
    /// Noise scale.
    pub sigma: f64,
    /// Correlation decay in `[0, 1)`.
    pub a: f64,
    /// Correlation magnitude.
    pub c: f64,
    /// Expected cost of the offline optimum.
    pub opt_cost: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams { t: 24.0, beta: 1.0, diam: 1.0, g_lip: 1.0, alpha: 1.0, sigma: 1.0, a: 0.8, c: 1.0, opt_cost: 0.0 }
    }
}

impl BoundParams {
    /// Checks ranges.
    pub fn validate(&self) -> Result<()> {
        let fields = [self.t, self.beta, self.diam, self.g_lip, self.sigma, self.a, self.c, self.opt_cost];
        if fields.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::NumericDomain("bound parameters must be finite and non-negative"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::NumericDomain("alpha must lie in (0, 1]"));
        }
        if self.a >= 1.0 {
            return Err(Error::NumericDomain("decay a must be below 1"));
        }
        Ok(())
    }

    fn switching_term(&self, v: usize) -> f64 {
        2.0 * self.t * self.beta * self.diam / v as f64
    }
}

fn check_v(v: usize) -> Result<()> {
    if v == 0 {
        Err(Error::NumericDomain("commitment v must be >= 1"))
    } else {
        Ok(())
    }
}

/// Bound under independent forecast errors.
pub fn bound_iid(p: &BoundParams, v: usize) -> Result<f64> {
    p.validate()?;
    check_v(v)?;
    Ok(p.opt_cost + p.switching_term(v) + 2.0 * p.g_lip * p.t * libm::pow(p.sigma, p.alpha))
}

/// Norm of the exponentially decaying error correlation over `v` steps.
pub fn fv_norm_expdecay(p: &BoundParams, v: usize) -> Result<f64> {
    p.validate()?;
    check_v(v)?;
    let a2 = p.a * p.a;
    let geometric = if p.a == 0.0 { 1.0 } else { (1.0 - libm::pow(a2, (v + 1) as f64)) / (1.0 - a2) };
    Ok(libm::sqrt(p.c * p.c * p.sigma * p.sigma * geometric))
}

/// Bound under exponentially decaying correlated errors (`alpha = 1` only).
pub fn bound_expdecay(p: &BoundParams, v: usize) -> Result<f64> {
    if p.alpha != 1.0 {
        return Err(Error::NumericDomain("the correlated-noise bound assumes alpha = 1"));
    }
    Ok(p.opt_cost + p.switching_term(v) + 2.0 * p.g_lip * p.t * fv_norm_expdecay(p, v)?)
}

/// One row of a trade-off table.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TradeoffRow {
    /// Commitment.
    pub v: usize,
    /// Independent-noise bound.
    pub bound_iid: f64,
    /// Correlated-noise bound (`None` when `alpha != 1`).
    pub bound_expdecay: Option<f64>,
}

/// Bounds over `v = 1..=v_max` with their minimisers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TradeoffCurve {
    /// Rows in increasing `v`.
    pub rows: Vec<TradeoffRow>,
    /// Smallest `v` minimising the independent-noise bound.
    pub argmin_iid: usize,
    /// Smallest `v` minimising the correlated-noise bound.
    pub argmin_expdecay: Option<usize>,
}

fn argmin(values: impl Iterator<Item = (usize, f64)>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (v, b) in values {
        if b < best.1 {
            best = (v, b);
        }
    }
    best.0
}

/// Tabulates both bounds for `v = 1..=v_max`.
pub fn tradeoff_curve(p: &BoundParams, v_max: usize) -> Result<TradeoffCurve> {
    check_v(v_max)?;
    let rows = (1..=v_max)
        .map(|v| {
            let exp = match bound_expdecay(p, v) {
                Ok(b) => Some(b),
                Err(_) if p.alpha != 1.0 => None,
                Err(e) => return Err(e),
            };
            Ok(TradeoffRow { v, bound_iid: bound_iid(p, v)?, bound_expdecay: exp })
        })
        .collect::<Result<Vec<_>>>()?;
    let argmin_iid = argmin(rows.iter().map(|r| (r.v, r.bound_iid)));
    let argmin_expdecay = (p.alpha == 1.0).then(|| argmin(rows.iter().map(|r| (r.v, r.bound_expdecay.unwrap_or(f64::INFINITY)))));
    Ok(TradeoffCurve { rows, argmin_iid, argmin_expdecay })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> BoundParams {
        BoundParams { sigma: 0.0, ..BoundParams::default() }
    }

    #[test]
    fn iid_example() {
        let p = BoundParams { opt_cost: 5.0, ..unit() };
        assert!((bound_iid(&p, 24).unwrap() - 7.0).abs() < 1e-12);
        assert!(bound_iid(&p, 0).is_err());
    }

    #[test]
    fn fv_norm_examples() {
        let p = BoundParams { a: 0.5, ..BoundParams::default() };
        assert!((fv_norm_expdecay(&p, 1).unwrap() - libm::sqrt(1.25)).abs() < 1e-12);
        let p0 = BoundParams { a: 0.0, sigma: 0.7, ..BoundParams::default() };
        assert_eq!(fv_norm_expdecay(&p0, 9).unwrap(), 0.7);
        let near = BoundParams { a: 0.999, ..BoundParams::default() };
        let lim = 1.0 / libm::sqrt(1.0 - 0.999 * 0.999);
        assert!((fv_norm_expdecay(&near, 20_000).unwrap() - lim).abs() < 1e-9);
    }

    #[test]
    fn alpha_must_be_one_for_expdecay() {
        let p = BoundParams { alpha: 0.5, ..BoundParams::default() };
        assert!(bound_expdecay(&p, 3).is_err());
        let curve = tradeoff_curve(&p, 4).unwrap();
        assert!(curve.argmin_expdecay.is_none());
        assert!(curve.rows.iter().all(|r| r.bound_expdecay.is_none()));
    }

    #[test]
    fn invalid_params() {
        assert!(bound_iid(&BoundParams { a: 1.0, ..BoundParams::default() }, 1).is_err());
        assert!(bound_iid(&BoundParams { beta: -1.0, ..BoundParams::default() }, 1).is_err());
    }
}
