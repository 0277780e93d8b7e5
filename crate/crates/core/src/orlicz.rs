//! N-functions, modulars and Luxemburg norms.
//!
//! A function is a slice of samples, one per atom or grid cell, paired with
//! anything that implements [`Carrier`] to supply the matching weights.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default relative tolerance for [`luxemburg_norm`].
pub const DEFAULT_TOL: f64 = 1e-12;

/// A measure carrier seen as a list of nonnegative weights, one per sample.
pub trait Carrier {
    fn sample_weights(&self) -> Vec<f64>;
}

impl Carrier for [f64] {
    fn sample_weights(&self) -> Vec<f64> {
        self.to_vec()
    }
}

impl Carrier for Vec<f64> {
    fn sample_weights(&self) -> Vec<f64> {
        self.clone()
    }
}

type PhiFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum Family {
    /// `|t|^p`, `p > 1`.
    Power(f64),
    /// `|t|^p log(1 + |t|)`, `p >= 1`.
    PowerLog(f64),
    /// `e^|t| - |t| - 1`.
    ExpMinus,
    /// User supplied `φ` on `[0, ∞)`. With `declared_convex` set, the sampled
    /// midpoint convexity check is skipped at construction.
    Custom {
        eval: Arc<PhiFn>,
        declared_convex: bool,
    },
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Power(p) => write!(f, "Power({p})"),
            Family::PowerLog(p) => write!(f, "PowerLog({p})"),
            Family::ExpMinus => write!(f, "ExpMinus"),
            Family::Custom {
                declared_convex, ..
            } => write!(f, "Custom {{ declared_convex: {declared_convex} }}"),
        }
    }
}

/// An even, convex N-function. Evaluation always happens at `|t|`.
#[derive(Clone, Debug)]
pub struct OrliczFunction {
    family: Family,
    label: String,
}

/// Sampling depth used when a custom function is validated at construction.
pub const DEFAULT_VALIDATION_DEPTH: u32 = 20;

impl OrliczFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidOrliczFunction(format!(
                "power exponent must be finite and > 1, got {p}"
            )));
        }
        Ok(Self {
            family: Family::Power(p),
            label: format!("|t|^{p}"),
        })
    }

    pub fn power_log(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidOrliczFunction(format!(
                "power-log exponent must be finite and >= 1, got {p}"
            )));
        }
        Ok(Self {
            family: Family::PowerLog(p),
            label: format!("|t|^{p} log(1+|t|)"),
        })
    }

    pub fn exp_minus() -> Self {
        Self {
            family: Family::ExpMinus,
            label: "e^|t| - |t| - 1".to_string(),
        }
    }

    /// Wraps a user function and runs [`OrliczFunction::validate`] on it.
    pub fn custom<F>(label: impl Into<String>, eval: F, declared_convex: bool) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let phi = Self {
            family: Family::Custom {
                eval: Arc::new(eval),
                declared_convex,
            },
            label: label.into(),
        };
        phi.validate(DEFAULT_VALIDATION_DEPTH)?;
        Ok(phi)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `φ(|t|)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let a = t.abs();
        let v = match &self.family {
            Family::Power(p) => a.powf(*p),
            Family::PowerLog(p) => a.powf(*p) * a.ln_1p(),
            Family::ExpMinus => exp_minus(a),
            Family::Custom { eval, .. } => {
                let v = eval(a);
                if v.is_nan() || v < 0.0 {
                    return Err(Error::InvalidOrliczFunction(format!(
                        "`{}` returned {v} at t = {a}",
                        self.label
                    )));
                }
                v
            }
        };
        Ok(v)
    }

    /// Sample-based check of the N-function axioms: `φ(0) = 0`, positivity,
    /// `φ(t)/t` shrinking along `2^-k` and growing along `2^k` for
    /// `k <= depth`, and midpoint convexity (unless declared convex).
    ///
    /// For builtin families the axioms hold analytically; the check still
    /// runs and is expected to pass.
    pub fn validate(&self, depth: u32) -> Result<()> {
        let bad = |msg: String| Error::InvalidOrliczFunction(format!("`{}`: {msg}", self.label));
        let zero = self.eval(0.0)?;
        if zero != 0.0 {
            return Err(bad(format!("phi(0) = {zero}, expected 0")));
        }
        let depth = depth.max(1) as i32;
        let mut small = Vec::with_capacity(depth as usize + 1);
        let mut large = Vec::with_capacity(depth as usize + 1);
        for k in 0..=depth {
            let t_small = 2f64.powi(-k);
            let t_large = 2f64.powi(k);
            let v_small = self.eval(t_small)?;
            let v_large = self.eval(t_large)?;
            if v_small <= 0.0 || v_large <= 0.0 {
                return Err(bad(format!("phi vanishes at t = {t_small} or t = {t_large}")));
            }
            small.push(v_small / t_small);
            large.push(v_large / t_large);
        }
        if small.windows(2).any(|w| w[1] > w[0]) || small[small.len() - 1] >= small[0] {
            return Err(bad("phi(t)/t does not decrease towards 0 as t -> 0".into()));
        }
        if large.windows(2).any(|w| w[1] < w[0]) || large[large.len() - 1] <= large[0] {
            return Err(bad("phi(t)/t does not grow as t -> infinity".into()));
        }
        let skip_convexity = matches!(
            self.family,
            Family::Custom {
                declared_convex: true,
                ..
            }
        );
        if !skip_convexity {
            let top = 2f64.powi(depth.min(8));
            let n = 64;
            let grid: Vec<f64> = (0..=n).map(|i| top * i as f64 / n as f64).collect();
            for (i, &a) in grid.iter().enumerate() {
                for &b in &grid[i + 1..] {
                    let mid = self.eval(0.5 * (a + b))?;
                    let chord = 0.5 * (self.eval(a)? + self.eval(b)?);
                    if mid > chord * (1.0 + 1e-12) + f64::MIN_POSITIVE {
                        return Err(bad(format!("midpoint convexity fails on [{a}, {b}]")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `e^a - a - 1` for `a >= 0` without cancellation near zero.
fn exp_minus(a: f64) -> f64 {
    if a < 0.5 {
        // a^2/2! + a^3/3! + ...
        let mut term = a * a / 2.0;
        let mut sum = 0.0;
        let mut n = 2.0;
        while term > sum * f64::EPSILON * 0.25 {
            sum += term;
            n += 1.0;
            term *= a / n;
        }
        sum
    } else {
        a.exp_m1() - a
    }
}

/// `eval_phi(φ, t) = φ(|t|)`.
pub fn eval_phi(phi: &OrliczFunction, t: f64) -> Result<f64> {
    phi.eval(t)
}

/// A modular value `∫ φ(|f|) dμ`, possibly `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Modular(f64);

impl Modular {
    pub const INFINITE: Modular = Modular(f64::INFINITY);

    pub fn finite(v: f64) -> Self {
        debug_assert!(v >= 0.0);
        Modular(v)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl fmt::Display for Modular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "+inf")
        }
    }
}

fn check_samples<C: Carrier + ?Sized>(f: &[f64], carrier: &C) -> Result<Vec<f64>> {
    let weights = carrier.sample_weights();
    if weights.len() != f.len() {
        return Err(Error::InvalidArgument(format!(
            "function has {} samples but the carrier has {}",
            f.len(),
            weights.len()
        )));
    }
    if let Some((index, &value)) = f.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteFunction { index, value });
    }
    Ok(weights)
}

fn scaled_modular(phi: &OrliczFunction, f: &[f64], weights: &[f64], scale: f64) -> Result<Modular> {
    let mut sum = 0.0;
    for (&v, &w) in f.iter().zip(weights) {
        if w == 0.0 || v == 0.0 {
            continue;
        }
        sum += phi.eval(v / scale)? * w;
        if sum.is_infinite() {
            return Ok(Modular::INFINITE);
        }
    }
    Ok(Modular(sum))
}

/// `Σ φ(|f_i|) w_i` over the carrier's samples. Zero-weight samples are
/// skipped, so they never contribute even when `φ` overflows there.
pub fn modular<C: Carrier + ?Sized>(phi: &OrliczFunction, f: &[f64], carrier: &C) -> Result<Modular> {
    let weights = check_samples(f, carrier)?;
    scaled_modular(phi, f, &weights, 1.0)
}

/// Luxemburg norm `inf { k > 0 : ∫ φ(|f|/k) dμ <= 1 }` to relative accuracy
/// `tol`.
///
/// `k ↦ ∫ φ(|f|/k)` is nonincreasing, so the infimum is bracketed by
/// doubling/halving and then bisected. The returned value is the upper end
/// of the final bracket, so the modular at the result never exceeds one.
pub fn luxemburg_norm<C: Carrier + ?Sized>(
    phi: &OrliczFunction,
    f: &[f64],
    carrier: &C,
    tol: f64,
) -> Result<f64> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let weights = check_samples(f, carrier)?;
    let (max_abs, total) = f
        .iter()
        .zip(&weights)
        .filter(|(_, &w)| w > 0.0)
        .fold((0.0f64, 0.0f64), |(m, t), (v, w)| (m.max(v.abs()), t + w));
    if max_abs == 0.0 {
        return Ok(0.0);
    }
    let within = |k: f64| -> Result<bool> { Ok(scaled_modular(phi, f, &weights, k)?.value() <= 1.0) };

    let mut hi = max_abs * total.max(1.0);
    while !within(hi)? {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::InvalidArgument("norm bracket overflowed".into()));
        }
    }
    let mut lo = hi * 0.5;
    while within(lo)? {
        hi = lo;
        lo *= 0.5;
        if lo == 0.0 {
            return Ok(hi);
        }
    }
    for _ in 0..200 {
        if hi - lo <= tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if within(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `∫ φ(|f|) dμ < ∞`. Always true for finite-valued functions on the finite
/// carriers here; kept to make the Orlicz class / Orlicz space distinction
/// explicit.
pub fn orlicz_class_member<C: Carrier + ?Sized>(
    phi: &OrliczFunction,
    f: &[f64],
    carrier: &C,
) -> Result<bool> {
    let weights = carrier.sample_weights();
    if weights.len() != f.len() {
        return Err(Error::InvalidArgument(format!(
            "function has {} samples but the carrier has {}",
            f.len(),
            weights.len()
        )));
    }
    if f.iter().zip(&weights).any(|(v, &w)| w > 0.0 && !v.is_finite()) {
        return Ok(false);
    }
    Ok(scaled_modular(phi, f, &weights, 1.0)?.is_finite())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictSource {
    /// Known for the family; the sample is informational.
    Analytic,
    /// Inferred from the sample alone (custom functions).
    Sampled,
}

#[derive(Debug, Clone)]
pub struct Delta2Report {
    pub satisfied_on_sample: bool,
    pub max_ratio: f64,
    pub witness_u: f64,
    /// Left end of the checked range; plays the role of `u∘`.
    pub u_lo: f64,
    pub source: VerdictSource,
    /// `(u, φ(2u)/φ(u))` along the geometric grid.
    pub ratios: Vec<(f64, f64)>,
}

impl Delta2Report {
    /// True when the sampled ratios are nondecreasing and strictly larger at
    /// the right end than at the left: the blow-up pattern of a function
    /// outside `Δ₂`.
    pub fn ratios_blow_up(&self) -> bool {
        let r: Vec<f64> = self.ratios.iter().map(|&(_, r)| r).collect();
        r.windows(2).all(|w| w[1] >= w[0]) && r.last() > r.first()
    }
}

/// Relative growth of `φ(2u)/φ(u)` over the last quarter of the sample above
/// which the sampled verdict is "not satisfied".
const TAIL_GROWTH_LIMIT: f64 = 1e-3;

/// Samples `r(u) = φ(2u)/φ(u)` on a geometric grid over `[u_lo, u_hi]`.
///
/// The sampled verdict holds when the maximum ratio is finite and the ratio
/// is not still growing over the last quarter of the grid. No finite sample
/// decides `Δ₂`; builtin families override the verdict with the known answer
/// (power and power-log satisfy it, `e^t - t - 1` does not).
pub fn delta2_check(phi: &OrliczFunction, u_lo: f64, u_hi: f64, samples: usize) -> Result<Delta2Report> {
    if !(u_lo > 0.0 && u_lo < u_hi && u_hi.is_finite()) {
        return Err(Error::DegenerateRange { lo: u_lo, hi: u_hi });
    }
    if samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {samples}")));
    }
    let step = (u_hi / u_lo).ln() / (samples - 1) as f64;
    let mut ratios = Vec::with_capacity(samples);
    for i in 0..samples {
        let u = if i == samples - 1 {
            u_hi
        } else {
            u_lo * (step * i as f64).exp()
        };
        let denom = phi.eval(u)?;
        let r = if denom > 0.0 {
            phi.eval(2.0 * u)? / denom
        } else {
            f64::INFINITY
        };
        ratios.push((u, r));
    }
    let (witness_u, max_ratio) = ratios
        .iter()
        .copied()
        .fold((u_lo, f64::NEG_INFINITY), |best, (u, r)| if r > best.1 || r.is_nan() { (u, r) } else { best });
    let quarter = ratios[(3 * (samples - 1)) / 4].1;
    let last = ratios[samples - 1].1;
    let tail_growing = last > quarter * (1.0 + TAIL_GROWTH_LIMIT);
    let sampled = max_ratio.is_finite() && !tail_growing;

    let (satisfied_on_sample, source) = match phi.family {
        Family::Power(_) | Family::PowerLog(_) => (true, VerdictSource::Analytic),
        Family::ExpMinus => (false, VerdictSource::Analytic),
        Family::Custom { .. } => (sampled, VerdictSource::Sampled),
    };
    Ok(Delta2Report {
        satisfied_on_sample,
        max_ratio,
        witness_u,
        u_lo,
        source,
        ratios,
    })
}
