//! Kernel, injectivity and ascent of `C_T` on an atomic carrier, decided
//! through Radon–Nikodym derivatives of the pushforwards `μ_k`.
//!
//! On an atomic space every function lies in every Orlicz–Sobolev space, so
//! `W^{1,φ}(Ω∘)` is the span of the positive-weight atoms of `Ω∘` and none of
//! the answers depend on `φ`.

use num::Zero;

use crate::error::{Error, Result};
use crate::measure::{
    self, AtomMap, AtomSet, AtomicMeasureSpace, Nonsingularity, PushforwardMeasure, RNDerivative,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelDescription {
    /// `Ω∘ = {f_T = 0}`, null atoms included.
    pub omega0: AtomSet,
    /// Positive-weight atoms of `Ω∘`.
    pub kernel_dimension: usize,
    /// `μ(Ω \ Ω∘) = 0`.
    pub is_zero_operator: bool,
}

impl KernelDescription {
    /// `Ω∘` restricted to atoms of positive weight; spans `ker C_T`.
    pub fn basis(&self, space: &AtomicMeasureSpace) -> AtomSet {
        self.omega0.iter().copied().filter(|&a| !space.is_null(a)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InjectivityVerdict {
    pub kernel_trivial: bool,
    pub essentially_surjective: bool,
}

impl InjectivityVerdict {
    pub fn injective(&self) -> bool {
        self.kernel_trivial
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AscentResult {
    pub ascent: usize,
    /// `Ω_ascent`, equal to every later `Ω_n`.
    pub stabilized_zero_set: AtomSet,
    /// `Ω_1, …, Ω_{ascent+1}`.
    pub certificate: Vec<AtomSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisReport {
    pub nonsingular: Nonsingularity,
    pub measure_preserving: bool,
    pub expansive: bool,
    /// `μ_1`; present only for nonsingular maps, like every field below.
    pub pushforward: Option<PushforwardMeasure>,
    pub rn_derivative: Option<RNDerivative>,
    pub kernel: Option<KernelDescription>,
    pub injective: Option<bool>,
    pub essentially_surjective: Option<bool>,
    pub ascent: Option<AscentResult>,
}

fn require_nonsingular(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<()> {
    match measure::is_nonsingular(map, space)?.witness {
        Some(w) => Err(Error::SingularTransformation {
            preimage: w.preimage,
            atom: w.atom,
        }),
        None => Ok(()),
    }
}

fn zero_set_of(map: &AtomMap, space: &AtomicMeasureSpace, k: usize) -> Result<(PushforwardMeasure, AtomSet)> {
    let mu_k = measure::pushforward(map, space, k)?;
    let f = measure::rn_derivative(&mu_k, space)?;
    Ok((mu_k, measure::zero_set(&f)))
}

/// `ker C_T` as `Ω∘`.
pub fn kernel(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<KernelDescription> {
    require_nonsingular(map, space)?;
    let mu1 = measure::pushforward(map, space, 1)?;
    let f_t = measure::rn_derivative(&mu1, space)?;
    let omega0 = measure::zero_set(&f_t);
    let kernel_dimension = omega0.iter().filter(|&&a| !space.is_null(a)).count();
    let outside: Vec<usize> = (0..space.len()).filter(|a| !omega0.contains(a)).collect();
    let is_zero_operator = space.measure_of(&outside).is_zero();
    Ok(KernelDescription {
        omega0,
        kernel_dimension,
        is_zero_operator,
    })
}

/// Computes kernel triviality and essential surjectivity independently and
/// fails with `TheoremViolation` if they disagree.
pub fn is_injective(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<InjectivityVerdict> {
    let verdict = InjectivityVerdict {
        kernel_trivial: kernel(map, space)?.kernel_dimension == 0,
        essentially_surjective: measure::is_essentially_surjective(map, space)?,
    };
    if verdict.kernel_trivial != verdict.essentially_surjective {
        return Err(Error::TheoremViolation(format!(
            "kernel trivial = {} but essentially surjective = {}",
            verdict.kernel_trivial, verdict.essentially_surjective
        )));
    }
    Ok(verdict)
}

/// First `k` with `μ_k` and `μ_{k+1}` equivalent.
pub fn ascent(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<AscentResult> {
    ascent_bounded(map, space, None)
}

/// As [`ascent`], giving up with `AscentLimitExceeded` once `k` passes
/// `max_k`. Without a limit the search stops at the atom count, which bounds
/// the ascent on a finite carrier since `Ω_1 ⊆ Ω_2 ⊆ …` can only grow that
/// many times; running past it is reported as a `TheoremViolation`.
pub fn ascent_bounded(map: &AtomMap, space: &AtomicMeasureSpace, max_k: Option<usize>) -> Result<AscentResult> {
    require_nonsingular(map, space)?;
    let bound = space.len();
    let (mut mu_k, omega_1) = zero_set_of(map, space, 1)?;
    let mut certificate = vec![omega_1];
    let mut k = 1;
    loop {
        if let Some(limit) = max_k {
            if k > limit {
                return Err(Error::AscentLimitExceeded { max_k: limit });
            }
        }
        if k > bound {
            return Err(Error::TheoremViolation(format!(
                "measure chain did not stabilise within {bound} steps"
            )));
        }
        let (mu_next, omega_next) = zero_set_of(map, space, k + 1)?;
        let omega_k = &certificate[k - 1];
        if !omega_k.is_subset(&omega_next) {
            return Err(Error::TheoremViolation(format!(
                "zero sets not nested: Ω_{k} ⊄ Ω_{}",
                k + 1
            )));
        }
        let equivalent = measure::measures_equivalent(&mu_k, &mu_next)?;
        if equivalent != (*omega_k == omega_next) {
            return Err(Error::TheoremViolation(format!(
                "at k = {k}: measure equivalence and zero-set equality disagree"
            )));
        }
        certificate.push(omega_next);
        if equivalent {
            break;
        }
        mu_k = mu_next;
        k += 1;
    }
    let stabilized = certificate[k - 1].clone();
    for extra in k + 2..=k + 3 {
        let (_, later) = zero_set_of(map, space, extra)?;
        if later != stabilized {
            return Err(Error::TheoremViolation(format!(
                "kernel chain moved again at n = {extra} after stabilising at k = {k}"
            )));
        }
    }
    Ok(AscentResult {
        ascent: k,
        stabilized_zero_set: stabilized,
        certificate,
    })
}

/// Runs every procedure and cross-checks the results. Singular maps get a
/// report with only the nonsingularity witness and the measure-theoretic
/// flags filled in.
pub fn analyze(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<AnalysisReport> {
    let nonsingular = measure::is_nonsingular(map, space)?;
    let measure_preserving = measure::is_measure_preserving(map, space)?;
    let expansive = measure::is_expansive(map, space)?;
    if !nonsingular.holds() {
        return Ok(AnalysisReport {
            nonsingular,
            measure_preserving,
            expansive,
            pushforward: None,
            rn_derivative: None,
            kernel: None,
            injective: None,
            essentially_surjective: None,
            ascent: None,
        });
    }
    let mu1 = measure::pushforward(map, space, 1)?;
    let f_t = measure::rn_derivative(&mu1, space)?;
    let kernel = kernel(map, space)?;
    let verdict = is_injective(map, space)?;
    let ascent = ascent(map, space)?;

    let violation = |what: &str| Err(Error::TheoremViolation(what.to_string()));
    if measure_preserving && ascent.ascent != 1 {
        return violation("measure-preserving map with ascent > 1");
    }
    if expansive && ascent.ascent != 1 {
        return violation("expansive map with ascent > 1");
    }
    if verdict.essentially_surjective && ascent.ascent != 1 {
        return violation("essentially surjective map with ascent > 1");
    }
    if ascent.ascent > space.len() {
        return violation("ascent exceeds the atom count");
    }
    if kernel.omega0 != ascent.certificate[0] {
        return violation("Ω∘ differs from Ω_1");
    }

    Ok(AnalysisReport {
        nonsingular,
        measure_preserving,
        expansive,
        pushforward: Some(mu1),
        rn_derivative: Some(f_t),
        kernel: Some(kernel),
        injective: Some(verdict.injective()),
        essentially_surjective: Some(verdict.essentially_surjective),
        ascent: Some(ascent),
    })
}
