//! Finite atomic measure spaces with exact rational weights, self-maps of the
//! atoms, iterated pushforwards `μ_k = μ ∘ T^{-k}` and their Radon–Nikodym
//! derivatives `f_{T^k} = dμ_k/dμ`.
//!
//! The σ-algebra is the full power set, so every map is measurable and every
//! set is a union of atoms. All comparisons here are exact.

use std::collections::{BTreeSet, HashSet};

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::orlicz::Carrier;
use crate::rational::{self, Rational};

/// A set of atom indices.
pub type AtomSet = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicMeasureSpace {
    atoms: Vec<String>,
    weights: Vec<Rational>,
}

impl AtomicMeasureSpace {
    /// Rejects duplicate ids, negative weights, mismatched lengths and the
    /// all-zero measure.
    pub fn new(atoms: Vec<String>, weights: Vec<Rational>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::InvalidMeasureSpace(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidMeasureSpace("no atoms".into()));
        }
        let mut seen = HashSet::new();
        for id in &atoms {
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidMeasureSpace(format!("duplicate atom id `{id}`")));
            }
        }
        if let Some(i) = weights.iter().position(|w| w.is_negative()) {
            return Err(Error::InvalidMeasureSpace(format!(
                "atom `{}` has negative weight {}",
                atoms[i], weights[i]
            )));
        }
        if weights.iter().all(|w| w.is_zero()) {
            return Err(Error::InvalidMeasureSpace("all weights are zero".into()));
        }
        Ok(Self { atoms, weights })
    }

    /// Atoms named `"0"`, `"1"`, ... in order.
    pub fn from_weights(weights: Vec<Rational>) -> Result<Self> {
        let atoms = (0..weights.len()).map(|i| i.to_string()).collect();
        Self::new(atoms, weights)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> &Rational {
        &self.weights[atom]
    }

    pub fn is_null(&self, atom: usize) -> bool {
        self.weights[atom].is_zero()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == id)
    }

    /// Atoms of positive weight.
    pub fn support(&self) -> AtomSet {
        (0..self.len()).filter(|&a| !self.is_null(a)).collect()
    }

    pub fn total_mass(&self) -> Rational {
        self.weights.iter().sum()
    }

    pub fn measure_of<'a>(&self, set: impl IntoIterator<Item = &'a usize>) -> Rational {
        set.into_iter().map(|&a| &self.weights[a]).sum()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::CarrierMismatch {
                left: len,
                right: self.len(),
            });
        }
        Ok(())
    }
}

impl Carrier for AtomicMeasureSpace {
    fn sample_weights(&self) -> Vec<f64> {
        self.weights.iter().map(rational::to_f64).collect()
    }
}

/// A total self-map of the atoms, by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomMap {
    images: Vec<usize>,
}

impl AtomMap {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::InvalidAtomMap("empty map".into()));
        }
        if let Some((x, &a)) = images.iter().enumerate().find(|(_, &a)| a >= n) {
            return Err(Error::InvalidAtomMap(format!(
                "atom {x} maps to {a}, outside 0..{n}"
            )));
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, atom: usize) -> usize {
        self.images[atom]
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn after(&self, inner: &AtomMap) -> AtomMap {
        AtomMap {
            images: inner.images.iter().map(|&y| self.images[y]).collect(),
        }
    }

    /// `T^k` by k-fold composition; `T^0` is the identity.
    pub fn power(&self, k: usize) -> AtomMap {
        let mut acc = AtomMap::identity(self.len());
        for _ in 0..k {
            acc = self.after(&acc);
        }
        acc
    }

    pub fn preimage(&self, atom: usize) -> impl Iterator<Item = usize> + '_ {
        self.images
            .iter()
            .enumerate()
            .filter(move |(_, &a)| a == atom)
            .map(|(x, _)| x)
    }

    /// `T(Ω)` as a set of atoms.
    pub fn image(&self) -> AtomSet {
        self.images.iter().copied().collect()
    }
}

/// `(x, a)` with `μ({x}) > 0`, `T(x) = a` and `μ({a}) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingularWitness {
    pub preimage: usize,
    pub atom: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Nonsingularity {
    pub witness: Option<SingularWitness>,
}

impl Nonsingularity {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

/// `μ_k = μ ∘ T^{-k}` on atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushforwardMeasure {
    pub order: usize,
    pub weights: Vec<Rational>,
}

impl PushforwardMeasure {
    pub fn null_atoms(&self) -> AtomSet {
        (0..self.weights.len()).filter(|&a| self.weights[a].is_zero()).collect()
    }

    pub fn total_mass(&self) -> Rational {
        self.weights.iter().sum()
    }

    pub fn measure_of<'a>(&self, set: impl IntoIterator<Item = &'a usize>) -> Rational {
        set.into_iter().map(|&a| &self.weights[a]).sum()
    }
}

/// `f_{T^k} = dμ_k/dμ`, zero on null atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RNDerivative {
    pub order: usize,
    pub values: Vec<Rational>,
}

fn check_map(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<()> {
    space.check_len(map.len())
}

pub fn is_nonsingular(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<Nonsingularity> {
    check_map(map, space)?;
    let witness = (0..space.len())
        .find(|&x| !space.is_null(x) && space.is_null(map.apply(x)))
        .map(|x| SingularWitness {
            preimage: x,
            atom: map.apply(x),
        });
    Ok(Nonsingularity { witness })
}

pub fn pushforward(map: &AtomMap, space: &AtomicMeasureSpace, k: usize) -> Result<PushforwardMeasure> {
    check_map(map, space)?;
    if k == 0 {
        return Err(Error::InvalidArgument("pushforward order must be >= 1".into()));
    }
    let tk = map.power(k);
    let mut weights = vec![rational::zero(); space.len()];
    for (x, w) in space.weights().iter().enumerate() {
        weights[tk.apply(x)] += w;
    }
    Ok(PushforwardMeasure { order: k, weights })
}

/// Fails with `AbsoluteContinuityViolated` when a null atom of `μ` carries
/// `μ_k` mass, which only happens for singular maps.
pub fn rn_derivative(mu_k: &PushforwardMeasure, space: &AtomicMeasureSpace) -> Result<RNDerivative> {
    space.check_len(mu_k.weights.len())?;
    let values = mu_k
        .weights
        .iter()
        .zip(space.weights())
        .enumerate()
        .map(|(a, (mk, w))| {
            if w.is_zero() {
                if mk.is_zero() {
                    Ok(rational::zero())
                } else {
                    Err(Error::AbsoluteContinuityViolated { atom: a })
                }
            } else {
                Ok(mk / w)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RNDerivative {
        order: mu_k.order,
        values,
    })
}

/// `Ω_k = {a : f_{T^k}(a) = 0}`.
pub fn zero_set(d: &RNDerivative) -> AtomSet {
    (0..d.values.len()).filter(|&a| d.values[a].is_zero()).collect()
}

/// Mutual absolute continuity, which on atoms means equal null sets.
pub fn measures_equivalent(m1: &PushforwardMeasure, m2: &PushforwardMeasure) -> Result<bool> {
    if m1.weights.len() != m2.weights.len() {
        return Err(Error::CarrierMismatch {
            left: m1.weights.len(),
            right: m2.weights.len(),
        });
    }
    Ok(first_inequivalent_atom(m1, m2).is_none())
}

fn first_inequivalent_atom(m1: &PushforwardMeasure, m2: &PushforwardMeasure) -> Option<usize> {
    m1.weights
        .iter()
        .zip(&m2.weights)
        .position(|(a, b)| a.is_zero() != b.is_zero())
}

/// `dμ_k/dμ_{k+1}` per atom: the weight ratio where both are positive and 1
/// on the common null set. With it `f_{T^k} = factor · f_{T^{k+1}}` holds on
/// every atom; swapping the arguments gives the reverse identity.
pub fn rn_chain_factor(
    m_k: &PushforwardMeasure,
    m_k1: &PushforwardMeasure,
    space: &AtomicMeasureSpace,
) -> Result<Vec<Rational>> {
    space.check_len(m_k.weights.len())?;
    space.check_len(m_k1.weights.len())?;
    if let Some(atom) = first_inequivalent_atom(m_k, m_k1) {
        return Err(Error::NotEquivalent { atom });
    }
    Ok(m_k
        .weights
        .iter()
        .zip(&m_k1.weights)
        .map(|(a, b)| if b.is_zero() { rational::one() } else { a / b })
        .collect())
}

/// `μ(T^{-1}E) = μ(E)` for all `E`, i.e. `μ_1 = μ` atomwise.
pub fn is_measure_preserving(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<bool> {
    let mu1 = pushforward(map, space, 1)?;
    Ok(mu1.weights == space.weights())
}

/// `μ(T^{-1}E) >= μ(E)` for all `E`.
///
/// Checked atomwise: summing the singleton inequalities gives every `E`, and
/// a failing singleton is itself a violating set.
pub fn is_expansive(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<bool> {
    let mu1 = pushforward(map, space, 1)?;
    Ok(mu1.weights.iter().zip(space.weights()).all(|(m1, m)| m1 >= m))
}

/// `T(supp μ)`: the image of the map with null atoms discarded first.
///
/// A map is only determined up to null sets as far as `C_T` is concerned,
/// so surjectivity questions are asked of this set.
pub fn essential_image(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<AtomSet> {
    check_map(map, space)?;
    Ok(space.support().into_iter().map(|x| map.apply(x)).collect())
}

/// `μ(Ω \ T(supp μ)) = 0`.
pub fn is_essentially_surjective(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<bool> {
    let image = essential_image(map, space)?;
    Ok((0..space.len()).filter(|a| !image.contains(a)).all(|a| space.is_null(a)))
}
