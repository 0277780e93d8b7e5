//! Brute-force re-derivations of the answers in [`crate::analysis`] that never
//! look at Radon–Nikodym derivatives or measure equivalence, plus seeded
//! random instances for property tests.
//!
//! # Indicator probes
//!
//! On an atomic carrier a function `f` is the zero class iff it vanishes on
//! every positive-weight atom. Hence `f ∈ ker C_T` iff `f(T(x)) = 0` for every
//! positive-weight `x`, iff `f` vanishes on `T(supp μ)`. That condition
//! involves each atom separately, so `ker C_T` is spanned by the indicators
//! `e_a` it contains, and the set `{a : e_a ∈ ker C_T}` (positive-weight `a`
//! only, since `e_a` of a null atom is already zero) determines the kernel.
//! [`oracle_kernel`] computes exactly that set by composing `e_a` with `T`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measure::{AtomMap, AtomSet, AtomicMeasureSpace};
use crate::rational::{self, Rational};

/// Enumeration limit for [`oracle_expansive`].
pub const MAX_ENUMERATION_ATOMS: usize = 12;

fn check_nonsingular(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<()> {
    space.check_len(map.len())?;
    for x in 0..space.len() {
        let a = map.apply(x);
        if !space.is_null(x) && space.is_null(a) {
            return Err(Error::SingularTransformation { preimage: x, atom: a });
        }
    }
    Ok(())
}

/// `e_a ∘ T` vanishes μ-a.e.
fn indicator_killed(map: &AtomMap, space: &AtomicMeasureSpace, a: usize) -> bool {
    let composed: Vec<u8> = (0..space.len()).map(|x| u8::from(map.apply(x) == a)).collect();
    composed.iter().enumerate().all(|(x, &v)| v == 0 || space.is_null(x))
}

/// Positive-weight atoms `a` whose indicator lies in `ker C_T`.
pub fn oracle_kernel(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<AtomSet> {
    check_nonsingular(map, space)?;
    Ok((0..space.len())
        .filter(|&a| !space.is_null(a) && indicator_killed(map, space, a))
        .collect())
}

/// First `k` with `ker C_{T^k} = ker C_{T^{k+1}}`, composing the maps
/// explicitly. Gives up after `atoms + 1` steps.
pub fn oracle_ascent(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<usize> {
    oracle_ascent_bounded(map, space, space.len() + 1)
}

pub fn oracle_ascent_bounded(map: &AtomMap, space: &AtomicMeasureSpace, max_k: usize) -> Result<usize> {
    check_nonsingular(map, space)?;
    let mut t_k = map.clone();
    let mut ker_k = oracle_kernel(&t_k, space)?;
    for k in 1..=max_k {
        let t_next = map.after(&t_k);
        let ker_next = oracle_kernel(&t_next, space)?;
        if ker_k == ker_next {
            return Ok(k);
        }
        t_k = t_next;
        ker_k = ker_next;
    }
    Err(Error::AscentLimitExceeded { max_k })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansiveCheck {
    pub holds: bool,
    /// First violating `E` in bitmask order.
    pub witness: Option<AtomSet>,
}

/// `μ(T^{-1}E) >= μ(E)` over all `2^n` subsets, literally.
pub fn oracle_expansive(map: &AtomMap, space: &AtomicMeasureSpace) -> Result<ExpansiveCheck> {
    space.check_len(map.len())?;
    let n = space.len();
    if n > MAX_ENUMERATION_ATOMS {
        return Err(Error::TooManyAtoms {
            atoms: n,
            max: MAX_ENUMERATION_ATOMS,
        });
    }
    let in_set = |mask: u32, a: usize| mask & (1 << a) != 0;
    for mask in 0u32..(1 << n) {
        let mu_e: Rational = (0..n).filter(|&a| in_set(mask, a)).map(|a| space.weight(a)).sum();
        let mu_pre: Rational = (0..n)
            .filter(|&x| in_set(mask, map.apply(x)))
            .map(|x| space.weight(x))
            .sum();
        if mu_pre < mu_e {
            return Ok(ExpansiveCheck {
                holds: false,
                witness: Some((0..n).filter(|&a| in_set(mask, a)).collect()),
            });
        }
    }
    Ok(ExpansiveCheck {
        holds: true,
        witness: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub space: AtomicMeasureSpace,
    pub map: AtomMap,
}

/// Seeded source of random `(space, map)` pairs.
///
/// The stream is ChaCha8 (`rand_chacha` 0.3) seeded through
/// `seed_from_u64`. Each instance draws, in order: the atom count uniformly
/// from `1..=max_atoms`, each weight uniformly from `weight_pool`, then each
/// image uniformly from the atoms. Draws producing the all-zero measure, or a
/// singular map when `nonsingular_only` is set, are rejected and redrawn.
#[derive(Debug, Clone)]
pub struct InstanceGenerator {
    pub seed: u64,
    pub max_atoms: usize,
    pub weight_pool: Vec<Rational>,
    pub nonsingular_only: bool,
    /// Consecutive rejections tolerated before `RejectionExhausted`.
    pub rejection_cap: usize,
}

impl InstanceGenerator {
    pub fn new(seed: u64, max_atoms: usize) -> Self {
        Self {
            seed,
            max_atoms,
            weight_pool: default_weight_pool(),
            nonsingular_only: true,
            rejection_cap: 10_000,
        }
    }

    pub fn with_pool(mut self, pool: Vec<Rational>) -> Self {
        self.weight_pool = pool;
        self
    }

    pub fn allow_singular(mut self) -> Self {
        self.nonsingular_only = false;
        self
    }
}

/// `{0, 1/2, 1, 2, 3}`.
pub fn default_weight_pool() -> Vec<Rational> {
    vec![
        rational::zero(),
        rational::ratio(1, 2),
        rational::one(),
        rational::int(2),
        rational::int(3),
    ]
}

pub struct Instances {
    rng: ChaCha8Rng,
    config: InstanceGenerator,
}

/// Reproducible stream of instances; same configuration, same stream.
pub fn generate(gen: &InstanceGenerator) -> Result<Instances> {
    if gen.max_atoms == 0 || gen.max_atoms > MAX_ENUMERATION_ATOMS {
        return Err(Error::InvalidArgument(format!(
            "max_atoms must be in 1..={MAX_ENUMERATION_ATOMS}, got {}",
            gen.max_atoms
        )));
    }
    if gen.weight_pool.is_empty() {
        return Err(Error::InvalidArgument("weight pool is empty".into()));
    }
    Ok(Instances {
        rng: ChaCha8Rng::seed_from_u64(gen.seed),
        config: gen.clone(),
    })
}

impl Instances {
    fn draw(&mut self) -> Option<Instance> {
        let n = self.rng.gen_range(1..=self.config.max_atoms);
        let weights: Vec<Rational> = (0..n)
            .map(|_| self.config.weight_pool.choose(&mut self.rng).cloned().unwrap_or_default())
            .collect();
        let images: Vec<usize> = (0..n).map(|_| self.rng.gen_range(0..n)).collect();
        let space = AtomicMeasureSpace::from_weights(weights).ok()?;
        let map = AtomMap::new(images).ok()?;
        if self.config.nonsingular_only && check_nonsingular(&map, &space).is_err() {
            return None;
        }
        Some(Instance { space, map })
    }
}

impl Iterator for Instances {
    type Item = Result<Instance>;

    fn next(&mut self) -> Option<Self::Item> {
        for _ in 0..=self.config.rejection_cap {
            if let Some(instance) = self.draw() {
                return Some(Ok(instance));
            }
        }
        Some(Err(Error::RejectionExhausted {
            attempts: self.config.rejection_cap + 1,
        }))
    }
}

/// A uniformly random permutation of `n` atoms of weight 1.
pub fn random_equal_weight_permutation(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    let mut images: Vec<usize> = (0..n).collect();
    images.shuffle(rng);
    Instance {
        space: AtomicMeasureSpace::from_weights(vec![rational::one(); n]).expect("n >= 1"),
        map: AtomMap::new(images).expect("permutation is total"),
    }
}

/// Every nonsingular `(space, map)` with at most `max_atoms` atoms and weights
/// from `pool`.
pub fn exhaustive_instances(max_atoms: usize, pool: &[Rational]) -> Vec<Instance> {
    let mut out = Vec::new();
    for n in 1..=max_atoms {
        let weight_codes = pool.len().pow(n as u32);
        let map_codes = n.pow(n as u32);
        for wc in 0..weight_codes {
            let weights: Vec<Rational> = digits(wc, pool.len(), n).into_iter().map(|d| pool[d].clone()).collect();
            let Ok(space) = AtomicMeasureSpace::from_weights(weights) else {
                continue;
            };
            for mc in 0..map_codes {
                let map = AtomMap::new(digits(mc, n, n)).expect("digits are in range");
                if check_nonsingular(&map, &space).is_ok() {
                    out.push(Instance {
                        space: space.clone(),
                        map,
                    });
                }
            }
        }
    }
    out
}

fn digits(mut code: usize, base: usize, len: usize) -> Vec<usize> {
    (0..len)
        .map(|_| {
            let d = code % base;
            code /= base;
            d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn unit(n: usize) -> AtomicMeasureSpace {
        AtomicMeasureSpace::from_weights(vec![int(1); n]).unwrap()
    }

    fn map(images: &[usize]) -> AtomMap {
        AtomMap::new(images.to_vec()).unwrap()
    }

    fn set(v: &[usize]) -> AtomSet {
        v.iter().copied().collect()
    }

    #[test]
    fn kernel_examples() {
        assert!(oracle_kernel(&AtomMap::identity(3), &unit(3)).unwrap().is_empty());
        assert_eq!(oracle_kernel(&map(&[1, 2, 2]), &unit(3)).unwrap(), set(&[0]));
        // atom 1 has weight 2 and nothing maps to it
        let s = AtomicMeasureSpace::from_weights(vec![int(1), int(2), int(1)]).unwrap();
        assert_eq!(oracle_kernel(&map(&[0, 2, 0]), &s).unwrap(), set(&[1]));
    }

    #[test]
    fn kernel_rejects_singular() {
        let s = AtomicMeasureSpace::from_weights(vec![int(1), int(0)]).unwrap();
        assert!(oracle_kernel(&map(&[1, 1]), &s).is_err());
    }

    #[test]
    fn ascent_examples() {
        assert_eq!(oracle_ascent(&AtomMap::identity(4), &unit(4)).unwrap(), 1);
        assert_eq!(oracle_ascent(&map(&[1, 2, 2]), &unit(3)).unwrap(), 2);
        for m in 2..=8 {
            let chain: Vec<usize> = (0..m).map(|i| (i + 1).min(m - 1)).collect();
            assert_eq!(oracle_ascent(&map(&chain), &unit(m)).unwrap(), m - 1);
        }
        let chain: Vec<usize> = (0..6).map(|i| (i + 1).min(5)).collect();
        assert!(oracle_ascent_bounded(&map(&chain), &unit(6), 2).is_err());
    }

    #[test]
    fn expansive_examples() {
        assert!(oracle_expansive(&map(&[1, 2, 0]), &unit(3)).unwrap().holds);
        let c = oracle_expansive(&map(&[0, 0]), &unit(2)).unwrap();
        assert!(!c.holds);
        assert_eq!(c.witness, Some(set(&[1])));
        let uneven = AtomicMeasureSpace::from_weights(vec![int(1), int(2)]).unwrap();
        assert!(!oracle_expansive(&map(&[1, 1]), &uneven).unwrap().holds);
        assert!(matches!(
            oracle_expansive(&AtomMap::identity(13), &unit(13)),
            Err(Error::TooManyAtoms { .. })
        ));
    }

    #[test]
    fn generator_is_deterministic() {
        let gen = InstanceGenerator::new(7, 5);
        let a: Vec<_> = generate(&gen).unwrap().take(50).map(|r| r.unwrap()).collect();
        let b: Vec<_> = generate(&gen).unwrap().take(50).map(|r| r.unwrap()).collect();
        assert_eq!(a, b);
        let c: Vec<_> = generate(&InstanceGenerator::new(8, 5)).unwrap().take(50).map(|r| r.unwrap()).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn generator_emits_only_nonsingular() {
        let gen = InstanceGenerator::new(3, 8);
        for inst in generate(&gen).unwrap().take(300) {
            let inst = inst.unwrap();
            assert!(check_nonsingular(&inst.map, &inst.space).is_ok());
            assert!(inst.space.len() <= 8);
        }
    }

    #[test]
    fn pool_without_zero_never_rejects() {
        let mut gen = InstanceGenerator::new(11, 6).with_pool(vec![int(1), int(2)]);
        gen.rejection_cap = 0;
        for inst in generate(&gen).unwrap().take(200) {
            assert!(inst.is_ok());
        }
    }

    #[test]
    fn pathological_pool_exhausts() {
        let mut gen = InstanceGenerator::new(1, 3).with_pool(vec![int(0)]);
        gen.rejection_cap = 5;
        assert_eq!(
            generate(&gen).unwrap().next().unwrap(),
            Err(Error::RejectionExhausted { attempts: 6 })
        );
    }

    #[test]
    fn generator_config_validation() {
        assert!(generate(&InstanceGenerator::new(0, 0)).is_err());
        assert!(generate(&InstanceGenerator::new(0, 13)).is_err());
        assert!(generate(&InstanceGenerator::new(0, 3).with_pool(vec![])).is_err());
    }

    #[test]
    fn exhaustive_sweep_size() {
        let pool = vec![int(0), int(1), int(2)];
        let all = exhaustive_instances(3, &pool);
        // n = 1: two nonzero weights, one map each
        assert_eq!(all.iter().filter(|i| i.space.len() == 1).count(), 2);
        assert!(all.iter().all(|i| check_nonsingular(&i.map, &i.space).is_ok()));
        // all-positive weight vectors admit every map: 2^3 * 27 for n = 3
        let positive = all
            .iter()
            .filter(|i| i.space.len() == 3 && i.space.support().len() == 3)
            .count();
        assert_eq!(positive, 8 * 27);
    }
}
