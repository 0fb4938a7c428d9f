//! Exact probability distributions on finite Abelian groups.
//!
//! Weights are arbitrary-precision rationals. Computations that sum many
//! products of weights (convolution, joint laws of linear forms) first put
//! each distribution over a common denominator; when that denominator fits in
//! 64 bits all masses are accumulated in `u128`, which cannot overflow because
//! the total mass of a product law is exactly the product of the two
//! denominators.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::hash::Hash;
use std::ops::{AddAssign, Mul};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::group::{Endomorphism, FiniteAbelianGroup, GroupElement, Subgroup};

/// Evaluates `$body` with `$a`, `$b` bound to scaled forms of two
/// distributions, using the `u128` representation when both fit.
macro_rules! with_scaled_pair {
    ($mu:expr, $nu:expr, |$a:ident, $b:ident| $body:expr) => {{
        match ($mu.scaled_small(), $nu.scaled_small()) {
            (Some($a), Some($b)) => $body,
            _ => {
                let ($a, $b) = ($mu.scaled_big(), $nu.scaled_big());
                $body
            }
        }
    }};
}

/// Default threshold below which a characteristic function counts as vanishing.
pub const DEFAULT_NONVANISHING_TOL: f64 = 1e-9;

/// Default tolerance for identities that hold exactly up to roundoff.
pub const DEFAULT_IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupDistribution {
    group: FiniteAbelianGroup,
    // Only strictly positive weights are stored, so the key set is the support.
    weights: BTreeMap<usize, BigRational>,
}

impl GroupDistribution {
    /// Validates weights keyed by elements. Repeated keys are summed; zero
    /// weights are dropped. No renormalization happens.
    pub fn new<I>(group: &FiniteAbelianGroup, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (GroupElement, BigRational)>,
    {
        let mut indexed = Vec::new();
        for (x, w) in weights {
            group.check(&x)?;
            indexed.push((group.index_of(&x), w));
        }
        Self::from_indexed(group, indexed)
    }

    pub fn from_indexed<I>(group: &FiniteAbelianGroup, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, BigRational)>,
    {
        let mut map: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (i, w) in weights {
            if i >= group.order() {
                return Err(Error::InvalidElement(format!("index {i} out of range")));
            }
            if w.is_negative() {
                return Err(Error::NotAProbability(format!(
                    "negative weight {w} at {}",
                    group.element_at(i)
                )));
            }
            *map.entry(i).or_insert_with(BigRational::zero) += w;
        }
        map.retain(|_, w| !w.is_zero());
        let total: BigRational = map.values().sum();
        if !total.is_one() {
            return Err(Error::NotAProbability(format!("weights sum to {total}, not 1")));
        }
        Ok(GroupDistribution {
            group: group.clone(),
            weights: map,
        })
    }

    /// The point mass `E_x`.
    pub fn degenerate(group: &FiniteAbelianGroup, x: &GroupElement) -> Result<Self> {
        group.check(x)?;
        Ok(Self::degenerate_idx(group, group.index_of(x)))
    }

    pub(crate) fn degenerate_idx(group: &FiniteAbelianGroup, idx: usize) -> Self {
        GroupDistribution {
            group: group.clone(),
            weights: BTreeMap::from([(idx, BigRational::one())]),
        }
    }

    /// Uniform (Haar) distribution on a subgroup.
    pub fn uniform_on(sub: &Subgroup) -> Self {
        let w = BigRational::new(BigInt::one(), BigInt::from(sub.len()));
        GroupDistribution {
            group: sub.group().clone(),
            weights: sub.members().iter().map(|&m| (m, w.clone())).collect(),
        }
    }

    pub fn uniform(group: &FiniteAbelianGroup) -> Self {
        Self::uniform_on(&Subgroup::whole(group))
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn weight(&self, x: &GroupElement) -> BigRational {
        if !self.group.contains(x) {
            return BigRational::zero();
        }
        self.weight_idx(self.group.index_of(x))
    }

    pub fn weight_idx(&self, idx: usize) -> BigRational {
        self.weights.get(&idx).cloned().unwrap_or_else(BigRational::zero)
    }

    /// `(index, weight)` pairs of the support, in lexicographic order.
    pub fn atoms(&self) -> impl Iterator<Item = (usize, &BigRational)> {
        self.weights.iter().map(|(&i, w)| (i, w))
    }

    pub fn support_indices(&self) -> Vec<usize> {
        self.weights.keys().copied().collect()
    }

    pub fn support(&self) -> Vec<GroupElement> {
        self.weights.keys().map(|&i| self.group.element_at(i)).collect()
    }

    /// Lexicographically smallest support element.
    pub fn min_support_idx(&self) -> usize {
        *self.weights.keys().next().expect("a probability has non-empty support")
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.weights.len() == 1
    }

    pub fn is_supported_in(&self, sub: &Subgroup) -> bool {
        sub.group() == &self.group && self.weights.keys().all(|&i| sub.contains_idx(i))
    }

    fn same_group(&self, other: &GroupDistribution) -> Result<()> {
        if self.group == other.group {
            Ok(())
        } else {
            Err(Error::GroupMismatch)
        }
    }

    /// `(mu * nu)(z) = sum_x mu(z - x) nu(x)`.
    pub fn convolve(&self, other: &GroupDistribution) -> Result<GroupDistribution> {
        self.same_group(other)?;
        let g = &self.group;
        let weights = with_scaled_pair!(self, other, |a, b| {
            let tally = product_tally(&a, &b, |x, y| g.add_idx(x, y));
            let denom = a.denom.clone() * b.denom.clone();
            rationals_from_tally(tally, &denom)
        });
        Ok(GroupDistribution {
            group: g.clone(),
            weights,
        })
    }

    /// `mu`-bar: the law of `-xi`.
    pub fn reflect(&self) -> GroupDistribution {
        GroupDistribution {
            group: self.group.clone(),
            weights: self
                .weights
                .iter()
                .map(|(&i, w)| (self.group.neg_idx(i), w.clone()))
                .collect(),
        }
    }

    /// `mu * E_x`: the law of `xi + x`.
    pub fn shift(&self, x: &GroupElement) -> Result<GroupDistribution> {
        self.group.check(x).map_err(|_| Error::GroupMismatch)?;
        Ok(self.shift_idx(self.group.index_of(x)))
    }

    pub(crate) fn shift_idx(&self, x: usize) -> GroupDistribution {
        GroupDistribution {
            group: self.group.clone(),
            weights: self
                .weights
                .iter()
                .map(|(&i, w)| (self.group.add_idx(i, x), w.clone()))
                .collect(),
        }
    }

    /// Law of `e(xi)`.
    pub fn pushforward(&self, e: &Endomorphism) -> Result<GroupDistribution> {
        if e.group() != &self.group {
            return Err(Error::GroupMismatch);
        }
        let mut weights: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (&i, w) in &self.weights {
            *weights.entry(e.apply_idx(i)).or_insert_with(BigRational::zero) += w;
        }
        Ok(GroupDistribution {
            group: self.group.clone(),
            weights,
        })
    }

    pub(crate) fn float_atoms(&self) -> Vec<(usize, f64)> {
        self.weights
            .iter()
            .map(|(&i, w)| (i, w.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    /// `mu-hat(y) = sum_x mu(x) (x, y)` for every character `y`.
    pub fn char_fn(&self) -> CharFunction {
        let g = &self.group;
        let atoms = self.float_atoms();
        let values = (0..g.order())
            .map(|y| {
                atoms
                    .iter()
                    .map(|&(x, w)| g.pairing_idx(x, y) * w)
                    .sum::<Complex64>()
            })
            .collect();
        CharFunction {
            group: g.clone(),
            values,
        }
    }

    /// `|mu-hat(y)| > tol` for every `y`.
    pub fn has_nonvanishing_cf(&self, tol: f64) -> bool {
        self.char_fn().min_modulus() > tol
    }

    /// Exact test of `|mu-hat(y)| = 1` on `h`: the pairing with each `y` in `h`
    /// must take a single value across the support.
    pub fn is_unimodular_on(&self, h: &Subgroup) -> Result<bool> {
        if h.group() != &self.group {
            return Err(Error::GroupMismatch);
        }
        let g = &self.group;
        let base = self.min_support_idx();
        Ok(h.members().iter().all(|&y| {
            let phase = g.pairing_phase_idx(base, y);
            self.weights
                .keys()
                .all(|&x| g.pairing_phase_idx(x, y) == phase)
        }))
    }

    /// Weights rendered as `"[..]" -> "p/q"`, the config representation.
    pub fn weight_strings(&self) -> BTreeMap<String, String> {
        self.weights
            .iter()
            .map(|(&i, w)| (self.group.element_at(i).to_string(), w.to_string()))
            .collect()
    }
}

/// A complex function on the character group, usually a Fourier transform.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFunction {
    group: FiniteAbelianGroup,
    values: Vec<Complex64>,
}

impl CharFunction {
    pub fn from_values(group: &FiniteAbelianGroup, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        Ok(CharFunction {
            group: group.clone(),
            values,
        })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, y: &GroupElement) -> Complex64 {
        self.values[self.group.index_of(y)]
    }

    pub fn at_idx(&self, y: usize) -> Complex64 {
        self.values[y]
    }

    pub fn min_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn pointwise_mul(&self, other: &CharFunction) -> Result<CharFunction> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        Ok(CharFunction {
            group: self.group.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn conj(&self) -> CharFunction {
        CharFunction {
            group: self.group.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &CharFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Inverse transform `f(x) = |G|^-1 sum_y f-hat(y) conj((x, y))`; returns
    /// one complex value per element.
    pub fn inverse(&self) -> Vec<Complex64> {
        let g = &self.group;
        let n = g.order() as f64;
        (0..g.order())
            .map(|x| {
                self.values
                    .iter()
                    .enumerate()
                    .map(|(y, v)| v * g.pairing_idx(x, y).conj())
                    .sum::<Complex64>()
                    / n
            })
            .collect()
    }
}

/// Integer masses over a common denominator.
pub(crate) trait Mass: Clone + Eq + Hash + Debug + Zero + AddAssign + Mul<Output = Self> {
    fn to_big(&self) -> BigUint;

    /// `a * b == c * d`, without overflow.
    fn products_equal(a: &Self, b: &Self, c: &Self, d: &Self) -> bool {
        a.to_big() * b.to_big() == c.to_big() * d.to_big()
    }
}

impl Mass for u128 {
    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }

    fn products_equal(a: &Self, b: &Self, c: &Self, d: &Self) -> bool {
        match (a.checked_mul(*b), c.checked_mul(*d)) {
            (Some(l), Some(r)) => l == r,
            _ => a.to_big() * b.to_big() == c.to_big() * d.to_big(),
        }
    }
}

impl Mass for BigUint {
    fn to_big(&self) -> BigUint {
        self.clone()
    }
}

pub(crate) struct Scaled<T> {
    pub denom: T,
    pub atoms: Vec<(usize, T)>,
}

impl GroupDistribution {
    fn common_denominator(&self) -> BigUint {
        self.weights
            .values()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()))
            .to_biguint()
            .expect("denominators are positive")
    }

    fn scaled_with(&self, denom: &BigUint) -> Vec<(usize, BigUint)> {
        let d = BigInt::from(denom.clone());
        self.weights
            .iter()
            .map(|(&i, w)| {
                let num = (w * BigRational::from_integer(d.clone())).to_integer();
                (i, num.to_biguint().expect("weights are non-negative"))
            })
            .collect()
    }

    pub(crate) fn scaled_small(&self) -> Option<Scaled<u128>> {
        let denom = self.common_denominator();
        let d = u64::try_from(&denom).ok()?;
        let atoms = self
            .scaled_with(&denom)
            .into_iter()
            .map(|(i, n)| (i, u128::try_from(&n).expect("numerator is at most the denominator")))
            .collect();
        Some(Scaled {
            denom: d as u128,
            atoms,
        })
    }

    pub(crate) fn scaled_big(&self) -> Scaled<BigUint> {
        let denom = self.common_denominator();
        let atoms = self.scaled_with(&denom);
        Scaled { denom, atoms }
    }
}


/// Masses of the product law pushed through `key`.
pub(crate) fn product_tally<T: Mass, K: Eq + Hash>(
    a: &Scaled<T>,
    b: &Scaled<T>,
    key: impl Fn(usize, usize) -> K,
) -> HashMap<K, T> {
    let mut tally: HashMap<K, T> = HashMap::with_capacity(a.atoms.len() * b.atoms.len());
    for (x, wx) in &a.atoms {
        for (y, wy) in &b.atoms {
            *tally.entry(key(*x, *y)).or_insert_with(T::zero) += wx.clone() * wy.clone();
        }
    }
    tally
}

pub(crate) fn rationals_from_tally<T: Mass>(
    tally: HashMap<usize, T>,
    denom: &T,
) -> BTreeMap<usize, BigRational> {
    let d = BigInt::from(denom.to_big());
    tally
        .into_iter()
        .filter(|(_, m)| !m.is_zero())
        .map(|(k, m)| (k, BigRational::new(BigInt::from(m.to_big()), d.clone())))
        .collect()
}
