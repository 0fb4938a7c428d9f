//! Finite Abelian groups as ordered products of cyclic factors.
//!
//! A group `Z(n_1) x ... x Z(n_k)` is identified with its character group:
//! the character `y` acts on `x` by `exp(2 pi i sum_i x_i y_i / n_i)`, so
//! elements and characters share one coordinate representation. Elements are
//! also addressed by a mixed-radix index whose natural order coincides with
//! the lexicographic order on coordinates; the hot loops in the rest of the
//! crate work on indices.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use rand::Rng;

use crate::error::{Error, Result};

/// Upper bound on the order of groups the crate accepts. Every algorithm here
/// enumerates the group, so anything larger is not a desk-scale object.
pub const MAX_ORDER: usize = 1 << 24;

/// Rejection-sampling bound for [`random_automorphism`].
pub const AUTOMORPHISM_RETRY_BOUND: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
    strides: Vec<usize>,
    order: usize,
    exponent: u64,
}

/// An element of a [`FiniteAbelianGroup`] (equivalently, a character of it).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    coords: Vec<u64>,
}

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for GroupElement {
    type Err = Error;

    /// Parses the `"[1,3]"` form. Range checking against a group happens in
    /// [`FiniteAbelianGroup::element`].
    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::InvalidElement(format!("expected \"[..]\", got {s:?}")))?;
        let coords = inner
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidElement(format!("bad coordinate {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupElement { coords })
    }
}

impl FiniteAbelianGroup {
    pub fn new(factors: &[u64]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidGroupSpec("factor list is empty".into()));
        }
        if let Some(bad) = factors.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGroupSpec(format!("factor {bad} is below 2")));
        }
        let mut order: usize = 1;
        for &n in factors {
            order = usize::try_from(n)
                .ok()
                .and_then(|n| order.checked_mul(n))
                .filter(|&o| o <= MAX_ORDER)
                .ok_or_else(|| {
                    Error::InvalidGroupSpec(format!("order exceeds the supported maximum {MAX_ORDER}"))
                })?;
        }
        let mut strides = vec![1usize; factors.len()];
        for i in (0..factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1] as usize;
        }
        let exponent = factors.iter().fold(1u64, |acc, &n| acc.lcm(&n));
        Ok(FiniteAbelianGroup {
            factors: factors.to_vec(),
            strides,
            order,
            exponent,
        })
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Least common multiple of the factors; every pairing value is an
    /// `exponent`-th root of unity.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.rank()],
        }
    }

    /// Builds an element from coordinates that must already be reduced.
    pub fn element(&self, coords: &[u64]) -> Result<GroupElement> {
        if coords.len() != self.rank() {
            return Err(Error::InvalidElement(format!(
                "element has {} coordinates, group has {} factors",
                coords.len(),
                self.rank()
            )));
        }
        for (c, n) in coords.iter().zip(&self.factors) {
            if c >= n {
                return Err(Error::InvalidElement(format!(
                    "coordinate {c} out of range for Z({n})"
                )));
            }
        }
        Ok(GroupElement {
            coords: coords.to_vec(),
        })
    }

    /// Builds an element from arbitrary integers, reducing each coordinate.
    pub fn reduce(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.rank() {
            return Err(Error::InvalidElement(format!(
                "element has {} coordinates, group has {} factors",
                coords.len(),
                self.rank()
            )));
        }
        Ok(GroupElement {
            coords: coords
                .iter()
                .zip(&self.factors)
                .map(|(&c, &n)| c.rem_euclid(n as i64) as u64)
                .collect(),
        })
    }

    pub fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let raw: GroupElement = s.parse()?;
        self.element(&raw.coords)
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        x.coords.len() == self.rank() && x.coords.iter().zip(&self.factors).all(|(c, n)| c < n)
    }

    pub(crate) fn check(&self, x: &GroupElement) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::InvalidElement(format!("{x} is not an element of Z{:?}", self.factors)))
        }
    }

    pub fn index_of(&self, x: &GroupElement) -> usize {
        x.coords
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c as usize * s)
            .sum()
    }

    pub fn element_at(&self, mut idx: usize) -> GroupElement {
        let mut coords = vec![0u64; self.rank()];
        for i in (0..self.rank()).rev() {
            let n = self.factors[i] as usize;
            coords[i] = (idx % n) as u64;
            idx /= n;
        }
        GroupElement { coords }
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(|i| self.element_at(i))
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        GroupElement {
            coords: x
                .coords
                .iter()
                .zip(&y.coords)
                .zip(&self.factors)
                .map(|((a, b), n)| (a + b) % n)
                .collect(),
        }
    }

    pub fn neg(&self, x: &GroupElement) -> GroupElement {
        GroupElement {
            coords: x
                .coords
                .iter()
                .zip(&self.factors)
                .map(|(a, n)| (n - a) % n)
                .collect(),
        }
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        self.add(x, &self.neg(y))
    }

    pub fn scale(&self, k: i64, x: &GroupElement) -> GroupElement {
        GroupElement {
            coords: x
                .coords
                .iter()
                .zip(&self.factors)
                .map(|(&a, &n)| mul_mod_signed(k, a, n))
                .collect(),
        }
    }

    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b, mut out) = (a, b, 0usize);
        for i in (0..self.rank()).rev() {
            let n = self.factors[i] as usize;
            out += ((a % n + b % n) % n) * self.strides[i];
            a /= n;
            b /= n;
        }
        out
    }

    pub fn neg_idx(&self, a: usize) -> usize {
        let (mut a, mut out) = (a, 0usize);
        for i in (0..self.rank()).rev() {
            let n = self.factors[i] as usize;
            out += ((n - a % n) % n) * self.strides[i];
            a /= n;
        }
        out
    }

    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        self.add_idx(a, self.neg_idx(b))
    }

    /// Exact pairing phase: `(x, y) = exp(2 pi i r / exponent)` with `r` the
    /// returned residue in `[0, exponent)`.
    pub fn pairing_phase(&self, x: &GroupElement, y: &GroupElement) -> u64 {
        let l = self.exponent as u128;
        let mut r: u128 = 0;
        for ((&a, &b), &n) in x.coords.iter().zip(&y.coords).zip(&self.factors) {
            r = (r + (a as u128 * b as u128 % n as u128) * (l / n as u128)) % l;
        }
        r as u64
    }

    pub fn pairing_phase_idx(&self, x: usize, y: usize) -> u64 {
        let l = self.exponent as u128;
        let (mut x, mut y, mut r) = (x, y, 0u128);
        for i in (0..self.rank()).rev() {
            let n = self.factors[i] as usize;
            let (a, b) = ((x % n) as u128, (y % n) as u128);
            r = (r + (a * b % n as u128) * (l / n as u128)) % l;
            x /= n;
            y /= n;
        }
        r as u64
    }

    pub fn phase_to_complex(&self, r: u64) -> Complex64 {
        root_of_unity(r, self.exponent)
    }

    /// The value of the character `y` at the element `x`.
    pub fn pairing(&self, x: &GroupElement, y: &GroupElement) -> Complex64 {
        self.phase_to_complex(self.pairing_phase(x, y))
    }

    pub fn pairing_idx(&self, x: usize, y: usize) -> Complex64 {
        self.phase_to_complex(self.pairing_phase_idx(x, y))
    }

    /// True iff every factor is odd, i.e. the group has no element of order 2.
    pub fn is_order2_free(&self) -> bool {
        self.factors.iter().all(|n| n % 2 == 1)
    }

    /// Surjectivity of `x -> 2x`, decided by enumerating the image.
    pub fn doubling_is_surjective(&self) -> bool {
        let mut hit = vec![false; self.order];
        for i in 0..self.order {
            hit[self.add_idx(i, i)] = true;
        }
        hit.into_iter().all(|h| h)
    }

    /// Number of solutions of `2x = 0`.
    pub fn two_torsion_count(&self) -> usize {
        (0..self.order).filter(|&i| self.add_idx(i, i) == 0).count()
    }

    /// `A(X, H)`: the elements on which every character of `h` is trivial.
    pub fn annihilator(&self, h: &Subgroup) -> Result<Subgroup> {
        if h.group() != self {
            return Err(Error::GroupMismatch);
        }
        let members = (0..self.order)
            .filter(|&x| h.members().iter().all(|&y| self.pairing_phase_idx(x, y) == 0))
            .collect();
        Ok(Subgroup::from_sorted_unchecked(self.clone(), members))
    }
}

pub(crate) fn mul_mod_signed(k: i64, a: u64, n: u64) -> u64 {
    let k = k.rem_euclid(n as i64) as u128;
    ((k * a as u128) % n as u128) as u64
}

pub(crate) fn root_of_unity(r: u64, l: u64) -> Complex64 {
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let (s, c) = (TAU * r as f64 / l as f64).sin_cos();
    Complex64::new(c, s)
}

/// An explicit subgroup: sorted member indices plus a membership mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    group: FiniteAbelianGroup,
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl Subgroup {
    pub(crate) fn from_sorted_unchecked(group: FiniteAbelianGroup, members: Vec<usize>) -> Self {
        let mut mask = vec![false; group.order()];
        for &m in &members {
            mask[m] = true;
        }
        Subgroup {
            group,
            members,
            mask,
        }
    }

    fn from_mask(group: FiniteAbelianGroup, mask: Vec<bool>) -> Self {
        let members = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect();
        Subgroup {
            group,
            members,
            mask,
        }
    }

    pub fn trivial(group: &FiniteAbelianGroup) -> Self {
        Self::from_sorted_unchecked(group.clone(), vec![0])
    }

    pub fn whole(group: &FiniteAbelianGroup) -> Self {
        Self::from_sorted_unchecked(group.clone(), (0..group.order()).collect())
    }

    /// Validates that `elements` form a subgroup: contains zero and is closed
    /// under addition (closure under negation follows for finite sets).
    pub fn from_elements(group: &FiniteAbelianGroup, elements: &[GroupElement]) -> Result<Self> {
        let mut mask = vec![false; group.order()];
        for x in elements {
            group.check(x)?;
            mask[group.index_of(x)] = true;
        }
        let sub = Self::from_mask(group.clone(), mask);
        if !sub.mask[0] {
            return Err(Error::InvalidElement("subgroup must contain zero".into()));
        }
        for &a in &sub.members {
            for &b in &sub.members {
                if !sub.mask[group.add_idx(a, b)] {
                    return Err(Error::InvalidElement("element set is not closed under addition".into()));
                }
            }
        }
        Ok(sub)
    }

    /// The subgroup generated by `gens`.
    pub fn generated_by(group: &FiniteAbelianGroup, gens: &[GroupElement]) -> Result<Self> {
        let mut mask = vec![false; group.order()];
        mask[0] = true;
        let mut frontier = vec![0usize];
        let gens = gens
            .iter()
            .map(|g| group.check(g).map(|_| group.index_of(g)))
            .collect::<Result<Vec<_>>>()?;
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = group.add_idx(x, g);
                if !mask[y] {
                    mask[y] = true;
                    frontier.push(y);
                }
            }
        }
        Ok(Self::from_mask(group.clone(), mask))
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    /// Member indices in increasing (lexicographic) order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.members.iter().map(|&i| self.group.element_at(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }

    pub fn contains_idx(&self, idx: usize) -> bool {
        self.mask.get(idx).copied().unwrap_or(false)
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        self.group.contains(x) && self.mask[self.group.index_of(x)]
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&m| other.contains_idx(m))
    }
}

/// An endomorphism of `Z(n_1) x ... x Z(n_k)` as an integer matrix: entry
/// `a[i][j]` carries coordinate `j` into coordinate `i`. Row `i` is stored
/// reduced mod `n_i`; the map is well defined iff `a[i][j] * n_j = 0 mod n_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endomorphism {
    group: FiniteAbelianGroup,
    matrix: Vec<Vec<u64>>,
}

impl Endomorphism {
    pub fn new(group: &FiniteAbelianGroup, matrix: &[Vec<i64>]) -> Result<Self> {
        let k = group.rank();
        if matrix.len() != k || matrix.iter().any(|row| row.len() != k) {
            return Err(Error::DimensionMismatch(format!(
                "endomorphism matrix must be {k}x{k}"
            )));
        }
        let reduced = matrix
            .iter()
            .zip(group.factors())
            .map(|(row, &n)| row.iter().map(|&a| a.rem_euclid(n as i64) as u64).collect())
            .collect();
        Self::from_reduced(group, reduced)
    }

    fn from_reduced(group: &FiniteAbelianGroup, matrix: Vec<Vec<u64>>) -> Result<Self> {
        let f = group.factors();
        for (i, row) in matrix.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                if (a as u128 * f[j] as u128) % f[i] as u128 != 0 {
                    return Err(Error::NotAHomomorphism {
                        row: i,
                        col: j,
                        value: a,
                        row_modulus: f[i],
                        col_modulus: f[j],
                    });
                }
            }
        }
        Ok(Endomorphism {
            group: group.clone(),
            matrix,
        })
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        Self::scalar(group, 1)
    }

    pub fn zero(group: &FiniteAbelianGroup) -> Self {
        Self::scalar(group, 0)
    }

    /// Multiplication by the integer `k`.
    pub fn scalar(group: &FiniteAbelianGroup, k: i64) -> Self {
        let f = group.factors();
        let matrix = (0..group.rank())
            .map(|i| {
                (0..group.rank())
                    .map(|j| if i == j { k.rem_euclid(f[i] as i64) as u64 } else { 0 })
                    .collect()
            })
            .collect();
        Endomorphism {
            group: group.clone(),
            matrix,
        }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn matrix(&self) -> &[Vec<u64>] {
        &self.matrix
    }

    pub fn matrix_i64(&self) -> Vec<Vec<i64>> {
        self.matrix
            .iter()
            .map(|row| row.iter().map(|&a| a as i64).collect())
            .collect()
    }

    pub fn apply(&self, x: &GroupElement) -> GroupElement {
        let f = self.group.factors();
        let coords = self
            .matrix
            .iter()
            .zip(f)
            .map(|(row, &n)| {
                let s: u128 = row
                    .iter()
                    .zip(&x.coords)
                    .map(|(&a, &c)| a as u128 * c as u128 % n as u128)
                    .sum();
                (s % n as u128) as u64
            })
            .collect();
        GroupElement { coords }
    }

    pub fn apply_idx(&self, idx: usize) -> usize {
        self.group.index_of(&self.apply(&self.group.element_at(idx)))
    }

    /// Image of every element, indexed by element index.
    pub fn table(&self) -> Vec<usize> {
        (0..self.group.order()).map(|i| self.apply_idx(i)).collect()
    }

    /// The adjoint map on the character group, from the closed form
    /// `b[j][i] = a[i][j] * n_j / n_i mod n_j`.
    pub fn adjoint(&self) -> Endomorphism {
        let f = self.group.factors();
        let k = self.group.rank();
        let mut adj = vec![vec![0u64; k]; k];
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                let scaled = a as u128 * f[j] as u128 / f[i] as u128;
                adj[j][i] = (scaled % f[j] as u128) as u64;
            }
        }
        Endomorphism {
            group: self.group.clone(),
            matrix: adj,
        }
    }

    pub fn plus(&self, other: &Endomorphism) -> Result<Endomorphism> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        let f = self.group.factors();
        let matrix = self
            .matrix
            .iter()
            .zip(&other.matrix)
            .zip(f)
            .map(|((r1, r2), &n)| r1.iter().zip(r2).map(|(a, b)| (a + b) % n).collect())
            .collect();
        Ok(Endomorphism {
            group: self.group.clone(),
            matrix,
        })
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Endomorphism) -> Result<Endomorphism> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        let f = self.group.factors();
        let k = self.group.rank();
        let matrix = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let s: u128 = (0..k)
                            .map(|l| {
                                self.matrix[i][l] as u128 * other.matrix[l][j] as u128 % f[i] as u128
                            })
                            .sum();
                        (s % f[i] as u128) as u64
                    })
                    .collect()
            })
            .collect();
        Ok(Endomorphism {
            group: self.group.clone(),
            matrix,
        })
    }

    /// `k * self`.
    pub fn scaled(&self, k: i64) -> Endomorphism {
        let f = self.group.factors();
        let matrix = self
            .matrix
            .iter()
            .zip(f)
            .map(|(row, &n)| row.iter().map(|&a| mul_mod_signed(k, a, n)).collect())
            .collect();
        Endomorphism {
            group: self.group.clone(),
            matrix,
        }
    }

    /// `I + self`.
    pub fn one_plus(&self) -> Endomorphism {
        self.plus(&Endomorphism::identity(&self.group))
            .expect("same group")
    }

    /// `-self`.
    pub fn negated(&self) -> Endomorphism {
        self.scaled(-1)
    }

    /// Bijectivity, decided by enumerating the kernel.
    pub fn is_automorphism(&self) -> bool {
        (1..self.group.order()).all(|i| self.apply_idx(i) != 0)
    }

    pub fn kernel(&self) -> Subgroup {
        let members = (0..self.group.order())
            .filter(|&i| self.apply_idx(i) == 0)
            .collect();
        Subgroup::from_sorted_unchecked(self.group.clone(), members)
    }

    pub fn image(&self) -> Subgroup {
        let mut mask = vec![false; self.group.order()];
        for i in 0..self.group.order() {
            mask[self.apply_idx(i)] = true;
        }
        Subgroup::from_mask(self.group.clone(), mask)
    }
}

/// Samples a uniformly random valid endomorphism matrix: entry `(i, j)` is a
/// random multiple of `n_i / gcd(n_i, n_j)`, which is exactly the set of
/// admissible values.
pub fn random_endomorphism<R: Rng + ?Sized>(group: &FiniteAbelianGroup, rng: &mut R) -> Endomorphism {
    let f = group.factors();
    let matrix = (0..group.rank())
        .map(|i| {
            (0..group.rank())
                .map(|j| {
                    let g = f[i].gcd(&f[j]);
                    rng.gen_range(0..g) * (f[i] / g)
                })
                .collect()
        })
        .collect();
    Endomorphism {
        group: group.clone(),
        matrix,
    }
}

/// Rejection-samples [`random_endomorphism`] until an automorphism appears.
pub fn random_automorphism<R: Rng + ?Sized>(group: &FiniteAbelianGroup, rng: &mut R) -> Result<Endomorphism> {
    for _ in 0..AUTOMORPHISM_RETRY_BOUND {
        let e = random_endomorphism(group, rng);
        if e.is_automorphism() {
            return Ok(e);
        }
    }
    Err(Error::GenerationExhausted {
        what: format!("automorphism of Z{:?}", group.factors()),
        attempts: AUTOMORPHISM_RETRY_BOUND,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g(f: &[u64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(f).unwrap()
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn make_group_examples() {
        assert_eq!(g(&[3]).order(), 3);
        assert_eq!(g(&[3, 9]).order(), 27);
        assert!(matches!(FiniteAbelianGroup::new(&[1]), Err(Error::InvalidGroupSpec(_))));
        assert!(matches!(FiniteAbelianGroup::new(&[]), Err(Error::InvalidGroupSpec(_))));
    }

    #[test]
    fn index_order_is_lexicographic() {
        let grp = g(&[3, 4, 5]);
        let elems: Vec<_> = grp.elements().collect();
        assert!(elems.windows(2).all(|w| w[0] < w[1]));
        for (i, e) in elems.iter().enumerate() {
            assert_eq!(grp.index_of(e), i);
        }
    }

    #[test]
    fn index_arithmetic_matches_coordinates() {
        let grp = g(&[3, 9]);
        for a in 0..grp.order() {
            for b in 0..grp.order() {
                let (x, y) = (grp.element_at(a), grp.element_at(b));
                assert_eq!(grp.add_idx(a, b), grp.index_of(&grp.add(&x, &y)));
                assert_eq!(grp.pairing_phase_idx(a, b), grp.pairing_phase(&x, &y));
            }
            assert_eq!(grp.neg_idx(a), grp.index_of(&grp.neg(&grp.element_at(a))));
        }
    }

    #[test]
    fn pairing_examples() {
        let z3 = g(&[3]);
        let one = z3.element(&[1]).unwrap();
        assert!(close(z3.pairing(&one, &one), Complex64::from_polar(1.0, TAU / 3.0)));
        for y in z3.elements() {
            assert!(close(z3.pairing(&z3.zero(), &y), Complex64::new(1.0, 0.0)));
        }
        let z39 = g(&[3, 9]);
        let x = z39.element(&[1, 3]).unwrap();
        let y = z39.element(&[2, 3]).unwrap();
        assert!(close(z39.pairing(&x, &y), Complex64::from_polar(1.0, 4.0 * std::f64::consts::PI / 3.0)));
    }

    #[test]
    fn pairing_is_bilinear() {
        let grp = g(&[3, 9]);
        for x in grp.elements() {
            for x2 in grp.elements().step_by(4) {
                for y in grp.elements().step_by(5) {
                    let lhs = grp.pairing(&grp.add(&x, &x2), &y);
                    let rhs = grp.pairing(&x, &y) * grp.pairing(&x2, &y);
                    assert!(close(lhs, rhs));
                }
            }
        }
    }

    #[test]
    fn pairing_is_nondegenerate() {
        for f in [vec![3], vec![2, 2], vec![3, 9], vec![5, 5, 3], vec![15, 15]] {
            let grp = g(&f);
            for x in 1..grp.order() {
                assert!((0..grp.order()).any(|y| grp.pairing_phase_idx(x, y) != 0));
            }
        }
    }

    #[test]
    fn make_endomorphism_examples() {
        let z9 = g(&[9]);
        let two = Endomorphism::new(&z9, &[vec![2]]).unwrap();
        assert_eq!(two, Endomorphism::scalar(&z9, 2));

        let z39 = g(&[3, 9]);
        assert!(Endomorphism::new(&z39, &[vec![1, 1], vec![0, 1]]).is_ok());
        assert!(matches!(
            Endomorphism::new(&z39, &[vec![1, 0], vec![1, 1]]),
            Err(Error::NotAHomomorphism { row: 1, col: 0, .. })
        ));
        assert!(matches!(
            Endomorphism::new(&z39, &[vec![1]]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn adjoint_examples() {
        let z9 = g(&[9]);
        let two = Endomorphism::scalar(&z9, 2);
        assert_eq!(two.adjoint(), two);
        let id = Endomorphism::identity(&g(&[3, 9]));
        assert_eq!(id.adjoint(), id);
    }

    #[test]
    fn adjoint_satisfies_pairing_identity_exhaustively() {
        let grp = g(&[3, 9]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_endomorphism(&grp, &mut rng);
            let adj = a.adjoint();
            for x in grp.elements() {
                for y in grp.elements() {
                    assert_eq!(
                        grp.pairing_phase(&a.apply(&x), &y),
                        grp.pairing_phase(&x, &adj.apply(&y))
                    );
                }
            }
            assert_eq!(adj.adjoint(), a);
        }
    }

    #[test]
    fn automorphism_examples() {
        let z9 = g(&[9]);
        assert!(Endomorphism::scalar(&z9, 2).is_automorphism());
        assert!(!Endomorphism::scalar(&z9, 3).is_automorphism());
        assert!(Endomorphism::identity(&g(&[3, 9, 2])).is_automorphism());
    }

    #[test]
    fn kernel_and_image_examples() {
        let z9 = g(&[9]);
        let three = Endomorphism::scalar(&z9, 3);
        assert_eq!(three.kernel().members(), &[0, 3, 6]);
        assert_eq!(three.image().members(), &[0, 3, 6]);

        let z3 = g(&[3]);
        let alpha = Endomorphism::scalar(&z3, 2);
        assert_eq!(alpha.one_plus().kernel(), Subgroup::whole(&z3));
        let id = Endomorphism::identity(&z3);
        assert!(id.one_plus().kernel().is_trivial());
        assert_eq!(id.image(), Subgroup::whole(&z3));
        assert!(Endomorphism::zero(&z3).image().is_trivial());
    }

    #[test]
    fn annihilator_examples() {
        let z9 = g(&[9]);
        let h = Subgroup::generated_by(&z9, &[z9.element(&[3]).unwrap()]).unwrap();
        assert_eq!(z9.annihilator(&h).unwrap().members(), &[0, 3, 6]);
        assert_eq!(z9.annihilator(&Subgroup::trivial(&z9)).unwrap(), Subgroup::whole(&z9));
        assert!(z9.annihilator(&Subgroup::whole(&z9)).unwrap().is_trivial());
    }

    #[test]
    fn order2_free_examples() {
        assert!(g(&[3, 9]).is_order2_free());
        assert!(!g(&[2]).is_order2_free());
        assert!(!g(&[6, 5]).is_order2_free());
        assert_eq!(g(&[6, 5]).two_torsion_count(), 2);
    }

    #[test]
    fn element_parsing() {
        let grp = g(&[3, 9]);
        let x = grp.parse_element("[1, 3]").unwrap();
        assert_eq!(x.to_string(), "[1,3]");
        assert!(grp.parse_element("[3,0]").is_err());
        assert!(grp.parse_element("[1]").is_err());
        assert!(grp.parse_element("1,2").is_err());
    }

    #[test]
    fn subgroup_validation() {
        let z9 = g(&[9]);
        let e = |c: u64| z9.element(&[c]).unwrap();
        assert!(Subgroup::from_elements(&z9, &[e(0), e(3), e(6)]).is_ok());
        assert!(Subgroup::from_elements(&z9, &[e(0), e(3)]).is_err());
        assert!(Subgroup::from_elements(&z9, &[e(3), e(6)]).is_err());
    }

    #[test]
    fn random_automorphisms_are_automorphisms() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for f in [vec![3], vec![9], vec![3, 9], vec![5, 25], vec![3, 3, 3]] {
            let grp = g(&f);
            for _ in 0..10 {
                let a = random_automorphism(&grp, &mut rng).unwrap();
                assert!(a.is_automorphism());
                assert!(a.adjoint().is_automorphism());
            }
        }
    }
}
