use serde::Serialize;

use super::{check_conditional_symmetry, HeydeInstance};
use crate::dist::{GroupDistribution, DEFAULT_NONVANISHING_TOL};
use crate::error::{Error, Result};
use crate::group::{Endomorphism, GroupElement, Subgroup};
use crate::polyfd::subgroup_strings;

/// `mu_j = omega * E_{x_j}` with `omega` supported in `kernel = Ker(I+alpha)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub omega: GroupDistribution,
    pub x1: GroupElement,
    pub x2: GroupElement,
    pub kernel: Subgroup,
    /// `H = (I + alpha~) Y`, on which both transforms are unimodular.
    pub h: Subgroup,
}

#[derive(Serialize)]
struct DecompositionJson {
    omega: crate::config::DistributionSpec,
    x1: String,
    x2: String,
    kernel: Vec<String>,
    h: Vec<String>,
    verdict: &'static str,
}

impl Serialize for Decomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DecompositionJson {
            omega: crate::config::DistributionSpec::from_distribution(&self.omega),
            x1: self.x1.to_string(),
            x2: self.x2.to_string(),
            kernel: subgroup_strings(&self.kernel),
            h: subgroup_strings(&self.h),
            verdict: "ok",
        }
        .serialize(s)
    }
}

fn failed(msg: impl Into<String>) -> Error {
    Error::DecompositionFailed(msg.into())
}

/// Extracts `omega`, `x1`, `x2` from a conditionally symmetric instance on a
/// group without elements of order 2 whose transforms do not vanish.
///
/// The shift `x_j` is canonicalized to the smallest support element of
/// `mu_j`; any residual `Ker(I+alpha)` offset between the two centred laws is
/// folded into `x2`. Every intermediate claim is verified and a violation is
/// reported as [`Error::DecompositionFailed`].
pub fn decompose(inst: &HeydeInstance) -> Result<Decomposition> {
    let g = inst.group();
    if !g.is_order2_free() {
        return Err(Error::OrderTwoElementPresent);
    }
    for mu in [inst.mu1(), inst.mu2()] {
        let m = mu.char_fn().min_modulus();
        if m <= DEFAULT_NONVANISHING_TOL {
            return Err(Error::VanishingCF { min_modulus: m });
        }
    }
    if !check_conditional_symmetry(inst) {
        return Err(Error::HypothesisNotSatisfied);
    }

    let alpha = inst.alpha();
    let h = alpha.adjoint().one_plus().image();
    for (j, mu) in [inst.mu1(), inst.mu2()].into_iter().enumerate() {
        if !mu.is_unimodular_on(&h)? {
            return Err(failed(format!("mu{} is not unimodular on (I+alpha~)Y", j + 1)));
        }
    }

    let kernel = alpha.one_plus().kernel();
    if g.annihilator(&h)? != kernel {
        return Err(failed("Ker(I+alpha) differs from A(X, (I+alpha~)Y)"));
    }

    let x1 = inst.mu1().min_support_idx();
    let mut x2 = inst.mu2().min_support_idx();
    let lambda1 = inst.mu1().shift_idx(g.neg_idx(x1));
    let lambda2 = inst.mu2().shift_idx(g.neg_idx(x2));
    for (j, lambda) in [&lambda1, &lambda2].into_iter().enumerate() {
        if !lambda.is_supported_in(&kernel) {
            return Err(failed(format!("centred mu{} leaves Ker(I+alpha)", j + 1)));
        }
    }

    if lambda1 != lambda2 {
        // lambda2 = lambda1 * E_k needs k = s - min(supp lambda1) for some s in supp lambda2.
        let base = lambda1.min_support_idx();
        let k = lambda2
            .support_indices()
            .into_iter()
            .map(|s| g.sub_idx(s, base))
            .find(|&k| kernel.contains_idx(k) && lambda1.shift_idx(k) == lambda2)
            .ok_or_else(|| failed("centred laws are not Ker(I+alpha)-shifts of each other"))?;
        x2 = g.add_idx(x2, k);
    }
    let omega = lambda1;

    if omega.shift_idx(x1) != *inst.mu1() || omega.shift_idx(x2) != *inst.mu2() {
        return Err(failed("omega * E_{x_j} does not reproduce mu_j"));
    }
    let converse = HeydeInstance::new(alpha.clone(), omega.clone(), omega.clone())?;
    if !check_conditional_symmetry(&converse) {
        return Err(failed("(omega, omega) is not conditionally symmetric"));
    }

    Ok(Decomposition {
        omega,
        x1: g.element_at(x1),
        x2: g.element_at(x2),
        kernel,
        h,
    })
}

/// The instance `(omega * E_{-alpha x2}, omega * E_{x2})`. The shifts satisfy
/// `x1 + alpha x2 = 0`, so the instance is conditionally symmetric whenever
/// `omega` lives on `Ker(I+alpha)`.
pub fn construct_converse(
    omega: &GroupDistribution,
    alpha: &Endomorphism,
    x2: &GroupElement,
) -> Result<HeydeInstance> {
    let g = alpha.group();
    if omega.group() != g {
        return Err(Error::GroupMismatch);
    }
    g.check(x2)?;
    if !alpha.is_automorphism() {
        return Err(Error::NotAnAutomorphism);
    }
    if !omega.is_supported_in(&alpha.one_plus().kernel()) {
        return Err(Error::SupportViolation);
    }
    let x1 = g.neg(&alpha.apply(x2));
    HeydeInstance::new(alpha.clone(), omega.shift(&x1)?, omega.shift(x2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteAbelianGroup;
    use num_rational::BigRational;

    fn grp(f: &[u64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(f).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn e(g: &FiniteAbelianGroup, c: u64) -> GroupDistribution {
        GroupDistribution::degenerate(g, &g.element(&[c]).unwrap()).unwrap()
    }

    /// Every `(omega, x1, x2)` with `omega` supported in the kernel and
    /// `mu_j = omega * E_{x_j}`, found by enumeration.
    fn brute_force_decompositions(inst: &HeydeInstance) -> Vec<(GroupDistribution, usize, usize)> {
        let g = inst.group();
        let kernel = inst.alpha().one_plus().kernel();
        let mut out = Vec::new();
        for x1 in 0..g.order() {
            let omega = inst.mu1().shift_idx(g.neg_idx(x1));
            if !omega.is_supported_in(&kernel) {
                continue;
            }
            for x2 in 0..g.order() {
                if omega.shift_idx(x2) == *inst.mu2() {
                    out.push((omega.clone(), x1, x2));
                }
            }
        }
        out
    }

    #[test]
    fn degenerate_pair_decomposes() {
        let z3 = grp(&[3]);
        let inst = HeydeInstance::new(Endomorphism::identity(&z3), e(&z3, 1), e(&z3, 2)).unwrap();
        let d = decompose(&inst).unwrap();
        assert_eq!(d.omega, e(&z3, 0));
        assert_eq!(d.x1.coords(), &[1]);
        assert_eq!(d.x2.coords(), &[2]);
        assert!(d.kernel.is_trivial());
        let oracle = brute_force_decompositions(&inst);
        assert_eq!(oracle, vec![(e(&z3, 0), 1, 2)]);
    }

    #[test]
    fn minus_identity_keeps_the_whole_group() {
        let z5 = grp(&[5]);
        let mu = GroupDistribution::from_indexed(&z5, [(0, q(1, 2)), (1, q(1, 2))]).unwrap();
        let inst = HeydeInstance::new(Endomorphism::scalar(&z5, 4), mu.clone(), mu.clone()).unwrap();
        let d = decompose(&inst).unwrap();
        assert_eq!(d.omega, mu);
        assert_eq!(d.x1, z5.zero());
        assert_eq!(d.x2, z5.zero());
        assert_eq!(d.kernel, Subgroup::whole(&z5));
        assert!(brute_force_decompositions(&inst).contains(&(mu, 0, 0)));
    }

    #[test]
    fn kernel_supported_pair_on_z9() {
        let z9 = grp(&[9]);
        let alpha = Endomorphism::scalar(&z9, 2);
        let omega = GroupDistribution::from_indexed(&z9, [(0, q(1, 2)), (3, q(1, 4)), (6, q(1, 4))]).unwrap();
        let inst = HeydeInstance::new(alpha.clone(), omega.clone(), omega.clone()).unwrap();
        let d = decompose(&inst).unwrap();
        assert_eq!(d.omega, omega);
        assert_eq!((d.x1.clone(), d.x2.clone()), (z9.zero(), z9.zero()));
        assert_eq!(d.kernel.members(), &[0, 3, 6]);

        // The uniform law on {0,3,6} is symmetric too, but its transform vanishes.
        let u = GroupDistribution::uniform_on(&d.kernel);
        let inst = HeydeInstance::new(alpha, u.clone(), u).unwrap();
        assert!(check_conditional_symmetry(&inst));
        assert!(matches!(decompose(&inst), Err(Error::VanishingCF { .. })));
    }

    #[test]
    fn kernel_offset_is_folded_into_the_second_shift() {
        // omega with smallest support element 3, so centring mu2 at its own
        // minimum lands on a shifted copy.
        let z9 = grp(&[9]);
        let alpha = Endomorphism::scalar(&z9, 2);
        let omega = GroupDistribution::from_indexed(&z9, [(3, q(2, 3)), (6, q(1, 3))]).unwrap();
        let inst = construct_converse(&omega, &alpha, &z9.element(&[6]).unwrap()).unwrap();
        let d = decompose(&inst).unwrap();
        assert_eq!(d.omega.shift(&d.x1).unwrap(), *inst.mu1());
        assert_eq!(d.omega.shift(&d.x2).unwrap(), *inst.mu2());
        assert!(d.omega.is_supported_in(&d.kernel));
    }

    #[test]
    fn decompose_errors() {
        let z3 = grp(&[3]);
        let asym = HeydeInstance::new(Endomorphism::identity(&z3), e(&z3, 1), e(&z3, 0)).unwrap();
        assert_eq!(decompose(&asym), Err(Error::HypothesisNotSatisfied));

        let u = GroupDistribution::uniform(&z3);
        let inst = HeydeInstance::new(Endomorphism::identity(&z3), u.clone(), u).unwrap();
        assert!(matches!(decompose(&inst), Err(Error::VanishingCF { .. })));

        let z6 = grp(&[6]);
        let inst = HeydeInstance::new(Endomorphism::identity(&z6), e(&z6, 0), e(&z6, 0)).unwrap();
        assert_eq!(decompose(&inst), Err(Error::OrderTwoElementPresent));
    }

    #[test]
    fn converse_examples() {
        let z9 = grp(&[9]);
        let alpha = Endomorphism::scalar(&z9, 2);
        let k = alpha.one_plus().kernel();
        let omega = GroupDistribution::uniform_on(&k);

        let inst = construct_converse(&omega, &alpha, &z9.zero()).unwrap();
        assert_eq!((inst.mu1(), inst.mu2()), (&omega, &omega));
        assert!(check_conditional_symmetry(&inst));

        let inst = construct_converse(&omega, &alpha, &z9.element(&[1]).unwrap()).unwrap();
        assert_eq!(*inst.mu1(), omega.shift(&z9.element(&[7]).unwrap()).unwrap());
        assert_eq!(*inst.mu2(), omega.shift(&z9.element(&[1]).unwrap()).unwrap());
        assert!(check_conditional_symmetry(&inst));

        let g = grp(&[3, 9]);
        let alpha = Endomorphism::new(&g, &[vec![2, 1], vec![0, 4]]).unwrap();
        let e0 = GroupDistribution::degenerate(&g, &g.zero()).unwrap();
        let x2 = g.element(&[1, 1]).unwrap();
        let inst = construct_converse(&e0, &alpha, &x2).unwrap();
        assert_eq!(*inst.mu2(), GroupDistribution::degenerate(&g, &x2).unwrap());
        assert!(check_conditional_symmetry(&inst));

        let outside = GroupDistribution::from_indexed(&z9, [(0, q(1, 2)), (1, q(1, 2))]).unwrap();
        assert_eq!(
            construct_converse(&outside, &Endomorphism::scalar(&z9, 2), &z9.zero()),
            Err(Error::SupportViolation)
        );
    }
}
