//! Parameter-level objects on `R^n x G`: Gaussian transforms, the class Theta
//! on `R x Z(2)`, Gaussian-times-finite distributions, and a grid checker for
//! the Heyde equation on the product group.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::dist::{CharFunction, GroupDistribution};
use crate::error::{Error, Result};
use crate::group::{Endomorphism, FiniteAbelianGroup, GroupElement};

/// Eigenvalues of a Gaussian form may dip this far below zero.
pub const PSD_TOL: f64 = 1e-12;

/// Slack toward acceptance on the Theta membership bound.
pub const THETA_SLACK: f64 = 1e-12;

/// Default negativity cutoff for [`theta_pd_probe`].
pub const DEFAULT_PD_CUTOFF: f64 = 1e-6;

const SYMMETRY_TOL: f64 = 1e-12;

/// `exp{-<A s, s> + i <b, s>}` with `A` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParams {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl GaussianParams {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n || b.len() != n {
            return Err(Error::InvalidGaussian(format!(
                "A is {}x{}, b has length {}",
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGaussian("non-finite entry".into()));
        }
        if (&a - a.transpose()).amax() > SYMMETRY_TOL {
            return Err(Error::InvalidGaussian("A is not symmetric".into()));
        }
        let min_eig = a.clone().symmetric_eigenvalues().min();
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidGaussian(format!("A has eigenvalue {min_eig}")));
        }
        Ok(GaussianParams { a, b })
    }

    pub fn centred(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        Self::new(a, DVector::zeros(n))
    }

    /// The point mass at the origin of `R^n`.
    pub fn degenerate(n: usize) -> Self {
        GaussianParams {
            a: DMatrix::zeros(n, n),
            b: DVector::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn cf(&self, s: &DVector<f64>) -> Complex64 {
        let quad = s.dot(&(&self.a * s));
        Complex64::from_polar((-quad).exp(), self.b.dot(s))
    }
}

/// `max |phi(u+v) + phi(u-v) - 2 phi(u) - 2 phi(v)|` over all grid pairs.
pub fn parallelogram_residual(phi: impl Fn(&DVector<f64>) -> f64, grid: &[DVector<f64>]) -> f64 {
    let values: Vec<f64> = grid.iter().map(&phi).collect();
    let mut worst = 0.0f64;
    for (u, pu) in grid.iter().zip(&values) {
        for (v, pv) in grid.iter().zip(&values) {
            let r = phi(&(u + v)) + phi(&(u - v)) - 2.0 * pu - 2.0 * pv;
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// Parallelogram residual of `phi(s) = <A s, s>`.
pub fn gaussian_phi_check(a: &DMatrix<f64>, grid: &[DVector<f64>]) -> f64 {
    parallelogram_residual(|s| s.dot(&(a * s)), grid)
}

/// `{-2.0, -1.5, ..., 2.0}`.
pub fn default_axis() -> Vec<f64> {
    (-4..=4).map(|k| k as f64 * 0.5).collect()
}

/// The `n`-fold product of `axis`, last coordinate varying fastest.
pub fn product_grid(axis: &[f64], n: usize) -> Vec<DVector<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(DVector::from_vec).collect()
}

pub fn default_grid(n: usize) -> Vec<DVector<f64>> {
    product_grid(&default_axis(), n)
}

/// Parameters of a distribution on `R x Z(2)` with transform
/// `exp{-sigma s^2 + i beta s}` at `n = 0` and
/// `kappa exp{-sigma_p s^2 + i beta_p s}` at `n = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaParams {
    pub sigma: f64,
    pub sigma_p: f64,
    pub beta: f64,
    pub beta_p: f64,
    pub kappa: f64,
}

impl ThetaParams {
    pub fn new(sigma: f64, sigma_p: f64, beta: f64, beta_p: f64, kappa: f64) -> Self {
        ThetaParams {
            sigma,
            sigma_p,
            beta,
            beta_p,
            kappa,
        }
    }

    /// `sqrt(sigma_p / sigma) exp{-(beta - beta_p)^2 / (4 (sigma - sigma_p))}`.
    pub fn kappa_bound(&self) -> f64 {
        let d = self.beta - self.beta_p;
        (self.sigma_p / self.sigma).sqrt() * (-(d * d) / (4.0 * (self.sigma - self.sigma_p))).exp()
    }

    fn finite(&self) -> bool {
        [self.sigma, self.sigma_p, self.beta, self.beta_p, self.kappa]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Membership in Theta: either `0 < sigma_p < sigma` and
/// `0 < |kappa| <= kappa_bound`, or `sigma = sigma_p`, `beta = beta_p`,
/// `|kappa| <= 1`.
pub fn theta_validate(p: &ThetaParams) -> bool {
    if !p.finite() || p.sigma < 0.0 || p.sigma_p < 0.0 {
        return false;
    }
    let k = p.kappa.abs();
    if 0.0 < p.sigma_p && p.sigma_p < p.sigma {
        return 0.0 < k && k <= p.kappa_bound() + THETA_SLACK;
    }
    p.sigma == p.sigma_p && p.beta == p.beta_p && k <= 1.0 + THETA_SLACK
}

/// The parameters of the convolution, i.e. of the pointwise product of the
/// two transforms. A vanishing `kappa` makes the `n = 1` branch identically
/// zero, and the result is then written in the form `sigma_p = sigma`,
/// `beta_p = beta`.
pub fn theta_convolve(p: &ThetaParams, q: &ThetaParams) -> Result<ThetaParams> {
    for (name, x) in [("first", p), ("second", q)] {
        if !theta_validate(x) {
            return Err(Error::InvalidThetaInput(format!("{name} operand {x:?}")));
        }
    }
    let mut r = ThetaParams {
        sigma: p.sigma + q.sigma,
        sigma_p: p.sigma_p + q.sigma_p,
        beta: p.beta + q.beta,
        beta_p: p.beta_p + q.beta_p,
        kappa: p.kappa * q.kappa,
    };
    if r.kappa == 0.0 {
        r.sigma_p = r.sigma;
        r.beta_p = r.beta;
    }
    Ok(r)
}

pub fn theta_cf_eval(p: &ThetaParams, s: f64, n: u8) -> Complex64 {
    if n % 2 == 0 {
        Complex64::from_polar((-p.sigma * s * s).exp(), p.beta * s)
    } else {
        p.kappa * Complex64::from_polar((-p.sigma_p * s * s).exp(), p.beta_p * s)
    }
}

const PD_S_MAX: f64 = 40.0;
const PD_S_STEP: f64 = 0.01;
const PD_T_MAX: f64 = 10.0;
const PD_T_STEP: f64 = 0.05;

/// Result of numerically inverting a Theta transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdProbe {
    pub positive: bool,
    pub min_density: f64,
    pub argmin_t: f64,
    pub argmin_n: u8,
}

/// Trapezoid inverse of `exp{-c s^2 + i m s}` at `t`.
fn gaussian_inverse(c: f64, m: f64, t: f64) -> f64 {
    let steps = (2.0 * PD_S_MAX / PD_S_STEP).round() as i64;
    let mut acc = 0.0;
    for k in 0..=steps {
        let s = -PD_S_MAX + k as f64 * PD_S_STEP;
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        acc += w * (-c * s * s).exp() * (s * (m - t)).cos();
    }
    acc * PD_S_STEP / (2.0 * PI)
}

/// Inverts the transform of `p` to densities `(f_0(t) +- f_1(t)) / 2` on
/// `t in [-10, 10]` and reports whether the smallest value is above
/// `-cutoff`. Degenerate Gaussian parts have atoms instead of densities and
/// are decided in closed form.
pub fn theta_pd_probe(p: &ThetaParams, cutoff: f64) -> PdProbe {
    if p.sigma == 0.0 || p.sigma_p == 0.0 {
        return atomic_probe(p);
    }
    let steps = (2.0 * PD_T_MAX / PD_T_STEP).round() as i64;
    let mut best = PdProbe {
        positive: true,
        min_density: f64::INFINITY,
        argmin_t: 0.0,
        argmin_n: 0,
    };
    for k in 0..=steps {
        let t = -PD_T_MAX + k as f64 * PD_T_STEP;
        let f0 = gaussian_inverse(p.sigma, p.beta, t);
        let f1 = p.kappa * gaussian_inverse(p.sigma_p, p.beta_p, t);
        for (n, d) in [(0u8, 0.5 * (f0 + f1)), (1, 0.5 * (f0 - f1))] {
            if d < best.min_density {
                best.min_density = d;
                best.argmin_t = t;
                best.argmin_n = n;
            }
        }
    }
    best.positive = best.min_density >= -cutoff;
    best
}

fn atomic_probe(p: &ThetaParams) -> PdProbe {
    // With both parts atomic at the same point the masses are (1 +- kappa)/2;
    // any other arrangement pairs an atom with a signed remainder.
    let positive = if p.sigma == 0.0 && p.sigma_p == 0.0 && p.beta == p.beta_p {
        p.kappa.abs() <= 1.0
    } else {
        p.kappa == 0.0
    };
    PdProbe {
        positive,
        min_density: if positive { 0.0 } else { f64::NEG_INFINITY },
        argmin_t: p.beta_p,
        argmin_n: 1,
    }
}

/// `gaussian * finite * E_{(t, g)}` on `R^n x G`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredDistribution {
    gaussian: GaussianParams,
    finite: GroupDistribution,
    t: DVector<f64>,
    g: GroupElement,
}

impl StructuredDistribution {
    pub fn new(gaussian: GaussianParams, finite: GroupDistribution, t: DVector<f64>, g: GroupElement) -> Result<Self> {
        if t.len() != gaussian.dim() {
            return Err(Error::DimensionMismatch(format!(
                "shift of length {} in dimension {}",
                t.len(),
                gaussian.dim()
            )));
        }
        finite.group().check(&g)?;
        Ok(StructuredDistribution {
            gaussian,
            finite,
            t,
            g,
        })
    }

    pub fn unshifted(gaussian: GaussianParams, finite: GroupDistribution) -> Self {
        let n = gaussian.dim();
        let g = finite.group().zero();
        StructuredDistribution {
            gaussian,
            finite,
            t: DVector::zeros(n),
            g,
        }
    }

    pub fn gaussian(&self) -> &GaussianParams {
        &self.gaussian
    }

    pub fn finite(&self) -> &GroupDistribution {
        &self.finite
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        self.finite.group()
    }

    pub fn dim(&self) -> usize {
        self.gaussian.dim()
    }

    fn tables(&self) -> Evaluator<'_> {
        let g = self.group();
        let gi = g.index_of(&self.g);
        let cf = self.finite.char_fn();
        let finite = (0..g.order())
            .map(|h| g.pairing_idx(gi, h) * cf.at_idx(h))
            .collect();
        Evaluator {
            sd: self,
            finite,
            drift: self.gaussian.b() + &self.t,
        }
    }
}

struct Evaluator<'a> {
    sd: &'a StructuredDistribution,
    finite: Vec<Complex64>,
    drift: DVector<f64>,
}

impl Evaluator<'_> {
    fn at(&self, s: &DVector<f64>, h: usize) -> Complex64 {
        let quad = s.dot(&(self.sd.gaussian.a() * s));
        Complex64::from_polar((-quad).exp(), self.drift.dot(s)) * self.finite[h]
    }
}

/// Transform of `sd` at `(s, h)`.
pub fn structured_cf_eval(sd: &StructuredDistribution, s: &DVector<f64>, h: &GroupElement) -> Result<Complex64> {
    if s.len() != sd.dim() {
        return Err(Error::DimensionMismatch(format!(
            "point of length {} in dimension {}",
            s.len(),
            sd.dim()
        )));
    }
    sd.group().check(h)?;
    let quad = s.dot(&(sd.gaussian.a() * s));
    let gauss = Complex64::from_polar((-quad).exp(), (sd.gaussian.b() + &sd.t).dot(s));
    let cf: CharFunction = sd.finite.char_fn();
    Ok(gauss * sd.group().pairing(&sd.g, h) * cf.at(h))
}

/// `alpha = (A, alpha_G)` on `R^n x G`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductAutomorphism {
    linear: DMatrix<f64>,
    finite: Endomorphism,
}

impl ProductAutomorphism {
    pub fn new(linear: DMatrix<f64>, finite: Endomorphism) -> Result<Self> {
        if linear.nrows() == 0 || linear.nrows() != linear.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "linear part is {}x{}",
                linear.nrows(),
                linear.ncols()
            )));
        }
        if linear.iter().any(|v| !v.is_finite()) || linear.clone().try_inverse().is_none() {
            return Err(Error::NotAnAutomorphism);
        }
        if !finite.is_automorphism() {
            return Err(Error::NotAnAutomorphism);
        }
        Ok(ProductAutomorphism { linear, finite })
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn finite(&self) -> &Endomorphism {
        &self.finite
    }
}

/// Worst grid point of [`check_heyde_equation_grid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResidual {
    pub max: f64,
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub h1: String,
    pub h2: String,
}

/// `max |mu1^(s1+s2, h1+h2) mu2^(s1+A~s2, h1+a~h2)
///     - mu1^(s1-s2, h1-h2) mu2^(s1-A~s2, h1-a~h2)|`
/// over all pairs of grid points and all pairs of characters of `G`.
pub fn check_heyde_equation_grid(
    sd1: &StructuredDistribution,
    sd2: &StructuredDistribution,
    alpha: &ProductAutomorphism,
    grid: &[DVector<f64>],
) -> Result<GridResidual> {
    if grid.is_empty() {
        return Err(Error::GridEmpty);
    }
    let g = sd1.group();
    if sd2.group() != g || alpha.finite.group() != g {
        return Err(Error::GroupMismatch);
    }
    let n = alpha.linear.nrows();
    if sd1.dim() != n || sd2.dim() != n || grid.iter().any(|s| s.len() != n) {
        return Err(Error::DimensionMismatch(format!("expected dimension {n}")));
    }
    let lin_adj = alpha.linear.transpose();
    let fin_adj = alpha.finite.adjoint().table();
    let (e1, e2) = (sd1.tables(), sd2.tables());

    let mut best = (f64::NEG_INFINITY, 0, 0, 0, 0);
    for (i1, s1) in grid.iter().enumerate() {
        for (i2, s2) in grid.iter().enumerate() {
            let a2 = &lin_adj * s2;
            let (p1, m1) = (s1 + s2, s1 - s2);
            let (p2, m2) = (s1 + &a2, s1 - &a2);
            for h1 in 0..g.order() {
                for h2 in 0..g.order() {
                    let ah2 = fin_adj[h2];
                    let lhs = e1.at(&p1, g.add_idx(h1, h2)) * e2.at(&p2, g.add_idx(h1, ah2));
                    let rhs = e1.at(&m1, g.sub_idx(h1, h2)) * e2.at(&m2, g.sub_idx(h1, ah2));
                    let r = (lhs - rhs).norm();
                    if r > best.0 {
                        best = (r, i1, i2, h1, h2);
                    }
                }
            }
        }
    }
    Ok(GridResidual {
        max: best.0,
        s1: grid[best.1].iter().copied().collect(),
        s2: grid[best.2].iter().copied().collect(),
        h1: g.element_at(best.3).to_string(),
        h2: g.element_at(best.4).to_string(),
    })
}
