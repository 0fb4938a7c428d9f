//! JSON documents for instances, Theta parameters, continuum checks and fuzz
//! campaigns. Every document carries `"schema": "1"`.

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::continuum::{GaussianParams, ProductAutomorphism, StructuredDistribution, ThetaParams};
use crate::dist::GroupDistribution;
use crate::error::{Error, Result};
use crate::group::{Endomorphism, FiniteAbelianGroup};
use crate::heyde::{HeydeInstance, LinearForms};

pub const SCHEMA: &str = "1";

fn schema() -> String {
    SCHEMA.to_string()
}

fn check_schema(s: &str) -> Result<()> {
    if s != SCHEMA {
        return Err(Error::InvalidConfig(format!("unsupported schema {s:?}")));
    }
    Ok(())
}

/// Parses a document and checks its schema tag.
pub fn from_json<T: DeserializeOwned + Schema>(text: &str) -> Result<T> {
    let doc: T = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    check_schema(doc.schema())?;
    Ok(doc)
}

pub trait Schema {
    fn schema(&self) -> &str;
}

macro_rules! impl_schema {
    ($($t:ty),*) => {
        $(impl Schema for $t {
            fn schema(&self) -> &str {
                &self.schema
            }
        })*
    };
}

/// `"p/q"`, an integer, or a terminating decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.contains('/') {
        let r = BigRational::from_str(s).ok()?;
        return Some(r);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub factors: Vec<u64>,
}

impl GroupSpec {
    pub fn from_group(g: &FiniteAbelianGroup) -> Self {
        GroupSpec {
            factors: g.factors().to_vec(),
        }
    }

    pub fn build(&self) -> Result<FiniteAbelianGroup> {
        FiniteAbelianGroup::new(&self.factors)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndomorphismSpec {
    pub matrix: Vec<Vec<i64>>,
}

impl EndomorphismSpec {
    pub fn from_endomorphism(e: &Endomorphism) -> Self {
        EndomorphismSpec { matrix: e.matrix_i64() }
    }

    pub fn build(&self, g: &FiniteAbelianGroup) -> Result<Endomorphism> {
        Endomorphism::new(g, &self.matrix)
    }
}

/// Weights keyed by element, e.g. `{"[0]": "1/2", "[1]": "1/2"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub weights: BTreeMap<String, String>,
}

impl DistributionSpec {
    pub fn from_distribution(d: &GroupDistribution) -> Self {
        DistributionSpec {
            weights: d.weight_strings(),
        }
    }

    pub fn build(&self, g: &FiniteAbelianGroup) -> Result<GroupDistribution> {
        let mut weights = Vec::with_capacity(self.weights.len());
        for (k, v) in &self.weights {
            let x = g.parse_element(k)?;
            let w = parse_rational(v).ok_or_else(|| Error::NotAProbability(format!("weight {v:?} is not a rational")))?;
            weights.push((x, w));
        }
        GroupDistribution::new(g, weights)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormsSpec {
    pub first: [EndomorphismSpec; 2],
    pub second: [EndomorphismSpec; 2],
}

impl FormsSpec {
    pub fn from_forms(f: &LinearForms) -> Self {
        let e = EndomorphismSpec::from_endomorphism;
        FormsSpec {
            first: [e(&f.first[0]), e(&f.first[1])],
            second: [e(&f.second[0]), e(&f.second[1])],
        }
    }

    pub fn build(&self, g: &FiniteAbelianGroup) -> Result<LinearForms> {
        LinearForms::new(
            [self.first[0].build(g)?, self.first[1].build(g)?],
            [self.second[0].build(g)?, self.second[1].build(g)?],
        )
    }
}

/// A Heyde instance, optionally with a second pair of linear forms for the
/// independence and Skitovich-Darmois checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    #[serde(default = "schema")]
    pub schema: String,
    pub group: GroupSpec,
    pub alpha: EndomorphismSpec,
    pub mu1: DistributionSpec,
    pub mu2: DistributionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forms: Option<FormsSpec>,
}

impl InstanceConfig {
    pub fn from_instance(inst: &HeydeInstance) -> Self {
        InstanceConfig {
            schema: schema(),
            group: GroupSpec::from_group(inst.group()),
            alpha: EndomorphismSpec::from_endomorphism(inst.alpha()),
            mu1: DistributionSpec::from_distribution(inst.mu1()),
            mu2: DistributionSpec::from_distribution(inst.mu2()),
            forms: None,
        }
    }

    pub fn build(&self) -> Result<HeydeInstance> {
        let g = self.group.build()?;
        HeydeInstance::new(self.alpha.build(&g)?, self.mu1.build(&g)?, self.mu2.build(&g)?)
    }

    /// The declared forms, or the pair `M1, M2` attached to `alpha`.
    pub fn build_forms(&self) -> Result<LinearForms> {
        let g = self.group.build()?;
        match &self.forms {
            Some(f) => f.build(&g),
            None => Ok(LinearForms::symmetry_consequence(&self.alpha.build(&g)?)),
        }
    }

    /// Both distributions without requiring `alpha` to be invertible.
    pub fn build_distributions(&self) -> Result<(GroupDistribution, GroupDistribution)> {
        let g = self.group.build()?;
        Ok((self.mu1.build(&g)?, self.mu2.build(&g)?))
    }
}

/// A real given as a JSON number or as a rational/decimal string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Real {
    Number(f64),
    Text(String),
}

impl Real {
    pub fn value(&self) -> Result<f64> {
        match self {
            Real::Number(x) => Ok(*x),
            Real::Text(s) => parse_rational(s)
                .and_then(|r| r.to_f64())
                .ok_or_else(|| Error::InvalidThetaInput(format!("{s:?} is not a real"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSpec {
    pub sigma: Real,
    pub sigma_p: Real,
    pub beta: Real,
    pub beta_p: Real,
    pub kappa: Real,
}

impl ThetaSpec {
    pub fn from_params(p: &ThetaParams) -> Self {
        ThetaSpec {
            sigma: Real::Number(p.sigma),
            sigma_p: Real::Number(p.sigma_p),
            beta: Real::Number(p.beta),
            beta_p: Real::Number(p.beta_p),
            kappa: Real::Number(p.kappa),
        }
    }

    pub fn build(&self) -> Result<ThetaParams> {
        Ok(ThetaParams::new(
            self.sigma.value()?,
            self.sigma_p.value()?,
            self.beta.value()?,
            self.beta_p.value()?,
            self.kappa.value()?,
        ))
    }
}

/// Theta parameters; `with` is the second operand of a convolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaConfig {
    #[serde(default = "schema")]
    pub schema: String,
    #[serde(flatten)]
    pub params: ThetaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub with: Option<ThetaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub a: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
}

fn matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::DimensionMismatch("ragged or empty matrix".into()));
    }
    Ok(DMatrix::from_fn(n, rows[0].len(), |i, j| rows[i][j]))
}

impl GaussianSpec {
    pub fn build(&self) -> Result<GaussianParams> {
        let a = matrix(&self.a)?;
        let b = match &self.b {
            Some(b) => DVector::from_vec(b.clone()),
            None => DVector::zeros(a.nrows()),
        };
        GaussianParams::new(a, b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSpec {
    pub t: Vec<f64>,
    pub g: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuredSpec {
    pub gaussian: GaussianSpec,
    pub finite: DistributionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftSpec>,
}

impl StructuredSpec {
    pub fn build(&self, g: &FiniteAbelianGroup) -> Result<StructuredDistribution> {
        let gaussian = self.gaussian.build()?;
        let finite = self.finite.build(g)?;
        match &self.shift {
            None => Ok(StructuredDistribution::unshifted(gaussian, finite)),
            Some(s) => StructuredDistribution::new(gaussian, finite, DVector::from_vec(s.t.clone()), g.parse_element(&s.g)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductAutomorphismSpec {
    pub linear: Vec<Vec<f64>>,
    pub finite: EndomorphismSpec,
}

/// Two structured distributions on `R^n x G` and `alpha = (A, alpha_G)`.
/// `grid` is the axis whose `n`-fold product is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumConfig {
    #[serde(default = "schema")]
    pub schema: String,
    pub group: GroupSpec,
    pub alpha: ProductAutomorphismSpec,
    pub sd1: StructuredSpec,
    pub sd2: StructuredSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
}

pub struct ContinuumInstance {
    pub sd1: StructuredDistribution,
    pub sd2: StructuredDistribution,
    pub alpha: ProductAutomorphism,
    pub grid: Vec<DVector<f64>>,
}

impl ContinuumConfig {
    pub fn build(&self) -> Result<ContinuumInstance> {
        let g = self.group.build()?;
        let alpha = ProductAutomorphism::new(matrix(&self.alpha.linear)?, self.alpha.finite.build(&g)?)?;
        let n = alpha.linear().nrows();
        let axis = self.grid.clone().unwrap_or_else(crate::continuum::default_axis);
        let grid = if axis.is_empty() {
            Vec::new()
        } else {
            crate::continuum::product_grid(&axis, n)
        };
        Ok(ContinuumInstance {
            sd1: self.sd1.build(&g)?,
            sd2: self.sd2.build(&g)?,
            alpha,
            grid,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzConfig {
    #[serde(default = "schema")]
    pub schema: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub max_order: Option<usize>,
}

/// Bare group document, `{"factors": [..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    #[serde(default = "schema")]
    pub schema: String,
    pub factors: Vec<u64>,
}

impl_schema!(InstanceConfig, ThetaConfig, ContinuumConfig, FuzzConfig, GroupConfig);
