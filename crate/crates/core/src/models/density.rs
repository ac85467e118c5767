use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub const MIN_DOF: f64 = 2.1;
pub const MAX_DOF: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    StudentT,
}

impl Family {
    pub fn short_name(self) -> &'static str {
        match self {
            Family::Gaussian => "gmm",
            Family::StudentT => "tmm",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gmm" | "gaussian" => Ok(Family::Gaussian),
            "tmm" | "student_t" | "student-t" | "t" => Ok(Family::StudentT),
            other => Err(Error::InvalidArgument(format!(
                "unknown model family '{other}' (expected gmm or tmm)"
            ))),
        }
    }
}

/// One mixture component with diagonal covariance (Gaussian) or diagonal
/// scale matrix (Student's-t, when `dof` is set).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dof: Option<f64>,
}

impl MixtureComponent {
    pub fn gaussian(weight: f64, mean: Vec<f64>, var: Vec<f64>) -> Self {
        Self {
            weight,
            mean,
            var,
            dof: None,
        }
    }

    pub fn student_t(weight: f64, mean: Vec<f64>, var: Vec<f64>, dof: f64) -> Self {
        Self {
            weight,
            mean,
            var,
            dof: Some(dof),
        }
    }

    /// Log normalizer and the per-frame kernel, excluding the weight.
    fn log_normalizer(&self) -> f64 {
        let d = self.mean.len() as f64;
        let log_det: f64 = self.var.iter().map(|v| v.ln()).sum();
        match self.dof {
            None => -0.5 * (d * (2.0 * PI).ln() + log_det),
            Some(nu) => {
                ln_gamma(0.5 * (nu + d)) - ln_gamma(0.5 * nu) - 0.5 * d * (nu * PI).ln()
                    - 0.5 * log_det
            }
        }
    }

    /// Squared Mahalanobis distance under the diagonal (co)variance.
    pub fn mahalanobis_sq(&self, x: &[f64]) -> f64 {
        let mut m = 0.0;
        for ((xi, mu), v) in x.iter().zip(&self.mean).zip(&self.var) {
            let z = xi - mu;
            m += z * z / v;
        }
        m
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        self.log_normalizer() + self.log_kernel(self.mahalanobis_sq(x))
    }

    fn log_kernel(&self, maha: f64) -> f64 {
        match self.dof {
            None => -0.5 * maha,
            Some(nu) => -0.5 * (nu + self.mean.len() as f64) * (maha / nu).ln_1p(),
        }
    }
}

/// A K-component mixture of one family. Per-component log normalizers are
/// cached at construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MixtureModelRepr", into = "MixtureModelRepr")]
pub struct MixtureModel {
    family: Family,
    dim: usize,
    components: Vec<MixtureComponent>,
    log_consts: Vec<f64>,
}

impl PartialEq for MixtureModel {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.dim == other.dim && self.components == other.components
    }
}

#[derive(Serialize, Deserialize)]
struct MixtureModelRepr {
    family: Family,
    dim: usize,
    components: Vec<MixtureComponent>,
}

impl TryFrom<MixtureModelRepr> for MixtureModel {
    type Error = Error;

    fn try_from(r: MixtureModelRepr) -> Result<Self> {
        let m = MixtureModel::new(r.family, r.components)?;
        if m.dim != r.dim {
            return Err(Error::DimensionMismatch {
                expected: r.dim,
                actual: m.dim,
            });
        }
        Ok(m)
    }
}

impl From<MixtureModel> for MixtureModelRepr {
    fn from(m: MixtureModel) -> Self {
        Self {
            family: m.family,
            dim: m.dim,
            components: m.components,
        }
    }
}

impl MixtureModel {
    pub fn new(family: Family, components: Vec<MixtureComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or(Error::Empty("mixture components"))?;
        let dim = first.mean.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("zero-dimensional component".into()));
        }
        let mut total = 0.0;
        for c in &components {
            if c.mean.len() != dim || c.var.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: c.mean.len().max(c.var.len()),
                });
            }
            if !(c.weight > 0.0 && c.weight <= 1.0 + 1e-12) {
                return Err(Error::InvalidArgument(format!(
                    "component weight {} outside (0, 1]",
                    c.weight
                )));
            }
            if c.mean.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("component mean"));
            }
            if c.var.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::InvalidArgument("variances must be positive".into()));
            }
            match (family, c.dof) {
                (Family::Gaussian, None) => {}
                (Family::StudentT, Some(nu)) if (MIN_DOF..=MAX_DOF).contains(&nu) => {}
                (Family::StudentT, Some(nu)) => {
                    return Err(Error::InvalidArgument(format!(
                        "degrees of freedom {nu} outside [{MIN_DOF}, {MAX_DOF}]"
                    )))
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "component does not match family {family}"
                    )))
                }
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "component weights sum to {total}, expected 1"
            )));
        }
        let log_consts = components
            .iter()
            .map(|c| c.weight.ln() + c.log_normalizer())
            .collect();
        Ok(Self {
            family,
            dim,
            components,
            log_consts,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// `ln Σ_i w_i f_i(x)`.
    pub fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(self.log_pdf_unchecked(x))
    }

    /// Single-pass streaming log-sum-exp over components; `x.len()` must
    /// equal `dim`.
    pub(crate) fn log_pdf_unchecked(&self, x: &[f64]) -> f64 {
        let mut max = f64::NEG_INFINITY;
        let mut acc = 0.0;
        for (c, k) in self.components.iter().zip(&self.log_consts) {
            let v = k + c.log_kernel(c.mahalanobis_sq(x));
            if v > max {
                acc = acc * (max - v).exp() + 1.0;
                max = v;
            } else {
                acc += (v - max).exp();
            }
        }
        max + acc.ln()
    }

    /// Fills `logp[i] = ln w_i + ln f_i(x)` and `maha[i]` for each component.
    pub(crate) fn component_terms(&self, x: &[f64], logp: &mut [f64], maha: &mut [f64]) {
        for (i, (c, k)) in self.components.iter().zip(&self.log_consts).enumerate() {
            let m = c.mahalanobis_sq(x);
            maha[i] = m;
            logp[i] = k + c.log_kernel(m);
        }
    }

    /// Draws `n` frames from the mixture.
    pub fn sample<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        use rand::distr::weighted::WeightedIndex;
        use rand_distr::{ChiSquared, Distribution, StandardNormal};
        let pick = WeightedIndex::new(self.components.iter().map(|c| c.weight))
            .expect("weights validated at construction");
        (0..n)
            .map(|_| {
                let c = &self.components[pick.sample(rng)];
                let scale = match c.dof {
                    None => 1.0,
                    Some(nu) => {
                        let chi: f64 = ChiSquared::new(nu).expect("dof > 0").sample(rng);
                        (nu / chi).sqrt()
                    }
                };
                c.mean
                    .iter()
                    .zip(&c.var)
                    .map(|(mu, v)| {
                        let z: f64 = StandardNormal.sample(rng);
                        mu + scale * v.sqrt() * z
                    })
                    .collect()
            })
            .collect()
    }
}
