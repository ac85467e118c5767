use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use super::density::{Family, MixtureComponent, MixtureModel, MIN_DOF};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::math::{derive_seed, pairwise_sum};

/// Upper end of the bracket searched when estimating degrees of freedom.
const DOF_SEARCH_MAX: f64 = 200.0;
/// Used when the degree-of-freedom statistics are unusable.
const DOF_FALLBACK: f64 = 5.0;
const ABS_VAR_FLOOR: f64 = 1e-12;
const LLOYD_ITERS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DofMode {
    /// Per-component ML update by bisection on `[2.1, 200]`.
    Estimate,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub n_components: usize,
    pub max_iters: usize,
    /// Stop when the relative log-likelihood change drops below this.
    pub rel_tol: f64,
    /// Variance floor as a fraction of the global per-dimension variance.
    pub var_floor_frac: f64,
    pub seed: u64,
    pub n_restarts: usize,
    pub dof_mode: DofMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_components: 8,
            max_iters: 200,
            rel_tol: 1e-6,
            var_floor_frac: 1e-3,
            seed: 0,
            n_restarts: 3,
            dof_mode: DofMode::Estimate,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_components == 0 {
            return Err(Error::InvalidConfig("n_components must be >= 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidConfig("rel_tol must be > 0".into()));
        }
        if self.n_restarts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidConfig(
                "n_restarts and max_iters must be >= 1".into(),
            ));
        }
        if let DofMode::Fixed(nu) = self.dof_mode {
            if !(super::MIN_DOF..=super::MAX_DOF).contains(&nu) {
                return Err(Error::InvalidConfig(format!("fixed dof {nu} out of range")));
            }
        }
        Ok(())
    }
}

/// A fitted model together with the log-likelihood after every iteration of
/// the winning restart (index 0 is the initialization).
#[derive(Debug, Clone)]
pub struct FitTrace {
    pub model: MixtureModel,
    pub log_likelihoods: Vec<f64>,
    pub restart_log_likelihoods: Vec<f64>,
    pub var_floor: Vec<f64>,
}

pub fn train_mixture(
    features: &FeatureMatrix,
    family: Family,
    cfg: &TrainConfig,
) -> Result<MixtureModel> {
    train_mixture_traced(features, family, cfg).map(|t| t.model)
}

pub fn train_mixture_traced(
    features: &FeatureMatrix,
    family: Family,
    cfg: &TrainConfig,
) -> Result<FitTrace> {
    cfg.validate()?;
    let (t_len, k) = (features.frames(), cfg.n_components);
    if t_len < k {
        return Err(Error::TooFewFrames {
            frames: t_len,
            components: k,
        });
    }
    if features.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training features"));
    }

    let global_var = column_variance(features);
    let floor: Vec<f64> = global_var
        .iter()
        .map(|v| (cfg.var_floor_frac * v).max(ABS_VAR_FLOOR))
        .collect();

    let mut best: Option<(Params, Vec<f64>)> = None;
    let mut restart_lls = Vec::with_capacity(cfg.n_restarts);
    for r in 0..cfg.n_restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, r as u64));
        let init = kmeans_init(features, k, &floor, &global_var, family, cfg, &mut rng);
        let (params, trace) = run_em(features, init, &floor, cfg);
        let ll = *trace.last().expect("trace holds the initial value");
        restart_lls.push(ll);
        if best.as_ref().is_none_or(|(_, t)| ll > *t.last().unwrap()) {
            best = Some((params, trace));
        }
    }
    let (params, trace) = best.expect("at least one restart");
    Ok(FitTrace {
        model: params.into_model(family)?,
        log_likelihoods: trace,
        restart_log_likelihoods: restart_lls,
        var_floor: floor,
    })
}

fn column_variance(x: &FeatureMatrix) -> Vec<f64> {
    let (t, d) = (x.frames() as f64, x.dim());
    let mut mean = vec![0.0; d];
    for f in x.iter_frames() {
        for (m, v) in mean.iter_mut().zip(f) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= t);
    let mut var = vec![0.0; d];
    for f in x.iter_frames() {
        for ((s, v), m) in var.iter_mut().zip(f).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= t);
    var
}

#[derive(Debug, Clone)]
struct Params {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    vars: Vec<Vec<f64>>,
    dofs: Option<Vec<f64>>,
}

impl Params {
    fn components(&self) -> Vec<MixtureComponent> {
        (0..self.weights.len())
            .map(|i| MixtureComponent {
                weight: self.weights[i],
                mean: self.means[i].clone(),
                var: self.vars[i].clone(),
                dof: self.dofs.as_ref().map(|d| d[i]),
            })
            .collect()
    }

    fn into_model(self, family: Family) -> Result<MixtureModel> {
        MixtureModel::new(family, self.components())
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding followed by a few Lloyd iterations; the hard
/// assignment gives the starting weights, means and variances.
fn kmeans_init(
    x: &FeatureMatrix,
    k: usize,
    floor: &[f64],
    global_var: &[f64],
    family: Family,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Params {
    let t_len = x.frames();
    let mut centers: Vec<Vec<f64>> = vec![x.frame(rng.random_range(0..t_len)).to_vec()];
    let mut d2: Vec<f64> = x.iter_frames().map(|f| sq_dist(f, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = t_len - 1;
            for (j, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = j;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            rng.random_range(0..t_len)
        };
        let c = x.frame(idx).to_vec();
        for (j, f) in x.iter_frames().enumerate() {
            d2[j] = d2[j].min(sq_dist(f, &c));
        }
        centers.push(c);
    }

    let mut assign = vec![0usize; t_len];
    for _ in 0..LLOYD_ITERS {
        for (j, f) in x.iter_frames().enumerate() {
            assign[j] = (0..k)
                .min_by(|&a, &b| sq_dist(f, &centers[a]).total_cmp(&sq_dist(f, &centers[b])))
                .unwrap();
        }
        let mut sums = vec![vec![0.0; x.dim()]; k];
        let mut counts = vec![0usize; k];
        for (j, f) in x.iter_frames().enumerate() {
            counts[assign[j]] += 1;
            for (s, v) in sums[assign[j]].iter_mut().zip(f) {
                *s += v;
            }
        }
        for i in 0..k {
            if counts[i] > 0 {
                centers[i] = sums[i].iter().map(|s| s / counts[i] as f64).collect();
            }
        }
    }

    let mut counts = vec![0usize; k];
    let mut vars = vec![vec![0.0; x.dim()]; k];
    for (j, f) in x.iter_frames().enumerate() {
        let i = assign[j];
        counts[i] += 1;
        for ((s, v), c) in vars[i].iter_mut().zip(f).zip(&centers[i]) {
            *s += (v - c) * (v - c);
        }
    }
    for i in 0..k {
        for (d, s) in vars[i].iter_mut().enumerate() {
            *s = if counts[i] > 1 {
                (*s / counts[i] as f64).max(floor[d])
            } else {
                global_var[d].max(floor[d])
            };
        }
    }
    let denom = (t_len + k) as f64;
    let weights = counts.iter().map(|&c| (c + 1) as f64 / denom).collect();
    let dofs = match (family, cfg.dof_mode) {
        (Family::Gaussian, _) => None,
        (Family::StudentT, DofMode::Fixed(nu)) => Some(vec![nu; k]),
        (Family::StudentT, DofMode::Estimate) => Some(vec![DOF_FALLBACK; k]),
    };
    Params {
        weights,
        means: centers,
        vars,
        dofs,
    }
}

struct EStep {
    log_likelihood: f64,
    /// Responsibilities, `[frame * k + component]`.
    resp: Vec<f64>,
    /// Student's-t precision weights, same layout; all ones for Gaussians.
    u: Vec<f64>,
}

fn e_step(x: &FeatureMatrix, p: &Params) -> Result<EStep> {
    let model = MixtureModel::new(
        if p.dofs.is_some() {
            Family::StudentT
        } else {
            Family::Gaussian
        },
        p.components(),
    )?;
    let k = p.weights.len();
    let d = x.dim() as f64;
    let mut resp = vec![0.0; x.frames() * k];
    let mut u = vec![1.0; x.frames() * k];
    let mut frame_ll = Vec::with_capacity(x.frames());
    let mut logp = vec![0.0; k];
    let mut maha = vec![0.0; k];
    for (j, f) in x.iter_frames().enumerate() {
        model.component_terms(f, &mut logp, &mut maha);
        if let Some(dofs) = &p.dofs {
            for (i, nu) in dofs.iter().enumerate() {
                u[j * k + i] = (nu + d) / (nu + maha[i]);
            }
        }
        let lse = crate::math::log_sum_exp(&logp);
        for i in 0..k {
            resp[j * k + i] = (logp[i] - lse).exp();
        }
        frame_ll.push(lse);
    }
    Ok(EStep {
        log_likelihood: pairwise_sum(&frame_ll),
        resp,
        u,
    })
}

fn m_step(x: &FeatureMatrix, e: &EStep, prev: &Params, floor: &[f64], cfg: &TrainConfig) -> Params {
    let k = prev.weights.len();
    let dim = x.dim();
    let t_len = x.frames();
    let mut n = vec![0.0; k];
    let mut nu_w = vec![0.0; k];
    let mut sum_x = vec![vec![0.0; dim]; k];
    for (j, f) in x.iter_frames().enumerate() {
        for i in 0..k {
            let r = e.resp[j * k + i];
            let ru = r * e.u[j * k + i];
            n[i] += r;
            nu_w[i] += ru;
            for (s, v) in sum_x[i].iter_mut().zip(f) {
                *s += ru * v;
            }
        }
    }

    let mut means = prev.means.clone();
    let mut vars = prev.vars.clone();
    let degenerate: Vec<bool> = n.iter().map(|&ni| ni < 1e-10).collect();
    for i in 0..k {
        if !degenerate[i] {
            means[i] = sum_x[i].iter().map(|s| s / nu_w[i]).collect();
        }
    }
    let mut sum_sq = vec![vec![0.0; dim]; k];
    for (j, f) in x.iter_frames().enumerate() {
        for i in 0..k {
            let ru = e.resp[j * k + i] * e.u[j * k + i];
            for ((s, v), m) in sum_sq[i].iter_mut().zip(f).zip(&means[i]) {
                *s += ru * (v - m) * (v - m);
            }
        }
    }
    for i in 0..k {
        if !degenerate[i] {
            vars[i] = sum_sq[i]
                .iter()
                .zip(floor)
                .map(|(s, fl)| (s / n[i]).max(*fl))
                .collect();
        }
    }

    let clamped: Vec<f64> = n.iter().map(|&ni| ni.max(1e-300)).collect();
    let total: f64 = clamped.iter().sum();
    let weights = clamped.iter().map(|ni| ni / total).collect();

    let dofs = prev.dofs.as_ref().map(|old| match cfg.dof_mode {
        DofMode::Fixed(nu) => vec![nu; k],
        DofMode::Estimate => (0..k)
            .map(|i| {
                if degenerate[i] {
                    return old[i];
                }
                let mut s = 0.0;
                for j in 0..t_len {
                    let uij = e.u[j * k + i];
                    s += e.resp[j * k + i] * (uij.ln() - uij);
                }
                update_dof(old[i], s / n[i], dim)
            })
            .collect(),
    });

    Params {
        weights,
        means,
        vars,
        dofs,
    }
}

/// Solves the degree-of-freedom score equation
/// `-ψ(ν/2) + ln(ν/2) + 1 + mean(ln u - u) + ψ((ν_old+D)/2) - ln((ν_old+D)/2) = 0`
/// by bisection on `[2.1, 200]`. The left side is decreasing in `ν`; a root
/// outside the bracket is clamped to the nearer end.
pub(crate) fn update_dof(old: f64, mean_log_u_minus_u: f64, dim: usize) -> f64 {
    let half = 0.5 * (old + dim as f64);
    let c = 1.0 + mean_log_u_minus_u + digamma(half) - half.ln();
    let f = |nu: f64| -digamma(0.5 * nu) + (0.5 * nu).ln() + c;
    if !c.is_finite() {
        return DOF_FALLBACK;
    }
    let (mut lo, mut hi) = (MIN_DOF, DOF_SEARCH_MAX);
    if f(lo) <= 0.0 {
        return lo;
    }
    if f(hi) >= 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn run_em(x: &FeatureMatrix, init: Params, floor: &[f64], cfg: &TrainConfig) -> (Params, Vec<f64>) {
    let mut params = init;
    let mut e = match e_step(x, &params) {
        Ok(e) => e,
        Err(_) => return (params, vec![f64::NEG_INFINITY]),
    };
    let mut trace = vec![e.log_likelihood];
    for _ in 0..cfg.max_iters {
        let next = m_step(x, &e, &params, floor, cfg);
        let Ok(next_e) = e_step(x, &next) else { break };
        let prev_ll = e.log_likelihood;
        params = next;
        e = next_e;
        trace.push(e.log_likelihood);
        if (e.log_likelihood - prev_ll).abs() < cfg.rel_tol * prev_ll.abs().max(1e-300) {
            break;
        }
    }
    (params, trace)
}
