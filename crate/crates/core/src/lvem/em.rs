use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::state::LVState;
use super::table::{frame_loglik_table, LogLikTable};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::math::{ln_mass, log_sum_exp_floored, pairwise_sum, pairwise_sum_by, xlogy};
use crate::models::ModelBank;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmConfig {
    pub max_iters: usize,
    /// Stop when `|ΔLL| < rel_tol * |LL|`.
    pub rel_tol: f64,
    /// Terms below this fraction of the largest are dropped inside
    /// log-sum-exp.
    pub prob_floor: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            rel_tol: 1e-6,
            prob_floor: 1e-300,
        }
    }
}

/// Per-frame posteriors: `eta[j * M + k]` and `zeta[(j * M + k) * N + l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Posteriors {
    eta: Vec<f64>,
    zeta: Vec<f64>,
    frames: usize,
    speakers: usize,
    keywords: usize,
}

impl Posteriors {
    /// Builds posteriors from a joint `zeta`, deriving `eta` by summing over
    /// keywords.
    pub fn from_zeta(zeta: Vec<f64>, frames: usize, speakers: usize, keywords: usize) -> Result<Self> {
        if zeta.len() != frames * speakers * keywords || frames == 0 {
            return Err(Error::InvalidArgument("zeta shape mismatch".into()));
        }
        if zeta.iter().any(|z| !(0.0..=1.0 + 1e-12).contains(z)) {
            return Err(Error::InvalidArgument("zeta entries must lie in [0, 1]".into()));
        }
        let eta = zeta.chunks(keywords).map(|c| c.iter().sum()).collect();
        Ok(Self {
            eta,
            zeta,
            frames,
            speakers,
            keywords,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn speakers(&self) -> usize {
        self.speakers
    }

    pub fn keywords(&self) -> usize {
        self.keywords
    }

    pub fn eta(&self, frame: usize, speaker: usize) -> f64 {
        self.eta[frame * self.speakers + speaker]
    }

    pub fn zeta(&self, frame: usize, speaker: usize, keyword: usize) -> f64 {
        self.zeta[(frame * self.speakers + speaker) * self.keywords + keyword]
    }

    pub fn eta_slice(&self) -> &[f64] {
        &self.eta
    }

    pub fn zeta_slice(&self) -> &[f64] {
        &self.zeta
    }
}

fn check_shapes(table: &LogLikTable, state: &LVState) -> Result<()> {
    if table.speakers() != state.n_speakers() || table.keywords() != state.n_keywords() {
        return Err(Error::InvalidArgument(format!(
            "table is {}x{} but state is {}x{}",
            table.speakers(),
            table.keywords(),
            state.n_speakers(),
            state.n_keywords()
        )));
    }
    Ok(())
}

/// `ln beta_k + ln delta_kl` for every cell; `-inf` where the mass is zero.
fn log_prior(state: &LVState) -> Vec<f64> {
    let n = state.n_keywords();
    state
        .delta_flat()
        .iter()
        .enumerate()
        .map(|(i, d)| ln_mass(state.beta()[i / n]) + ln_mass(*d))
        .collect()
}

/// Joint and speaker posteriors under `state`.
pub fn e_step(table: &LogLikTable, state: &LVState) -> Result<Posteriors> {
    e_step_floored(table, state, EmConfig::default().prob_floor)
}

pub(crate) fn e_step_floored(table: &LogLikTable, state: &LVState, floor: f64) -> Result<Posteriors> {
    check_shapes(table, state)?;
    let (t, m, n) = (table.frames(), table.speakers(), table.keywords());
    let prior = log_prior(state);
    if prior.iter().all(|p| *p == f64::NEG_INFINITY) {
        return Err(Error::DegenerateState("all-zero state".into()));
    }
    let mut zeta = vec![0.0; t * m * n];
    let mut eta = vec![0.0; t * m];
    zeta.par_chunks_mut(m * n)
        .zip(eta.par_chunks_mut(m))
        .enumerate()
        .for_each(|(j, (z, e))| {
            let logw: Vec<f64> = table.frame(j).iter().zip(&prior).map(|(p, q)| p + q).collect();
            let lse = log_sum_exp_floored(&logw, floor);
            for (zi, w) in z.iter_mut().zip(&logw) {
                *zi = (w - lse).exp();
            }
            for (k, ek) in e.iter_mut().enumerate() {
                *ek = z[k * n..(k + 1) * n].iter().sum();
            }
        });
    Ok(Posteriors {
        eta,
        zeta,
        frames: t,
        speakers: m,
        keywords: n,
    })
}

/// Closed-form maximizer of the expected complete-data log-likelihood:
/// `beta_k = mean_j eta_jk`, `delta_kl ∝ Σ_j zeta_jkl`. A speaker with zero
/// total responsibility gets an all-zero `delta` row.
pub fn m_step(post: &Posteriors) -> LVState {
    let (t, m, n) = (post.frames, post.speakers, post.keywords);
    let beta: Vec<f64> = (0..m)
        .map(|k| pairwise_sum_by(t, |j| post.eta[j * m + k]) / t as f64)
        .collect();
    let mut delta = vec![0.0; m * n];
    for k in 0..m {
        let row: Vec<f64> = (0..n)
            .map(|l| pairwise_sum_by(t, |j| post.zeta[(j * m + k) * n + l]))
            .collect();
        let denom: f64 = row.iter().sum();
        if denom > 0.0 {
            for (d, r) in delta[k * n..(k + 1) * n].iter_mut().zip(&row) {
                *d = r / denom;
            }
        }
    }
    LVState::from_parts_unchecked(beta, delta, n)
}

/// Expected complete-data log-likelihood
/// `Σ_j Σ_k eta_jk ln beta_k + Σ_j Σ_k Σ_l zeta_jkl (ln delta_kl + log p_jkl)`,
/// with `0 ln 0 = 0`.
pub fn q_value(post: &Posteriors, state: &LVState, table: &LogLikTable) -> Result<f64> {
    check_shapes(table, state)?;
    let (t, m, n) = (post.frames, post.speakers, post.keywords);
    if table.frames() != t || m != table.speakers() || n != table.keywords() {
        return Err(Error::InvalidArgument("posteriors do not match table".into()));
    }
    let log_beta: Vec<f64> = state.beta().iter().map(|b| ln_mass(*b)).collect();
    let log_delta: Vec<f64> = state.delta_flat().iter().map(|d| ln_mass(*d)).collect();
    let per_frame: Vec<f64> = (0..t)
        .map(|j| {
            let mut q = 0.0;
            for k in 0..m {
                q += xlogy(post.eta[j * m + k], log_beta[k]);
                for l in 0..n {
                    let z = post.zeta[(j * m + k) * n + l];
                    q += xlogy(z, log_delta[k * n + l]) + xlogy(z, table.get(j, k, l));
                }
            }
            q
        })
        .collect();
    Ok(pairwise_sum(&per_frame))
}

/// `Σ_j ln Σ_{k,l} beta_k delta_kl p_jkl`.
pub fn log_likelihood(table: &LogLikTable, state: &LVState) -> Result<f64> {
    log_likelihood_floored(table, state, 0.0)
}

fn log_likelihood_floored(table: &LogLikTable, state: &LVState, floor: f64) -> Result<f64> {
    check_shapes(table, state)?;
    let prior = log_prior(state);
    if prior.iter().all(|p| *p == f64::NEG_INFINITY) {
        return Err(Error::DegenerateState("all-zero state".into()));
    }
    let per_frame: Vec<f64> = (0..table.frames())
        .into_par_iter()
        .map(|j| {
            let logw: Vec<f64> = table.frame(j).iter().zip(&prior).map(|(p, q)| p + q).collect();
            log_sum_exp_floored(&logw, floor)
        })
        .collect();
    Ok(pairwise_sum(&per_frame))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmOutcome {
    pub state: LVState,
    /// Log-likelihood of the initial state followed by one entry per
    /// iteration.
    pub log_likelihoods: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Evaluates the bank on `x` and runs EM from `init`.
pub fn run_em(x: &FeatureMatrix, bank: &ModelBank, init: &LVState, cfg: &EmConfig) -> Result<EmOutcome> {
    let table = frame_loglik_table(x, bank)?;
    run_em_on_table(&table, init, cfg)
}

pub fn run_em_on_table(table: &LogLikTable, init: &LVState, cfg: &EmConfig) -> Result<EmOutcome> {
    if cfg.max_iters == 0 {
        return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
    }
    check_shapes(table, init)?;
    init.check(1e-9)?;
    let mut state = init.clone();
    let mut lls = vec![log_likelihood_floored(table, &state, cfg.prob_floor)?];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        let post = e_step_floored(table, &state, cfg.prob_floor)?;
        state = m_step(&post);
        iterations += 1;
        let ll = log_likelihood_floored(table, &state, cfg.prob_floor)?;
        let prev = *lls.last().unwrap();
        lls.push(ll);
        if (ll - prev).abs() <= cfg.rel_tol * prev.abs() {
            converged = true;
            break;
        }
    }
    Ok(EmOutcome {
        state,
        log_likelihoods: lls,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lvem::state::{init_flat, init_oracle_keywords, init_oracle_speakers};

    fn table_2x2() -> LogLikTable {
        let vals = [
            [-1.0, -2.5, -0.7, -3.0],
            [-4.0, -0.2, -1.1, -2.2],
            [-0.3, -0.9, -5.0, -1.5],
        ];
        LogLikTable::from_fn(3, 2, 2, |j, k, l| vals[j][k * 2 + l]).unwrap()
    }

    #[test]
    fn single_hypothesis_posteriors_are_one() {
        let t = LogLikTable::from_fn(4, 1, 1, |j, _, _| -(j as f64)).unwrap();
        let p = e_step(&t, &init_flat(1, 1).unwrap()).unwrap();
        for j in 0..4 {
            assert_eq!(p.eta(j, 0), 1.0);
            assert_eq!(p.zeta(j, 0, 0), 1.0);
        }
    }

    #[test]
    fn uniform_state_constant_frame_is_uniform() {
        let t = LogLikTable::from_fn(2, 3, 2, |j, _, _| -10.0 * j as f64 - 3.0).unwrap();
        let p = e_step(&t, &init_flat(3, 2).unwrap()).unwrap();
        for j in 0..2 {
            for k in 0..3 {
                for l in 0..2 {
                    assert!((p.zeta(j, k, l) - 1.0 / 6.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn e_step_matches_linear_domain_arithmetic() {
        let t = table_2x2();
        let s = LVState::new(vec![0.3, 0.7], vec![vec![0.4, 0.6], vec![0.9, 0.1]]).unwrap();
        let p = e_step(&t, &s).unwrap();
        for j in 0..3 {
            let w: Vec<f64> = (0..4)
                .map(|c| s.beta()[c / 2] * s.delta(c / 2, c % 2) * t.get(j, c / 2, c % 2).exp())
                .collect();
            let z: f64 = w.iter().sum();
            for c in 0..4 {
                assert!((p.zeta(j, c / 2, c % 2) - w[c] / z).abs() < 1e-12);
            }
            assert!((p.eta(j, 0) - (w[0] + w[1]) / z).abs() < 1e-12);
        }
    }

    #[test]
    fn m_step_averages() {
        // eta = [[1,0],[0,1]] with all mass on keyword 0.
        let zeta = vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let p = Posteriors::from_zeta(zeta, 2, 2, 2).unwrap();
        let s = m_step(&p);
        assert_eq!(s.beta(), &[0.5, 0.5]);
        assert_eq!(s.delta_row(0), &[1.0, 0.0]);
    }

    #[test]
    fn m_step_degenerate_concentration() {
        let zeta = vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let s = m_step(&Posteriors::from_zeta(zeta, 2, 2, 2).unwrap());
        assert_eq!(s.delta(0, 1), 1.0);
        assert_eq!(s.beta(), &[1.0, 0.0]);
        assert!(s.is_passive(1));
    }

    #[test]
    fn q_single_cell_is_sum_of_logs() {
        let t = LogLikTable::from_fn(3, 1, 1, |j, _, _| -1.5 * j as f64 - 0.25).unwrap();
        let s = init_flat(1, 1).unwrap();
        let p = e_step(&t, &s).unwrap();
        let q = q_value(&p, &s, &t).unwrap();
        assert!((q - (-0.25 - 1.75 - 3.25)).abs() < 1e-12);
        assert!((log_likelihood(&t, &s).unwrap() - q).abs() < 1e-12);
    }

    #[test]
    fn q_shifts_by_t_ln_c() {
        let t = table_2x2();
        let s = LVState::new(vec![0.2, 0.8], vec![vec![0.5, 0.5], vec![0.1, 0.9]]).unwrap();
        let p = e_step(&t, &s).unwrap();
        let c: f64 = 7.5;
        let q0 = q_value(&p, &s, &t).unwrap();
        let q1 = q_value(&p, &s, &t.shifted(c.ln()).unwrap()).unwrap();
        assert!((q1 - q0 - 3.0 * c.ln()).abs() < 1e-12);
    }

    #[test]
    fn likelihood_bounds_and_linear_oracle() {
        let t = table_2x2();
        let s = LVState::new(vec![0.45, 0.55], vec![vec![0.25, 0.75], vec![0.6, 0.4]]).unwrap();
        let ll = log_likelihood(&t, &s).unwrap();
        let mut direct = 0.0;
        let mut bound = 0.0;
        for j in 0..3 {
            let mut acc = 0.0;
            let mut best = f64::NEG_INFINITY;
            for k in 0..2 {
                for l in 0..2 {
                    acc += s.beta()[k] * s.delta(k, l) * t.get(j, k, l).exp();
                    best = best.max(t.get(j, k, l));
                }
            }
            direct += acc.ln();
            bound += best;
        }
        assert!((ll - direct).abs() < 1e-10);
        assert!(ll <= bound);
    }

    #[test]
    fn fixed_point_converges_in_one_iteration() {
        let t = LogLikTable::from_fn(5, 1, 1, |j, _, _| -(j as f64)).unwrap();
        let out = run_em_on_table(&t, &init_flat(1, 1).unwrap(), &EmConfig::default()).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
    }

    #[test]
    fn zero_mass_is_preserved() {
        let t = LogLikTable::from_fn(6, 3, 3, |j, k, l| -(((j + 2 * k + 3 * l) % 5) as f64)).unwrap();
        let cfg = EmConfig {
            max_iters: 25,
            rel_tol: 1e-14,
            ..Default::default()
        };
        let s = run_em_on_table(&t, &init_oracle_speakers(3, 3, &[0, 2]).unwrap(), &cfg).unwrap().state;
        assert_eq!(s.beta()[1], 0.0);
        assert!(s.is_passive(1));
        let s = run_em_on_table(&t, &init_oracle_keywords(3, 3, &[1]).unwrap(), &cfg).unwrap().state;
        for k in 0..3 {
            assert_eq!(s.delta(k, 0), 0.0);
            assert_eq!(s.delta(k, 2), 0.0);
        }
    }

    #[test]
    fn degenerate_state_rejected() {
        let t = table_2x2();
        let zero = LVState::from_parts_unchecked(vec![0.0, 0.0], vec![0.0; 4], 2);
        assert!(matches!(e_step(&t, &zero), Err(Error::DegenerateState(_))));
        assert!(log_likelihood(&t, &zero).is_err());
    }
}
