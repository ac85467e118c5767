use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speaker mass `beta` (length `M`) and conditional keyword mass `delta`
/// (`M x N`, row-major). A speaker with `beta_k = 0` may have an all-zero
/// `delta` row; such a speaker is passive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LVState {
    beta: Vec<f64>,
    delta: Vec<f64>,
    n_keywords: usize,
}

const CONSTRUCT_TOL: f64 = 1e-9;

impl LVState {
    pub fn new(beta: Vec<f64>, delta: Vec<Vec<f64>>) -> Result<Self> {
        let n = delta.first().map(Vec::len).unwrap_or(0);
        if delta.len() != beta.len() || delta.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument(
                "delta must have one row of equal length per speaker".into(),
            ));
        }
        Self::from_flat(beta, delta.concat(), n)
    }

    pub fn from_flat(beta: Vec<f64>, delta: Vec<f64>, n_keywords: usize) -> Result<Self> {
        if beta.is_empty() || n_keywords == 0 || delta.len() != beta.len() * n_keywords {
            return Err(Error::InvalidArgument(format!(
                "state shape mismatch: {} speakers, {} delta entries, {} keywords",
                beta.len(),
                delta.len(),
                n_keywords
            )));
        }
        let s = Self {
            beta,
            delta,
            n_keywords,
        };
        s.check(CONSTRUCT_TOL)?;
        Ok(s)
    }

    /// Non-negativity and simplex constraints; passive rows (zero `beta_k`
    /// and all-zero `delta` row) are exempt from the row-sum check.
    pub fn check(&self, tol: f64) -> Result<()> {
        if self
            .beta
            .iter()
            .chain(&self.delta)
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::DegenerateState(
                "masses must be finite and non-negative".into(),
            ));
        }
        let total: f64 = self.beta.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::DegenerateState(format!("beta sums to {total}")));
        }
        for k in 0..self.n_speakers() {
            let row = self.delta_row(k);
            let sum: f64 = row.iter().sum();
            if sum == 0.0 && self.beta[k] == 0.0 {
                continue;
            }
            if (sum - 1.0).abs() > tol {
                return Err(Error::DegenerateState(format!(
                    "delta row {k} sums to {sum}"
                )));
            }
        }
        Ok(())
    }

    pub fn n_speakers(&self) -> usize {
        self.beta.len()
    }

    pub fn n_keywords(&self) -> usize {
        self.n_keywords
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn delta(&self, speaker: usize, keyword: usize) -> f64 {
        self.delta[speaker * self.n_keywords + keyword]
    }

    pub fn delta_row(&self, speaker: usize) -> &[f64] {
        &self.delta[speaker * self.n_keywords..(speaker + 1) * self.n_keywords]
    }

    pub fn delta_flat(&self) -> &[f64] {
        &self.delta
    }

    pub fn delta_rows(&self) -> Vec<Vec<f64>> {
        self.delta.chunks(self.n_keywords).map(<[f64]>::to_vec).collect()
    }

    pub fn is_passive(&self, speaker: usize) -> bool {
        self.beta[speaker] == 0.0 && self.delta_row(speaker).iter().all(|&d| d == 0.0)
    }

    pub(crate) fn from_parts_unchecked(beta: Vec<f64>, delta: Vec<f64>, n_keywords: usize) -> Self {
        Self {
            beta,
            delta,
            n_keywords,
        }
    }
}

/// `beta_k = 1/M`, `delta_kl = 1/N`.
pub fn init_flat(m: usize, n: usize) -> Result<LVState> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("M and N must be >= 1".into()));
    }
    Ok(LVState::from_parts_unchecked(
        vec![1.0 / m as f64; m],
        vec![1.0 / n as f64; m * n],
        n,
    ))
}

fn index_set(indices: &[usize], bound: usize, what: &'static str) -> Result<Vec<bool>> {
    if indices.is_empty() {
        return Err(Error::InvalidArgument(format!("empty {what} set")));
    }
    let mut mask = vec![false; bound];
    for &i in indices {
        if i >= bound {
            return Err(Error::InvalidArgument(format!(
                "{what} index {i} out of range 0..{bound}"
            )));
        }
        mask[i] = true;
    }
    Ok(mask)
}

/// Known active speakers: uniform `beta` over them, zero elsewhere; passive
/// speakers get all-zero `delta` rows.
pub fn init_oracle_speakers(m: usize, n: usize, active: &[usize]) -> Result<LVState> {
    let mask = index_set(active, m, "active speaker")?;
    let n_active = mask.iter().filter(|&&a| a).count() as f64;
    let beta = mask
        .iter()
        .map(|&a| if a { 1.0 / n_active } else { 0.0 })
        .collect();
    let delta = mask
        .iter()
        .flat_map(|&a| std::iter::repeat_n(if a { 1.0 / n as f64 } else { 0.0 }, n))
        .collect();
    Ok(LVState::from_parts_unchecked(beta, delta, n))
}

/// Known spoken keywords: flat `beta`, every speaker's `delta` row uniform
/// over the spoken keywords and zero elsewhere.
pub fn init_oracle_keywords(m: usize, n: usize, spoken: &[usize]) -> Result<LVState> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be >= 1".into()));
    }
    let mask = index_set(spoken, n, "spoken keyword")?;
    let n_spoken = mask.iter().filter(|&&s| s).count() as f64;
    let row: Vec<f64> = mask
        .iter()
        .map(|&s| if s { 1.0 / n_spoken } else { 0.0 })
        .collect();
    Ok(LVState::from_parts_unchecked(
        vec![1.0 / m as f64; m],
        row.repeat(m),
        n,
    ))
}

/// Initialization condition for an EM run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Flat,
    OracleSpeakers(Vec<usize>),
    OracleKeywords(Vec<usize>),
}

impl InitKind {
    pub fn build(&self, m: usize, n: usize) -> Result<LVState> {
        match self {
            InitKind::Flat => init_flat(m, n),
            InitKind::OracleSpeakers(a) => init_oracle_speakers(m, n, a),
            InitKind::OracleKeywords(s) => init_oracle_keywords(m, n, s),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            InitKind::Flat => "flat",
            InitKind::OracleSpeakers(_) => "oracle-speakers",
            InitKind::OracleKeywords(_) => "oracle-keywords",
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitKind::Flat => f.write_str("flat"),
            InitKind::OracleSpeakers(a) => write!(f, "oracle-speakers{a:?}"),
            InitKind::OracleKeywords(s) => write!(f, "oracle-keywords{s:?}"),
        }
    }
}
