use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::state::LVState;
use crate::error::{Error, Result};

/// `JPM(k, l) = beta_k * delta_kl`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointProbabilityMatrix {
    values: Vec<f64>,
    speakers: usize,
    keywords: usize,
}

impl JointProbabilityMatrix {
    pub fn new(values: Vec<f64>, speakers: usize, keywords: usize) -> Result<Self> {
        if values.len() != speakers * keywords || values.is_empty() {
            return Err(Error::InvalidArgument("JPM shape mismatch".into()));
        }
        Ok(Self {
            values,
            speakers,
            keywords,
        })
    }

    pub fn get(&self, speaker: usize, keyword: usize) -> f64 {
        self.values[speaker * self.keywords + keyword]
    }

    pub fn row(&self, speaker: usize) -> &[f64] {
        &self.values[speaker * self.keywords..(speaker + 1) * self.keywords]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.keywords).map(<[f64]>::to_vec).collect()
    }

    pub fn speakers(&self) -> usize {
        self.speakers
    }

    pub fn keywords(&self) -> usize {
        self.keywords
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }
}

pub fn compute_jpm(state: &LVState) -> JointProbabilityMatrix {
    let n = state.n_keywords();
    let values = state
        .delta_flat()
        .iter()
        .enumerate()
        .map(|(i, d)| state.beta()[i / n] * d)
        .collect();
    JointProbabilityMatrix {
        values,
        speakers: state.n_speakers(),
        keywords: n,
    }
}

/// How active speakers are chosen from `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodePolicy {
    /// The `M*` speakers with the largest mass.
    KnownCount(usize),
    /// Every speaker with `beta_k >= tau * max beta`.
    Threshold(f64),
}

impl Default for DecodePolicy {
    fn default() -> Self {
        DecodePolicy::KnownCount(2)
    }
}

impl DecodePolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DecodePolicy::KnownCount(0) => {
                Err(Error::InvalidArgument("known speaker count must be >= 1".into()))
            }
            DecodePolicy::Threshold(t) if !(t > 0.0 && t < 1.0) => Err(Error::InvalidArgument(
                format!("threshold {t} outside (0, 1)"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for DecodePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodePolicy::KnownCount(m) => write!(f, "known:{m}"),
            DecodePolicy::Threshold(t) => write!(f, "threshold:{t}"),
        }
    }
}

impl FromStr for DecodePolicy {
    type Err = Error;

    /// `known:<M*>` or `threshold:<tau>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad policy '{s}' (known:<n> or threshold:<tau>)"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let policy = match kind {
            "known" => DecodePolicy::KnownCount(value.parse().map_err(|_| bad())?),
            "threshold" => DecodePolicy::Threshold(value.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        policy.validate()?;
        Ok(policy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectedPair {
    pub speaker: usize,
    pub keyword: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// Sorted by speaker index; at most one pair per speaker.
    pub pairs: Vec<DetectedPair>,
    pub beta_star: Vec<f64>,
}

impl DetectionResult {
    pub fn speakers(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.speaker).collect()
    }

    pub fn keywords(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.keyword).collect()
    }
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Picks active speakers from `beta`, then the single largest JPM entry in
/// each active speaker's row. Ties go to the lowest index. Speakers with zero
/// mass are never active.
pub fn decode(jpm: &JointProbabilityMatrix, state: &LVState, policy: DecodePolicy) -> Result<DetectionResult> {
    policy.validate()?;
    let beta = state.beta();
    if beta.len() != jpm.speakers() || state.n_keywords() != jpm.keywords() {
        return Err(Error::InvalidArgument("JPM and state shapes differ".into()));
    }
    let mut active: Vec<usize> = match policy {
        DecodePolicy::KnownCount(count) => {
            let mut order: Vec<usize> = (0..beta.len()).collect();
            order.sort_by(|&a, &b| beta[b].total_cmp(&beta[a]).then(a.cmp(&b)));
            order.truncate(count);
            order
        }
        DecodePolicy::Threshold(tau) => {
            let max = beta.iter().copied().fold(0.0, f64::max);
            (0..beta.len()).filter(|&k| beta[k] >= tau * max).collect()
        }
    };
    active.retain(|&k| beta[k] > 0.0);
    active.sort_unstable();
    let pairs = active
        .into_iter()
        .map(|k| {
            let l = argmax_lowest(jpm.row(k));
            DetectedPair {
                speaker: k,
                keyword: l,
                score: jpm.get(k, l),
            }
        })
        .collect();
    Ok(DetectionResult {
        pairs,
        beta_star: beta.to_vec(),
    })
}
