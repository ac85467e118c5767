use serde::{Deserialize, Serialize};

use super::decode::{DetectionResult, JointProbabilityMatrix};
use super::em::EmOutcome;
use crate::models::ModelBank;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportPair {
    pub speaker_index: usize,
    pub keyword_index: usize,
    pub speaker: String,
    pub keyword: String,
    pub score: f64,
}

/// Per-utterance inference output as written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub speakers: Vec<String>,
    pub keywords: Vec<String>,
    pub beta_star: Vec<f64>,
    pub delta_star: Vec<Vec<f64>>,
    pub jpm: Vec<Vec<f64>>,
    pub pairs: Vec<ReportPair>,
    pub log_likelihoods: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub init: String,
    pub policy: String,
    /// Effective configuration and seed of the run that produced this report.
    #[serde(default)]
    pub config: serde_json::Value,
}

impl InferenceReport {
    pub fn new(
        bank: &ModelBank,
        outcome: &EmOutcome,
        jpm: &JointProbabilityMatrix,
        detection: &DetectionResult,
        init: String,
        policy: String,
        config: serde_json::Value,
    ) -> Self {
        let pairs = detection
            .pairs
            .iter()
            .map(|p| ReportPair {
                speaker_index: p.speaker,
                keyword_index: p.keyword,
                speaker: bank.speakers()[p.speaker].clone(),
                keyword: bank.keywords()[p.keyword].clone(),
                score: p.score,
            })
            .collect();
        Self {
            speakers: bank.speakers().to_vec(),
            keywords: bank.keywords().to_vec(),
            beta_star: outcome.state.beta().to_vec(),
            delta_star: outcome.state.delta_rows(),
            jpm: jpm.rows(),
            pairs,
            log_likelihoods: outcome.log_likelihoods.clone(),
            iterations: outcome.iterations,
            converged: outcome.converged,
            init,
            policy,
            config,
        }
    }

    /// One line per decoded pair.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for p in &self.pairs {
            s.push_str(&format!("{} said {} (JPM {:.4})\n", p.speaker, p.keyword, p.score));
        }
        s
    }
}
