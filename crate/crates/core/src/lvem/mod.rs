//! Latent-variable EM over a fixed model bank.
//!
//! Every frame of a mixture is explained as
//! `p(x) = Σ_k beta_k Σ_l delta_kl p(x | speaker k, keyword l)`.
//! EM estimates the speaker mass `beta` and the per-speaker keyword mass
//! `delta`; [`decode`] then reads off one keyword per active speaker from the
//! joint matrix `beta_k * delta_kl`.
//!
//! All likelihood arithmetic is in the log domain. Reductions over frames use
//! a fixed pairwise order, so results do not depend on the thread count.

mod decode;
mod em;
mod report;
mod state;
mod table;

pub use decode::{compute_jpm, decode, DecodePolicy, DetectedPair, DetectionResult, JointProbabilityMatrix};
pub use em::{
    e_step, log_likelihood, m_step, q_value, run_em, run_em_on_table, EmConfig, EmOutcome,
    Posteriors,
};
pub use report::{InferenceReport, ReportPair};
pub use state::{init_flat, init_oracle_keywords, init_oracle_speakers, InitKind, LVState};
pub use table::{frame_loglik_table, LogLikTable};
