//! Per-(speaker, keyword) density models: diagonal Gaussian and Student's-t
//! mixtures, and the bank that holds one per cell.

mod bank;
mod density;
mod train;

pub use bank::{train_bank, ModelBank};
pub use density::{Family, MixtureComponent, MixtureModel, MAX_DOF, MIN_DOF};
pub use train::{train_mixture, train_mixture_traced, DofMode, FitTrace, TrainConfig};
