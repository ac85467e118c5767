use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mix::{GroundTruth, MixSpec, SourceRef};
use crate::error::{Error, Result};

/// Two-speaker evaluation task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    /// Two speakers uttering different keywords.
    #[serde(rename = "MSpDKW")]
    DifferentKeywords,
    /// Two speakers uttering the same keyword.
    #[serde(rename = "MSpSKW")]
    SameKeyword,
}

impl TaskKind {
    pub fn label(self) -> &'static str {
        match self {
            TaskKind::DifferentKeywords => "MSpDKW",
            TaskKind::SameKeyword => "MSpSKW",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mspdkw" | "dkw" => Ok(TaskKind::DifferentKeywords),
            "mspskw" | "skw" => Ok(TaskKind::SameKeyword),
            _ => Err(Error::InvalidArgument(format!("unknown task {s:?}"))),
        }
    }
}

/// Which task lists to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskSelection {
    #[default]
    All,
    #[serde(rename = "mspdkw")]
    DifferentKeywords,
    #[serde(rename = "mspskw")]
    SameKeyword,
}

impl TaskSelection {
    pub fn includes(self, kind: TaskKind) -> bool {
        match self {
            TaskSelection::All => true,
            TaskSelection::DifferentKeywords => kind == TaskKind::DifferentKeywords,
            TaskSelection::SameKeyword => kind == TaskKind::SameKeyword,
        }
    }
}

impl FromStr for TaskSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(TaskSelection::All);
        }
        Ok(match s.parse::<TaskKind>()? {
            TaskKind::DifferentKeywords => TaskSelection::DifferentKeywords,
            TaskKind::SameKeyword => TaskSelection::SameKeyword,
        })
    }
}

/// One mixture to build: which two (speaker, keyword) cells it draws from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub truth: GroundTruth,
}

impl TaskSpec {
    /// Mixture of repetition `utterance` of both cells.
    pub fn mix_spec(&self, utterance: usize, seed: u64) -> MixSpec {
        let p = self.truth.pairs();
        MixSpec::new(
            SourceRef::new(p[0].0, p[0].1, utterance),
            SourceRef::new(p[1].0, p[1].1, utterance),
            seed,
        )
    }
}

/// All two-speaker tasks over `m` speakers and `n` keywords.
///
/// Different-keyword tasks pair every speaker pair with every keyword pair,
/// `C(m,2) * C(n,2)` in total. Of the two ways to hand the keywords to the
/// speakers only one is kept, alternating between them so both orders are
/// represented. Same-keyword tasks pair every speaker pair with each keyword,
/// `C(m,2) * n` in total.
pub fn enumerate_tasks(m: usize, n: usize) -> Result<(Vec<TaskSpec>, Vec<TaskSpec>)> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 speakers and 2 keywords, got {m} and {n}"
        )));
    }
    let speaker_pairs: Vec<(usize, usize)> =
        (0..m).flat_map(|a| (a + 1..m).map(move |b| (a, b))).collect();
    let keyword_pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let mut different = Vec::with_capacity(speaker_pairs.len() * keyword_pairs.len());
    for &(s1, s2) in &speaker_pairs {
        for &(l1, l2) in &keyword_pairs {
            let pairs = if (s1 + s2 + l1 + l2) % 2 == 0 {
                vec![(s1, l1), (s2, l2)]
            } else {
                vec![(s1, l2), (s2, l1)]
            };
            different.push(TaskSpec {
                kind: TaskKind::DifferentKeywords,
                truth: GroundTruth::new(pairs)?,
            });
        }
    }
    let mut same = Vec::with_capacity(speaker_pairs.len() * n);
    for &(s1, s2) in &speaker_pairs {
        for l in 0..n {
            same.push(TaskSpec {
                kind: TaskKind::SameKeyword,
                truth: GroundTruth::new(vec![(s1, l), (s2, l)])?,
            });
        }
    }
    Ok((different, same))
}
