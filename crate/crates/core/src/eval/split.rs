use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Holds out repetition `held_out` of every cell. Returns the training
/// corpus (all other repetitions) and a test corpus with exactly one
/// utterance per cell.
pub fn loo_split<T: Clone>(corpus: &Corpus<T>, held_out: usize) -> Result<(Corpus<T>, Corpus<T>)> {
    corpus.require_nonempty(2)?;
    if held_out >= corpus.min_reps() {
        return Err(Error::InvalidArgument(format!(
            "held-out index {held_out} but some cell has only {} utterances",
            corpus.min_reps()
        )));
    }
    let mut train = Vec::with_capacity(corpus.cells().len());
    let mut test = Vec::with_capacity(corpus.cells().len());
    for cell in corpus.cells() {
        let mut rest = cell.clone();
        test.push(vec![rest.remove(held_out)]);
        train.push(rest);
    }
    Ok((
        Corpus::new(corpus.speakers().to_vec(), corpus.keywords().to_vec(), train)?,
        Corpus::new(corpus.speakers().to_vec(), corpus.keywords().to_vec(), test)?,
    ))
}
