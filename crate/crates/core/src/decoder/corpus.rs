use rayon::prelude::*;

use crate::lm::NgramLm;
use crate::model::ConditionalModel;
use crate::textprep::TokenId;

use super::{beam_search, BeamConfig, DecodeError, DecodeResult};

/// Beam-decodes every source, fanning out over `parallelism` worker threads.
///
/// Results are positionally aligned with `sources` and identical to a
/// sequential run. On failure the error of the lowest failing index is
/// returned.
pub fn decode_corpus<M: ConditionalModel + ?Sized>(
    model: &M,
    sources: &[Vec<TokenId>],
    config: &BeamConfig,
    lm: Option<&NgramLm>,
    parallelism: usize,
) -> Result<Vec<DecodeResult>, DecodeError> {
    if parallelism < 1 {
        return Err(DecodeError::Config("parallelism must be at least 1".into()));
    }
    config.validate()?;
    let decode_one = |source: &Vec<TokenId>| beam_search(model, source, config, lm);
    let results: Vec<Result<DecodeResult, DecodeError>> = if parallelism == 1 {
        sources.iter().map(decode_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| DecodeError::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| sources.par_iter().map(decode_one).collect())
    };
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| r.map_err(|e| DecodeError::AtExample { index, source: Box::new(e) }))
        .collect()
}
