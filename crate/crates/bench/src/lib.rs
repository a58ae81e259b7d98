//! Shared fixtures for the criterion benches.

use textrait_core::synth::{self, SynthConfig, SynthOutput};
use textrait_core::text::{tokenize, TokenStream};

/// A planted-signal corpus of `documents` responses.
pub fn corpus(documents: usize, seed: u64) -> SynthOutput {
    synth::generate(&SynthConfig {
        documents,
        seed,
        ..Default::default()
    })
    .expect("default synth config is valid")
}

pub fn token_streams(out: &SynthOutput) -> Vec<TokenStream> {
    out.corpus.records().iter().map(|r| tokenize(&r.text)).collect()
}
