//! Text-generation port used by the generative replacement strategy.
//!
//! The constrained replacement loop only needs "continue this prompt by a few
//! tokens", so the model behind it is pluggable: a remote HTTP service or the
//! local n-gram model trained on the human corpus (the desk-scale default).

mod http;
mod ngram;

pub use http::{HttpGenerator, HttpGeneratorConfig};
pub use ngram::NgramGenerator;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("generator unavailable: {0}")]
    Unavailable(String),
}

/// A capability to continue a prompt by up to `max_tokens` tokens.
///
/// Implementations must be deterministic for a fixed seed: two runs that issue
/// the same sequence of calls see the same sequence of continuations.
pub trait GeneratorPort {
    fn generate(&mut self, prompt: &str, max_tokens: usize) -> Result<String, GeneratorError>;
}

impl<T: GeneratorPort + ?Sized> GeneratorPort for &mut T {
    fn generate(&mut self, prompt: &str, max_tokens: usize) -> Result<String, GeneratorError> {
        (**self).generate(prompt, max_tokens)
    }
}
