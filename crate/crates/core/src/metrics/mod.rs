//! Evaluation statistics and language-characteristic measures.

pub mod formality;
pub mod readability;
pub mod special;
pub mod stats;

pub use formality::{fscore, PosLexicon, PosTag};
pub use readability::{coleman_liau, difficult_words, EasyWords};
pub use stats::{anova_f, cohens_d, pearson, AnovaResult, CorrelationResult};
