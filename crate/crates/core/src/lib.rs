//! Keyword-scoped sentiment labelling of social-media posts, five
//! classifiers, and a comparison against demographic disease records.
//!
//! The [`report`] module runs the whole pipeline; the other modules can be
//! used on their own. The book in `book/` walks through each stage.
//!
//! ```
//! use cvdrisk::sentiment::{default_lexicon, label, score};
//!
//! let s = score("Worried sick about my blood pressure", default_lexicon());
//! assert_eq!(label(&s, -0.30)?.value, 0);
//! # Ok::<(), cvdrisk::error::Error>(())
//! ```

pub mod corpus;
pub mod dictionary;
pub mod error;
pub mod features;
pub mod linear_models;
pub mod metrics;
pub mod neural;
pub mod report;
pub mod sentiment;
pub mod textprep;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/sentiment.md")]
    pub mod sentiment {}
    #[doc = include_str!("../../../book/src/preprocessing.md")]
    pub mod preprocessing {}
    #[doc = include_str!("../../../book/src/features.md")]
    pub mod features {}
    #[doc = include_str!("../../../book/src/models.md")]
    pub mod models {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    pub mod metrics {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
}
