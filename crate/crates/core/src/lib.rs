//! Graph-encoded context embeddings and a many-to-one LSTM for next-word
//! suggestion.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! filesystem, the network or a terminal lives in the `gramweave` companion
//! crate.
//!
//! Pipeline, bottom to top:
//!
//! - [`textprep`]: sentence splitting, cleaning, vocabulary, corpus stats.
//! - [`cograph`]: the adjacent-word co-occurrence graph and its adjacency
//!   operators, plus edge splits for link prediction.
//! - [`gcn`]: a two-layer graph convolutional encoder trained on link
//!   prediction, exporting one embedding per word.
//! - [`ngram`]: post-padded n-gram examples and the embedding tables
//!   (graph-derived or random).
//! - [`lstm`]: the many-to-one LSTM with hand-derived backpropagation.
//! - [`numcore`]: dense matrices, activations, losses, finite differences
//!   and Adam.
#![cfg_attr(not(test), no_std)]
#![deny(missing_debug_implementations)]

extern crate alloc;

pub mod cograph;
mod error;
pub mod gcn;
pub mod lstm;
pub mod ngram;
pub mod numcore;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod rng;
pub mod textprep;

pub use error::{Error, Result};
pub use textprep::{TokenId, Vocabulary};
