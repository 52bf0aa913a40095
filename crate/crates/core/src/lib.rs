//! Privacy-preserving model training for the aggregation setting: one model
//! demander trains SVM, logistic regression, or naive Bayes over records held
//! by `n` data owners, using only partially homomorphic encryption (Paillier
//! for addition, Cloud-RSA for multiplication).
//!
//! Layout:
//! - [`phe`]: the two cryptosystems and their raw homomorphic operations.
//! - [`encoding`]: decimal fixed-point codec, signed residues, scale tracking.
//! - [`net`]: parties, canonical envelopes, channels, transcript and audit.
//! - [`party`]: the simulated session (demander + owners) that blocks run on.
//! - [`blocks`]: composable two-party and n-party secure building blocks.
//! - [`protocols`]: the SVM, LR and NB training drivers.
//! - [`oracle`]: plaintext reference trainers and brute-force crypto oracles.
//! - [`data`]: CSV ingestion, normalization, partitioning, splits.

pub mod blocks;
pub mod data;
pub mod encoding;
pub mod error;
pub mod net;
pub mod oracle;
pub mod party;
pub mod phe;
pub mod protocols;
pub mod seed;

pub use error::{Error, Result};
