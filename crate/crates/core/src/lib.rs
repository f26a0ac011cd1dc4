//! veritext: hypothesize-and-verify page text recognition.
//!
//! A page is segmented by three independent routines (projection profiles,
//! Hough transform, interval clustering of connected components). Every
//! candidate word segment is transcribed by a deep bidirectional LSTM with a
//! CTC output layer, the transcriptions are scored against a character
//! n-gram model, and a best-first pass over the aligned hypothesis tree
//! picks the winning word for each slot of the page transcript.

pub mod cli;
pub mod config;
pub mod ctc;
pub mod error;
pub mod features;
pub mod hypothesis;
pub mod image;
pub mod langmodel;
pub mod metrics;
pub mod network;
pub mod segment;
pub mod syndata;

pub use error::{Error, Result};
