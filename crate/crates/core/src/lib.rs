//! Hard-decision staircase codes with extended BCH component codes.
//!
//! - [`gf`]: GF(2^ν) arithmetic.
//! - [`bch`]: extended BCH component codes and bounded-distance decoding.
//! - [`staircase`]: block encoder, window geometry and the decoding window.
//! - [`decoder`]: conventional and genie (idealized) window decoders.
//! - [`anchor`]: anchor-based decoder that avoids miscorrections.
//! - [`anchor_check`]: invariant checker for the anchor state machine.
//! - [`sim`]: binary symmetric channel and Monte-Carlo BER simulation.
//! - [`config`]: run configuration, presets and the key-value config format.
//! - [`selftest`]: built-in oracle and scenario checks.

pub mod anchor;
pub mod anchor_check;
pub mod bch;
pub mod config;
pub mod decoder;
pub mod error;
#[doc(hidden)]
pub mod fuzz_checks;
pub mod gf;
pub mod selftest;
pub mod sim;
pub mod staircase;

pub use anchor::{AnchorConfig, AnchorDecoder, Status};
pub use bch::{DecodeOutcome, ExtendedBchCode};
pub use decoder::{ConventionalDecoder, DecoderStats, GenieDecoder, WindowDecoder};
pub use error::{Error, Result};
pub use gf::Field;
pub use staircase::{Block, ComponentCode, Geometry, Window};
