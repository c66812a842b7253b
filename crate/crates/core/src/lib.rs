//! Short-blocklength wiretap coding for the semi-deterministic binary
//! erasure wiretap channel: the main channel is noiseless and the
//! eavesdropper observes the codeword through a BEC(p).
//!
//! * [`gf2`]: dense GF(2) matrices.
//! * [`codes`]: polar, multi-kernel polar and MK-PAC generators; coset
//!   encoding and decoding.
//! * [`bitchannel`]: eavesdropper bit-channel erasure probabilities, by
//!   Monte-Carlo and by exhaustive enumeration.
//! * [`secrecy`]: achievability, converse and second-order rate bounds,
//!   message-set selection under a leakage budget, exact leakage.
//! * [`report`]: CSV output.

pub mod bitchannel;
pub mod codes;
pub mod error;
pub mod gf2;
pub mod numerics;
pub mod report;
pub mod secrecy;

pub use bitchannel::{BitChannelEstimate, Conditioning, ErasureTrialPlan};
pub use codes::{build_generator, CodeSpec, Family, Kernel, RateProfile, WiretapCode};
pub use error::{Error, Result};
pub use gf2::BitMatrix;
pub use secrecy::{BoundResult, LeakageBound, RateOptions, Selection};
