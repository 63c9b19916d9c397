//! One-shot lossy compression by simulating a noisy channel with shared
//! randomness.
//!
//! The building block is the exponential race (Gumbel-max trick): both ends
//! of a link hold the same pool of `N` proposal samples and the same
//! exponential variates `S_1..S_N`; the sender announces which proposal wins
//! the race `argmin_i S_i / w_i` under importance weights
//! `w_i = target(Y_i) / proposal(Y_i)`. The winning proposal is distributed
//! according to the self-normalized weights, so transmitting one index makes
//! the receiver's sample follow (approximately) the target conditional.
//!
//! On top of the race this crate provides:
//!
//! * [`codec`] — transmitting the *rank* of the winning exponential instead
//!   of the raw index, entropy-coded with universal integer codes, plus the
//!   finite-`N` rate bounds and the pool-size rule that controls output
//!   fidelity in total variation.
//! * [`matching`] — bounds on the probability that two races over the same
//!   shared randomness but different targets select different indices, with
//!   the Monte-Carlo machinery to verify them.
//! * [`side_info`] — Wyner–Ziv style compression where the receiver's race
//!   uses a side-information posterior: LSB binning, decision feedback
//!   (full / partial / hashed), transcript accounting, and rate–distortion
//!   sweeps.
//! * [`mis`] — stratified (multiple importance sampling) proposal pools and
//!   the ordered-race baseline they are compared against.
//! * [`experiments`] — deterministic, seedable experiment drivers behind the
//!   `iscsim` command line tool, writing reproducible CSV artifacts.
//!
//! Everything is driven by counter-based random streams ([`stream`]), so any
//! proposal or race variate can be regenerated in O(1) from `(seed, stream,
//! counter)` — pools of size `2^27` and beyond are raced lazily without ever
//! materializing them.

pub mod codec;
pub mod config;
pub mod errors;
pub mod experiments;
pub mod gauss;
pub mod matching;
pub mod mis;
pub mod model;
pub mod pool;
pub mod race;
pub mod report;
pub mod side_info;
pub mod special;
pub mod stream;

pub use codec::IndexCoder;
pub use errors::{Error, Result};
pub use gauss::{GaussChannel, SideInfoChannel};
pub use model::{Density, DiscreteDist, GaussMix, Normal, WeightModel};
pub use pool::ProposalPool;
pub use race::{select_index, Selection};
pub use side_info::{FeedbackConfig, FeedbackMode};
pub use stream::RandomStream;
