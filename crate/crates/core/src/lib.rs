//! Analytics and Monte Carlo engine for binary phase-shift-keying
//! discrimination with a weak-field homodyne (WFH) receiver.
//!
//! The receiver mixes a BPSK coherent signal with a mesoscopic local
//! oscillator on a beam splitter and counts photons at both outputs with
//! number-resolving detectors; the decoded observable is the count
//! difference, which follows a Skellam law. This crate provides:
//!
//! * [`skellam`] — numerically robust pmf, log-pmf and tail sums, plus an
//!   independent brute-force convolution oracle;
//! * [`receiver`] — the interferometer model: port means and phase retrieval;
//! * [`decision`] — the randomized sign rule, MAP thresholding, channel
//!   matrices, error probability and mutual information;
//! * [`baselines`] — Helstrom bound and the large-LO homodyne limit;
//! * [`montecarlo`] — a deterministic shot-by-shot channel simulator;
//! * [`validate`] — a pinned invariant suite used by the CLI.
//!
//! All analytics are pure functions over immutable inputs and safe to call
//! concurrently.

mod bessel;

pub mod baselines;
pub mod decision;
pub mod montecarlo;
mod poisson;
pub mod receiver;
pub mod skellam;
pub mod validate;

pub use decision::{ChannelMatrix, DecisionError, DecisionRule, FiguresOfMerit};
pub use montecarlo::{McEstimate, McProtocol, McRun};
pub use receiver::{BpskSource, PortMeans, ReceiverConfig, ReceiverError, Symbol};
pub use skellam::{SkellamError, SkellamParams, Tail};
