//! Consumer-optimal public market segmentation for finite-type Bertrand
//! oligopolies.
//!
//! Given a market of finitely many consumer types choosing among `N`
//! differentiated products, this crate partitions consumers by their
//! dominant firm, reduces each cell to a one-dimensional monopoly problem
//! over willingness gaps, decomposes that problem into extremal segments
//! preserving the uniform monopoly profit, and assembles the public
//! segmentation together with the pure equilibrium it supports. The crate
//! also verifies candidate equilibria against the full deviation set,
//! computes each firm's minimax profit, and compares segmented profits
//! against unsegmented benchmark equilibria.
//!
//! All computation is over exact rationals; no floating point enters any
//! decision path.

// validation errors carry exact rationals for their messages and only occur
// on cold paths; keep them unboxed
#![allow(clippy::result_large_err)]

pub mod designer;
pub mod docio;
pub mod extremal;
pub mod market;
pub mod rational;
pub mod report;
pub mod verifier;

#[cfg(test)]
pub(crate) mod testgen;

pub use rational::Rational;
