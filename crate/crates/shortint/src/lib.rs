//! Computational companion for the statistics of primes in short intervals:
//! singular series and their tuple averages, exact reduced-residue moments,
//! empirical window-sum moments against their theoretical main terms, and
//! two independent evidence channels (zeta-zero cosine sums, a Monte Carlo
//! random-matrix analogue).

pub mod analogues;
pub mod cli;
pub mod constants;
pub mod error;
pub mod kahan;
pub mod moments;
pub mod residues;
pub mod sieve;
pub mod singular;

pub use error::{Error, Result};
