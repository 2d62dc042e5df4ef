//! Exact desk-scale computations around primes in arithmetic progressions:
//! integer and modular arithmetic, segmented sieving, complete exponential
//! sums (Kloosterman, hyper-Kloosterman, the three-frequency F sum), smooth
//! cutoffs with numerical Fourier transforms and Poisson completion checks,
//! combinatorial prime-counting decompositions, sieve weights, and a
//! measurement harness for equidistribution discrepancies.
//!
//! Everything is computed exactly (integer arithmetic) or to an explicit
//! tolerance; quantities the theory only bounds up to an implied constant
//! are measured and reported, never asserted against invented constants.

pub mod arith;
pub mod decomp;
pub mod equidist;
pub mod error;
pub mod expsum;
pub mod sieve;
pub mod smooth;
pub mod weights;

pub use error::{Error, Result};
