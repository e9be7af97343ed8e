//! Almost-balanced constrained codes with a single redundancy symbol.
//!
//! The encoders repeatedly re-encode an out-of-band word with one of two
//! biased arithmetic coders and append a short flag, until the word lands
//! inside the `alpha sqrt(n)` band around perfect balance. All coding paths
//! use exact rational arithmetic so that encoder and decoder agree bit for bit.
//!
//! * [`interval`]: exact fractions, interval splits, shortest fractions.
//! * [`constraints`]: exact band membership tests.
//! * [`codec`]: fixed-length biased arithmetic coders.
//! * [`balancer`]: the binary, polarity and 4-ary symbol balancing codes.
//! * [`bounds`]: density, threshold and limit computations (floating point).

pub mod balancer;
pub mod bounds;
pub mod codec;
pub mod constraints;
pub mod error;
pub mod interval;

pub use balancer::{validate_config, Balancer, BranchTag, CodecConfig, Coder, EncodeReport, Mode};
pub use constraints::{AlphaSq, BalanceSpec, Symbol, SymbolSequence};
pub use error::{Error, Result};
pub use interval::{BigFraction, DigitString, Interval};
