//! Certified Hausdorff-dimension and pressure brackets for continued-fraction
//! limit sets, special digit alphabets, conformal-measure sampling and
//! Diophantine Monte-Carlo experiments.

pub mod bracket;
pub mod indexsets;
pub mod contfrac;
pub mod pressure;
pub mod error;
pub mod measure;
pub mod diophantine;

pub use bracket::Bracket;
pub use contfrac::{Digit, DigitWord};
pub use error::{Error, Result};
