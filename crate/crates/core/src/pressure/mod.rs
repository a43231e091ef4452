//! Pressure `P_I(t)`, `λ_t(I) = e^{P_I(t)}`, θ_I and Bowen dimension brackets.

mod bowen;
mod levelsum;
mod moments;
mod operator;
mod regularity;
mod transfer;

pub use bowen::{bowen_dimension, lambda_vs_one, BowenBudget, BowenResult};
pub use levelsum::{kz_increment_bounds, lambda_bracket, level_sum, level_sum_digits, level_sum_table, LevelSumTable};
pub use moments::BulkMoments;
pub use operator::{bracket_with, operator_bracket, operator_bracket_parts, OperatorBracket, PlFunction, CELL_LEVELS};
pub use regularity::{classify_regularity, theta, Regularity, Theta};
pub use transfer::{transfer_from_parts, transfer_lambda, TransferOperatorGrid};

use crate::bracket::Bracket;
use crate::error::Result;
use crate::indexsets::IndexSet;

/// Certified `P_I(t) = log λ_t(I)`.
pub fn pressure(set: &IndexSet, t: f64, cells: usize) -> Result<Bracket> {
    let l = operator_bracket(set, t, cells)?.lambda;
    if !l.is_finite() {
        return Ok(Bracket::new(f64::INFINITY, f64::INFINITY));
    }
    Ok(l.ln())
}
