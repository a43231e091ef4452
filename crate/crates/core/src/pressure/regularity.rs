//! θ_I and the regular / strongly regular / cofinitely regular trichotomy.

use super::bowen::lambda_vs_one;
use crate::bracket::Bracket;
use crate::error::{Error, Result};
use crate::indexsets::{FamilyTag, IndexSet};
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Theta {
    pub value: Bracket,
    pub exact: bool,
}

/// Exponent of convergence of `Σ_{i∈I} i^{-2t}`.
pub fn theta(set: &IndexSet) -> Result<Theta> {
    let exact = |v: f64| Ok(Theta { value: Bracket::point(v), exact: true });
    match set.family() {
        FamilyTag::Finite => exact(0.0),
        FamilyTag::Full => exact(0.5),
        FamilyTag::Geometric { .. } => exact(0.0),
        FamilyTag::I0 { delta } | FamilyTag::Combined { delta } => exact(delta / 2.0),
        _ => match set.theta_exact() {
            Some(v) => exact(v),
            None => Err(Error::Unsupported("no tail oracle for θ".into())),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularity {
    Regular,
    StronglyRegular,
    CofinitelyRegular,
    NotRegular,
    Undetermined,
}

impl std::fmt::Display for Regularity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regularity::Regular => "regular",
            Regularity::StronglyRegular => "strongly-regular",
            Regularity::CofinitelyRegular => "cofinitely-regular",
            Regularity::NotRegular => "not-regular",
            Regularity::Undetermined => "undetermined",
        };
        f.write_str(s)
    }
}

/// Classify `I` by the behaviour of the pressure at θ_I.
pub fn classify_regularity(set: &IndexSet, max_cells: usize) -> Regularity {
    if set.is_finite() {
        return Regularity::StronglyRegular;
    }
    let th = match theta(set) {
        Ok(t) if t.exact => t.value.lo,
        _ => return Regularity::Undetermined,
    };
    let at_theta = set.power_sum(2.0 * th);
    if !at_theta.is_finite() {
        return Regularity::CofinitelyRegular;
    }
    // P is finite at θ and strictly decreasing after it
    match lambda_vs_one(set, th, 0, max_cells) {
        Ok((b, _, _)) if b.lo > 1.0 => Regularity::StronglyRegular,
        Ok((b, _, _)) if b.hi < 1.0 => Regularity::NotRegular,
        _ => Regularity::Undetermined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexsets::{make_full, make_geometric, parse_set};

    #[test]
    fn theta_examples() {
        assert_eq!(theta(&make_full()).unwrap().value.lo, 0.5);
        assert_eq!(theta(&make_geometric(2).unwrap()).unwrap().value.lo, 0.0);
        assert_eq!(theta(&parse_set("1,2,3").unwrap()).unwrap().value.lo, 0.0);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_regularity(&parse_set("4,9").unwrap(), 1024), Regularity::StronglyRegular);
        assert_eq!(classify_regularity(&make_full(), 1024), Regularity::CofinitelyRegular);
        assert_eq!(classify_regularity(&make_geometric(3).unwrap(), 1024), Regularity::CofinitelyRegular);
    }
}
