//! Precision-tracked arithmetic in towers of local fields over Q_p.

mod element;
mod field;
mod residue;

pub use element::{FieldElement, Valuation};
pub use field::{base_digits_for, FieldRole, LocalField};
pub use residue::{FiniteField, ResidueElement};

pub(crate) use element::kernel;
pub(crate) use residue::is_prime;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Type of a quadratic extension k″/k′.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadraticKind {
    Unramified,
    Ramified,
}

/// Membership of x ∈ k′ in the norm group of the quadratic extension of the
/// given kind (ramified means the untwisted k′(√ϖ′)).
pub fn in_norm_group(x: &FieldElement, kind: QuadraticKind) -> Result<bool> {
    let Valuation::Finite(v) = x.valuation() else {
        return Err(Error::InsufficientPrecision("norm class of zero".into()));
    };
    match kind {
        QuadraticKind::Unramified => Ok(v.rem_euclid(2) == 0),
        QuadraticKind::Ramified => {
            // x/(-ϖ′)^v must be a square unit
            let m = FieldElement::uniformizer(x.field()).neg().pow(v);
            x.div(&m)?.is_square()
        }
    }
}

/// Norm-group membership for an explicit quadratic extension `ext` of x's field.
pub fn in_norm_group_of(x: &FieldElement, ext: &LocalField) -> Result<bool> {
    if ext.parent() != Some(x.field()) || ext.step_degree() != 2 {
        return Err(Error::InvalidParameter("ext must be a quadratic extension of x's field".into()));
    }
    let Valuation::Finite(v) = x.valuation() else {
        return Err(Error::InsufficientPrecision("norm class of zero".into()));
    };
    match ext.role() {
        FieldRole::UnramifiedExt => Ok(v.rem_euclid(2) == 0),
        _ => {
            let n0 = FieldElement::generator(ext).norm(x.field())?;
            x.div(&n0.pow(v))?.is_square()
        }
    }
}

/// Serializable ϖ-adic expansion of an element: digits from the valuation up to the precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementDigits {
    pub valuation: Option<i64>,
    pub precision: i64,
    pub digits: Vec<ResidueElement>,
}

impl From<&FieldElement> for ElementDigits {
    fn from(x: &FieldElement) -> Self {
        ElementDigits { valuation: x.valuation().finite(), precision: x.precision(), digits: x.digits() }
    }
}

impl ElementDigits {
    /// Rebuild the element in `field`, which must have the residue field the digits came from.
    pub fn to_element(&self, field: &LocalField) -> Result<FieldElement> {
        let prec = self.precision.min(field.capacity());
        let Some(v) = self.valuation else {
            return Ok(FieldElement::zero_to(field, prec));
        };
        let rf = field.residue_field();
        if self.digits.iter().any(|d| d.len() != rf.dim() || d.iter().any(|&c| c >= rf.characteristic())) {
            return Err(Error::InvalidParameter("digit does not belong to the residue field".into()));
        }
        let w = FieldElement::uniformizer(field);
        let mut acc = FieldElement::zero(field);
        let mut wp = w.pow(v);
        for d in &self.digits {
            acc = acc.add(&FieldElement::lift_residue(field, d).mul(&wp));
            wp = wp.mul(&w);
        }
        Ok(acc.truncate(prec))
    }
}
