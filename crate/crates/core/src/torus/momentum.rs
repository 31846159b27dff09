use serde::{Serialize, Serializer};

use super::{SubtorusSpec, TorusDescriptor};
use crate::error::{Error, Result};
use crate::padic::{ElementDigits, FieldElement, LocalField, Valuation};

/// A value ⟨φ(w), X⟩ ∈ k.
#[derive(Clone, Debug)]
pub struct MomentumValue {
    pub value: FieldElement,
}

impl MomentumValue {
    pub fn valuation(&self) -> Valuation {
        self.value.valuation()
    }

    /// True if the value vanishes modulo ϖ^n (ϖ the uniformizer of k).
    pub fn vanishes_to(&self, n: i64) -> bool {
        match self.value.valuation() {
            Valuation::Finite(v) => v >= n,
            Valuation::AtLeast(m) => m >= n,
            Valuation::Infinite => true,
        }
    }
}

impl Serialize for MomentumValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ElementDigits::from(&self.value).serialize(s)
    }
}

fn check_in_lie_algebra(t: &TorusDescriptor, x: &FieldElement) -> Result<()> {
    if x.field() != &t.k2 {
        return Err(Error::InvalidParameter("X must lie in k″".into()));
    }
    if !x.add(&t.tau(x)?).is_zero() {
        return Err(Error::OutsideDomain("X is not in the Lie algebra: τX ≠ −X".into()));
    }
    Ok(())
}

/// ⟨φ(w), X⟩ = ½ tr_{k′/k}(N_{k″/k′}(uw) · X/u) for w ∈ k″ and X ∈ 𝔱.
pub fn momentum_pairing(t: &TorusDescriptor, w: &FieldElement, x: &FieldElement) -> Result<MomentumValue> {
    if w.field() != &t.k2 {
        return Err(Error::InvalidParameter("w must lie in k″".into()));
    }
    check_in_lie_algebra(t, x)?;
    let n = t.u.mul(w).norm(&t.k1)?;
    let y = x.div(&t.u)?.restrict_to(&t.k1)?;
    let half = FieldElement::from_int(&t.k, 2).inv()?;
    Ok(MomentumValue { value: n.mul(&y).trace(&t.k)?.mul(&half) })
}

/// Pairing restricted to 𝔰: rejects X outside the Lie algebra of S.
pub fn subtorus_momentum_pairing(s: &SubtorusSpec, w: &FieldElement, x: &FieldElement) -> Result<MomentumValue> {
    check_in_lie_algebra(&s.torus, x)?;
    if !s.lie_contains(x)? {
        return Err(Error::OutsideDomain("X is not in the Lie algebra of S".into()));
    }
    momentum_pairing(&s.torus, w, x)
}

/// Move x into another copy of the same field.
fn transfer(x: &FieldElement, target: &LocalField) -> Result<FieldElement> {
    if x.field() == target {
        return Ok(x.clone());
    }
    let src = x.field();
    if src.p() != target.p() || src.q() != target.q() || src.ram() != target.ram() || src.absolute_degree() != target.absolute_degree() {
        return Err(Error::InvalidParameter("components have different base fields".into()));
    }
    ElementDigits::from(x).to_element(target)
}

/// Moment map pairing on a product of tori sharing the base field k.
pub fn momentum_pairing_product(parts: &[(&TorusDescriptor, &FieldElement, &FieldElement)]) -> Result<MomentumValue> {
    let (first, _, _) = parts.first().ok_or_else(|| Error::InvalidParameter("empty product".into()))?;
    let k = &first.k;
    let mut acc = FieldElement::zero(k);
    for (t, w, x) in parts {
        let v = momentum_pairing(t, w, x)?;
        acc = acc.add(&transfer(&v.value, k)?);
    }
    Ok(MomentumValue { value: acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{build_max_torus, TorusParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pairing_is_invariant_under_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for params in [TorusParams::case_a(5, 1), TorusParams::case_b(3, 1, 0), TorusParams::case_b(5, 2, 1)] {
            let t = build_max_torus(&params, 16).unwrap();
            let w = FieldElement::random(&t.k2, &mut rng, 0, 12);
            let x = t.lie_element(&FieldElement::random(&t.k1, &mut rng, 0, 12)).unwrap();
            let g = t.random_element(&mut rng, 0).unwrap();
            let a = momentum_pairing(&t, &w, &x).unwrap();
            let b = momentum_pairing(&t, &g.mul(&w), &x).unwrap();
            assert!(a.value.sub(&b.value).is_zero(), "{params:?}");
        }
    }

    #[test]
    fn rejects_non_lie_elements() {
        let t = build_max_torus(&TorusParams::case_a(5, 1), 12).unwrap();
        let one = FieldElement::one(&t.k2);
        assert!(matches!(momentum_pairing(&t, &one, &one), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn product_is_sum_of_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t1 = build_max_torus(&TorusParams::case_a(3, 1), 12).unwrap();
        let t2 = build_max_torus(&TorusParams::case_b(3, 1, 1), 12).unwrap();
        let w1 = FieldElement::random_unit(&t1.k2, &mut rng, 10);
        let w2 = FieldElement::random_unit(&t2.k2, &mut rng, 10);
        let x1 = t1.lie_element(&FieldElement::one(&t1.k1)).unwrap();
        let x2 = t2.lie_element(&FieldElement::one(&t2.k1)).unwrap();
        let a = momentum_pairing(&t1, &w1, &x1).unwrap().value;
        let b = momentum_pairing(&t2, &w2, &x2).unwrap().value;
        let s = momentum_pairing_product(&[(&t1, &w1, &x1), (&t2, &w2, &x2)]).unwrap().value;
        let b1 = transfer(&b, &t1.k).unwrap();
        assert!(s.sub(&a.add(&b1)).is_zero());
    }
}
