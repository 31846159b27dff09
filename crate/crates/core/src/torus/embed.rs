use crate::error::{Error, Result};
use crate::padic::{FieldElement, FieldRole, LocalField};

/// Apply the candidate involution of a single step to x.
fn involution(x: &FieldElement) -> Result<FieldElement> {
    let f = x.field();
    let n = f.step_degree();
    match f.role() {
        FieldRole::UnramifiedExt => {
            let mut y = x.clone();
            for _ in 0..n / 2 {
                y = y.frobenius()?;
            }
            Ok(y)
        }
        FieldRole::EisensteinExt => x.scale_generator(&FieldElement::from_int(f.parent().unwrap(), -1)),
        FieldRole::Base => unreachable!(),
    }
}

/// Whether the trace-zero part of k′ is the (−1)-eigenspace of an involution τ ∈ Aut(k′/k),
/// i.e. whether k′/k supports an elliptic torus of the form ker N_{k′/k′^τ}.
///
/// Only single-step extensions are handled. Order-2 automorphisms exist exactly when the
/// step degree is even (Frobenius^{n/2}, or y ↦ −y for y^n = γϖ).
pub fn elliptic_embeddable(k1: &LocalField, k: &LocalField) -> Result<bool> {
    if k1.parent() != Some(k) {
        return Err(Error::Unsupported("only a single extension step is supported".into()));
    }
    let n = k1.step_degree();
    if n % 2 == 1 {
        return Ok(false);
    }
    let g = FieldElement::generator(k1);
    let inv_n = FieldElement::from_int(k1, n as i64).inv()?;
    let mut b = FieldElement::one(k1);
    for _ in 0..n {
        let tr = b.trace(k)?.embed_into(k1)?;
        let x = b.sub(&tr.mul(&inv_n));
        if !x.add(&involution(&x)?).is_zero() {
            return Ok(false);
        }
        b = b.mul(&g);
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_steps_embed() {
        let k = LocalField::qp(5, 10).unwrap();
        assert!(elliptic_embeddable(&k.unramified_ext(2).unwrap(), &k).unwrap());
        assert!(elliptic_embeddable(&k.eisenstein_ext(2, None).unwrap(), &k).unwrap());
    }

    #[test]
    fn higher_degree_steps_do_not() {
        let k = LocalField::qp(5, 10).unwrap();
        for n in [3, 4, 6] {
            assert!(!elliptic_embeddable(&k.unramified_ext(n).unwrap(), &k).unwrap());
            assert!(!elliptic_embeddable(&k.eisenstein_ext(n, None).unwrap(), &k).unwrap());
        }
    }

    #[test]
    fn multi_step_is_unsupported() {
        let k = LocalField::qp(3, 8).unwrap();
        let k2 = k.unramified_ext(2).unwrap().eisenstein_ext(2, None).unwrap();
        assert!(matches!(elliptic_embeddable(&k2, &k), Err(Error::Unsupported(_))));
    }
}
