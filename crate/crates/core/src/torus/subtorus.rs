use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::{Case, TorusDescriptor};
use crate::cyclomod::{divisors, euler_phi, mobius, p_poly, saturated_module, Submodule};
use crate::error::{Error, Result};
use crate::padic::FieldElement;

/// Ramanujan sum c_d(k) = Σ_{m | gcd(d,k)} μ(d/m) m.
pub(crate) fn ramanujan_sum(d: u64, k: u64) -> i64 {
    let g = d.gcd(&k);
    divisors(g).into_iter().map(|m| mobius(d / m) * m as i64).sum()
}

/// I′_d = {(2e/d)·l : l ∈ (Z/d)^×} ⊂ {0, …, 2e-1}.
pub fn index_set_complement(two_e: u64, d: u64) -> Result<Vec<u64>> {
    if d == 0 || two_e % d != 0 {
        return Err(Error::NotADivisor(d, two_e));
    }
    let step = two_e / d;
    Ok((0..d).filter(|l| l.gcd(&d) == 1).map(|l| (step * l) % two_e).collect())
}

/// I_d = {0, …, 2e-1} \ I′_d.
pub fn index_set_for_divisor(two_e: u64, d: u64) -> Result<Vec<u64>> {
    let c = index_set_complement(two_e, d)?;
    Ok((0..two_e).filter(|l| !c.contains(l)).collect())
}

/// The subtorus S_{d̲} cut out by the saturation of M_{d̲}.
#[derive(Clone, Debug, Serialize)]
pub struct SubtorusSpec {
    pub torus: TorusDescriptor,
    pub divisors: Vec<u64>,
    /// Saturated character module M̄_{d̲} ⊂ Z[Γ′].
    #[serde(skip)]
    pub module: Submodule,
    pub codim: usize,
    /// Case B: exponents l with ϖ′^l ν ∈ 𝔰.
    pub index_set: Option<Vec<u64>>,
    /// Case B: complement I′.
    pub index_set_complement: Option<Vec<u64>>,
    /// Case A: divisors d′ ∉ d̲, so 𝔰/ϖ″ = ⊕ ker Φ_{d′}(σ).
    pub lie_divisors: Vec<u64>,
    pub eps: u8,
    /// Case B: |μ_{q+1}/μ_{q+1} ∩ S|.
    pub mu_index: Option<u64>,
}

impl SubtorusSpec {
    pub fn is_full(&self) -> bool {
        self.divisors.is_empty()
    }

    /// S = {1}: every divisor removed.
    pub fn is_trivial(&self) -> bool {
        self.codim as u64 == self.torus.gamma_order()
    }

    pub fn is_proper_nontrivial(&self) -> bool {
        !self.is_full() && !self.is_trivial()
    }

    pub fn case(&self) -> Case {
        self.torus.case()
    }

    pub fn dim(&self) -> usize {
        self.torus.gamma_order() as usize - self.codim
    }

    /// gcd of a(χ) over M̄_{d̲}.
    pub fn coefficient_sum_gcd(&self) -> BigInt {
        self.module.coefficient_sum_gcd()
    }

    /// Whether X ∈ 𝔱 lies in 𝔰.
    pub fn lie_contains(&self, x: &FieldElement) -> Result<bool> {
        let t = &self.torus;
        match t.case() {
            Case::B => {
                // X = c ν with c = Σ c_l ϖ′^l; need c_l = 0 for l ∈ I′
                let c = x.div(&t.nu)?.restrict_to(&t.k1)?;
                let coords = c.parent_coords()?;
                Ok(self.index_set_complement.as_ref().unwrap().iter().all(|&l| coords[l as usize].is_zero()))
            }
            Case::A => {
                let c = x.div(&t.u)?.restrict_to(&t.k1)?;
                for &d in &self.divisors {
                    let poly: Vec<i64> = p_poly(t.gamma_order(), d)?.iter().map(|a| a.to_i64().unwrap()).collect();
                    if !t.apply_sigma_poly(&c, &poly)?.is_zero() {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    /// Case A: E(c) = Σ_{d ∈ d̲} e_d(σ) c, the projection of k′ onto ⊕_{d∈d̲} ker Φ_d(σ).
    pub fn removed_projection(&self, c: &FieldElement) -> Result<FieldElement> {
        let t = &self.torus;
        if t.case() != Case::A {
            return Err(Error::Unsupported("projection is used in case A".into()));
        }
        let n = t.gamma_order();
        let coeffs: Vec<i64> = (0..n).map(|k| self.divisors.iter().map(|&d| ramanujan_sum(d, k)).sum()).collect();
        let inv_n = FieldElement::from_int(&t.k1, n as i64).inv()?;
        Ok(t.apply_sigma_poly(c, &coeffs)?.mul(&inv_n))
    }

    /// Elements of k″ spanning 𝔰 over k.
    pub fn lie_spanning_set(&self) -> Result<Vec<FieldElement>> {
        let t = &self.torus;
        match t.case() {
            Case::B => {
                let w = FieldElement::uniformizer(&t.k1);
                self.index_set.as_ref().unwrap().iter().map(|&l| w.pow(l as i64).embed_into(&t.k2).map(|c| c.mul(&t.nu))).collect()
            }
            Case::A => {
                let g = FieldElement::generator(&t.k1);
                let mut out = Vec::new();
                let mut b = FieldElement::one(&t.k1);
                for _ in 0..t.k1.step_degree() {
                    let c = b.sub(&self.removed_projection(&b)?);
                    if !c.is_zero() {
                        out.push(t.lie_element(&c)?);
                    }
                    b = b.mul(&g);
                }
                Ok(out)
            }
        }
    }
}

impl TorusDescriptor {
    /// Generator σ of Gal(k′/k) in case A (the Frobenius).
    pub fn sigma(&self, c: &FieldElement) -> Result<FieldElement> {
        if self.case() != Case::A {
            return Err(Error::Unsupported("σ acts on k′ in case A".into()));
        }
        c.frobenius()
    }

    /// Σ a_k σ^k(c) for c ∈ k′.
    pub fn apply_sigma_poly(&self, c: &FieldElement, coeffs: &[i64]) -> Result<FieldElement> {
        let mut acc = FieldElement::zero(&self.k1);
        let mut cur = c.clone();
        for (k, &a) in coeffs.iter().enumerate() {
            if k > 0 {
                cur = self.sigma(&cur)?;
            }
            if a != 0 {
                acc = acc.add(&cur.mul(&FieldElement::from_int(&self.k1, a)));
            }
        }
        Ok(acc)
    }
}

impl TorusDescriptor {
    pub fn subtorus(&self, ds: &[u64]) -> Result<SubtorusSpec> {
        subtorus_from_divisors(self, ds)
    }

    /// All 2^{#divisors} subtori, indexed by divisor subsets.
    pub fn all_subtori(&self) -> Result<Vec<SubtorusSpec>> {
        let divs = divisors(self.gamma_order());
        (0u32..(1 << divs.len()))
            .map(|mask| {
                let sel: Vec<u64> = divs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &d)| d).collect();
                self.subtorus(&sel)
            })
            .collect()
    }
}

pub fn subtorus_from_divisors(t: &TorusDescriptor, ds: &[u64]) -> Result<SubtorusSpec> {
    let n = t.gamma_order();
    let mut divs: Vec<u64> = ds.to_vec();
    divs.sort_unstable();
    divs.dedup();
    for &d in &divs {
        if d == 0 || n % d != 0 {
            return Err(Error::NotADivisor(d, n));
        }
    }
    let module = saturated_module(n, &divs)?;
    let codim: usize = divs.iter().map(|&d| euler_phi(d) as usize).sum();
    debug_assert_eq!(codim, module.rank());
    let eps = if module.basis().iter().any(|b| b.coefficient_sum().is_odd()) { 2 } else { 1 };
    let lie_divisors: Vec<u64> = divisors(n).into_iter().filter(|d| !divs.contains(d)).collect();
    let (index_set, index_complement, mu_index) = match t.case() {
        Case::A => (None, None, None),
        Case::B => {
            let mut ip: Vec<u64> = Vec::new();
            for &d in &divs {
                ip.extend(index_set_complement(n, d)?);
            }
            ip.sort_unstable();
            ip.dedup();
            let i: Vec<u64> = (0..n).filter(|l| !ip.contains(l)).collect();
            let g = module.coefficient_sum_gcd();
            let q1 = BigInt::from(t.q() + 1);
            let idx = if g.is_zero() { BigInt::from(1) } else { &q1 / q1.gcd(&g) };
            (Some(i), Some(ip), idx.to_u64())
        }
    };
    Ok(SubtorusSpec {
        torus: t.clone(),
        divisors: divs,
        module,
        codim,
        index_set,
        index_set_complement: index_complement,
        lie_divisors,
        eps,
        mu_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{build_max_torus, TorusParams};
    use std::collections::HashSet;

    #[test]
    fn index_sets_for_four() {
        assert_eq!(index_set_for_divisor(4, 4).unwrap(), vec![0, 2]);
        assert_eq!(index_set_complement(4, 4).unwrap(), vec![1, 3]);
        assert_eq!(index_set_complement(4, 1).unwrap(), vec![0]);
        assert!(index_set_complement(4, 3).is_err());
    }

    #[test]
    fn complement_sizes_and_injectivity() {
        for two_e in (2..=12u64).step_by(2) {
            let divs = divisors(two_e);
            let mut seen = HashSet::new();
            for mask in 0u32..(1 << divs.len()) {
                let sel: Vec<u64> = divs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &d)| d).collect();
                let mut ip: Vec<u64> = sel.iter().flat_map(|&d| index_set_complement(two_e, d).unwrap()).collect();
                ip.sort_unstable();
                let before = ip.len();
                ip.dedup();
                assert_eq!(before, ip.len(), "I′_d are disjoint");
                assert_eq!(ip.len() as u64, sel.iter().map(|&d| euler_phi(d)).sum::<u64>());
                assert!(seen.insert(ip));
            }
        }
    }

    #[test]
    fn full_and_single_divisor_subtori() {
        let t = build_max_torus(&TorusParams::case_b(3, 2, 0), 12).unwrap();
        let s = t.subtorus(&[]).unwrap();
        assert!(s.is_full());
        assert_eq!(s.index_set_complement.as_ref().unwrap().len(), 0);
        let s = t.subtorus(&[4]).unwrap();
        assert_eq!(s.index_set.clone().unwrap(), vec![0, 2]);
        assert_eq!(s.codim, 2);
        assert!(t.subtorus(&[3]).is_err());
        let ta = build_max_torus(&TorusParams::case_a(5, 3), 12).unwrap();
        for d in divisors(6) {
            assert_eq!(ta.subtorus(&[d]).unwrap().eps, 1);
        }
        // f odd, d̲ = {1, 2}: -1 ∉ S
        assert_eq!(ta.subtorus(&[1, 2]).unwrap().eps, 2);
        assert_eq!(ta.all_subtori().unwrap().len(), 16);
    }

    #[test]
    fn mu_index_examples() {
        let t = build_max_torus(&TorusParams::case_b(3, 1, 0), 12).unwrap();
        // d̲ = {2}: χ = σ - 1 has a(χ) = 0, so μ_{q+1} ⊂ S
        assert_eq!(t.subtorus(&[2]).unwrap().mu_index, Some(1));
        // d̲ = {1}: χ = 1 + σ has a(χ) = 2, index (q+1)/gcd(q+1, 2) = 2
        assert_eq!(t.subtorus(&[1]).unwrap().mu_index, Some(2));
        assert_eq!(t.subtorus(&[]).unwrap().mu_index, Some(1));
    }

    #[test]
    fn ramanujan_sums() {
        assert_eq!(ramanujan_sum(1, 0), 1);
        assert_eq!(ramanujan_sum(4, 0), 2);
        assert_eq!(ramanujan_sum(4, 1), 0);
        assert_eq!(ramanujan_sum(4, 2), -2);
        assert_eq!(ramanujan_sum(3, 1), -1);
    }

    #[test]
    fn lie_algebra_spans_have_right_dimension() {
        let ta = build_max_torus(&TorusParams::case_a(5, 2), 12).unwrap();
        for s in ta.all_subtori().unwrap() {
            let span = s.lie_spanning_set().unwrap();
            for x in &span {
                assert!(s.lie_contains(x).unwrap());
            }
            // span comes from the 4 basis vectors; its rank is dim S
            let rank = span.len();
            assert!(rank >= s.dim());
            let c = FieldElement::one(&ta.k1);
            let e = s.removed_projection(&c).unwrap();
            assert!(s.removed_projection(&e).unwrap().approx_eq(&e));
        }
        let tb = build_max_torus(&TorusParams::case_b(5, 2, 0), 12).unwrap();
        let s = tb.subtorus(&[4]).unwrap();
        let span = s.lie_spanning_set().unwrap();
        assert_eq!(span.len(), 2);
        assert!(span.iter().all(|x| s.lie_contains(x).unwrap()));
        let bad = tb.lie_element(&FieldElement::uniformizer(&tb.k1)).unwrap();
        assert!(!s.lie_contains(&bad).unwrap());
    }
}
