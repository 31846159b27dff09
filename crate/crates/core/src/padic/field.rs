//! Towers of local fields over Q_p.
//!
//! Every level stores elements as integral "raw" vectors: coordinates over
//! Z_p with respect to the power basis of each step, reduced mod p^M where M
//! is fixed for the whole tower.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::residue::{FiniteField, ResidueElement};
use crate::error::{Error, Result};

pub(crate) type Raw = Vec<BigInt>;

#[derive(Debug)]
pub(crate) struct Ctx {
    pub p: u64,
    pub digits: u32,
    pub modulus: BigInt,
    pub pbig: BigInt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldRole {
    Base,
    UnramifiedExt,
    EisensteinExt,
}

#[derive(Debug)]
enum Step {
    Base,
    Unramified { degree: usize, modulus: Vec<Raw> },
    Eisenstein { degree: usize, twist: Raw, twist_inv: Raw, twist_unif: Raw },
}

pub(crate) struct FieldData {
    ctx: Arc<Ctx>,
    parent: Option<LocalField>,
    step: Step,
    dim: usize,
    ram: u32,
    residue: FiniteField,
    frob_root: OnceLock<Raw>,
    id: usize,
}

/// A member of a tower Q_p = K_0 ⊂ K_1 ⊂ ... of simple extensions.
#[derive(Clone)]
pub struct LocalField(pub(crate) Arc<FieldData>);

static NEXT_ID: AtomicUsize = AtomicUsize::new(0);

impl fmt::Debug for LocalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LocalField#{}(p={}, e={}, f={}, {:?})",
            self.0.id,
            self.p(),
            self.ram(),
            self.residue_degree(),
            self.role()
        )
    }
}

impl PartialEq for LocalField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}
impl Eq for LocalField {}

/// p-adic digits needed at the base so that the top of a tower with absolute
/// ramification `ram` carries `top_digits` uniformizer digits, plus a guard.
pub fn base_digits_for(ram: u32, top_digits: u32) -> u32 {
    top_digits.div_ceil(ram) + 4
}

impl LocalField {
    /// Q_p with p-adic capacity `digits`.
    pub fn qp(p: u64, digits: u32) -> Result<Self> {
        if p == 2 || !super::residue::is_prime(p) {
            return Err(Error::InvalidParameter(format!("p = {p} must be an odd prime")));
        }
        if digits < 2 {
            return Err(Error::InvalidParameter("need at least 2 digits".into()));
        }
        let pbig = BigInt::from(p);
        let ctx = Ctx { p, digits, modulus: pbig.pow(digits), pbig };
        Ok(LocalField(Arc::new(FieldData {
            ctx: Arc::new(ctx),
            parent: None,
            step: Step::Base,
            dim: 1,
            ram: 1,
            residue: FiniteField::prime(p)?,
            frob_root: OnceLock::new(),
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
        })))
    }

    /// Unramified extension of degree `n`, defined by the lifted smallest
    /// monic irreducible over this field's residue field.
    pub fn unramified_ext(&self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("unramified degree must be at least 2".into()));
        }
        let low = self.0.residue.smallest_irreducible(n)?;
        let modulus = low.iter().map(|c| self.raw_lift(c)).collect();
        let residue = self.0.residue.extension_by(low);
        Ok(self.child(Step::Unramified { degree: n, modulus }, self.0.dim * n, self.0.ram, residue))
    }

    /// Eisenstein extension X^e - γϖ with γ a unit of this field (default 1).
    pub fn eisenstein_ext(&self, e: usize, twist: Option<&super::FieldElement>) -> Result<Self> {
        if e < 2 {
            return Err(Error::InvalidParameter("ramification degree must be at least 2".into()));
        }
        if e as u64 % self.p() == 0 {
            return Err(Error::InvalidParameter(format!("wild ramification: p = {} divides e = {e}", self.p())));
        }
        let twist = match twist {
            None => self.raw_one(),
            Some(g) => {
                if g.field() != self || g.valuation() != super::Valuation::Finite(0) {
                    return Err(Error::InvalidParameter("twist must be a unit of the parent".into()));
                }
                g.unit_raw().to_vec()
            }
        };
        let twist_inv = self.raw_inv_unit(&twist);
        let twist_unif = self.raw_mul(&twist, &self.raw_unif());
        let step = Step::Eisenstein { degree: e, twist, twist_inv, twist_unif };
        Ok(self.child(step, self.0.dim * e, self.0.ram * e as u32, self.0.residue.clone()))
    }

    fn child(&self, step: Step, dim: usize, ram: u32, residue: FiniteField) -> Self {
        LocalField(Arc::new(FieldData {
            ctx: self.0.ctx.clone(),
            parent: Some(self.clone()),
            step,
            dim,
            ram,
            residue,
            frob_root: OnceLock::new(),
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
        }))
    }

    pub fn p(&self) -> u64 {
        self.0.ctx.p
    }

    /// Residue cardinality.
    pub fn q(&self) -> u128 {
        self.0.residue.size()
    }

    /// Absolute ramification index over Q_p.
    pub fn ram(&self) -> u32 {
        self.0.ram
    }

    /// Absolute residue degree over F_p.
    pub fn residue_degree(&self) -> u32 {
        self.0.residue.dim() as u32
    }

    /// Degree over Q_p.
    pub fn absolute_degree(&self) -> usize {
        self.0.dim
    }

    pub fn role(&self) -> FieldRole {
        match self.0.step {
            Step::Base => FieldRole::Base,
            Step::Unramified { .. } => FieldRole::UnramifiedExt,
            Step::Eisenstein { .. } => FieldRole::EisensteinExt,
        }
    }

    pub fn parent(&self) -> Option<&LocalField> {
        self.0.parent.as_ref()
    }

    /// Degree of this step over its parent (1 for the base).
    pub fn step_degree(&self) -> usize {
        match self.0.step {
            Step::Base => 1,
            Step::Unramified { degree, .. } | Step::Eisenstein { degree, .. } => degree,
        }
    }

    pub fn residue_field(&self) -> &FiniteField {
        &self.0.residue
    }

    /// Base p-adic digits carried by the ring representation.
    pub fn base_digits(&self) -> u32 {
        self.0.ctx.digits
    }

    /// Number of own uniformizer digits the raw ring holds.
    pub fn capacity(&self) -> i64 {
        self.0.ctx.digits as i64 * self.0.ram as i64
    }

    pub fn is_ancestor_of(&self, other: &LocalField) -> bool {
        let mut cur = Some(other);
        while let Some(f) = cur {
            if f == self {
                return true;
            }
            cur = f.parent();
        }
        false
    }

    /// Degree of this field over an ancestor.
    pub fn degree_over(&self, ancestor: &LocalField) -> Result<usize> {
        if !ancestor.is_ancestor_of(self) {
            return Err(Error::NotAncestor(format!("{ancestor:?}")));
        }
        Ok(self.0.dim / ancestor.0.dim)
    }

    /// Monic defining polynomial over the parent, low to high, leading 1 included.
    pub fn defining_polynomial(&self) -> Vec<super::FieldElement> {
        let parent = match self.parent() {
            None => return vec![],
            Some(p) => p,
        };
        let cap = parent.capacity();
        let mk = |raw: Raw| super::FieldElement::from_raw(parent, raw, 0, cap);
        let mut out: Vec<_> = match &self.0.step {
            Step::Base => unreachable!(),
            Step::Unramified { modulus, .. } => modulus.iter().map(|c| mk(c.clone())).collect(),
            Step::Eisenstein { degree, twist, .. } => {
                let mut v = vec![super::FieldElement::zero(parent); *degree];
                v[0] = mk(parent.raw_mul(twist, &parent.raw_unif())).neg();
                v
            }
        };
        out.push(super::FieldElement::one(parent));
        out
    }

    /// The unit γ with X^e - γϖ defining an Eisenstein step.
    pub fn twist(&self) -> Option<super::FieldElement> {
        match (&self.0.step, self.parent()) {
            (Step::Eisenstein { twist, .. }, Some(parent)) => {
                Some(super::FieldElement::from_raw(parent, twist.clone(), 0, parent.capacity()))
            }
            _ => None,
        }
    }

    // ---- raw ring arithmetic ----

    pub(crate) fn dim(&self) -> usize {
        self.0.dim
    }

    fn md(&self, x: BigInt) -> BigInt {
        x.mod_floor(&self.0.ctx.modulus)
    }

    fn pdim(&self) -> usize {
        self.parent().map_or(1, |p| p.0.dim)
    }

    pub(crate) fn raw_zero(&self) -> Raw {
        vec![BigInt::zero(); self.0.dim]
    }

    pub(crate) fn raw_one(&self) -> Raw {
        let mut r = self.raw_zero();
        r[0] = BigInt::one();
        r
    }

    pub(crate) fn raw_is_zero(a: &[BigInt]) -> bool {
        a.iter().all(|x| x.is_zero())
    }

    /// Generator of this step over its parent (x or y).
    pub(crate) fn raw_gen(&self) -> Raw {
        let mut r = self.raw_zero();
        match self.0.step {
            Step::Base => r[0] = BigInt::one(),
            _ => r[self.pdim()] = BigInt::one(),
        }
        r
    }

    pub(crate) fn raw_unif(&self) -> Raw {
        match &self.0.step {
            Step::Base => vec![self.0.ctx.pbig.clone()],
            Step::Unramified { .. } => self.raw_embed(&self.parent().unwrap().raw_unif()),
            Step::Eisenstein { .. } => self.raw_gen(),
        }
    }

    pub(crate) fn raw_embed(&self, a: &[BigInt]) -> Raw {
        let mut r = self.raw_zero();
        r[..a.len()].clone_from_slice(a);
        r
    }

    pub(crate) fn raw_from_int(&self, n: &BigInt) -> Raw {
        let mut r = self.raw_zero();
        r[0] = self.md(n.clone());
        r
    }

    pub(crate) fn raw_add(&self, a: &[BigInt], b: &[BigInt]) -> Raw {
        a.iter().zip(b).map(|(x, y)| self.md(x + y)).collect()
    }

    pub(crate) fn raw_sub(&self, a: &[BigInt], b: &[BigInt]) -> Raw {
        a.iter().zip(b).map(|(x, y)| self.md(x - y)).collect()
    }

    pub(crate) fn raw_neg(&self, a: &[BigInt]) -> Raw {
        a.iter().map(|x| self.md(-x)).collect()
    }

    pub(crate) fn raw_mul(&self, a: &[BigInt], b: &[BigInt]) -> Raw {
        match &self.0.step {
            Step::Base => vec![self.md(&a[0] * &b[0])],
            Step::Unramified { degree, modulus } => {
                let parent = self.parent().unwrap();
                let mut prod = self.chunk_product(parent, *degree, a, b);
                let n = *degree;
                for k in (n..2 * n - 1).rev() {
                    let c = std::mem::replace(&mut prod[k], parent.raw_zero());
                    if Self::raw_is_zero(&c) {
                        continue;
                    }
                    for (i, g) in modulus.iter().enumerate() {
                        let t = parent.raw_mul(&c, g);
                        prod[k - n + i] = parent.raw_sub(&prod[k - n + i], &t);
                    }
                }
                prod.truncate(n);
                prod.concat()
            }
            Step::Eisenstein { degree, twist_unif, .. } => {
                let parent = self.parent().unwrap();
                let mut prod = self.chunk_product(parent, *degree, a, b);
                let e = *degree;
                for k in (e..2 * e - 1).rev() {
                    let c = std::mem::replace(&mut prod[k], parent.raw_zero());
                    if Self::raw_is_zero(&c) {
                        continue;
                    }
                    let t = parent.raw_mul(&c, twist_unif);
                    prod[k - e] = parent.raw_add(&prod[k - e], &t);
                }
                prod.truncate(e);
                prod.concat()
            }
        }
    }

    fn chunk_product(&self, parent: &LocalField, n: usize, a: &[BigInt], b: &[BigInt]) -> Vec<Raw> {
        let d = parent.0.dim;
        let mut prod = vec![parent.raw_zero(); 2 * n - 1];
        for i in 0..n {
            let ai = &a[i * d..(i + 1) * d];
            if Self::raw_is_zero(ai) {
                continue;
            }
            for j in 0..n {
                let bj = &b[j * d..(j + 1) * d];
                if Self::raw_is_zero(bj) {
                    continue;
                }
                let t = parent.raw_mul(ai, bj);
                prod[i + j] = parent.raw_add(&prod[i + j], &t);
            }
        }
        prod
    }

    /// Multiply every parent-coordinate by a parent raw scalar.
    pub(crate) fn raw_scale(&self, a: &[BigInt], c: &[BigInt]) -> Raw {
        match self.parent() {
            None => vec![self.md(&a[0] * &c[0])],
            Some(parent) => a.chunks(parent.0.dim).flat_map(|ch| parent.raw_mul(ch, c)).collect(),
        }
    }

    pub(crate) fn raw_mul_unif(&self, a: &[BigInt]) -> Raw {
        match &self.0.step {
            Step::Base => vec![self.md(&a[0] * &self.0.ctx.pbig)],
            Step::Unramified { .. } => {
                let parent = self.parent().unwrap();
                a.chunks(parent.0.dim).flat_map(|ch| parent.raw_mul_unif(ch)).collect()
            }
            Step::Eisenstein { degree, twist_unif, .. } => {
                let parent = self.parent().unwrap();
                let d = parent.0.dim;
                let mut out = Vec::with_capacity(self.0.dim);
                out.extend(parent.raw_mul(&a[(degree - 1) * d..], twist_unif));
                out.extend_from_slice(&a[..(degree - 1) * d]);
                out
            }
        }
    }

    pub(crate) fn raw_mul_unif_pow(&self, a: &[BigInt], k: i64) -> Raw {
        if k <= 0 {
            return a.to_vec();
        }
        if k >= self.capacity() {
            return self.raw_zero();
        }
        if let Step::Base = self.0.step {
            return vec![self.md(&a[0] * self.0.ctx.pbig.pow(k as u32))];
        }
        let mut r = a.to_vec();
        for _ in 0..k {
            r = self.raw_mul_unif(&r);
        }
        r
    }

    /// Exact division by the uniformizer; requires valuation at least 1.
    pub(crate) fn raw_div_unif(&self, a: &[BigInt]) -> Raw {
        match &self.0.step {
            Step::Base => vec![&a[0] / &self.0.ctx.pbig],
            Step::Unramified { .. } => {
                let parent = self.parent().unwrap();
                a.chunks(parent.0.dim).flat_map(|ch| parent.raw_div_unif(ch)).collect()
            }
            Step::Eisenstein { twist_inv, .. } => {
                let parent = self.parent().unwrap();
                let d = parent.0.dim;
                let mut out = Vec::with_capacity(self.0.dim);
                out.extend_from_slice(&a[d..]);
                let c0 = parent.raw_div_unif(&a[..d]);
                out.extend(parent.raw_mul(&c0, twist_inv));
                out
            }
        }
    }

    pub(crate) fn raw_div_unif_pow(&self, a: &[BigInt], k: i64) -> Raw {
        if let Step::Base = self.0.step {
            return vec![&a[0] / self.0.ctx.pbig.pow(k as u32)];
        }
        let mut r = a.to_vec();
        for _ in 0..k {
            r = self.raw_div_unif(&r);
        }
        r
    }

    /// Valuation of a raw vector in this field's normalization (None for zero).
    pub(crate) fn raw_val(&self, a: &[BigInt]) -> Option<i64> {
        match &self.0.step {
            Step::Base => {
                if a[0].is_zero() {
                    None
                } else {
                    let mut v = 0;
                    let mut x = a[0].clone();
                    let p = &self.0.ctx.pbig;
                    while (&x % p).is_zero() {
                        x /= p;
                        v += 1;
                    }
                    Some(v)
                }
            }
            Step::Unramified { .. } => {
                let parent = self.parent().unwrap();
                a.chunks(parent.0.dim).filter_map(|ch| parent.raw_val(ch)).min()
            }
            Step::Eisenstein { degree, .. } => {
                let parent = self.parent().unwrap();
                a.chunks(parent.0.dim)
                    .enumerate()
                    .filter_map(|(i, ch)| parent.raw_val(ch).map(|v| v * *degree as i64 + i as i64))
                    .min()
            }
        }
    }

    /// Reduce modulo ϖ^n.
    pub(crate) fn raw_trunc(&self, a: &[BigInt], n: i64) -> Raw {
        if n <= 0 {
            return self.raw_zero();
        }
        match &self.0.step {
            Step::Base => {
                if n >= self.0.ctx.digits as i64 {
                    a.to_vec()
                } else {
                    vec![a[0].mod_floor(&self.0.ctx.pbig.pow(n as u32))]
                }
            }
            Step::Unramified { .. } => {
                let parent = self.parent().unwrap();
                a.chunks(parent.0.dim).flat_map(|ch| parent.raw_trunc(ch, n)).collect()
            }
            Step::Eisenstein { degree, .. } => {
                let parent = self.parent().unwrap();
                let e = *degree as i64;
                a.chunks(parent.0.dim)
                    .enumerate()
                    .flat_map(|(i, ch)| parent.raw_trunc(ch, (n - i as i64 + e - 1).div_euclid(e)))
                    .collect()
            }
        }
    }

    pub(crate) fn raw_residue(&self, a: &[BigInt]) -> ResidueElement {
        match &self.0.step {
            Step::Base => vec![a[0].mod_floor(&self.0.ctx.pbig).try_into().unwrap()],
            Step::Unramified { .. } => {
                let parent = self.parent().unwrap();
                a.chunks(parent.0.dim).flat_map(|ch| parent.raw_residue(ch)).collect()
            }
            Step::Eisenstein { .. } => {
                let parent = self.parent().unwrap();
                parent.raw_residue(&a[..parent.0.dim])
            }
        }
    }

    /// Canonical lift of a residue element (digits in [0, p)).
    pub(crate) fn raw_lift(&self, r: &[u64]) -> Raw {
        match &self.0.step {
            Step::Base => vec![BigInt::from(r[0])],
            Step::Unramified { .. } => {
                let parent = self.parent().unwrap();
                let rd = parent.0.residue.dim();
                r.chunks(rd).flat_map(|ch| parent.raw_lift(ch)).collect()
            }
            Step::Eisenstein { .. } => self.raw_embed(&self.parent().unwrap().raw_lift(r)),
        }
    }

    /// Inverse of a unit raw by Newton iteration.
    pub(crate) fn raw_inv_unit(&self, u: &[BigInt]) -> Raw {
        let res = self.raw_residue(u);
        let r0 = self.0.residue.inv(&res).expect("unit expected");
        let mut x = self.raw_lift(&r0);
        let two = self.raw_from_int(&BigInt::from(2));
        let mut good = 1i64;
        while good < self.capacity() {
            let ux = self.raw_mul(u, &x);
            x = self.raw_mul(&x, &self.raw_sub(&two, &ux));
            good *= 2;
        }
        x
    }

    /// Root r of the step's defining polynomial with r ≡ x^{q_parent} (unramified steps).
    pub(crate) fn frobenius_root(&self) -> Option<&Raw> {
        let (degree, modulus) = match &self.0.step {
            Step::Unramified { degree, modulus } => (*degree, modulus),
            _ => return None,
        };
        Some(self.0.frob_root.get_or_init(|| {
            let parent = self.parent().unwrap();
            let qp = parent.q();
            let gres = self.0.residue.generator();
            let mut r = self.raw_lift(&self.0.residue.pow(&gres, qp));
            let coeffs: Vec<Raw> = modulus.iter().map(|c| self.raw_embed(c)).collect();
            let mut good = 1i64;
            while good < 2 * self.capacity() {
                // g(r) and g'(r) by Horner
                let mut g = self.raw_one();
                let mut dg = self.raw_from_int(&BigInt::from(degree as u64));
                for i in (0..degree).rev() {
                    g = self.raw_add(&self.raw_mul(&g, &r), &coeffs[i]);
                    if i > 0 {
                        let c = self.raw_scale(&coeffs[i], &parent.raw_from_int(&BigInt::from(i as u64)));
                        dg = self.raw_add(&self.raw_mul(&dg, &r), &c);
                    }
                }
                let step = self.raw_mul(&g, &self.raw_inv_unit(&dg));
                r = self.raw_sub(&r, &step);
                good *= 2;
            }
            r
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_ring_identities() {
        let k = LocalField::qp(3, 6).unwrap();
        let k1 = k.unramified_ext(2).unwrap();
        let k2 = k1.eisenstein_ext(2, None).unwrap();
        let y = k2.raw_gen();
        let y2 = k2.raw_mul(&y, &y);
        assert_eq!(y2, k2.raw_embed(&k1.raw_unif()));
        assert_eq!(k2.raw_val(&y), Some(1));
        assert_eq!(k2.raw_val(&k2.raw_embed(&k1.raw_unif())), Some(2));
        assert_eq!(k2.raw_div_unif(&y2), y);
        let x = k1.raw_gen();
        // F_9 = F_3[x]/(x^2+1)
        let x2 = k1.raw_mul(&x, &x);
        assert_eq!(k1.raw_residue(&x2), vec![2, 0]);
    }

    #[test]
    fn frobenius_root_is_a_root() {
        let k = LocalField::qp(5, 8).unwrap();
        let k1 = k.unramified_ext(3).unwrap();
        let r = k1.frobenius_root().unwrap().clone();
        let mut acc = k1.raw_one();
        let mut val = k1.raw_zero();
        let g = k1.defining_polynomial();
        for c in g.iter() {
            let term = k1.raw_scale(&acc, &c.to_raw_at_zero());
            val = k1.raw_add(&val, &term);
            acc = k1.raw_mul(&acc, &r);
        }
        assert!(LocalField::raw_is_zero(&val));
    }

    #[test]
    fn wild_ramification_rejected() {
        let k = LocalField::qp(3, 4).unwrap();
        assert!(k.eisenstein_ext(3, None).is_err());
        assert!(LocalField::qp(2, 4).is_err());
    }
}
