use std::cmp::Ordering as CmpOrdering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::field::{LocalField, Raw};
use super::residue::ResidueElement;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Valuation {
    Finite(i64),
    /// Zero to the known precision: the valuation is at least this.
    AtLeast(i64),
    Infinite,
}

impl Valuation {
    /// Lower bound usable in precision bookkeeping.
    pub fn lower_bound(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            _ => None,
        }
    }
}

/// Element ϖ^shift · raw with raw a unit, known modulo ϖ^prec.
///
/// A raw of zero means "zero to precision prec" unless `exact` is set.
#[derive(Clone)]
pub struct FieldElement {
    field: LocalField,
    raw: Raw,
    shift: i64,
    prec: i64,
    exact: bool,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.valuation() {
            Valuation::Infinite => write!(f, "0"),
            Valuation::AtLeast(n) => write!(f, "O(ϖ^{n})"),
            Valuation::Finite(v) => write!(f, "ϖ^{v}·{:?} + O(ϖ^{})", self.raw, self.prec),
        }
    }
}

impl FieldElement {
    pub(crate) fn from_raw(field: &LocalField, raw: Raw, shift: i64, prec: i64) -> Self {
        let prec = prec.min(shift.saturating_add(field.capacity()));
        match field.raw_val(&raw) {
            Some(v) if shift + v < prec => {
                let unit = field.raw_div_unif_pow(&raw, v);
                let s = shift + v;
                let unit = field.raw_trunc(&unit, prec - s);
                FieldElement { field: field.clone(), raw: unit, shift: s, prec, exact: false }
            }
            _ => Self::zero_to(field, prec),
        }
    }

    pub fn zero(field: &LocalField) -> Self {
        FieldElement { field: field.clone(), raw: field.raw_zero(), shift: 0, prec: i64::MAX, exact: true }
    }

    /// Zero known only modulo ϖ^prec.
    pub fn zero_to(field: &LocalField, prec: i64) -> Self {
        FieldElement { field: field.clone(), raw: field.raw_zero(), shift: prec, prec, exact: false }
    }

    pub fn one(field: &LocalField) -> Self {
        Self::from_raw(field, field.raw_one(), 0, field.capacity())
    }

    pub fn from_int(field: &LocalField, n: i64) -> Self {
        Self::from_bigint(field, &BigInt::from(n))
    }

    pub fn from_bigint(field: &LocalField, n: &BigInt) -> Self {
        if n.is_zero() {
            return Self::zero(field);
        }
        // strip p-power first so that the unit part keeps full capacity
        let p = BigInt::from(field.p());
        let mut m = n.clone();
        let mut v = 0i64;
        while (&m % &p).is_zero() {
            m /= &p;
            v += 1;
        }
        let unit = Self::from_raw(field, field.raw_from_int(&m), 0, field.capacity());
        unit.mul(&Self::uniformizer(&field.base_field()).pow(v).embed_into(field).unwrap())
    }

    /// The uniformizer ϖ of the field (p, x's parent uniformizer, or y).
    pub fn uniformizer(field: &LocalField) -> Self {
        Self::from_raw(field, field.raw_unif(), 0, field.capacity())
    }

    /// Generator of the field over its parent.
    pub fn generator(field: &LocalField) -> Self {
        Self::from_raw(field, field.raw_gen(), 0, field.capacity())
    }

    /// Canonical lift of a residue element.
    pub fn lift_residue(field: &LocalField, r: &[u64]) -> Self {
        Self::from_raw(field, field.raw_lift(r), 0, field.capacity())
    }

    /// Teichmüller representative of a residue element.
    pub fn teichmuller(field: &LocalField, r: &[u64]) -> Self {
        let q = field.q();
        let mut x = Self::lift_residue(field, r);
        if x.is_zero() {
            return Self::zero(field);
        }
        // x -> x^q converges to the Teichmüller lift
        for _ in 0..(field.capacity() / field.ram() as i64 + 2) {
            x = x.pow_u128(q);
        }
        x
    }

    /// Random element of ϖ^v 𝒪 known modulo ϖ^prec.
    pub fn random<R: Rng + ?Sized>(field: &LocalField, rng: &mut R, v: i64, prec: i64) -> Self {
        let p = field.p();
        let digits = field.base_digits();
        let raw: Raw = (0..field.dim())
            .map(|_| {
                let mut acc = BigInt::zero();
                for _ in 0..digits {
                    acc = acc * p + rng.gen_range(0..p);
                }
                acc
            })
            .collect();
        Self::from_raw(field, raw, v, prec)
    }

    /// Random unit known to relative precision `prec`.
    pub fn random_unit<R: Rng + ?Sized>(field: &LocalField, rng: &mut R, prec: i64) -> Self {
        loop {
            let x = Self::random(field, rng, 0, prec);
            if x.valuation() == Valuation::Finite(0) {
                return x;
            }
        }
    }

    pub fn field(&self) -> &LocalField {
        &self.field
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    /// Digits known beyond the valuation.
    pub fn relative_precision(&self) -> i64 {
        match self.valuation() {
            Valuation::Finite(v) => self.prec - v,
            _ => 0,
        }
    }

    pub fn valuation(&self) -> Valuation {
        if self.exact {
            Valuation::Infinite
        } else if LocalField::raw_is_zero(&self.raw) {
            Valuation::AtLeast(self.prec)
        } else {
            Valuation::Finite(self.shift)
        }
    }

    /// True for the exact zero and for zero-to-precision.
    pub fn is_zero(&self) -> bool {
        !matches!(self.valuation(), Valuation::Finite(_))
    }

    pub fn is_exact_zero(&self) -> bool {
        self.exact
    }

    pub(crate) fn unit_raw(&self) -> &[BigInt] {
        &self.raw
    }

    /// Integral representative as a raw vector (panics on negative valuation).
    pub(crate) fn to_raw_at_zero(&self) -> Raw {
        match self.valuation() {
            Valuation::Finite(v) => {
                assert!(v >= 0, "non-integral element");
                self.field.raw_mul_unif_pow(&self.raw, v)
            }
            _ => self.field.raw_zero(),
        }
    }

    /// Leading residue digit of the unit part.
    pub fn leading_residue(&self) -> Result<ResidueElement> {
        match self.valuation() {
            Valuation::Finite(_) => Ok(self.field.raw_residue(&self.raw)),
            _ => Err(Error::InsufficientPrecision("leading digit unknown".into())),
        }
    }

    /// Reduction of an integral element to the residue field.
    pub fn residue(&self) -> Result<ResidueElement> {
        match self.valuation() {
            Valuation::Finite(0) => Ok(self.field.raw_residue(&self.raw)),
            Valuation::Finite(v) if v > 0 => Ok(self.field.residue_field().zero()),
            Valuation::AtLeast(n) if n >= 1 => Ok(self.field.residue_field().zero()),
            Valuation::Infinite => Ok(self.field.residue_field().zero()),
            Valuation::Finite(_) => Err(Error::OutsideDomain("residue of a non-integral element".into())),
            Valuation::AtLeast(_) => Err(Error::InsufficientPrecision("residue unknown".into())),
        }
    }

    /// ϖ-adic digits d_0, d_1, ... (canonical residue lifts) from the valuation up to the precision.
    pub fn digits(&self) -> Vec<ResidueElement> {
        let mut out = Vec::new();
        let Valuation::Finite(v) = self.valuation() else { return out };
        let f = &self.field;
        let mut cur = self.raw.clone();
        for _ in v..self.prec {
            let d = f.raw_residue(&cur);
            let lift = f.raw_lift(&d);
            cur = f.raw_div_unif(&f.raw_sub(&cur, &lift));
            out.push(d);
        }
        out
    }

    /// Lower bound for the valuation, or the precision for zeros.
    fn vlow(&self) -> i64 {
        match self.valuation() {
            Valuation::Finite(v) => v,
            Valuation::AtLeast(n) => n,
            Valuation::Infinite => i64::MAX / 4,
        }
    }

    fn check_same(&self, other: &Self) {
        assert!(self.field == other.field, "elements of different fields");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other);
        if self.exact {
            return other.clone();
        }
        if other.exact {
            return self.clone();
        }
        let s = self.shift.min(other.shift);
        let prec = self.prec.min(other.prec);
        let f = &self.field;
        let a = f.raw_mul_unif_pow(&self.raw, self.shift - s);
        let b = f.raw_mul_unif_pow(&other.raw, other.shift - s);
        Self::from_raw(f, f.raw_add(&a, &b), s, prec)
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        r.raw = self.field.raw_neg(&self.raw);
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_same(other);
        if self.exact || other.exact {
            return Self::zero(&self.field);
        }
        let (va, vb) = (self.vlow(), other.vlow());
        let prec = (va.saturating_add(other.prec)).min(vb.saturating_add(self.prec));
        if self.is_zero() || other.is_zero() {
            return Self::zero_to(&self.field, prec);
        }
        let raw = self.field.raw_mul(&self.raw, &other.raw);
        Self::from_raw(&self.field, raw, self.shift + other.shift, prec)
    }

    pub fn inv(&self) -> Result<Self> {
        let Valuation::Finite(v) = self.valuation() else { return Err(Error::DivisionByZero) };
        let raw = self.field.raw_inv_unit(&self.raw);
        Ok(Self::from_raw(&self.field, raw, -v, -v + (self.prec - v)))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, n: i64) -> Self {
        if n < 0 {
            return self.inv().expect("power of zero").pow(-n);
        }
        self.pow_u128(n as u128)
    }

    pub fn pow_u128(&self, mut n: u128) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.field);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    /// Multiply by ϖ^k (exact, no precision loss).
    pub fn shift_by(&self, k: i64) -> Self {
        if self.exact {
            return self.clone();
        }
        let mut r = self.clone();
        r.shift += k;
        r.prec = r.prec.saturating_add(k);
        r
    }

    /// Reduce the known precision to `prec`.
    pub fn truncate(&self, prec: i64) -> Self {
        if self.exact {
            return Self::zero_to(&self.field, prec);
        }
        Self::from_raw(&self.field, self.raw.clone(), self.shift, prec.min(self.prec))
    }

    /// Equality modulo the smaller of the two precisions.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    // ---- tower movements ----

    /// Image in a descendant field.
    pub fn embed_into(&self, target: &LocalField) -> Result<Self> {
        if &self.field == target {
            return Ok(self.clone());
        }
        let parent = target
            .parent()
            .ok_or_else(|| Error::NotAncestor(format!("{:?}", self.field)))?;
        let x = self.embed_into(parent)?;
        Ok(x.embed_one_step(target))
    }

    fn embed_one_step(&self, child: &LocalField) -> Self {
        if self.exact {
            return Self::zero(child);
        }
        let e = match child.role() {
            super::FieldRole::EisensteinExt => child.step_degree() as i64,
            _ => 1,
        };
        if self.is_zero() {
            return Self::zero_to(child, self.prec.saturating_mul(e));
        }
        match child.twist() {
            // ϖ_parent = γ^{-1} y^e
            Some(g) if e > 1 => {
                let unit = self.clone().shift_by(-self.shift).mul(&g.pow(-self.shift));
                let raw = child.raw_embed(&unit.to_raw_at_zero());
                Self::from_raw(child, raw, self.shift * e, self.prec.saturating_mul(e))
            }
            _ => Self::from_raw(child, child.raw_embed(&self.raw), self.shift * e, self.prec.saturating_mul(e)),
        }
    }

    /// Coordinates over the parent with respect to 1, g, g^2, ... where g is the step generator.
    pub fn parent_coords(&self) -> Result<Vec<FieldElement>> {
        let f = &self.field;
        let parent = f.parent().ok_or_else(|| Error::NotAncestor("base field has no parent".into()))?;
        let n = f.step_degree();
        let d = parent.dim();
        let eisen = f.role() == super::FieldRole::EisensteinExt;
        let e = if eisen { n as i64 } else { 1 };
        if self.exact {
            return Ok(vec![FieldElement::zero(parent); n]);
        }
        let coord_prec = |i: usize| (self.prec - i as i64).div_euclid(e) + i64::from((self.prec - i as i64).rem_euclid(e) != 0);
        if self.is_zero() {
            return Ok((0..n).map(|i| FieldElement::zero_to(parent, coord_prec(i))).collect());
        }
        if !eisen {
            return Ok(self
                .raw
                .chunks(d)
                .map(|ch| FieldElement::from_raw(parent, ch.to_vec(), self.shift, self.prec))
                .collect());
        }
        let t = self.shift.div_euclid(e);
        let r = self.shift.rem_euclid(e);
        let raw2 = f.raw_mul_unif_pow(&self.raw, r);
        let gamma_t = f.twist().map(|g| g.pow(t));
        Ok(raw2
            .chunks(d)
            .enumerate()
            .map(|(i, ch)| {
                let c = FieldElement::from_raw(parent, ch.to_vec(), t, coord_prec(i));
                match &gamma_t {
                    Some(g) => c.mul(g),
                    None => c,
                }
            })
            .collect())
    }

    pub fn from_parent_coords(field: &LocalField, coords: &[FieldElement]) -> Result<Self> {
        let g = Self::generator(field);
        let mut acc = Self::zero(field);
        let mut gp = Self::one(field);
        for c in coords {
            acc = acc.add(&c.embed_into(field)?.mul(&gp));
            gp = gp.mul(&g);
        }
        Ok(acc)
    }

    /// Matrix of multiplication by self over the parent, columns = images of basis vectors.
    fn mult_matrix(&self) -> Result<Vec<Vec<FieldElement>>> {
        let f = &self.field;
        let n = f.step_degree();
        let g = Self::generator(f);
        let mut b = Self::one(f);
        let mut cols = Vec::with_capacity(n);
        for _ in 0..n {
            cols.push(self.mul(&b).parent_coords()?);
            b = b.mul(&g);
        }
        Ok(cols)
    }

    fn norm_step(&self) -> Result<Self> {
        let parent = self.field.parent().ok_or_else(|| Error::NotAncestor("base".into()))?.clone();
        if self.exact {
            return Ok(Self::zero(&parent));
        }
        // pull out the uniformizer so the matrix is integral and well-conditioned
        let v = self.vlow();
        let unit = self.shift_by(-v);
        let det = determinant(&parent, unit.mult_matrix()?);
        let scale = if v == 0 { Self::one(&parent) } else { Self::uniformizer(&self.field).norm_step_unscaled()?.pow(v) };
        Ok(det.mul(&scale))
    }

    fn norm_step_unscaled(&self) -> Result<Self> {
        let parent = self.field.parent().unwrap().clone();
        Ok(determinant(&parent, self.mult_matrix()?))
    }

    fn trace_step(&self) -> Result<Self> {
        let parent = self.field.parent().ok_or_else(|| Error::NotAncestor("base".into()))?.clone();
        if self.exact {
            return Ok(Self::zero(&parent));
        }
        let m = self.mult_matrix()?;
        let mut acc = Self::zero(&parent);
        for (i, col) in m.iter().enumerate() {
            acc = acc.add(&col[i]);
        }
        Ok(acc)
    }

    pub fn norm(&self, down_to: &LocalField) -> Result<Self> {
        if !down_to.is_ancestor_of(&self.field) {
            return Err(Error::NotAncestor(format!("{down_to:?}")));
        }
        let mut x = self.clone();
        while &x.field != down_to {
            x = x.norm_step()?;
        }
        Ok(x)
    }

    pub fn trace(&self, down_to: &LocalField) -> Result<Self> {
        if !down_to.is_ancestor_of(&self.field) {
            return Err(Error::NotAncestor(format!("{down_to:?}")));
        }
        let mut x = self.clone();
        while &x.field != down_to {
            x = x.trace_step()?;
        }
        Ok(x)
    }

    /// Express an element lying in an ancestor field.
    pub fn restrict_to(&self, ancestor: &LocalField) -> Result<Self> {
        if &self.field == ancestor {
            return Ok(self.clone());
        }
        if !ancestor.is_ancestor_of(&self.field) {
            return Err(Error::NotAncestor(format!("{ancestor:?}")));
        }
        let coords = self.parent_coords()?;
        for c in &coords[1..] {
            if !c.is_zero() {
                return Err(Error::OutsideDomain("element does not lie in the subfield".into()));
            }
        }
        coords[0].restrict_to(ancestor)
    }

    // ---- automorphisms ----

    /// Arithmetic Frobenius of an unramified step, fixing the parent.
    pub fn frobenius(&self) -> Result<Self> {
        let f = &self.field;
        let r = f
            .frobenius_root()
            .ok_or_else(|| Error::Unsupported("Frobenius needs an unramified step".into()))?
            .clone();
        if self.is_zero() {
            return Ok(self.clone());
        }
        let parent = f.parent().unwrap();
        let mut acc = f.raw_zero();
        let mut rp = f.raw_one();
        for ch in self.raw.chunks(parent.dim()) {
            acc = f.raw_add(&acc, &f.raw_scale(&rp, ch));
            rp = f.raw_mul(&rp, &r);
        }
        Ok(Self::from_raw(f, acc, self.shift, self.prec))
    }

    /// Automorphism y -> ζy of an Eisenstein step, ζ a root of unity in the parent.
    pub fn scale_generator(&self, zeta: &FieldElement) -> Result<Self> {
        let f = &self.field;
        if f.role() != super::FieldRole::EisensteinExt {
            return Err(Error::Unsupported("needs an Eisenstein step".into()));
        }
        let coords = self.parent_coords()?;
        let mut z = Self::one(zeta.field());
        let mut out = Vec::with_capacity(coords.len());
        for c in coords {
            out.push(c.mul(&z));
            z = z.mul(zeta);
        }
        Self::from_parent_coords(f, &out)
    }

    /// Nontrivial automorphism of a quadratic step.
    pub fn conjugate(&self) -> Result<Self> {
        let f = &self.field;
        if f.step_degree() != 2 {
            return Err(Error::Unsupported("conjugation needs a quadratic step".into()));
        }
        match f.role() {
            super::FieldRole::UnramifiedExt => self.frobenius(),
            super::FieldRole::EisensteinExt => {
                let parent = f.parent().unwrap();
                self.scale_generator(&Self::from_int(parent, -1))
            }
            super::FieldRole::Base => unreachable!(),
        }
    }

    // ---- squares ----

    pub fn is_square(&self) -> Result<bool> {
        let Valuation::Finite(v) = self.valuation() else {
            return Err(Error::InsufficientPrecision("square class of zero".into()));
        };
        if v.rem_euclid(2) == 1 {
            return Ok(false);
        }
        let r = self.field.raw_residue(&self.raw);
        Ok(self.field.residue_field().is_square(&r))
    }

    /// Square root by residue Tonelli-Shanks and Newton lifting.
    pub fn sqrt(&self) -> Result<Option<Self>> {
        if self.exact {
            return Ok(Some(self.clone()));
        }
        if !self.is_square()? {
            return Ok(None);
        }
        let v = self.shift;
        let unit = self.shift_by(-v);
        let rf = self.field.residue_field();
        let r0 = rf.sqrt(&self.field.raw_residue(&self.raw)).unwrap();
        let mut y = Self::lift_residue(&self.field, &r0);
        let half = Self::from_int(&self.field, 2).inv()?;
        let mut good = 1;
        while good < 2 * unit.prec.max(1) {
            y = y.add(&unit.div(&y)?).mul(&half);
            good *= 2;
        }
        Ok(Some(y.truncate(unit.prec).shift_by(v / 2)))
    }

    /// The root in 1 + ϖ𝒪 of an element of 1 + ϖ𝒪.
    pub fn hensel_sqrt(&self) -> Result<Self> {
        let one = Self::one(&self.field);
        match self.sub(&one).valuation() {
            Valuation::Finite(v) if v >= 1 => {}
            Valuation::AtLeast(n) if n >= 1 => {}
            Valuation::Infinite => {}
            _ => return Err(Error::OutsideDomain("hensel_sqrt needs x ≡ 1 mod ϖ".into())),
        }
        let half = Self::from_int(&self.field, 2).inv()?;
        let mut y = one;
        let mut good = 1;
        while good < 2 * self.prec.max(1) {
            y = y.add(&self.div(&y)?).mul(&half);
            good *= 2;
        }
        Ok(y.truncate(self.prec))
    }

    // ---- exponential and logarithm ----

    /// p-adic logarithm on 1 + 𝔭.
    pub fn log(&self) -> Result<Self> {
        let one = Self::one(&self.field);
        let z = self.sub(&one);
        let vz = match z.valuation() {
            Valuation::Finite(v) if v >= 1 => v,
            Valuation::AtLeast(n) if n >= 1 => return Ok(Self::zero_to(&self.field, n)),
            Valuation::Infinite => return Ok(Self::zero(&self.field)),
            _ => return Err(Error::OutsideDomain("log needs v(x-1) > 0".into())),
        };
        let target = self.prec;
        let ram = self.field.ram() as i64;
        let p = self.field.p() as i64;
        let mut acc = Self::zero(&self.field);
        let mut zn = one;
        let mut n: i64 = 1;
        loop {
            zn = zn.mul(&z);
            let term = zn.div(&Self::from_int(&self.field, n))?;
            acc = if n % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
            // remaining terms have valuation at least m·vz - ram·log_p(m) for m > n
            let m = n + 1;
            if m * vz - ram * ilog(m, p) >= target && (m..m + 64).all(|k| k * vz - ram * ilog(k, p) >= target) {
                break;
            }
            n += 1;
        }
        Ok(acc.truncate(target))
    }

    /// p-adic exponential on v(X) > v(p)/(p-1).
    pub fn exp(&self) -> Result<Self> {
        let ram = self.field.ram() as i64;
        let p = self.field.p() as i64;
        let vx = match self.valuation() {
            Valuation::Finite(v) => v,
            Valuation::AtLeast(n) if (n * (p - 1)) > ram => return Ok(Self::one(&self.field).truncate(n)),
            Valuation::Infinite => return Ok(Self::one(&self.field)),
            Valuation::AtLeast(_) => return Err(Error::InsufficientPrecision("exp argument unknown".into())),
        };
        if vx * (p - 1) <= ram {
            return Err(Error::OutsideDomain(format!("exp needs v(X) > {ram}/{}", p - 1)));
        }
        let target = self.prec;
        let mut acc = Self::one(&self.field);
        let mut term = Self::one(&self.field);
        let mut n: i64 = 1;
        loop {
            term = term.mul(self).div(&Self::from_int(&self.field, n))?;
            acc = acc.add(&term);
            // v(X^m/m!) >= m·vx - ram·(m-1)/(p-1)
            let m = n + 1;
            if m * vx * (p - 1) - ram * (m - 1) >= target * (p - 1) {
                break;
            }
            n += 1;
        }
        Ok(acc.truncate(target))
    }

    /// Compare valuations, treating unknown zeros as large.
    pub fn cmp_valuation(&self, other: &Self) -> CmpOrdering {
        self.vlow().cmp(&other.vlow())
    }

    /// Integer value for elements of Q_p that are rational integers in [-p^M/2, p^M/2).
    pub fn to_bigint_centered(&self) -> Option<BigInt> {
        if self.field.parent().is_some() || self.shift < 0 {
            return None;
        }
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        let raw = self.to_raw_at_zero();
        let m = BigInt::from(self.field.p()).pow(self.prec.min(self.field.capacity()) as u32);
        let mut x = &raw[0] % &m;
        if &x * 2 >= m {
            x -= &m;
        }
        Some(x)
    }

    pub fn is_one(&self) -> bool {
        self.sub(&Self::one(&self.field)).is_zero()
    }
}

fn ilog(n: i64, p: i64) -> i64 {
    let mut k = 0;
    let mut x = n;
    while x >= p {
        x /= p;
        k += 1;
    }
    k
}

/// Determinant by elimination with minimal-valuation pivots.
pub(crate) fn determinant(field: &LocalField, mut cols: Vec<Vec<FieldElement>>) -> FieldElement {
    let n = cols.len();
    let mut det = FieldElement::one(field);
    for k in 0..n {
        // pivot: entry of column k (rows >= k) of least valuation
        let (pr, _) = (k..n)
            .map(|r| (r, cols[k][r].vlow()))
            .min_by_key(|&(_, v)| v)
            .unwrap();
        let piv = cols[k][pr].clone();
        if piv.is_zero() {
            let bound = piv.vlow();
            let rest: i64 = (k + 1..n).map(|c| (k..n).map(|r| cols[c][r].vlow()).min().unwrap_or(0)).sum();
            let pre = det.vlow();
            return FieldElement::zero_to(field, pre + bound + rest);
        }
        if pr != k {
            for col in cols.iter_mut() {
                col.swap(pr, k);
            }
            det = det.neg();
        }
        det = det.mul(&piv);
        let inv = piv.inv().unwrap();
        for c in k + 1..n {
            let factor = cols[c][k].mul(&inv);
            if factor.is_exact_zero() {
                continue;
            }
            for r in k + 1..n {
                let t = factor.mul(&cols[k][r]);
                cols[c][r] = cols[c][r].sub(&t);
            }
        }
    }
    det
}

/// Basis of {c : Σ_j rows[i][j] c_j = 0 for all i}, by Gauss-Jordan with minimal-valuation pivots.
pub(crate) fn kernel(field: &LocalField, rows: &[Vec<FieldElement>], ncols: usize) -> Vec<Vec<FieldElement>> {
    let mut m: Vec<Vec<FieldElement>> = rows.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r0 = 0;
    for c in 0..ncols {
        let best = (r0..m.len()).filter(|&r| !m[r][c].is_zero()).min_by_key(|&r| m[r][c].vlow());
        let Some(pr) = best else { continue };
        m.swap(pr, r0);
        let inv = m[r0][c].inv().unwrap();
        m[r0] = m[r0].iter().map(|x| x.mul(&inv)).collect();
        for r in 0..m.len() {
            if r != r0 && !m[r][c].is_zero() {
                let factor = m[r][c].clone();
                for j in 0..ncols {
                    let t = factor.mul(&m[r0][j]);
                    m[r][j] = m[r][j].sub(&t);
                }
            }
        }
        pivots.push((r0, c));
        r0 += 1;
        if r0 == m.len() {
            break;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    (0..ncols)
        .filter(|c| !pivot_cols.contains(c))
        .map(|free| {
            let mut v = vec![FieldElement::zero(field); ncols];
            v[free] = FieldElement::one(field);
            for &(r, c) in &pivots {
                v[c] = m[r][free].neg();
            }
            v
        })
        .collect()
}

impl LocalField {
    /// The bottom of the tower.
    pub fn base_field(&self) -> LocalField {
        let mut f = self.clone();
        while let Some(p) = f.parent() {
            f = p.clone();
        }
        f
    }
}
