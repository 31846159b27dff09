//! Finite fields as towers of simple extensions of F_p.
//!
//! An element is a flat digit vector over F_p; level `i` stores its
//! coefficients as chunks of the level below.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Element of a [`FiniteField`], as flat F_p digits.
pub type ResidueElement = Vec<u64>;

#[derive(Debug)]
struct Level {
    degree: usize,
    below_dim: usize,
    /// Low coefficients of the monic modulus, as elements of the level below.
    modulus: Vec<ResidueElement>,
}

#[derive(Debug)]
struct Inner {
    p: u64,
    levels: Vec<Level>,
    dim: usize,
    size: u128,
}

#[derive(Clone)]
pub struct FiniteField(Arc<Inner>);

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.0.p, self.0.dim)
    }
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FiniteField {
    pub fn prime(p: u64) -> Result<Self> {
        if !is_prime(p) || p >= 1 << 31 {
            return Err(Error::InvalidParameter(format!("{p} is not a usable prime")));
        }
        Ok(FiniteField(Arc::new(Inner { p, levels: Vec::new(), dim: 1, size: p as u128 })))
    }

    /// Degree-`n` extension defined by the lexicographically smallest monic
    /// irreducible, coefficients ordered from X^{n-1} down to X^0.
    pub fn extension(&self, n: usize) -> Result<Self> {
        let g = self.smallest_irreducible(n)?;
        Ok(self.extension_by(g))
    }

    pub(crate) fn extension_by(&self, modulus_low: Vec<ResidueElement>) -> Self {
        let n = modulus_low.len();
        let mut levels: Vec<Level> = self
            .0
            .levels
            .iter()
            .map(|l| Level { degree: l.degree, below_dim: l.below_dim, modulus: l.modulus.clone() })
            .collect();
        levels.push(Level { degree: n, below_dim: self.0.dim, modulus: modulus_low });
        FiniteField(Arc::new(Inner {
            p: self.0.p,
            levels,
            dim: self.0.dim * n,
            size: self.0.size.pow(n as u32),
        }))
    }

    /// Field one level down (None for F_p).
    pub fn base(&self) -> Option<FiniteField> {
        if self.0.levels.is_empty() {
            return None;
        }
        let mut levels: Vec<Level> = self
            .0
            .levels
            .iter()
            .map(|l| Level { degree: l.degree, below_dim: l.below_dim, modulus: l.modulus.clone() })
            .collect();
        let top = levels.pop().unwrap();
        Some(FiniteField(Arc::new(Inner {
            p: self.0.p,
            levels,
            dim: top.below_dim,
            size: (self.0.p as u128).pow(top.below_dim as u32),
        })))
    }

    /// Modulus of the top level, low coefficients over the level below.
    pub fn top_modulus(&self) -> Option<&[ResidueElement]> {
        self.0.levels.last().map(|l| l.modulus.as_slice())
    }

    pub fn characteristic(&self) -> u64 {
        self.0.p
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn size(&self) -> u128 {
        self.0.size
    }

    pub fn zero(&self) -> ResidueElement {
        vec![0; self.0.dim]
    }

    pub fn one(&self) -> ResidueElement {
        let mut v = self.zero();
        v[0] = 1;
        v
    }

    pub fn from_u64(&self, a: u64) -> ResidueElement {
        let mut v = self.zero();
        v[0] = a % self.0.p;
        v
    }

    /// Generator of the top level over the level below.
    pub fn generator(&self) -> ResidueElement {
        let mut v = self.zero();
        match self.0.levels.last() {
            None => v[0] = 0,
            Some(l) => {
                if l.degree > 1 {
                    v[l.below_dim] = 1;
                } else {
                    // degree one: the root of X + c is -c
                    let c = &l.modulus[0];
                    for (i, d) in c.iter().enumerate() {
                        v[i] = (self.0.p - d) % self.0.p;
                    }
                }
            }
        }
        v
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&d| d == 0)
    }

    pub fn element(&self, index: u128) -> ResidueElement {
        let p = self.0.p as u128;
        let mut i = index;
        (0..self.0.dim)
            .map(|_| {
                let d = (i % p) as u64;
                i /= p;
                d
            })
            .collect()
    }

    pub fn index_of(&self, a: &[u64]) -> u128 {
        a.iter().rev().fold(0u128, |acc, &d| acc * self.0.p as u128 + d as u128)
    }

    pub fn elements(&self) -> impl Iterator<Item = ResidueElement> + '_ {
        (0..self.0.size).map(move |i| self.element(i))
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> ResidueElement {
        let p = self.0.p;
        a.iter().zip(b).map(|(x, y)| (x + y) % p).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> ResidueElement {
        let p = self.0.p;
        a.iter().zip(b).map(|(x, y)| (x + p - y) % p).collect()
    }

    pub fn neg(&self, a: &[u64]) -> ResidueElement {
        let p = self.0.p;
        a.iter().map(|x| (p - x) % p).collect()
    }

    pub fn scale(&self, c: u64, a: &[u64]) -> ResidueElement {
        let p = self.0.p;
        a.iter().map(|x| x * (c % p) % p).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> ResidueElement {
        self.mul_at(self.0.levels.len(), a, b)
    }

    fn mul_at(&self, level: usize, a: &[u64], b: &[u64]) -> ResidueElement {
        let p = self.0.p;
        if level == 0 {
            return vec![a[0] * b[0] % p];
        }
        let lv = &self.0.levels[level - 1];
        let (n, bd) = (lv.degree, lv.below_dim);
        let mut prod = vec![vec![0u64; bd]; 2 * n - 1];
        for i in 0..n {
            let ai = &a[i * bd..(i + 1) * bd];
            if ai.iter().all(|&d| d == 0) {
                continue;
            }
            for j in 0..n {
                let bj = &b[j * bd..(j + 1) * bd];
                if bj.iter().all(|&d| d == 0) {
                    continue;
                }
                let t = self.mul_at(level - 1, ai, bj);
                for (x, y) in prod[i + j].iter_mut().zip(t) {
                    *x = (*x + y) % p;
                }
            }
        }
        for k in (n..2 * n - 1).rev() {
            let c = std::mem::replace(&mut prod[k], vec![0; bd]);
            if c.iter().all(|&d| d == 0) {
                continue;
            }
            for i in 0..n {
                let t = self.mul_at(level - 1, &c, &lv.modulus[i]);
                for (x, y) in prod[k - n + i].iter_mut().zip(t) {
                    *x = (*x + p - y) % p;
                }
            }
        }
        prod.truncate(n);
        prod.concat()
    }

    pub fn pow(&self, a: &[u64], mut e: u128) -> ResidueElement {
        let mut base = a.to_vec();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &[u64]) -> Result<ResidueElement> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.0.size - 2))
    }

    /// x -> x^p.
    pub fn frobenius(&self, a: &[u64]) -> ResidueElement {
        self.pow(a, self.0.p as u128)
    }

    pub fn is_square(&self, a: &[u64]) -> bool {
        self.is_zero(a) || self.pow(a, (self.0.size - 1) / 2) == self.one()
    }

    pub fn is_nonzero_square(&self, a: &[u64]) -> bool {
        !self.is_zero(a) && self.is_square(a)
    }

    /// Smallest non-square in index order.
    pub fn smallest_nonsquare(&self) -> ResidueElement {
        (1..self.0.size)
            .map(|i| self.element(i))
            .find(|x| !self.is_square(x))
            .expect("odd characteristic has non-squares")
    }

    /// Tonelli-Shanks.
    pub fn sqrt(&self, a: &[u64]) -> Option<ResidueElement> {
        if self.is_zero(a) {
            return Some(self.zero());
        }
        if !self.is_square(a) {
            return None;
        }
        let mut q = self.0.size - 1;
        let mut s = 0u32;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let z = self.smallest_nonsquare();
        let mut m = s;
        let mut c = self.pow(&z, q);
        let mut t = self.pow(a, q);
        let mut r = self.pow(a, (q + 1) / 2);
        let one = self.one();
        while t != one {
            let mut i = 0;
            let mut tt = t.clone();
            while tt != one {
                tt = self.mul(&tt, &tt);
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(m - i - 1) {
                b = self.mul(&b, &b);
            }
            m = i;
            c = self.mul(&b, &b);
            t = self.mul(&t, &c);
            r = self.mul(&r, &b);
        }
        Some(r)
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: &[u64]) -> u128 {
        let n = self.0.size - 1;
        let mut ord = n;
        for r in prime_factors_u128(n) {
            while ord % r == 0 && self.pow(a, ord / r) == self.one() {
                ord /= r;
            }
        }
        ord
    }

    /// A generator of the multiplicative group (smallest index).
    pub fn primitive_element(&self) -> ResidueElement {
        let n = self.0.size - 1;
        (1..self.0.size).map(|i| self.element(i)).find(|x| self.order(x) == n).unwrap()
    }

    // polynomial helpers over this field; coefficient vectors low to high

    fn poly_trim(&self, a: &mut Vec<ResidueElement>) {
        while a.last().map_or(false, |c| self.is_zero(c)) {
            a.pop();
        }
    }

    fn poly_rem(&self, a: &[ResidueElement], g: &[ResidueElement]) -> Vec<ResidueElement> {
        let mut r = a.to_vec();
        self.poly_trim(&mut r);
        let dg = g.len() - 1;
        let lead_inv = self.inv(&g[dg]).unwrap();
        while r.len() > dg {
            let k = r.len() - 1;
            let c = self.mul(&r[k], &lead_inv);
            for i in 0..=dg {
                let t = self.mul(&c, &g[i]);
                r[k - dg + i] = self.sub(&r[k - dg + i], &t);
            }
            self.poly_trim(&mut r);
        }
        r
    }

    fn poly_mulmod(&self, a: &[ResidueElement], b: &[ResidueElement], g: &[ResidueElement]) -> Vec<ResidueElement> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![self.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if self.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                let t = self.mul(x, y);
                prod[i + j] = self.add(&prod[i + j], &t);
            }
        }
        self.poly_rem(&prod, g)
    }

    fn poly_powmod(&self, a: &[ResidueElement], mut e: u128, g: &[ResidueElement]) -> Vec<ResidueElement> {
        let mut base = self.poly_rem(a, g);
        let mut acc = vec![self.one()];
        while e > 0 {
            if e & 1 == 1 {
                acc = self.poly_mulmod(&acc, &base, g);
            }
            base = self.poly_mulmod(&base, &base, g);
            e >>= 1;
        }
        acc
    }

    fn poly_gcd(&self, a: &[ResidueElement], b: &[ResidueElement]) -> Vec<ResidueElement> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        self.poly_trim(&mut a);
        self.poly_trim(&mut b);
        while !b.is_empty() {
            let r = self.poly_rem(&a, &b);
            a = b;
            b = r;
        }
        a
    }

    /// Rabin's irreducibility test for a monic polynomial given by its low coefficients.
    pub fn is_irreducible(&self, low: &[ResidueElement]) -> bool {
        let n = low.len();
        if n == 0 {
            return false;
        }
        if n == 1 {
            return true;
        }
        if self.is_zero(&low[0]) {
            return false;
        }
        let mut g = low.to_vec();
        g.push(self.one());
        let x = vec![self.zero(), self.one()];
        let q = self.0.size;
        // x^{q^k} mod g for k = 1..n
        let mut pows = Vec::with_capacity(n);
        let mut cur = x.clone();
        for _ in 0..n {
            cur = self.poly_powmod(&cur, q, &g);
            pows.push(cur.clone());
        }
        let minus_x = |h: &Vec<ResidueElement>| {
            let mut h = h.clone();
            while h.len() < 2 {
                h.push(self.zero());
            }
            h[1] = self.sub(&h[1], &self.one());
            h
        };
        let top = self.poly_rem(&minus_x(&pows[n - 1]), &g);
        if !top.is_empty() {
            return false;
        }
        for r in prime_factors(n as u64) {
            let k = n / r as usize;
            let h = minus_x(&pows[k - 1]);
            let d = self.poly_gcd(&g, &h);
            if d.len() != 1 {
                return false;
            }
        }
        true
    }

    /// Lexicographically smallest monic irreducible of degree `n`, comparing
    /// coefficients from X^{n-1} down to X^0 (element index order).
    pub fn smallest_irreducible(&self, n: usize) -> Result<Vec<ResidueElement>> {
        if n == 0 {
            return Err(Error::InvalidParameter("extension degree 0".into()));
        }
        let q = self.0.size;
        let total = q.checked_pow(n as u32).ok_or_else(|| Error::BudgetExceeded("irreducible search".into()))?;
        for idx in 0..total {
            let mut low = Vec::with_capacity(n);
            let mut i = idx;
            for _ in 0..n {
                low.push(self.element(i % q));
                i /= q;
            }
            if self.is_irreducible(&low) {
                return Ok(low);
            }
        }
        Err(Error::InvalidParameter(format!("no irreducible of degree {n}")))
    }
}

fn prime_factors_u128(mut n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut d = 2u128;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f9_is_x2_plus_1() {
        let f = FiniteField::prime(3).unwrap().extension(2).unwrap();
        assert_eq!(f.top_modulus().unwrap(), &[vec![1], vec![0]]);
        let i = f.generator();
        assert_eq!(f.mul(&i, &i), f.neg(&f.one()));
    }

    #[test]
    fn squares_by_exhaustion() {
        for (p, n) in [(3, 1), (3, 2), (5, 2), (7, 1), (5, 1)] {
            let f = FiniteField::prime(p).unwrap().extension(n).unwrap();
            let squares: std::collections::HashSet<_> = f.elements().map(|x| f.mul(&x, &x)).collect();
            for x in f.elements() {
                assert_eq!(f.is_square(&x), squares.contains(&x));
                if let Some(r) = f.sqrt(&x) {
                    assert_eq!(f.mul(&r, &r), x);
                }
            }
            assert_eq!(squares.len() as u128, (f.size() + 1) / 2);
        }
    }

    #[test]
    fn nested_field_arithmetic() {
        let f = FiniteField::prime(3).unwrap().extension(2).unwrap().extension(3).unwrap();
        assert_eq!(f.size(), 729);
        let g = f.primitive_element();
        assert_eq!(f.order(&g), 728);
        let x = f.element(500);
        let inv = f.inv(&x).unwrap();
        assert_eq!(f.mul(&x, &inv), f.one());
        assert_eq!(f.base().unwrap().size(), 9);
    }

    #[test]
    fn irreducible_counts() {
        // number of monic irreducibles of degree 3 over F_3 is 8
        let f = FiniteField::prime(3).unwrap();
        let mut count = 0;
        for idx in 0..27u128 {
            let low: Vec<_> = (0..3).map(|k| f.element((idx / 3u128.pow(k)) % 3)).collect();
            if f.is_irreducible(&low) {
                count += 1;
            }
        }
        assert_eq!(count, 8);
    }
}
