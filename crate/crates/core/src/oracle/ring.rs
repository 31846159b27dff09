//! 𝒪″/𝒫″^L as GR(p^M, F)[π]/(π^E − c·p).
//!
//! An element is a flat vector of E·F integers mod p^M: entry `i·F + j` is the
//! coefficient of x^j π^i, where x generates the Galois ring over Z/p^M.

use crate::error::{Error, Result};
use crate::padic::{FiniteField, ResidueElement};
use crate::torus::{Case, TorusDescriptor};

pub type RingElement = Vec<u64>;

#[derive(Clone, Debug)]
pub struct FiniteQuotientRing {
    pub p: u64,
    pub case: Case,
    /// Residue degree of k″ over F_p.
    pub f: usize,
    /// Ramification index of k″ over Q_p.
    pub e: usize,
    /// Largest level represented.
    pub level: u32,
    m: u32,
    modulus: u64,
    residue: FiniteField,
    /// Low coefficients of the lifted monic irreducible h(x) of degree f.
    h: Vec<u64>,
    /// c with π^E = c·p, as a Galois ring element.
    pi_unit: Vec<u64>,
    /// Image of x under the arithmetic Frobenius.
    frob_x: Vec<u64>,
    /// Primitive 2e-th root of unity (case B).
    zeta: Option<Vec<u64>>,
    /// ν with ν² = d (case B).
    nu: Option<Vec<u64>>,
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

impl FiniteQuotientRing {
    /// The ring 𝒪″/𝒫″^level for the torus T (prime q only).
    pub fn for_torus(t: &TorusDescriptor, level: u32) -> Result<Self> {
        let p = t.params.p;
        if t.params.q != p {
            return Err(Error::Unsupported("finite-ring oracle needs q prime".into()));
        }
        let (f, e) = match t.case() {
            Case::A => (2 * t.params.halfdeg as usize, 2),
            Case::B => (2, 2 * t.params.halfdeg as usize),
        };
        if level == 0 {
            return Err(Error::InvalidParameter("level must be positive".into()));
        }
        let m = (level as usize).div_ceil(e) as u32;
        let modulus = p.checked_pow(m).filter(|&x| x < 1 << 62).ok_or_else(|| Error::BudgetExceeded("p^M too large".into()))?;
        let residue = if f == 1 { FiniteField::prime(p)? } else { FiniteField::prime(p)?.extension(f)? };
        let h: Vec<u64> = if f == 1 { vec![0] } else { residue.top_modulus().unwrap().iter().map(|c| c[0]).collect() };
        let mut ring = FiniteQuotientRing {
            p,
            case: t.case(),
            f,
            e,
            level,
            m,
            modulus,
            residue,
            h,
            pi_unit: Vec::new(),
            frob_x: Vec::new(),
            zeta: None,
            nu: None,
        };
        ring.frob_x = ring.frobenius_of_x();
        ring.pi_unit = ring.gr_one();
        match t.case() {
            Case::A => {
                if let Some(idx) = t.params.twist {
                    let r = (idx % p) as u64;
                    let mut g = ring.gr_zero();
                    g[0] = r;
                    ring.pi_unit = ring.teichmuller(&g);
                }
            }
            Case::B => {
                let two_e = e as u64;
                let size = ring.residue.size();
                if (size - 1) % two_e as u128 != 0 {
                    return Err(Error::Unsupported(format!("2e = {two_e} does not divide q² − 1")));
                }
                let prim = ring.residue.primitive_element();
                let z = ring.residue.pow(&prim, (size - 1) / two_e as u128);
                ring.zeta = Some(ring.teichmuller(&ring.lift_digits(&z)));
                let fp = FiniteField::prime(p)?;
                let d = fp.smallest_nonsquare();
                let mut d_emb = ring.residue.zero();
                d_emb[0] = d[0];
                let s = ring.residue.sqrt(&d_emb).expect("every element of F_p is a square in F_{p²}");
                ring.nu = Some(ring.teichmuller(&ring.lift_digits(&s)));
            }
        }
        Ok(ring)
    }

    pub fn residue_field(&self) -> &FiniteField {
        &self.residue
    }

    pub fn len(&self) -> usize {
        self.e * self.f
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    // --- Galois ring GR(p^M, f) ---

    fn gr_zero(&self) -> Vec<u64> {
        vec![0; self.f]
    }

    fn gr_one(&self) -> Vec<u64> {
        let mut v = self.gr_zero();
        v[0] = 1 % self.modulus;
        v
    }

    fn gr_add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.modulus).collect()
    }

    fn gr_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let f = self.f;
        let md = self.modulus;
        let mut prod = vec![0u64; 2 * f - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + mulmod(x, y, md)) % md;
            }
        }
        // x^f = -Σ h_i x^i
        for k in (f..2 * f - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..f {
                let sub = mulmod(c, self.h[i], md);
                prod[k - f + i] = (prod[k - f + i] + md - sub) % md;
            }
        }
        prod.truncate(f);
        prod
    }

    fn gr_pow(&self, a: &[u64], mut n: u128) -> Vec<u64> {
        let mut base = a.to_vec();
        let mut acc = self.gr_one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.gr_mul(&acc, &base);
            }
            base = self.gr_mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    fn gr_scale(&self, c: u64, a: &[u64]) -> Vec<u64> {
        a.iter().map(|&x| mulmod(c, x, self.modulus)).collect()
    }

    /// Teichmüller representative of the residue of a.
    pub fn teichmuller(&self, a: &[u64]) -> Vec<u64> {
        let q = (self.p as u128).pow(self.f as u32);
        self.gr_pow(a, q.pow(self.m.saturating_sub(1)))
    }

    /// Residue digits as a Galois ring element with entries in [0, p).
    pub fn lift_digits(&self, r: &[u64]) -> Vec<u64> {
        let mut v = self.gr_zero();
        for (i, &c) in r.iter().enumerate() {
            v[i] = c;
        }
        v
    }

    fn frobenius_of_x(&self) -> Vec<u64> {
        if self.f == 1 {
            return self.gr_one();
        }
        // Newton iteration r ← r − h(r)/h′(r) starting from x^p
        let mut x = self.gr_zero();
        x[1] = 1;
        let mut r = self.gr_pow(&x, self.p as u128);
        for _ in 0..=self.m.next_power_of_two().trailing_zeros() + 1 {
            let (hv, dv) = self.eval_h(&r);
            let inv = self.gr_inv(&dv);
            let step = self.gr_mul(&hv, &inv);
            r = r.iter().zip(&step).map(|(a, b)| (a + self.modulus - b) % self.modulus).collect();
        }
        r
    }

    fn eval_h(&self, r: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let f = self.f;
        let mut val = self.gr_one(); // leading coefficient
        let mut der = self.gr_scale(f as u64 % self.modulus, &self.gr_one());
        let mut pow = self.gr_one();
        let mut hv = self.gr_zero();
        let mut dv = self.gr_zero();
        for i in 0..f {
            hv = self.gr_add(&hv, &self.gr_scale(self.h[i], &pow));
            if i + 1 < f {
                dv = self.gr_add(&dv, &self.gr_scale(mulmod(self.h[i + 1], (i + 1) as u64, self.modulus), &pow));
            }
            pow = self.gr_mul(&pow, r);
        }
        val = self.gr_mul(&val, &pow);
        hv = self.gr_add(&hv, &val);
        let mut rf1 = self.gr_one();
        for _ in 0..f - 1 {
            rf1 = self.gr_mul(&rf1, r);
        }
        der = self.gr_mul(&der, &rf1);
        dv = self.gr_add(&dv, &der);
        (hv, dv)
    }

    /// Inverse of a unit of the Galois ring.
    fn gr_inv(&self, a: &[u64]) -> Vec<u64> {
        // a^{-1} = a^{|GR^×| - 1}
        let q = (self.p as u128).pow(self.f as u32);
        let order = (q - 1) * q.pow(self.m - 1);
        self.gr_pow(a, order - 1)
    }

    fn gr_frobenius(&self, a: &[u64]) -> Vec<u64> {
        let mut acc = self.gr_zero();
        let mut pow = self.gr_one();
        for &c in a {
            if c != 0 {
                acc = self.gr_add(&acc, &self.gr_scale(c, &pow));
            }
            pow = self.gr_mul(&pow, &self.frob_x);
        }
        acc
    }

    /// Tr_{GR/(Z/p^M)}(a).
    fn gr_trace(&self, a: &[u64]) -> u64 {
        let mut acc = 0;
        let mut y = a.to_vec();
        for _ in 0..self.f {
            acc = (acc + y[0]) % self.modulus;
            y = self.gr_frobenius(&y);
        }
        acc
    }

    // --- the ring R ---

    fn coeff<'a>(&self, a: &'a [u64], i: usize) -> &'a [u64] {
        &a[i * self.f..(i + 1) * self.f]
    }

    pub fn zero(&self) -> RingElement {
        vec![0; self.len()]
    }

    pub fn one(&self) -> RingElement {
        let mut v = self.zero();
        v[0] = 1 % self.modulus;
        v
    }

    /// a·p^s·π^r for a Galois ring element a.
    pub fn monomial(&self, a: &[u64], s: u32, r: usize) -> RingElement {
        let mut v = self.zero();
        let ps = self.p.pow(s) % self.modulus;
        for j in 0..self.f {
            v[r * self.f + j] = mulmod(a[j], ps, self.modulus);
        }
        v
    }

    /// The residue digit r placed at π-adic position i (as p^{⌊i/E⌋}π^{i mod E}).
    pub fn digit(&self, r: &[u64], i: u32) -> RingElement {
        self.monomial(&self.lift_digits(r), i / self.e as u32, i as usize % self.e)
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> RingElement {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.modulus).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> RingElement {
        a.iter().zip(b).map(|(x, y)| (x + self.modulus - y) % self.modulus).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> RingElement {
        let e = self.e;
        let mut out = vec![self.gr_zero(); e];
        for i in 0..e {
            let ai = self.coeff(a, i);
            if ai.iter().all(|&x| x == 0) {
                continue;
            }
            for j in 0..e {
                let bj = self.coeff(b, j);
                if bj.iter().all(|&x| x == 0) {
                    continue;
                }
                let mut c = self.gr_mul(ai, bj);
                let k = i + j;
                if k >= e {
                    // π^E = c·p
                    c = self.gr_scale(self.p, &self.gr_mul(&c, &self.pi_unit));
                }
                out[k % e] = self.gr_add(&out[k % e], &c);
            }
        }
        out.concat()
    }

    pub fn pow(&self, a: &[u64], mut n: u64) -> RingElement {
        let mut base = a.to_vec();
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    /// Reduction modulo π^n.
    pub fn reduce(&self, a: &[u64], n: u32) -> RingElement {
        let mut v = a.to_vec();
        for i in 0..self.e {
            let digits = (n as usize).saturating_sub(i).div_ceil(self.e) as u32;
            let md = self.p.pow(digits.min(self.m));
            for j in 0..self.f {
                v[i * self.f + j] %= md;
            }
        }
        v
    }

    /// Largest j ≤ n with a ≡ 1 mod π^j.
    pub fn level_of(&self, a: &[u64], n: u32) -> u32 {
        let d = self.sub(a, &self.one());
        let mut j = 0;
        while j < n && self.reduce(&d, j + 1).iter().all(|&x| x == 0) {
            j += 1;
        }
        j
    }

    /// The involution τ of k″/k′.
    pub fn tau(&self, a: &[u64]) -> RingElement {
        match self.case {
            Case::A => {
                let mut v = a.to_vec();
                for j in 0..self.f {
                    v[self.f + j] = (self.modulus - v[self.f + j]) % self.modulus;
                }
                v
            }
            Case::B => (0..self.e).flat_map(|i| self.gr_frobenius(self.coeff(a, i))).collect(),
        }
    }

    /// ι_l, the l-th power of the generator of Γ′, acting on k″.
    pub fn iota(&self, a: &[u64], l: usize) -> RingElement {
        match self.case {
            Case::A => (0..self.e)
                .flat_map(|i| {
                    let mut y = self.coeff(a, i).to_vec();
                    for _ in 0..l {
                        y = self.gr_frobenius(&y);
                    }
                    y
                })
                .collect(),
            Case::B => {
                let z = self.zeta.as_ref().unwrap();
                (0..self.e)
                    .flat_map(|i| self.gr_mul(self.coeff(a, i), &self.gr_pow(z, (l * i) as u128)))
                    .collect()
            }
        }
    }

    /// ν with ν² = d (case B).
    pub fn nu(&self) -> Option<RingElement> {
        self.nu.as_ref().map(|n| self.monomial(n, 0, 0))
    }

    /// The uniformizer image π.
    pub fn pi(&self) -> RingElement {
        self.monomial(&self.gr_one(), 0, 1 % self.e)
    }

    /// tr_{k″/Q_p}(a) mod p^M.
    pub fn trace(&self, a: &[u64]) -> u64 {
        mulmod(self.e as u64 % self.modulus, self.gr_trace(self.coeff(a, 0)), self.modulus)
    }

    /// p^M.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Residue of the π^0 coefficient.
    pub fn residue_of(&self, a: &[u64]) -> ResidueElement {
        self.coeff(a, 0).iter().map(|x| x % self.p).collect()
    }

    /// Every residue digit vector, in index order.
    pub fn residues(&self) -> Vec<ResidueElement> {
        self.residue.elements().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{build_max_torus, TorusParams};

    fn ring(params: TorusParams, level: u32) -> FiniteQuotientRing {
        let t = build_max_torus(&params, 12).unwrap();
        FiniteQuotientRing::for_torus(&t, level).unwrap()
    }

    #[test]
    fn frobenius_is_a_ring_automorphism_of_order_f() {
        let r = ring(TorusParams::case_a(3, 2), 6);
        let a: Vec<u64> = (0..r.f as u64).map(|i| (7 * i + 2) % r.modulus).collect();
        let b: Vec<u64> = (0..r.f as u64).map(|i| (5 * i * i + 1) % r.modulus).collect();
        assert_eq!(r.gr_frobenius(&r.gr_mul(&a, &b)), r.gr_mul(&r.gr_frobenius(&a), &r.gr_frobenius(&b)));
        let mut y = a.clone();
        for _ in 0..r.f {
            y = r.gr_frobenius(&y);
        }
        assert_eq!(y, a);
        // reduces to x ↦ x^p
        let fx = r.gr_frobenius(&a);
        let xp = r.gr_pow(&a, 3);
        assert!(fx.iter().zip(&xp).all(|(u, v)| u % 3 == v % 3));
    }

    #[test]
    fn pi_and_nu_relations() {
        let r = ring(TorusParams::case_b(3, 2, 0), 8);
        let pi = r.pi();
        let mut p_elem = r.zero();
        p_elem[0] = 3;
        assert_eq!(r.pow(&pi, 4), p_elem);
        let nu = r.nu().unwrap();
        assert_eq!(r.tau(&nu), r.sub(&r.zero(), &nu));
        let d = r.mul(&nu, &nu);
        assert!(d[1..].iter().all(|&x| x == 0));
        assert_eq!(d[0] % 3, 2);
        let z = r.iota(&pi, 1);
        assert_eq!(r.pow(&z, 4), p_elem);
        assert_ne!(z, pi);
    }

    #[test]
    fn tau_twists_iota_by_q() {
        // τ∘ι_l = ι_{ql}∘τ; in case A and when ζ_{2e} ∈ k the two commute
        for (params, n) in [(TorusParams::case_a(5, 1), 2), (TorusParams::case_b(5, 1, 1), 2), (TorusParams::case_b(3, 2, 1), 4)] {
            let q = params.q as usize;
            let r = ring(params, 6);
            let x: RingElement = (0..r.len() as u64).map(|i| (11 * i + 3) % r.modulus()).collect();
            for l in 0..n {
                assert_eq!(r.tau(&r.iota(&x, l)), r.iota(&r.tau(&x), (q * l) % n));
            }
        }
    }

    #[test]
    fn level_and_reduction() {
        let r = ring(TorusParams::case_a(5, 1), 6);
        let one = r.one();
        let x = r.add(&one, &r.digit(&[1, 0], 3));
        assert_eq!(r.level_of(&x, 6), 3);
        assert_eq!(r.reduce(&x, 3), one);
        assert_eq!(r.trace(&one), 4);
    }
}
