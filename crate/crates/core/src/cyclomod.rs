//! Submodules of the regular module Z[Γ] of a cyclic group Γ = ⟨σ⟩ of order f.
//!
//! Vectors have length f, entry l being the coefficient of σ^l. Submodules
//! are stored by the rows of their Hermite normal form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer polynomial, coefficients from X^0 upward.
pub type Poly = Vec<BigInt>;

pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

pub fn euler_phi(n: u64) -> u64 {
    (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64
}

pub fn mobius(n: u64) -> i64 {
    let mut m = n;
    let mut sign = 1;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            m /= d;
            if m % d == 0 {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if m > 1 {
        sign = -sign;
    }
    sign
}

fn trim(mut a: Poly) -> Poly {
    while a.len() > 1 && a.last().unwrap().is_zero() {
        a.pop();
    }
    a
}

pub fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Poly {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

/// Exact division by a monic polynomial.
pub fn poly_div_exact(a: &[BigInt], b: &[BigInt]) -> Result<Poly> {
    let b = trim(b.to_vec());
    let db = b.len() - 1;
    assert!(b[db].is_one(), "monic divisor expected");
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return if r.iter().all(|c| c.is_zero()) { Ok(vec![BigInt::zero()]) } else { Err(Error::InvalidParameter("not divisible".into())) };
    }
    let mut q = vec![BigInt::zero(); r.len() - db];
    for k in (db..r.len()).rev() {
        let c = r[k].clone();
        if c.is_zero() {
            continue;
        }
        q[k - db] = c.clone();
        for (i, bi) in b.iter().enumerate() {
            r[k - db + i] -= &c * bi;
        }
    }
    if r.iter().any(|c| !c.is_zero()) {
        return Err(Error::InvalidParameter("not divisible".into()));
    }
    Ok(trim(q))
}

/// X^n - 1.
pub fn x_pow_minus_one(n: u64) -> Poly {
    let mut v = vec![BigInt::zero(); n as usize + 1];
    v[0] = BigInt::from(-1);
    v[n as usize] = BigInt::one();
    v
}

pub fn cyclotomic_poly(d: u64) -> Poly {
    assert!(d >= 1);
    let mut acc = x_pow_minus_one(d);
    for e in divisors(d) {
        if e < d {
            acc = poly_div_exact(&acc, &cyclotomic_poly(e)).unwrap();
        }
    }
    acc
}

fn check_divides(d: u64, f: u64) -> Result<()> {
    if d == 0 || f % d != 0 {
        return Err(Error::NotADivisor(d, f));
    }
    Ok(())
}

/// P_{f,d} = (X^f - 1)/Φ_d.
pub fn p_poly(f: u64, d: u64) -> Result<Poly> {
    check_divides(d, f)?;
    poly_div_exact(&x_pow_minus_one(f), &cyclotomic_poly(d))
}

/// Q_d = (X^d - 1)/Φ_d.
pub fn q_poly(d: u64) -> Poly {
    poly_div_exact(&x_pow_minus_one(d), &cyclotomic_poly(d)).unwrap()
}

/// H_d = (X^f - 1)/(X^d - 1).
pub fn h_poly(f: u64, d: u64) -> Result<Poly> {
    check_divides(d, f)?;
    poly_div_exact(&x_pow_minus_one(f), &x_pow_minus_one(d))
}

pub fn poly_eval_i64(a: &[BigInt], x: i64) -> BigInt {
    a.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupRingElement {
    pub coeffs: Vec<BigInt>,
}

impl GroupRingElement {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        assert!(!coeffs.is_empty());
        GroupRingElement { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// σ^l in Z[Γ] of order f.
    pub fn sigma_power(f: usize, l: usize) -> Self {
        let mut c = vec![BigInt::zero(); f];
        c[l % f] = BigInt::one();
        Self::new(c)
    }

    /// Image of h(σ) under Z[X] → Z[Γ].
    pub fn from_poly(f: usize, h: &[BigInt]) -> Self {
        let mut c = vec![BigInt::zero(); f];
        for (i, a) in h.iter().enumerate() {
            c[i % f] += a;
        }
        Self::new(c)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Multiply by σ^k.
    pub fn shift(&self, k: usize) -> Self {
        let f = self.order();
        let mut c = vec![BigInt::zero(); f];
        for (i, a) in self.coeffs.iter().enumerate() {
            c[(i + k) % f] = a.clone();
        }
        Self::new(c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let f = self.order();
        let mut c = vec![BigInt::zero(); f];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                c[(i + j) % f] += a * b;
            }
        }
        Self::new(c)
    }

    pub fn apply_poly(&self, h: &[BigInt]) -> Self {
        Self::from_poly(self.order(), h).mul(self)
    }

    /// a(χ) = Σ coefficients.
    pub fn coefficient_sum(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn dot(&self, other: &Self) -> BigInt {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }
}

/// Row Hermite normal form; the first `pivot_cols` columns are reduced,
/// operations act on whole rows. Returns (rows, number of pivot rows).
fn hnf_partial(mut m: Vec<Vec<BigInt>>, pivot_cols: usize) -> (Vec<Vec<BigInt>>, usize) {
    let mut r0 = 0;
    for c in 0..pivot_cols {
        loop {
            let piv = (r0..m.len()).filter(|&r| !m[r][c].is_zero()).min_by_key(|&r| m[r][c].abs());
            let Some(pr) = piv else { break };
            m.swap(r0, pr);
            let mut clean = true;
            for r in r0 + 1..m.len() {
                if m[r][c].is_zero() {
                    continue;
                }
                let q = m[r][c].div_floor(&m[r0][c]);
                let (head, tail) = m.split_at_mut(r);
                for (x, y) in tail[0].iter_mut().zip(&head[r0]) {
                    *x -= &q * y;
                }
                if !m[r][c].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if r0 >= m.len() || m[r0][c].is_zero() {
            continue;
        }
        if m[r0][c].is_negative() {
            for x in m[r0].iter_mut() {
                *x = -x.clone();
            }
        }
        for r in 0..r0 {
            let q = m[r][c].div_floor(&m[r0][c]);
            if q.is_zero() {
                continue;
            }
            let (head, tail) = m.split_at_mut(r0);
            for (x, y) in head[r].iter_mut().zip(&tail[0]) {
                *x -= &q * y;
            }
        }
        r0 += 1;
    }
    (m, r0)
}

pub(crate) fn hnf(rows: Vec<Vec<BigInt>>, ncols: usize) -> Vec<Vec<BigInt>> {
    let (mut m, r) = hnf_partial(rows, ncols);
    m.truncate(r);
    m
}

/// Integer basis of {x ∈ Z^n : row·x = 0 for all rows}.
pub(crate) fn integer_kernel(rows: &[Vec<BigInt>], n: usize) -> Vec<Vec<BigInt>> {
    let r = rows.len();
    let aug: Vec<Vec<BigInt>> = (0..n)
        .map(|j| {
            let mut row: Vec<BigInt> = rows.iter().map(|g| g[j].clone()).collect();
            row.extend((0..n).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let (m, piv) = hnf_partial(aug, r);
    m[piv..].iter().map(|row| row[r..].to_vec()).collect()
}

/// Nonzero elementary divisors of an integer matrix.
pub fn elementary_divisors(rows: &[Vec<BigInt>], ncols: usize) -> Vec<BigInt> {
    let transpose = |m: &[Vec<BigInt>], cols: usize| -> Vec<Vec<BigInt>> {
        (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
    };
    // alternate row and column reduction until diagonal
    let mut m = hnf(rows.to_vec(), ncols);
    let mut cols = ncols;
    loop {
        let rank = m.len();
        let t = hnf(transpose(&m, cols), rank);
        let back = transpose(&t, rank);
        let diag = back.iter().enumerate().all(|(i, row)| row.iter().enumerate().all(|(j, x)| i == j || x.is_zero()));
        if diag {
            let mut d: Vec<BigInt> = (0..back.len()).map(|i| back[i][i].abs()).collect();
            for i in 0..d.len() {
                for j in i + 1..d.len() {
                    let (g, l) = (d[i].gcd(&d[j]), d[i].lcm(&d[j]));
                    d[i] = g;
                    d[j] = l;
                }
            }
            return d;
        }
        cols = t.len();
        m = hnf(back, cols);
    }
}

/// A Z-submodule of Z^f = Z[Γ], in row Hermite normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Submodule {
    f: usize,
    rows: Vec<Vec<BigInt>>,
}

impl Submodule {
    pub fn from_generators(f: usize, gens: &[GroupRingElement]) -> Self {
        let rows: Vec<Vec<BigInt>> = gens.iter().map(|g| g.coeffs.clone()).collect();
        Submodule { f, rows: hnf(rows, f) }
    }

    pub(crate) fn from_rows(f: usize, rows: Vec<Vec<BigInt>>) -> Self {
        Submodule { f, rows: hnf(rows, f) }
    }

    pub fn zero(f: usize) -> Self {
        Submodule { f, rows: Vec::new() }
    }

    pub fn full(f: usize) -> Self {
        Self::from_generators(f, &(0..f).map(|l| GroupRingElement::sigma_power(f, l)).collect::<Vec<_>>())
    }

    pub fn order(&self) -> usize {
        self.f
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// HNF basis.
    pub fn basis(&self) -> Vec<GroupRingElement> {
        self.rows.iter().map(|r| GroupRingElement::new(r.clone())).collect()
    }

    pub fn contains(&self, v: &GroupRingElement) -> bool {
        let mut rows = self.rows.clone();
        rows.push(v.coeffs.clone());
        hnf(rows, self.f) == self.rows
    }

    pub fn is_sigma_stable(&self) -> bool {
        self.basis().iter().all(|b| self.contains(&b.shift(1)))
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Submodule { f: self.f, rows: hnf(rows, self.f) }
    }

    pub fn scaled(&self, k: i64) -> Self {
        let rows = self.rows.iter().map(|r| r.iter().map(|x| x * k).collect()).collect();
        Submodule { f: self.f, rows: hnf(rows, self.f) }
    }

    /// Lattice of vectors orthogonal to the module.
    pub fn orthogonal(&self) -> Self {
        Submodule { f: self.f, rows: hnf(integer_kernel(&self.rows, self.f), self.f) }
    }

    /// Smallest submodule containing self with torsion-free quotient.
    pub fn saturate(&self) -> Self {
        self.orthogonal().orthogonal()
    }

    /// Nonzero elementary divisors of the generator matrix; the quotient
    /// Z^f/M is Z^{f-rank} ⊕ ⊕ Z/d_i.
    pub fn elementary_divisors(&self) -> Vec<BigInt> {
        elementary_divisors(&self.rows, self.f)
    }

    pub fn quotient_is_torsion_free(&self) -> bool {
        self.elementary_divisors().iter().all(|d| d.is_one())
    }

    /// Exponent of the torsion of Z^f/M.
    pub fn torsion_exponent(&self) -> BigInt {
        self.elementary_divisors().iter().fold(BigInt::one(), |a, d| a.lcm(d))
    }

    pub fn is_orthogonal_to(&self, other: &Self) -> bool {
        self.basis().iter().all(|a| other.basis().iter().all(|b| a.dot(b).is_zero()))
    }

    pub fn annihilated_by(&self, h: &[BigInt]) -> bool {
        self.basis().iter().all(|b| b.apply_poly(h).is_zero())
    }

    /// gcd of coefficient sums over the module.
    pub fn coefficient_sum_gcd(&self) -> BigInt {
        self.basis().iter().fold(BigInt::zero(), |g, b| g.gcd(&b.coefficient_sum()))
    }
}

/// Basis {P_{f,d}(σ)σ^l : 0 ≤ l < φ(d)} of M_d.
pub fn basis_md(f: u64, d: u64) -> Result<Submodule> {
    let p = p_poly(f, d)?;
    let base = GroupRingElement::from_poly(f as usize, &p);
    let gens: Vec<_> = (0..euler_phi(d) as usize).map(|l| base.shift(l)).collect();
    Ok(Submodule::from_generators(f as usize, &gens))
}

/// M_{d̲} = Σ_{d ∈ d̲} M_d.
pub fn module_for_divisors(f: u64, ds: &[u64]) -> Result<Submodule> {
    let mut acc = Submodule::zero(f as usize);
    for &d in ds {
        acc = acc.sum(&basis_md(f, d)?);
    }
    Ok(acc)
}

/// Saturation of M_{d̲}.
pub fn saturated_module(f: u64, ds: &[u64]) -> Result<Submodule> {
    Ok(module_for_divisors(f, ds)?.saturate())
}

/// The minimal submodules with torsion-free quotient, one per divisor of f.
pub fn classify_minimal(f: u64) -> Result<Vec<(u64, Submodule)>> {
    if f == 0 {
        return Err(Error::InvalidParameter("f must be positive".into()));
    }
    divisors(f).into_iter().map(|d| Ok((d, basis_md(f, d)?))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationCheck {
    pub f: u64,
    pub count: usize,
    pub ranks: Vec<usize>,
    pub matches_enumeration: bool,
}

/// Classification compared against the brute-force enumeration.
pub fn classify_minimal_verified(f: u64, budget: u64) -> Result<ClassificationCheck> {
    let mods = classify_minimal(f)?;
    let found = crate::oracle::enumerate_submodules(f, budget)?;
    let mut a: Vec<&Submodule> = mods.iter().map(|(_, m)| m).collect();
    let mut b: Vec<&Submodule> = found.iter().collect();
    a.sort_by(|x, y| x.rows.cmp(&y.rows));
    b.sort_by(|x, y| x.rows.cmp(&y.rows));
    Ok(ClassificationCheck {
        f,
        count: mods.len(),
        ranks: mods.iter().map(|(_, m)| m.rank()).collect(),
        matches_enumeration: a == b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[i64]) -> Poly {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn cyclotomic_small() {
        assert_eq!(cyclotomic_poly(1), p(&[-1, 1]));
        assert_eq!(cyclotomic_poly(4), p(&[1, 0, 1]));
        assert_eq!(cyclotomic_poly(6), p(&[1, -1, 1]));
        assert_eq!(poly_mul(&p_poly(6, 3).unwrap(), &cyclotomic_poly(3)), x_pow_minus_one(6));
        assert!(p_poly(6, 4).is_err());
        assert_eq!(h_poly(6, 2).unwrap(), p(&[1, 0, 1, 0, 1]));
        assert_eq!(q_poly(2), p(&[-1, 1]));
    }

    #[test]
    fn md_examples() {
        let m = basis_md(1, 1).unwrap();
        assert_eq!(m, Submodule::full(1));
        let m = basis_md(2, 2).unwrap();
        assert_eq!(m.rank(), 1);
        assert!(m.contains(&GroupRingElement::from_i64(&[-1, 1])));
        // Γ of order 2f, M_2 = Z(Y_0 - Y_1) with Y_l = Σ_k σ^{2k+l}
        let f = 3;
        let m2 = basis_md(2 * f, 2).unwrap();
        let y = GroupRingElement::from_i64(&[1, -1, 1, -1, 1, -1]);
        assert_eq!(m2, Submodule::from_generators(6, &[y]));
    }

    #[test]
    fn structure_of_md() {
        for f in 1..=12u64 {
            let mut total = Submodule::zero(f as usize);
            let mods = classify_minimal(f).unwrap();
            for (d, m) in &mods {
                assert_eq!(m.rank() as u64, euler_phi(*d));
                assert!(m.is_sigma_stable());
                assert!(m.quotient_is_torsion_free());
                assert!(m.annihilated_by(&cyclotomic_poly(*d)));
                assert_eq!(m.saturate(), *m);
                assert_eq!(m.scaled(2).saturate(), *m);
                for e in divisors(f) {
                    if e != *d {
                        assert!(!m.annihilated_by(&cyclotomic_poly(e)));
                    }
                }
                total = total.sum(m);
            }
            for (i, (_, a)) in mods.iter().enumerate() {
                for (_, b) in &mods[i + 1..] {
                    assert!(a.is_orthogonal_to(b));
                }
            }
            assert_eq!(total.rank() as u64, f);
            let fb = BigInt::from(f);
            assert!(total.elementary_divisors().iter().all(|d| (&fb % d).is_zero()));
        }
    }

    #[test]
    fn saturation_of_sums() {
        for f in [4u64, 6, 8, 12] {
            let ds = divisors(f);
            for mask in 1u32..(1 << ds.len()) {
                let sel: Vec<u64> = ds.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &d)| d).collect();
                let m = module_for_divisors(f, &sel).unwrap();
                let s = m.saturate();
                assert_eq!(s.rank(), m.rank());
                assert!(s.quotient_is_torsion_free());
                assert!(s.is_sigma_stable());
                let fb = BigInt::from(f);
                assert!(m.elementary_divisors().iter().all(|d| (&fb % d).is_zero()));
            }
        }
    }

    #[test]
    fn mobius_values() {
        assert_eq!((1..=10).map(mobius).collect::<Vec<_>>(), vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }
}
