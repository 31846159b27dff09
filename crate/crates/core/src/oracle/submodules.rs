//! Brute-force enumeration of σ-stable saturated sublattices of Z[Γ].

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, Zero};

use crate::cyclomod::{integer_kernel, poly_div_exact, poly_mul, x_pow_minus_one, Poly, Submodule};
use crate::error::{Error, Result};

/// Monic integer divisors of X^f - 1 of degree 1..=max_deg, found by
/// searching all coefficient vectors within the unit-circle root bound.
fn small_divisors(f: u64, max_deg: usize, budget: &mut u64) -> Result<Vec<Poly>> {
    let target = x_pow_minus_one(f);
    let mut out = Vec::new();
    for k in 1..=max_deg {
        // coefficient of X^i is bounded by C(k, i); constant term is ±1
        let bounds: Vec<i64> = (0..k).map(|i| if i == 0 { 1 } else { binomial(k as i64, i as i64) }).collect();
        let mut cur: Vec<i64> = bounds.iter().map(|b| -b).collect();
        'odometer: loop {
            if *budget == 0 {
                return Err(Error::BudgetExceeded("submodule enumeration".into()));
            }
            *budget -= 1;
            if cur[0] != 0 {
                let mut h: Poly = cur.iter().map(|&c| BigInt::from(c)).collect();
                h.push(BigInt::one());
                if poly_div_exact(&target, &h).is_ok() {
                    out.push(h);
                }
            }
            for i in 0..k {
                if cur[i] < bounds[i] {
                    cur[i] += 1;
                    continue 'odometer;
                }
                cur[i] = -bounds[i];
            }
            break;
        }
    }
    Ok(out)
}

/// The rational irreducible factors of X^f - 1, found without using cyclotomic polynomials.
pub fn rational_factors(f: u64, budget: &mut u64) -> Result<Vec<Poly>> {
    let max_deg = (f / 2) as usize;
    let divs = small_divisors(f, max_deg.max(1), budget)?;
    // irreducible = no divisor of smaller positive degree among the found ones
    let irreducible: Vec<Poly> = divs
        .iter()
        .filter(|h| !divs.iter().any(|g| g.len() < h.len() && poly_div_exact(h, g).is_ok()))
        .cloned()
        .collect();
    let mut prod: Poly = vec![BigInt::one()];
    for h in &irreducible {
        prod = poly_mul(&prod, h);
    }
    let mut factors = irreducible;
    let rest = poly_div_exact(&x_pow_minus_one(f), &prod)?;
    if rest.len() > 1 {
        // at most one irreducible factor exceeds degree f/2
        factors.push(rest);
    }
    Ok(factors)
}

/// ker h(σ) ∩ Z^f.
fn kernel_lattice(f: usize, h: &[BigInt]) -> Submodule {
    let rows: Vec<Vec<BigInt>> = (0..f)
        .map(|i| {
            (0..f)
                .map(|j| {
                    let mut c = BigInt::zero();
                    for (k, a) in h.iter().enumerate() {
                        if (j + k) % f == i {
                            c += a;
                        }
                    }
                    c
                })
                .collect()
        })
        .collect();
    Submodule::from_rows(f, integer_kernel(&rows, f))
}

/// All minimal nonzero σ-stable submodules of Z[Γ] with torsion-free quotient.
pub fn enumerate_submodules(f: u64, budget: u64) -> Result<Vec<Submodule>> {
    if f == 0 {
        return Err(Error::InvalidParameter("f must be positive".into()));
    }
    let mut budget = budget;
    let factors = rational_factors(f, &mut budget)?;
    let n = factors.len();
    let fu = f as usize;
    // every σ-invariant subspace is ker of a product of factors
    let mut all = Vec::new();
    for mask in 1u64..(1 << n) {
        let mut h: Poly = vec![BigInt::one()];
        for (i, g) in factors.iter().enumerate() {
            if mask >> i & 1 == 1 {
                h = poly_mul(&h, g);
            }
        }
        all.push(kernel_lattice(fu, &h));
    }
    let minimal: Vec<Submodule> = all
        .iter()
        .filter(|m| m.rank() > 0)
        .filter(|m| !all.iter().any(|o| o.rank() > 0 && o.rank() < m.rank() && o.basis().iter().all(|b| m.contains(b))))
        .cloned()
        .collect();
    let mut uniq: Vec<Submodule> = Vec::new();
    for m in minimal {
        if !uniq.contains(&m) {
            uniq.push(m);
        }
    }
    Ok(uniq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclomod::classify_minimal;

    #[test]
    fn counts() {
        assert_eq!(enumerate_submodules(2, 1_000_000).unwrap().len(), 2);
        let six = enumerate_submodules(6, 1_000_000).unwrap();
        let mut ranks: Vec<usize> = six.iter().map(|m| m.rank()).collect();
        ranks.sort();
        assert_eq!(ranks, vec![1, 1, 2, 2]);
        for m in &six {
            assert!(classify_minimal(6).unwrap().iter().any(|(_, md)| md == m));
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(enumerate_submodules(8, 10), Err(Error::BudgetExceeded(_))));
    }
}
