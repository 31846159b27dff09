use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Hard cap on enumerated group elements.
pub const GROUP_BUDGET: usize = 1_000_000;

/// Smith normal form D = U·A·V of a square integer matrix; returns (diag, V, V⁻¹).
fn smith(mut a: Vec<Vec<i128>>) -> (Vec<i128>, Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let n = a.len();
    let ident = |n: usize| (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect::<Vec<_>>()).collect::<Vec<_>>();
    let mut v = ident(n);
    let mut vinv = ident(n);
    // column op: col_j += c·col_i  (V likewise; V⁻¹: row_i -= c·row_j)
    let col_add = |a: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, vinv: &mut Vec<Vec<i128>>, i: usize, j: usize, c: i128| {
        for row in a.iter_mut() {
            row[j] += c * row[i];
        }
        for row in v.iter_mut() {
            row[j] += c * row[i];
        }
        for k in 0..vinv[0].len() {
            let x = vinv[j][k];
            vinv[i][k] -= c * x;
        }
    };
    let col_swap = |a: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, vinv: &mut Vec<Vec<i128>>, i: usize, j: usize| {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        for row in v.iter_mut() {
            row.swap(i, j);
        }
        vinv.swap(i, j);
    };
    for t in 0..n {
        loop {
            // smallest nonzero entry of the lower-right block
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                break;
            };
            a.swap(t, bi);
            col_swap(&mut a, &mut v, &mut vinv, t, bj);
            let piv = a[t][t];
            let mut clean = true;
            for i in t + 1..n {
                let c = a[i][t] / piv;
                if c != 0 {
                    for k in 0..n {
                        let x = a[t][k];
                        a[i][k] -= c * x;
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let c = a[t][j] / piv;
                if c != 0 {
                    col_add(&mut a, &mut v, &mut vinv, t, j, -c);
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the remaining block
            let bad = (t + 1..n).flat_map(|i| (t + 1..n).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % piv != 0);
            match bad {
                None => break,
                Some((i, _)) => {
                    for k in 0..n {
                        let x = a[i][k];
                        a[t][k] += x;
                    }
                }
            }
        }
    }
    let mut d: Vec<i128> = (0..n).map(|i| a[i][i]).collect();
    for (i, x) in d.iter_mut().enumerate() {
        if *x < 0 {
            *x = -*x;
            // negate column i
            for row in v.iter_mut() {
                row[i] = -row[i];
            }
            for k in 0..n {
                vinv[i][k] = -vinv[i][k];
            }
        }
    }
    (d, v, vinv)
}

/// A finite abelian group given by its enumerated elements, with coordinates
/// in an invariant-factor basis ⊕ Z/n_i (n_1 | n_2 | …).
#[derive(Clone, Debug)]
pub struct FiniteAbelianGroup<T: Clone + Eq + Hash> {
    pub invariants: Vec<u64>,
    pub generators: Vec<T>,
    pub elements: Vec<T>,
    pub coords: Vec<Vec<u64>>,
    index: HashMap<T, usize>,
}

impl<T: Clone + Eq + Hash> FiniteAbelianGroup<T> {
    /// Structure of the group formed by `all` (which must be closed under `mul`).
    pub fn from_elements(all: &[T], identity: T, mul: impl Fn(&T, &T) -> T) -> Result<Self> {
        if all.len() > GROUP_BUDGET {
            return Err(Error::BudgetExceeded(format!("{} group elements", all.len())));
        }
        let total = all.len() as u64;
        let pow = |x: &T, mut n: u64| {
            let mut base = x.clone();
            let mut acc = identity.clone();
            while n > 0 {
                if n & 1 == 1 {
                    acc = mul(&acc, &base);
                }
                base = mul(&base, &base);
                n >>= 1;
            }
            acc
        };
        let mut invariants: Vec<u64> = Vec::new();
        let mut gens: Vec<T> = Vec::new();
        let mut table: HashMap<T, Vec<u64>> = HashMap::from([(identity.clone(), Vec::new())]);
        for x in all {
            if table.contains_key(x) {
                continue;
            }
            // smallest m with x^m in the current subgroup
            let mut m = 1u64;
            let mut y = x.clone();
            while !table.contains_key(&y) {
                y = mul(&y, x);
                m += 1;
                if m > total {
                    return Err(Error::InvalidParameter("element set is not a group".into()));
                }
            }
            let c = &table[&y];
            let r = gens.len();
            let k = r + 1;
            let mut rel = vec![vec![0i128; k]; k];
            for i in 0..r {
                rel[i][i] = invariants[i] as i128;
                rel[r][i] = -(c[i] as i128);
            }
            rel[r][r] = m as i128;
            let (d, _v, vinv) = smith(rel);
            let mut hs = gens.clone();
            hs.push(x.clone());
            let mut new_inv = Vec::new();
            let mut new_gens = Vec::new();
            for j in 0..k {
                if d[j] == 1 {
                    continue;
                }
                let mut b = identity.clone();
                for i in 0..k {
                    let ex = vinv[j][i].rem_euclid(total as i128) as u64;
                    if ex != 0 {
                        b = mul(&b, &pow(&hs[i], ex));
                    }
                }
                new_inv.push(d[j] as u64);
                new_gens.push(b);
            }
            invariants = new_inv;
            gens = new_gens;
            // enumerate the new subgroup
            let mut elems: Vec<(T, Vec<u64>)> = vec![(identity.clone(), vec![0; gens.len()])];
            for (g, (gen, &n)) in gens.iter().zip(&invariants).enumerate() {
                let mut next = Vec::with_capacity(elems.len() * n as usize);
                for (e, c) in &elems {
                    let mut cur = e.clone();
                    for s in 0..n {
                        let mut cc = c.clone();
                        cc[g] = s;
                        next.push((cur.clone(), cc));
                        cur = mul(&cur, gen);
                    }
                }
                elems = next;
            }
            table = elems.into_iter().collect();
        }
        if table.len() as u64 != total {
            return Err(Error::InvalidParameter("element set is not closed under multiplication".into()));
        }
        let mut elements = Vec::with_capacity(all.len());
        let mut coords = Vec::with_capacity(all.len());
        let mut index = HashMap::with_capacity(all.len());
        for x in all {
            index.insert(x.clone(), elements.len());
            coords.push(table[x].clone());
            elements.push(x.clone());
        }
        Ok(FiniteAbelianGroup { invariants, generators: gens, elements, coords, index })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Least common multiple of the invariant factors.
    pub fn exponent(&self) -> u64 {
        self.invariants.last().copied().unwrap_or(1)
    }

    pub fn index_of(&self, x: &T) -> Option<usize> {
        self.index.get(x).copied()
    }

    /// Coordinates of x (discrete logarithm).
    pub fn log(&self, x: &T) -> Option<&[u64]> {
        self.index_of(x).map(|i| self.coords[i].as_slice())
    }

    /// Every character, as coordinate vectors c with χ(y) = Σ c_i y_i / n_i.
    pub fn characters(&self) -> Vec<Character> {
        let mut out = vec![Character { coords: Vec::new() }];
        for &n in &self.invariants {
            out = out
                .into_iter()
                .flat_map(|c| {
                    (0..n).map(move |s| {
                        let mut v = c.coords.clone();
                        v.push(s);
                        Character { coords: v }
                    })
                })
                .collect();
        }
        out
    }

    /// χ(x) as a numerator over the exponent.
    pub fn value(&self, chi: &Character, idx: usize) -> u64 {
        let l = self.exponent();
        let y = &self.coords[idx];
        let mut acc = 0u128;
        for ((c, yi), n) in chi.coords.iter().zip(y).zip(&self.invariants) {
            acc += (*c as u128 * *yi as u128 % *n as u128) * (l / n) as u128;
        }
        (acc % l as u128) as u64
    }

    /// A generating set of the subgroup formed by the listed elements.
    pub fn generating_set(&self, members: &[usize]) -> Vec<usize> {
        let mut span: std::collections::HashSet<Vec<u64>> = std::collections::HashSet::from([vec![0; self.invariants.len()]]);
        let mut gens = Vec::new();
        for &i in members {
            if span.contains(&self.coords[i]) {
                continue;
            }
            gens.push(i);
            let g = &self.coords[i];
            let mut frontier: Vec<Vec<u64>> = span.iter().cloned().collect();
            while let Some(c) = frontier.pop() {
                let d: Vec<u64> = c.iter().zip(g).zip(&self.invariants).map(|((a, b), n)| (a + b) % n).collect();
                if span.insert(d.clone()) {
                    frontier.push(d);
                }
            }
        }
        gens
    }
}

/// A character of a [`FiniteAbelianGroup`] in dual coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Character {
    pub coords: Vec<u64>,
}

impl Character {
    pub fn is_trivial(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smith_of_small_matrix() {
        let (d, v, vinv) = smith(vec![vec![2, 4], vec![6, 8]]);
        let mut d = d;
        d.sort();
        assert_eq!(d, vec![2, 4]);
        for i in 0..2 {
            for j in 0..2 {
                let s: i128 = (0..2).map(|k| v[i][k] * vinv[k][j]).sum();
                assert_eq!(s, i128::from(i == j));
            }
        }
    }

    #[test]
    fn units_mod_n() {
        // (Z/63)^× ≅ Z/6 × Z/6
        let all: Vec<u64> = (1..63).filter(|x| num_integer::gcd(*x, 63) == 1).collect();
        let g = FiniteAbelianGroup::from_elements(&all, 1, |a, b| a * b % 63).unwrap();
        assert_eq!(g.invariants, vec![6, 6]);
        assert_eq!(g.characters().len(), 36);
        // (Z/16)^× ≅ Z/2 × Z/4
        let all: Vec<u64> = (1..16).step_by(2).collect();
        let g = FiniteAbelianGroup::from_elements(&all, 1, |a, b| a * b % 16).unwrap();
        assert_eq!(g.invariants, vec![2, 4]);
        for (i, x) in all.iter().enumerate() {
            for (j, y) in all.iter().enumerate() {
                let k = g.index_of(&(x * y % 16)).unwrap();
                for chi in g.characters() {
                    assert_eq!((g.value(&chi, i) + g.value(&chi, j)) % 4, g.value(&chi, k));
                }
            }
        }
    }

    #[test]
    fn generating_sets_span() {
        let all: Vec<u64> = (1..63).filter(|x| num_integer::gcd(*x, 63) == 1).collect();
        let g = FiniteAbelianGroup::from_elements(&all, 1, |a, b| a * b % 63).unwrap();
        let idx: Vec<usize> = (0..all.len()).collect();
        assert_eq!(g.generating_set(&idx).len(), 2);
    }
}
