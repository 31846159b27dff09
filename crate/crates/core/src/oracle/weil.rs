//! T/T_N by brute force, its characters, the Weil spectrum and restriction to S.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::group::{Character, FiniteAbelianGroup, GROUP_BUDGET};
use super::ring::{FiniteQuotientRing, RingElement};
use crate::error::{Error, Result};
use crate::padic::ResidueElement;
use crate::torus::{Case, SubtorusSpec, TorusDescriptor};

/// T/T_N with its congruence filtration.
#[derive(Clone, Debug)]
pub struct QuotientGroup {
    /// 𝒪″/𝒫″^{N+E}: two extra levels so traces of ϖ″(x − 1) are exact where needed.
    pub ring: FiniteQuotientRing,
    pub n: u32,
    pub mu: i64,
    pub group: FiniteAbelianGroup<RingElement>,
    /// Level of each element (N for the identity).
    pub levels: Vec<u32>,
    /// Generators of the image of T_j, j = 0..=N.
    pub level_generators: Vec<Vec<usize>>,
}

/// A value in Q/Z as a reduced fraction num/den with 0 ≤ num < den.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Qz {
    pub num: u64,
    pub den: u64,
}

impl Qz {
    pub fn new(num: u64, den: u64) -> Self {
        let num = num % den;
        let g = num_integer::gcd(num, den);
        Qz { num: num / g, den: den / g }
    }
}

/// The additive character a ↦ {p^{−λψ−s}·a} on Z_p, for a known modulo p^{λψ+s}.
pub fn additive_character(p: u64, lambda_psi: i64, shift: u32, a: u64) -> Result<Qz> {
    let e = lambda_psi + shift as i64;
    if e < 0 {
        return Ok(Qz::new(0, 1));
    }
    let den = p.checked_pow(e as u32).ok_or_else(|| Error::BudgetExceeded("ψ denominator".into()))?;
    Ok(Qz::new(a % den, den))
}

/// Enumerate T/T_N as the norm-one solutions in 𝒪″/𝒫″^N, lifting level by level.
pub fn quotient_group(t: &TorusDescriptor, n: u32) -> Result<QuotientGroup> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    let e_ram = match t.case() {
        Case::A => 2,
        Case::B => 2 * t.params.halfdeg,
    };
    let ring = FiniteQuotientRing::for_torus(t, n + e_ram)?;
    let residues = ring.residues();
    let mut cur: Vec<RingElement> = vec![ring.zero()];
    for i in 0..n {
        let one = ring.reduce(&ring.one(), i + 1);
        let mut next = Vec::new();
        for x in &cur {
            for r in &residues {
                let y = ring.reduce(&ring.add(x, &ring.digit(r, i)), i + 1);
                if ring.reduce(&ring.mul(&y, &ring.tau(&y)), i + 1) == one {
                    next.push(y);
                }
            }
            if next.len() > GROUP_BUDGET {
                return Err(Error::BudgetExceeded(format!("|T/T_{}| exceeds {GROUP_BUDGET}", i + 1)));
            }
        }
        cur = next;
    }
    let identity = ring.reduce(&ring.one(), n);
    let group = FiniteAbelianGroup::from_elements(&cur, identity, |a, b| ring.reduce(&ring.mul(a, b), n))?;
    let levels: Vec<u32> = group.elements.iter().map(|x| ring.level_of(x, n)).collect();
    let level_generators = (0..=n)
        .map(|j| {
            let members: Vec<usize> = (0..levels.len()).filter(|&i| levels[i] >= j).collect();
            group.generating_set(&members)
        })
        .collect();
    Ok(QuotientGroup { ring, n, mu: t.mu, group, levels, level_generators })
}

impl QuotientGroup {
    pub fn order(&self) -> usize {
        self.group.order()
    }

    /// |T/T_j| for j = 0..=N, counted from element levels.
    pub fn filtration_orders(&self) -> Vec<u64> {
        (0..=self.n)
            .map(|j| {
                let inside = self.levels.iter().filter(|&&l| l >= j).count();
                (self.order() / inside) as u64
            })
            .collect()
    }

    fn value(&self, chi: &Character, idx: usize) -> Qz {
        Qz::new(self.group.value(chi, idx), self.group.exponent())
    }

    fn trivial_on(&self, chi: &Character, gens: &[usize]) -> bool {
        gens.iter().all(|&g| self.group.value(chi, g) == 0)
    }

    /// Smallest j with χ trivial on T_j.
    pub fn conductor(&self, chi: &Character) -> u32 {
        (0..=self.n).find(|&j| self.trivial_on(chi, &self.level_generators[j as usize])).unwrap_or(self.n)
    }

    /// Units b of k′ modulo ϖ′^{digits}, as (digit list, ring element).
    fn parameter_classes(&self, digits: u32) -> Vec<(Vec<ResidueElement>, RingElement)> {
        let ring = &self.ring;
        let residues = ring.residues();
        let mut out: Vec<(Vec<ResidueElement>, RingElement)> = vec![(Vec::new(), ring.zero())];
        for s in 0..digits {
            out = out
                .into_iter()
                .flat_map(|(ds, b)| {
                    residues
                        .iter()
                        .filter(|r| s > 0 || r.iter().any(|&x| x != 0))
                        .map(|r| {
                            let mut d = ds.clone();
                            d.push(r.clone());
                            (d, ring.add(&b, &ring.monomial(&ring.lift_digits(r), s, 0)))
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        out
    }

    /// χ_b(x) = ψ(−(−1)^{μ−j}/4 · tr(ϖ′^{μ−j} b ϖ″ x)) on T_j (case A).
    fn chi_b(&self, b: &[u64], j: u32, idx: usize) -> Result<Qz> {
        let ring = &self.ring;
        let p = ring.p;
        let x = &self.group.elements[idx];
        let y = ring.mul(&ring.mul(b, &ring.pi()), &ring.sub(x, &ring.one()));
        let den = p.pow(j + 1);
        let tr = ring.trace(&y) % den;
        let inv4 = modinv(4 % den, den);
        let sign_neg = (self.mu - j as i64).rem_euclid(2) == 0;
        let mut z = (tr as u128 * inv4 as u128 % den as u128) as u64;
        if sign_neg {
            z = (den - z) % den;
        }
        // ψ(p^{μ−j} z) with μ = λψ − 1: the denominator is p^{j+1} for every λψ
        additive_character(p, 0, j + 1, z)
    }

    fn signature_on(&self, chi: &Character, gens: &[usize]) -> Vec<Qz> {
        gens.iter().map(|&g| self.value(chi, g)).collect()
    }
}

fn modinv(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(m as i128) as u64
}

/// A character of T/T_N together with its conductor and, in case A, its parameter.
#[derive(Clone, Debug)]
pub struct UnitaryCharacter {
    pub character: Character,
    pub conductor: u32,
    /// Digits of b with χ|_{T_j} = χ_b (case A, conductor 2j).
    pub parameter: Option<Vec<ResidueElement>>,
    pub square: Option<bool>,
}

/// Every character of T/T_N with its conductor.
pub fn all_characters(qg: &QuotientGroup) -> Vec<UnitaryCharacter> {
    qg.group
        .characters()
        .into_iter()
        .map(|c| {
            let conductor = qg.conductor(&c);
            UnitaryCharacter { character: c, conductor, parameter: None, square: None }
        })
        .collect()
}

/// Characters of T/T_N in the Weil spectrum.
pub fn weil_characters_mod(qg: &QuotientGroup) -> Result<Vec<UnitaryCharacter>> {
    let mut chars = all_characters(qg);
    match qg.ring.case {
        Case::B => {
            chars.retain(|c| (c.conductor as i64 - qg.mu).rem_euclid(2) == 0);
            Ok(chars)
        }
        Case::A => {
            let rf = qg.ring.residue_field().clone();
            // signature of χ_b on generators of T_j, for every parameter class b
            let mut tables: HashMap<u32, HashMap<Vec<Qz>, Vec<ResidueElement>>> = HashMap::new();
            let mut out = Vec::new();
            for mut c in chars {
                if c.conductor == 0 {
                    out.push(c);
                    continue;
                }
                if c.conductor % 2 == 1 {
                    continue;
                }
                let j = c.conductor / 2;
                let gens = &qg.level_generators[j as usize];
                if let std::collections::hash_map::Entry::Vacant(v) = tables.entry(j) {
                    let mut tab = HashMap::new();
                    for (digits, b) in qg.parameter_classes(j - j / 2) {
                        let sig = gens.iter().map(|&g| qg.chi_b(&b, j, g)).collect::<Result<Vec<_>>>()?;
                        tab.insert(sig, digits);
                    }
                    v.insert(tab);
                }
                let sig = qg.signature_on(&c.character, gens);
                let digits = tables[&j]
                    .get(&sig)
                    .ok_or_else(|| Error::OutsideDomain(format!("conductor-{} character with no parameter b", c.conductor)))?;
                c.square = Some(rf.is_nonzero_square(&digits[0]));
                c.parameter = Some(digits.clone());
                if c.square == Some(true) {
                    out.push(c);
                }
            }
            Ok(out)
        }
    }
}

/// Image of S in T/T_N: the t with Π_l ι_l(t)^{a_l} ≡ 1 for each a in a basis of M̄_{d̲}.
pub fn subtorus_image(qg: &QuotientGroup, s: &SubtorusSpec) -> Result<Vec<usize>> {
    let ring = &qg.ring;
    let n = qg.n;
    let basis: Vec<Vec<i64>> = s
        .module
        .basis()
        .iter()
        .map(|b| b.coeffs.iter().map(|c| c.to_i64().ok_or_else(|| Error::BudgetExceeded("lattice entry".into()))).collect())
        .collect::<Result<_>>()?;
    let one = ring.reduce(&ring.one(), n);
    let exponent = qg.group.exponent() as i64;
    let mut out = Vec::new();
    for (idx, x) in qg.group.elements.iter().enumerate() {
        let conj: Vec<RingElement> = (0..s.torus.gamma_order() as usize).map(|l| ring.reduce(&ring.iota(x, l), n)).collect();
        let inside = basis.iter().all(|a| {
            let mut acc = one.clone();
            for (l, &c) in a.iter().enumerate() {
                let c = c.rem_euclid(exponent) as u64;
                if c != 0 {
                    acc = ring.reduce(&ring.mul(&acc, &ring.pow(&conj[l], c)), n);
                }
            }
            acc == one
        });
        if inside {
            out.push(idx);
        }
    }
    Ok(out)
}

/// A character of S/S_N, given by its values on fixed generators of the image of S.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubgroupCharacter {
    pub values: Vec<Qz>,
}

/// Spectrum characters of T sharing one restriction to S.
#[derive(Clone, Debug, Serialize)]
pub struct RestrictionClass {
    /// Conductor of χ_S.
    pub conductor: u32,
    /// Number of spectrum characters of T/T_N restricting to χ_S.
    pub count: u64,
    /// Those among them whose conductor equals c(χ_S).
    pub count_same_conductor: u64,
    /// Conductors of the extensions.
    pub extension_conductors: BTreeSet<u32>,
    /// Parameter digits of one extension (case A).
    pub parameter: Option<Vec<ResidueElement>>,
    #[serde(skip)]
    pub restriction: SubgroupCharacter,
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictionTable {
    pub n: u32,
    /// |S T_N / T_N|.
    pub image_order: usize,
    /// |S/S_j| for j = 0..=N.
    pub image_filtration: Vec<u64>,
    pub classes: Vec<RestrictionClass>,
}

impl RestrictionTable {
    /// restrict_count for a character of S/S_N.
    pub fn count(&self, chi_s: &SubgroupCharacter) -> u64 {
        self.classes.iter().find(|c| &c.restriction == chi_s).map_or(0, |c| c.count)
    }
}

/// Group the Weil spectrum of T/T_N by restriction to the image of S.
pub fn restriction_table(qg: &QuotientGroup, spectrum: &[UnitaryCharacter], s: &SubtorusSpec) -> Result<RestrictionTable> {
    let image = subtorus_image(qg, s)?;
    let gens = qg.group.generating_set(&image);
    let level_gens: Vec<Vec<usize>> = (0..=qg.n)
        .map(|j| {
            let members: Vec<usize> = image.iter().copied().filter(|&i| qg.levels[i] >= j).collect();
            qg.group.generating_set(&members)
        })
        .collect();
    let image_filtration = (0..=qg.n)
        .map(|j| (image.len() / image.iter().filter(|&&i| qg.levels[i] >= j).count()) as u64)
        .collect();
    let mut classes: Vec<RestrictionClass> = Vec::new();
    let mut by_sig: HashMap<SubgroupCharacter, usize> = HashMap::new();
    for c in spectrum {
        let sig = SubgroupCharacter { values: qg.signature_on(&c.character, &gens) };
        let k = *by_sig.entry(sig.clone()).or_insert_with(|| {
            let conductor = (0..=qg.n).find(|&j| qg.trivial_on(&c.character, &level_gens[j as usize])).unwrap_or(qg.n);
            classes.push(RestrictionClass {
                conductor,
                count: 0,
                count_same_conductor: 0,
                extension_conductors: BTreeSet::new(),
                parameter: c.parameter.clone(),
                restriction: sig,
            });
            classes.len() - 1
        });
        let cl = &mut classes[k];
        cl.count += 1;
        if c.conductor == cl.conductor {
            cl.count_same_conductor += 1;
        }
        cl.extension_conductors.insert(c.conductor);
    }
    Ok(RestrictionTable { n: qg.n, image_order: image.len(), image_filtration, classes })
}

/// Predicted |T/T_j| from the torus module, for comparison with the enumeration.
pub fn predicted_orders(t: &TorusDescriptor, n: u32) -> Vec<u64> {
    t.filtration(n).quotient_orders.iter().map(|x: &BigUint| x.to_u64().unwrap_or(u64::MAX)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{build_max_torus, TorusParams};

    fn torus(p: TorusParams) -> TorusDescriptor {
        build_max_torus(&p, 12).unwrap()
    }

    #[test]
    fn case_b_level_one_is_cyclic_of_order_q_plus_one() {
        for p in [3, 5, 7] {
            let t = torus(TorusParams::case_b(p, 1, 0));
            let qg = quotient_group(&t, 1).unwrap();
            assert_eq!(qg.group.invariants, vec![p + 1]);
        }
    }

    #[test]
    fn filtrations_match_the_torus_module() {
        for (params, n) in [
            (TorusParams::case_b(3, 1, 0), 5),
            (TorusParams::case_b(3, 2, 1), 6),
            (TorusParams::case_b(5, 1, 1), 3),
            (TorusParams::case_a(3, 1), 5),
            (TorusParams::case_a(5, 1), 4),
        ] {
            let t = torus(params.clone());
            let qg = quotient_group(&t, n).unwrap();
            assert_eq!(qg.filtration_orders(), predicted_orders(&t, n), "{params:?}");
        }
    }

    #[test]
    fn case_a_level_two() {
        let t = torus(TorusParams::case_a(3, 1));
        let qg = quotient_group(&t, 2).unwrap();
        assert_eq!(qg.order(), 2 * 9);
    }

    #[test]
    fn character_count_is_group_order() {
        let t = torus(TorusParams::case_b(3, 1, 1));
        let qg = quotient_group(&t, 4).unwrap();
        assert_eq!(all_characters(&qg).len(), qg.order());
    }

    #[test]
    fn spectrum_counts_match_conductor_formula() {
        for (params, n) in [(TorusParams::case_b(3, 1, 0), 5), (TorusParams::case_b(3, 1, 1), 4), (TorusParams::case_a(3, 1), 4)] {
            let t = torus(params.clone());
            let qg = quotient_group(&t, n).unwrap();
            let spectrum = weil_characters_mod(&qg).unwrap();
            for e in crate::torus::weil_spectrum(&t, n) {
                let got = spectrum.iter().filter(|c| c.conductor == e.conductor).count() as u64;
                assert_eq!(BigUint::from(got), e.count, "{params:?} conductor {}", e.conductor);
            }
            let listed: u64 = crate::torus::weil_spectrum(&t, n).iter().map(|e| e.count.to_u64().unwrap()).sum();
            assert_eq!(spectrum.len() as u64, listed);
        }
    }

    #[test]
    fn case_a_parameters_split_into_squares_and_nonsquares() {
        let t = torus(TorusParams::case_a(5, 1));
        let qg = quotient_group(&t, 4).unwrap();
        let all = all_characters(&qg);
        let spectrum = weil_characters_mod(&qg).unwrap();
        for c in [2u32, 4] {
            let total = all.iter().filter(|x| x.conductor == c).count();
            let inside = spectrum.iter().filter(|x| x.conductor == c).count();
            assert_eq!(2 * inside, total);
        }
    }

    #[test]
    fn full_torus_restriction_is_multiplicity_free() {
        let t = torus(TorusParams::case_b(3, 1, 1));
        let s = t.subtorus(&[]).unwrap();
        let qg = quotient_group(&t, 4).unwrap();
        let spectrum = weil_characters_mod(&qg).unwrap();
        let tab = restriction_table(&qg, &spectrum, &s).unwrap();
        assert_eq!(tab.image_order, qg.order());
        assert!(tab.classes.iter().all(|c| c.count == 1));
    }

    #[test]
    fn additive_character_kernel() {
        // ψ(p^{-1}·) with λψ = 0 is trivial exactly on pZ_p
        let kernel: Vec<u64> = (0..9).filter(|&a| additive_character(3, 0, 1, a).unwrap().num == 0).collect();
        assert_eq!(kernel, vec![0, 3, 6]);
        let v = |a| additive_character(5, 2, 1, a).unwrap();
        assert_eq!(v(125), Qz::new(0, 1));
        assert_ne!(v(25), Qz::new(0, 1));
        for a in 0..40u64 {
            for b in 0..40u64 {
                let s = v(a + b);
                let (x, y) = (v(a), v(b));
                assert_eq!(s, Qz::new(x.num * (125 / x.den) + y.num * (125 / y.den), 125));
            }
        }
    }
}
