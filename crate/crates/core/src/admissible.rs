//! Admissibility of subtori S ⊂ T.
//!
//! S is admissible iff the norm group N_{k″/k′}(k″^×) meets (𝔰/u)^⊥ ⊂ k′ only in 0,
//! where ⊥ is taken for the trace form tr_{k′/k}(xy). A point of the intersection is
//! x = N(uw) for some w ≠ 0 with φ(w) = 0 on 𝔰, which is the certificate we return.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize, Serializer};

use crate::cyclomod::p_poly;
use crate::error::{Error, Result};
use crate::padic::{in_norm_group_of, kernel, ElementDigits, FieldElement, FiniteField, QuadraticKind, ResidueElement, Valuation};
use crate::torus::{momentum_pairing, Case, SubtorusSpec, TorusDescriptor};

/// Largest residue subspace (projectively) scanned in case A.
pub const RESIDUE_SCAN_CAP: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Admissible,
    NotAdmissible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// S = {1}, admissible by convention.
    TrivialTorus,
    /// Case B: parity of 2e/d.
    Parity,
    /// Case A: squares in the residue of (𝔰/ϖ″)^⊥.
    ResidueSquares,
}

/// w ∈ k″ with φ(w) = 0 on 𝔰, and x = N_{k″/k′}(uw) ∈ (𝔰/u)^⊥.
#[derive(Clone, Debug)]
pub struct Witness {
    pub w: FieldElement,
    pub x: FieldElement,
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            w: ElementDigits,
            x: ElementDigits,
        }
        Out { w: (&self.w).into(), x: (&self.x).into() }.serialize(s)
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    Witness(Witness),
    /// Every i ∈ I′ has parity opposite to v″(u).
    Parity { index_set_complement: Vec<u64>, v_u: u8 },
    /// F_q-basis of the residue subspace and the number of projective points checked.
    ResidueSubspace { basis: Vec<ResidueElement>, checked: u128 },
    Convention,
}

#[derive(Clone, Debug, Serialize)]
pub struct Decision {
    pub divisors: Vec<u64>,
    pub verdict: Verdict,
    pub method: Method,
    pub certificate: Certificate,
}

impl Decision {
    pub fn is_admissible(&self) -> bool {
        self.verdict == Verdict::Admissible
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.certificate {
            Certificate::Witness(w) => Some(w),
            _ => None,
        }
    }
}

pub fn is_admissible(s: &SubtorusSpec) -> Result<Decision> {
    let divisors = s.divisors.clone();
    if s.is_trivial() {
        return Ok(Decision { divisors, verdict: Verdict::Admissible, method: Method::TrivialTorus, certificate: Certificate::Convention });
    }
    match s.case() {
        Case::B => {
            let v = s.torus.v_u();
            if parity_rule(s) {
                let ip = s.index_set_complement.clone().unwrap();
                Ok(Decision { divisors, verdict: Verdict::Admissible, method: Method::Parity, certificate: Certificate::Parity { index_set_complement: ip, v_u: v } })
            } else {
                let w = case_b_witness(s)?.expect("parity failure gives a monomial witness");
                Ok(Decision { divisors, verdict: Verdict::NotAdmissible, method: Method::Parity, certificate: Certificate::Witness(w) })
            }
        }
        Case::A => {
            let scan = residue_scan(s)?;
            match scan.square {
                Some(x0) => {
                    let w = case_a_witness(s, &x0)?;
                    Ok(Decision { divisors, verdict: Verdict::NotAdmissible, method: Method::ResidueSquares, certificate: Certificate::Witness(w) })
                }
                None => Ok(Decision {
                    divisors,
                    verdict: Verdict::Admissible,
                    method: Method::ResidueSquares,
                    certificate: Certificate::ResidueSubspace { basis: scan.basis, checked: scan.checked },
                }),
            }
        }
    }
}

// ---- case B ----

/// All 2e/d odd (v″(u) = 0) or all even (v″(u) = 1).
pub fn parity_rule(s: &SubtorusSpec) -> bool {
    let n = s.torus.gamma_order();
    let want = if s.torus.v_u() == 0 { 1 } else { 0 };
    s.divisors.iter().all(|d| (n / d) % 2 == want)
}

/// I′ ⊂ odd numbers (v″(u) = 0) or I′ ⊂ even numbers (v″(u) = 1).
pub fn support_rule(s: &SubtorusSpec) -> Result<bool> {
    let ip = s.index_set_complement.as_ref().ok_or_else(|| Error::Unsupported("support rule is for case B".into()))?;
    let v = s.torus.v_u() as u64;
    Ok(ip.iter().all(|i| i % 2 != v))
}

/// Monomial witness ϖ′^{m/2 - v}/ν, with ϖ′^m ∈ (𝔰/u)^⊥ and m even.
fn case_b_witness(s: &SubtorusSpec) -> Result<Option<Witness>> {
    let t = &s.torus;
    let n = t.gamma_order() as i64;
    let v = t.v_u() as i64;
    let Some(&i) = s.index_set_complement.as_ref().unwrap().iter().find(|&&i| (i as i64 - v).rem_euclid(2) == 0) else {
        return Ok(None);
    };
    let m = (v - i as i64).rem_euclid(n);
    let w1 = FieldElement::uniformizer(&t.k1);
    let w = w1.pow(m / 2 - v).embed_into(&t.k2)?.div(&t.nu)?;
    Ok(Some(Witness { w, x: w1.pow(m) }))
}

/// Smallest extension of F_p containing a primitive n-th root of unity, and that root.
fn root_of_unity(p: u64, q: u64, n: u64) -> Result<(FiniteField, ResidueElement)> {
    let mut r = 1usize;
    let mut qr = q as u128;
    while (qr - 1) % n as u128 != 0 {
        r += 1;
        qr *= q as u128;
    }
    let mut m = 0;
    let mut x = q;
    while x > 1 {
        x /= p;
        m += 1;
    }
    let fp = FiniteField::prime(p)?;
    let ff = if r * m == 1 { fp } else { fp.extension(r * m)? };
    let g = ff.primitive_element();
    let z = ff.pow(&g, (ff.size() - 1) / n as u128);
    Ok((ff, z))
}

fn eval_in(ff: &FiniteField, poly: &[BigInt], x: &[u64]) -> ResidueElement {
    let p = BigInt::from(ff.characteristic());
    let mut acc = ff.zero();
    for c in poly.iter().rev() {
        let c = ((c % &p) + &p) % &p;
        let c: u64 = c.try_into().unwrap();
        acc = ff.add(&ff.mul(&acc, x), &ff.from_u64(c));
    }
    acc
}

/// Case B decision by linear algebra: the eigen-decomposition of σ on monomials is read off in
/// a finite field, the orthogonal complement of 𝔰/u is a trace-form kernel over k, and the
/// verdict checks whether that complement has an element of even valuation.
pub fn residue_rule_case_b(s: &SubtorusSpec) -> Result<bool> {
    let t = &s.torus;
    if t.case() != Case::B {
        return Err(Error::Unsupported("case B only".into()));
    }
    let n = t.gamma_order();
    let (ff, zeta) = root_of_unity(t.params.p, t.q(), n)?;
    let mut index: Vec<u64> = (0..n).collect();
    for &d in &s.divisors {
        let poly = p_poly(n, d)?;
        index.retain(|&l| ff.is_zero(&eval_in(&ff, &poly, &ff.pow(&zeta, l as u128))));
    }
    let v = t.v_u() as i64;
    let w1 = FieldElement::uniformizer(&t.k1);
    let rows: Vec<Vec<FieldElement>> = index
        .iter()
        .map(|&a| (0..n).map(|m| w1.pow(a as i64 - v + m as i64).trace(&t.k)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let ker = kernel(&t.k, &rows, n as usize);
    let mut elems: Vec<FieldElement> = Vec::new();
    for c in &ker {
        let mut x = FieldElement::zero(&t.k1);
        for (m, cm) in c.iter().enumerate() {
            x = x.add(&cm.embed_into(&t.k1)?.mul(&w1.pow(m as i64)));
        }
        elems.push(x);
    }
    let vals = valuation_echelon(&elems, n as i64)?;
    Ok(vals.iter().all(|v| v.rem_euclid(2) == 1))
}

/// Reduce elements of k′ (case B, e_{k′/k} = n) until their valuations are distinct mod n.
fn valuation_echelon(elems: &[FieldElement], n: i64) -> Result<Vec<i64>> {
    let mut xs: Vec<FieldElement> = elems.to_vec();
    let mut iterations = 0;
    loop {
        let vals: Vec<i64> = xs
            .iter()
            .map(|x| x.valuation().finite().ok_or_else(|| Error::InsufficientPrecision("vanishing complement vector".into())))
            .collect::<Result<_>>()?;
        let clash = (0..xs.len()).find_map(|i| (i + 1..xs.len()).find(|&j| (vals[i] - vals[j]).rem_euclid(n) == 0).map(|j| (i, j)));
        let Some((i, j)) = clash else { return Ok(vals) };
        iterations += 1;
        if iterations > 64 * (xs.len() + 1) {
            return Err(Error::InsufficientPrecision("valuation echelon did not settle".into()));
        }
        // x_j - λ x_i with λ ∈ k matching the leading terms
        let (a, b) = if vals[i] <= vals[j] { (i, j) } else { (j, i) };
        let k = xs[a].field().parent().unwrap().clone();
        let shift = (vals[b] - vals[a]) / n;
        let lead_a = xs[a].shift_by(-vals[a]).leading_residue()?;
        let lead_b = xs[b].shift_by(-vals[b]).leading_residue()?;
        let rf = k.residue_field();
        let ratio = rf_ratio(rf, &lead_b, &lead_a, xs[a].field().residue_field())?;
        let lambda = FieldElement::teichmuller(&k, &ratio).mul(&FieldElement::uniformizer(&k).pow(shift)).embed_into(xs[a].field())?;
        let (lo, hi) = (xs[a].clone(), xs[b].clone());
        xs[b] = hi.sub(&lo.mul(&lambda));
        xs[a] = lo;
    }
}

/// b/a for residues of k′ that lie in the residue field of k (totally ramified k′/k).
fn rf_ratio(rf_k: &FiniteField, b: &[u64], a: &[u64], rf_k1: &FiniteField) -> Result<ResidueElement> {
    if rf_k.dim() != rf_k1.dim() {
        return Err(Error::Unsupported("echelon needs k′/k totally ramified".into()));
    }
    Ok(rf_k1.mul(b, &rf_k1.inv(a)?))
}

// ---- case A ----

struct ResidueScan {
    basis: Vec<ResidueElement>,
    square: Option<FieldElement>,
    checked: u128,
}

/// Residue of V ∩ 𝒪′ for V = (𝔰/ϖ″)^⊥ = E(k′), and a nonzero square in it, if any.
///
/// V is computed as ker(1 - E) over k and saturated in 𝒪′, so the reduction does not rely
/// on E being integral (it is not when p | f).
fn residue_scan(s: &SubtorusSpec) -> Result<ResidueScan> {
    let t = &s.torus;
    let basis = saturated_complement(s)?;
    let rf1 = t.k1.residue_field();
    let rfk = t.k.residue_field();
    let residues: Vec<ResidueElement> = basis.iter().map(|b| b.residue()).collect::<Result<_>>()?;
    // F_q scalars: residue c, its image in F_{q′}, and its Teichmüller lift in k′
    let scalars: Vec<(ResidueElement, FieldElement)> = rfk
        .elements()
        .skip(1)
        .map(|c| {
            let lift = FieldElement::teichmuller(&t.k, &c).embed_into(&t.k1)?;
            Ok((lift.residue()?, lift))
        })
        .collect::<Result<_>>()?;
    let q = rfk.size();
    let r = residues.len() as u32;
    let total = if r == 0 { 0 } else { (q.pow(r) - 1) / (q - 1) };
    if total > RESIDUE_SCAN_CAP {
        return Err(Error::BudgetExceeded(format!("residue subspace has {total} projective points")));
    }
    let mut checked = 0u128;
    // projective points over F_q: first nonzero coefficient 1, and F_q^× ⊂ squares of F_{q′}
    for lead in 0..residues.len() {
        let count = q.pow((residues.len() - lead - 1) as u32);
        for idx in 0..count {
            checked += 1;
            let mut xbar = residues[lead].clone();
            let mut coeffs = Vec::new();
            let mut k = idx;
            for rb in &residues[lead + 1..] {
                let c = (k % q) as usize;
                k /= q;
                coeffs.push(c);
                if c != 0 {
                    xbar = rf1.add(&xbar, &rf1.mul(&scalars[c - 1].0, rb));
                }
            }
            if rf1.is_nonzero_square(&xbar) {
                let mut x0 = basis[lead].clone();
                for (c, b) in coeffs.iter().zip(&basis[lead + 1..]) {
                    if *c != 0 {
                        x0 = x0.add(&scalars[c - 1].1.mul(b));
                    }
                }
                return Ok(ResidueScan { basis: residues, square: Some(x0), checked });
            }
        }
    }
    Ok(ResidueScan { basis: residues, square: None, checked })
}

/// Residues of an 𝒪_k-basis of V ∩ 𝒪′, together with the residues of F_q inside F_{q′}
/// (index 0 is zero).
pub(crate) fn complement_residues(s: &SubtorusSpec) -> Result<(Vec<ResidueElement>, Vec<ResidueElement>)> {
    let t = &s.torus;
    let basis = saturated_complement(s)?;
    let residues = basis.iter().map(|b| b.residue()).collect::<Result<_>>()?;
    let scalars = t
        .k
        .residue_field()
        .elements()
        .map(|c| FieldElement::teichmuller(&t.k, &c).embed_into(&t.k1)?.residue())
        .collect::<Result<_>>()?;
    Ok((residues, scalars))
}

/// Basis of V ∩ 𝒪′ over 𝒪_k whose residues are F_q-independent.
fn saturated_complement(s: &SubtorusSpec) -> Result<Vec<FieldElement>> {
    let t = &s.torus;
    let n = t.k1.step_degree();
    let g = FieldElement::generator(&t.k1);
    let mut cols = Vec::with_capacity(n);
    let mut b = FieldElement::one(&t.k1);
    for _ in 0..n {
        cols.push(b.sub(&s.removed_projection(&b)?).parent_coords()?);
        b = b.mul(&g);
    }
    let rows: Vec<Vec<FieldElement>> = (0..n).map(|a| cols.iter().map(|c| c[a].clone()).collect()).collect();
    let ker = kernel(&t.k, &rows, n);
    let mut vs: Vec<FieldElement> = ker.iter().map(|c| FieldElement::from_parent_coords(&t.k1, c)).collect::<Result<_>>()?;
    let rfk = t.k.residue_field();
    let p_k = FieldElement::uniformizer(&t.k).embed_into(&t.k1)?;
    for _ in 0..(64 * n + 64) {
        for v in vs.iter_mut() {
            let val = v.valuation().finite().ok_or_else(|| Error::InsufficientPrecision("complement vector vanished".into()))?;
            *v = v.div(&p_k.pow(val))?;
        }
        let coords: Vec<Vec<ResidueElement>> = vs
            .iter()
            .map(|v| v.parent_coords()?.iter().map(|c| c.residue()).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        match residue_relation(rfk, &coords) {
            None => return Ok(vs),
            Some((i, rel)) => {
                // Σ [c_l] v_l ≡ 0, so it is divisible by ϖ; it replaces v_i (c_i = 1)
                let mut acc = FieldElement::zero(&t.k1);
                for (l, c) in rel.iter().enumerate() {
                    if !rfk.is_zero(c) {
                        acc = acc.add(&FieldElement::teichmuller(&t.k, c).embed_into(&t.k1)?.mul(&vs[l]));
                    }
                }
                vs[i] = acc;
            }
        }
    }
    Err(Error::InsufficientPrecision("saturation of (𝔰/ϖ″)^⊥ did not settle".into()))
}

/// A nontrivial F-linear relation Σ c_l rows[l] = 0, normalized so that c_i = 1.
fn residue_relation(ff: &FiniteField, rows: &[Vec<ResidueElement>]) -> Option<(usize, Vec<ResidueElement>)> {
    let m = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    // augmented rows [row | e_l], reduce the left block
    let mut aug: Vec<(Vec<ResidueElement>, Vec<ResidueElement>)> = rows
        .iter()
        .enumerate()
        .map(|(l, r)| (r.clone(), (0..m).map(|j| if j == l { ff.one() } else { ff.zero() }).collect()))
        .collect();
    let mut rank = 0;
    for c in 0..ncols {
        let Some(pr) = (rank..m).find(|&r| !ff.is_zero(&aug[r].0[c])) else { continue };
        aug.swap(pr, rank);
        let inv = ff.inv(&aug[rank].0[c]).unwrap();
        let piv = aug[rank].clone();
        for r in 0..m {
            if r != rank && !ff.is_zero(&aug[r].0[c]) {
                let f = ff.mul(&aug[r].0[c], &inv);
                for j in 0..ncols {
                    aug[r].0[j] = ff.sub(&aug[r].0[j], &ff.mul(&f, &piv.0[j]));
                }
                for j in 0..m {
                    aug[r].1[j] = ff.sub(&aug[r].1[j], &ff.mul(&f, &piv.1[j]));
                }
            }
        }
        rank += 1;
    }
    let (_, rel) = aug.into_iter().skip(rank).next()?;
    let i = rel.iter().position(|c| !ff.is_zero(c))?;
    let inv = ff.inv(&rel[i]).unwrap();
    Some((i, rel.iter().map(|c| ff.mul(c, &inv)).collect()))
}

/// x₀ ∈ V ∩ 𝒪′ has square unit residue, so x₀ = c² and w = c/ϖ″ has N(uw) = x₀.
fn case_a_witness(s: &SubtorusSpec, x0: &FieldElement) -> Result<Witness> {
    let t = &s.torus;
    let c = x0.sqrt()?.ok_or_else(|| Error::InsufficientPrecision("square residue did not lift".into()))?;
    let w = c.embed_into(&t.k2)?.div(&t.u)?;
    Ok(Witness { w, x: x0.clone() })
}

// ---- certificates ----

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessCheck {
    pub nonzero: bool,
    pub in_norm_group: bool,
    pub orthogonal: bool,
    /// Digits of k to which every ⟨φ(w), X⟩ is known to vanish.
    pub vanishing_digits: i64,
    pub valid: bool,
}

/// Re-check a witness against S from scratch: w ≠ 0, N(uw) in the norm group, and
/// ⟨φ(w), X⟩ = 0 for a spanning set of 𝔰, to at least `required_digits`.
pub fn verify_witness(s: &SubtorusSpec, w: &FieldElement, required_digits: i64) -> Result<WitnessCheck> {
    let t = &s.torus;
    let nonzero = !w.is_zero();
    let x = t.u.mul(w).norm(&t.k1)?;
    let in_group = nonzero && in_norm_group_of(&x, &t.k2)?;
    let mut orthogonal = true;
    let mut digits = i64::MAX;
    for xl in s.lie_spanning_set()? {
        let val = momentum_pairing(t, w, &xl)?;
        if !val.value.is_zero() {
            orthogonal = false;
        }
        let known = match val.valuation() {
            Valuation::Finite(v) => v,
            Valuation::AtLeast(n) => n,
            Valuation::Infinite => i64::MAX,
        };
        digits = digits.min(known);
    }
    let valid = nonzero && in_group && orthogonal && digits >= required_digits;
    Ok(WitnessCheck { nonzero, in_norm_group: in_group, orthogonal, vanishing_digits: digits, valid })
}

/// Whether a witness for S also certifies S′ (its x lies in (𝔰′/u)^⊥).
pub fn witness_applies_to(w: &Witness, s_prime: &SubtorusSpec, required_digits: i64) -> Result<bool> {
    Ok(verify_witness(s_prime, &w.w, required_digits)?.valid)
}

// ---- structural negative results ----

/// Ramification data of a tower k ⊂ k′ ⊂ k″.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerShape {
    pub quadratic: QuadraticKind,
    /// e_{k′/k}.
    pub ramification: u32,
    /// f_{k′/k}.
    pub residue_degree: u32,
    /// For ramified k″ = k′(√(γϖ′)): whether γ is a square in k′.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist_is_square: Option<bool>,
}

impl TowerShape {
    pub fn of(t: &TorusDescriptor) -> Result<Self> {
        Ok(match t.case() {
            Case::A => TowerShape {
                quadratic: QuadraticKind::Ramified,
                ramification: 1,
                residue_degree: t.gamma_order() as u32,
                twist_is_square: Some(match t.k2.twist() {
                    Some(g) => g.is_square()?,
                    None => true,
                }),
            },
            Case::B => TowerShape {
                quadratic: QuadraticKind::Unramified,
                ramification: t.gamma_order() as u32,
                residue_degree: 1,
                twist_is_square: None,
            },
        })
    }
}

/// True when no proper subtorus can be admissible: k″/k′ unramified with e_{k′/k} odd,
/// k″/k′ ramified with f_{k′/k} odd, or k″/k′ ramified with a non-square twist.
pub fn no_proper_admissible(shape: &TowerShape) -> bool {
    match shape.quadratic {
        QuadraticKind::Unramified => shape.ramification % 2 == 1,
        QuadraticKind::Ramified => shape.residue_degree % 2 == 1 || shape.twist_is_square == Some(false),
    }
}

// ---- bounded search on products ----

/// A subtorus of T₁ × … × Tₙ given by a spanning set of its Lie algebra.
#[derive(Clone, Debug)]
pub struct ProductSubtorus {
    pub components: Vec<TorusDescriptor>,
    /// Each entry is a tuple (X₁, …, Xₙ) with X_i ∈ 𝔱_i.
    pub lie_basis: Vec<Vec<FieldElement>>,
}

impl ProductSubtorus {
    pub fn from_subtorus(s: &SubtorusSpec) -> Result<Self> {
        Ok(ProductSubtorus { components: vec![s.torus.clone()], lie_basis: s.lie_spanning_set()?.into_iter().map(|x| vec![x]).collect() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchWindow {
    /// Valuations v″(w_i) tried, as a half-open range.
    pub min_valuation: i64,
    pub max_valuation: i64,
    /// Maximum number of candidate tuples.
    pub budget: u64,
    /// Digits of k to which the pairing must vanish.
    pub required_digits: i64,
}

impl SearchWindow {
    /// One period of the ramification lattice.
    pub fn default_for(t: &TorusDescriptor, required_digits: i64) -> Self {
        SearchWindow { min_valuation: 0, max_valuation: t.gamma_order() as i64, budget: 20_000, required_digits }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SearchOutcome {
    Found {
        #[serde(serialize_with = "ser_digits_vec")]
        w: Vec<FieldElement>,
        candidates: u64,
    },
    NoneFound {
        candidates: u64,
        exhaustive: bool,
    },
}

fn ser_digits_vec<S: Serializer>(w: &[FieldElement], s: S) -> std::result::Result<S::Ok, S::Error> {
    w.iter().map(ElementDigits::from).collect::<Vec<_>>().serialize(s)
}

/// Per-component data: trace functionals X ↦ tr_{k′/k}(b_j · X/u) on the k-basis b_j of k′.
///
/// ⟨φ(w), X⟩ depends on w only through N(uw), so for w = ϖ″^a [ρ]^i with ρ a primitive residue
/// it is enough to let i run over the residue field of k′ (the residue norm is onto).
struct ComponentData<'a> {
    t: &'a TorusDescriptor,
    /// functionals[x][j] = ½ tr(b_j y_X), y_X = X/u.
    functionals: Vec<Vec<FieldElement>>,
    /// [ρ] in k″.
    unit_gen: FieldElement,
    /// N([ρ]) in k′.
    norm_gen: FieldElement,
    /// N(u ϖ″^a) in k′ for a across the valuation window.
    shift_norms: Vec<FieldElement>,
}

impl<'a> ComponentData<'a> {
    fn new(t: &'a TorusDescriptor, xs: &[FieldElement], window: &SearchWindow) -> Result<Self> {
        let half = FieldElement::from_int(&t.k, 2).inv()?;
        let g = FieldElement::generator(&t.k1);
        let n = t.k1.step_degree();
        let mut functionals = Vec::with_capacity(xs.len());
        for x in xs {
            if x.field() != &t.k2 {
                return Err(Error::InvalidParameter("Lie basis entry outside k″".into()));
            }
            if !x.add(&t.tau(x)?).is_zero() {
                return Err(Error::OutsideDomain("Lie basis entry is not in 𝔱".into()));
            }
            let y = x.div(&t.u)?.restrict_to(&t.k1)?;
            let mut b = FieldElement::one(&t.k1);
            let mut row = Vec::with_capacity(n);
            for _ in 0..n {
                row.push(b.mul(&y).trace(&t.k)?.mul(&half));
                b = b.mul(&g);
            }
            functionals.push(row);
        }
        let norm = |z: &FieldElement| -> Result<FieldElement> { z.mul(&t.tau(z)?).restrict_to(&t.k1) };
        let unit_gen = FieldElement::teichmuller(&t.k2, &t.k2.residue_field().primitive_element());
        let norm_gen = norm(&unit_gen)?;
        let pi2 = FieldElement::uniformizer(&t.k2);
        let shift_norms = (window.min_valuation..window.max_valuation).map(|a| norm(&t.u.mul(&pi2.pow(a)))).collect::<Result<_>>()?;
        Ok(ComponentData { t, functionals, unit_gen, norm_gen, shift_norms })
    }

    fn candidates_per_valuation(&self) -> u64 {
        u64::try_from(self.t.k1.residue_field().size() - 1).unwrap_or(u64::MAX)
    }

    fn witness(&self, window: &SearchWindow, a: usize, i: u64) -> FieldElement {
        FieldElement::uniformizer(&self.t.k2).pow(window.min_valuation + a as i64).mul(&self.unit_gen.pow_u128(i as u128))
    }

    /// Values ⟨φ(w), X⟩ for all X, from n = N(uw).
    fn values(&self, n: &FieldElement) -> Result<Vec<FieldElement>> {
        let coords = n.parent_coords()?;
        Ok(self
            .functionals
            .iter()
            .map(|row| row.iter().zip(&coords).fold(FieldElement::zero(&self.t.k), |acc, (a, c)| acc.add(&a.mul(c))))
            .collect())
    }
}

/// Search w = (w_i) with w_i ∈ {0} ∪ {ϖ″^a [r]} over the valuation window for a nonzero
/// tuple with ⟨φ(w), X⟩ = 0 on every listed X. Deterministic lexicographic order; units
/// with the same residue norm give the same pairing and are tried once.
pub fn zero_fiber_witness_search(s: &ProductSubtorus, window: &SearchWindow) -> Result<SearchOutcome> {
    if s.components.is_empty() {
        return Err(Error::InvalidParameter("empty product".into()));
    }
    if s.lie_basis.iter().any(|x| x.len() != s.components.len()) {
        return Err(Error::InvalidParameter("Lie basis tuples must match the number of components".into()));
    }
    if window.max_valuation <= window.min_valuation {
        return Err(Error::InvalidParameter("empty valuation window".into()));
    }
    let data: Vec<ComponentData> = s
        .components
        .iter()
        .enumerate()
        .map(|(i, t)| ComponentData::new(t, &s.lie_basis.iter().map(|x| x[i].clone()).collect::<Vec<_>>(), window))
        .collect::<Result<_>>()?;
    let span = (window.max_valuation - window.min_valuation) as u64;
    let radix: Vec<u64> = data.iter().map(|d| span.saturating_mul(d.candidates_per_valuation()).saturating_add(1)).collect();
    let total: u128 = radix.iter().fold(1u128, |acc, &r| acc.saturating_mul(r as u128)) - 1;
    let k0 = &s.components[0].k;
    let mut candidates = 0u64;
    for code in 1..=total {
        if candidates >= window.budget {
            return Ok(SearchOutcome::NoneFound { candidates, exhaustive: false });
        }
        candidates += 1;
        let mut c = code;
        let mut picks = Vec::with_capacity(data.len());
        for &r in &radix {
            let digit = (c % r as u128) as u64;
            c /= r as u128;
            picks.push(digit);
        }
        let mut sums: Vec<FieldElement> = vec![FieldElement::zero(k0); s.lie_basis.len()];
        for (d, &digit) in data.iter().zip(&picks) {
            if digit == 0 {
                continue;
            }
            let per = d.candidates_per_valuation();
            let n = d.shift_norms[((digit - 1) / per) as usize].mul(&d.norm_gen.pow_u128(((digit - 1) % per) as u128));
            for (acc, v) in sums.iter_mut().zip(d.values(&n)?) {
                let v = if d.t.k == *k0 { v } else { ElementDigits::from(&v).to_element(k0)? };
                *acc = acc.add(&v);
            }
        }
        let mut hit = true;
        for v in &sums {
            match v.valuation() {
                Valuation::Finite(_) => {
                    hit = false;
                    break;
                }
                Valuation::AtLeast(n) if n < window.required_digits => {
                    return Err(Error::InsufficientPrecision(format!(
                        "pairing known only to {n} digits, {} required",
                        window.required_digits
                    )));
                }
                _ => {}
            }
        }
        if hit {
            let w = data
                .iter()
                .zip(&picks)
                .map(|(d, &digit)| {
                    if digit == 0 {
                        FieldElement::zero(&d.t.k2)
                    } else {
                        let per = d.candidates_per_valuation();
                        d.witness(window, ((digit - 1) / per) as usize, (digit - 1) % per)
                    }
                })
                .collect();
            return Ok(SearchOutcome::Found { w, candidates });
        }
    }
    Ok(SearchOutcome::NoneFound { candidates, exhaustive: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclomod::divisors;
    use crate::torus::{build_max_torus, TorusParams};

    fn subsets(n: u64) -> Vec<Vec<u64>> {
        let divs = divisors(n);
        (0u32..(1 << divs.len()))
            .map(|mask| divs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &d)| d).collect())
            .collect()
    }

    #[test]
    fn case_b_examples() {
        let t = build_max_torus(&TorusParams::case_b(5, 3, 0), 30).unwrap();
        assert!(!is_admissible(&t.subtorus(&[3]).unwrap()).unwrap().is_admissible());
        assert!(is_admissible(&t.subtorus(&[6]).unwrap()).unwrap().is_admissible());
    }

    #[test]
    fn case_b_rules_agree() {
        for (p, e) in [(3, 1), (3, 2), (5, 3)] {
            for v in [0, 1] {
                let t = build_max_torus(&TorusParams::case_b(p, e, v), 8 * e).unwrap();
                for ds in subsets(2 * e as u64) {
                    let s = t.subtorus(&ds).unwrap();
                    let a = parity_rule(&s);
                    assert_eq!(a, support_rule(&s).unwrap(), "{ds:?}");
                    assert_eq!(a, residue_rule_case_b(&s).unwrap(), "e={e} v={v} {ds:?}");
                }
            }
        }
    }

    #[test]
    fn case_b_witnesses_verify() {
        let t = build_max_torus(&TorusParams::case_b(3, 2, 1), 60).unwrap();
        for ds in subsets(4) {
            let s = t.subtorus(&ds).unwrap();
            let d = is_admissible(&s).unwrap();
            if let Some(w) = d.witness() {
                let chk = verify_witness(&s, &w.w, 10).unwrap();
                assert!(chk.valid, "{ds:?} {chk:?}");
            }
        }
    }

    #[test]
    fn q_mod_four_rule_for_s2() {
        for (q, expect) in [(3, false), (5, true), (7, false), (13, true)] {
            let t = build_max_torus(&TorusParams::case_a(q, 3), 24).unwrap();
            let d = is_admissible(&t.subtorus(&[2]).unwrap()).unwrap();
            assert_eq!(d.is_admissible(), expect, "q = {q}");
            if let Some(w) = d.witness() {
                assert!(verify_witness(&t.subtorus(&[2]).unwrap(), &w.w, 10).unwrap().valid);
            }
        }
    }

    #[test]
    fn s1_and_sf_are_not_admissible() {
        for q in [3, 5, 7, 13] {
            let t = build_max_torus(&TorusParams::case_a(q, 3), 24).unwrap();
            for ds in [[1u64], [3]] {
                let s = t.subtorus(&ds).unwrap();
                let d = is_admissible(&s).unwrap();
                assert!(!d.is_admissible(), "q = {q}, d = {ds:?}");
                assert!(verify_witness(&s, &d.witness().unwrap().w, 10).unwrap().valid);
            }
        }
    }

    #[test]
    fn full_and_trivial_tori() {
        let t = build_max_torus(&TorusParams::case_a(5, 1), 16).unwrap();
        assert!(is_admissible(&t.subtorus(&[]).unwrap()).unwrap().is_admissible());
        let d = is_admissible(&t.subtorus(&[1, 2]).unwrap()).unwrap();
        assert_eq!(d.method, Method::TrivialTorus);
    }

    #[test]
    fn tower_shapes() {
        let un = |e| TowerShape { quadratic: QuadraticKind::Unramified, ramification: e, residue_degree: 1, twist_is_square: None };
        assert!(no_proper_admissible(&un(3)));
        assert!(!no_proper_admissible(&un(2)));
        let ram = |f, sq| TowerShape { quadratic: QuadraticKind::Ramified, ramification: 1, residue_degree: f, twist_is_square: sq };
        assert!(no_proper_admissible(&ram(5, None)));
        assert!(!no_proper_admissible(&ram(6, Some(true))));
        assert!(no_proper_admissible(&ram(6, Some(false))));
        let t = build_max_torus(&TorusParams::case_a(5, 3), 12).unwrap();
        assert!(!no_proper_admissible(&TowerShape::of(&t).unwrap()));
    }

    #[test]
    fn search_finds_case_b_witness_and_not_for_full_torus() {
        let t = build_max_torus(&TorusParams::case_b(3, 1, 0), 24).unwrap();
        let s = t.subtorus(&[1]).unwrap();
        assert!(!is_admissible(&s).unwrap().is_admissible());
        let ps = ProductSubtorus::from_subtorus(&s).unwrap();
        let out = zero_fiber_witness_search(&ps, &SearchWindow::default_for(&t, 5)).unwrap();
        assert!(matches!(out, SearchOutcome::Found { .. }));
        let full = ProductSubtorus::from_subtorus(&t.subtorus(&[]).unwrap()).unwrap();
        let out = zero_fiber_witness_search(&full, &SearchWindow::default_for(&t, 5)).unwrap();
        assert!(matches!(out, SearchOutcome::NoneFound { exhaustive: true, .. }));
    }

    #[test]
    fn witnesses_pass_down_to_larger_divisor_sets() {
        let t = build_max_torus(&TorusParams::case_b(3, 2, 0), 40).unwrap();
        let s = t.subtorus(&[1]).unwrap();
        let d = is_admissible(&s).unwrap();
        let w = d.witness().unwrap();
        for ds in [vec![1, 2], vec![1, 4], vec![1, 2, 4]] {
            let s2 = t.subtorus(&ds).unwrap();
            assert!(witness_applies_to(w, &s2, 5).unwrap());
        }
    }
}
