//! Multiplicities of characters of S in the restricted Weil representation, and the
//! volumes of the symplectic reductions S\φ⁻¹(g) that they equal.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::admissible::{complement_residues, is_admissible};
use crate::cyclomod::{divisors, saturated_module};
use crate::error::{Error, Result};
use crate::padic::{FieldElement, ResidueElement};
use crate::torus::{Case, CharacterSpec, SubtorusSpec, TorusDescriptor};

/// Cap on residue enumerations (span of V̄ and the squares of F_{q′}).
pub const THETA_CAP: u128 = 10_000_000;

/// coeff · q^{half_exp/2}, normalized so that q ∤ coeff unless coeff = 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QPower {
    pub q: u64,
    pub coeff: BigUint,
    pub half_exp: i64,
}

impl QPower {
    pub fn new(q: u64, coeff: impl Into<BigUint>, half_exp: i64) -> Self {
        let mut coeff = coeff.into();
        let mut half_exp = half_exp;
        if coeff.is_zero() {
            half_exp = 0;
        } else {
            let qb = BigUint::from(q);
            while (&coeff % &qb).is_zero() {
                coeff /= &qb;
                half_exp += 2;
            }
        }
        QPower { q, coeff, half_exp }
    }

    pub fn integer(q: u64, n: impl Into<BigUint>) -> Self {
        Self::new(q, n, 0)
    }

    /// coeff · q^e for an integer exponent e.
    pub fn power(q: u64, coeff: impl Into<BigUint>, e: i64) -> Self {
        Self::new(q, coeff, 2 * e)
    }

    pub fn zero(q: u64) -> Self {
        Self::new(q, 0u32, 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.q, other.q);
        Self::new(self.q, &self.coeff * &other.coeff, self.half_exp + other.half_exp)
    }

    /// Sum of two powers with equal exponents (after normalization).
    pub fn add(&self, other: &Self) -> Option<Self> {
        assert_eq!(self.q, other.q);
        if self.coeff.is_zero() {
            return Some(other.clone());
        }
        if other.coeff.is_zero() {
            return Some(self.clone());
        }
        let lo = self.half_exp.min(other.half_exp);
        let (a, b) = (self.half_exp - lo, other.half_exp - lo);
        if a % 2 != 0 || b % 2 != 0 {
            return None;
        }
        let qb = BigUint::from(self.q);
        let c = &self.coeff * qb.pow((a / 2) as u32) + &other.coeff * qb.pow((b / 2) as u32);
        Some(Self::new(self.q, c, lo))
    }

    /// Exponent of q as a half-integer (numerator over 2).
    pub fn qexp(&self) -> (i64, i64) {
        if self.half_exp % 2 == 0 {
            (self.half_exp / 2, 1)
        } else {
            (self.half_exp, 2)
        }
    }

    /// The value as a nonnegative integer, if it is one.
    pub fn to_integer(&self) -> Option<BigUint> {
        if self.half_exp < 0 || self.half_exp % 2 != 0 {
            return self.coeff.is_zero().then(BigUint::zero);
        }
        Some(&self.coeff * BigUint::from(self.q).pow((self.half_exp / 2) as u32))
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.to_integer()?.to_u64()
    }
}

impl fmt::Display for QPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.qexp() {
            (0, 1) => write!(f, "{}", self.coeff),
            (e, 1) => write!(f, "{}·q^{}", self.coeff, e),
            (e, _) => write!(f, "{}·q^({}/2)", self.coeff, e),
        }
    }
}

impl Serialize for QPower {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("QPower", 2)?;
        #[derive(Serialize)]
        struct Exponent {
            num: i64,
            den: i64,
        }
        let (num, den) = self.qexp();
        st.serialize_field("coeff", &self.coeff.to_string())?;
        st.serialize_field("qexp", &Exponent { num, den })?;
        st.end()
    }
}

/// Volume of 𝒪 for the self-dual measure attached to ψ.
pub fn integer_ring_volume(t: &TorusDescriptor) -> QPower {
    QPower::new(t.q(), 1u32, t.lambda_psi())
}

/// Θ(α): the s in the residue projection of 𝒪′ ∩ (𝔰/ϖ″)^⊥ with α + s a nonzero square.
#[derive(Clone, Debug, Serialize)]
pub struct ThetaSet {
    pub alpha: ResidueElement,
    pub elements: Vec<ResidueElement>,
    pub cardinality: usize,
}

fn check_case_a(s: &SubtorusSpec) -> Result<()> {
    if s.case() != Case::A {
        return Err(Error::InvalidParameter("Θ and the case-A formulas need a case-A torus".into()));
    }
    if !s.torus.lattice_splits() {
        return Err(Error::Unsupported(format!("p = {} divides f = {}", s.torus.params.p, s.torus.params.halfdeg)));
    }
    // the formulas take ϖ″² = ϖ′
    if s.torus.params.twist.is_some() {
        return Err(Error::Unsupported("case-A multiplicities assume an untwisted tower".into()));
    }
    Ok(())
}

/// F_q-span of the residues of V ∩ 𝒪′, V = (𝔰/ϖ″)^⊥.
fn complement_span(s: &SubtorusSpec) -> Result<Vec<ResidueElement>> {
    let rf1 = s.torus.k1.residue_field();
    let (basis, scalars) = complement_residues(s)?;
    let size = (scalars.len() as u128).checked_pow(basis.len() as u32).unwrap_or(u128::MAX);
    if size > THETA_CAP {
        return Err(Error::BudgetExceeded(format!("residue subspace of size {size}")));
    }
    let mut span = vec![rf1.zero()];
    for b in &basis {
        span = span.iter().flat_map(|x| scalars.iter().map(move |c| rf1.add(x, &rf1.mul(c, b)))).collect();
    }
    Ok(span)
}

pub fn theta_set(alpha: &[u64], s: &SubtorusSpec) -> Result<ThetaSet> {
    check_case_a(s)?;
    let rf1 = s.torus.k1.residue_field();
    if alpha.len() != rf1.dim() || !rf1.is_nonzero_square(alpha) {
        return Err(Error::InvalidParameter("α must be a nonzero square of F_{q′}".into()));
    }
    let elements: Vec<ResidueElement> = complement_span(s)?.into_iter().filter(|x| rf1.is_nonzero_square(&rf1.add(alpha, x))).collect();
    Ok(ThetaSet { alpha: alpha.to_vec(), cardinality: elements.len(), elements })
}

/// |{β nonzero square : β − α ∈ V̄}|, counted over the squares rather than over V̄.
fn theta_count_by_squares(alpha: &[u64], s: &SubtorusSpec) -> Result<usize> {
    let rf1 = s.torus.k1.residue_field();
    if rf1.size() > THETA_CAP {
        return Err(Error::BudgetExceeded(format!("|F_q′| = {}", rf1.size())));
    }
    let span: HashSet<ResidueElement> = complement_span(s)?.into_iter().collect();
    Ok(rf1.elements().filter(|b| rf1.is_nonzero_square(b) && span.contains(&rf1.sub(b, alpha))).count())
}

fn require_admissible(s: &SubtorusSpec) -> Result<()> {
    if s.is_trivial() {
        return Err(Error::InvalidParameter("the trivial subtorus carries no multiplicities".into()));
    }
    if !is_admissible(s)?.is_admissible() {
        return Err(Error::NotAdmissible);
    }
    Ok(())
}

fn check_character(s: &SubtorusSpec, chi: &CharacterSpec) -> Result<()> {
    if chi.case != s.case() {
        return Err(Error::InvalidParameter("character and torus are of different cases".into()));
    }
    Ok(())
}

/// m(χ) = ε_S |Θ(𝗉(N(a)))| q^{codim(𝔰)(j−1)} for χ of conductor 2j; 1 for χ trivial.
pub fn multiplicity_case_a(s: &SubtorusSpec, chi: &CharacterSpec) -> Result<QPower> {
    check_case_a(s)?;
    check_character(s, chi)?;
    require_admissible(s)?;
    let q = s.torus.q();
    if chi.is_trivial() {
        return Ok(QPower::integer(q, 1u32));
    }
    if chi.conductor % 2 == 1 {
        return Err(Error::NotInSpectrum(format!("odd conductor {}", chi.conductor)));
    }
    let alpha = chi.alpha().ok_or_else(|| Error::InvalidParameter("case-A character needs its parameter b".into()))?;
    if !s.torus.k1.residue_field().is_nonzero_square(alpha) {
        return Err(Error::NotInSpectrum("𝗉(b) is not a nonzero square".into()));
    }
    let j = (chi.conductor / 2) as i64;
    let theta = theta_set(alpha, s)?;
    Ok(QPower::power(q, s.eps as u64 * theta.cardinality as u64, s.codim as i64 * (j - 1)))
}

/// |{v+1, v+3, …, c−2} ∩ (2eℕ + I′)|.
fn parity_exponent(s: &SubtorusSpec, c: u32) -> i64 {
    let two_e = s.torus.gamma_order();
    let ip = s.index_set_complement.as_deref().unwrap_or(&[]);
    let start = 1 + s.torus.v_u() as i64;
    (start..=c as i64 - 2).step_by(2).filter(|&i| ip.contains(&((i as u64) % two_e))).count() as i64
}

/// index · q^{#{v+1, v+3, …, c−2} ∩ (2eℕ + I′)} for nontrivial χ; for χ trivial, index − 1
/// (v″(u) = 0, S proper), 0 (v″(u) = 0, S = T) or 1 (v″(u) = 1).
pub fn multiplicity_case_b(s: &SubtorusSpec, chi: &CharacterSpec) -> Result<QPower> {
    if s.case() != Case::B {
        return Err(Error::InvalidParameter("torus is not of case B".into()));
    }
    check_character(s, chi)?;
    require_admissible(s)?;
    let t = &s.torus;
    let q = t.q();
    let index = s.mu_index.ok_or_else(|| Error::InvalidParameter("missing μ_{q+1} index".into()))?;
    if chi.is_trivial() {
        return Ok(match (t.v_u(), s.is_full()) {
            (1, _) => QPower::integer(q, 1u32),
            // S = T: the trivial character has conductor 0, of the wrong parity
            (_, true) => QPower::zero(q),
            _ => QPower::integer(q, index - 1),
        });
    }
    if (chi.conductor as i64 - t.mu).rem_euclid(2) != 0 {
        return Err(Error::NotInSpectrum(format!("conductor {} has the wrong parity", chi.conductor)));
    }
    Ok(QPower::power(q, index, parity_exponent(s, chi.conductor)))
}

pub fn multiplicity(s: &SubtorusSpec, chi: &CharacterSpec) -> Result<QPower> {
    match s.case() {
        Case::A => multiplicity_case_a(s, chi),
        Case::B => multiplicity_case_b(s, chi),
    }
}

/// Complementary subtorus S′, with Lie algebra 𝔰′ = 𝔰^⊥.
fn complementary_divisors(s: &SubtorusSpec) -> Vec<u64> {
    divisors(s.torus.gamma_order()).into_iter().filter(|d| !s.divisors.contains(d)).collect()
}

/// |S′/S′_1| computed directly: 2 when −1 ∈ S′, i.e. every character vanishing on S′ has
/// even degree. This need not equal ε_S (both S_{2} and S_{1} contain −1 when 2f = 2), so the
/// volume below uses ε_S, which is what the restriction counts confirm.
pub fn complement_component_count(s: &SubtorusSpec) -> Result<u64> {
    let m = saturated_module(s.torus.gamma_order(), &complementary_divisors(s))?;
    Ok(if m.basis().iter().all(|b| b.coefficient_sum().is_even()) { 2 } else { 1 })
}

/// vol(S\φ⁻¹(g)) for g = φ(w), from the density of d_β(s, η) against ds dx and the volume of
/// the domain S′ × 𝒪′ ∩ (𝔰′/ϖ″) (case A) or S′ × 𝒪′ ∩ ϖ′^{j−μ−2v″(u)}(𝔰′/u) (case B).
///
/// `conductor` is the conductor of χ; `alpha` the residue 𝗉(N(a)) in case A.
pub fn reduction_volume(s: &SubtorusSpec, conductor: u32, alpha: Option<&[u64]>) -> Result<QPower> {
    require_admissible(s)?;
    let t = &s.torus;
    let q = t.q();
    if conductor == 0 {
        return Err(Error::InvalidParameter("the volume identity needs a nontrivial character".into()));
    }
    match s.case() {
        Case::A => {
            check_case_a(s)?;
            if conductor % 2 == 1 {
                return Err(Error::InvalidParameter(format!("case A needs an even conductor, got {conductor}")));
            }
            let j = (conductor / 2) as i64;
            let alpha = alpha.ok_or_else(|| Error::InvalidParameter("case A needs α".into()))?;
            let rf1 = t.k1.residue_field();
            if !rf1.is_nonzero_square(alpha) {
                return Err(Error::NotInSpectrum("α is not a nonzero square".into()));
            }
            let (basis, _) = complement_residues(s)?;
            let dim_s_prime = basis.len() as i64;
            let density = QPower::power(q, 1u32, dim_s_prime * (j - 1));
            let domain = s.eps as u64 * theta_count_by_squares(alpha, s)? as u64;
            Ok(density.mul(&QPower::integer(q, domain)))
        }
        Case::B => {
            if (conductor as i64 - t.mu).rem_euclid(2) != 0 {
                return Err(Error::InvalidParameter(format!("conductor {conductor} has the wrong parity")));
            }
            let two_e = t.gamma_order() as i64;
            let ip = s.index_set_complement.as_deref().unwrap_or(&[]);
            let j = conductor as i64;
            let (per, l) = (j - 1).div_mod_floor(&two_e);
            let tail = ip.iter().filter(|&&i| i >= 1 && (i as i64) < l).count() as i64;
            let index = s.mu_index.ok_or_else(|| Error::InvalidParameter("missing μ_{q+1} index".into()))?;
            Ok(QPower::power(q, index, per * ip.len() as i64 + tail))
        }
    }
}

/// |{1, …, j−2} ∩ (2eℕ + I′)| against [(j−1)/2e]|I′| + |{i ∈ I′ : 1 ≤ i ≤ l−1}|.
pub fn exponent_identity(two_e: u64, i_prime: &[u64], j: u64) -> (u64, u64) {
    let lhs = (1..j.saturating_sub(1)).filter(|i| i_prime.contains(&(i % two_e))).count() as u64;
    let (per, l) = (j - 1).div_mod_floor(&two_e);
    let rhs = per * i_prime.len() as u64 + i_prime.iter().filter(|&&i| i >= 1 && i < l).count() as u64;
    (lhs, rhs)
}

/// A point w with g = φ(w): w = ϖ″^{μ−j}a (case A, N(a) = b) or ϖ′^{(μ−j)/2}a (case B, a = 1).
pub fn moment_representative(s: &SubtorusSpec, chi: &CharacterSpec) -> Result<FieldElement> {
    let t = &s.torus;
    match s.case() {
        Case::A => {
            let digits = chi.parameter.as_ref().ok_or_else(|| Error::InvalidParameter("missing parameter".into()))?;
            let j = (chi.conductor / 2) as i64;
            let pi1 = FieldElement::uniformizer(&t.k1);
            let mut b = FieldElement::zero(&t.k1);
            for (i, d) in digits.iter().enumerate() {
                b = b.add(&FieldElement::teichmuller(&t.k1, d).mul(&pi1.pow(i as i64)));
            }
            let a = b.sqrt()?.ok_or_else(|| Error::NotInSpectrum("b is not a norm".into()))?;
            Ok(FieldElement::uniformizer(&t.k2).pow(t.mu - j).mul(&a.embed_into(&t.k2)?))
        }
        Case::B => {
            let e = t.mu - chi.conductor as i64;
            if e % 2 != 0 {
                return Err(Error::NotInSpectrum("μ − c is odd".into()));
            }
            FieldElement::uniformizer(&t.k1).pow(e / 2).embed_into(&t.k2)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterSummary {
    pub conductor: u32,
    pub parameter: Option<Vec<ResidueElement>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Agreement {
    pub m_vol: bool,
    pub m_oracle: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiplicityReport {
    pub character: CharacterSummary,
    pub m: QPower,
    pub vol: QPower,
    pub oracle: Option<u64>,
    pub agree: Agreement,
}

/// m(χ) and vol(S\φ⁻¹(g)) by their separate code paths, with an optional oracle count.
pub fn verify_identity(s: &SubtorusSpec, chi: &CharacterSpec, oracle: Option<u64>) -> Result<MultiplicityReport> {
    if chi.is_trivial() {
        return Err(Error::InvalidParameter("the identity is stated for nontrivial characters".into()));
    }
    let m = multiplicity(s, chi)?;
    let vol = reduction_volume(s, chi.conductor, chi.alpha().map(|a| a.as_slice()))?;
    let agree = Agreement {
        m_vol: m == vol,
        m_oracle: oracle.map(|o| m.to_integer().is_some_and(|v| v == BigUint::from(o))),
    };
    Ok(MultiplicityReport {
        character: CharacterSummary { conductor: chi.conductor, parameter: chi.parameter.clone() },
        m,
        vol,
        oracle,
        agree,
    })
}
