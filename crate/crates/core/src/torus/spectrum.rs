use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{Case, TorusDescriptor};
use crate::error::{Error, Result};
use crate::padic::{FieldElement, ResidueElement, Valuation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    T,
    S,
}

/// Which parameters b describe the characters of a spectrum entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParameterRule {
    /// Conductor 0.
    Trivial,
    /// Every character of the given conductor.
    Any,
    /// χ|_{T_j} = χ_b with b a square unit of k′, determined modulo ϖ′^{modulus_digits}.
    SquareUnits { modulus_digits: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub conductor: u32,
    pub count: BigUint,
    pub rule: ParameterRule,
}

/// A character of T (or of S), described by its conductor and, in case A, by the
/// leading digits of the parameter b.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterSpec {
    pub group: Group,
    pub case: Case,
    pub conductor: u32,
    /// ϖ′-adic digits of b (case A, conductor 2j: j - ⌊j/2⌋ digits).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<Vec<ResidueElement>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub square: Option<bool>,
}

/// Number of ϖ′-digits of b that matter at conductor 2j.
pub(crate) fn parameter_digits(j: u32) -> u32 {
    j - j / 2
}

impl CharacterSpec {
    pub fn trivial(t: &TorusDescriptor, group: Group) -> Self {
        CharacterSpec { group, case: t.case(), conductor: 0, parameter: None, square: None }
    }

    /// Case B character of the given conductor.
    pub fn case_b(t: &TorusDescriptor, group: Group, conductor: u32) -> Result<Self> {
        if t.case() != Case::B {
            return Err(Error::InvalidParameter("torus is not of case B".into()));
        }
        Ok(CharacterSpec { group, case: Case::B, conductor, parameter: None, square: None })
    }

    /// Case A character of conductor 2j with χ|_{T_j} = χ_b.
    pub fn case_a(t: &TorusDescriptor, group: Group, j: u32, b: &FieldElement) -> Result<Self> {
        if t.case() != Case::A {
            return Err(Error::InvalidParameter("torus is not of case A".into()));
        }
        if j == 0 {
            return Ok(Self::trivial(t, group));
        }
        if b.field() != &t.k1 || b.valuation() != Valuation::Finite(0) {
            return Err(Error::InvalidParameter("b must be a unit of k′".into()));
        }
        let n = parameter_digits(j) as usize;
        if b.relative_precision() < n as i64 {
            return Err(Error::InsufficientPrecision(format!("b needs {n} digits")));
        }
        let mut digits = b.digits();
        digits.truncate(n);
        Ok(CharacterSpec { group, case: Case::A, conductor: 2 * j, parameter: Some(digits), square: Some(b.is_square()?) })
    }

    /// Leading residue of b (case A).
    pub fn alpha(&self) -> Option<&ResidueElement> {
        self.parameter.as_ref().and_then(|d| d.first())
    }

    pub fn is_trivial(&self) -> bool {
        self.conductor == 0
    }

    /// Membership in the spectrum of the Weil representation of T.
    pub fn in_spectrum(&self, t: &TorusDescriptor) -> bool {
        if self.case != t.case() {
            return false;
        }
        match t.case() {
            Case::A => self.conductor == 0 || (self.conductor % 2 == 0 && self.square == Some(true)),
            Case::B => (self.conductor as i64 - t.mu).rem_euclid(2) == 0,
        }
    }
}

/// Number of characters of T of exact conductor c.
pub(crate) fn conductor_count(t: &TorusDescriptor, c: u32) -> BigUint {
    let f = t.filtration(c);
    let o = &f.quotient_orders;
    if c == 0 {
        BigUint::one()
    } else {
        &o[c as usize] - &o[c as usize - 1]
    }
}

/// Characters in the Weil representation of T, grouped by conductor up to `max_conductor`.
pub fn weil_spectrum(t: &TorusDescriptor, max_conductor: u32) -> Vec<SpectrumEntry> {
    let q1 = t.q_prime();
    let mut out = Vec::new();
    for c in 0..=max_conductor {
        match t.case() {
            Case::A => {
                if c == 0 {
                    out.push(SpectrumEntry { conductor: 0, count: BigUint::one(), rule: ParameterRule::Trivial });
                } else if c % 2 == 0 {
                    let j = c / 2;
                    // half of the q′^j - q′^{j-1} unit classes of b are squares, each with two extensions
                    let count = q1.pow(j - 1) * (&q1 - 1u32);
                    out.push(SpectrumEntry {
                        conductor: c,
                        count,
                        rule: ParameterRule::SquareUnits { modulus_digits: parameter_digits(j) },
                    });
                }
            }
            Case::B => {
                if (c as i64 - t.mu).rem_euclid(2) == 0 {
                    let rule = if c == 0 { ParameterRule::Trivial } else { ParameterRule::Any };
                    out.push(SpectrumEntry { conductor: c, count: conductor_count(t, c), rule });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{build_max_torus, TorusParams};

    fn counts(t: &TorusDescriptor, c: u32) -> Vec<(u32, u64)> {
        weil_spectrum(t, c).into_iter().map(|e| (e.conductor, (&e.count).try_into().unwrap())).collect()
    }

    #[test]
    fn case_b_parity() {
        let t = build_max_torus(&TorusParams::case_b(3, 1, 0), 12).unwrap();
        assert_eq!(counts(&t, 5), vec![(1, 3), (3, 24), (5, 216)]);
        let t = build_max_torus(&TorusParams::case_b(3, 1, 1), 12).unwrap();
        assert_eq!(counts(&t, 4), vec![(0, 1), (2, 8), (4, 72)]);
    }

    #[test]
    fn case_a_counts() {
        let t = build_max_torus(&TorusParams::case_a(3, 1), 12).unwrap();
        assert_eq!(counts(&t, 4), vec![(0, 1), (2, 8), (4, 72)]);
        let e = &weil_spectrum(&t, 6)[3];
        assert_eq!(e.rule, ParameterRule::SquareUnits { modulus_digits: 2 });
    }

    #[test]
    fn character_specs() {
        let t = build_max_torus(&TorusParams::case_a(3, 1), 12).unwrap();
        let one = FieldElement::one(&t.k1);
        let c = CharacterSpec::case_a(&t, Group::T, 3, &one).unwrap();
        assert_eq!(c.conductor, 6);
        assert_eq!(c.parameter.as_ref().unwrap().len(), 2);
        assert!(c.in_spectrum(&t));
        let nonsq = FieldElement::teichmuller(&t.k1, &t.k1.residue_field().smallest_nonsquare());
        assert!(!CharacterSpec::case_a(&t, Group::T, 1, &nonsq).unwrap().in_spectrum(&t));
        let tb = build_max_torus(&TorusParams::case_b(3, 1, 0), 12).unwrap();
        assert!(!CharacterSpec::trivial(&tb, Group::T).in_spectrum(&tb));
        assert!(CharacterSpec::case_b(&tb, Group::T, 1).unwrap().in_spectrum(&tb));
    }
}
