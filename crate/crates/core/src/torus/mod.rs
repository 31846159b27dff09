//! Maximal irreducible tori T = ker N_{k″/k′} and their subtori.
//!
//! Case A: k′/k unramified of degree 2f, k″ = k′(ϖ″) with ϖ″² = ϖ, u = ϖ″.
//! Case B: k′ = k(ϖ′) with ϖ′^{2e} = ϖ, k″ = k′(ν) unramified with ν² = d,
//! u = ϖ′^{v″(u)} ν.

mod embed;
mod momentum;
mod spectrum;
mod subtorus;

pub use embed::elliptic_embeddable;
pub use momentum::{momentum_pairing, momentum_pairing_product, subtorus_momentum_pairing, MomentumValue};
pub use spectrum::{weil_spectrum, CharacterSpec, Group, ParameterRule, SpectrumEntry};
pub use subtorus::{index_set_complement, index_set_for_divisor, SubtorusSpec};

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{base_digits_for, FieldElement, LocalField, Valuation};

/// Default number of uniformizer digits at the top of the tower.
pub const DEFAULT_PRECISION: u32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    A,
    B,
}

/// User-facing torus parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusParams {
    pub case: Case,
    pub p: u64,
    pub q: u64,
    /// f in case A, e in case B.
    pub halfdeg: u32,
    /// v″(u) ∈ {0, 1}; forced to 1 in case A.
    #[serde(default)]
    pub v_u: u8,
    #[serde(default)]
    pub lambda_psi: i64,
    /// Residue index of a unit γ with ϖ″² = γϖ (case A only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<u64>,
}

impl TorusParams {
    pub fn case_a(p: u64, f: u32) -> Self {
        TorusParams { case: Case::A, p, q: p, halfdeg: f, v_u: 1, lambda_psi: 0, twist: None }
    }

    pub fn case_b(p: u64, e: u32, v_u: u8) -> Self {
        TorusParams { case: Case::B, p, q: p, halfdeg: e, v_u, lambda_psi: 0, twist: None }
    }
}

#[derive(Clone, Debug)]
pub struct TorusDescriptor {
    pub params: TorusParams,
    pub mu: i64,
    pub delta: i64,
    /// Top-of-tower precision in ϖ″ digits.
    pub precision: u32,
    pub k: LocalField,
    pub k1: LocalField,
    pub k2: LocalField,
    /// Element with τ(u) = -u and k″ = k′(u).
    pub u: FieldElement,
    /// ν (case B: ν² = d; case A: ν = ϖ″).
    pub nu: FieldElement,
    /// d = ν² ∈ k′, the Teichmüller lift of the smallest non-residue (case B).
    pub d: Option<FieldElement>,
}

#[derive(Serialize)]
struct TorusSummary<'a> {
    #[serde(flatten)]
    params: &'a TorusParams,
    mu: i64,
    delta: i64,
    precision: u32,
}

impl Serialize for TorusDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TorusSummary { params: &self.params, mu: self.mu, delta: self.delta, precision: self.precision }.serialize(s)
    }
}

fn prime_power_exponent(q: u64, p: u64) -> Option<u32> {
    let mut m = 0;
    let mut x = q;
    while x > 1 {
        if x % p != 0 {
            return None;
        }
        x /= p;
        m += 1;
    }
    (m >= 1).then_some(m)
}

/// Base field Q_q built over Q_p with the given base digit count.
fn base_field(p: u64, q: u64, digits: u32) -> Result<LocalField> {
    let m = prime_power_exponent(q, p).ok_or_else(|| Error::InvalidParameter(format!("q = {q} is not a power of p = {p}")))?;
    let qp = LocalField::qp(p, digits)?;
    if m == 1 {
        Ok(qp)
    } else {
        qp.unramified_ext(m as usize)
    }
}

/// Construct T from its parameters with `precision` digits at the top of the tower.
pub fn build_max_torus(params: &TorusParams, precision: u32) -> Result<TorusDescriptor> {
    let p = params.p;
    if p == 2 || !crate::padic::is_prime(p) {
        return Err(Error::InvalidParameter(format!("p = {p} must be an odd prime")));
    }
    if params.halfdeg == 0 {
        return Err(Error::InvalidParameter("half-degree must be positive".into()));
    }
    if params.lambda_psi.rem_euclid(2) != 0 {
        // volumes are exact integer powers of q only for even λψ
        return Err(Error::InvalidParameter("λψ must be even".into()));
    }
    match params.case {
        Case::A => {
            if params.v_u != 1 {
                return Err(Error::InvalidParameter("case A forces v″(u) = 1".into()));
            }
            let f = params.halfdeg as usize;
            let digits = base_digits_for(2, precision);
            let k = base_field(p, params.q, digits)?;
            let k1 = k.unramified_ext(2 * f)?;
            let twist = match params.twist {
                None => None,
                Some(idx) => {
                    let kr = k.residue_field().element(idx as u128 % k.q());
                    if k.residue_field().is_zero(&kr) {
                        return Err(Error::InvalidParameter("twist must be a unit".into()));
                    }
                    Some(FieldElement::teichmuller(&k, &kr).embed_into(&k1)?)
                }
            };
            let k2 = k1.eisenstein_ext(2, twist.as_ref())?;
            let u = FieldElement::generator(&k2);
            Ok(TorusDescriptor {
                params: params.clone(),
                mu: params.lambda_psi - 1,
                delta: 0,
                precision,
                k,
                k1,
                k2,
                nu: u.clone(),
                u,
                d: None,
            })
        }
        Case::B => {
            if params.v_u > 1 {
                return Err(Error::InvalidParameter("v″(u) must be 0 or 1".into()));
            }
            if params.twist.is_some() {
                return Err(Error::InvalidParameter("twist applies to case A only".into()));
            }
            let e2 = 2 * params.halfdeg as u64;
            if e2 % p == 0 {
                return Err(Error::InvalidParameter(format!("wild ramification: p = {p} divides 2e = {e2}")));
            }
            let digits = base_digits_for(e2 as u32, precision);
            let k = base_field(p, params.q, digits)?;
            let k1 = k.eisenstein_ext(e2 as usize, None)?;
            let k2 = k1.unramified_ext(2)?;
            let nonres = k1.residue_field().smallest_nonsquare();
            let d = FieldElement::teichmuller(&k1, &nonres);
            let nu = d.embed_into(&k2)?.sqrt()?.expect("d becomes a square in k″");
            let u = FieldElement::uniformizer(&k2).pow(params.v_u as i64).mul(&nu);
            let two_e = e2 as i64;
            Ok(TorusDescriptor {
                params: params.clone(),
                mu: two_e * params.lambda_psi - (two_e - 1) - params.v_u as i64,
                delta: two_e - 1,
                precision,
                k,
                k1,
                k2,
                u,
                nu,
                d: Some(d),
            })
        }
    }
}

/// Sizes of the congruence filtration of T.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filtration {
    /// |T/T_i| for i = 0..=j.
    pub quotient_orders: Vec<BigUint>,
    /// Levels i ≥ 1 with T_i = T_{i+1}.
    pub trivial_steps: Vec<u32>,
}

impl TorusDescriptor {
    pub fn case(&self) -> Case {
        self.params.case
    }

    /// Order of the cyclic group Γ′ acting on characters (2f or 2e).
    pub fn gamma_order(&self) -> u64 {
        2 * self.params.halfdeg as u64
    }

    pub fn q(&self) -> u64 {
        self.params.q
    }

    /// Residue cardinality of k′.
    pub fn q_prime(&self) -> BigUint {
        BigUint::from(self.k1.q())
    }

    /// Case A with p ∤ f: 𝒪′ splits along the eigenspaces of σ.
    pub fn lattice_splits(&self) -> bool {
        self.case() == Case::B || self.params.halfdeg as u64 % self.params.p != 0
    }

    pub fn v_u(&self) -> u8 {
        self.params.v_u
    }

    pub fn lambda_psi(&self) -> i64 {
        self.params.lambda_psi
    }

    /// Nontrivial automorphism of k″/k′.
    pub fn tau(&self, x: &FieldElement) -> Result<FieldElement> {
        x.conjugate()
    }

    pub fn contains(&self, x: &FieldElement) -> Result<bool> {
        Ok(x.norm(&self.k1)?.is_one_approx())
    }

    /// Element of the Lie algebra 𝔱 = k′u with coordinate c ∈ k′.
    pub fn lie_element(&self, c: &FieldElement) -> Result<FieldElement> {
        Ok(c.embed_into(&self.k2)?.mul(&self.u))
    }

    /// T_j membership index: largest j with x ∈ T_j (x ∈ T).
    pub fn level(&self, x: &FieldElement) -> Option<i64> {
        x.sub(&FieldElement::one(&self.k2)).valuation().finite()
    }

    pub fn filtration(&self, j: u32) -> Filtration {
        let q1 = self.q_prime();
        let mut orders = vec![BigUint::from(1u32)];
        for i in 1..=j {
            let prev = orders.last().unwrap().clone();
            // |T_{i-1}/T_i|; in case A, T_{2m} = T_{2m+1}
            let next = match (self.case(), i) {
                (Case::A, 1) => prev * 2u32,
                (Case::A, i) if i % 2 == 0 => prev * &q1,
                (Case::A, _) => prev,
                (Case::B, 1) => prev * (&q1 + 1u32),
                (Case::B, _) => prev * &q1,
            };
            orders.push(next);
        }
        let trivial_steps = if self.case() == Case::A { (1..j).filter(|i| i % 2 == 0).collect() } else { Vec::new() };
        Filtration { quotient_orders: orders, trivial_steps }
    }

    /// ρ(η) = sqrt(1 + ϖ′η²) + ηϖ″ ∈ T_1 (case A, η ∈ 𝒪′).
    pub fn rho(&self, eta: &FieldElement) -> Result<FieldElement> {
        if self.case() != Case::A {
            return Err(Error::Unsupported("ρ is defined in case A".into()));
        }
        if eta.field() != &self.k1 {
            return Err(Error::InvalidParameter("η must lie in k′".into()));
        }
        if matches!(eta.valuation(), Valuation::Finite(v) if v < 0) {
            return Err(Error::OutsideDomain("η must be integral".into()));
        }
        let w1 = FieldElement::uniformizer(&self.k1);
        let xi = FieldElement::one(&self.k1).add(&w1.mul(&eta.mul(eta))).hensel_sqrt()?;
        Ok(xi.embed_into(&self.k2)?.add(&eta.embed_into(&self.k2)?.mul(&self.u)))
    }

    /// Cayley parametrization z/τ(z) of T.
    pub fn cayley(&self, z: &FieldElement) -> Result<FieldElement> {
        z.div(&self.tau(z)?)
    }

    /// Random element of T_j.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, j: i64) -> Result<FieldElement> {
        let prec = self.k1.capacity();
        match self.case() {
            Case::A => {
                let t = if j <= 0 {
                    let eta = FieldElement::random(&self.k1, rng, 0, prec);
                    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                    self.rho(&eta)?.mul(&FieldElement::from_int(&self.k2, sign))
                } else {
                    // T_{2m} = T_{2m+1}, so level j needs v(η) ≥ ⌈(j-1)/2⌉
                    let eta = FieldElement::random(&self.k1, rng, j / 2, prec);
                    self.rho(&eta)?
                };
                Ok(t)
            }
            Case::B => {
                // z = 1 + bν with v(b) ≥ j gives t ∈ T_j; j = 0 uses z = a + ν
                let z = if j <= 0 {
                    FieldElement::random(&self.k1, rng, 0, prec).embed_into(&self.k2)?.add(&self.nu)
                } else {
                    let b = FieldElement::random(&self.k1, rng, j, prec).embed_into(&self.k2)?;
                    FieldElement::one(&self.k2).add(&b.mul(&self.nu))
                };
                self.cayley(&z)
            }
        }
    }

    /// Smallest level l with l > v″(p)/(p-1), where exp: ϖ″^l𝒪″ → 1 + ϖ″^l𝒪″ is defined.
    pub fn exp_threshold(&self) -> i64 {
        let vp = self.k2.ram() as i64;
        let p = self.params.p as i64;
        vp / (p - 1) + 1
    }

    /// exp X for X ∈ 𝔱 of level l, refusing levels below the convergence threshold.
    pub fn exponential(&self, x: &FieldElement, level: i64) -> Result<FieldElement> {
        if level < self.exp_threshold() {
            return Err(Error::OutsideDomain(format!(
                "exponential coordinates need level ≥ {} (got {level})",
                self.exp_threshold()
            )));
        }
        match x.valuation() {
            Valuation::Finite(v) if v < level => Err(Error::OutsideDomain("X below the requested level".into())),
            _ => x.exp(),
        }
    }
}

impl FieldElement {
    pub(crate) fn is_one_approx(&self) -> bool {
        self.sub(&FieldElement::one(self.field())).is_zero()
    }
}
