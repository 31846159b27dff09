use padic_tori::admissible::{
    is_admissible, verify_witness, zero_fiber_witness_search, Decision, ProductSubtorus, SearchOutcome, SearchWindow, WitnessCheck,
};
use padic_tori::cyclomod::{classify_minimal_verified, ClassificationCheck};
use padic_tori::multiplicity::{multiplicity, reduction_volume, verify_identity, CharacterSummary, MultiplicityReport, QPower};
use padic_tori::oracle::{quotient_group, restriction_table, weil_characters_mod};
use padic_tori::padic::{FieldElement, LocalField, ResidueElement};
use padic_tori::torus::{elliptic_embeddable, Case, CharacterSpec, Group, SubtorusSpec, TorusDescriptor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExtensionKind, JobConfig};
use crate::error::CliError;

/// Largest residue field of k′ whose square classes are listed when no parameters are given.
const DEFAULT_PARAMETER_CAP: u128 = 2_000;
const DEFAULT_MAX_CONDUCTOR: u32 = 4;
const DEFAULT_SUBMODULE_BUDGET: u64 = 5_000_000;

type Out<T> = Result<T, CliError>;

// ---- classify ----

#[derive(Serialize)]
pub struct SubtorusSummary {
    pub divisors: Vec<u64>,
    pub dim: usize,
    pub codim: usize,
    pub eps: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_set: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_set_complement: Option<Vec<u64>>,
    pub lie_divisors: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_index: Option<u64>,
}

impl From<&SubtorusSpec> for SubtorusSummary {
    fn from(s: &SubtorusSpec) -> Self {
        SubtorusSummary {
            divisors: s.divisors.clone(),
            dim: s.dim(),
            codim: s.codim,
            eps: s.eps,
            index_set: s.index_set.clone(),
            index_set_complement: s.index_set_complement.clone(),
            lie_divisors: s.lie_divisors.clone(),
            mu_index: s.mu_index,
        }
    }
}

#[derive(Serialize)]
pub struct ClassifyResult {
    pub gamma_order: u64,
    pub mu: i64,
    pub count: usize,
    pub subtori: Vec<SubtorusSummary>,
}

pub fn classify(cfg: &JobConfig) -> Out<ClassifyResult> {
    let t = cfg.torus()?;
    let subtori = cfg.divisor_sets(&t).iter().map(|ds| t.subtorus(ds).map(|s| SubtorusSummary::from(&s))).collect::<Result<Vec<_>, _>>()?;
    Ok(ClassifyResult { gamma_order: t.gamma_order(), mu: t.mu, count: subtori.len(), subtori })
}

// ---- admissible ----

#[derive(Serialize)]
pub struct SearchSummary {
    pub found: bool,
    pub candidates: u64,
    pub exhaustive: bool,
}

#[derive(Serialize)]
pub struct DecisionEntry {
    #[serde(flatten)]
    pub decision: Decision,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_check: Option<WitnessCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSummary>,
}

#[derive(Serialize)]
pub struct AdmissibleResult {
    pub count: usize,
    pub admissible: usize,
    pub decisions: Vec<DecisionEntry>,
}

pub fn admissible(cfg: &JobConfig) -> Out<AdmissibleResult> {
    let t = cfg.torus()?;
    let required = cfg.search.as_ref().map_or(10, |s| s.required_digits);
    let mut decisions = Vec::new();
    for ds in cfg.divisor_sets(&t) {
        let s = t.subtorus(&ds)?;
        let decision = is_admissible(&s)?;
        let witness_check = decision.witness().map(|w| verify_witness(&s, &w.w, required)).transpose()?;
        let search = match (&cfg.search, decision.is_admissible() && s.is_proper_nontrivial()) {
            (Some(sc), true) => {
                let window = SearchWindow { budget: sc.budget, ..SearchWindow::default_for(&t, sc.required_digits) };
                Some(match zero_fiber_witness_search(&ProductSubtorus::from_subtorus(&s)?, &window)? {
                    SearchOutcome::Found { candidates, .. } => SearchSummary { found: true, candidates, exhaustive: false },
                    SearchOutcome::NoneFound { candidates, exhaustive } => SearchSummary { found: false, candidates, exhaustive },
                })
            }
            _ => None,
        };
        decisions.push(DecisionEntry { decision, witness_check, search });
    }
    let admissible = decisions.iter().filter(|d| d.decision.is_admissible()).count();
    Ok(AdmissibleResult { count: decisions.len(), admissible, decisions })
}

// ---- characters ----

/// Characters of S requested by the job, and the requested conductors left out of the spectrum.
fn requested_characters(cfg: &JobConfig, t: &TorusDescriptor) -> Out<(Vec<CharacterSpec>, Vec<u32>)> {
    let mut out = Vec::new();
    let mut excluded = Vec::new();
    for c in cfg.conductors(DEFAULT_MAX_CONDUCTOR) {
        if c == 0 {
            out.push(CharacterSpec::trivial(t, Group::S));
            continue;
        }
        match t.case() {
            Case::B => {
                if (c as i64 - t.mu).rem_euclid(2) == 0 {
                    out.push(CharacterSpec::case_b(t, Group::S, c)?);
                } else {
                    excluded.push(c);
                }
            }
            Case::A => {
                if c % 2 == 1 {
                    excluded.push(c);
                    continue;
                }
                for digits in case_a_parameters(cfg, t, c / 2)? {
                    out.push(CharacterSpec { group: Group::S, case: Case::A, conductor: c, parameter: Some(digits), square: Some(true) });
                }
            }
        }
    }
    Ok((out, excluded))
}

/// Leading digits of b at conductor 2j: the configured ones, or one per nonzero square α.
fn case_a_parameters(cfg: &JobConfig, t: &TorusDescriptor, j: u32) -> Out<Vec<Vec<ResidueElement>>> {
    let rf = t.k1.residue_field();
    let n = (j - j / 2) as usize;
    let pad = |mut d: Vec<ResidueElement>| {
        d.resize(n, rf.zero());
        d
    };
    if let Some(params) = cfg.characters.as_ref().and_then(|c| c.parameters.clone()) {
        let mut out = Vec::new();
        for b in params {
            if b.iter().any(|d| d.len() != rf.dim() || d.iter().any(|&x| x >= rf.characteristic())) {
                return Err(CliError::config(format!("parameter digits must be residues of k′ with {} coordinates below p", rf.dim())));
            }
            match b.first() {
                Some(a) if rf.is_nonzero_square(a) => out.push(pad(b)),
                _ => return Err(CliError { code: crate::error::ErrorCode::NotInSpectrum, message: format!("leading digit of {b:?} is not a nonzero square") }),
            }
        }
        return Ok(out);
    }
    if rf.size() > DEFAULT_PARAMETER_CAP {
        return Err(CliError::config(format!("k′ has {} residues; list `characters.parameters` explicitly", rf.size())));
    }
    Ok(rf.elements().filter(|a| rf.is_nonzero_square(a)).map(|a| pad(vec![a])).collect())
}

/// Admissible proper subtori among the requested ones; a listed non-admissible set is an error.
fn admissible_subtori(cfg: &JobConfig, t: &TorusDescriptor) -> Out<Vec<SubtorusSpec>> {
    let mut out = Vec::new();
    for ds in cfg.divisor_sets(t) {
        let s = t.subtorus(&ds)?;
        if !s.is_proper_nontrivial() && cfg.divisors.is_none() {
            continue;
        }
        if is_admissible(&s)?.is_admissible() {
            out.push(s);
        } else if cfg.divisors.is_some() {
            return Err(CliError { code: crate::error::ErrorCode::NotAdmissible, message: format!("S{ds:?} is not admissible") });
        }
    }
    Ok(out)
}

// ---- multiplicity / volume ----

#[derive(Serialize)]
pub struct MultiplicityEntry {
    pub character: CharacterSummary,
    pub m: QPower,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vol: Option<QPower>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_equals_vol: Option<bool>,
}

#[derive(Serialize)]
pub struct SubtorusMultiplicities {
    pub divisors: Vec<u64>,
    pub characters: Vec<MultiplicityEntry>,
}

#[derive(Serialize)]
pub struct MultiplicityResult {
    pub excluded_conductors: Vec<u32>,
    pub subtori: Vec<SubtorusMultiplicities>,
}

fn summary(chi: &CharacterSpec) -> CharacterSummary {
    CharacterSummary { conductor: chi.conductor, parameter: chi.parameter.clone() }
}

pub fn multiplicities(cfg: &JobConfig) -> Out<MultiplicityResult> {
    let t = cfg.torus()?;
    let targets = admissible_subtori(cfg, &t)?;
    let (chars, excluded_conductors) = requested_characters(cfg, &t)?;
    let mut subtori = Vec::new();
    for s in targets {
        let mut characters = Vec::new();
        for chi in &chars {
            let entry = if chi.is_trivial() || s.is_full() {
                MultiplicityEntry { character: summary(chi), m: multiplicity(&s, chi)?, vol: None, m_equals_vol: None }
            } else {
                let rep = verify_identity(&s, chi, None)?;
                MultiplicityEntry { character: rep.character, m: rep.m, vol: Some(rep.vol), m_equals_vol: Some(rep.agree.m_vol) }
            };
            characters.push(entry);
        }
        subtori.push(SubtorusMultiplicities { divisors: s.divisors.clone(), characters });
    }
    Ok(MultiplicityResult { excluded_conductors, subtori })
}

#[derive(Serialize)]
pub struct VolumeEntry {
    pub character: CharacterSummary,
    pub vol: QPower,
}

#[derive(Serialize)]
pub struct SubtorusVolumes {
    pub divisors: Vec<u64>,
    pub volumes: Vec<VolumeEntry>,
}

#[derive(Serialize)]
pub struct VolumeResult {
    pub excluded_conductors: Vec<u32>,
    pub subtori: Vec<SubtorusVolumes>,
}

pub fn volumes(cfg: &JobConfig) -> Out<VolumeResult> {
    let t = cfg.torus()?;
    let targets = admissible_subtori(cfg, &t)?;
    let (chars, excluded_conductors) = requested_characters(cfg, &t)?;
    let mut subtori = Vec::new();
    for s in targets {
        let mut volumes = Vec::new();
        for chi in chars.iter().filter(|c| !c.is_trivial()) {
            let vol = reduction_volume(&s, chi.conductor, chi.alpha().map(|a| a.as_slice()))?;
            volumes.push(VolumeEntry { character: summary(chi), vol });
        }
        subtori.push(SubtorusVolumes { divisors: s.divisors.clone(), volumes });
    }
    Ok(VolumeResult { excluded_conductors, subtori })
}

// ---- verify ----

#[derive(Serialize)]
pub struct TrivialCheck {
    pub m: QPower,
    pub oracle: u64,
    pub agree: bool,
}

#[derive(Serialize)]
pub struct SubtorusVerification {
    pub divisors: Vec<u64>,
    pub image_order: usize,
    pub trivial: TrivialCheck,
    pub reports: Vec<MultiplicityReport>,
}

#[derive(Serialize)]
pub struct PropertySummary {
    pub seed: u64,
    pub cases: u32,
    pub failures: u32,
}

#[derive(Serialize)]
pub struct VerifyResult {
    pub level: u32,
    pub max_conductor: u32,
    pub group_order: usize,
    pub spectrum_size: usize,
    pub subtori: Vec<SubtorusVerification>,
    pub all_agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub properties: Option<PropertySummary>,
}

/// Closed forms and volumes against restriction counts in T/T_N.
pub fn verify(cfg: &JobConfig) -> Out<VerifyResult> {
    let t = cfg.torus()?;
    let oracle = cfg.oracle.clone().unwrap_or_default();
    let max_conductor = match &cfg.characters {
        Some(ch) => ch.max_conductor.or_else(|| ch.conductors.as_ref().and_then(|c| c.iter().max().copied())).unwrap_or(DEFAULT_MAX_CONDUCTOR),
        None => oracle.level.map_or(DEFAULT_MAX_CONDUCTOR, |n| n.saturating_sub(1)),
    };
    let level = oracle.level.unwrap_or(max_conductor + 1);
    if level <= max_conductor {
        return Err(CliError::config(format!("oracle level {level} must exceed the largest conductor {max_conductor}")));
    }
    let wanted = |c: u32| match cfg.characters.as_ref().and_then(|ch| ch.conductors.as_ref()) {
        Some(list) => list.contains(&c),
        None => c <= max_conductor,
    };
    let qg = quotient_group(&t, level)?;
    let spectrum = weil_characters_mod(&qg)?;
    let mut subtori = Vec::new();
    let mut all_agree = true;
    for s in admissible_subtori(cfg, &t)? {
        let table = restriction_table(&qg, &spectrum, &s)?;
        let trivial_m = multiplicity(&s, &CharacterSpec::trivial(&t, Group::S))?;
        let trivial_count = table.classes.iter().find(|c| c.conductor == 0).map_or(0, |c| c.count);
        let trivial = TrivialCheck { agree: trivial_m.to_u64() == Some(trivial_count), m: trivial_m, oracle: trivial_count };
        all_agree &= trivial.agree;
        let mut reports = Vec::new();
        for class in table.classes.iter().filter(|c| c.conductor > 0 && wanted(c.conductor)) {
            let chi = match t.case() {
                Case::B => CharacterSpec::case_b(&t, Group::S, class.conductor)?,
                Case::A => CharacterSpec {
                    group: Group::S,
                    case: Case::A,
                    conductor: class.conductor,
                    parameter: class.parameter.clone(),
                    square: Some(true),
                },
            };
            let rep = verify_identity(&s, &chi, Some(class.count))?;
            all_agree &= rep.agree.m_vol && rep.agree.m_oracle == Some(true);
            reports.push(rep);
        }
        subtori.push(SubtorusVerification { divisors: s.divisors.clone(), image_order: table.image_order, trivial, reports });
    }
    let properties = match cfg.seed {
        Some(seed) => {
            let summary = torus_properties(&t, seed, cfg.property_cases.unwrap_or(200))?;
            all_agree &= summary.failures == 0;
            Some(summary)
        }
        None => None,
    };
    Ok(VerifyResult { level, max_conductor, group_order: qg.order(), spectrum_size: spectrum.len(), subtori, all_agree, properties })
}

/// Randomized closure checks on T and its filtration.
fn torus_properties(t: &TorusDescriptor, seed: u64, cases: u32) -> Out<PropertySummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for i in 0..cases {
        let (j1, j2) = ((i % 4) as i64, (i % 3) as i64);
        let x = t.random_element(&mut rng, j1)?;
        let y = t.random_element(&mut rng, j2)?;
        let xy = x.mul(&y);
        let ok = t.contains(&x)?
            && t.contains(&xy)?
            && t.contains(&x.inv()?)?
            && t.level(&xy).unwrap_or(i64::MAX) >= j1.min(j2)
            && t.tau(&x)?.mul(&x).approx_eq(&FieldElement::one(&t.k2));
        failures += u32::from(!ok);
    }
    Ok(PropertySummary { seed, cases, failures })
}

// ---- appendix-a ----

#[derive(Serialize)]
pub struct AppendixResult {
    pub checks: Vec<ClassificationCheck>,
    pub all_match: bool,
}

pub fn appendix_a(cfg: &JobConfig) -> Out<AppendixResult> {
    let fs = cfg.appendix_a.as_ref().map_or_else(|| (1..=8).collect(), |a| a.f.clone());
    if fs.iter().any(|&f| f == 0) {
        return Err(CliError::config("f must be positive".into()));
    }
    let budget = cfg.oracle.as_ref().and_then(|o| o.budget).unwrap_or(DEFAULT_SUBMODULE_BUDGET);
    let checks = fs.iter().map(|&f| classify_minimal_verified(f, budget)).collect::<Result<Vec<_>, _>>()?;
    let all_match = checks.iter().all(|c| c.matches_enumeration);
    Ok(AppendixResult { checks, all_match })
}

// ---- embeddable ----

#[derive(Serialize)]
pub struct EmbeddableEntry {
    pub p: u64,
    pub kind: ExtensionKind,
    pub degree: usize,
    pub embeddable: bool,
}

#[derive(Serialize)]
pub struct EmbeddableResult {
    pub results: Vec<EmbeddableEntry>,
}

pub fn embeddable(cfg: &JobConfig) -> Out<EmbeddableResult> {
    let exts = cfg.extensions.as_ref().ok_or_else(|| CliError::config("embeddable needs `extensions`".into()))?;
    let mut results = Vec::new();
    for e in exts {
        let k = LocalField::qp(e.p, 10).map_err(CliError::config_from)?;
        let k1 = match e.kind {
            ExtensionKind::Unramified => k.unramified_ext(e.degree),
            ExtensionKind::Ramified => k.eisenstein_ext(e.degree, None),
        }
        .map_err(CliError::config_from)?;
        results.push(EmbeddableEntry { p: e.p, kind: e.kind, degree: e.degree, embeddable: elliptic_embeddable(&k1, &k)? });
    }
    Ok(EmbeddableResult { results })
}
