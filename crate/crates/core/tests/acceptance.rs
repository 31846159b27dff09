//! Acceptance suite: one pass/fail line per criterion, with pinned tolerances.
//!
//! The report goes to stderr even when output is captured.

use std::io::Write;
use std::time::{Duration, Instant};

use padic_tori::admissible::{
    is_admissible, parity_rule, residue_rule_case_b, support_rule, verify_witness, zero_fiber_witness_search, Method, ProductSubtorus,
    SearchOutcome, SearchWindow,
};
use padic_tori::cyclomod::{classify_minimal, classify_minimal_verified, divisors, euler_phi};
use padic_tori::multiplicity::{multiplicity, verify_identity, QPower};
use padic_tori::oracle::{quotient_group, restriction_table, weil_characters_mod, RestrictionTable};
use padic_tori::padic::{in_norm_group_of, FieldElement, LocalField, Valuation};
use padic_tori::torus::{build_max_torus, elliptic_embeddable, Case, CharacterSpec, Group, SubtorusSpec, TorusDescriptor, TorusParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Digits of k to which witnesses must be certified; tori carry 8 spare digits of k.
const WITNESS_DIGITS: i64 = 20;
/// Randomized instances per field in the arithmetic suite.
const PROPERTY_CASES: usize = 1000;
/// Candidates per bounded witness search (small towers are searched exhaustively within it).
const SEARCH_BUDGET: u64 = 2_000;

struct Outcome {
    failures: Vec<String>,
    note: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: Vec::new(), note: String::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

fn run(id: u32, title: &str, limit: Duration, body: impl FnOnce(&mut Outcome)) -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    body(&mut out);
    let took = start.elapsed();
    if took > limit {
        out.failures.push(format!("took {took:.1?}, limit {limit:?}"));
    }
    let ok = out.failures.is_empty();
    // straight to stderr so the summary survives the harness's output capture
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "criterion {id}: {} | {title} | {took:.2?} (limit {limit:?}) | {}", if ok { "PASS" } else { "FAIL" }, out.note);
    for f in out.failures.iter().take(10) {
        let _ = writeln!(err, "    {f}");
    }
    ok
}

fn subsets(n: u64) -> Vec<Vec<u64>> {
    let divs = divisors(n);
    (0u32..(1 << divs.len())).map(|mask| divs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &d)| d).collect()).collect()
}

fn proper_subtori(t: &TorusDescriptor) -> Vec<SubtorusSpec> {
    subsets(t.gamma_order()).into_iter().map(|ds| t.subtorus(&ds).unwrap()).filter(|s| s.is_proper_nontrivial()).collect()
}

// ---- 1 ----

fn classification(out: &mut Outcome) {
    for f in 1..=8u64 {
        let chk = classify_minimal_verified(f, 5_000_000).unwrap();
        out.check(chk.matches_enumeration, || format!("f={f}: enumeration differs from the divisor modules"));
        out.check(chk.count == divisors(f).len(), || format!("f={f}: {} modules", chk.count));
        let ranks: Vec<usize> = classify_minimal(f).unwrap().iter().map(|(d, m)| m.rank() - euler_phi(*d) as usize).collect();
        out.check(ranks.iter().all(|&r| r == 0), || format!("f={f}: rank differs from φ(d)"));
    }
    out.note = "f = 1..8".into();
}

// ---- 2 and 3 (instances reused by 8) ----

fn criterion2_tori() -> Vec<TorusDescriptor> {
    // q = 3 divides 2e = 6, so that tower is taken over Q_5
    let mut v = Vec::new();
    for (p, e) in [(3, 1), (3, 2), (5, 3)] {
        for vu in [0, 1] {
            v.push(build_max_torus(&TorusParams::case_b(p, e, vu), 2 * e * (WITNESS_DIGITS as u32 + 8)).unwrap());
        }
    }
    v
}

fn criterion3_tori() -> Vec<(u64, TorusDescriptor)> {
    let mut v = Vec::new();
    for q in [3, 5, 7, 13] {
        for f in [3, 5] {
            v.push((q, build_max_torus(&TorusParams::case_a(q, f), 2 * (WITNESS_DIGITS as u32 + 8)).unwrap()));
        }
    }
    v
}

fn residue_rules(out: &mut Outcome, tori: &[TorusDescriptor]) {
    let mut n = 0;
    for t in tori {
        for ds in subsets(t.gamma_order()) {
            let s = t.subtorus(&ds).unwrap();
            let a = parity_rule(&s);
            let b = support_rule(&s).unwrap();
            let c = residue_rule_case_b(&s).unwrap();
            n += 1;
            out.check(a == b && b == c, || format!("q={} 2e={} v={} {ds:?}: parity {a} support {b} residue {c}", t.q(), t.gamma_order(), t.v_u()));
        }
    }
    out.note = format!("{n} instances agree");
}

fn q_mod_four(out: &mut Outcome, tori: &[(u64, TorusDescriptor)]) {
    for (q, t) in tori {
        let f = t.params.halfdeg as u64;
        for d in [2, 2 * f] {
            let dec = is_admissible(&t.subtorus(&[d]).unwrap()).unwrap();
            out.check(dec.is_admissible() == (q % 4 == 1), || format!("q={q} f={f} S_{d}: admissible = {}", dec.is_admissible()));
        }
    }
    out.note = "q ∈ {3,5,7,13}, f ∈ {3,5}, S_2 and S_2f".into();
}

// ---- 4, 5, 6 ----

/// Number of characters of the image of S of exact conductor c.
fn s_characters_of_conductor(table: &RestrictionTable, c: u32) -> u64 {
    let o = &table.image_filtration;
    let at = |j: u32| o.get(j as usize).copied().unwrap_or(table.image_order as u64);
    if c == 0 {
        1
    } else {
        at(c) - at(c - 1)
    }
}

struct MultiplicityStats {
    compared: usize,
    identities: usize,
    identity_failures: Vec<String>,
}

fn exact(m: &QPower) -> Option<u64> {
    m.to_u64()
}

/// Closed form against the oracle for every restriction class of conductor ≤ `max_c`,
/// checked at levels `levels`; also the volume identity for nontrivial χ.
fn compare_with_oracle(out: &mut Outcome, t: &TorusDescriptor, levels: &[u32], max_c: u32, stats: &mut MultiplicityStats) {
    let mut per_level: Vec<Vec<(u32, u64)>> = Vec::new();
    let qgs: Vec<_> = levels.iter().map(|&n| quotient_group(t, n).unwrap()).collect();
    let spectra: Vec<_> = qgs.iter().map(|qg| weil_characters_mod(qg).unwrap()).collect();
    for s in proper_subtori(t) {
        if !is_admissible(&s).unwrap().is_admissible() {
            continue;
        }
        let tag = format!("q={} {:?} halfdeg={} v={} S{:?}", t.q(), t.case(), t.params.halfdeg, t.v_u(), s.divisors);
        per_level.clear();
        for (qg, spectrum) in qgs.iter().zip(&spectra) {
            let table = restriction_table(qg, spectrum, &s).unwrap();
            let mut seen = Vec::new();
            let mut trivial_seen = false;
            for class in table.classes.iter().filter(|c| c.conductor <= max_c) {
                let chi = match (t.case(), class.conductor) {
                    (_, 0) => CharacterSpec::trivial(t, Group::S),
                    (Case::B, c) => CharacterSpec::case_b(t, Group::S, c).unwrap(),
                    (Case::A, c) => CharacterSpec {
                        group: Group::S,
                        case: Case::A,
                        conductor: c,
                        parameter: class.parameter.clone(),
                        square: Some(true),
                    },
                };
                trivial_seen |= class.conductor == 0;
                let m = multiplicity(&s, &chi);
                stats.compared += 1;
                match m.as_ref().ok().and_then(exact) {
                    Some(m) => out.check(m == class.count, || format!("{tag} N={} c={}: formula {m}, oracle {}", qg.n, class.conductor, class.count)),
                    None => out.check(false, || format!("{tag} N={} c={}: formula gave {m:?}", qg.n, class.conductor)),
                }
                if class.conductor > 0 {
                    let rep = verify_identity(&s, &chi, Some(class.count)).unwrap();
                    stats.identities += 1;
                    if !(rep.agree.m_vol && rep.m == rep.vol) {
                        stats.identity_failures.push(format!("{tag} c={}: m = {} but vol = {}", class.conductor, rep.m, rep.vol));
                    }
                }
                seen.push((class.conductor, class.count));
            }
            if !trivial_seen {
                // no spectrum character restricts trivially: the formula must give 0
                let m = multiplicity(&s, &CharacterSpec::trivial(t, Group::S)).unwrap();
                stats.compared += 1;
                out.check(exact(&m) == Some(0), || format!("{tag} N={}: trivial class absent but formula gives {m}", qg.n));
            }
            if t.case() == Case::B {
                // every S-character of the right parity occurs, none of the other parity
                for c in 1..=max_c {
                    let occurring = seen.iter().filter(|(cc, _)| *cc == c).count() as u64;
                    let expect = if (c as i64 - t.mu).rem_euclid(2) == 0 { s_characters_of_conductor(&table, c) } else { 0 };
                    out.check(occurring == expect, || format!("{tag} N={} c={c}: {occurring} classes, expected {expect}", qg.n));
                }
            } else {
                out.check(seen.iter().all(|(c, _)| c % 2 == 0), || format!("{tag}: odd conductor among restrictions"));
            }
            seen.sort();
            per_level.push(seen);
        }
        out.check(per_level.windows(2).all(|w| w[0] == w[1]), || format!("{tag}: restriction data changes with the oracle level"));
    }
}

fn case_b_multiplicities(out: &mut Outcome, stats: &mut MultiplicityStats) {
    let before = stats.compared;
    for e in [1, 2] {
        for vu in [0, 1] {
            let t = build_max_torus(&TorusParams::case_b(3, e, vu), 24).unwrap();
            compare_with_oracle(out, &t, &[6, 7], 5, stats);
        }
    }
    out.note = format!("{} characters compared at N = 6, 7", stats.compared - before);
}

fn case_a_multiplicities(out: &mut Outcome, stats: &mut MultiplicityStats) {
    let before = stats.compared;
    // q = 3: no proper subtorus is admissible for 2f = 2, and p | f for 2f = 6
    let mut vacuous = 0;
    for f in [1, 3] {
        let t = build_max_torus(&TorusParams::case_a(3, f), 12).unwrap();
        let admissible = proper_subtori(&t).iter().filter(|s| is_admissible(s).unwrap().is_admissible()).count();
        out.check(f == 3 || admissible == 0, || format!("q=3 2f=2: {admissible} admissible proper subtori"));
        vacuous += admissible;
    }
    // supplementary towers with admissible proper subtori and an oracle in reach
    for q in [5, 13] {
        let t = build_max_torus(&TorusParams::case_a(q, 1), 16).unwrap();
        let qg = quotient_group(&t, 4).unwrap();
        out.check(qg.ring.residue_field().top_modulus() == t.k1.residue_field().top_modulus(), || format!("q={q}: residue presentations differ"));
        let levels: &[u32] = if q == 5 { &[4, 5, 6] } else { &[4, 5] };
        compare_with_oracle(out, &t, levels, 4, stats);
    }
    out.note = format!("q=3 sweep: {vacuous} admissible proper subtori (2f=6 has p | f); q ∈ {{5,13}}, 2f = 2: {} characters", stats.compared - before);
}

// ---- 7 ----

struct FieldCase {
    name: &'static str,
    base: LocalField,
    ext: LocalField,
}

fn property_fields() -> Vec<FieldCase> {
    let q3 = LocalField::qp(3, 20).unwrap();
    let q5 = LocalField::qp(5, 20).unwrap();
    let q9 = q3.unramified_ext(2).unwrap();
    let r3 = q3.eisenstein_ext(2, None).unwrap();
    vec![
        FieldCase { name: "Q3^(2)/Q3", ext: q3.unramified_ext(2).unwrap(), base: q3 },
        FieldCase { name: "Q5(√5)/Q5", ext: q5.eisenstein_ext(2, None).unwrap(), base: q5 },
        FieldCase { name: "Q9(√3)/Q9", ext: q9.eisenstein_ext(2, None).unwrap(), base: q9 },
        FieldCase { name: "Q3(√3)^(2)/Q3(√3)", ext: r3.unramified_ext(2).unwrap(), base: r3 },
    ]
}

fn lower(v: Valuation) -> i64 {
    match v {
        Valuation::Finite(v) | Valuation::AtLeast(v) => v,
        Valuation::Infinite => i64::MAX,
    }
}

fn properties(out: &mut Outcome, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for fc in property_fields() {
        let (k, e) = (&fc.base, &fc.ext);
        let prec = e.capacity();
        let exp_min = e.ram() as i64 / (e.p() as i64 - 1) + 1;
        for i in 0..PROPERTY_CASES {
            let tag = |what: &str| format!("{} #{i}: {what}", fc.name);
            let vx = (i % 7) as i64 - 3;
            let x = FieldElement::random(e, &mut rng, vx, prec);
            let y = FieldElement::random(e, &mut rng, (i % 5) as i64 - 2, prec);
            // ultrametric
            let s = x.add(&y);
            out.check(lower(s.valuation()) >= lower(x.valuation()).min(lower(y.valuation())), || tag("ultrametric"));
            // norm multiplicativity
            let lhs = x.mul(&y).norm(k).unwrap();
            let rhs = x.norm(k).unwrap().mul(&y.norm(k).unwrap());
            out.check(lhs.approx_eq(&rhs), || tag("norm multiplicativity"));
            // trace linearity over the base
            let a = FieldElement::random(k, &mut rng, 0, k.capacity());
            let b = FieldElement::random(k, &mut rng, 0, k.capacity());
            let comb = x.mul(&a.embed_into(e).unwrap()).add(&y.mul(&b.embed_into(e).unwrap()));
            let lhs = comb.trace(k).unwrap();
            let rhs = a.mul(&x.trace(k).unwrap()).add(&b.mul(&y.trace(k).unwrap()));
            out.check(lhs.approx_eq(&rhs), || tag("trace linearity"));
            // hensel_sqrt
            let z = FieldElement::one(e).add(&FieldElement::random(e, &mut rng, 1 + (i % 3) as i64, prec));
            let r = z.hensel_sqrt().unwrap();
            out.check(r.mul(&r).approx_eq(&z), || tag("hensel_sqrt squared"));
            // exp and log on their convergence domains
            let w = FieldElement::random(e, &mut rng, exp_min + (i % 3) as i64, prec);
            let back = w.exp().unwrap().log().unwrap();
            out.check(back.approx_eq(&w), || tag("log(exp(X)) = X"));
            let u = FieldElement::one(e).add(&w);
            out.check(u.log().unwrap().exp().unwrap().approx_eq(&u), || tag("exp(log(1+X)) = 1+X"));
            // the norm group of ext/base is an index-two subgroup
            let g = FieldElement::random(k, &mut rng, (i % 5) as i64 - 2, k.capacity());
            let h = FieldElement::random(k, &mut rng, (i % 3) as i64 - 1, k.capacity());
            let (mg, mh) = (in_norm_group_of(&g, e).unwrap(), in_norm_group_of(&h, e).unwrap());
            let mgh = in_norm_group_of(&g.mul(&h), e).unwrap();
            let mginv = in_norm_group_of(&g.inv().unwrap(), e).unwrap();
            out.check(mgh == (mg == mh) && mginv == mg, || tag("norm group closure"));
            let n = x.norm(k).unwrap();
            out.check(in_norm_group_of(&n, e).unwrap(), || tag("norms lie in the norm group"));
        }
    }
    out.note = format!("{PROPERTY_CASES} cases per field, 4 fields, seed {seed}");
}

// ---- 8 ----

fn certify(out: &mut Outcome, s: &SubtorusSpec, counts: &mut [usize; 3]) {
    let t = &s.torus;
    let dec = is_admissible(s).unwrap();
    let tag = format!("q={} {:?} 2f/2e={} v={} S{:?}", t.q(), t.case(), t.gamma_order(), t.v_u(), s.divisors);
    if dec.method == Method::TrivialTorus {
        return;
    }
    if dec.is_admissible() {
        let window = SearchWindow { budget: SEARCH_BUDGET, ..SearchWindow::default_for(t, WITNESS_DIGITS) };
        let found = zero_fiber_witness_search(&ProductSubtorus::from_subtorus(s).unwrap(), &window).unwrap();
        counts[1] += 1;
        match found {
            SearchOutcome::NoneFound { exhaustive, .. } => counts[2] += usize::from(exhaustive),
            SearchOutcome::Found { .. } => out.check(false, || format!("{tag}: admissible but the search found a witness")),
        }
    } else {
        counts[0] += 1;
        match dec.witness() {
            None => out.check(false, || format!("{tag}: not admissible without a witness")),
            Some(w) => {
                let chk = verify_witness(s, &w.w, WITNESS_DIGITS).unwrap();
                out.check(chk.valid, || format!("{tag}: witness fails re-verification {chk:?}"));
            }
        }
    }
}

/// Every verdict of criteria 2 (all divisor subsets) and 3 (S_2 and S_2f).
fn certificates(out: &mut Outcome, c2: &[TorusDescriptor], c3: &[(u64, TorusDescriptor)]) {
    let mut counts = [0; 3];
    for t in c2 {
        for ds in subsets(t.gamma_order()) {
            certify(out, &t.subtorus(&ds).unwrap(), &mut counts);
        }
    }
    for (_, t) in c3 {
        let f = t.params.halfdeg as u64;
        for d in [2, 2 * f] {
            certify(out, &t.subtorus(&[d]).unwrap(), &mut counts);
        }
    }
    let [witnessed, searched, exhaustive] = counts;
    out.note = format!("{witnessed} witnesses re-verified to {WITNESS_DIGITS} digits, {searched} bounded searches empty ({exhaustive} exhaustive)");
}

// ---- 9 ----

fn embeddability(out: &mut Outcome) {
    for p in [3, 5, 7] {
        let k = LocalField::qp(p, 10).unwrap();
        for n in [3, 5, 7] {
            let k1 = k.unramified_ext(n).unwrap();
            out.check(!elliptic_embeddable(&k1, &k).unwrap(), || format!("p={p}: unramified degree {n} reported embeddable"));
        }
        out.check(elliptic_embeddable(&k.unramified_ext(2).unwrap(), &k).unwrap(), || format!("p={p}: unramified quadratic not embeddable"));
        out.check(elliptic_embeddable(&k.eisenstein_ext(2, None).unwrap(), &k).unwrap(), || format!("p={p}: ramified quadratic not embeddable"));
    }
    out.note = "p ∈ {3,5,7}".into();
}

#[test]
fn acceptance() {
    let seed = std::env::var("PADIC_TORI_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(20240611);
    let c2 = criterion2_tori();
    let c3 = criterion3_tori();
    let mut stats = MultiplicityStats { compared: 0, identities: 0, identity_failures: Vec::new() };
    let mut ok = true;
    ok &= run(1, "minimal submodules are the divisor modules", Duration::from_secs(60), classification);
    ok &= run(2, "parity, support and residue rules agree", Duration::from_secs(10), |o| residue_rules(o, &c2));
    ok &= run(3, "S_2 admissible iff q ≡ 1 mod 4", Duration::from_secs(10), |o| q_mod_four(o, &c3));
    let identities_before = stats.identities;
    ok &= run(4, "case B closed form equals oracle count", Duration::from_secs(300), |o| case_b_multiplicities(o, &mut stats));
    ok &= run(5, "case A closed form equals oracle count", Duration::from_secs(300), |o| case_a_multiplicities(o, &mut stats));
    let identities = stats.identities - identities_before;
    ok &= run(6, "m(χ) = vol of the symplectic reduction", Duration::from_secs(1), |o| {
        // the identity was checked alongside each comparison in 4 and 5
        o.check(identities > 0, || "no nontrivial instances".into());
        o.failures.extend(stats.identity_failures.iter().cloned());
        o.note = format!("{identities} exact QPower equalities");
    });
    ok &= run(7, "arithmetic property suite", Duration::from_secs(30), |o| properties(o, seed));
    ok &= run(8, "witness certificates and bounded searches", Duration::from_secs(60), |o| certificates(o, &c2, &c3));
    ok &= run(9, "odd unramified not embeddable, quadratic embeddable", Duration::from_secs(1), embeddability);
    assert!(ok, "acceptance criteria failed");
}
