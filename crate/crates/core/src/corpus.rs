//! The bundled fixture models and the verdicts expected on them.

use num_traits::Zero;
use serde::Serialize;

use crate::bisim::{check_eds_bisim, check_weak_bisim, search_eds, CandidateRelation};
use crate::composition::{chi_compose_check, chi_view, ChiMa, ComposeOptions};
use crate::distributions::Subdistr;
use crate::format::{parse, parse_state_ref_str, resolve_relation, resolve_state, ModelFile};
use crate::model::{ExtLabel, Tlts};
use crate::rational::{ratio, Rational};
use crate::timed::{eds_on_tlts, normalize, timed_weak_bisim};
use crate::trees::{DurationIndexedDistr, TreeEnumerator};

pub const FIXTURES: &[(&str, &str)] = &[
    ("fig1a.ma", include_str!("../../../fixtures/fig1a.ma")),
    ("fig1b.ma", include_str!("../../../fixtures/fig1b.ma")),
    ("fig2.ma", include_str!("../../../fixtures/fig2.ma")),
    ("fig3.ma", include_str!("../../../fixtures/fig3.ma")),
    ("fig4.ma", include_str!("../../../fixtures/fig4.ma")),
    ("sec4_ctrex1.tlts", include_str!("../../../fixtures/sec4_ctrex1.tlts")),
    ("sec4_ctrex2.tlts", include_str!("../../../fixtures/sec4_ctrex2.tlts")),
];

pub const MAX_PAIRS: usize = 4096;

pub fn source(name: &str) -> &'static str {
    FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .unwrap_or_else(|| panic!("unknown fixture {name}"))
}

pub fn load(name: &str) -> ModelFile {
    parse(source(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// χ-view over every MA and every system of a file, as disjoint units.
/// Returns `None` for files without MAs.
pub fn chi_model(file: &ModelFile, opts: ComposeOptions) -> Option<ChiMa> {
    let mut parts: Vec<ChiMa> = file.mas.iter().map(|m| chi_view(m, opts)).collect();
    for s in &file.systems {
        let mut c = ChiMa::of_system(&s.system, opts);
        c.units[0].name = s.name.clone();
        parts.push(c);
    }
    (!parts.is_empty()).then(|| ChiMa::union(parts))
}

pub fn state(model: &ChiMa, text: &str) -> usize {
    let r = parse_state_ref_str(text).unwrap_or_else(|e| panic!("{text}: {e}"));
    resolve_state(model, &r).unwrap_or_else(|e| panic!("{e}"))
}

pub fn tlts_state(t: &Tlts, name: &str) -> usize {
    t.state_index(name).unwrap_or_else(|| panic!("unknown state {name}"))
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusCheck {
    pub id: String,
    pub expected: bool,
    pub observed: bool,
    pub detail: String,
}

impl CorpusCheck {
    pub fn passed(&self) -> bool {
        self.expected == self.observed
    }
}

struct Run {
    bound: usize,
    out: Vec<CorpusCheck>,
}

impl Run {
    fn push(&mut self, id: &str, expected: bool, observed: bool, detail: impl Into<String>) {
        self.out.push(CorpusCheck {
            id: id.to_string(),
            expected,
            observed,
            detail: detail.into(),
        });
    }

    fn search(&mut self, id: &str, model: &ChiMa, a: &str, b: &str, expected: bool) {
        let out = search_eds(model, state(model, a), state(model, b), self.bound, MAX_PAIRS);
        let detail = match (&out.verdict.failure, &out.verdict.note) {
            (Some(f), _) => f.to_string(),
            (None, Some(n)) => n.clone(),
            _ => format!("relation of {} pairs verified", out.relation.map_or(0, |r| r.pairs.len())),
        };
        self.push(id, expected, out.verdict.holds, format!("{a} vs {b}: {detail}"));
    }

    fn relation(&mut self, id: &str, model: &ChiMa, rel: &CandidateRelation, weak: bool, expected: bool) {
        let v = if weak {
            check_weak_bisim(rel, model, self.bound)
        } else {
            check_eds_bisim(rel, model, self.bound)
        };
        let detail = v.failure.map_or_else(|| "verified".to_string(), |f| f.to_string());
        self.push(id, expected, v.holds, detail);
    }

    fn reducible(&mut self, id: &str, model: &ChiMa, at: &str, expected: &[(&str, Rational)], duration: Rational) {
        let s = state(model, at);
        let mut e = TreeEnumerator::new(model, self.bound);
        let set = e.reducible_weak(s, 0);
        let want = DurationIndexedDistr::at(
            duration,
            Subdistr::from_pairs(expected.iter().map(|(n, p)| (state(model, n), p.clone()))).unwrap(),
        );
        let found = set.generators.iter().any(|g| g.target == want);
        self.push(
            id,
            true,
            found,
            format!(
                "{at} reducible targets: {:?}",
                set.generators.iter().map(|g| &g.target).collect::<Vec<_>>()
            ),
        );
    }
}

fn dirac(model: &ChiMa, pairs: &[(&str, &str)]) -> CandidateRelation {
    CandidateRelation::dirac(pairs.iter().map(|(a, b)| (state(model, a), state(model, b))))
}

/// Runs every fixture expectation and reports observed against expected.
pub fn run_all(bound: usize) -> Vec<CorpusCheck> {
    let mut r = Run { bound, out: Vec::new() };
    let on = ComposeOptions::default();
    let off = ComposeOptions {
        generate_chi0_selfloops: false,
    };

    // fig1a.ma
    let f = load("fig1a.ma");
    let m = chi_model(&f, on).unwrap();
    r.search("fig1a/s0~t0", &m, "s0", "t0", true);
    r.search("fig1a/t0~u0", &m, "t0", "u0", true);
    r.search("fig1a/s0~u0", &m, "s0", "u0", true);
    let b = resolve_relation(&m, &f.relation("B").unwrap().pairs).unwrap();
    r.relation("fig1a/relation-B", &m, &b, false, true);
    r.reducible("fig1a/s1-duration", &m, "s1", &[("s6", ratio(1, 1))], ratio(5, 6));
    r.reducible("fig1a/t1-duration", &m, "t1", &[("t2", ratio(1, 1))], ratio(5, 6));
    r.reducible("fig1a/u1-duration", &m, "u1", &[("z0", ratio(1, 1))], ratio(5, 6));

    // fig1b.ma
    let m = chi_model(&load("fig1b.ma"), on).unwrap();
    r.search("fig1b/s0~t0", &m, "s0", "t0", true);
    r.reducible("fig1b/s1-split", &m, "s1", &[("u2", ratio(1, 3)), ("v2", ratio(2, 3))], ratio(5, 6));
    r.reducible("fig1b/t1-race", &m, "t1", &[("w0", ratio(1, 3)), ("z0", ratio(2, 3))], ratio(5, 6));

    // fig2.ma
    let m = chi_model(&load("fig2.ma"), on).unwrap();
    r.search("fig2/s0~t0", &m, "s0", "t0", true);
    r.search("fig2/t0~s'0", &m, "t0", "s'0", true);
    r.search("fig2/s0~s'0", &m, "s0", "s'0", true);
    r.reducible("fig2/s1-race", &m, "s1", &[("u1", ratio(1, 4)), ("v1", ratio(3, 4))], ratio(5, 4));
    r.reducible("fig2/s'1-race", &m, "s'1", &[("u'1", ratio(1, 4)), ("v'1", ratio(3, 4))], ratio(5, 4));
    r.reducible("fig2/t1-race", &m, "t1", &[("w0", ratio(1, 4)), ("z0", ratio(3, 4))], ratio(5, 4));

    // fig3.ma
    let f = load("fig3.ma");
    let m = chi_model(&f, on).unwrap();
    r.reducible("fig3/s0-duration", &m, "s0", &[("s1", ratio(1, 1))], ratio(1, 4));
    r.reducible("fig3/t0-duration", &m, "t0", &[("t2", ratio(1, 1))], ratio(1, 4));
    {
        let mut e = TreeEnumerator::new(&m, bound);
        let t1 = DurationIndexedDistr::at(ratio(1, 8), Subdistr::dirac(state(&m, "t1")));
        let has = e.reducible_weak(state(&m, "t0"), 0).generators.iter().any(|g| g.target == t1);
        r.push("fig3/t0-no-intermediate-leaf", false, has, "{1/8 ↦ t1} must not be reducible");
    }
    r.search("fig3/s0~t0", &m, "S@s0", "T@t0", true);
    r.search("fig3/u0~v0", &m, "C@(s0,w0)", "D@(t0,w0)", true);
    let b = resolve_relation(&m, &f.relation("B").unwrap().pairs).unwrap();
    r.relation("fig3/relation-B", &m, &b, false, true);
    r.relation("fig3/t0-vs-t1", &m, &dirac(&m, &[("t0", "t1")]), false, false);
    r.search("fig3/local-probabilities", &m, "CM@(s0,m0)", "DM@(t0,m0)", true);
    {
        let u = global_step(&m, "CM@(s0,m0)", "CM@(s1,m0)");
        let v = global_step(&m, "DM@(t0,m0)", "DM@(t1,m0)") * global_step(&m, "DM@(t1,m0)", "DM@(t2,m0)");
        r.push(
            "fig3/global-probabilities-differ",
            true,
            u != v,
            format!("global {} against {}", u, v),
        );
    }

    // fig4.ma
    let f = load("fig4.ma");
    let m = chi_model(&f, on).unwrap();
    let natural = dirac(&m, &[("s0", "e0"), ("s1", "e1")]);
    r.relation("fig4/a-vs-d-weak", &m, &natural, true, false);
    r.relation("fig4/a-vs-d-eds", &m, &natural, false, false);
    r.search("fig4/a~d", &m, "s0", "e0", false);
    r.search("fig4/a~b-with-selfloops", &m, "s0", "d", false);
    let m = chi_model(&f, off).unwrap();
    r.search("fig4/a~b-without-selfloops", &m, "s0", "d", true);
    let composed = dirac(&m, &[("AK@(s0,c0)", "BK@(d,c0)"), ("AK@(s1,c0)", "BK@(d,c0)")]);
    r.relation("fig4/ak-vs-bk-without-selfloops", &m, &composed, false, false);
    r.search("fig4/ak~bk-without-selfloops", &m, "AK@(s0,c0)", "BK@(d,c0)", false);

    // timed counterexamples
    let t = &load("sec4_ctrex1.tlts").tltss[0];
    let (p, q) = (tlts_state(t, "p"), tlts_state(t, "q"));
    let eds = eds_on_tlts(p, q, t, bound, MAX_PAIRS).unwrap();
    r.push("sec4/pair1-eds", true, eds.verdict.holds, "eds on the delay/τ-choice pair");
    let n = normalize(t).unwrap();
    r.push("sec4/pair1-timed", false, timed_weak_bisim(p, q, &n, bound).holds, "timed weak bisimilarity");
    let t = &load("sec4_ctrex2.tlts").tltss[0];
    let (p, q) = (tlts_state(t, "p"), tlts_state(t, "q"));
    let n = normalize(t).unwrap();
    r.push("sec4/pair2-timed", true, timed_weak_bisim(p, q, &n, bound).holds, "timed weak bisimilarity");
    let eds = eds_on_tlts(p, q, t, bound, MAX_PAIRS).unwrap();
    r.push("sec4/pair2-eds", false, eds.verdict.holds, "eds on the alternative-action pair");

    // χ-view compositionality on every binary fixture system.
    for (name, _) in FIXTURES.iter().filter(|(n, _)| n.ends_with(".ma")) {
        let f = load(name);
        for s in &f.systems {
            if let crate::model::SystemExpr::Par(l, sync, rr) = &s.system.tree {
                if let (crate::model::SystemExpr::Leaf(i), crate::model::SystemExpr::Leaf(j)) = (&**l, &**rr) {
                    let ok = chi_compose_check(
                        &s.system.components[*i],
                        &s.system.components[*j],
                        sync,
                        on,
                    )
                    .unwrap_or(false);
                    r.push(&format!("chi-compose/{}/{}", name, s.name), true, ok, "χ-view of the composition");
                }
            }
        }
    }
    r.out
}

/// Probability of the global χ step from `a` into `b`.
fn global_step(m: &ChiMa, a: &str, b: &str) -> Rational {
    let (a, b) = (state(m, a), state(m, b));
    m.transitions(a)
        .iter()
        .find(|t| matches!(&t.label, ExtLabel::Chi(x) if !x.is_zero()))
        .map_or_else(Rational::zero, |t| t.target.get(&b))
}
