mod common;

use common::{random_ma, random_tlts, rng, union_of};
use edsbisim::bisim::{check_eds_bisim, check_weak_bisim, CandidateRelation};
use edsbisim::composition::{ChiMa, ComposeOptions};
use edsbisim::corpus::{self, chi_model, load, tlts_state, MAX_PAIRS};
use edsbisim::format::resolve_relation;
use edsbisim::model::Tlts;
use edsbisim::rational::{ratio, Rational};
use edsbisim::timed::{eds_on_tlts, is_normalized, normalize, timed_weak_bisim};
use edsbisim::trees::{induced_distribution, validate_tree, TreeEnumerator, TreeKind, DEFAULT_BOUND};

const MA_FIXTURES: &[&str] = &["fig1a.ma", "fig1b.ma", "fig2.ma", "fig3.ma", "fig4.ma"];

fn fixture_model(name: &str) -> ChiMa {
    chi_model(&load(name), ComposeOptions::default()).unwrap()
}

#[test]
fn witness_trees_validate_and_induce_their_targets() {
    for name in MA_FIXTURES {
        let model = fixture_model(name);
        let mut e = TreeEnumerator::new(&model, 8);
        for s in 0..model.num_states() {
            for g in e.weak_internal(s).generators {
                validate_tree(&model, &g.witness, &TreeKind::Global { internal: true })
                    .unwrap_or_else(|err| panic!("{name} {}: {err}", model.qualified_name(s)));
                assert_eq!(induced_distribution(&g.witness, model.duration), g.target);
            }
            for l in 0..model.num_components(s) {
                for g in e.reducible_weak(s, l).generators {
                    let kind = TreeKind::Projected { component: l, reducible: true };
                    validate_tree(&model, &g.witness, &kind)
                        .unwrap_or_else(|err| panic!("{name} {} l={l}: {err}", model.qualified_name(s)));
                    assert_eq!(induced_distribution(&g.witness, model.duration), g.target);
                }
            }
        }
    }
}

#[test]
fn weak_targets_grow_with_bound() {
    for name in MA_FIXTURES {
        let model = fixture_model(name);
        let mut small = TreeEnumerator::new(&model, 4);
        let mut large = TreeEnumerator::new(&model, 8);
        for s in 0..model.num_states() {
            let a = small.weak_internal(s).targets();
            let b = large.weak_internal(s).targets();
            // Extreme points at the smaller bound stay reachable, so they
            // either remain vertices or become convex combinations; the
            // Dirac target is always a vertex.
            assert!(a.iter().any(|t| b.contains(t)), "{name} {}", model.qualified_name(s));
        }
    }
}

fn named_relations() -> Vec<(&'static str, ChiMa, CandidateRelation)> {
    ["fig1a.ma", "fig3.ma"]
        .iter()
        .map(|name| {
            let file = load(name);
            let model = chi_model(&file, ComposeOptions::default()).unwrap();
            let rel = resolve_relation(&model, &file.relations[0].pairs).unwrap();
            (*name, model, rel)
        })
        .collect()
}

#[test]
fn named_relations_closed_under_swap_scale_and_identity() {
    for (name, model, rel) in named_relations() {
        assert!(check_eds_bisim(&rel, &model, DEFAULT_BOUND).holds, "{name}");
        assert!(check_eds_bisim(&rel.swapped(), &model, DEFAULT_BOUND).holds, "{name} swapped");
        assert!(check_eds_bisim(&rel.scaled(&ratio(1, 3)), &model, DEFAULT_BOUND).holds, "{name} scaled");
        let with_id = rel.with_identity(0..model.num_states());
        assert!(check_eds_bisim(&with_id, &model, DEFAULT_BOUND).holds, "{name} with identity");
    }
}

#[test]
fn failing_relation_fails_in_both_directions() {
    let model = fixture_model("fig3.ma");
    let t0 = corpus::state(&model, "T@t0");
    let t1 = corpus::state(&model, "T@t1");
    let rel = CandidateRelation::dirac([(t0, t1)]);
    assert!(!check_eds_bisim(&rel, &model, DEFAULT_BOUND).holds);
    assert!(!check_eds_bisim(&rel.swapped(), &model, DEFAULT_BOUND).holds);
}

#[test]
fn identity_relation_holds_on_random_models() {
    let mut r = rng(21);
    for i in 0..30 {
        let m = random_ma(&mut r, "M", 2..=5, &["tau", "a", "b"], &[1, 2]);
        let (model, _) = union_of(&[&m], ComposeOptions::default());
        let id = CandidateRelation::dirac((0..model.num_states()).map(|s| (s, s)));
        assert!(check_weak_bisim(&id, &model, 8).holds, "sample {i}");
        assert!(check_eds_bisim(&id, &model, 8).holds, "sample {i}");
    }
}

#[test]
fn fixture_verdicts_stable_at_larger_bound() {
    let failed: Vec<_> = corpus::run_all(DEFAULT_BOUND + 4).into_iter().filter(|c| !c.passed()).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn normalization_is_idempotent() {
    let mut r = rng(22);
    for i in 0..100 {
        let t = random_tlts(&mut r, "T", 2..=6);
        let Ok(n) = normalize(&t) else { continue };
        assert!(is_normalized(&n), "sample {i}");
        assert_eq!(normalize(&n).unwrap(), n, "sample {i}");
    }
}

/// Replaces every delay `s -d-> u` by `s -d/2-> x -d/2-> u`.
fn split_delays(t: &Tlts) -> Tlts {
    let mut out = t.clone();
    let delays: Vec<(usize, Rational, usize)> = std::mem::take(&mut out.timed_trans);
    for (i, (s, d, u)) in delays.into_iter().enumerate() {
        let x = out.state(&format!("split{i}"));
        let half = d * ratio(1, 2);
        out.add_timed(s, half.clone(), x);
        out.add_timed(x, half, u);
    }
    out
}

#[test]
fn verdicts_invariant_under_delay_splitting() {
    for (name, timed, eds) in [("sec4_ctrex1.tlts", false, true), ("sec4_ctrex2.tlts", true, false)] {
        let t = &load(name).tltss[0];
        let split = split_delays(t);
        let (p, q) = (tlts_state(&split, "p"), tlts_state(&split, "q"));
        let n = normalize(&split).unwrap();
        let (np, nq) = (tlts_state(&n, "p"), tlts_state(&n, "q"));
        assert_eq!(timed_weak_bisim(np, nq, &n, DEFAULT_BOUND).holds, timed, "{name} timed");
        let out = eds_on_tlts(p, q, &split, DEFAULT_BOUND, MAX_PAIRS).unwrap();
        assert_eq!(out.verdict.holds, eds, "{name} eds");
    }
}
