//! Timed labeled transition systems with deterministic delays.
//!
//! Includes delay normalization, timed weak bisimilarity as a greatest
//! fixed point over state pairs, and the expected-delay-summing check run
//! on the χ-view of a TLTS, where durations add up instead of inverting
//! rates.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::bisim::{search, Failure, Kind, SearchOutcome, Side, Verdict};
use crate::composition::{ChiMa, CompositionError};
use crate::model::{Action, StateId, Tlts, Violation};
use crate::rational::{fmt_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimedError {
    #[error("invalid timed model: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("delay {delay} from {state} is not derivable from its shortest delay")]
    TimeAdditivity { state: String, delay: String },
    #[error(transparent)]
    Composition(#[from] CompositionError),
}

/// Brings a TLTS into normal form: positive delays only, one delay per
/// state, and delay chains through action-free intermediate states with a
/// single continuation fused into one transition. States are kept with
/// their indices; intermediates simply become unreachable.
pub fn normalize(t: &Tlts) -> Result<Tlts, TimedError> {
    let violations = t.validate();
    if !violations.is_empty() {
        return Err(TimedError::Invalid(violations));
    }
    let n = t.num_states();
    // Shortest positive delay per state; longer ones must follow from it.
    let mut next: Vec<Option<(Rational, StateId)>> = vec![None; n];
    for s in 0..n {
        let mut delays: Vec<(Rational, StateId)> = t
            .timed_from(s)
            .filter(|(d, _)| !d.is_zero())
            .map(|(d, x)| (d.clone(), x))
            .collect();
        delays.sort();
        next[s] = delays.first().cloned();
    }
    for s in 0..n {
        for (d, target) in t.timed_from(s).filter(|(d, _)| !d.is_zero()) {
            if !derivable(&next, s, d, target) {
                return Err(TimedError::TimeAdditivity {
                    state: t.states[s].clone(),
                    delay: fmt_rational(d),
                });
            }
        }
    }
    let action_free: Vec<bool> = (0..n).map(|s| t.actions_from(s).next().is_none()).collect();
    let fusable_raw: Vec<bool> = (0..n).map(|s| action_free[s] && next[s].is_some()).collect();
    // States on a cycle of fusable states are never fused through; this
    // keeps the result unique and normalization idempotent.
    let on_cycle: Vec<bool> = (0..n)
        .map(|s| {
            let mut x = s;
            for _ in 0..n {
                if !fusable_raw[x] {
                    return false;
                }
                x = next[x].as_ref().unwrap().1;
                if x == s {
                    return true;
                }
            }
            false
        })
        .collect();
    let fusable = |x: StateId| fusable_raw[x] && !on_cycle[x];

    let mut out = Tlts {
        name: t.name.clone(),
        states: t.states.clone(),
        initial: t.initial,
        action_trans: t.action_trans.clone(),
        timed_trans: Vec::new(),
    };
    for s in 0..n {
        if let Some((d, first)) = &next[s] {
            let mut total = d.clone();
            let mut cur = *first;
            while fusable(cur) && cur != s {
                let (dx, y) = next[cur].as_ref().unwrap();
                total += dx;
                cur = *y;
            }
            out.timed_trans.push((s, total, cur));
        }
    }
    Ok(out)
}

fn derivable(next: &[Option<(Rational, StateId)>], s: StateId, d: &Rational, target: StateId) -> bool {
    let mut x = s;
    let mut remaining = d.clone();
    while !remaining.is_zero() {
        match &next[x] {
            Some((dx, y)) if *dx <= remaining => {
                remaining -= dx;
                x = *y;
            }
            _ => return false,
        }
    }
    x == target
}

/// Whether a TLTS is already in normal form.
pub fn is_normalized(t: &Tlts) -> bool {
    normalize(t).map(|n| same_transitions(&n, t)).unwrap_or(false)
}

fn same_transitions(a: &Tlts, b: &Tlts) -> bool {
    let set = |t: &Tlts| -> BTreeSet<(StateId, Rational, StateId)> {
        t.timed_trans
            .iter()
            .filter(|(s, d, x)| !(d.is_zero() && s == x))
            .cloned()
            .collect()
    };
    set(a) == set(b) && a.action_trans == b.action_trans
}

/// Weak transition relations of a TLTS.
struct Weak<'t> {
    t: &'t Tlts,
    closure: Vec<BTreeSet<StateId>>,
    bound: usize,
}

impl<'t> Weak<'t> {
    fn new(t: &'t Tlts, bound: usize) -> Self {
        let n = t.num_states();
        let closure = (0..n)
            .map(|s| {
                let mut seen = BTreeSet::from([s]);
                let mut stack = vec![s];
                while let Some(x) = stack.pop() {
                    for (a, y) in t.actions_from(x) {
                        if a.is_tau() && seen.insert(y) {
                            stack.push(y);
                        }
                    }
                }
                seen
            })
            .collect();
        Weak { t, closure, bound }
    }

    fn close(&self, set: &BTreeSet<StateId>) -> BTreeSet<StateId> {
        set.iter().flat_map(|&x| self.closure[x].iter().copied()).collect()
    }

    /// `s ⇒â s'`.
    fn hat(&self, s: StateId, a: &Action) -> BTreeSet<StateId> {
        if a.is_tau() {
            return self.closure[s].clone();
        }
        let mid: BTreeSet<StateId> = self.closure[s]
            .iter()
            .flat_map(|&x| self.t.actions_from(x).filter(|(b, _)| *b == a).map(|(_, y)| y))
            .collect();
        self.close(&mid)
    }

    /// `s ⇒χ(d) s'`: at least one delay step, delays summing to `d`, τ
    /// steps in between.
    fn delay(&self, s: StateId, d: &Rational) -> BTreeSet<StateId> {
        let mut out = BTreeSet::new();
        let mut frontier: BTreeMap<StateId, BTreeSet<Rational>> = BTreeMap::new();
        for &x in &self.closure[s] {
            frontier.entry(x).or_default().insert(Rational::zero());
        }
        for _ in 0..self.bound {
            let mut next: BTreeMap<StateId, BTreeSet<Rational>> = BTreeMap::new();
            for (x, sums) in &frontier {
                for (dx, y) in self.t.timed_from(*x) {
                    if dx.is_zero() {
                        continue;
                    }
                    for acc in sums {
                        let total = acc + dx;
                        if total > *d {
                            continue;
                        }
                        for &z in &self.closure[y] {
                            if total == *d {
                                out.insert(z);
                            } else {
                                next.entry(z).or_default().insert(total.clone());
                            }
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        out
    }
}

/// One direction of the clauses for `(s1, s2)`: every move of `s1` is
/// matched by `s2`. Returns the first unmatched challenge.
fn forward(w: &Weak, rel: &BTreeSet<(StateId, StateId)>, s1: StateId, s2: StateId) -> Option<(u8, String)> {
    let t = w.t;
    for (a, x) in t.actions_from(s1) {
        if !w.hat(s2, a).iter().any(|&y| rel.contains(&(x, y))) {
            return Some((1, format!("{} -{}-> {}", t.states[s1], a, t.states[x])));
        }
    }
    for (d, x) in t.timed_from(s1) {
        if d.is_zero() {
            continue;
        }
        if !w.delay(s2, d).iter().any(|&y| rel.contains(&(x, y))) {
            return Some((2, format!("{} -{}-> {}", t.states[s1], fmt_rational(d), t.states[x])));
        }
    }
    None
}

/// Timed weak bisimilarity of two states: the largest symmetric relation
/// satisfying both clauses, with delay sequences searched up to `bound`
/// delay steps.
pub fn timed_weak_bisim(s1: StateId, s2: StateId, t: &Tlts, bound: usize) -> Verdict {
    let n = t.num_states();
    let w = Weak::new(t, bound);
    let mut rel: BTreeSet<(StateId, StateId)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    loop {
        let failing: Vec<(StateId, StateId)> = rel
            .iter()
            .copied()
            .filter(|&(a, b)| forward(&w, &rel, a, b).is_some() || forward(&w, &rel, b, a).is_some())
            .collect();
        if failing.is_empty() {
            break;
        }
        for (a, b) in failing {
            rel.remove(&(a, b));
            rel.remove(&(b, a));
        }
    }
    if rel.contains(&(s1, s2)) {
        return Verdict {
            holds: true,
            bound,
            failure: None,
            trace: Vec::new(),
            note: Some(format!("largest timed weak bisimulation has {} pairs", rel.len())),
        };
    }
    // Re-run the clauses against the full relation minus the final answer
    // to name the first challenge that cannot be matched.
    let mut with_pair = rel.clone();
    with_pair.insert((s1, s2));
    with_pair.insert((s2, s1));
    let (side, (condition, challenge)) = match forward(&w, &with_pair, s1, s2) {
        Some(c) => (Side::A, c),
        None => (
            Side::B,
            forward(&w, &with_pair, s2, s1).unwrap_or((0, "successor pairs not related".into())),
        ),
    };
    Verdict {
        holds: false,
        bound,
        failure: Some(Failure {
            pair_index: 0,
            left: t.states[s1].clone(),
            right: t.states[s2].clone(),
            side,
            condition,
            state: None,
            challenge,
            reason: "no weak transition reaches a related state".into(),
        }),
        trace: Vec::new(),
        note: None,
    }
}

/// Expected-delay-summing bisimilarity of two TLTS states, run on the
/// χ-view with additive durations. The TLTS is taken as given; delays are
/// not fused first.
pub fn eds_on_tlts(
    s1: StateId,
    s2: StateId,
    t: &Tlts,
    bound: usize,
    max_pairs: usize,
) -> Result<SearchOutcome, TimedError> {
    let violations = t.validate();
    if !violations.is_empty() {
        return Err(TimedError::Invalid(violations));
    }
    let model = ChiMa::of_tlts(t)?;
    Ok(search(Kind::Eds, &model, s1, s2, bound, max_pairs))
}
