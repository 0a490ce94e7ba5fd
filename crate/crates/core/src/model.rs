//! Explicit-state Markov automata, timed LTSs and parallel systems.
//!
//! Component indices of a [`System`] are assigned to the leaves of its
//! composition tree from left to right, starting at 0 (the CLI and
//! diagnostics print them 1-based). Nested compositions are therefore
//! indexed flat.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::distributions::Subdistr;
use crate::rational::{fmt_rational, Rational};

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Tau,
    Visible(String),
}

impl Action {
    pub fn visible(name: &str) -> Self {
        Action::Visible(name.to_string())
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Action::Tau)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tau => write!(f, "tau"),
            Action::Visible(a) => write!(f, "{a}"),
        }
    }
}

/// Transition labels of the χ-view: actions plus `χ(λ)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtLabel {
    Act(Action),
    Chi(Rational),
}

impl ExtLabel {
    pub fn tau() -> Self {
        ExtLabel::Act(Action::Tau)
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, ExtLabel::Act(Action::Tau))
    }

    pub fn is_visible(&self) -> bool {
        matches!(self, ExtLabel::Act(Action::Visible(_)))
    }

    pub fn chi_param(&self) -> Option<&Rational> {
        match self {
            ExtLabel::Chi(x) => Some(x),
            _ => None,
        }
    }
}

impl fmt::Display for ExtLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtLabel::Act(a) => write!(f, "{a}"),
            ExtLabel::Chi(x) => write!(f, "chi({})", fmt_rational(x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionTransition {
    pub source: StateId,
    pub action: Action,
    pub target: Subdistr<StateId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedTransition {
    pub source: StateId,
    pub rate: Rational,
    pub target: StateId,
}

/// A sequential Markov automaton with named states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequentialMa {
    pub name: String,
    pub states: Vec<String>,
    pub initial: StateId,
    pub action_trans: Vec<ActionTransition>,
    pub timed_trans: Vec<TimedTransition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    MaximalProgress { state: String },
    ZeroSpeed { state: String, target: String },
    NotFullDistribution { state: String, action: String, size: String },
    NegativeRate { state: String },
    ZeroDelay { state: String, target: String },
    TimeDeterminism { state: String, delay: String },
    UnknownState { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MaximalProgress { state } => write!(
                f,
                "maximal progress violated at {state}: tau transition alongside timed transitions"
            ),
            Violation::ZeroSpeed { state, target } => write!(
                f,
                "zero speed violated at {state}: rate-0 transition to {target} is not a selfloop"
            ),
            Violation::NotFullDistribution {
                state,
                action,
                size,
            } => write!(
                f,
                "transition {state} -{action}-> has target of size {size}, expected a full distribution"
            ),
            Violation::NegativeRate { state } => write!(f, "negative rate at {state}"),
            Violation::ZeroDelay { state, target } => write!(
                f,
                "zero delay violated at {state}: delay-0 transition to {target} is not a selfloop"
            ),
            Violation::TimeDeterminism { state, delay } => write!(
                f,
                "time determinism violated at {state}: several targets for delay {delay}"
            ),
            Violation::UnknownState { index } => write!(f, "reference to unknown state #{index}"),
        }
    }
}

impl SequentialMa {
    pub fn new(name: &str) -> Self {
        SequentialMa {
            name: name.to_string(),
            states: Vec::new(),
            initial: 0,
            action_trans: Vec::new(),
            timed_trans: Vec::new(),
        }
    }

    /// Returns the index of `name`, adding the state if it is new.
    pub fn state(&mut self, name: &str) -> StateId {
        match self.state_index(name) {
            Some(i) => i,
            None => {
                self.states.push(name.to_string());
                self.states.len() - 1
            }
        }
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn add_action(&mut self, source: StateId, action: Action, target: Subdistr<StateId>) {
        self.action_trans.push(ActionTransition {
            source,
            action,
            target,
        });
    }

    pub fn add_timed(&mut self, source: StateId, rate: Rational, target: StateId) {
        self.timed_trans.push(TimedTransition {
            source,
            rate,
            target,
        });
    }

    pub fn actions(&self) -> BTreeSet<Action> {
        let mut acts: BTreeSet<Action> = self.action_trans.iter().map(|t| t.action.clone()).collect();
        acts.insert(Action::Tau);
        acts
    }

    pub fn actions_from(&self, s: StateId) -> impl Iterator<Item = &ActionTransition> + '_ {
        self.action_trans.iter().filter(move |t| t.source == s)
    }

    pub fn timed_from(&self, s: StateId) -> impl Iterator<Item = &TimedTransition> + '_ {
        self.timed_trans.iter().filter(move |t| t.source == s)
    }

    pub fn has_tau(&self, s: StateId) -> bool {
        self.actions_from(s).any(|t| t.action.is_tau())
    }

    pub fn has_timed(&self, s: StateId) -> bool {
        self.timed_from(s).next().is_some()
    }

    pub fn total_rate(&self, s: StateId) -> Rational {
        self.timed_from(s).fold(Rational::zero(), |acc, t| acc + &t.rate)
    }

    /// Checks the structural side conditions of a Markov automaton and
    /// returns every violation found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.states.len();
        let name = |s: StateId| self.states.get(s).cloned().unwrap_or_else(|| format!("#{s}"));
        if self.initial >= n {
            out.push(Violation::UnknownState {
                index: self.initial,
            });
        }
        for t in &self.action_trans {
            if t.source >= n {
                out.push(Violation::UnknownState { index: t.source });
            }
            if let Some(&bad) = t.target.support().find(|&&s| s >= n) {
                out.push(Violation::UnknownState { index: bad });
            }
            if !t.target.size().is_one() {
                out.push(Violation::NotFullDistribution {
                    state: name(t.source),
                    action: t.action.to_string(),
                    size: fmt_rational(&t.target.size()),
                });
            }
        }
        for t in &self.timed_trans {
            if t.source >= n || t.target >= n {
                out.push(Violation::UnknownState {
                    index: t.source.max(t.target),
                });
                continue;
            }
            if t.rate < Rational::zero() {
                out.push(Violation::NegativeRate {
                    state: name(t.source),
                });
            }
            if t.rate.is_zero() && t.target != t.source {
                out.push(Violation::ZeroSpeed {
                    state: name(t.source),
                    target: name(t.target),
                });
            }
        }
        // Speed boundedness holds for finite transition sets; the total
        // rate is still computed so that a malformed rate surfaces above.
        for s in 0..n {
            if self.has_tau(s) && self.has_timed(s) {
                out.push(Violation::MaximalProgress { state: name(s) });
            }
        }
        out
    }
}

/// A timed labeled transition system with deterministic delays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tlts {
    pub name: String,
    pub states: Vec<String>,
    pub initial: StateId,
    pub action_trans: Vec<(StateId, Action, StateId)>,
    pub timed_trans: Vec<(StateId, Rational, StateId)>,
}

impl Tlts {
    pub fn new(name: &str) -> Self {
        Tlts {
            name: name.to_string(),
            states: Vec::new(),
            initial: 0,
            action_trans: Vec::new(),
            timed_trans: Vec::new(),
        }
    }

    pub fn state(&mut self, name: &str) -> StateId {
        match self.state_index(name) {
            Some(i) => i,
            None => {
                self.states.push(name.to_string());
                self.states.len() - 1
            }
        }
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn add_action(&mut self, source: StateId, action: Action, target: StateId) {
        self.action_trans.push((source, action, target));
    }

    pub fn add_timed(&mut self, source: StateId, delay: Rational, target: StateId) {
        self.timed_trans.push((source, delay, target));
    }

    pub fn actions_from(&self, s: StateId) -> impl Iterator<Item = (&Action, StateId)> + '_ {
        self.action_trans
            .iter()
            .filter(move |t| t.0 == s)
            .map(|t| (&t.1, t.2))
    }

    pub fn timed_from(&self, s: StateId) -> impl Iterator<Item = (&Rational, StateId)> + '_ {
        self.timed_trans
            .iter()
            .filter(move |t| t.0 == s)
            .map(|t| (&t.1, t.2))
    }

    /// Checks zero delay, time determinism and maximal progress. Time
    /// additivity is a closure property and is handled by normalization.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.states.len();
        for &(s, _, t) in &self.action_trans {
            if s >= n || t >= n {
                out.push(Violation::UnknownState { index: s.max(t) });
            }
        }
        let mut seen: BTreeMap<(StateId, Rational), StateId> = BTreeMap::new();
        for (s, d, t) in &self.timed_trans {
            if *s >= n || *t >= n {
                out.push(Violation::UnknownState { index: (*s).max(*t) });
                continue;
            }
            if d.is_zero() && s != t {
                out.push(Violation::ZeroDelay {
                    state: self.states[*s].clone(),
                    target: self.states[*t].clone(),
                });
            }
            if let Some(prev) = seen.insert((*s, d.clone()), *t) {
                if prev != *t {
                    out.push(Violation::TimeDeterminism {
                        state: self.states[*s].clone(),
                        delay: fmt_rational(d),
                    });
                }
            }
        }
        for s in 0..n {
            let tau = self.actions_from(s).any(|(a, _)| a.is_tau());
            let timed = self.timed_from(s).any(|(d, _)| !d.is_zero());
            if tau && timed {
                out.push(Violation::MaximalProgress {
                    state: self.states[s].clone(),
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("tau not permitted in synchronization set")]
    TauInSyncSet,
}

/// Composition tree of a parallel system. Leaves carry the flat component
/// index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SystemExpr {
    Leaf(usize),
    Par(Box<SystemExpr>, BTreeSet<String>, Box<SystemExpr>),
}

/// A parallel composition `M1 ||{A} M2 ...` of sequential MAs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    pub name: String,
    pub components: Vec<SequentialMa>,
    pub tree: SystemExpr,
}

impl System {
    pub fn sequential(ma: SequentialMa) -> Self {
        System {
            name: ma.name.clone(),
            components: vec![ma],
            tree: SystemExpr::Leaf(0),
        }
    }

    /// `left ||{sync} right`; component indices of `right` are shifted past
    /// those of `left`.
    pub fn par(
        name: &str,
        left: System,
        sync: BTreeSet<String>,
        right: System,
    ) -> Result<System, ModelError> {
        if sync.iter().any(|a| a == "tau" || a == "τ") {
            return Err(ModelError::TauInSyncSet);
        }
        let offset = left.components.len();
        let mut components = left.components;
        components.extend(right.components);
        Ok(System {
            name: name.to_string(),
            components,
            tree: SystemExpr::Par(
                Box::new(left.tree),
                sync,
                Box::new(shift(right.tree, offset)),
            ),
        })
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn flatten(&self) -> Flattening {
        let mut order = Vec::new();
        leaves(&self.tree, &mut order);
        Flattening {
            n: order.len(),
            names: order
                .iter()
                .map(|&i| self.components[i].name.clone())
                .collect(),
        }
    }

    pub fn initial(&self) -> GlobalState {
        GlobalState(self.components.iter().map(|c| c.initial).collect())
    }
}

fn shift(e: SystemExpr, offset: usize) -> SystemExpr {
    match e {
        SystemExpr::Leaf(i) => SystemExpr::Leaf(i + offset),
        SystemExpr::Par(l, a, r) => {
            SystemExpr::Par(Box::new(shift(*l, offset)), a, Box::new(shift(*r, offset)))
        }
    }
}

fn leaves(e: &SystemExpr, out: &mut Vec<usize>) {
    match e {
        SystemExpr::Leaf(i) => out.push(*i),
        SystemExpr::Par(l, _, r) => {
            leaves(l, out);
            leaves(r, out);
        }
    }
}

/// Flat component numbering of a system: component `i` is `names[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flattening {
    pub n: usize,
    pub names: Vec<String>,
}

/// A global state: one local state per flat component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalState(pub Vec<StateId>);

impl GlobalState {
    pub fn with(&self, component: usize, local: StateId) -> GlobalState {
        let mut v = self.0.clone();
        v[component] = local;
        GlobalState(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn chain(name: &str) -> SequentialMa {
        let mut m = SequentialMa::new(name);
        let s = m.state("s");
        let t = m.state("t");
        m.add_action(s, Action::visible("a"), Subdistr::dirac(t));
        m
    }

    #[test]
    fn maximal_progress_violation() {
        let mut m = SequentialMa::new("m");
        let s = m.state("s");
        let t = m.state("t");
        let u = m.state("u");
        m.add_action(s, Action::Tau, Subdistr::dirac(t));
        m.add_timed(s, int(1), u);
        assert_eq!(
            m.validate(),
            vec![Violation::MaximalProgress { state: "s".into() }]
        );
        assert_eq!(m.validate(), m.validate());
    }

    #[test]
    fn zero_speed_selfloop_allowed() {
        let mut m = SequentialMa::new("m");
        let s = m.state("s");
        m.add_timed(s, int(0), s);
        assert!(m.validate().is_empty());
        let t = m.state("t");
        m.add_timed(s, int(0), t);
        assert!(matches!(m.validate()[0], Violation::ZeroSpeed { .. }));
    }

    #[test]
    fn partial_target_rejected() {
        let mut m = SequentialMa::new("m");
        let s = m.state("s");
        m.add_action(
            s,
            Action::visible("a"),
            Subdistr::dirac(s).scale(&crate::rational::ratio(1, 2)).unwrap(),
        );
        assert!(matches!(m.validate()[0], Violation::NotFullDistribution { .. }));
    }

    #[test]
    fn flatten_numbering() {
        let one = System::sequential(chain("M1"));
        assert_eq!(one.flatten().n, 1);

        let two = System::par("S", System::sequential(chain("M1")), BTreeSet::new(), System::sequential(chain("M2"))).unwrap();
        let f = two.flatten();
        assert_eq!(f.n, 2);
        assert_eq!(f.names, vec!["M1".to_string(), "M2".to_string()]);

        let three = System::par("T", two.clone(), BTreeSet::new(), System::sequential(chain("M3"))).unwrap();
        assert_eq!(three.flatten().n, 3);
        assert_eq!(three.flatten(), three.flatten());
        assert_eq!(three.flatten().names[2], "M3");
    }

    #[test]
    fn tau_sync_rejected() {
        let sync: BTreeSet<String> = ["tau".to_string()].into_iter().collect();
        assert_eq!(
            System::par("S", System::sequential(chain("A")), sync, System::sequential(chain("B"))),
            Err(ModelError::TauInSyncSet)
        );
    }

    #[test]
    fn tlts_validation() {
        let mut t = Tlts::new("t");
        let p = t.state("p");
        let q = t.state("q");
        let r = t.state("r");
        t.add_timed(p, int(1), q);
        t.add_timed(p, int(1), r);
        t.add_action(q, Action::Tau, r);
        t.add_timed(q, int(2), r);
        let v = t.validate();
        assert!(v.contains(&Violation::TimeDeterminism { state: "p".into(), delay: "1".into() }));
        assert!(v.contains(&Violation::MaximalProgress { state: "q".into() }));
    }
}
