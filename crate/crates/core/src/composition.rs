//! Parallel composition and the χ-view.
//!
//! [`compose`] builds the raw two-relation product of two MAs. [`ChiMa`] is
//! the explicit χ-view used by every checker: each state carries at most one
//! `χ(λ)` transition aggregating its timed behavior by the race policy, and
//! every global transition records the local moves of the components that
//! produced it.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::distributions::Subdistr;
use crate::model::{
    Action, ExtLabel, GlobalState, ModelError, SequentialMa, StateId, System, SystemExpr, Tlts,
};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComposeOptions {
    /// Emit `χ(0)` selfloops on τ-free states without timed transitions.
    /// Switching this off breaks congruence and exists for demonstration.
    pub generate_chi0_selfloops: bool,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        ComposeOptions {
            generate_chi0_selfloops: true,
        }
    }
}

/// How the parameter of a `χ` label turns into elapsed time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DurationMode {
    /// Exponential delays: `χ(λ)` takes `1/λ` time units on average.
    Reciprocal,
    /// Deterministic delays: `χ(t)` takes exactly `t` time units.
    Additive,
}

impl DurationMode {
    pub fn elapsed(&self, param: &Rational) -> Rational {
        match self {
            DurationMode::Reciprocal => {
                if param.is_zero() {
                    Rational::zero()
                } else {
                    param.recip()
                }
            }
            DurationMode::Additive => param.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompositionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("timed LTS {0} is not in normal form: state {1} has several delays")]
    SeveralDelays(String, String),
}

/// Raw parallel composition `m1 ||{sync} m2` over pair states. Pair
/// `(i, j)` gets index `i * |m2| + j` and the name `(s_i,t_j)`.
pub fn compose(
    m1: &SequentialMa,
    m2: &SequentialMa,
    sync: &BTreeSet<String>,
) -> Result<SequentialMa, CompositionError> {
    if sync.iter().any(|a| a == "tau" || a == "τ") {
        return Err(ModelError::TauInSyncSet.into());
    }
    let n2 = m2.num_states();
    let pair = |i: StateId, j: StateId| i * n2 + j;
    let mut out = SequentialMa::new(&format!("{}||{}", m1.name, m2.name));
    for a in &m1.states {
        for b in &m2.states {
            out.states.push(format!("({a},{b})"));
        }
    }
    out.initial = pair(m1.initial, m2.initial);
    let synced = |a: &Action| matches!(a, Action::Visible(x) if sync.contains(x));

    for s1 in 0..m1.num_states() {
        for s2 in 0..n2 {
            let src = pair(s1, s2);
            for t1 in m1.actions_from(s1) {
                if synced(&t1.action) {
                    for t2 in m2.actions_from(s2).filter(|t2| t2.action == t1.action) {
                        let target = t1.target.product(&t2.target).map_states(|&(i, j)| pair(i, j));
                        out.add_action(src, t1.action.clone(), target);
                    }
                } else {
                    let target = t1.target.map_states(|&i| pair(i, s2));
                    out.add_action(src, t1.action.clone(), target);
                }
            }
            for t2 in m2.actions_from(s2).filter(|t| !synced(&t.action)) {
                let target = t2.target.map_states(|&j| pair(s1, j));
                out.add_action(src, t2.action.clone(), target);
            }

            // Rates are aggregated per target pair, so two selfloops of rate
            // λ compose into a selfloop of rate λ + λ.
            let mut rates: BTreeMap<StateId, Rational> = BTreeMap::new();
            if !m2.has_tau(s2) {
                for t in m1.timed_from(s1) {
                    *rates.entry(pair(t.target, s2)).or_insert_with(Rational::zero) += &t.rate;
                }
            }
            if !m1.has_tau(s1) {
                for t in m2.timed_from(s2) {
                    *rates.entry(pair(s1, t.target)).or_insert_with(Rational::zero) += &t.rate;
                }
            }
            for (tgt, rate) in rates {
                out.add_timed(src, rate, tgt);
            }
        }
    }
    Ok(out)
}

/// The local `χ` move of a sequential MA at `s`, if any.
pub fn local_chi(
    m: &SequentialMa,
    s: StateId,
    opts: ComposeOptions,
) -> Option<(Rational, Subdistr<StateId>)> {
    if m.has_tau(s) {
        return None;
    }
    if m.has_timed(s) {
        let lambda = m.total_rate(s);
        if lambda.is_zero() {
            return Some((lambda, Subdistr::dirac(s)));
        }
        let mut d = Subdistr::empty();
        for t in m.timed_from(s) {
            d.accumulate(t.target, &t.rate / &lambda);
        }
        Some((lambda, d))
    } else if opts.generate_chi0_selfloops {
        Some((Rational::zero(), Subdistr::dirac(s)))
    } else {
        None
    }
}

/// One component's contribution to a global transition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LocalMove {
    pub component: usize,
    pub label: ExtLabel,
    pub target: Subdistr<StateId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChiTransition {
    pub label: ExtLabel,
    pub target: Subdistr<usize>,
    pub moves: Vec<LocalMove>,
}

/// Per-component local behavior in χ-view form.
#[derive(Debug, Clone)]
struct LocalView {
    actions: Vec<Vec<(Action, Subdistr<StateId>)>>,
    chi: Vec<Option<(Rational, Subdistr<StateId>)>>,
}

impl LocalView {
    fn of_ma(m: &SequentialMa, opts: ComposeOptions) -> Self {
        let n = m.num_states();
        LocalView {
            actions: (0..n)
                .map(|s| {
                    m.actions_from(s)
                        .map(|t| (t.action.clone(), t.target.clone()))
                        .collect()
                })
                .collect(),
            chi: (0..n).map(|s| local_chi(m, s, opts)).collect(),
        }
    }

    fn has_tau(&self, s: StateId) -> bool {
        self.actions[s].iter().any(|(a, _)| a.is_tau())
    }
}

/// A named unit inside a [`ChiMa`]: one sequential MA or one flattened
/// system.
#[derive(Debug, Clone)]
pub struct Unit {
    pub name: String,
    pub component_names: Vec<String>,
    pub local_names: Vec<Vec<String>>,
}

/// Explicit χ-view over global states. May hold several disjoint units so
/// that states of different systems can be compared.
#[derive(Debug, Clone)]
pub struct ChiMa {
    pub units: Vec<Unit>,
    pub duration: DurationMode,
    /// `(unit, local state vector)` per global state.
    pub states: Vec<(usize, GlobalState)>,
    pub trans: Vec<Vec<ChiTransition>>,
    index: HashMap<(usize, GlobalState), usize>,
}

impl ChiMa {
    /// Builds the χ-view of a system over the full product state space.
    pub fn of_system(sys: &System, opts: ComposeOptions) -> ChiMa {
        let views: Vec<LocalView> = sys
            .components
            .iter()
            .map(|m| LocalView::of_ma(m, opts))
            .collect();
        let sizes: Vec<usize> = sys.components.iter().map(|m| m.num_states()).collect();
        let states = product_states(&sizes);
        let index: HashMap<(usize, GlobalState), usize> = states
            .iter()
            .enumerate()
            .map(|(i, g)| ((0, g.clone()), i))
            .collect();
        let mut trans = Vec::with_capacity(states.len());
        for g in &states {
            let mut out = Vec::new();
            for (action, moves) in action_moves(&sys.tree, &views, g) {
                let target = apply_moves(g, &moves).map_states(|h| index[&(0, h.clone())]);
                out.push(ChiTransition {
                    label: ExtLabel::Act(action),
                    target,
                    moves,
                });
            }
            if let Some(t) = global_chi(&views, g) {
                let target = t.1.map_states(|h| index[&(0, h.clone())]);
                out.push(ChiTransition {
                    label: ExtLabel::Chi(t.0),
                    target,
                    moves: t.2,
                });
            }
            trans.push(out);
        }
        ChiMa {
            units: vec![Unit {
                name: sys.name.clone(),
                component_names: sys.components.iter().map(|m| m.name.clone()).collect(),
                local_names: sys.components.iter().map(|m| m.states.clone()).collect(),
            }],
            duration: DurationMode::Reciprocal,
            states: states.into_iter().map(|g| (0, g)).collect(),
            trans,
            index,
        }
    }

    /// χ-view of a timed LTS in normal form: one `χ(t)` per delayed state,
    /// no `χ(0)` selfloops, durations add up.
    pub fn of_tlts(t: &Tlts) -> Result<ChiMa, CompositionError> {
        let n = t.num_states();
        let mut trans = Vec::with_capacity(n);
        for s in 0..n {
            let mut out = Vec::new();
            for (a, tgt) in t.actions_from(s) {
                let local = Subdistr::dirac(tgt);
                out.push(ChiTransition {
                    label: ExtLabel::Act(a.clone()),
                    target: local.clone(),
                    moves: vec![LocalMove {
                        component: 0,
                        label: ExtLabel::Act(a.clone()),
                        target: local,
                    }],
                });
            }
            let delays: Vec<_> = t.timed_from(s).filter(|(d, _)| !d.is_zero()).collect();
            if delays.len() > 1 {
                return Err(CompositionError::SeveralDelays(
                    t.name.clone(),
                    t.states[s].clone(),
                ));
            }
            let tau = t.actions_from(s).any(|(a, _)| a.is_tau());
            if let (Some((d, tgt)), false) = (delays.first(), tau) {
                let local = Subdistr::dirac(*tgt);
                out.push(ChiTransition {
                    label: ExtLabel::Chi((*d).clone()),
                    target: local.clone(),
                    moves: vec![LocalMove {
                        component: 0,
                        label: ExtLabel::Chi((*d).clone()),
                        target: local,
                    }],
                });
            }
            trans.push(out);
        }
        let states: Vec<(usize, GlobalState)> = (0..n).map(|s| (0, GlobalState(vec![s]))).collect();
        let index = states.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Ok(ChiMa {
            units: vec![Unit {
                name: t.name.clone(),
                component_names: vec![t.name.clone()],
                local_names: vec![t.states.clone()],
            }],
            duration: DurationMode::Additive,
            states,
            trans,
            index,
        })
    }

    /// Disjoint union. All parts must share one duration mode.
    pub fn union(parts: Vec<ChiMa>) -> ChiMa {
        assert!(!parts.is_empty(), "union of no models");
        let duration = parts[0].duration;
        assert!(
            parts.iter().all(|p| p.duration == duration),
            "mixed duration modes"
        );
        let mut units = Vec::new();
        let mut states = Vec::new();
        let mut trans = Vec::new();
        for p in parts {
            let unit_offset = units.len();
            let state_offset = states.len();
            units.extend(p.units);
            states.extend(p.states.into_iter().map(|(u, g)| (u + unit_offset, g)));
            trans.extend(p.trans.into_iter().map(|ts| {
                ts.into_iter()
                    .map(|t| ChiTransition {
                        label: t.label,
                        target: t.target.map_states(|&s| s + state_offset),
                        moves: t.moves,
                    })
                    .collect::<Vec<_>>()
            }));
        }
        let index = states.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        ChiMa {
            units,
            duration,
            states,
            trans,
            index,
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn unit_of(&self, s: usize) -> usize {
        self.states[s].0
    }

    pub fn locals(&self, s: usize) -> &GlobalState {
        &self.states[s].1
    }

    pub fn num_components(&self, s: usize) -> usize {
        self.states[s].1 .0.len()
    }

    pub fn max_components(&self) -> usize {
        self.states.iter().map(|(_, g)| g.0.len()).max().unwrap_or(0)
    }

    pub fn lookup(&self, unit: usize, g: &GlobalState) -> Option<usize> {
        self.index.get(&(unit, g.clone())).copied()
    }

    /// `s` with component `l` replaced by local state `local`.
    pub fn successor(&self, s: usize, l: usize, local: StateId) -> usize {
        let (u, g) = &self.states[s];
        self.index[&(*u, g.with(l, local))]
    }

    pub fn state_name(&self, s: usize) -> String {
        let (u, g) = &self.states[s];
        let names = &self.units[*u].local_names;
        if g.0.len() == 1 {
            names[0][g.0[0]].clone()
        } else {
            let parts: Vec<&str> = g.0.iter().enumerate().map(|(k, &l)| names[k][l].as_str()).collect();
            format!("({})", parts.join(","))
        }
    }

    pub fn qualified_name(&self, s: usize) -> String {
        format!("{}@{}", self.units[self.unit_of(s)].name, self.state_name(s))
    }

    pub fn transitions(&self, s: usize) -> &[ChiTransition] {
        &self.trans[s]
    }

    pub fn has_tau(&self, s: usize) -> bool {
        self.trans[s].iter().any(|t| t.label.is_tau())
    }

    pub fn chi(&self, s: usize) -> Option<&ChiTransition> {
        self.trans[s].iter().find(|t| matches!(t.label, ExtLabel::Chi(_)))
    }

    /// Local transitions of component `l` at `s` that contribute to some
    /// global transition, i.e. are neither blocked by synchronization nor
    /// pre-empted by maximal progress.
    pub fn local_moves(&self, s: usize, l: usize) -> Vec<&LocalMove> {
        let mut out: Vec<&LocalMove> = Vec::new();
        for t in &self.trans[s] {
            for m in &t.moves {
                if m.component == l && !out.contains(&m) {
                    out.push(m);
                }
            }
        }
        out
    }

    /// Every state reachable from `s`, including `s`.
    pub fn reachable(&self, s: usize) -> Vec<usize> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![s];
        seen[s] = true;
        let mut out = Vec::new();
        while let Some(x) = stack.pop() {
            out.push(x);
            for t in &self.trans[x] {
                for &y in t.target.support() {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// The transition multiset as a comparable set of
    /// `(source, label, target)` triples.
    pub fn transition_set(&self) -> BTreeSet<(usize, ExtLabel, Subdistr<usize>)> {
        let mut set = BTreeSet::new();
        for (s, ts) in self.trans.iter().enumerate() {
            for t in ts {
                set.insert((s, t.label.clone(), t.target.clone()));
            }
        }
        set
    }
}

fn product_states(sizes: &[usize]) -> Vec<GlobalState> {
    let mut out = vec![GlobalState(Vec::new())];
    for &n in sizes {
        let mut next = Vec::with_capacity(out.len() * n);
        for g in &out {
            for s in 0..n {
                let mut v = g.0.clone();
                v.push(s);
                next.push(GlobalState(v));
            }
        }
        out = next;
    }
    out
}

fn action_moves(
    e: &SystemExpr,
    views: &[LocalView],
    g: &GlobalState,
) -> Vec<(Action, Vec<LocalMove>)> {
    match e {
        SystemExpr::Leaf(i) => views[*i].actions[g.0[*i]]
            .iter()
            .map(|(a, d)| {
                (
                    a.clone(),
                    vec![LocalMove {
                        component: *i,
                        label: ExtLabel::Act(a.clone()),
                        target: d.clone(),
                    }],
                )
            })
            .collect(),
        SystemExpr::Par(l, sync, r) => {
            let left = action_moves(l, views, g);
            let right = action_moves(r, views, g);
            let synced = |a: &Action| matches!(a, Action::Visible(x) if sync.contains(x));
            let mut out = Vec::new();
            for (a, ml) in &left {
                if synced(a) {
                    for (b, mr) in &right {
                        if a == b {
                            let mut m = ml.clone();
                            m.extend(mr.iter().cloned());
                            out.push((a.clone(), m));
                        }
                    }
                } else {
                    out.push((a.clone(), ml.clone()));
                }
            }
            for (b, mr) in right {
                if !synced(&b) {
                    out.push((b, mr));
                }
            }
            out
        }
    }
}

fn apply_moves(g: &GlobalState, moves: &[LocalMove]) -> Subdistr<GlobalState> {
    let mut cur = Subdistr::dirac(g.clone());
    for m in moves {
        let mut next = Subdistr::empty();
        for (h, p) in cur.iter() {
            for (&s, q) in m.target.iter() {
                next.accumulate(h.with(m.component, s), p * q);
            }
        }
        cur = next;
    }
    cur
}

/// Global `χ` of an n-ary product: present iff no component enables τ and
/// some component has a local `χ`; the rate is the sum of local rates and
/// the target the rate-weighted mixture of the one-component moves.
fn global_chi(
    views: &[LocalView],
    g: &GlobalState,
) -> Option<(Rational, Subdistr<GlobalState>, Vec<LocalMove>)> {
    if views.iter().enumerate().any(|(k, v)| v.has_tau(g.0[k])) {
        return None;
    }
    let parts: Vec<(usize, &(Rational, Subdistr<StateId>))> = views
        .iter()
        .enumerate()
        .filter_map(|(k, v)| v.chi[g.0[k]].as_ref().map(|c| (k, c)))
        .collect();
    if parts.is_empty() {
        return None;
    }
    let lambda = parts.iter().fold(Rational::zero(), |acc, (_, (r, _))| acc + r);
    let mut target = Subdistr::empty();
    if lambda.is_zero() {
        target.accumulate(g.clone(), Rational::one());
    } else {
        for (k, (r, d)) in &parts {
            let w = r / &lambda;
            for (&s, p) in d.iter() {
                target.accumulate(g.with(*k, s), &w * p);
            }
        }
    }
    let moves = parts
        .into_iter()
        .map(|(k, (r, d))| LocalMove {
            component: k,
            label: ExtLabel::Chi(r.clone()),
            target: d.clone(),
        })
        .collect();
    Some((lambda, target, moves))
}

/// χ-view of a single sequential MA.
pub fn chi_view(m: &SequentialMa, opts: ComposeOptions) -> ChiMa {
    ChiMa::of_system(&System::sequential(m.clone()), opts)
}

/// Checks that the χ-view of `m1 ||{sync} m2` coincides with the composed-χ
/// rules applied to the χ-views of the two operands.
pub fn chi_compose_check(
    m1: &SequentialMa,
    m2: &SequentialMa,
    sync: &BTreeSet<String>,
    opts: ComposeOptions,
) -> Result<bool, CompositionError> {
    let raw = compose(m1, m2, sync)?;
    let direct = chi_view(&raw, opts).transition_set();
    Ok(direct == composed_chi_rules(m1, m2, sync, opts))
}

fn composed_chi_rules(
    m1: &SequentialMa,
    m2: &SequentialMa,
    sync: &BTreeSet<String>,
    opts: ComposeOptions,
) -> BTreeSet<(usize, ExtLabel, Subdistr<usize>)> {
    let v1 = chi_view(m1, opts);
    let v2 = chi_view(m2, opts);
    let n2 = m2.num_states();
    let pair = |i: usize, j: usize| i * n2 + j;
    let synced = |l: &ExtLabel| matches!(l, ExtLabel::Act(Action::Visible(x)) if sync.contains(x));
    let mut out = BTreeSet::new();
    for s1 in 0..m1.num_states() {
        for s2 in 0..n2 {
            let src = pair(s1, s2);
            let acts1 = v1.transitions(s1).iter().filter(|t| !matches!(t.label, ExtLabel::Chi(_)));
            for t1 in acts1 {
                if synced(&t1.label) {
                    for t2 in v2.transitions(s2).iter().filter(|t| t.label == t1.label) {
                        let d = t1.target.product(&t2.target).map_states(|&(i, j)| pair(i, j));
                        out.insert((src, t1.label.clone(), d));
                    }
                } else {
                    out.insert((src, t1.label.clone(), t1.target.map_states(|&i| pair(i, s2))));
                }
            }
            let acts2 = v2.transitions(s2).iter().filter(|t| !matches!(t.label, ExtLabel::Chi(_)));
            for t2 in acts2.filter(|t| !synced(&t.label)) {
                out.insert((src, t2.label.clone(), t2.target.map_states(|&j| pair(s1, j))));
            }
            match (v1.chi(s1), v2.chi(s2)) {
                (Some(c1), Some(c2)) => {
                    let mu = c1.label.chi_param().unwrap();
                    let gamma = c2.label.chi_param().unwrap();
                    let lambda = mu + gamma;
                    let d = if lambda.is_zero() {
                        Subdistr::dirac(src)
                    } else {
                        let left = c1.target.map_states(|&i| pair(i, s2)).scale_unchecked(&(mu / &lambda));
                        let right = c2.target.map_states(|&j| pair(s1, j)).scale_unchecked(&(gamma / &lambda));
                        left.add_unchecked(&right)
                    };
                    out.insert((src, ExtLabel::Chi(lambda), d));
                }
                (Some(c1), None) if !v2.has_tau(s2) => {
                    out.insert((src, c1.label.clone(), c1.target.map_states(|&i| pair(i, s2))));
                }
                (None, Some(c2)) if !v1.has_tau(s1) => {
                    out.insert((src, c2.label.clone(), c2.target.map_states(|&j| pair(s1, j))));
                }
                _ => {}
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn ma(name: &str, build: impl FnOnce(&mut SequentialMa)) -> SequentialMa {
        let mut m = SequentialMa::new(name);
        build(&mut m);
        m
    }

    #[test]
    fn selfloops_sum_rates() {
        let m1 = ma("A", |m| {
            let s = m.state("s1");
            m.add_timed(s, int(3), s);
        });
        let m2 = ma("B", |m| {
            let s = m.state("s2");
            m.add_timed(s, int(3), s);
        });
        let c = compose(&m1, &m2, &BTreeSet::new()).unwrap();
        assert_eq!(c.timed_trans.len(), 1);
        assert_eq!(c.timed_trans[0].rate, int(6));
        assert_eq!(c.timed_trans[0].source, c.timed_trans[0].target);
    }

    #[test]
    fn synchronized_action_takes_product() {
        let m1 = ma("A", |m| {
            let s = m.state("s1");
            let u = m.state("u");
            let v = m.state("v");
            m.add_action(
                s,
                Action::visible("a"),
                Subdistr::from_pairs([(u, ratio(1, 2)), (v, ratio(1, 2))]).unwrap(),
            );
        });
        let m2 = ma("B", |m| {
            let s = m.state("s2");
            let w = m.state("w");
            m.add_action(s, Action::visible("a"), Subdistr::dirac(w));
        });
        let sync: BTreeSet<String> = ["a".to_string()].into_iter().collect();
        let c = compose(&m1, &m2, &sync).unwrap();
        let src = c.state_index("(s1,s2)").unwrap();
        let ts: Vec<_> = c.actions_from(src).collect();
        assert_eq!(ts.len(), 1);
        let uw = c.state_index("(u,w)").unwrap();
        let vw = c.state_index("(v,w)").unwrap();
        assert_eq!(
            ts[0].target,
            Subdistr::from_pairs([(uw, ratio(1, 2)), (vw, ratio(1, 2))]).unwrap()
        );
    }

    #[test]
    fn tau_blocks_partner_time() {
        let m1 = ma("A", |m| {
            let s = m.state("s1");
            let t = m.state("t1");
            m.add_action(s, Action::Tau, Subdistr::dirac(t));
        });
        let m2 = ma("B", |m| {
            let s = m.state("s2");
            let t = m.state("t2");
            m.add_timed(s, int(1), t);
        });
        let c = compose(&m1, &m2, &BTreeSet::new()).unwrap();
        let src = c.state_index("(s1,s2)").unwrap();
        assert!(c.timed_from(src).next().is_none());
        let after = c.state_index("(t1,s2)").unwrap();
        assert_eq!(c.timed_from(after).count(), 1);
    }

    #[test]
    fn tau_in_sync_set_is_an_error() {
        let m = ma("A", |m| {
            m.state("s");
        });
        let sync: BTreeSet<String> = ["tau".to_string()].into_iter().collect();
        assert!(compose(&m, &m, &sync).is_err());
    }

    #[test]
    fn chi_view_race_policy() {
        let m = ma("A", |m| {
            let s = m.state("s");
            let u = m.state("u");
            let v = m.state("v");
            m.add_timed(s, int(2), u);
            m.add_timed(s, int(3), v);
        });
        let cv = chi_view(&m, ComposeOptions::default());
        let c = cv.chi(0).unwrap();
        assert_eq!(c.label, ExtLabel::Chi(int(5)));
        assert_eq!(
            c.target,
            Subdistr::from_pairs([(1, ratio(2, 5)), (2, ratio(3, 5))]).unwrap()
        );
        // deadlocked u gets a χ(0) selfloop
        let c = cv.chi(1).unwrap();
        assert_eq!(c.label, ExtLabel::Chi(int(0)));
        assert_eq!(c.target, Subdistr::dirac(1));
        let off = chi_view(&m, ComposeOptions { generate_chi0_selfloops: false });
        assert!(off.chi(1).is_none());
    }

    #[test]
    fn tau_state_has_no_chi() {
        let m = ma("A", |m| {
            let s = m.state("s");
            let t = m.state("t");
            m.add_action(s, Action::Tau, Subdistr::dirac(t));
        });
        let cv = chi_view(&m, ComposeOptions::default());
        assert!(cv.chi(0).is_none());
        assert!(cv.chi(1).is_some());
    }

    #[test]
    fn deadlocked_pair_gets_chi0() {
        let a = ma("A", |m| {
            m.state("x");
        });
        let b = ma("B", |m| {
            m.state("y");
        });
        assert!(chi_compose_check(&a, &b, &BTreeSet::new(), ComposeOptions::default()).unwrap());
        let c = chi_view(&compose(&a, &b, &BTreeSet::new()).unwrap(), ComposeOptions::default());
        assert_eq!(c.chi(0).unwrap().label, ExtLabel::Chi(int(0)));
    }

    #[test]
    fn nary_builder_matches_binary_route() {
        let a = ma("A", |m| {
            let s = m.state("s");
            let t = m.state("t");
            m.add_timed(s, int(2), t);
            m.add_timed(s, int(1), s);
            m.add_action(t, Action::visible("a"), Subdistr::dirac(s));
        });
        let b = ma("B", |m| {
            let s = m.state("p");
            let t = m.state("q");
            m.add_action(s, Action::visible("a"), Subdistr::dirac(t));
            m.add_timed(t, int(3), s);
        });
        let sync: BTreeSet<String> = ["a".to_string()].into_iter().collect();
        for opts in [ComposeOptions::default(), ComposeOptions { generate_chi0_selfloops: false }] {
            let sys = System::par("S", System::sequential(a.clone()), sync.clone(), System::sequential(b.clone())).unwrap();
            let nary = ChiMa::of_system(&sys, opts).transition_set();
            let binary = chi_view(&compose(&a, &b, &sync).unwrap(), opts).transition_set();
            assert_eq!(nary, binary);
            assert!(chi_compose_check(&a, &b, &sync, opts).unwrap());
        }
    }

    #[test]
    fn local_moves_respect_sync_and_maximal_progress() {
        let a = ma("A", |m| {
            let s = m.state("s");
            let t = m.state("t");
            m.add_action(s, Action::visible("b"), Subdistr::dirac(t));
            m.add_timed(t, int(1), s);
        });
        let b = ma("B", |m| {
            let p = m.state("p");
            let q = m.state("q");
            m.add_action(p, Action::Tau, Subdistr::dirac(q));
        });
        let sync: BTreeSet<String> = ["b".to_string()].into_iter().collect();
        let sys = System::par("S", System::sequential(a), sync, System::sequential(b)).unwrap();
        let cv = ChiMa::of_system(&sys, ComposeOptions::default());
        let sp = cv.lookup(0, &GlobalState(vec![0, 0])).unwrap();
        // b is synchronized but B never offers it
        assert!(cv.local_moves(sp, 0).is_empty());
        // at (t,p) B's τ pre-empts A's timed move
        let tp = cv.lookup(0, &GlobalState(vec![1, 0])).unwrap();
        assert!(cv.local_moves(tp, 0).is_empty());
        let tq = cv.lookup(0, &GlobalState(vec![1, 1])).unwrap();
        assert_eq!(cv.local_moves(tq, 0).len(), 1);
    }
}
