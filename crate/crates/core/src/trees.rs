//! Transition trees and the weak transition relations built on them.
//!
//! Trees are enumerated up to a depth bound. For each `(state, depth,
//! phase)` the enumerator keeps the set of distinct distributions induced
//! by some tree, together with one witness tree per distribution. Because
//! combined transitions only depend on the convex hull of these sets, large
//! sets are pruned to their extreme points.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::composition::{ChiMa, DurationMode};
use crate::distributions::Subdistr;
use crate::lp::{convex_combination, Feasibility};
use crate::model::ExtLabel;
use crate::rational::{fmt_rational, Rational};

/// Default depth bound for tree enumeration.
pub const DEFAULT_BOUND: usize = 16;

/// Generator sets larger than this are reduced to their extreme points.
const PRUNE_THRESHOLD: usize = 8;

/// A distribution split by the (expected) duration of the path that
/// reaches each leaf.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DurationIndexedDistr {
    parts: BTreeMap<Rational, Subdistr<usize>>,
}

impl DurationIndexedDistr {
    pub fn at(duration: Rational, d: Subdistr<usize>) -> Self {
        let mut parts = BTreeMap::new();
        if !d.is_empty() {
            parts.insert(duration, d);
        }
        DurationIndexedDistr { parts }
    }

    pub fn parts(&self) -> &BTreeMap<Rational, Subdistr<usize>> {
        &self.parts
    }

    pub fn part(&self, t: &Rational) -> Option<&Subdistr<usize>> {
        self.parts.get(t)
    }

    pub fn durations(&self) -> impl Iterator<Item = &Rational> + '_ {
        self.parts.keys()
    }

    /// `⊕_t Υ^t`.
    pub fn flatten(&self) -> Subdistr<usize> {
        let mut out = Subdistr::empty();
        for d in self.parts.values() {
            out = out.add_unchecked(d);
        }
        out
    }

    pub fn size(&self) -> Rational {
        self.parts.values().fold(Rational::zero(), |acc, d| acc + d.size())
    }

    fn scaled_shifted(&self, p: &Rational, dt: &Rational) -> Self {
        DurationIndexedDistr {
            parts: self
                .parts
                .iter()
                .map(|(t, d)| (t + dt, d.scale_unchecked(p)))
                .collect(),
        }
    }

    fn merge(&mut self, other: &Self) {
        for (t, d) in &other.parts {
            let e = self.parts.entry(t.clone()).or_default();
            *e = e.add_unchecked(d);
        }
    }

    /// Sparse coordinates `(duration, state) -> probability`.
    pub fn coordinates(&self) -> BTreeMap<(Rational, usize), Rational> {
        let mut out = BTreeMap::new();
        for (t, d) in &self.parts {
            for (&s, p) in d.iter() {
                out.insert((t.clone(), s), p.clone());
            }
        }
        out
    }
}

impl fmt::Debug for DurationIndexedDistr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.parts.iter().map(|(t, d)| (fmt_rational(t), d)))
            .finish()
    }
}

/// A transition tree node in relative form: each child edge carries the
/// branching probability of the chosen move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    pub state: usize,
    pub act: Option<ExtLabel>,
    /// Component whose local move was taken, for projected trees.
    pub component: Option<usize>,
    pub children: Vec<(Rational, Arc<Tree>)>,
}

impl Tree {
    pub fn leaf(state: usize) -> Arc<Tree> {
        Arc::new(Tree {
            state,
            act: None,
            component: None,
            children: Vec::new(),
        })
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|(_, c)| c.depth()).max().unwrap_or(0)
    }

    /// Absolute labels: `Prob` as path probability, `Expd` as accumulated
    /// duration.
    pub fn labeled(&self, mode: DurationMode) -> LabeledNode {
        fn go(t: &Tree, prob: Rational, expd: Rational, mode: DurationMode) -> LabeledNode {
            let dt = match &t.act {
                Some(ExtLabel::Chi(x)) => mode.elapsed(x),
                _ => Rational::zero(),
            };
            LabeledNode {
                sta: t.state,
                prob: prob.clone(),
                expd: expd.clone(),
                act: t.act.clone(),
                component: t.component,
                children: t
                    .children
                    .iter()
                    .map(|(p, c)| go(c, &prob * p, &expd + &dt, mode))
                    .collect(),
            }
        }
        go(self, Rational::one(), Rational::zero(), mode)
    }
}

/// A tree node labeled with state, probability, expected duration and the
/// action chosen to proceed (`None` at leaves).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledNode {
    pub sta: usize,
    pub prob: Rational,
    pub expd: Rational,
    pub act: Option<ExtLabel>,
    pub component: Option<usize>,
    pub children: Vec<LabeledNode>,
}

impl LabeledNode {
    pub fn leaves(&self) -> Vec<&LabeledNode> {
        if self.children.is_empty() {
            vec![self]
        } else {
            self.children.iter().flat_map(|c| c.leaves()).collect()
        }
    }

    /// Plain-text indented rendering for diagnostics.
    pub fn render(&self, model: &ChiMa) -> String {
        let mut out = String::new();
        self.render_into(model, 0, &mut out);
        out
    }

    fn render_into(&self, model: &ChiMa, indent: usize, out: &mut String) {
        let act = match &self.act {
            Some(a) => a.to_string(),
            None => "⊥".to_string(),
        };
        let _ = writeln!(
            out,
            "{:indent$}{} p={} t={} {}",
            "",
            model.state_name(self.sta),
            fmt_rational(&self.prob),
            fmt_rational(&self.expd),
            act,
            indent = indent * 2
        );
        for c in &self.children {
            c.render_into(model, indent + 1, out);
        }
    }

    /// Nested-array JSON form: `[state, prob, expd, act, [children...]]`.
    pub fn to_json(&self, model: &ChiMa) -> serde_json::Value {
        serde_json::json!([
            model.state_name(self.sta),
            fmt_rational(&self.prob),
            fmt_rational(&self.expd),
            self.act.as_ref().map(|a| a.to_string()),
            self.children.iter().map(|c| c.to_json(model)).collect::<Vec<_>>(),
        ])
    }
}

/// Distribution induced by a tree on its leaves, split by leaf duration.
pub fn induced_distribution(tree: &Tree, mode: DurationMode) -> DurationIndexedDistr {
    let labeled = tree.labeled(mode);
    let mut out = DurationIndexedDistr::default();
    for leaf in labeled.leaves() {
        out.merge(&DurationIndexedDistr::at(
            leaf.expd.clone(),
            Subdistr::dirac(leaf.sta).scale_unchecked(&leaf.prob),
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub target: DurationIndexedDistr,
    pub witness: Arc<Tree>,
}

/// Which weak relation a generator set belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum WeakLabel {
    Internal,
    Action(String),
    ChiReducible,
}

#[derive(Debug, Clone)]
pub struct WeakTargetSet {
    pub label: WeakLabel,
    pub component: Option<usize>,
    pub bound: usize,
    pub generators: Vec<Generator>,
}

impl WeakTargetSet {
    pub fn targets(&self) -> Vec<Subdistr<usize>> {
        self.generators.iter().map(|g| g.target.flatten()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// Enumeration phase: which tree shapes are still admissible below a node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Phase {
    /// Global τ moves only; stopping allowed.
    Internal,
    /// Global τ moves until exactly one `α` (or at least one τ when `α = τ`).
    Before(ExtLabel),
    /// Local τ moves of component `ℓ`.
    LocalInternal(usize),
    /// Local τ moves of `ℓ` around exactly one local `χ(λ)`.
    LocalBefore(usize, Rational),
    /// Reducible `ℓ`-projected trees; the flag records whether a `χ` has
    /// been taken on the current path.
    Reducible(usize, bool),
}

struct Step {
    label: ExtLabel,
    component: Option<usize>,
    branches: Vec<(Rational, usize)>,
    elapsed: Rational,
    next: Phase,
}

/// Memoizing tree enumerator over one χ-model.
pub struct TreeEnumerator<'a> {
    model: &'a ChiMa,
    bound: usize,
    cache: HashMap<(usize, usize, Phase), Arc<Vec<Generator>>>,
    possible: HashMap<(usize, usize), bool>,
}

impl<'a> TreeEnumerator<'a> {
    pub fn new(model: &'a ChiMa, bound: usize) -> Self {
        TreeEnumerator {
            model,
            bound,
            cache: HashMap::new(),
            possible: HashMap::new(),
        }
    }

    pub fn model(&self) -> &'a ChiMa {
        self.model
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// Full distributions `Δ` with `s ⇒ Δ`.
    pub fn weak_internal(&mut self, s: usize) -> WeakTargetSet {
        WeakTargetSet {
            label: WeakLabel::Internal,
            component: None,
            bound: self.bound,
            generators: self.generators(s, Phase::Internal).to_vec(),
        }
    }

    /// `s ⇒α Δ` for any label of the χ-view.
    pub fn weak_action(&mut self, s: usize, alpha: &ExtLabel) -> WeakTargetSet {
        WeakTargetSet {
            label: WeakLabel::Action(alpha.to_string()),
            component: None,
            bound: self.bound,
            generators: self.generators(s, Phase::Before(alpha.clone())).to_vec(),
        }
    }

    /// `s ⇒α̂ Δ`: the internal relation when `α = τ`.
    pub fn weak_hat(&mut self, s: usize, alpha: &ExtLabel) -> WeakTargetSet {
        if alpha.is_tau() {
            self.weak_internal(s)
        } else {
            self.weak_action(s, alpha)
        }
    }

    /// `s ⇒χ(λ)_ℓ Δ` through `ℓ`-projected trees.
    pub fn weak_local_chi(&mut self, s: usize, l: usize, lambda: &Rational) -> WeakTargetSet {
        let generators = if l < self.model.num_components(s) {
            self.generators(s, Phase::LocalBefore(l, lambda.clone())).to_vec()
        } else {
            Vec::new()
        };
        WeakTargetSet {
            label: WeakLabel::Action(ExtLabel::Chi(lambda.clone()).to_string()),
            component: Some(l),
            bound: self.bound,
            generators,
        }
    }

    /// `s ⇒χ_ℓ` through reducible `ℓ`-projected trees, as duration-indexed
    /// distributions.
    pub fn reducible_weak(&mut self, s: usize, l: usize) -> WeakTargetSet {
        let generators = if l < self.model.num_components(s) && self.reducible_possible(s, l) {
            self.generators(s, Phase::Reducible(l, false)).to_vec()
        } else {
            Vec::new()
        };
        WeakTargetSet {
            label: WeakLabel::ChiReducible,
            component: Some(l),
            bound: self.bound,
            generators,
        }
    }

    /// The depth-one `ℓ`-projected tree rooted at `s` whose root takes the
    /// local `χ` move of `ℓ`.
    pub fn strong_local_chi(&self, s: usize, l: usize) -> Option<(Rational, Subdistr<usize>)> {
        strong_local_chi(self.model, s, l)
    }

    /// Whether some finite reducible `ℓ`-projected tree rooted at `s`
    /// exists at any depth. `false` is definitive; it covers time-divergent
    /// χ-cycles that never reach a stable or visible-enabled local state.
    pub fn reducible_possible(&mut self, s: usize, l: usize) -> bool {
        if let Some(&b) = self.possible.get(&(s, l)) {
            return b;
        }
        // Least fixed point over (state, seen-χ) nodes: a node is good if
        // it may stop, or has a move whose children are all good.
        let model = self.model;
        let n = model.num_states();
        let mut good = vec![[false, false]; n];
        let mut changed = true;
        while changed {
            changed = false;
            for x in 0..n {
                if l >= model.num_components(x) {
                    continue;
                }
                for seen in [false, true] {
                    if good[x][seen as usize] {
                        continue;
                    }
                    let stop = seen && leaf_ok(model, x, l);
                    let step = steps(model, x, &Phase::Reducible(l, seen)).iter().any(|st| {
                        let next_seen = matches!(st.next, Phase::Reducible(_, true));
                        st.branches.iter().all(|(_, y)| good[*y][next_seen as usize])
                    });
                    if stop || step {
                        good[x][seen as usize] = true;
                        changed = true;
                    }
                }
            }
        }
        for x in 0..n {
            self.possible.insert((x, l), good[x][0]);
        }
        good[s][0]
    }

    pub(crate) fn generators(&mut self, s: usize, phase: Phase) -> Arc<Vec<Generator>> {
        self.gens_at(s, self.bound, &phase)
    }

    fn gens_at(&mut self, s: usize, depth: usize, phase: &Phase) -> Arc<Vec<Generator>> {
        let key = (s, depth, phase.clone());
        if let Some(g) = self.cache.get(&key) {
            return g.clone();
        }
        let model = self.model;
        let mut found: BTreeMap<DurationIndexedDistr, Arc<Tree>> = BTreeMap::new();
        if can_stop(model, s, phase) {
            found.insert(
                DurationIndexedDistr::at(Rational::zero(), Subdistr::dirac(s)),
                Tree::leaf(s),
            );
        }
        if depth > 0 {
            for step in steps(model, s, phase) {
                let child_sets: Vec<Arc<Vec<Generator>>> = step
                    .branches
                    .iter()
                    .map(|(_, c)| self.gens_at(*c, depth - 1, &step.next))
                    .collect();
                if child_sets.iter().any(|g| g.is_empty()) {
                    continue;
                }
                let mut combos: Vec<(DurationIndexedDistr, Vec<(Rational, Arc<Tree>)>)> =
                    vec![(DurationIndexedDistr::default(), Vec::new())];
                for ((p, _), set) in step.branches.iter().zip(&child_sets) {
                    let mut next = Vec::with_capacity(combos.len() * set.len());
                    for (acc, kids) in &combos {
                        for g in set.iter() {
                            let mut t = acc.clone();
                            t.merge(&g.target.scaled_shifted(p, &step.elapsed));
                            let mut k = kids.clone();
                            k.push((p.clone(), g.witness.clone()));
                            next.push((t, k));
                        }
                    }
                    combos = next;
                    if combos.len() > PRUNE_THRESHOLD {
                        combos = prune_hull(combos, |c| &c.0);
                    }
                }
                for (target, kids) in combos {
                    found.entry(target).or_insert_with(|| {
                        Arc::new(Tree {
                            state: s,
                            act: Some(step.label.clone()),
                            component: step.component,
                            children: kids,
                        })
                    });
                }
            }
        }
        let mut gens: Vec<Generator> = found
            .into_iter()
            .map(|(target, witness)| Generator { target, witness })
            .collect();
        if gens.len() > PRUNE_THRESHOLD {
            gens = extreme_points(gens);
        }
        let gens = Arc::new(gens);
        self.cache.insert(key, gens.clone());
        gens
    }
}

/// Drops generators whose target lies in the convex hull of the others.
fn extreme_points(gens: Vec<Generator>) -> Vec<Generator> {
    prune_hull(gens, |g| &g.target)
}

/// Keeps the items whose points are not convex combinations of the
/// remaining ones. Only points with support inside the candidate's support
/// can take part in such a combination.
fn prune_hull<T>(items: Vec<T>, point: impl Fn(&T) -> &DurationIndexedDistr) -> Vec<T> {
    let coords: Vec<BTreeMap<(Rational, usize), Rational>> = items.iter().map(|t| point(t).coordinates()).collect();
    let mut keep = vec![true; items.len()];
    for i in 0..items.len() {
        let others: Vec<&BTreeMap<(Rational, usize), Rational>> = (0..items.len())
            .filter(|&j| j != i && keep[j] && coords[j].keys().all(|k| coords[i].contains_key(k)))
            .map(|j| &coords[j])
            .collect();
        if others.is_empty() {
            continue;
        }
        let unique_max = coords[i]
            .iter()
            .any(|(k, v)| others.iter().all(|o| o.get(k).is_none_or(|w| w < v)));
        if unique_max {
            continue;
        }
        let others: Vec<_> = others.into_iter().cloned().collect();
        if convex_combination(&coords[i], &others).is_some() {
            keep[i] = false;
        }
    }
    items.into_iter().zip(keep).filter_map(|(t, k)| k.then_some(t)).collect()
}

fn local_has_visible(model: &ChiMa, s: usize, l: usize) -> bool {
    model.local_moves(s, l).iter().any(|m| m.label.is_visible())
}

/// Inner nodes of reducible trees: no visible local move.
fn inner_ok(model: &ChiMa, s: usize, l: usize) -> bool {
    !local_has_visible(model, s, l)
}

/// Leaves of reducible trees: locally stable (no τ, no χ with positive
/// parameter) or enabling a visible local move.
fn leaf_ok(model: &ChiMa, s: usize, l: usize) -> bool {
    let moves = model.local_moves(s, l);
    let busy = moves.iter().any(|m| {
        m.label.is_tau() || matches!(&m.label, ExtLabel::Chi(x) if !x.is_zero())
    });
    !busy || moves.iter().any(|m| m.label.is_visible())
}

fn can_stop(model: &ChiMa, s: usize, phase: &Phase) -> bool {
    match phase {
        Phase::Internal | Phase::LocalInternal(_) => true,
        Phase::Before(_) | Phase::LocalBefore(..) => false,
        Phase::Reducible(l, seen) => *seen && leaf_ok(model, s, *l),
    }
}

fn global_steps(model: &ChiMa, s: usize, pick: impl Fn(&ExtLabel) -> Option<Phase>) -> Vec<Step> {
    model
        .transitions(s)
        .iter()
        .filter_map(|t| {
            pick(&t.label).map(|next| Step {
                label: t.label.clone(),
                component: None,
                branches: t.target.iter().map(|(&c, p)| (p.clone(), c)).collect(),
                elapsed: Rational::zero(),
                next,
            })
        })
        .collect()
}

fn local_steps(
    model: &ChiMa,
    s: usize,
    l: usize,
    pick: impl Fn(&ExtLabel) -> Option<Phase>,
) -> Vec<Step> {
    model
        .local_moves(s, l)
        .into_iter()
        .filter_map(|m| {
            pick(&m.label).map(|next| Step {
                label: m.label.clone(),
                component: Some(l),
                branches: m
                    .target
                    .iter()
                    .map(|(&loc, p)| (p.clone(), model.successor(s, l, loc)))
                    .collect(),
                elapsed: match &m.label {
                    ExtLabel::Chi(x) => model.duration.elapsed(x),
                    _ => Rational::zero(),
                },
                next,
            })
        })
        .collect()
}

fn steps(model: &ChiMa, s: usize, phase: &Phase) -> Vec<Step> {
    match phase {
        Phase::Internal => global_steps(model, s, |a| a.is_tau().then_some(Phase::Internal)),
        Phase::Before(alpha) => global_steps(model, s, |a| {
            if alpha.is_tau() {
                a.is_tau().then_some(Phase::Internal)
            } else if a == alpha {
                Some(Phase::Internal)
            } else if a.is_tau() {
                Some(Phase::Before(alpha.clone()))
            } else {
                None
            }
        }),
        Phase::LocalInternal(l) => {
            local_steps(model, s, *l, |a| a.is_tau().then_some(Phase::LocalInternal(*l)))
        }
        Phase::LocalBefore(l, lambda) => local_steps(model, s, *l, |a| match a {
            ExtLabel::Chi(x) if x == lambda => Some(Phase::LocalInternal(*l)),
            a if a.is_tau() => Some(Phase::LocalBefore(*l, lambda.clone())),
            _ => None,
        }),
        Phase::Reducible(l, seen) => {
            if !inner_ok(model, s, *l) {
                return Vec::new();
            }
            local_steps(model, s, *l, |a| match a {
                ExtLabel::Chi(x) if !x.is_zero() => Some(Phase::Reducible(*l, true)),
                a if a.is_tau() => Some(Phase::Reducible(*l, *seen)),
                _ => None,
            })
        }
    }
}

pub fn strong_local_chi(model: &ChiMa, s: usize, l: usize) -> Option<(Rational, Subdistr<usize>)> {
    if l >= model.num_components(s) {
        return None;
    }
    model.local_moves(s, l).into_iter().find_map(|m| match &m.label {
        ExtLabel::Chi(x) => Some((
            x.clone(),
            m.target.map_states(|&loc| model.successor(s, l, loc)),
        )),
        _ => None,
    })
}

/// Kinds of trees the validator can check a witness against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeKind {
    /// Global transition tree; `internal` restricts inner labels to τ.
    Global { internal: bool },
    /// `ℓ`-projected tree; `reducible` adds the reducibility conditions.
    Projected { component: usize, reducible: bool },
}

/// Re-checks a witness tree against the defining equations from scratch:
/// root probability 1 and duration 0, `⊥` exactly at leaves, the child
/// distribution equation at inner nodes, the duration recurrence, and for
/// reducible trees the four reducibility conditions.
pub fn validate_tree(model: &ChiMa, tree: &Tree, kind: &TreeKind) -> Result<(), String> {
    let root = tree.labeled(model.duration);
    if !root.prob.is_one() || !root.expd.is_zero() {
        return Err("root must have probability 1 and duration 0".into());
    }
    check_node(model, &root, kind, false)
}

fn check_node(model: &ChiMa, node: &LabeledNode, kind: &TreeKind, seen_chi: bool) -> Result<(), String> {
    let name = model.state_name(node.sta);
    let Some(act) = &node.act else {
        if !node.children.is_empty() {
            return Err(format!("inner node {name} labeled ⊥"));
        }
        if let TreeKind::Projected { component, reducible: true } = kind {
            if !seen_chi {
                return Err(format!("path to {name} has no χ node"));
            }
            let moves = model.local_moves(node.sta, *component);
            let visible = moves.iter().any(|m| m.label.is_visible());
            let busy = moves.iter().any(|m| match &m.label {
                ExtLabel::Chi(x) => !x.is_zero(),
                l => l.is_tau(),
            });
            if busy && !visible {
                return Err(format!("leaf {name} is neither stable nor visible-enabled"));
            }
        }
        return Ok(());
    };
    if node.children.is_empty() {
        return Err(format!("leaf {name} carries label {act}"));
    }
    let children: Subdistr<usize> = {
        let mut d = Subdistr::empty();
        for c in &node.children {
            d.accumulate(c.sta, c.prob.clone());
        }
        d
    };
    let matched = match kind {
        TreeKind::Global { internal } => {
            if *internal && !act.is_tau() {
                return Err(format!("internal tree uses {act} at {name}"));
            }
            model
                .transitions(node.sta)
                .iter()
                .any(|t| &t.label == act && t.target.scale_unchecked(&node.prob) == children)
        }
        TreeKind::Projected { component, reducible } => {
            let moves = model.local_moves(node.sta, *component);
            if *reducible {
                if moves.iter().any(|m| m.label.is_visible()) {
                    return Err(format!("inner node {name} enables a visible local action"));
                }
                if act.is_visible() {
                    return Err(format!("reducible tree uses {act} at {name}"));
                }
            }
            moves.iter().any(|m| {
                &m.label == act
                    && m
                        .target
                        .map_states(|&loc| model.successor(node.sta, *component, loc))
                        .scale_unchecked(&node.prob)
                        == children
            })
        }
    };
    if !matched {
        return Err(format!("no {act} transition at {name} matches the children"));
    }
    let dt = match act {
        ExtLabel::Chi(x) if !x.is_zero() => model.duration.elapsed(x),
        _ => Rational::zero(),
    };
    let is_chi = matches!(act, ExtLabel::Chi(x) if !x.is_zero());
    for c in &node.children {
        if c.expd != &node.expd + &dt {
            return Err(format!("duration recurrence broken below {name}"));
        }
        check_node(model, c, kind, seen_chi || is_chi)?;
    }
    Ok(())
}

/// Decides `source ⇒_c target` for a lifted combined transition: each
/// support state `s` picks a convex combination of its generators and the
/// results are weighted by `source(s)`. Returns the weights per state.
pub fn lifted_combined_membership(
    source: &Subdistr<usize>,
    generators: &BTreeMap<usize, Vec<DurationIndexedDistr>>,
    target: &DurationIndexedDistr,
) -> Option<BTreeMap<usize, Vec<Rational>>> {
    let mut lp = Feasibility::new();
    let mut vars: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut coords: BTreeMap<(Rational, usize), Vec<(usize, Rational)>> = BTreeMap::new();
    for k in target.coordinates().keys() {
        coords.entry(k.clone()).or_default();
    }
    for (&s, p) in source.iter() {
        let gens = generators.get(&s).map(Vec::as_slice).unwrap_or(&[]);
        let vs: Vec<usize> = gens.iter().map(|_| lp.var()).collect();
        lp.equal(vs.iter().map(|&v| (v, Rational::one())), p.clone());
        for (g, &v) in gens.iter().zip(&vs) {
            for (k, c) in g.coordinates() {
                coords.entry(k).or_default().push((v, c));
            }
        }
        vars.insert(s, vs);
    }
    let want = target.coordinates();
    for (k, terms) in coords {
        lp.equal(terms, want.get(&k).cloned().unwrap_or_else(Rational::zero));
    }
    let x = lp.solve()?;
    Some(
        vars.into_iter()
            .map(|(s, vs)| {
                let p = source.get(&s);
                (s, vs.iter().map(|&v| &x[v] / &p).collect())
            })
            .collect(),
    )
}
