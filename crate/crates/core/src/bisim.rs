//! Strong, weak and expected-delay-summing weak bisimulation checkers.
//!
//! A candidate relation is verified pair by pair. For each pair, side and
//! challenged support state, every demand of the definition (the split of
//! the opposite distribution, each matching transition and each closure
//! membership) is encoded in a single exact linear feasibility problem.
//! Conditions that quantify over a component of the opposite system are
//! resolved by backtracking over the component choice.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::composition::ChiMa;
use crate::distributions::Subdistr;
use crate::lp::Feasibility;
use crate::model::ExtLabel;
use crate::rational::{fmt_rational, Rational};
use crate::trees::{DurationIndexedDistr, Tree, TreeEnumerator};

/// Upper bound on feasibility problems solved per challenged state.
const SOLVE_BUDGET: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosureMode {
    /// Only the listed pairs (and `(∅, ∅)`).
    Exact,
    /// Non-negative combinations of listed pairs with equal weights on both
    /// sides.
    LinearClosure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateRelation {
    pub pairs: Vec<(Subdistr<usize>, Subdistr<usize>)>,
    pub closure: ClosureMode,
}

impl CandidateRelation {
    pub fn new(pairs: Vec<(Subdistr<usize>, Subdistr<usize>)>) -> Self {
        CandidateRelation {
            pairs,
            closure: ClosureMode::LinearClosure,
        }
    }

    pub fn dirac(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self::new(
            pairs
                .into_iter()
                .map(|(s, t)| (Subdistr::dirac(s), Subdistr::dirac(t)))
                .collect(),
        )
    }

    pub fn with_mode(mut self, closure: ClosureMode) -> Self {
        self.closure = closure;
        self
    }

    pub fn swapped(&self) -> Self {
        CandidateRelation {
            pairs: self.pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
            closure: self.closure,
        }
    }

    /// Adds `(δ_s, δ_s)` for every given state.
    pub fn with_identity(&self, states: impl IntoIterator<Item = usize>) -> Self {
        let mut out = self.clone();
        for s in states {
            let p = (Subdistr::dirac(s), Subdistr::dirac(s));
            if !out.pairs.contains(&p) {
                out.pairs.push(p);
            }
        }
        out
    }

    /// `(x ⊙ Δ1, x ⊙ Δ2)` for every pair.
    pub fn scaled(&self, x: &Rational) -> Self {
        CandidateRelation {
            pairs: self
                .pairs
                .iter()
                .map(|(a, b)| (a.scale_unchecked(x), b.scale_unchecked(x)))
                .collect(),
            closure: self.closure,
        }
    }

    pub fn render(&self, model: &ChiMa) -> Vec<(String, String)> {
        self.pairs
            .iter()
            .map(|(a, b)| (render_distr(model, a), render_distr(model, b)))
            .collect()
    }
}

pub fn render_distr(model: &ChiMa, d: &Subdistr<usize>) -> String {
    let parts: Vec<String> = d
        .iter()
        .map(|(&s, p)| format!("{}: {}", model.qualified_name(s), fmt_rational(p)))
        .collect();
    format!("{{{}}}", parts.join(", "))
}

fn render_indexed(model: &ChiMa, d: &DurationIndexedDistr) -> String {
    let parts: Vec<String> = d
        .parts()
        .iter()
        .map(|(t, x)| format!("{} ↦ {}", fmt_rational(t), render_distr(model, x)))
        .collect();
    format!("{{{}}}", parts.join("; "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "a",
            Side::B => "b",
        })
    }
}

/// Which bisimulation a relation is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Weak,
    Eds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub pair_index: usize,
    pub left: String,
    pub right: String,
    pub side: Side,
    /// 0 for the size clause, otherwise the numbered condition.
    pub condition: u8,
    pub state: Option<String>,
    pub challenge: String,
    pub reason: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pair #{} ({}, {}) side {} condition {}",
            self.pair_index, self.left, self.right, self.side, self.condition
        )?;
        if let Some(s) = &self.state {
            write!(f, " at {s}")?;
        }
        write!(f, ": {} ({})", self.challenge, self.reason)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    pub pair_index: usize,
    pub side: Side,
    pub state: String,
    pub condition: u8,
    pub challenge: String,
    pub response: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub bound: usize,
    pub failure: Option<Failure>,
    pub trace: Vec<TraceEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    fn success(bound: usize, trace: Vec<TraceEntry>) -> Self {
        Verdict {
            holds: true,
            bound,
            failure: None,
            trace,
            note: None,
        }
    }
}

/// `Σ terms + constant`.
#[derive(Debug, Clone, Default)]
struct Affine {
    terms: Vec<(usize, Rational)>,
    constant: Rational,
}

impl Affine {
    fn constant(c: Rational) -> Self {
        Affine {
            terms: Vec::new(),
            constant: c,
        }
    }

    fn eval(&self, x: &[Rational]) -> Rational {
        self.terms
            .iter()
            .fold(self.constant.clone(), |acc, (v, c)| acc + c * &x[*v])
    }
}

type AffDistr = BTreeMap<usize, Affine>;

/// `lhs = rhs` as a row.
fn equate(lp: &mut Feasibility, lhs: &Affine, rhs: &Affine) {
    let terms = lhs
        .terms
        .iter()
        .cloned()
        .chain(rhs.terms.iter().map(|(v, c)| (*v, -c.clone())));
    lp.equal(terms, &rhs.constant - &lhs.constant);
}

fn eval_distr(d: &AffDistr, x: &[Rational]) -> Subdistr<usize> {
    let mut out = Subdistr::empty();
    for (&s, a) in d {
        out.accumulate(s, a.eval(x));
    }
    out
}

fn const_distr(d: &Subdistr<usize>) -> AffDistr {
    d.iter().map(|(&s, p)| (s, Affine::constant(p.clone()))).collect()
}

/// How the opposite side answers a challenge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Response {
    /// Condition 1: the split itself.
    Split,
    /// `⇒α̂` for a global label.
    Hat(ExtLabel),
    /// `⇒χ(λ)` through `ℓ2`-projected trees.
    LocalChi(usize, Rational),
    /// `⇒χ` through reducible `ℓ2`-projected trees.
    Reducible(usize),
}

/// Which closure pair answers one membership; only used in exact mode.
type ExactPick = Option<usize>;

#[derive(Debug, Clone)]
struct Option_ {
    response: Response,
    /// One entry per membership in exact mode; empty in linear mode.
    picks: Vec<ExactPick>,
}

#[derive(Debug, Clone)]
struct Challenge {
    condition: u8,
    text: String,
    /// Unscaled target of the challenging side.
    target: DurationIndexedDistr,
    options: Vec<Option_>,
    tree: Option<Arc<Tree>>,
}

/// Per-call verifier state: the tree enumerator and response caches.
pub struct Checker<'m> {
    model: &'m ChiMa,
    kind: Kind,
    trees: TreeEnumerator<'m>,
    responses: HashMap<(usize, Response), Arc<Vec<DurationIndexedDistr>>>,
    collect_trace: bool,
}

impl<'m> Checker<'m> {
    pub fn new(model: &'m ChiMa, kind: Kind, bound: usize) -> Self {
        Checker {
            model,
            kind,
            trees: TreeEnumerator::new(model, bound),
            responses: HashMap::new(),
            collect_trace: true,
        }
    }

    pub fn bound(&self) -> usize {
        self.trees.bound()
    }

    pub fn check(&mut self, rel: &CandidateRelation) -> Verdict {
        let mut trace = Vec::new();
        let swapped = rel.swapped();
        for (i, (d1, d2)) in rel.pairs.iter().enumerate() {
            if d1.size() != d2.size() {
                return Verdict {
                    holds: false,
                    bound: self.bound(),
                    failure: Some(Failure {
                        pair_index: i,
                        left: render_distr(self.model, d1),
                        right: render_distr(self.model, d2),
                        side: Side::A,
                        condition: 0,
                        state: None,
                        challenge: "size".into(),
                        reason: format!(
                            "size {} differs from {}",
                            fmt_rational(&d1.size()),
                            fmt_rational(&d2.size())
                        ),
                    }),
                    trace,
                    note: None,
                };
            }
            for (side, r, x1, x2) in [(Side::A, rel, d1, d2), (Side::B, &swapped, d2, d1)] {
                if let Err(mut f) = self.check_side(r, x1, x2, i, side, &mut trace) {
                    if side == Side::B {
                        std::mem::swap(&mut f.left, &mut f.right);
                    }
                    return Verdict {
                        holds: false,
                        bound: self.bound(),
                        failure: Some(f),
                        trace,
                        note: None,
                    };
                }
            }
        }
        Verdict::success(self.bound(), trace)
    }

    /// Whether one pair satisfies both clauses with respect to `rel`.
    fn pair_ok(&mut self, rel: &CandidateRelation, swapped: &CandidateRelation, i: usize) -> bool {
        let (d1, d2) = &rel.pairs[i];
        if d1.size() != d2.size() {
            return false;
        }
        let mut sink = Vec::new();
        self.check_side(rel, d1, d2, i, Side::A, &mut sink).is_ok()
            && self.check_side(swapped, d2, d1, i, Side::B, &mut sink).is_ok()
    }

    fn check_side(
        &mut self,
        rel: &CandidateRelation,
        d1: &Subdistr<usize>,
        d2: &Subdistr<usize>,
        pair_index: usize,
        side: Side,
        trace: &mut Vec<TraceEntry>,
    ) -> Result<(), Failure> {
        let l2_range = d2
            .support()
            .map(|&t| self.model.num_components(t))
            .max()
            .unwrap_or(0);
        for (&s1, p) in d1.iter() {
            let challenges = self.challenges(rel, d1, s1, l2_range);
            let mut chosen = Vec::new();
            let mut deepest = 0;
            let mut budget = SOLVE_BUDGET;
            let found = self.dfs(rel, d1, d2, s1, p, &challenges, &mut chosen, &mut deepest, &mut budget);
            let Some(x) = found else {
                let c = &challenges[deepest.min(challenges.len() - 1)];
                return Err(Failure {
                    pair_index,
                    left: render_distr(self.model, d1),
                    right: render_distr(self.model, d2),
                    side,
                    condition: c.condition,
                    state: Some(self.model.qualified_name(s1)),
                    challenge: c.text.clone(),
                    reason: if budget == 0 {
                        "search budget exhausted".into()
                    } else {
                        format!("no matching transition at bound {}", self.bound())
                    },
                });
            };
            if self.collect_trace {
                let (lp_x, layout) = x;
                for (k, c) in challenges.iter().enumerate() {
                    trace.push(TraceEntry {
                        pair_index,
                        side,
                        state: self.model.qualified_name(s1),
                        condition: c.condition,
                        challenge: c.text.clone(),
                        response: layout[k].render(self.model, &lp_x),
                        tree: c
                            .tree
                            .as_ref()
                            .map(|t| t.labeled(self.model.duration).to_json(self.model)),
                    });
                }
            }
        }
        Ok(())
    }

    fn challenges(
        &mut self,
        rel: &CandidateRelation,
        d1: &Subdistr<usize>,
        s1: usize,
        l2_range: usize,
    ) -> Vec<Challenge> {
        let model = self.model;
        let p = d1.get(&s1);
        let exact = rel.closure == ClosureMode::Exact;
        let mut out = Vec::new();

        let split_picks = if exact {
            let a = candidates(rel, &Subdistr::dirac(s1).scale_unchecked(&p));
            let b = candidates(rel, &d1.remove(&s1));
            product(&[a, b])
        } else {
            vec![Vec::new()]
        };
        out.push(Challenge {
            condition: 1,
            text: format!("split at {}", model.qualified_name(s1)),
            target: DurationIndexedDistr::default(),
            options: split_picks
                .into_iter()
                .map(|picks| Option_ {
                    response: Response::Split,
                    picks,
                })
                .collect(),
            tree: None,
        });

        let with_picks = |responses: Vec<Response>, target: &DurationIndexedDistr| -> Vec<Option_> {
            let picks = if exact {
                let per: Vec<Vec<ExactPick>> = target
                    .parts()
                    .values()
                    .map(|d| candidates(rel, &d.scale_unchecked(&p)))
                    .collect();
                product(&per)
            } else {
                vec![Vec::new()]
            };
            responses
                .into_iter()
                .flat_map(|r| {
                    picks.iter().map(move |pk| Option_ {
                        response: r.clone(),
                        picks: pk.clone(),
                    })
                })
                .collect()
        };

        for t in model.transitions(s1) {
            let applies = match self.kind {
                Kind::Weak => true,
                Kind::Eds => matches!(t.label, ExtLabel::Act(_)),
            };
            if !applies {
                continue;
            }
            let target = DurationIndexedDistr::at(Rational::zero(), t.target.clone());
            out.push(Challenge {
                condition: 2,
                text: format!("{} -> {}", t.label, render_distr(model, &t.target)),
                options: with_picks(vec![Response::Hat(t.label.clone())], &target),
                target,
                tree: None,
            });
        }
        if self.kind == Kind::Eds {
            for l1 in 0..model.num_components(s1) {
                let reducible = self.trees.reducible_weak(s1, l1);
                if reducible.is_empty() {
                    if let Some((lambda, psi)) = self.trees.strong_local_chi(s1, l1) {
                        let target = DurationIndexedDistr::at(Rational::zero(), psi.clone());
                        out.push(Challenge {
                            condition: 3,
                            text: format!(
                                "chi({})[{}] -> {}",
                                fmt_rational(&lambda),
                                l1,
                                render_distr(model, &psi)
                            ),
                            options: with_picks(
                                (0..l2_range).map(|l2| Response::LocalChi(l2, lambda.clone())).collect(),
                                &target,
                            ),
                            target,
                            tree: None,
                        });
                    }
                } else {
                    for g in &reducible.generators {
                        out.push(Challenge {
                            condition: 4,
                            text: format!("chi[{}] => {}", l1, render_indexed(model, &g.target)),
                            options: with_picks(
                                (0..l2_range).map(Response::Reducible).collect(),
                                &g.target,
                            ),
                            target: g.target.clone(),
                            tree: Some(g.witness.clone()),
                        });
                    }
                }
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &mut self,
        rel: &CandidateRelation,
        d1: &Subdistr<usize>,
        d2: &Subdistr<usize>,
        s1: usize,
        p: &Rational,
        challenges: &[Challenge],
        chosen: &mut Vec<usize>,
        deepest: &mut usize,
        budget: &mut usize,
    ) -> Option<(Vec<Rational>, Vec<Layout>)> {
        let i = chosen.len();
        if i == challenges.len() {
            let (lp, layout) = self.build(rel, d1, d2, s1, p, challenges, chosen);
            return lp.solve().map(|x| (x, layout));
        }
        *deepest = (*deepest).max(i);
        for k in 0..challenges[i].options.len() {
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
            chosen.push(k);
            let (lp, _) = self.build(rel, d1, d2, s1, p, challenges, chosen);
            if lp.is_feasible() {
                if let Some(found) = self.dfs(rel, d1, d2, s1, p, challenges, chosen, deepest, budget) {
                    return Some(found);
                }
            }
            chosen.pop();
        }
        None
    }

    fn response_gens(&mut self, t: usize, r: &Response) -> Arc<Vec<DurationIndexedDistr>> {
        let key = (t, r.clone());
        if let Some(g) = self.responses.get(&key) {
            return g.clone();
        }
        let flat = |set: crate::trees::WeakTargetSet| -> Vec<DurationIndexedDistr> {
            set.generators
                .iter()
                .map(|g| DurationIndexedDistr::at(Rational::zero(), g.target.flatten()))
                .collect()
        };
        let gens = match r {
            Response::Split => flat(self.trees.weak_internal(t)),
            Response::Hat(a) => flat(self.trees.weak_hat(t, a)),
            Response::LocalChi(l, lambda) => flat(self.trees.weak_local_chi(t, *l, lambda)),
            Response::Reducible(l) => self
                .trees
                .reducible_weak(t, *l)
                .generators
                .iter()
                .map(|g| g.target.clone())
                .collect(),
        };
        let gens = Arc::new(gens);
        self.responses.insert(key, gens.clone());
        gens
    }

    /// Lifted combined transition from an affine source: returns the
    /// response split by duration.
    fn lifted(
        &mut self,
        lp: &mut Feasibility,
        source: &AffDistr,
        r: &Response,
        allowed: Option<&BTreeSet<Rational>>,
    ) -> BTreeMap<Rational, AffDistr> {
        let mut out: BTreeMap<Rational, AffDistr> = BTreeMap::new();
        for (&t, mass) in source {
            let gens = self.response_gens(t, r);
            let mut sum = Affine::default();
            for g in gens.iter() {
                if let Some(ok) = allowed {
                    if g.durations().any(|d| !ok.contains(d)) {
                        continue;
                    }
                }
                let y = lp.var();
                sum.terms.push((y, Rational::one()));
                for (dur, d) in g.parts() {
                    let slot = out.entry(dur.clone()).or_default();
                    for (&x, q) in d.iter() {
                        slot.entry(x).or_default().terms.push((y, q.clone()));
                    }
                }
            }
            equate(lp, &sum, mass);
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        &mut self,
        rel: &CandidateRelation,
        d1: &Subdistr<usize>,
        d2: &Subdistr<usize>,
        s1: usize,
        p: &Rational,
        challenges: &[Challenge],
        chosen: &[usize],
    ) -> (Feasibility, Vec<Layout>) {
        let mut lp = Feasibility::new();
        let mut layout = Vec::new();

        // Condition 1: Δ2 ⇒c Φ' ⊕ Φ''.
        let split = &challenges[0].options[chosen[0]];
        let theta = self
            .lifted(&mut lp, &const_distr(d2), &Response::Split, None)
            .remove(&Rational::zero())
            .unwrap_or_default();
        let mut phi1 = AffDistr::new();
        let mut phi2 = AffDistr::new();
        for (&x, th) in &theta {
            let a = lp.var();
            let b = lp.var();
            let both = Affine {
                terms: vec![(a, Rational::one()), (b, Rational::one())],
                constant: Rational::zero(),
            };
            equate(&mut lp, &both, th);
            phi1.insert(x, Affine { terms: vec![(a, Rational::one())], constant: Rational::zero() });
            phi2.insert(x, Affine { terms: vec![(b, Rational::one())], constant: Rational::zero() });
        }
        member(&mut lp, rel, &Subdistr::dirac(s1).scale_unchecked(p), &phi1, split.picks.first().copied());
        member(&mut lp, rel, &d1.remove(&s1), &phi2, split.picks.get(1).copied());
        layout.push(Layout::Split(phi1.clone(), phi2));

        for (c, &k) in challenges.iter().zip(chosen).skip(1) {
            let opt = &c.options[k];
            match &opt.response {
                Response::Reducible(_) => {
                    let durations: BTreeSet<Rational> = c.target.durations().cloned().collect();
                    let mut resp = self.lifted(&mut lp, &phi1, &opt.response, Some(&durations));
                    for (j, (t, part)) in c.target.parts().iter().enumerate() {
                        let y = resp.remove(t).unwrap_or_default();
                        member(&mut lp, rel, &part.scale_unchecked(p), &y, opt.picks.get(j).copied());
                        layout.push(Layout::Indexed(t.clone(), y));
                    }
                }
                _ => {
                    let resp = self.lifted(&mut lp, &phi1, &opt.response, None);
                    let mut flat = AffDistr::new();
                    for part in resp.into_values() {
                        for (x, a) in part {
                            flat.entry(x).or_default().terms.extend(a.terms);
                        }
                    }
                    member(
                        &mut lp,
                        rel,
                        &c.target.flatten().scale_unchecked(p),
                        &flat,
                        opt.picks.first().copied(),
                    );
                    layout.push(Layout::Plain(flat));
                }
            }
        }
        (lp, regroup(layout, challenges, chosen))
    }
}

/// Values needed to report the answer to one challenge.
#[derive(Debug, Clone)]
enum Layout {
    Split(AffDistr, AffDistr),
    Plain(AffDistr),
    Indexed(Rational, AffDistr),
    Group(Vec<Layout>),
}

impl Layout {
    fn render(&self, model: &ChiMa, x: &[Rational]) -> String {
        match self {
            Layout::Split(a, b) => format!(
                "{} ⊕ {}",
                render_distr(model, &eval_distr(a, x)),
                render_distr(model, &eval_distr(b, x))
            ),
            Layout::Plain(d) => render_distr(model, &eval_distr(d, x)),
            Layout::Indexed(t, d) => {
                format!("{} ↦ {}", fmt_rational(t), render_distr(model, &eval_distr(d, x)))
            }
            Layout::Group(parts) => {
                let inner: Vec<String> = parts.iter().map(|l| l.render(model, x)).collect();
                format!("{{{}}}", inner.join("; "))
            }
        }
    }
}

/// One layout entry per challenge (duration parts grouped).
fn regroup(flat: Vec<Layout>, challenges: &[Challenge], chosen: &[usize]) -> Vec<Layout> {
    let mut it = flat.into_iter();
    let mut out = vec![it.next().expect("split layout")];
    for (c, &k) in challenges.iter().zip(chosen).skip(1) {
        if matches!(c.options[k].response, Response::Reducible(_)) {
            out.push(Layout::Group(it.by_ref().take(c.target.parts().len()).collect()));
        } else {
            out.push(it.next().expect("challenge layout"));
        }
    }
    out
}

/// Exact-mode closure pairs whose left side equals `x`; `None` stands for
/// the implicit `(∅, ∅)`.
fn candidates(rel: &CandidateRelation, x: &Subdistr<usize>) -> Vec<ExactPick> {
    let mut out = Vec::new();
    if x.is_empty() {
        out.push(None);
    }
    for (k, (l, _)) in rel.pairs.iter().enumerate() {
        if l == x {
            out.push(Some(k));
        }
    }
    out
}

fn product(sets: &[Vec<ExactPick>]) -> Vec<Vec<ExactPick>> {
    let mut out = vec![Vec::new()];
    for set in sets {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                set.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(*x);
                    v
                })
            })
            .collect();
    }
    out
}

/// Constrains `(x, y)` to lie in the closure of `rel`. In exact mode
/// `pick` selects the answering pair.
fn member(
    lp: &mut Feasibility,
    rel: &CandidateRelation,
    x: &Subdistr<usize>,
    y: &AffDistr,
    pick: Option<ExactPick>,
) {
    match rel.closure {
        ClosureMode::Exact => {
            let right = match pick.flatten() {
                Some(k) => rel.pairs[k].1.clone(),
                None => Subdistr::empty(),
            };
            let states: BTreeSet<usize> = y.keys().chain(right.support()).copied().collect();
            for s in states {
                let lhs = y.get(&s).cloned().unwrap_or_default();
                equate(lp, &lhs, &Affine::constant(right.get(&s)));
            }
        }
        ClosureMode::LinearClosure => {
            let usable: Vec<usize> = rel
                .pairs
                .iter()
                .enumerate()
                .filter(|(_, (l, _))| l.support().all(|s| x.contains(s)))
                .map(|(k, _)| k)
                .collect();
            let coeff: Vec<usize> = usable.iter().map(|_| lp.var()).collect();
            for &s in x.support() {
                let terms: Vec<(usize, Rational)> = usable
                    .iter()
                    .zip(&coeff)
                    .map(|(&k, &c)| (c, rel.pairs[k].0.get(&s)))
                    .collect();
                lp.equal(terms, x.get(&s));
            }
            let mut states: BTreeSet<usize> = y.keys().copied().collect();
            for &k in &usable {
                states.extend(rel.pairs[k].1.support().copied());
            }
            for s in states {
                let combo = Affine {
                    terms: usable
                        .iter()
                        .zip(&coeff)
                        .map(|(&k, &c)| (c, rel.pairs[k].1.get(&s)))
                        .collect(),
                    constant: Rational::zero(),
                };
                equate(lp, &combo, &y.get(&s).cloned().unwrap_or_default());
            }
        }
    }
}

/// Verifies `rel` against the weak bisimulation clauses over all labels of
/// the χ-view.
pub fn check_weak_bisim(rel: &CandidateRelation, model: &ChiMa, bound: usize) -> Verdict {
    Checker::new(model, Kind::Weak, bound).check(rel)
}

/// Verifies `rel` against the expected-delay-summing clauses.
pub fn check_eds_bisim(rel: &CandidateRelation, model: &ChiMa, bound: usize) -> Verdict {
    Checker::new(model, Kind::Eds, bound).check(rel)
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    /// Verdict of the final verification. On failure `holds` is false and
    /// the result means "not proven".
    pub verdict: Verdict,
    #[serde(skip)]
    pub relation: Option<CandidateRelation>,
    pub explored_pairs: usize,
}

/// Largest relation of Dirac pairs over `Reach(s1) × Reach(s2)` whose
/// linear closure satisfies the clauses, computed as a greatest fixed
/// point and then re-verified.
pub fn search(kind: Kind, model: &ChiMa, s1: usize, s2: usize, bound: usize, max_pairs: usize) -> SearchOutcome {
    let left = model.reachable(s1);
    let right = model.reachable(s2);
    let total = left.len() * right.len();
    let not_proven = |note: String, explored: usize| SearchOutcome {
        verdict: Verdict {
            holds: false,
            bound,
            failure: None,
            trace: Vec::new(),
            note: Some(note),
        },
        relation: None,
        explored_pairs: explored,
    };
    if total > max_pairs {
        return not_proven(
            format!("not proven: {total} candidate pairs exceed the limit of {max_pairs}"),
            0,
        );
    }
    let mut pairs: Vec<(usize, usize)> = left
        .iter()
        .flat_map(|&a| right.iter().map(move |&b| (a, b)))
        .collect();
    let mut checker = Checker::new(model, kind, bound);
    checker.collect_trace = false;
    loop {
        let rel = CandidateRelation::dirac(pairs.iter().copied());
        let swapped = rel.swapped();
        let keep: Vec<bool> = (0..pairs.len()).map(|i| checker.pair_ok(&rel, &swapped, i)).collect();
        if keep.iter().all(|&k| k) {
            break;
        }
        pairs = pairs
            .into_iter()
            .zip(keep)
            .filter_map(|(p, k)| k.then_some(p))
            .collect();
        if !pairs.contains(&(s1, s2)) {
            return not_proven(
                format!(
                    "not proven: ({}, {}) dropped from every candidate relation",
                    model.qualified_name(s1),
                    model.qualified_name(s2)
                ),
                total,
            );
        }
    }
    if !pairs.contains(&(s1, s2)) {
        return not_proven("not proven: initial pair rejected".into(), total);
    }
    let rel = CandidateRelation::dirac(pairs);
    let verdict = Checker::new(model, kind, bound).check(&rel);
    SearchOutcome {
        relation: verdict.holds.then_some(rel),
        verdict,
        explored_pairs: total,
    }
}

pub fn search_eds(model: &ChiMa, s1: usize, s2: usize, bound: usize, max_pairs: usize) -> SearchOutcome {
    search(Kind::Eds, model, s1, s2, bound, max_pairs)
}

pub fn search_weak(model: &ChiMa, s1: usize, s2: usize, bound: usize, max_pairs: usize) -> SearchOutcome {
    search(Kind::Weak, model, s1, s2, bound, max_pairs)
}

/// Coarsest partition of the states such that related states match every
/// label with class-wise equal target probabilities.
pub fn strong_bisim_partition(model: &ChiMa) -> Vec<Vec<usize>> {
    let n = model.num_states();
    let mut class = vec![0usize; n];
    loop {
        let mut sigs: BTreeMap<(usize, BTreeSet<(ExtLabel, BTreeMap<usize, Rational>)>), usize> =
            BTreeMap::new();
        let mut next = vec![0usize; n];
        for s in 0..n {
            let sig: BTreeSet<(ExtLabel, BTreeMap<usize, Rational>)> = model
                .transitions(s)
                .iter()
                .map(|t| {
                    let mut by_class: BTreeMap<usize, Rational> = BTreeMap::new();
                    for (&x, p) in t.target.iter() {
                        *by_class.entry(class[x]).or_insert_with(Rational::zero) += p;
                    }
                    (t.label.clone(), by_class)
                })
                .collect();
            let fresh = sigs.len();
            next[s] = *sigs.entry((class[s], sig)).or_insert(fresh);
        }
        let stable = sigs.len() == class.iter().collect::<BTreeSet<_>>().len();
        class = next;
        if stable {
            break;
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (s, c) in class.into_iter().enumerate() {
        groups.entry(c).or_default().push(s);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}
