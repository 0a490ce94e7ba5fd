#![allow(dead_code)]

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use edsbisim::composition::{ChiMa, ComposeOptions};
use edsbisim::model::{Action, SequentialMa, System, Tlts};
use edsbisim::rational::{int, ratio};
use edsbisim::Subdistr;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn act(name: &str) -> Action {
    if name == "tau" {
        Action::Tau
    } else {
        Action::visible(name)
    }
}

fn random_target<R: Rng>(rng: &mut R, n: usize) -> Subdistr<usize> {
    let a = rng.gen_range(0..n);
    if n > 1 && rng.gen_bool(0.3) {
        let b = (a + rng.gen_range(1..n)) % n;
        Subdistr::from_pairs([(a, ratio(1, 2)), (b, ratio(1, 2))]).unwrap()
    } else {
        Subdistr::dirac(a)
    }
}

/// Random valid sequential MA with `n` states over `labels`.
pub fn random_ma<R: Rng>(rng: &mut R, name: &str, sizes: RangeInclusive<usize>, labels: &[&str], rates: &[i64]) -> SequentialMa {
    let n = rng.gen_range(sizes);
    let mut m = SequentialMa::new(name);
    for i in 0..n {
        m.state(&format!("{}{i}", name.to_lowercase()));
    }
    for s in 0..n {
        let k = rng.gen_range(0..=2);
        let mut used = BTreeSet::new();
        for _ in 0..k {
            let l = *labels.choose(rng).unwrap();
            let t = random_target(rng, n);
            if used.insert((l, t.clone())) {
                m.add_action(s, act(l), t);
            }
        }
        if !m.has_tau(s) {
            for _ in 0..rng.gen_range(0..=2) {
                m.add_timed(s, int(*rates.choose(rng).unwrap()), rng.gen_range(0..n));
            }
        }
    }
    assert!(m.validate().is_empty(), "{:?}", m.validate());
    m
}

/// A copy of `m` with one bisimilarity-preserving edit. `eds` allows the
/// rate split, which only expected-delay summing identifies.
pub fn variant<R: Rng>(rng: &mut R, m: &SequentialMa, name: &str, eds: bool) -> SequentialMa {
    let mut v = m.clone();
    v.name = name.to_string();
    let prefix = name.to_lowercase();
    for (i, s) in v.states.iter_mut().enumerate() {
        *s = format!("{prefix}{i}");
    }
    let n = v.num_states();
    let fresh = format!("{prefix}{n}");
    let splittable: Vec<usize> = (0..n)
        .filter(|&s| v.actions_from(s).count() == 0 && v.timed_from(s).count() == 1)
        .collect();
    let dirac_actions: Vec<usize> = (0..v.action_trans.len())
        .filter(|&i| v.action_trans[i].target.len() == 1)
        .collect();
    let choice = rng.gen_range(0..3);
    if choice == 0 && eds && !splittable.is_empty() {
        // s -λ-> t becomes s -2λ-> x -2λ-> t
        let s = *splittable.choose(rng).unwrap();
        let i = v.timed_trans.iter().position(|t| t.source == s).unwrap();
        let x = v.state(&fresh);
        let rate = &v.timed_trans[i].rate * int(2);
        let t = v.timed_trans[i].target;
        v.timed_trans[i].rate = rate.clone();
        v.timed_trans[i].target = x;
        v.add_timed(x, rate, t);
    } else if choice <= 1 && !dirac_actions.is_empty() {
        // s -α-> t becomes s -α-> x -τ-> t
        let i = *dirac_actions.choose(rng).unwrap();
        let x = v.state(&fresh);
        let t = *v.action_trans[i].target.support().next().unwrap();
        v.action_trans[i].target = Subdistr::dirac(x);
        v.add_action(x, Action::Tau, Subdistr::dirac(t));
    } else {
        // duplicate a state and send some Dirac edges to the copy
        let d = rng.gen_range(0..n);
        let x = v.state(&fresh);
        let acts: Vec<_> = v.actions_from(d).cloned().collect();
        for t in acts {
            v.add_action(x, t.action, t.target);
        }
        let timed: Vec<_> = v.timed_from(d).cloned().collect();
        for t in timed {
            let target = if t.target == d { x } else { t.target };
            v.add_timed(x, t.rate, target);
        }
        for t in v.action_trans.iter_mut() {
            if t.target.len() == 1 && t.target.contains(&d) && rng.gen_bool(0.5) {
                t.target = Subdistr::dirac(x);
            }
        }
    }
    assert!(v.validate().is_empty(), "{:?}", v.validate());
    v
}

/// Union χ-view of several sequential MAs; returns the model and the
/// initial state of each.
pub fn union_of(mas: &[&SequentialMa], opts: ComposeOptions) -> (ChiMa, Vec<usize>) {
    let systems: Vec<System> = mas.iter().map(|m| System::sequential((*m).clone())).collect();
    union_of_systems(&systems, opts)
}

pub fn union_of_systems(systems: &[System], opts: ComposeOptions) -> (ChiMa, Vec<usize>) {
    let parts: Vec<ChiMa> = systems.iter().map(|s| ChiMa::of_system(s, opts)).collect();
    let model = ChiMa::union(parts);
    let inits = systems
        .iter()
        .enumerate()
        .map(|(u, s)| model.lookup(u, &s.initial()).unwrap())
        .collect();
    (model, inits)
}

/// Random TLTS with at most one τ and one delay per state.
pub fn random_tlts<R: Rng>(rng: &mut R, name: &str, sizes: RangeInclusive<usize>) -> Tlts {
    let n = rng.gen_range(sizes);
    let mut t = Tlts::new(name);
    for i in 0..n {
        t.state(&format!("{}{i}", name.to_lowercase()));
    }
    for s in 0..n {
        if rng.gen_bool(0.3) {
            t.add_action(s, Action::Tau, rng.gen_range(0..n));
        }
        for _ in 0..rng.gen_range(0..=1) {
            let l = *["a", "b"].choose(rng).unwrap();
            t.add_action(s, act(l), rng.gen_range(0..n));
        }
        if rng.gen_bool(0.6) {
            t.add_timed(s, int(rng.gen_range(1..=3)), rng.gen_range(0..n));
        }
    }
    t
}

/// A copy of `t` with a fresh τ step or a duplicated state, appended to
/// `t` itself. Returns the initial state of the copy.
pub fn tlts_with_variant<R: Rng>(rng: &mut R, t: &Tlts) -> (Tlts, usize) {
    let n = t.num_states();
    let mut u = t.clone();
    for i in 0..n {
        u.states.push(format!("{}'", t.states[i]));
    }
    for &(s, ref a, d) in &t.action_trans {
        u.action_trans.push((s + n, a.clone(), d + n));
    }
    for &(s, ref d, x) in &t.timed_trans {
        u.timed_trans.push((s + n, d.clone(), x + n));
    }
    let visible: Vec<usize> = (t.action_trans.len()..u.action_trans.len())
        .filter(|&i| !u.action_trans[i].1.is_tau())
        .collect();
    if rng.gen_bool(0.5) && !visible.is_empty() {
        let i = *visible.choose(rng).unwrap();
        let x = u.state("x'");
        let target = u.action_trans[i].2;
        u.action_trans[i].2 = x;
        u.add_action(x, Action::Tau, target);
    } else {
        let d = n + rng.gen_range(0..n);
        let x = u.state("d'");
        let acts: Vec<_> = u.action_trans.iter().filter(|e| e.0 == d).cloned().collect();
        for (_, a, y) in acts {
            u.add_action(x, a, y);
        }
        let timed: Vec<_> = u.timed_trans.iter().filter(|e| e.0 == d).cloned().collect();
        for (_, dl, y) in timed {
            u.add_timed(x, dl, y);
        }
        for e in u.action_trans.iter_mut() {
            if e.2 == d && e.0 >= n && rng.gen_bool(0.5) {
                e.2 = x;
            }
        }
    }
    (u, t.initial + n)
}

pub fn at_most_one_tau(t: &Tlts) -> bool {
    (0..t.num_states()).all(|s| t.action_trans.iter().filter(|e| e.0 == s && e.1.is_tau()).count() <= 1)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random MA built from a random quotient, so that the block partition is a
/// strong bisimulation by construction.
pub fn random_lumpable_ma<R: Rng>(rng: &mut R, name: &str, max_states: usize) -> SequentialMa {
    let n = rng.gen_range(1..=max_states);
    let k = rng.gen_range(1..=n.min(3));
    let mut block: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
    block.shuffle(rng);
    let members = |b: usize| -> Vec<usize> { (0..n).filter(|&s| block[s] == b).collect() };
    let mut m = SequentialMa::new(name);
    for i in 0..n {
        m.state(&format!("{}{i}", name.to_lowercase()));
    }
    for b in 0..k {
        let moves: Vec<(&str, Vec<usize>)> = (0..rng.gen_range(0..=2))
            .map(|_| {
                let l = *["a", "b", "tau"].choose(rng).unwrap();
                let targets = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..k)).collect();
                (l, targets)
            })
            .collect();
        let has_tau = moves.iter().any(|(l, _)| *l == "tau");
        let rates: Vec<(usize, i64)> = if has_tau {
            Vec::new()
        } else {
            (0..rng.gen_range(0..=2)).map(|_| (rng.gen_range(0..k), rng.gen_range(1..=2))).collect()
        };
        for s in members(b) {
            for (l, targets) in &moves {
                let p = ratio(1, targets.len() as i64);
                let pairs = targets.iter().map(|&t| (*members(t).choose(rng).unwrap(), p.clone()));
                m.add_action(s, act(l), Subdistr::from_pairs(pairs).unwrap());
            }
            for &(t, r) in &rates {
                let inside = members(t);
                if r == 2 && rng.gen_bool(0.5) {
                    m.add_timed(s, int(1), *inside.choose(rng).unwrap());
                    m.add_timed(s, int(1), *inside.choose(rng).unwrap());
                } else {
                    m.add_timed(s, int(r), *inside.choose(rng).unwrap());
                }
            }
        }
    }
    assert!(m.validate().is_empty(), "{:?}", m.validate());
    m
}
