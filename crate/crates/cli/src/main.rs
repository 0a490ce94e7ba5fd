use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use edsbisim::bisim::{
    check_eds_bisim, check_weak_bisim, render_distr, search, strong_bisim_partition, ClosureMode, Kind,
    SearchOutcome, Verdict,
};
use edsbisim::composition::{compose, ChiMa, ComposeOptions};
use edsbisim::corpus;
use edsbisim::format::{parse, parse_relation_lines, parse_state_ref_str, resolve_relation, resolve_state, ModelFile};
use edsbisim::model::{SequentialMa, SystemExpr, Tlts};
use edsbisim::timed::{eds_on_tlts, normalize, timed_weak_bisim};
use edsbisim::trees::DEFAULT_BOUND;

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "edsbisim", version, about = "Bisimulation checking for Markov automata and timed LTSs")]
struct Cli {
    /// Maximum depth of scheduler trees.
    #[arg(long, global = true, default_value_t = DEFAULT_BOUND)]
    bound: usize,
    /// Emit a JSON report.
    #[arg(long, global = true)]
    json: bool,
    /// Do not add χ(0) selfloops to τ-free states without rates.
    #[arg(long, global = true)]
    no_chi0_selfloops: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a model file.
    Validate { file: PathBuf },
    /// Print the parallel composition of a system.
    Compose { file: PathBuf, system: String },
    /// Print the χ-view of every MA and system in a file, or of one of them.
    ChiView { file: PathBuf, name: Option<String> },
    /// Strong bisimilarity of two states, or the full partition.
    CheckStrong {
        file: PathBuf,
        left: Option<String>,
        right: Option<String>,
    },
    /// Weak bisimulation: verify a relation, or search from two states.
    CheckWeak(RelArgs),
    /// Expected-delay-summing weak bisimulation: verify a relation, or search from two states.
    CheckEds(RelArgs),
    /// Search for an expected-delay-summing weak bisimulation relating two states.
    SearchEds {
        file: PathBuf,
        left: String,
        right: String,
        #[arg(long, default_value_t = corpus::MAX_PAIRS)]
        max_pairs: usize,
    },
    /// Timed weak bisimilarity of two TLTS states (after normalization).
    CheckTimed(TltsArgs),
    /// Expected-delay-summing bisimilarity on a TLTS as given.
    CheckEdsTlts(TltsArgs),
    /// Run every bundled fixture and compare against the expected verdicts.
    Fixtures,
}

#[derive(Args)]
struct RelArgs {
    file: PathBuf,
    left: Option<String>,
    right: Option<String>,
    /// Name of a relation defined in the model file.
    #[arg(long, conflicts_with = "relation_file")]
    relation: Option<String>,
    /// File with one pair of distributions per line.
    #[arg(long)]
    relation_file: Option<PathBuf>,
    /// Check closure by pair combinations rather than linear closure.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = corpus::MAX_PAIRS)]
    max_pairs: usize,
}

#[derive(Args)]
struct TltsArgs {
    file: PathBuf,
    left: String,
    right: String,
    /// TLTS block to use when the file has several.
    #[arg(long)]
    tlts: Option<String>,
    #[arg(long, default_value_t = corpus::MAX_PAIRS)]
    max_pairs: usize,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Out = Result<(bool, Value, String), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = command_name(&cli.cmd);
    match run(&cli) {
        Ok((ok, report, text)) => {
            if cli.json {
                let mut obj = json!({ "schema": SCHEMA, "command": command, "holds": ok });
                if let (Value::Object(o), Value::Object(r)) = (&mut obj, report) {
                    o.extend(r);
                }
                println!("{}", serde_json::to_string_pretty(&obj).unwrap());
            } else {
                print!("{text}");
            }
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(Failure(msg)) => {
            if cli.json {
                let obj = json!({ "schema": SCHEMA, "command": command, "error": msg });
                println!("{}", serde_json::to_string_pretty(&obj).unwrap());
            }
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn command_name(c: &Cmd) -> &'static str {
    match c {
        Cmd::Validate { .. } => "validate",
        Cmd::Compose { .. } => "compose",
        Cmd::ChiView { .. } => "chi-view",
        Cmd::CheckStrong { .. } => "check-strong",
        Cmd::CheckWeak(_) => "check-weak",
        Cmd::CheckEds(_) => "check-eds",
        Cmd::SearchEds { .. } => "search-eds",
        Cmd::CheckTimed(_) => "check-timed",
        Cmd::CheckEdsTlts(_) => "check-eds-tlts",
        Cmd::Fixtures => "fixtures",
    }
}

fn run(cli: &Cli) -> Out {
    let opts = ComposeOptions {
        generate_chi0_selfloops: !cli.no_chi0_selfloops,
    };
    match &cli.cmd {
        Cmd::Validate { file } => {
            let f = load(file)?;
            let text = format!(
                "ok: {} MA(s), {} TLTS(s), {} system(s), {} relation(s)\n",
                f.mas.len(),
                f.tltss.len(),
                f.systems.len(),
                f.relations.len()
            );
            let report = json!({
                "mas": f.mas.iter().map(|m| &m.name).collect::<Vec<_>>(),
                "tltss": f.tltss.iter().map(|t| &t.name).collect::<Vec<_>>(),
                "systems": f.systems.iter().map(|s| &s.name).collect::<Vec<_>>(),
                "relations": f.relations.iter().map(|r| &r.name).collect::<Vec<_>>(),
            });
            Ok((true, report, text))
        }
        Cmd::Compose { file, system } => {
            let f = load(file)?;
            let sys = f.system(system).ok_or_else(|| Failure(format!("no system `{system}`")))?;
            let mut m = compose_expr(&sys.components, &sys.tree)?;
            m.name = sys.name.clone();
            let lines = ma_lines(&m);
            Ok((true, json!({ "states": m.states, "transitions": lines }), joined(&lines)))
        }
        Cmd::ChiView { file, name } => {
            let f = load(file)?;
            let model = model_of(&f, opts)?;
            let mut lines = Vec::new();
            for s in 0..model.num_states() {
                if name.as_ref().is_some_and(|n| *n != model.units[model.unit_of(s)].name) {
                    continue;
                }
                for t in model.transitions(s) {
                    lines.push(format!(
                        "{} -{}-> {}",
                        model.qualified_name(s),
                        t.label,
                        render_distr(&model, &t.target)
                    ));
                }
            }
            if lines.is_empty() && name.is_some() {
                return Err(Failure(format!("no MA or system `{}`", name.as_ref().unwrap())));
            }
            Ok((true, json!({ "transitions": lines }), joined(&lines)))
        }
        Cmd::CheckStrong { file, left, right } => {
            let f = load(file)?;
            let model = model_of(&f, opts)?;
            let blocks: Vec<Vec<String>> = strong_bisim_partition(&model)
                .iter()
                .map(|b| b.iter().map(|&s| model.qualified_name(s)).collect())
                .collect();
            match (left, right) {
                (Some(a), Some(b)) => {
                    let (a, b) = (state(&model, a)?, state(&model, b)?);
                    let part = strong_bisim_partition(&model);
                    let holds = part.iter().any(|blk| blk.contains(&a) && blk.contains(&b));
                    let text = format!(
                        "{} {} {}\n",
                        model.qualified_name(a),
                        if holds { "~" } else { "!~" },
                        model.qualified_name(b)
                    );
                    Ok((holds, json!({ "partition": blocks }), text))
                }
                (None, None) => {
                    let text = joined(&blocks.iter().map(|b| format!("{{{}}}", b.join(", "))).collect::<Vec<_>>());
                    Ok((true, json!({ "partition": blocks }), text))
                }
                _ => Err(Failure("give two states or none".into())),
            }
        }
        Cmd::CheckWeak(a) => check_relation(a, Kind::Weak, cli.bound, opts),
        Cmd::CheckEds(a) => check_relation(a, Kind::Eds, cli.bound, opts),
        Cmd::SearchEds {
            file,
            left,
            right,
            max_pairs,
        } => {
            let f = load(file)?;
            let model = model_of(&f, opts)?;
            let out = search(Kind::Eds, &model, state(&model, left)?, state(&model, right)?, cli.bound, *max_pairs);
            Ok(search_report(&model, out))
        }
        Cmd::CheckTimed(a) => {
            let f = load(&a.file)?;
            let t = tlts_of(&f, a.tlts.as_deref())?;
            let n = normalize(t)?;
            let (s1, s2) = (tlts_state(&n, &a.left)?, tlts_state(&n, &a.right)?);
            Ok(verdict_report(timed_weak_bisim(s1, s2, &n, cli.bound)))
        }
        Cmd::CheckEdsTlts(a) => {
            let f = load(&a.file)?;
            let t = tlts_of(&f, a.tlts.as_deref())?;
            let (s1, s2) = (tlts_state(t, &a.left)?, tlts_state(t, &a.right)?);
            let out = eds_on_tlts(s1, s2, t, cli.bound, a.max_pairs)?;
            let model = ChiMa::of_tlts(t)?;
            Ok(search_report(&model, out))
        }
        Cmd::Fixtures => {
            let checks = corpus::run_all(cli.bound);
            let ok = checks.iter().all(|c| c.passed());
            let text = joined(
                &checks
                    .iter()
                    .map(|c| {
                        format!(
                            "{} {} expected={} observed={}: {}",
                            if c.passed() { "PASS" } else { "FAIL" },
                            c.id,
                            c.expected,
                            c.observed,
                            c.detail
                        )
                    })
                    .collect::<Vec<_>>(),
            );
            Ok((ok, json!({ "checks": checks }), text))
        }
    }
}

fn check_relation(a: &RelArgs, kind: Kind, bound: usize, opts: ComposeOptions) -> Out {
    let f = load(&a.file)?;
    let model = model_of(&f, opts)?;
    let pairs = match (&a.relation, &a.relation_file) {
        (Some(name), None) => Some(
            f.relation(name)
                .ok_or_else(|| Failure(format!("no relation `{name}`")))?
                .pairs
                .clone(),
        ),
        (None, Some(path)) => {
            let src = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            Some(parse_relation_lines(&src).map_err(|e| Failure(format!("{}:{e}", path.display())))?)
        }
        _ => None,
    };
    match (pairs, &a.left, &a.right) {
        (Some(pairs), None, None) => {
            let mut rel = resolve_relation(&model, &pairs)?;
            if a.exact {
                rel = rel.with_mode(ClosureMode::Exact);
            }
            let v = match kind {
                Kind::Weak => check_weak_bisim(&rel, &model, bound),
                Kind::Eds => check_eds_bisim(&rel, &model, bound),
            };
            Ok(verdict_report(v))
        }
        (None, Some(l), Some(r)) => {
            let out = search(kind, &model, state(&model, l)?, state(&model, r)?, bound, a.max_pairs);
            Ok(search_report(&model, out))
        }
        _ => Err(Failure("give either a relation or two states".into())),
    }
}

fn verdict_report(v: Verdict) -> (bool, Value, String) {
    let text = match (&v.failure, v.holds) {
        (Some(f), _) => format!("does not hold (bound {}): {f}\n", v.bound),
        (None, true) => format!("holds (bound {})\n", v.bound),
        (None, false) => format!("not proven (bound {})\n", v.bound),
    };
    let text = match &v.note {
        Some(n) => format!("{text}note: {n}\n"),
        None => text,
    };
    (v.holds, json!({ "verdict": v }), text)
}

fn search_report(model: &ChiMa, out: SearchOutcome) -> (bool, Value, String) {
    let rel = out.relation.as_ref().map(|r| r.render(model));
    let (holds, mut report, mut text) = verdict_report(out.verdict);
    if let Some(pairs) = &rel {
        if holds {
            text.push_str(&format!("relation ({} pairs):\n", pairs.len()));
            for (a, b) in pairs {
                text.push_str(&format!("  {a}, {b}\n"));
            }
        }
    }
    report["relation"] = json!(rel);
    report["explored_pairs"] = json!(out.explored_pairs);
    (holds, report, text)
}

fn load(path: &Path) -> Result<ModelFile, Failure> {
    let src = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse(&src).map_err(|e| Failure(format!("{}:{e}", path.display())))
}

fn model_of(f: &ModelFile, opts: ComposeOptions) -> Result<ChiMa, Failure> {
    corpus::chi_model(f, opts).ok_or_else(|| Failure("file holds no MA or system".into()))
}

fn state(model: &ChiMa, text: &str) -> Result<usize, Failure> {
    let r = parse_state_ref_str(text)?;
    Ok(resolve_state(model, &r)?)
}

fn tlts_of<'a>(f: &'a ModelFile, name: Option<&str>) -> Result<&'a Tlts, Failure> {
    match name {
        Some(n) => f.tlts(n).ok_or_else(|| Failure(format!("no tlts `{n}`"))),
        None => match f.tltss.as_slice() {
            [t] => Ok(t),
            [] => Err(Failure("file holds no tlts".into())),
            _ => Err(Failure("several tlts blocks; choose one with --tlts".into())),
        },
    }
}

fn tlts_state(t: &Tlts, name: &str) -> Result<usize, Failure> {
    t.state_index(name)
        .ok_or_else(|| Failure(format!("no state `{name}` in tlts `{}`", t.name)))
}

fn compose_expr(components: &[SequentialMa], e: &SystemExpr) -> Result<SequentialMa, Failure> {
    match e {
        SystemExpr::Leaf(i) => Ok(components[*i].clone()),
        SystemExpr::Par(l, sync, r) => Ok(compose(
            &compose_expr(components, l)?,
            &compose_expr(components, r)?,
            sync,
        )?),
    }
}

fn ma_lines(m: &SequentialMa) -> Vec<String> {
    let mut out = Vec::new();
    for s in 0..m.num_states() {
        for t in m.actions_from(s) {
            let target: Vec<String> = t.target.iter().map(|(x, p)| format!("{}: {p}", m.states[*x])).collect();
            out.push(format!("{} -{}-> {{{}}}", m.states[s], t.action, target.join(", ")));
        }
        for t in m.timed_from(s) {
            out.push(format!("{} -rate {}-> {}", m.states[s], t.rate, m.states[t.target]));
        }
    }
    out
}

fn joined(lines: &[String]) -> String {
    lines.iter().map(|l| format!("{l}\n")).collect()
}
