//! The `flatmu` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::acceptance;
use crate::closure::atoms;
use crate::construct::{build_with, root_atoms, Budget};
use crate::network::{compute_timeouts, find_defects, to_dot, Context, NetworkDoc};
use crate::semantics::{brute_force_sat, holds, KripkeModel};
use crate::syntax::{guardify, parse, ConnectiveTable, Formula};

#[derive(Parser, Debug)]
#[command(name = "flatmu", version, about = "Flat modal fixpoint logic with converse")]
struct Cli {
    /// JSON file of connective definitions.
    #[arg(long, global = true)]
    defs: Option<PathBuf>,
    /// Inline connective definition, `NAME:ARITY=BODY`. Repeatable.
    #[arg(long = "define", global = true, value_name = "NAME:ARITY=BODY")]
    define: Vec<String>,
    /// Reserved; rejected.
    #[arg(long, global = true, hide = true)]
    seed: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a formula and print it back.
    Parse { formula: String },
    /// Print the disjunctive class and guardedness of each connective.
    Classify,
    /// Split a disjunctive connective into γ1 and a guarded γ2.
    Guardify { defs: PathBuf, name: String },
    /// Print the closure with indices.
    Closure { formula: String },
    /// Print the atoms of the closure, one JSON array per line.
    Atoms { formula: String },
    /// Evaluate a formula at a state of a model.
    Check {
        model: PathBuf,
        state: usize,
        formula: String,
    },
    /// Search all models up to a size for one satisfying the formula.
    Sat {
        #[arg(long, default_value_t = 3)]
        max_states: usize,
        formula: String,
    },
    /// Inspect a network file.
    Net {
        #[command(subcommand)]
        action: NetAction,
    },
    /// Build networks for atoms containing the formula.
    Build {
        #[arg(long, default_value_t = Budget::default().max_nodes)]
        max_nodes: usize,
        #[arg(long, default_value_t = Budget::default().max_depth)]
        max_depth: usize,
        #[arg(long, default_value_t = Budget::default().max_rounds)]
        max_rounds: usize,
        /// Number of root atoms to try.
        #[arg(long, default_value_t = 16)]
        max_atoms: usize,
        /// Write `atom<i>-round<r>.dot` files here.
        #[arg(long)]
        dot_dir: Option<PathBuf>,
        formula: String,
    },
    /// Run the acceptance checks.
    Selftest {
        /// Negate one axiom instance; the axiom check must then fail.
        #[arg(long)]
        corrupt_axiom: bool,
    },
}

#[derive(Subcommand, Debug)]
enum NetAction {
    /// Print the violated network conditions.
    Validate { net: PathBuf },
    /// Print the defects as JSON.
    Defects { net: PathBuf },
    /// Print the timeout of each active deferral.
    Timeouts { net: PathBuf },
    /// Print the network in Graphviz format.
    Dot { net: PathBuf },
}

type Out<'a> = &'a mut dyn Write;

/// Failure exit: message for the error stream and the exit code.
struct Fail(i32, String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(1, e.to_string())
    }
}

/// Runs the command line `args` (without the program name). Returns the exit
/// code: 0 on success, 1 on usage or input errors, 2 on a negative or
/// inconclusive answer.
pub fn run(args: impl IntoIterator<Item = String>, out: Out, err: Out) -> i32 {
    let argv = std::iter::once("flatmu".to_string()).chain(args);
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "flatmu: {msg}");
            code
        }
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail(1, format!("{}: {e}", path.display())))
}

fn load_table(defs: Option<&Path>, inline: &[String]) -> Result<ConnectiveTable, Fail> {
    let mut table = match defs {
        Some(p) => ConnectiveTable::from_json(&read(p)?)?,
        None => ConnectiveTable::new(),
    };
    for d in inline {
        let bad = || Fail(1, format!("bad --define {d:?}: expected NAME:ARITY=BODY"));
        let (head, body) = d.split_once('=').ok_or_else(bad)?;
        let (name, arity) = head.split_once(':').ok_or_else(bad)?;
        let arity: usize = arity.trim().parse().map_err(|_| bad())?;
        table.define(name.trim(), arity, body)?;
    }
    Ok(table)
}

fn dispatch(cli: Cli, out: Out, err: Out) -> Result<i32, Fail> {
    if cli.seed.is_some() {
        return Err(Fail(
            1,
            "--seed is not supported: every procedure is deterministic".into(),
        ));
    }
    let table = load_table(cli.defs.as_deref(), &cli.define)?;
    let formula = |text: &str| -> Result<Formula, Fail> { Ok(parse(text, &table)?) };
    match cli.command {
        Command::Parse { formula: f } => {
            writeln!(out, "{}", formula(&f)?)?;
        }
        Command::Classify => {
            for chi in table.iter() {
                writeln!(
                    out,
                    "{}/{}\t{}\t{}\t{}",
                    chi.name(),
                    chi.arity(),
                    chi.class(),
                    if chi.is_guarded() { "guarded" } else { "unguarded" },
                    chi.body()
                )?;
            }
        }
        Command::Guardify { defs, name } => {
            let mut t = ConnectiveTable::from_json(&read(&defs)?)?;
            for chi in table.iter() {
                t.insert((**chi).clone());
            }
            let chi = t
                .get(&name)
                .ok_or_else(|| Fail(1, format!("no connective named {name}")))?;
            let res = guardify(chi)?;
            writeln!(out, "gamma1: {}", res.gamma1)?;
            writeln!(out, "gamma2: {} = {}", res.gamma2.name(), res.gamma2.body())?;
            writeln!(out, "equivalence: {}", res.equivalence)?;
        }
        Command::Closure { formula: f } => {
            let ctx = Context::new(&formula(&f)?)?;
            for (i, g) in ctx.sigma.formulas().iter().enumerate() {
                writeln!(out, "{i}\t{g}")?;
            }
        }
        Command::Atoms { formula: f } => {
            let ctx = Context::new(&formula(&f)?)?;
            for a in atoms(&ctx.sigma) {
                // a closed pipe (`| head`) ends the stream quietly
                match writeln!(out, "{}", serde_json::to_string(&a.to_vec())?) {
                    Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => break,
                    r => r?,
                }
            }
        }
        Command::Check {
            model,
            state,
            formula: f,
        } => {
            let m = KripkeModel::from_json(&read(&model)?)?;
            if state >= m.states() {
                return Err(Fail(
                    1,
                    format!("state {state} out of range (model has {})", m.states()),
                ));
            }
            let t = holds(&formula(&f)?, &m, state);
            writeln!(out, "{t}")?;
            return Ok(if t { 0 } else { 2 });
        }
        Command::Sat { max_states, formula: f } => match brute_force_sat(&formula(&f)?, max_states)? {
            Some((m, s)) => {
                writeln!(out, "{}", m.to_json())?;
                writeln!(err, "satisfied at state {s}")?;
            }
            None => {
                writeln!(out, "none ≤ {max_states}")?;
                return Ok(2);
            }
        },
        Command::Net { action } => return net(action, out),
        Command::Build {
            max_nodes,
            max_depth,
            max_rounds,
            max_atoms,
            dot_dir,
            formula: f,
        } => {
            let budget = Budget {
                max_nodes,
                max_depth,
                max_rounds,
            };
            return build_cmd(&formula(&f)?, budget, max_atoms, dot_dir.as_deref(), out, err);
        }
        Command::Selftest { corrupt_axiom } => {
            let options = acceptance::Options {
                corrupt_axiom,
                exe: std::env::current_exe().ok(),
            };
            let mut failed = 0;
            for id in 1..=acceptance::count() {
                let o = acceptance::run_check(id, &options);
                writeln!(out, "{}", o.line())?;
                out.flush()?;
                failed += usize::from(!o.passed);
            }
            writeln!(
                out,
                "{} of {} checks passed",
                acceptance::count() - failed,
                acceptance::count()
            )?;
            return Ok(if failed == 0 { 0 } else { 2 });
        }
    }
    Ok(0)
}

fn net(action: NetAction, out: Out) -> Result<i32, Fail> {
    let path = match &action {
        NetAction::Validate { net }
        | NetAction::Defects { net }
        | NetAction::Timeouts { net }
        | NetAction::Dot { net } => net,
    };
    let (ctx, net) = NetworkDoc::from_json(&read(path)?)?.load()?;
    match action {
        NetAction::Validate { .. } => {
            let bad = net.validate(&ctx);
            for v in &bad {
                writeln!(out, "{}", v.describe(&ctx))?;
            }
            if !net.is_anticonfluent() {
                writeln!(out, "the network is not anticonfluent")?;
                return Ok(2);
            }
            if !bad.is_empty() {
                return Ok(2);
            }
            writeln!(out, "valid")?;
        }
        NetAction::Defects { .. } => {
            let defects = find_defects(&net, &ctx);
            writeln!(out, "{}", serde_json::to_string_pretty(&defects)?)?;
            if !defects.is_empty() {
                return Ok(2);
            }
        }
        NetAction::Timeouts { .. } => {
            for ((u, d), k) in compute_timeouts(&net, &ctx).iter() {
                let k = k.map_or("unfinished".to_string(), |k| k.to_string());
                writeln!(out, "{u}\t{d}\t{}\t{k}", ctx.table.instance(d, &ctx.sigma))?;
            }
        }
        NetAction::Dot { .. } => {
            write!(out, "{}", to_dot(&net, &ctx, &compute_timeouts(&net, &ctx)))?;
        }
    }
    Ok(0)
}

fn build_cmd(
    phi: &Formula,
    budget: Budget,
    max_atoms: usize,
    dot_dir: Option<&Path>,
    out: Out,
    err: Out,
) -> Result<i32, Fail> {
    let ctx = Context::new(phi)?;
    if let Some(dir) = dot_dir {
        fs::create_dir_all(dir).map_err(|e| Fail(1, format!("{}: {e}", dir.display())))?;
    }
    let candidates = root_atoms(&ctx, phi, max_atoms);
    if candidates.is_empty() {
        writeln!(err, "no atom contains the formula with witnesses for its diamonds")?;
    }
    let mut reports = Vec::new();
    let mut perfect = false;
    for (i, a) in candidates.iter().enumerate() {
        let mut io_error = None;
        let report = build_with(&ctx, a, budget, |round, net| {
            if let Some(dir) = dot_dir {
                let path = dir.join(format!("atom{i}-round{round}.dot"));
                if let Err(e) = fs::write(&path, to_dot(net, &ctx, &compute_timeouts(net, &ctx))) {
                    io_error.get_or_insert(format!("{}: {e}", path.display()));
                }
            }
        });
        if let Some(e) = io_error {
            return Err(Fail(1, e));
        }
        writeln!(err, "atom {i}: {:?}", report.verdict)?;
        perfect = report.is_perfect();
        reports.push(report);
        if perfect {
            break;
        }
    }
    writeln!(out, "{}", serde_json::to_string_pretty(&reports)?)?;
    Ok(if perfect { 0 } else { 2 })
}
