use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use thiserror::Error;

use lvcert::graph::{load_graph, GraphError};
use lvcert::label::{read_labels, write_labels, LabelError};
use lvcert::mso::suite::lookup;
use lvcert::mso::{
    eval_formula, incidence_graph, mso2_to_mso1, parse_formula, Budget, EvalError, Formula,
    FormulaError, LabeledGraph, Logic, Mso2Structure,
};
use lvcert::sim::{
    all_yes, certify, fuzz_soundness, run_round_labeled, stats, FuzzError, PipelineError,
    TreeChoice, VerifierConfig,
};
use lvcert::{Decision, Verdict, VertexId};

#[derive(Parser)]
#[command(name = "cert", version)]
#[command(about = "Prove, verify and attack proof-labeling certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the honest prover and write the labeling
    Prove {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        dumps: Dumps,
    },
    /// Run one verification round on a stored labeling
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Prove, then verify
    Check {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        dumps: Dumps,
    },
    /// Attack a negative instance with adversarial labelings
    Fuzz {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate the formula by brute force
    Oracle {
        #[command(flatten)]
        common: Common,
    },
    /// Label sizes, widths and timings of an honest run
    Stats {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Edge list or DIMACS file
    #[arg(long)]
    graph: PathBuf,
    /// Sentence text or a suite name; omit to certify treewidth alone
    #[arg(long)]
    formula: Option<String>,
    #[arg(long, default_value_t = 2)]
    omega: usize,
    #[arg(long, value_enum, default_value_t = LogicArg::Mso1)]
    logic: LogicArg,
    #[arg(long, value_enum, default_value_t = TreeArg::Auto)]
    tree: TreeArg,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct Dumps {
    /// Print the elimination tree as `v parent depth str...` lines
    #[arg(long)]
    dump_tree: bool,
    /// Print the oriented paths as `u -> v : p0 ... pl` lines
    #[arg(long)]
    dump_paths: bool,
    /// Pretty-print the evaluation tree of this vertex
    #[arg(long, value_name = "V")]
    dump_evaltree: Option<VertexId>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogicArg {
    Mso1,
    Mso2,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeArg {
    Auto,
    Exact,
    Heuristic,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Fuzz(#[from] FuzzError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("this command needs --formula")]
    NoFormula,
    #[error("vertex {0} is not in the graph")]
    NoVertex(VertexId),
    #[error("no evaluation trees without --formula")]
    NoForest,
}

/// Graph and formula after resolving the logic.
struct Instance {
    /// Original graph for MSO1, incidence graph for MSO2.
    lg: LabeledGraph,
    formula: Option<Formula>,
    /// The formula as parsed, before any translation.
    source: Option<(Formula, Logic)>,
    omega: usize,
    choice: TreeChoice,
    json: bool,
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

impl Instance {
    fn load(c: &Common) -> Result<Self, CliError> {
        let g = load_graph(&String::from_utf8_lossy(&read(&c.graph)?))?;
        let mut logic = match c.logic {
            LogicArg::Mso1 => Logic::Mso1,
            LogicArg::Mso2 => Logic::Mso2,
        };
        let source = match &c.formula {
            None => None,
            Some(text) => {
                let text = match lookup(text) {
                    Some(e) => {
                        logic = e.logic;
                        e.text
                    }
                    None => text.as_str(),
                };
                Some((parse_formula(text, logic)?, logic))
            }
        };
        let (lg, formula) = match (&source, logic) {
            (Some((f, Logic::Mso2)), _) => (incidence_graph(&g), Some(mso2_to_mso1(f))),
            (None, Logic::Mso2) => (incidence_graph(&g), None),
            (f, _) => (LabeledGraph::unlabeled(g), f.as_ref().map(|(f, _)| f.clone())),
        };
        Ok(Instance {
            lg,
            formula,
            source,
            omega: c.omega,
            choice: match c.tree {
                TreeArg::Auto => TreeChoice::Auto,
                TreeArg::Exact => TreeChoice::Exact,
                TreeArg::Heuristic => TreeChoice::Heuristic,
            },
            json: c.json,
        })
    }

    fn config(&self) -> VerifierConfig {
        VerifierConfig {
            omega: self.omega,
            formula: self.formula.clone(),
        }
    }
}

/// Key/value report printed as `key: value` lines or one JSON object.
#[derive(Default)]
struct Report(Vec<(String, Value)>);

impl Report {
    fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.0.push((key.to_owned(), value.into()));
    }

    fn print(self, as_json: bool) {
        if as_json {
            let map: Map<String, Value> = self.0.into_iter().collect();
            println!("{}", Value::Object(map));
            return;
        }
        for (k, v) in self.0 {
            match v {
                Value::String(s) => println!("{k}: {s}"),
                Value::Array(items) => {
                    println!("{k}:");
                    for item in items {
                        match item {
                            Value::String(s) => println!("  {s}"),
                            other => println!("  {other}"),
                        }
                    }
                }
                other => println!("{k}: {other}"),
            }
        }
    }

    fn extend_from(&mut self, value: Value) {
        if let Value::Object(map) = value {
            self.0.extend(map);
        }
    }
}

fn verdict_entries(verdicts: &[Verdict], as_json: bool) -> Value {
    let entries = verdicts.iter().enumerate().map(|(i, v)| {
        let word = match v.decision {
            Decision::Yes => "YES",
            Decision::No => "NO",
        };
        let reason = v.reason.as_ref().map(ToString::to_string);
        if as_json {
            json!({ "vertex": i + 1, "decision": word, "reason": reason })
        } else {
            match reason {
                Some(r) => Value::String(format!("{} {word} ({r})", i + 1)),
                None => Value::String(format!("{} {word}", i + 1)),
            }
        }
    });
    Value::Array(entries.collect())
}

fn round_report(inst: &Instance, labels: &[lvcert::label::BitString]) -> (Report, bool) {
    let verdicts = run_round_labeled(&inst.lg, labels, &inst.config());
    let ok = all_yes(&verdicts);
    let mut r = Report::default();
    r.put("n", inst.lg.graph.n());
    r.put("omega", inst.omega);
    r.put(
        "rejecting",
        verdicts.iter().filter(|v| !v.is_yes()).count(),
    );
    r.put("accepted", ok);
    r.put("verdicts", verdict_entries(&verdicts, inst.json));
    (r, ok)
}

fn prove(inst: &Instance, dumps: &Dumps) -> Result<(Report, Vec<lvcert::label::BitString>), CliError> {
    let cert = certify(&inst.lg, inst.omega, inst.formula.as_ref(), &inst.choice)?;
    if dumps.dump_tree {
        print!("{}", cert.tree.dump());
    }
    if dumps.dump_paths {
        print!("{}", cert.paths.dump());
    }
    if let Some(v) = dumps.dump_evaltree {
        if v == 0 || v as usize > inst.lg.graph.n() {
            return Err(CliError::NoVertex(v));
        }
        let forest = cert.forest.as_ref().ok_or(CliError::NoForest)?;
        print!("{}", forest.engine.dump(forest.tree(v)));
    }
    let mut r = Report::default();
    r.put("n", inst.lg.graph.n());
    r.put("omega", inst.omega);
    r.put("width", cert.tree.width());
    r.put("root", cert.tree.root());
    r.put("channels", cert.paths.paths.len());
    r.put(
        "max_label_bits",
        cert.labels.iter().map(|l| l.len()).max().unwrap_or(0),
    );
    Ok((r, cert.labels))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Prove { common, out, dumps } => {
            let inst = Instance::load(&common)?;
            let (mut r, labels) = prove(&inst, &dumps)?;
            fs::write(&out, write_labels(&labels)).map_err(|source| CliError::Io {
                path: out.clone(),
                source,
            })?;
            r.put("out", out.display().to_string());
            r.print(inst.json);
            Ok(true)
        }
        Command::Verify { common, labels } => {
            let inst = Instance::load(&common)?;
            let labels = read_labels(&read(&labels)?, inst.lg.graph.n())?;
            let (r, ok) = round_report(&inst, &labels);
            r.print(inst.json);
            Ok(ok)
        }
        Command::Check { common, dumps } => {
            let inst = Instance::load(&common)?;
            let (mut r, labels) = prove(&inst, &dumps)?;
            let (round, ok) = round_report(&inst, &labels);
            r.0.extend(round.0.into_iter().filter(|(k, _)| k != "n" && k != "omega"));
            r.print(inst.json);
            Ok(ok)
        }
        Command::Fuzz {
            common,
            trials,
            seed,
        } => {
            let inst = Instance::load(&common)?;
            let f = inst.formula.as_ref().ok_or(CliError::NoFormula)?;
            let report = fuzz_soundness(&inst.lg, inst.omega, f, trials, seed)?;
            let clean = report.accepted == 0;
            let mut r = Report::default();
            r.extend_from(serde_json::to_value(&report).expect("report serializes"));
            if !clean {
                r.put(
                    "CRITICAL",
                    format!("{} adversarial labelings were accepted", report.accepted),
                );
            }
            r.print(inst.json);
            Ok(clean)
        }
        Command::Oracle { common } => {
            let inst = Instance::load(&common)?;
            let (f, logic) = inst.source.as_ref().ok_or(CliError::NoFormula)?;
            let truth = match logic {
                Logic::Mso1 => eval_formula(&inst.lg, f, Budget::default())?,
                Logic::Mso2 => {
                    let g = load_graph(&String::from_utf8_lossy(&read(&common.graph)?))?;
                    eval_formula(&Mso2Structure::new(&g), f, Budget::default())?
                }
            };
            let mut r = Report::default();
            r.put("n", inst.lg.graph.n());
            r.put("holds", truth);
            r.print(inst.json);
            Ok(true)
        }
        Command::Stats { common } => {
            let inst = Instance::load(&common)?;
            let s = stats(&inst.lg, inst.omega, inst.formula.as_ref(), &inst.choice)?;
            let mut r = Report::default();
            r.extend_from(serde_json::to_value(&s).expect("stats serialize"));
            r.print(inst.json);
            Ok(s.accepted)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
