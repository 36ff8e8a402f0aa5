//! Batch front door for the locallab laboratory: generate instances,
//! simulate local algorithms, verify labelings, and profile locality, all
//! as pure functions of the command line with byte-identical reruns.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use locallab::forge::{
    corrupt, make_gk, make_growing_grid, make_perfect_tree, CorruptKind, GrowingGridSpec,
};
use locallab::lcl::{
    compose_cert, labeling_from_json, labeling_to_json, verify_solution, LclProblem,
};
use locallab::network::{network_from_json, network_to_json, Network};
use locallab::pi::{pi_consensus, pi_full, pi_grid, pi_row, pi_structural, pi_tree};
use locallab::sim::{
    alg_consensus, alg_structural, bounded_oracle, locality_profile, oracle_from_json,
    profile_csv, run, structural_labeling, HaltingOracle, LocalAlgorithm, SimError,
};
use locallab::turing::{tm_from_json, TuringMachine};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "locallab", version, about = "locally checkable labeling laboratory")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance and its canonical labeling.
    ///
    /// KIND is tree, grid, or gk, optionally suffixed with a corruption,
    /// e.g. gk:turing_two_heads (seeded by --seed).
    Gen {
        kind: String,
        #[command(flatten)]
        params: GenParams,
    },
    /// Simulate a local algorithm on an instance file.
    ///
    /// ALG is structural or consensus; consensus needs ORACLE, written
    /// ground-truth:<file> or bounded:<N> (or bounded with --N).
    Run {
        instance: String,
        alg: String,
        oracle: Option<String>,
        /// Machine file (required by both algorithms).
        #[arg(long)]
        tm: Option<String>,
        /// Bound for a bounded oracle given without an inline value.
        #[arg(long, id = "N")]
        n_bound: Option<u64>,
        /// Round budget before giving up.
        #[arg(long, default_value_t = 256)]
        budget: u32,
        /// Output prefix; writes <out>.labels.json and <out>.trace.csv.
        #[arg(long)]
        out: String,
    },
    /// Check a labeling file against one problem layer or the full stack.
    ///
    /// PROBLEM is tree, row, grid, turing, consensus, or full; turing and
    /// full need --tm.
    Verify {
        instance: String,
        labeling: String,
        problem: String,
        #[arg(long)]
        tm: Option<String>,
    },
    /// Profile the structural algorithm's halting rounds over the machine
    /// grid family.
    Profile {
        alg: String,
        /// Grid sizes, as a:b range or a comma list.
        #[arg(long)]
        ks: String,
        #[arg(long)]
        tm: String,
        /// Machine input bits, e.g. 101.
        #[arg(long, default_value = "1")]
        input: String,
        #[arg(long, default_value_t = 256)]
        budget: u32,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Args)]
struct GenParams {
    /// Tree levels (kind tree) or grid layers (kind gk).
    #[arg(long)]
    k: Option<u32>,
    /// Grid height (kind grid).
    #[arg(long)]
    h: Option<u32>,
    /// Top-row width (kind grid).
    #[arg(long)]
    l: Option<u32>,
    /// Machine file (kind gk).
    #[arg(long)]
    tm: Option<String>,
    /// Machine input bits, e.g. 101 (kind gk).
    #[arg(long)]
    input: Option<String>,
    /// Corruption-site seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix; writes <out>.instance.json and <out>.labels.json.
    #[arg(long)]
    out: String,
}

/// A recoverable command failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: msg.into() }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Gen { kind, params } => cmd_gen(&kind, &params),
        Cmd::Run { instance, alg, oracle, tm, n_bound, budget, out } => {
            cmd_run(&instance, &alg, oracle.as_deref(), tm.as_deref(), n_bound, budget, &out)
        }
        Cmd::Verify { instance, labeling, problem, tm } => {
            cmd_verify(&instance, &labeling, &problem, tm.as_deref())
        }
        Cmd::Profile { alg, ks, tm, input, budget, out } => {
            cmd_profile(&alg, &ks, &tm, &input, budget, out.as_deref())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

/// Write atomically: temp file in the same directory, then rename.
fn write_file(path: &str, text: &str) -> CmdResult {
    let tmp = format!("{path}.tmp");
    fs::write(&tmp, text)
        .and_then(|()| fs::rename(&tmp, path))
        .map_err(|e| usage(format!("cannot write {path}: {e}")))
}

fn read_file(path: &str) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))
}

fn load_network(path: &str) -> Result<Network, Failure> {
    network_from_json(&read_file(path)?).map_err(|e| usage(format!("{path}: {e}")))
}

fn load_tm(path: Option<&str>, needed_by: &str) -> Result<TuringMachine, Failure> {
    let path = path.ok_or_else(|| usage(format!("{needed_by} requires --tm <machine file>")))?;
    tm_from_json(&read_file(path)?).map_err(|e| usage(format!("{path}: {e}")))
}

fn parse_bits(s: &str) -> Result<Vec<u8>, Failure> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(usage(format!("input must be over {{0,1}}, got {c:?}"))),
        })
        .collect()
}

fn parse_ks(s: &str) -> Result<Vec<u32>, Failure> {
    let bad = || usage(format!("cannot parse --ks {s:?}; expected a:b or a,b,c"));
    let ks: Vec<u32> = if let Some((a, b)) = s.split_once(':') {
        let (a, b) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if ks.is_empty() {
        return Err(usage("--ks names no sizes"));
    }
    Ok(ks)
}

/// Deterministic record of the inputs that produced a set of artifacts.
fn manifest(subcommand: &str, fields: &[(&str, String)]) -> String {
    let mut doc = BTreeMap::new();
    doc.insert("subcommand".to_string(), subcommand.to_string());
    doc.insert("tool_version".to_string(), env!("CARGO_PKG_VERSION").to_string());
    for (k, v) in fields {
        doc.insert((*k).to_string(), v.clone());
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

fn cmd_gen(kind: &str, p: &GenParams) -> CmdResult {
    let (base, corruption) = match kind.split_once(':') {
        Some((b, c)) => {
            let c: CorruptKind = c.parse().map_err(|e| usage(format!("{e}")))?;
            (b, Some(c))
        }
        None => (kind, None),
    };
    let mut fields: Vec<(&str, String)> = vec![("kind", kind.to_string()), ("seed", p.seed.to_string())];
    let (net, tm, layers) = match base {
        "tree" => {
            let k = p.k.ok_or_else(|| usage("kind tree requires --k <levels>"))?;
            if k < 1 {
                return Err(usage("--k must be at least 1"));
            }
            fields.push(("k", k.to_string()));
            (make_perfect_tree(k), None, 1)
        }
        "grid" => {
            let h = p.h.ok_or_else(|| usage("kind grid requires --h"))?;
            let l = p.l.ok_or_else(|| usage("kind grid requires --l"))?;
            if h < 1 || l < 1 {
                return Err(usage("--h and --l must be at least 1"));
            }
            fields.push(("h", h.to_string()));
            fields.push(("l", l.to_string()));
            (make_growing_grid(&GrowingGridSpec { h, l }), None, 3)
        }
        "gk" => {
            let k = p.k.ok_or_else(|| usage("kind gk requires --k <layers>"))?;
            if k < 1 {
                return Err(usage("--k must be at least 1"));
            }
            let tm = load_tm(p.tm.as_deref(), "kind gk")?;
            let input = parse_bits(p.input.as_deref().unwrap_or("1"))?;
            fields.push(("k", k.to_string()));
            fields.push(("tm", p.tm.clone().unwrap_or_default()));
            fields.push(("input", p.input.clone().unwrap_or_else(|| "1".into())));
            let net = make_gk(&tm, k, &input).map_err(|e| usage(format!("{e}")))?;
            (net, Some(tm), 4)
        }
        other => return Err(usage(format!("unknown kind {other:?}; use tree, grid, or gk"))),
    };
    let net = match corruption {
        Some(c) => corrupt(&net, c, p.seed).map_err(|e| usage(format!("{e}")))?,
        None => net,
    };
    let labels = structural_labeling(&net, tm.as_ref(), layers);
    write_file(&format!("{}.instance.json", p.out), &network_to_json(&net))?;
    write_file(&format!("{}.labels.json", p.out), &labeling_to_json(&net, &labels))?;
    write_file(&format!("{}.manifest.json", p.out), &manifest("gen", &fields))?;
    println!("wrote {0}.instance.json {0}.labels.json ({1} nodes)", p.out, net.len());
    Ok(())
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn build_oracle(
    spec: Option<&str>,
    tm: &TuringMachine,
    n_flag: Option<u64>,
) -> Result<HaltingOracle, Failure> {
    let spec = spec.ok_or_else(|| {
        usage("consensus requires an oracle: ground-truth:<file> or bounded:<N>")
    })?;
    match spec.split_once(':') {
        Some(("ground-truth", path)) => {
            oracle_from_json(tm, &read_file(path)?).map_err(|e| usage(format!("{path}: {e}")))
        }
        Some(("bounded", n)) => {
            let n = n.parse().map_err(|_| usage(format!("bad bound in {spec:?}")))?;
            Ok(bounded_oracle(tm, n))
        }
        None if spec == "bounded" => {
            let n = n_flag.ok_or_else(|| usage("oracle bounded requires --N"))?;
            Ok(bounded_oracle(tm, n))
        }
        _ => Err(usage(format!(
            "unknown oracle {spec:?}; use ground-truth:<file> or bounded:<N>"
        ))),
    }
}

fn cmd_run(
    instance: &str,
    alg_name: &str,
    oracle: Option<&str>,
    tm_path: Option<&str>,
    n_flag: Option<u64>,
    budget: u32,
    out: &str,
) -> CmdResult {
    let net = load_network(instance)?;
    let tm = load_tm(tm_path, &format!("algorithm {alg_name}"))?;
    let alg: LocalAlgorithm = match alg_name {
        "structural" => alg_structural(&tm),
        "consensus" => alg_consensus(Arc::new(build_oracle(oracle, &tm, n_flag)?)),
        other => return Err(usage(format!("unknown algorithm {other:?}"))),
    };
    let trace = match run(&net, &alg, budget) {
        Ok(t) => t,
        Err(e @ SimError::BudgetExceeded { .. }) => {
            return Err(Failure { code: EXIT_BUDGET, message: e.to_string() });
        }
    };
    write_file(&format!("{out}.labels.json"), &labeling_to_json(&net, &trace.output))?;
    write_file(&format!("{out}.trace.csv"), &trace.dump(&net))?;
    let fields = [
        ("instance", instance.to_string()),
        ("alg", alg_name.to_string()),
        ("oracle", oracle.unwrap_or_default().to_string()),
        ("budget", budget.to_string()),
    ];
    write_file(&format!("{out}.manifest.json"), &manifest("run", &fields))?;
    println!(
        "wrote {out}.labels.json {out}.trace.csv (max round {})",
        trace.max_round
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn problem_for(name: &str, tm_path: Option<&str>) -> Result<LclProblem, Failure> {
    Ok(match name {
        "tree" => pi_tree().combined(),
        "row" => compose_cert(&pi_tree(), &pi_row()).combined(),
        "grid" => compose_cert(&compose_cert(&pi_tree(), &pi_row()), &pi_grid()).combined(),
        "turing" => pi_structural(&load_tm(tm_path, "problem turing")?).combined(),
        "consensus" => pi_consensus(),
        "full" => pi_full(&load_tm(tm_path, "problem full")?),
        other => {
            return Err(usage(format!(
                "unknown problem {other:?}; use tree, row, grid, turing, consensus, or full"
            )))
        }
    })
}

fn cmd_verify(instance: &str, labeling: &str, problem: &str, tm_path: Option<&str>) -> CmdResult {
    let net = load_network(instance)?;
    let p = problem_for(problem, tm_path)?;
    let out = labeling_from_json(&net, &read_file(labeling)?)
        .map_err(|e| usage(format!("{labeling}: {e}")))?;
    let violations = verify_solution(&net, &p, &out).map_err(|e| usage(format!("{e}")))?;
    if violations.is_empty() {
        println!("OK {} on {} ({} nodes)", p.name, instance, net.len());
        Ok(())
    } else {
        for v in &violations {
            println!("{}", v.report_line());
        }
        Err(Failure {
            code: EXIT_VERIFY,
            message: format!("{} violation(s) of {}", violations.len(), p.name),
        })
    }
}

// ---------------------------------------------------------------------------
// profile
// ---------------------------------------------------------------------------

fn cmd_profile(
    alg_name: &str,
    ks: &str,
    tm_path: &str,
    input: &str,
    budget: u32,
    out: Option<&str>,
) -> CmdResult {
    if alg_name != "structural" {
        return Err(usage(format!("profiling supports structural, not {alg_name:?}")));
    }
    let tm = load_tm(Some(tm_path), "profile")?;
    let bits = parse_bits(input)?;
    let ks = parse_ks(ks)?;
    if let Some(&k) = ks.iter().find(|&&k| (k as usize) < bits.len().max(1)) {
        return Err(usage(format!("k = {k} is smaller than the input length")));
    }
    let alg = alg_structural(&tm);
    let family = |k: u32| make_gk(&tm, k, &bits).expect("sizes checked against input length");
    let rows = match locality_profile(family, &alg, &ks, budget) {
        Ok(r) => r,
        Err(e @ SimError::BudgetExceeded { .. }) => {
            return Err(Failure { code: EXIT_BUDGET, message: e.to_string() });
        }
    };
    let csv = profile_csv(&rows);
    match out {
        Some(path) => {
            write_file(path, &csv)?;
            let p = Path::new(path);
            let fields = [
                ("ks", ks.iter().map(u32::to_string).collect::<Vec<_>>().join(",")),
                ("tm", tm_path.to_string()),
                ("input", input.to_string()),
                ("budget", budget.to_string()),
            ];
            let manifest_path = p.with_extension("manifest.json");
            write_file(&manifest_path.to_string_lossy(), &manifest("profile", &fields))?;
            println!("wrote {path}");
        }
        None => print!("{csv}"),
    }
    Ok(())
}
