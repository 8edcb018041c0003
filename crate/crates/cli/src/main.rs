//! `finsum` — command-line front end for the finite-sums combinatorics
//! library.
//!
//! Exit codes: 0 success/pass, 1 definitional failure (no witness found,
//! counterexample, failed verification, exhausted refinement), 2 resource
//! ceilings (enumeration and search caps, overflow), 64 usage errors.

mod parse;
mod report;

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use finsum_core::ground::{
    decompositions, fs_set, greedy_very_sparse, is_sparse, is_very_sparse, tail_shift,
};
use finsum_core::ideals::{judge, summable_weight};
use finsum_core::katetov::{search_witness, verify_witness};
use finsum_core::partition::{h1_profile, partition_index, partition_index_arithmetic};
use finsum_core::refine::{refine_avoid, refine_fs1};
use finsum_core::search::{fs_witness, longest_ap};
use finsum_core::separation::{
    build_separation, check_fibers, verify_trace, Schedule, SeparationOutcome, SeparationTrace,
};
use finsum_core::{Caps, Error};

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_RESOURCE: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "finsum",
    version,
    about = "Finite-sums set algebra, ideal oracles, and the separation engine"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output format (csv applies to partition profiles only).
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker cap for internally parallel scans.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized instance generation; recorded in the report.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the FS enumeration cap (env FINSUM_FS_CAP).
    #[arg(long, global = true)]
    fs_cap: Option<usize>,
    /// Override the very-sparse pair-check cap (env FINSUM_VS_CAP).
    #[arg(long, global = true)]
    vs_cap: Option<usize>,
    /// Override the witness depth cap (env FINSUM_DEPTH_CAP).
    #[arg(long, global = true)]
    depth_cap: Option<usize>,
    /// Override the map-search budget (env FINSUM_MAP_BUDGET).
    #[arg(long, global = true)]
    map_budget: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Human,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Finite sums FS(D) of a ground set.
    Fs {
        #[arg(long)]
        set: String,
        /// Also list every decomposition.
        #[arg(long)]
        decompositions: bool,
    },
    /// Sparseness and very-sparseness of a ground set.
    Sparse {
        #[arg(long)]
        set: String,
    },
    /// Greedy very-sparse subsequence of a source.
    Greedy {
        /// Ascending stream starting here (mutually exclusive with --set).
        #[arg(long, conflicts_with = "set")]
        from: Option<u64>,
        /// Finite source set.
        #[arg(long)]
        set: Option<String>,
        #[arg(long)]
        length: usize,
    },
    /// Minimal tail shift e with FS(E ∖ e) ⊆ FS(D ∖ d).
    Tail {
        #[arg(long)]
        d: String,
        #[arg(long)]
        e: String,
        #[arg(long, default_value_t = 0)]
        drop: u64,
    },
    /// FS-witness (IP positivity) search inside a set.
    WitnessIp {
        #[arg(long)]
        set: String,
        #[arg(long)]
        depth: usize,
        /// Universe cap the host must respect (defaults to max of the set).
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Longest arithmetic progression inside a set.
    WitnessAp {
        #[arg(long)]
        set: String,
    },
    /// Exact summable weight Σ 1/(n+1).
    Weight {
        #[arg(long)]
        set: String,
    },
    /// Judge a set against one ideal oracle.
    Judge {
        #[arg(long)]
        set: String,
        /// summable[:thr] | vdw[:len] | hindman[:depth] | folkman[:depth]
        #[arg(long)]
        ideal: String,
    },
    /// Diagonal refinement through a nested chain (head very sparse).
    RefineFs1 {
        /// Semicolon-separated chain, head first, or @file (array of arrays).
        #[arg(long)]
        chain: String,
        #[arg(long)]
        target: usize,
    },
    /// Refinement avoiding a family of sets.
    RefineAvoid {
        #[arg(long)]
        set: String,
        /// Semicolon-separated avoid family or @file.
        #[arg(long)]
        avoid: String,
        #[arg(long)]
        target: usize,
    },
    /// P_k partition profile of FS(D).
    Partition {
        #[arg(long)]
        set: Option<String>,
        /// Classify a single value instead of a whole ground set.
        #[arg(long, conflicts_with = "set")]
        value: Option<u64>,
    },
    /// Verify a coloring as a reduction witness over a probe family.
    KatetovVerify {
        /// log2 | identity | mod:K | block:W | constant:C | @table.json
        #[arg(long)]
        map: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        /// all | random:COUNT | @file (array of arrays)
        #[arg(long, default_value = "all")]
        probes: String,
    },
    /// Search a map family for a witness passing the probe family.
    KatetovSearch {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        /// full | monotone | block:W
        #[arg(long, default_value = "full")]
        family: String,
        #[arg(long, default_value = "all")]
        probes: String,
    },
    /// Judge every fiber of a coloring with the Hindman oracle.
    CheckFibers {
        #[arg(long)]
        coloring: String,
        #[arg(long)]
        domain: u64,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Build a separation trace for a coloring.
    Separate {
        #[arg(long)]
        coloring: String,
        #[arg(long)]
        domain: u64,
        #[arg(long, default_value_t = 4)]
        stages: usize,
        /// Nonincreasing per-stage witness sizes, e.g. 3,2,1.
        #[arg(long)]
        depths: Option<String>,
        /// Explicit schedule a_0,a_1,… (default a_n = 4^{n+2}−1).
        #[arg(long)]
        schedule: Option<String>,
        /// Write the full trace JSON here (stdout report stays a summary).
        #[arg(long)]
        out: Option<String>,
    },
    /// Re-verify a serialized separation trace without rebuilding.
    VerifyTrace {
        #[arg(long)]
        trace: String,
        #[arg(long)]
        coloring: String,
        #[arg(long)]
        domain: u64,
    },
}

fn caps_from(global: &Global) -> Caps {
    let env_usize = |k: &str| std::env::var(k).ok().and_then(|v| v.parse().ok());
    let env_u64 = |k: &str| std::env::var(k).ok().and_then(|v| v.parse().ok());
    let base = Caps::default();
    Caps {
        fs_elements: global
            .fs_cap
            .or(env_usize("FINSUM_FS_CAP"))
            .unwrap_or(base.fs_elements),
        very_sparse_elements: global
            .vs_cap
            .or(env_usize("FINSUM_VS_CAP"))
            .unwrap_or(base.very_sparse_elements),
        witness_depth: global
            .depth_cap
            .or(env_usize("FINSUM_DEPTH_CAP"))
            .unwrap_or(base.witness_depth),
        map_search_budget: global
            .map_budget
            .or(env_u64("FINSUM_MAP_BUDGET"))
            .unwrap_or(base.map_search_budget),
        separation_stages: base.separation_stages,
    }
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::EnumerationTooLarge { .. }
        | Error::SearchTooLarge(_)
        | Error::ArithmeticOverflow => EXIT_RESOURCE,
        Error::InsufficientSource { .. } => EXIT_NEGATIVE,
        Error::InvalidInput(_)
        | Error::InvalidChain(_)
        | Error::InvalidProbe { .. }
        | Error::DomainExceeded { .. } => EXIT_USAGE,
    }
}

struct Outcome {
    result: serde_json::Value,
    human: String,
    exit: u8,
}

fn ok(result: serde_json::Value, human: String) -> Result<Outcome, CliError> {
    Ok(Outcome {
        result,
        human,
        exit: EXIT_OK,
    })
}

fn negative(result: serde_json::Value, human: String) -> Result<Outcome, CliError> {
    Ok(Outcome {
        result,
        human,
        exit: EXIT_NEGATIVE,
    })
}

enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<String> for CliError {
    fn from(e: String) -> Self {
        CliError::Usage(e)
    }
}

fn rational_json(r: &num::BigRational) -> serde_json::Value {
    json!({ "num": r.numer().to_string(), "den": r.denom().to_string() })
}

fn probes_from(spec: &str, codomain: u64, seed: Option<u64>) -> Result<Vec<Vec<u64>>, CliError> {
    if spec == "all" {
        if codomain > 16 {
            return Err(CliError::Usage(format!(
                "probes=all needs codomain <= 16, got {codomain}"
            )));
        }
        let m = codomain as u32;
        return Ok((0u32..(1 << m))
            .map(|mask| (0..m as u64).filter(|&v| mask >> v & 1 == 1).collect())
            .collect());
    }
    if let Some(count) = spec.strip_prefix("random:") {
        let count: usize = count
            .parse()
            .map_err(|e| CliError::Usage(format!("bad probe count: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut probe: Vec<u64> = (0..codomain).filter(|_| rng.random_bool(0.5)).collect();
            probe.sort_unstable();
            out.push(probe);
        }
        return Ok(out);
    }
    parse::parse_set_list(spec).map_err(CliError::Usage)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let caps = caps_from(&cli.global);
    let seed = cli.global.seed;
    match &cli.command {
        Command::Fs {
            set,
            decompositions: with_decomps,
        } => {
            let d = parse::parse_ground(set)?;
            let fs = fs_set(&d, &caps)?;
            let mut result = json!({
                "ground": d.elements(),
                "values": fs.values(),
                "count": fs.len(),
            });
            if *with_decomps {
                let table = decompositions(&d, &caps)?;
                result["decompositions"] = table.to_json();
            }
            let human = format!(
                "FS({:?}) = {:?} ({} values)",
                d.elements(),
                fs.values(),
                fs.len()
            );
            ok(result, human)
        }
        Command::Sparse { set } => {
            let d = parse::parse_ground(set)?;
            let sparse = is_sparse(&d, &caps)?;
            let very = is_very_sparse(&d, &caps)?;
            ok(
                json!({ "ground": d.elements(), "sparse": sparse, "very_sparse": very }),
                format!("sparse: {sparse}, very sparse: {very}"),
            )
        }
        Command::Greedy { from, set, length } => {
            let picked = match (from, set) {
                (Some(start), None) => greedy_very_sparse(*start.., *length),
                (None, Some(raw)) => {
                    let source = parse::parse_set(raw).map_err(CliError::Usage)?;
                    greedy_very_sparse(source, *length)
                }
                _ => {
                    return Err(CliError::Usage(
                        "greedy needs exactly one of --from / --set".into(),
                    ))
                }
            };
            match picked {
                Ok(d) => ok(
                    json!({ "ground": d.elements(), "rule": "d_n > 2*sum(previous)" }),
                    format!("{:?}", d.elements()),
                ),
                Err(Error::InsufficientSource { needed, got }) => negative(
                    json!({ "error": "insufficient-source", "needed": needed, "got": got }),
                    format!("insufficient source: picked {got} of {needed}"),
                ),
                Err(e) => Err(e.into()),
            }
        }
        Command::Tail { d, e, drop } => {
            let d = parse::parse_ground(d)?;
            let e = parse::parse_ground(e)?;
            let shift = tail_shift(&d, &e, *drop, &caps)?;
            ok(
                json!({
                    "shift": shift.shift,
                    "surviving": shift.surviving,
                    "vacuous": shift.vacuous,
                }),
                format!(
                    "e = {} ({} surviving{})",
                    shift.shift,
                    shift.surviving,
                    if shift.vacuous { ", vacuous" } else { "" }
                ),
            )
        }
        Command::WitnessIp { set, depth, cap } => {
            let host = parse::parse_set(set).map_err(CliError::Usage)?;
            let universe = cap.or_else(|| host.last().copied()).unwrap_or(0);
            match fs_witness(&host, *depth, universe, &caps)? {
                Some(w) => ok(
                    json!({
                        "kind": "fs",
                        "elements": w.ground.elements(),
                        "host_hash": report::input_hash(&format!("{host:?}")),
                    }),
                    format!("{:?}", w.ground.elements()),
                ),
                None => negative(
                    json!({ "kind": "fs", "elements": null, "host_hash": report::input_hash(&format!("{host:?}")) }),
                    "none".to_string(),
                ),
            }
        }
        Command::WitnessAp { set } => {
            let host = parse::parse_set(set).map_err(CliError::Usage)?;
            let w = longest_ap(&host)?;
            ok(
                json!({
                    "kind": "ap",
                    "start": w.start,
                    "step": w.step,
                    "length": w.length,
                    "host_hash": report::input_hash(&format!("{host:?}")),
                }),
                format!("start {}, step {}, length {}", w.start, w.step, w.length),
            )
        }
        Command::Weight { set } => {
            let a = parse::parse_set(set).map_err(CliError::Usage)?;
            let w = summable_weight(&a);
            let approx: f64 = {
                let n: f64 = w.numer().to_string().parse().unwrap_or(f64::NAN);
                let d: f64 = w.denom().to_string().parse().unwrap_or(f64::NAN);
                n / d
            };
            ok(
                json!({ "weight": rational_json(&w), "approx": approx }),
                format!("{}/{} ≈ {approx:.6}", w.numer(), w.denom()),
            )
        }
        Command::Judge { set, ideal } => {
            let a = parse::parse_set(set).map_err(CliError::Usage)?;
            let cfg = parse::parse_oracle(ideal).map_err(CliError::Usage)?;
            let j = judge(&a, &cfg, &caps)?;
            let verdict = if j.is_positive() { "positive" } else { "small" };
            ok(
                json!({
                    "config": cfg,
                    "verdict": verdict,
                    "depth_used": j.depth_used,
                    "evidence": j.evidence,
                }),
                format!("{verdict} (depth {})", j.depth_used),
            )
        }
        Command::RefineFs1 { chain, target } => {
            let chain = parse::parse_ground_list(chain).map_err(CliError::Usage)?;
            let r = refine_fs1(&chain, *target, &caps)?;
            let exit_neg = r.exhausted_at.is_some();
            let result = serde_json::to_value(&r).expect("report serializes");
            let human = format!(
                "E = {:?}{}",
                r.output.elements(),
                r.exhausted_at
                    .map(|s| format!(" (exhausted at stage {s})"))
                    .unwrap_or_default()
            );
            if exit_neg {
                negative(result, human)
            } else {
                ok(result, human)
            }
        }
        Command::RefineAvoid { set, avoid, target } => {
            let d = parse::parse_ground(set)?;
            let avoid = parse::parse_set_list(avoid).map_err(CliError::Usage)?;
            let r = refine_avoid(&d, &avoid, *target, &caps)?;
            let exit_neg = r.exhausted_at.is_some();
            let result = serde_json::to_value(&r).expect("report serializes");
            let human = format!(
                "D' = {:?}{}",
                r.output.elements(),
                r.exhausted_at
                    .map(|s| format!(" (exhausted at stage {s})"))
                    .unwrap_or_default()
            );
            if exit_neg {
                negative(result, human)
            } else {
                ok(result, human)
            }
        }
        Command::Partition { set, value } => match (set, value) {
            (None, Some(x)) => {
                let k = partition_index(*x)?;
                let cross = partition_index_arithmetic(*x)?;
                ok(
                    json!({ "value": x, "cell": k, "cross_check": cross }),
                    format!("{x} ∈ P_{k}"),
                )
            }
            (Some(raw), None) => {
                let d = parse::parse_ground(raw)?;
                let p = h1_profile(&d, &caps)?;
                if cli.global.format == Format::Csv {
                    let csv = p.to_csv();
                    let human = csv.trim_end().to_string();
                    return ok(json!({ "csv": csv }), human);
                }
                let human = format!(
                    "total {}, max cell {} ({} values), min complement {}",
                    p.total, p.max_cell, p.max_cell_count, p.min_complement
                );
                ok(serde_json::to_value(&p).expect("profile serializes"), human)
            }
            _ => Err(CliError::Usage(
                "partition needs exactly one of --set / --value".into(),
            )),
        },
        Command::KatetovVerify {
            map,
            n,
            m,
            source,
            target,
            probes,
        } => {
            let f = parse::parse_coloring(map, *n, *m).map_err(CliError::Usage)?;
            let source = parse::parse_oracle(source).map_err(CliError::Usage)?;
            let target = parse::parse_oracle(target).map_err(CliError::Usage)?;
            let probe_sets = probes_from(probes, f.codomain_size(), seed)?;
            let r = verify_witness(&f, &source, &target, &probe_sets, &caps)?;
            let result = serde_json::to_value(&r).expect("report serializes");
            let human = if r.passed {
                format!(
                    "pass over {} probes ({} source-positive skipped)",
                    r.probes_checked, r.skipped_source_positive
                )
            } else {
                let ce = r.counterexample.as_ref().unwrap();
                format!(
                    "counterexample at probe {} = {:?}",
                    ce.probe_index, ce.probe
                )
            };
            if r.passed {
                ok(result, human)
            } else {
                negative(result, human)
            }
        }
        Command::KatetovSearch {
            n,
            m,
            source,
            target,
            family,
            probes,
        } => {
            let source = parse::parse_oracle(source).map_err(CliError::Usage)?;
            let target = parse::parse_oracle(target).map_err(CliError::Usage)?;
            let family = parse::parse_family(family).map_err(CliError::Usage)?;
            let probe_sets = probes_from(probes, *m, seed)?;
            match search_witness(*n, *m, &source, &target, &probe_sets, family, &caps)? {
                Some(map) => ok(
                    json!({ "found": true, "table": map.table(), "codomain": map.codomain_size() }),
                    format!("{:?}", map.table()),
                ),
                None => negative(json!({ "found": false }), "none".to_string()),
            }
        }
        Command::CheckFibers {
            coloring,
            domain,
            depth,
        } => {
            let f = parse::parse_coloring(coloring, *domain, None).map_err(CliError::Usage)?;
            let r = check_fibers(&f, *depth, &caps)?;
            let positives: Vec<u64> = r
                .judgements
                .iter()
                .filter(|(_, j)| j.is_positive())
                .map(|(&v, _)| v)
                .collect();
            let result = json!({
                "depth": r.depth,
                "fibers": r.judgements.len(),
                "positive_values": positives,
                "short_circuit": r.short_circuit,
            });
            let human = match &r.short_circuit {
                Some(sc) => format!(
                    "fiber {} positive, witness {:?}",
                    sc.value,
                    sc.witness.ground.elements()
                ),
                None => format!(
                    "all {} fibers small at depth {}",
                    r.judgements.len(),
                    r.depth
                ),
            };
            ok(result, human)
        }
        Command::Separate {
            coloring,
            domain,
            stages,
            depths,
            schedule,
            out,
        } => {
            let f = parse::parse_coloring(coloring, *domain, None).map_err(CliError::Usage)?;
            let schedule = match schedule {
                Some(raw) => Schedule::new(parse::parse_set(raw).map_err(CliError::Usage)?)?,
                None => Schedule::default_for(*stages),
            };
            let depths = depths
                .as_deref()
                .map(parse::parse_depths)
                .transpose()
                .map_err(CliError::Usage)?;
            let trace = build_separation(&f, &schedule, *stages, depths.as_deref(), &caps)?;
            if let Some(path) = out {
                let data = serde_json::to_string_pretty(&trace).expect("trace serializes");
                fs::write(path, data)
                    .map_err(|e| CliError::Usage(format!("writing {path}: {e}")))?;
            }
            let verification = verify_trace(&trace, &f, &caps);
            let summary = summarize_trace(&trace, verification.passed);
            let completed = matches!(
                trace.outcome,
                SeparationOutcome::Completed | SeparationOutcome::FiberShortCircuit(_)
            );
            let mut result = serde_json::to_value(&trace).expect("trace serializes");
            result["verification_passed"] = json!(verification.passed);
            if completed && verification.passed {
                ok(result, summary)
            } else {
                negative(result, summary)
            }
        }
        Command::VerifyTrace {
            trace,
            coloring,
            domain,
        } => {
            let data = fs::read_to_string(trace)
                .map_err(|e| CliError::Usage(format!("reading {trace}: {e}")))?;
            let trace: SeparationTrace = serde_json::from_str(&data)
                .map_err(|e| CliError::Usage(format!("parsing trace: {e}")))?;
            let f = parse::parse_coloring(coloring, *domain, None).map_err(CliError::Usage)?;
            let v = verify_trace(&trace, &f, &caps);
            let human = if v.passed {
                "trace verifies".to_string()
            } else {
                let failed: Vec<&str> = v
                    .checks
                    .iter()
                    .filter(|c| !c.ok)
                    .map(|c| c.name.as_str())
                    .collect();
                format!("trace fails: {failed:?}")
            };
            let result = serde_json::to_value(&v).expect("verification serializes");
            if v.passed {
                ok(result, human)
            } else {
                negative(result, human)
            }
        }
    }
}

fn summarize_trace(trace: &SeparationTrace, verified: bool) -> String {
    match &trace.outcome {
        SeparationOutcome::Completed => {
            let cert = trace.certificate.as_ref().unwrap();
            format!(
                "completed: X = {:?}, image {:?}, weight ≤ bound: {}, verified: {verified}",
                trace.x, cert.image, cert.weight_le_bound
            )
        }
        SeparationOutcome::FiberShortCircuit(sc) => format!(
            "fiber {} positive: witness {:?} gives a singleton image",
            sc.value,
            sc.witness.ground.elements()
        ),
        SeparationOutcome::Exhausted { stage, reason } => {
            format!("exhausted at stage {stage}: {reason}")
        }
    }
}

fn emit<T: Serialize>(report: &report::Report<T>, human: &str, format: Format) {
    match format {
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(report).expect("report serializes")
            );
        }
        Format::Human | Format::Csv => println!("{human}"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.global.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let canonical = {
        let args: Vec<String> = std::env::args().skip(1).collect();
        args.join(" ")
    };
    let subcommand = std::env::args().nth(1).unwrap_or_default();

    match run(&cli) {
        Ok(outcome) => {
            let report = report::envelope(&subcommand, cli.global.seed, &canonical, outcome.result);
            emit(&report, &outcome.human, cli.global.format);
            ExitCode::from(outcome.exit)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
