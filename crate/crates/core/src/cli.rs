//! The `mds53` command line.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 when data cannot be
//! read, decoded or verified.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::codec::{decode, encode, Message, NodeSubset};
use crate::construction::{CodeInstance, CodeParams, NODES};
use crate::error::{Error, Result};
use crate::galois::FieldSpec;
use crate::oracle::{
    brute_force_mds, brute_force_repair_search, enumerate_valid_params, first_valid_params, MAX_CENSUS_ORDER,
    MAX_MDS_ORDER, MAX_SEARCH_ORDER,
};
use crate::repair::{execute_repair, make_repair_plan, repair_vectors, verify_alignment, RepairPlan};
use crate::store::{self, Cluster};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "mds53", version, about = "Store files on a simulated five-node (5,3) MDS cluster with optimal single-node repair.")]
struct Cli {
    /// Print one JSON summary object instead of the text report.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split a file into stripes and write five node files plus a manifest.
    Encode {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Bytes per symbol block.
        #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u32).range(1..))]
        symbol_size: u32,
        /// Code parameters, e.g. "q=4;lambda=3;mu=2;theta=2;eta=3".
        #[arg(long)]
        params: Option<CodeParams>,
    },
    /// Decode the stored file from three nodes.
    Reconstruct {
        #[arg(long, env = "MDS53_DIR", value_name = "DIR")]
        dir: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Three distinct nodes to read, e.g. 1,4,5. Defaults to the first three available.
        #[arg(long, value_delimiter = ',', value_parser = node_id)]
        nodes: Option<Vec<u8>>,
    },
    /// Simulate the loss of a node by truncating its file.
    Fail {
        #[arg(long, env = "MDS53_DIR", value_name = "DIR")]
        dir: PathBuf,
        #[arg(long, value_parser = node_id)]
        node: u8,
    },
    /// Rebuild one node from one combined symbol per stripe from each of the others.
    Repair {
        #[arg(long, env = "MDS53_DIR", value_name = "DIR")]
        dir: PathBuf,
        #[arg(long, value_parser = node_id)]
        node: u8,
        /// Use a repair plan manifest as written by `show-plan`.
        #[arg(long, value_name = "FILE")]
        plan: Option<PathBuf>,
    },
    /// Check the code's algebraic properties, optionally by exhaustive enumeration.
    Verify {
        #[arg(long, default_value = "gf4", value_parser = field_arg)]
        field: FieldSpec,
        #[arg(long)]
        params: Option<CodeParams>,
        #[arg(long)]
        exhaustive: bool,
    },
    /// List every valid parameter tuple over a field.
    SearchParams {
        #[arg(long, default_value = "gf4", value_parser = field_arg)]
        field: FieldSpec,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Print the repair plan manifest for one node.
    ShowPlan {
        #[arg(long, value_parser = node_id)]
        node: u8,
        #[arg(long)]
        params: Option<CodeParams>,
    },
}

fn node_id(s: &str) -> std::result::Result<u8, String> {
    match s.trim().parse::<u8>() {
        Ok(n) if (1..=NODES as u8).contains(&n) => Ok(n),
        _ => Err(format!("node must be an integer in 1..={NODES}")),
    }
}

/// Accepts `gf4`, `GF(4)`, `4`, and likewise for any order 2^m up to 256.
fn field_arg(s: &str) -> std::result::Result<FieldSpec, String> {
    let lower = s.trim().to_ascii_lowercase();
    let digits = lower
        .strip_prefix("gf(")
        .and_then(|r| r.strip_suffix(')'))
        .or_else(|| lower.strip_prefix("gf"))
        .unwrap_or(&lower);
    let order: u16 = digits.parse().map_err(|_| format!("unrecognised field {s:?}"))?;
    FieldSpec::with_order(order).map_err(|e| e.to_string())
}

/// Parses `argv` (including the program name) and runs the command,
/// writing reports to standard output and errors to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let json = cli.json;
    let name = command_name(&cli.command);
    match execute(cli.command) {
        Ok(outcome) => {
            emit(out, json, &outcome);
            if outcome.ok {
                EXIT_OK
            } else {
                EXIT_FAILURE
            }
        }
        Err(Failure { code, error }) => {
            if json {
                let _ = writeln!(out, "{}", json!({ "command": name, "ok": false, "error": error }));
            }
            let _ = writeln!(err, "error: {error}");
            code
        }
    }
}

struct Outcome {
    ok: bool,
    text: String,
    summary: Value,
}

struct Failure {
    code: i32,
    error: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_FAILURE,
            error: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: msg.into(),
    }
}

fn emit(out: &mut dyn Write, json: bool, outcome: &Outcome) {
    let _ = if json {
        writeln!(out, "{}", outcome.summary)
    } else {
        write!(out, "{}", outcome.text)
    };
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Encode { .. } => "encode",
        Command::Reconstruct { .. } => "reconstruct",
        Command::Fail { .. } => "fail",
        Command::Repair { .. } => "repair",
        Command::Verify { .. } => "verify",
        Command::SearchParams { .. } => "search-params",
        Command::ShowPlan { .. } => "show-plan",
    }
}

fn instance(params: Option<CodeParams>) -> Result<CodeInstance, Failure> {
    let params = params.unwrap_or_default();
    CodeInstance::new_valid(params).map_err(|e| usage(e.to_string()))
}

fn execute(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::Encode {
            input,
            out_dir,
            symbol_size,
            params,
        } => {
            let inst = instance(params)?;
            if !inst.field().is_gf4() {
                return Err(usage(format!("the store only supports GF(4), not {}", inst.field())));
            }
            let data = fs::read(&input).map_err(|e| Error::io(&input, e))?;
            let cluster = store::store_file(&data, symbol_size as usize, &inst, &out_dir)?;
            let layout = cluster.layout();
            let mut text = format!(
                "encoded {} bytes into {} stripes of 6 x {}-byte symbols\n",
                data.len(),
                layout.stripe_count,
                layout.symbol_size
            );
            let mut nodes = Vec::new();
            for n in cluster.nodes() {
                let bytes = fs::metadata(&n.path).map(|m| m.len()).unwrap_or(0);
                text.push_str(&format!("node {} {} ({bytes} bytes)\n", n.node_id, n.path.display()));
                nodes.push(json!({ "node": n.node_id, "path": n.path, "bytes": bytes }));
            }
            Ok(Outcome {
                ok: true,
                text,
                summary: json!({
                    "command": "encode",
                    "ok": true,
                    "dir": out_dir,
                    "params": inst.params().to_string(),
                    "original_length": layout.original_length,
                    "symbol_size": layout.symbol_size,
                    "stripe_count": layout.stripe_count,
                    "nodes": nodes,
                }),
            })
        }

        Command::Reconstruct { dir, out, nodes } => {
            let subset = match nodes {
                None => None,
                Some(v) => {
                    let arr: [u8; 3] = v
                        .try_into()
                        .map_err(|_| usage("--nodes takes exactly three node ids"))?;
                    Some(NodeSubset::new(arr).map_err(|e| usage(e.to_string()))?.nodes())
                }
            };
            let cluster = Cluster::open(&dir)?;
            let used = match subset {
                Some(s) => s.to_vec(),
                None => cluster.available_nodes().into_iter().take(3).collect(),
            };
            let data = cluster.reconstruct_file(subset)?;
            fs::write(&out, &data).map_err(|e| Error::io(&out, e))?;
            Ok(Outcome {
                ok: true,
                text: format!("reconstructed {} bytes from nodes {used:?} into {}\n", data.len(), out.display()),
                summary: json!({
                    "command": "reconstruct",
                    "ok": true,
                    "nodes": used,
                    "bytes": data.len(),
                    "out": out,
                }),
            })
        }

        Command::Fail { dir, node } => {
            let mut cluster = Cluster::open(&dir)?;
            cluster.fail_node(node)?;
            Ok(Outcome {
                ok: true,
                text: format!("node {node} marked failed\n"),
                summary: json!({ "command": "fail", "ok": true, "node": node }),
            })
        }

        Command::Repair { dir, node, plan } => {
            let mut cluster = Cluster::open(&dir)?;
            let plan = match plan {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                    let plan = RepairPlan::from_manifest(&text)?;
                    if plan.failed() != node {
                        return Err(Failure::from(Error::InvalidParams(format!(
                            "plan repairs node {}, not node {node}",
                            plan.failed()
                        ))));
                    }
                    plan
                }
                None => make_repair_plan(node, cluster.instance())?,
            };
            let report = cluster.repair_node_with_plan(&plan)?;
            let mut text = format!(
                "repaired node {} ({} stripes of {}-byte symbols)\n",
                report.node, report.stripes, report.symbol_size
            );
            for (h, b) in &report.per_helper {
                text.push_str(&format!("  node {h} sent {b} bytes\n"));
            }
            text.push_str(&format!(
                "downloaded {} bytes; decoding the whole file would move {} bytes ({}/6)\n",
                report.downloaded_bytes,
                report.naive_bytes,
                report.downloaded_bytes * 6 / report.naive_bytes.max(1)
            ));
            Ok(Outcome {
                ok: true,
                text,
                summary: json!({
                    "command": "repair",
                    "ok": true,
                    "node": report.node,
                    "stripes": report.stripes,
                    "symbol_size": report.symbol_size,
                    "downloaded_bytes": report.downloaded_bytes,
                    "naive_bytes": report.naive_bytes,
                    "per_helper": report.per_helper.iter().map(|(h, b)| json!({ "node": h, "bytes": b })).collect::<Vec<_>>(),
                }),
            })
        }

        Command::Verify {
            field,
            params,
            exhaustive,
        } => verify(field, params, exhaustive),

        Command::SearchParams { field, out } => {
            if field.order() > MAX_CENSUS_ORDER {
                return Err(usage(format!("search-params supports fields up to GF({MAX_CENSUS_ORDER})")));
            }
            let census = enumerate_valid_params(field)?;
            let text = census.to_text();
            if let Some(path) = &out {
                fs::write(path, &text).map_err(|e| Error::io(path, e))?;
            }
            Ok(Outcome {
                ok: true,
                text,
                summary: json!({
                    "command": "search-params",
                    "ok": true,
                    "field": field.order(),
                    "total": census.total,
                    "valid": census.valid.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                    "violations": census.violations.iter().map(|(c, n)| json!({ "condition": c.label(), "count": n })).collect::<Vec<_>>(),
                }),
            })
        }

        Command::ShowPlan { node, params } => {
            let inst = instance(params)?;
            let plan = make_repair_plan(node, &inst)?;
            let manifest = plan.to_manifest();
            Ok(Outcome {
                ok: true,
                summary: json!({
                    "command": "show-plan",
                    "ok": true,
                    "node": node,
                    "bandwidth": plan.bandwidth(),
                    "downloads": plan.downloads().iter().map(|d| json!({ "node": d.node, "vector": d.vector.to_hex() })).collect::<Vec<_>>(),
                    "manifest": manifest,
                }),
                text: manifest,
            })
        }
    }
}

struct Check {
    name: String,
    passed: bool,
    detail: String,
}

fn verify(field: FieldSpec, params: Option<CodeParams>, exhaustive: bool) -> Result<Outcome, Failure> {
    let mut checks: Vec<Check> = Vec::new();
    let mut add = |name: &str, passed: bool, detail: String| {
        checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        })
    };
    if let Some(p) = &params {
        if p.field() != field && field != FieldSpec::GF4 {
            return Err(usage(format!("--params is over {} but --field is {field}", p.field())));
        }
    }
    let field = params.map(|p| p.field()).unwrap_or(field);
    if exhaustive && field.order() > MAX_MDS_ORDER {
        return Err(usage(format!("--exhaustive supports fields up to GF({MAX_MDS_ORDER})")));
    }

    let census = (field.order() <= MAX_CENSUS_ORDER)
        .then(|| enumerate_valid_params(field))
        .transpose()?;
    if let Some(c) = &census {
        add("parameter census", true, format!("{} of {} tuples valid over {field}", c.count(), c.total));
    }

    let chosen = match params {
        Some(p) => Some(p),
        None if field.is_gf4() => Some(CodeParams::default()),
        None => first_valid_params(field),
    };
    let Some(p) = chosen else {
        add("valid parameters exist", false, format!("no tuple over {field} satisfies all ten conditions"));
        return Ok(verify_outcome(field, None, checks));
    };

    let violated = p.check_conditions();
    let labels: Vec<&str> = violated.iter().map(|c| c.label()).collect();
    add("conditions 6a..6j", violated.is_empty(), if labels.is_empty() { p.to_string() } else { format!("violates {}", labels.join(", ")) });
    let inst = CodeInstance::new(p)?;

    let ranks_ok = (1..=3).all(|i| inst.a(i).rank() == 2)
        && [(1, 2), (1, 3), (2, 3)]
            .iter()
            .all(|&(i, j)| inst.a(i).sub(inst.a(j)).map(|d| d.rank() == 2).unwrap_or(false));
    add("rank(A_i) = rank(A_i - A_j) = 2", ranks_ok, String::new());
    add("A1^T = lambda A2^T + [e1 0] = mu A3^T + [e2 0]", inst.structural_identity_holds(), String::new());
    add("every 3-node subset decodes (rank)", inst.is_mds(), String::new());

    let mut plans = Vec::new();
    for node in 1..=NODES as u8 {
        match make_repair_plan(node, &inst) {
            Ok(plan) => {
                let report = verify_alignment(&plan, &inst);
                let detail = report.failures().map(|c| c.name.clone()).collect::<Vec<_>>().join("; ");
                add(&format!("node {node} repair alignment"), report.passed(), detail);
                plans.push(plan);
            }
            Err(e) => add(&format!("node {node} repair alignment"), false, e.to_string()),
        }
    }

    if exhaustive {
        let mds = brute_force_mds(&inst)?;
        let bad: Vec<String> = mds.failing().map(|s| s.to_string()).collect();
        add(
            "exhaustive MDS",
            mds.is_mds(),
            if bad.is_empty() { format!("{} messages x 10 subsets", mds.messages) } else { format!("not injective on {}", bad.join(" ")) },
        );

        let q = u32::from(field.order());
        let total = q.pow(6);
        let roundtrip = (0..total).all(|idx| {
            let m = Message::from_index(idx, field.order());
            let cw = encode(&m, &inst);
            NodeSubset::all().all(|s| {
                let [a, b, c] = s.nodes();
                decode(s, &[*cw.node(a), *cw.node(b), *cw.node(c)], &inst).is_ok_and(|d| d == m)
            })
        });
        add("exhaustive decode roundtrip", roundtrip, format!("{total} messages"));

        for plan in &plans {
            let node = plan.failed();
            let exact = (0..total).all(|idx| {
                let cw = encode(&Message::from_index(idx, field.order()), &inst);
                &execute_repair(plan, &plan.gather(|n| *cw.node(n))) == cw.node(node)
            });
            add(&format!("node {node} exhaustive repair"), exact, format!("{total} messages, {} symbols each", plan.bandwidth()));
        }

        if field.order() <= MAX_SEARCH_ORDER {
            for node in 1..=NODES as u8 {
                let found = brute_force_repair_search(node, &inst)?;
                let lemma = repair_vectors(node, &inst).map(|v| v.mixed());
                let hit = lemma.as_ref().is_ok_and(|[a, b]| found.contains(&(*a, *b)));
                add(&format!("node {node} vectors in search result"), hit, format!("{} aligned pairs found", found.len()));
            }
        }
    }
    Ok(verify_outcome(field, Some(p), checks))
}

fn verify_outcome(field: FieldSpec, params: Option<CodeParams>, checks: Vec<Check>) -> Outcome {
    let ok = checks.iter().all(|c| c.passed);
    let mut text = String::new();
    for c in &checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        if c.detail.is_empty() {
            text.push_str(&format!("{mark} {}\n", c.name));
        } else {
            text.push_str(&format!("{mark} {}: {}\n", c.name, c.detail));
        }
    }
    text.push_str(if ok { "all checks passed\n" } else { "verification failed\n" });
    Outcome {
        ok,
        text,
        summary: json!({
            "command": "verify",
            "ok": ok,
            "field": field.order(),
            "params": params.map(|p| p.to_string()),
            "checks": checks.iter().map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail })).collect::<Vec<_>>(),
        }),
    }
}
