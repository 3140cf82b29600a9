//! Command implementations. Validation happens before any computation, and
//! every output is rendered in memory before the first byte is written.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use percq_core::report::{csv_field, fmt_real, MC_CSV_HEADER};
use percq_core::rng::derive_seed;
use percq_core::{
    classical_chain_prob, distillation_plan, fixed_point, mc_border_connectivity,
    recursion_iterate, required_pairs_for_full_hierarchy, resource_report,
    run_chain_protocol_on, DistillationPlan, HierNet, MCEstimate, PercConfig, ProtocolMode,
    ProtocolStats, PurePair, ResourceReport,
};

use crate::manifest::{tool_version, RunManifest};
use crate::{CliError, Command, ModeArg};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Recursion { p, k_max, out } => cmd_recursion(p, k_max, out.as_deref()),
        Command::Sweep {
            p_min,
            p_max,
            steps,
            n_nodes,
            k_pairs,
            net_file,
            trials,
            seed,
            out,
        } => cmd_sweep(
            p_min,
            p_max,
            steps,
            n_nodes,
            k_pairs,
            net_file.as_deref(),
            trials,
            seed,
            out.as_deref(),
        ),
        Command::Protocol {
            n_nodes,
            k_pairs,
            net_file,
            lambda2,
            mode,
            trials,
            seed,
            out,
        } => cmd_protocol(
            n_nodes,
            k_pairs,
            net_file.as_deref(),
            lambda2,
            mode,
            trials,
            seed,
            out.as_deref(),
        ),
        Command::Distill { lambda2, n_nodes, out } => {
            cmd_distill(lambda2, n_nodes, out.as_deref())
        }
        Command::Resources { n_nodes, k_pairs, out } => {
            cmd_resources(n_nodes, k_pairs, out.as_deref())
        }
    }
}

fn cmd_recursion(p: f64, k_max: usize, out: Option<&Path>) -> Result<(), CliError> {
    check_probability("--p", p)?;
    let trace = recursion_iterate(p, k_max);
    let mut csv = String::from("k,P_k\n");
    for (k, value) in trace.values().iter().enumerate() {
        writeln!(csv, "{k},{}", fmt_real(*value)).unwrap();
    }
    let manifest = RunManifest::new(
        "recursion",
        params([("p", p.to_string()), ("k_max", k_max.to_string())]),
        0,
    );
    emit(out, &csv, &manifest)
}

/// One sweep row: Monte Carlo estimate against the analytic columns.
#[derive(Debug, Serialize)]
struct SweepRow {
    p: f64,
    k: u32,
    trials: u64,
    successes: u64,
    estimate: f64,
    std_error: f64,
    prediction: f64,
    fixed_point: f64,
    classical_exact: f64,
    row_seed: u64,
}

#[derive(Debug, Serialize)]
struct SweepReport {
    n_nodes: usize,
    k_pairs: u32,
    trials: u64,
    master_seed: u64,
    tool_version: String,
    rows: Vec<SweepRow>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    p_min: f64,
    p_max: f64,
    steps: usize,
    n_nodes: usize,
    k_pairs: Option<u32>,
    net_file: Option<&Path>,
    trials: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    check_probability("--p-min", p_min)?;
    check_probability("--p-max", p_max)?;
    if p_min > p_max {
        return Err(CliError::Domain(format!(
            "--p-min ({p_min}) must not exceed --p-max ({p_max})"
        )));
    }
    if steps < 1 {
        return Err(CliError::Domain("--steps must be at least 1".into()));
    }
    if trials < 1 {
        return Err(CliError::Domain("--trials must be at least 1".into()));
    }
    let net = resolve_net(n_nodes, k_pairs, net_file)?;
    let k = net.k_pairs();

    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let p = if steps == 1 {
            p_min
        } else {
            p_min + (p_max - p_min) * i as f64 / (steps - 1) as f64
        };
        let row_seed = derive_seed(seed, i as u64);
        let cfg = PercConfig::new(p, trials, row_seed).map_err(domain)?;
        let mc: MCEstimate = mc_border_connectivity(&net, &cfg);
        rows.push(SweepRow {
            p,
            k,
            trials,
            successes: mc.successes,
            estimate: mc.estimate,
            std_error: mc.std_error,
            prediction: recursion_iterate(p, k.saturating_sub(1) as usize).last(),
            fixed_point: fixed_point(p, 1e-12).p_infinity,
            classical_exact: classical_chain_prob(p, k, net.n_nodes()).exact,
            row_seed,
        });
    }

    let mut csv = format!("{MC_CSV_HEADER},fixed_point,classical_exact\n");
    for row in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            fmt_real(row.p),
            row.k,
            row.trials,
            row.successes,
            fmt_real(row.estimate),
            fmt_real(row.std_error),
            fmt_real(row.prediction),
            fmt_real(row.fixed_point),
            fmt_real(row.classical_exact),
        )
        .unwrap();
    }

    let report = SweepReport {
        n_nodes: net.n_nodes(),
        k_pairs: k,
        trials,
        master_seed: seed,
        tool_version: tool_version(),
        rows,
    };
    let manifest = RunManifest::new(
        "sweep",
        params([
            ("p_min", p_min.to_string()),
            ("p_max", p_max.to_string()),
            ("steps", steps.to_string()),
            ("n_nodes", net.n_nodes().to_string()),
            ("k_pairs", k.to_string()),
            ("net_file", display_opt(net_file)),
            ("trials", trials.to_string()),
        ]),
        seed,
    );
    match out {
        None => {
            print!("{csv}");
            Ok(())
        }
        Some(path) => {
            let json_path = sibling(path, "json")?;
            write_file(path, &csv)?;
            write_json(&json_path, &report)?;
            write_manifest(path, &manifest)
        }
    }
}

#[derive(Debug, Serialize)]
struct ProtocolReport {
    n_nodes: usize,
    k_pairs: u32,
    lambda2: f64,
    mode: ProtocolMode,
    trials: u64,
    master_seed: u64,
    tool_version: String,
    stats: ProtocolStats,
}

#[allow(clippy::too_many_arguments)]
fn cmd_protocol(
    n_nodes: usize,
    k_pairs: Option<u32>,
    net_file: Option<&Path>,
    lambda2: f64,
    mode: ModeArg,
    trials: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let base = PurePair::from_lambda2(lambda2).map_err(domain)?;
    let net = resolve_net(n_nodes, k_pairs, net_file)?;
    let cfg = PercConfig::new(base.scp(), trials, seed).map_err(domain)?;
    let mode: ProtocolMode = mode.into();
    let stats = run_chain_protocol_on(&net, base, mode, &cfg);

    let mut csv = String::from("mode,level,mean_scp,mean_concurrence\n");
    let mode_label = match mode {
        ProtocolMode::IdealScp => "ideal-scp",
        ProtocolMode::StateTracked => "state-tracked",
    };
    for level in &stats.per_level {
        writeln!(
            csv,
            "{},{},{},{}",
            csv_field(mode_label),
            level.level,
            fmt_real(level.mean_scp),
            fmt_real(level.mean_concurrence),
        )
        .unwrap();
    }

    let report = ProtocolReport {
        n_nodes: net.n_nodes(),
        k_pairs: net.k_pairs(),
        lambda2,
        mode,
        trials,
        master_seed: seed,
        tool_version: tool_version(),
        stats,
    };
    let manifest = RunManifest::new(
        "protocol",
        params([
            ("n_nodes", net.n_nodes().to_string()),
            ("k_pairs", net.k_pairs().to_string()),
            ("net_file", display_opt(net_file)),
            ("lambda2", lambda2.to_string()),
            ("mode", mode_label.to_string()),
            ("trials", trials.to_string()),
        ]),
        seed,
    );
    match out {
        None => {
            println!("{}", to_json(&report)?);
            Ok(())
        }
        Some(path) => {
            let levels_path = sibling(path, "levels.csv")?;
            write_json(path, &report)?;
            write_file(&levels_path, &csv)?;
            write_manifest(path, &manifest)
        }
    }
}

#[derive(Debug, Serialize)]
struct DistillReport {
    lambda2: f64,
    n_nodes: usize,
    tool_version: String,
    plan: DistillationPlan,
}

fn cmd_distill(lambda2: f64, n_nodes: usize, out: Option<&Path>) -> Result<(), CliError> {
    let base = PurePair::from_lambda2(lambda2).map_err(domain)?;
    let plan = distillation_plan(n_nodes, base).map_err(domain)?;
    let report = DistillReport { lambda2, n_nodes, tool_version: tool_version(), plan };
    let manifest = RunManifest::new(
        "distill",
        params([("lambda2", lambda2.to_string()), ("n_nodes", n_nodes.to_string())]),
        0,
    );
    emit_json(out, &report, &manifest)
}

#[derive(Debug, Serialize)]
struct ResourcesReport {
    tool_version: String,
    #[serde(flatten)]
    report: ResourceReport,
}

fn cmd_resources(
    n_nodes: usize,
    k_pairs: Option<u32>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if n_nodes < 2 {
        return Err(CliError::Domain(format!(
            "--n-nodes must be at least 2, got {n_nodes}"
        )));
    }
    let k = resolve_k_pairs(n_nodes, k_pairs)?;
    let report = ResourcesReport {
        tool_version: tool_version(),
        report: resource_report(n_nodes, k),
    };
    let manifest = RunManifest::new(
        "resources",
        params([("n_nodes", n_nodes.to_string()), ("k_pairs", k.to_string())]),
        0,
    );
    emit_json(out, &report, &manifest)
}

// --- shared plumbing ---

fn check_probability(flag: &str, p: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CliError::Domain(format!("{flag} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn resolve_k_pairs(n_nodes: usize, k_pairs: Option<u32>) -> Result<u32, CliError> {
    match k_pairs {
        Some(0) => Err(CliError::Domain("--k-pairs must be at least 1".into())),
        Some(k) => Ok(k),
        None => required_pairs_for_full_hierarchy(n_nodes).map_err(|_| {
            CliError::Domain(format!(
                "--n-nodes {n_nodes} is not 2^m + 1; pass --k-pairs explicitly for a truncated hierarchy"
            ))
        }),
    }
}

fn resolve_net(
    n_nodes: usize,
    k_pairs: Option<u32>,
    net_file: Option<&Path>,
) -> Result<HierNet, CliError> {
    match net_file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                message: format!("cannot read network file {}", path.display()),
                source,
            })?;
            HierNet::from_text(&text).map_err(domain)
        }
        None => {
            let k = resolve_k_pairs(n_nodes, k_pairs)?;
            HierNet::build(n_nodes, k).map_err(domain)
        }
    }
}

fn domain(err: impl std::fmt::Display) -> CliError {
    CliError::Domain(err.to_string())
}

fn params<const N: usize>(entries: [(&str, String); N]) -> BTreeMap<String, String> {
    entries
        .into_iter()
        .map(|(key, value)| (key.to_string(), value))
        .collect()
}

fn display_opt(path: Option<&Path>) -> String {
    path.map_or_else(|| "-".to_string(), |p| p.display().to_string())
}

/// `<dir>/<stem>.<extension>` next to `path`.
fn sibling(path: &Path, extension: &str) -> Result<PathBuf, CliError> {
    let candidate = path.with_extension(extension);
    if candidate == path {
        return Err(CliError::Domain(format!(
            "--out {} collides with the derived .{extension} sidecar; pick another extension",
            path.display()
        )));
    }
    Ok(candidate)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map_err(|err| CliError::Domain(format!("serialization failed: {err}")))
}

fn write_file(path: &Path, data: &str) -> Result<(), CliError> {
    fs::write(path, data).map_err(|source| CliError::Io {
        message: format!("cannot write {}", path.display()),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = to_json(value)?;
    text.push('\n');
    write_file(path, &text)
}

fn write_manifest(data_path: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let path = sibling(data_path, "manifest.json")?;
    write_json(&path, manifest)
}

fn emit(out: Option<&Path>, data: &str, manifest: &RunManifest) -> Result<(), CliError> {
    match out {
        None => {
            print!("{data}");
            Ok(())
        }
        Some(path) => {
            write_file(path, data)?;
            write_manifest(path, manifest)
        }
    }
}

fn emit_json<T: Serialize>(
    out: Option<&Path>,
    value: &T,
    manifest: &RunManifest,
) -> Result<(), CliError> {
    match out {
        None => {
            println!("{}", to_json(value)?);
            Ok(())
        }
        Some(path) => {
            write_json(path, value)?;
            write_manifest(path, manifest)
        }
    }
}
