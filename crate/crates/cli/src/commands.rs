use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use diagsynth::circuit::{diag_phases, export_text, GateKind};
use diagsynth::cluster::{self, hcluster, pca_fit};
use diagsynth::diagonal::{
    self, build_ansatz, det_relation_check, random_diagonal, rn_matrix,
    sylvester_labeling, weyl_tail_check, PhaseMap,
};
use diagsynth::mlpipe::{
    self, gen_pretty, gen_raw, metrics, snap_weights, Dataset, GradientMode, LinearModel,
    RawConfig, StepSchedule, TrainConfig,
};
use diagsynth::sequences::{full_sequence, SequenceKind};
use diagsynth::{rng, tol};

use crate::failure::CheckFailed;
use crate::input::read_diagonal;
use crate::{
    AnalyzeArgs, BenchArgs, ClusterArgs, DatasetArgs, DecomposeArgs, Format, Global, SequenceArgs,
    ShareArgs, StageArg, Suite, TrainArgs, VerifyArgs,
};

/// Gate totals of the optimised decomposition for n = 2..=9.
const REFERENCE_TOTALS: [usize; 8] = [5, 13, 29, 61, 125, 253, 509, 1021];

fn config<A: Serialize>(command: &str, g: &Global, args: &A) -> serde_json::Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "global": g,
        "args": args,
    })
}

fn write_to(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn emit_json(g: &Global, config: serde_json::Value, result: impl Serialize) -> Result<()> {
    let body = serde_json::to_string_pretty(&json!({ "config": config, "result": result }))?;
    write_to(g.out.as_deref(), &(body + "\n"))
}

fn csv_header(config: &serde_json::Value) -> String {
    format!("# diagsynth {config}\n")
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CheckFailed(message()).into())
    }
}

pub fn decompose(g: &Global, a: &DecomposeArgs) -> Result<()> {
    let cfg = config("decompose", g, a);
    let d = read_diagonal(&a.input)?;
    let kind = SequenceKind::from(a.kind);
    let dec = decompose_checked(&d, kind)?;
    let recomposed = diag_phases(&dec.circuit)?;
    let recompose_error = recomposed
        .max_wrapped_distance(d.lambda())
        .context("recomposed phase length differs")?;
    let limit = g.tol.unwrap_or(tol::RESIDUAL);
    let summary = json!({
        "n": d.n(),
        "sequence": kind.to_string(),
        "angles": dec.angles,
        "global_phase": dec.global_phase,
        "residual": dec.residual,
        "recompose_error": recompose_error,
        "rz": dec.circuit.count(GateKind::Rz),
        "cnot": dec.circuit.count(GateKind::Cnot),
        "total": dec.circuit.len(),
    });
    let qasm = format!("// diagsynth {cfg}\n{}", export_text(&dec.circuit));
    let json_text = serde_json::to_string_pretty(&json!({ "config": cfg, "result": summary }))? + "\n";
    if let Some(prefix) = &a.prefix {
        write_to(Some(&prefix.with_extension("qasm")), &qasm)?;
        write_to(Some(&prefix.with_extension("json")), &json_text)?;
    } else {
        match a.format {
            Format::Qasm => write_to(g.out.as_deref(), &qasm)?,
            Format::Json => write_to(g.out.as_deref(), &json_text)?,
        }
    }
    ensure(dec.residual <= limit && recompose_error <= limit.max(tol::RESIDUAL), || {
        format!(
            "residual {:.3e} / recomposition error {:.3e} above tolerance {limit:.1e}",
            dec.residual, recompose_error
        )
    })
}

fn decompose_checked(
    d: &diagonal::DiagonalUnitary,
    kind: SequenceKind,
) -> Result<diagonal::Decomposition> {
    diagonal::decompose(d, kind).with_context(|| format!("decomposing a {}-qubit diagonal", d.n()))
}

#[derive(Serialize)]
struct BenchRow {
    n: usize,
    rz: usize,
    cnot: usize,
    total: usize,
    reference_total: Option<usize>,
    #[serde(rename = "match")]
    matches: bool,
}

pub fn bench(g: &Global, a: &BenchArgs) -> Result<()> {
    let cfg = config("bench", g, a);
    anyhow::ensure!(a.n_min >= 1 && a.n_min <= a.n_max, "need 1 <= n-min <= n-max");
    anyhow::ensure!(a.n_max <= diagonal::MAX_QUBITS, "n-max above {}", diagonal::MAX_QUBITS);
    let kind = SequenceKind::from(a.kind);
    let limit = g.tol.unwrap_or(tol::RESIDUAL);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut failures = Vec::new();
    for n in a.n_min..=a.n_max {
        let c = build_ansatz(n, &vec![0.0; diagonal::angle_count(n)], kind)?;
        let total = c.len();
        let expected = n.checked_sub(2).and_then(|i| REFERENCE_TOTALS.get(i)).copied();
        let matches = expected.map_or(total + 3 == 1 << (n + 1), |e| e == total);
        if !matches {
            failures.push(format!("n={n}: total {total}, expected {expected:?}"));
        }
        w.serialize(BenchRow {
            n,
            rz: c.count(GateKind::Rz),
            cnot: c.count(GateKind::Cnot),
            total,
            reference_total: expected,
            matches,
        })?;
        if a.samples > 0 {
            let mut r = rng::stream(g.seed, rng::purpose::TARGETS + n as u64);
            let start = Instant::now();
            let mut worst = 0.0f64;
            for _ in 0..a.samples {
                let d = random_diagonal(n, &mut r);
                let dec = decompose_checked(&d, kind)?;
                let err = diag_phases(&dec.circuit)?
                    .max_wrapped_distance(d.lambda())
                    .unwrap_or(f64::INFINITY);
                worst = worst.max(err);
            }
            log::info!(
                "n={n}: {} decompositions in {:?}, worst recomposition error {worst:.2e}",
                a.samples,
                start.elapsed()
            );
            if worst > limit {
                failures.push(format!("n={n}: recomposition error {worst:.3e}"));
            }
        }
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)?;
    write_to(g.out.as_deref(), &(csv_header(&cfg) + &body))?;
    ensure(failures.is_empty(), || failures.join("; "))
}

pub fn sequence(g: &Global, a: &SequenceArgs) -> Result<()> {
    let s = full_sequence(a.n, a.kind.into())?;
    write_to(g.out.as_deref(), &format!("{s}\n"))
}

pub fn dataset(g: &Global, a: &DatasetArgs) -> Result<()> {
    let kind = SequenceKind::from(a.kind);
    let ds = match a.stage {
        StageArg::Pretty => gen_pretty(a.n, a.samples, a.epsilon, g.seed, kind)?,
        StageArg::Raw => {
            let config = RawConfig {
                delta: a.delta,
                mutation_prob: a.mutation_prob,
                doubled_prob: a.doubled_prob,
                sequence_kind: kind,
            };
            let ds = gen_raw(a.n, a.samples, g.seed, &config)?;
            if a.filter {
                let c = hcluster(ds.x(), a.threshold);
                let f = cluster::filter_dominant(&ds, &c)?;
                log::info!(
                    "kept cluster {} with {} of {} rows ({} clusters)",
                    f.cluster,
                    f.rows.len(),
                    ds.len(),
                    c.count()
                );
                f.dataset
            } else {
                ds
            }
        }
    };
    match &g.out {
        Some(path) => ds.save(path)?,
        None => write_to(None, &(ds.to_json()? + "\n"))?,
    }
    Ok(())
}

fn train_config(g: &Global, a: &TrainArgs) -> TrainConfig {
    TrainConfig {
        schedule: StepSchedule::new(a.alpha, a.beta, a.lr, a.step_size),
        epochs: a.epochs,
        seed: g.seed,
        stop_loss: a.stop_loss,
        standardize: !a.no_standardize,
        bias: !a.no_bias,
        mode: if a.per_sample {
            GradientMode::PerSample
        } else {
            GradientMode::FullBatch
        },
    }
}

pub fn train(g: &Global, a: &TrainArgs) -> Result<()> {
    let cfg = config("train", g, a);
    let ds = Dataset::load(&a.data)?;
    let tc = train_config(g, a);
    let (fit_set, test_set) = if a.test_fraction > 0.0 {
        let (train, test) = ds.split(a.test_fraction, g.seed)?;
        (train, Some(test))
    } else {
        (ds, None)
    };
    let outcome = mlpipe::train(&fit_set, &tc)?;
    let train_metrics = metrics(&outcome.model, &fit_set)?;
    let test_metrics = test_set.as_ref().map(|t| metrics(&outcome.model, t)).transpose()?;
    if let Some(path) = &a.trace {
        let mut text = csv_header(&cfg) + "epoch,lr,loss\n";
        for (e, (lr, loss)) in outcome.lr_trace.iter().zip(&outcome.loss_trace).enumerate() {
            text += &format!("{e},{lr},{loss}\n");
        }
        write_to(Some(path), &text)?;
    }
    let report = json!({
        "epochs": outcome.model.meta.epochs,
        "final_loss": outcome.final_loss(),
        "stopped_early": outcome.stopped_early,
        "schedule_check": format!("{:?}", outcome.schedule_check),
        "train_metrics": train_metrics,
        "test_metrics": test_metrics,
        "model": serde_json::from_str::<serde_json::Value>(&outcome.model.to_json()?)?,
    });
    emit_json(g, cfg, report)
}

pub fn analyze(g: &Global, a: &AnalyzeArgs) -> Result<()> {
    let cfg = config("analyze", g, a);
    let text = std::fs::read_to_string(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let model = model_from_text(&text)?;
    let map = match &model.meta.dataset {
        Some(meta) => Some(PhaseMap::cached(meta.n, meta.sequence_kind)?),
        None => None,
    };
    let snap = snap_weights(&model, a.step, map.as_deref())?;
    let fit = match &a.data {
        Some(path) => Some(metrics(&model, &Dataset::load(path)?)?),
        None => None,
    };
    emit_json(g, cfg, json!({ "snap": snap, "metrics": fit }))
}

/// Accepts a bare model file or the report written by `train`.
fn model_from_text(text: &str) -> Result<LinearModel> {
    let value: serde_json::Value = serde_json::from_str(text).context("model file is not JSON")?;
    let inner = value
        .get("result")
        .and_then(|r| r.get("model"))
        .cloned()
        .unwrap_or(value);
    Ok(LinearModel::from_json(&inner.to_string())?)
}

pub fn verify(g: &Global, a: &VerifyArgs) -> Result<()> {
    let mut lines = Vec::new();
    let mut failed = 0usize;
    let mut record = |name: String, pass: bool| {
        failed += usize::from(!pass);
        lines.push(format!("{} {name}", if pass { "PASS" } else { "FAIL" }));
    };
    match a.suite {
        Suite::Rn => {
            anyhow::ensure!((2..=10).contains(&a.n_max), "rn suite needs n-max in 2..=10");
            for n in 2..=a.n_max {
                let r = rn_matrix(n)?;
                record(format!("r_{n} orthogonal"), r.is_orthogonal());
                record(
                    format!("r_{n} equivalent to the Sylvester tensor power"),
                    sylvester_labeling(r.entries()).is_some(),
                );
            }
            for row in det_relation_check(a.n_max)?.rows {
                record(
                    format!("det relation n={} (relative error {:.2e})", row.n, row.relative_error),
                    row.pass,
                );
            }
        }
        Suite::Weyl => {
            let points = a.samples.max(1);
            let limit = g.tol.unwrap_or(tol::IDENTITY);
            for k in 0..points {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
                let r = weyl_tail_check(phi)?;
                record(
                    format!("zz tail phi={phi:.4} deviation {:.2e}", r.max_deviation),
                    r.pass && r.max_deviation <= limit.max(tol::IDENTITY),
                );
            }
        }
        Suite::Roundtrip => {
            anyhow::ensure!(
                (1..=diagonal::MAX_QUBITS).contains(&a.n_max),
                "n-max outside 1..={}",
                diagonal::MAX_QUBITS
            );
            let limit = g.tol.unwrap_or(tol::RESIDUAL);
            for n in 1..=a.n_max {
                let mut r = rng::stream(g.seed, rng::purpose::TARGETS + n as u64);
                let mut worst = 0.0f64;
                for _ in 0..a.samples {
                    let d = random_diagonal(n, &mut r);
                    let dec = decompose_checked(&d, SequenceKind::BinaryTree)?;
                    let err = diag_phases(&dec.circuit)?
                        .max_wrapped_distance(d.lambda())
                        .unwrap_or(f64::INFINITY);
                    worst = worst.max(err);
                }
                record(format!("roundtrip n={n} worst error {worst:.2e}"), worst <= limit);
            }
        }
    }
    let text = lines.join("\n") + "\n";
    write_to(g.out.as_deref(), &text)?;
    ensure(failed == 0, || format!("{failed} check(s) failed"))
}

pub fn cluster(g: &Global, a: &ClusterArgs) -> Result<()> {
    let cfg = config("cluster", g, a);
    let ds = Dataset::load(&a.data)?;
    let c = hcluster(ds.x(), a.threshold);
    let k = a.pca.min(ds.inputs());
    let projected = if k > 0 && ds.len() >= 2 {
        Some(pca_fit(ds.x(), k)?.project(ds.x())?)
    } else {
        None
    };
    let table = cluster::assignments_csv(&c, projected.as_ref())?;
    write_to(g.out.as_deref(), &(csv_header(&cfg) + &table))?;
    if let Some(path) = &a.sizes {
        write_to(Some(path), &(csv_header(&cfg) + &cluster::sizes_csv(&c)?))?;
    }
    log::info!("{} clusters over {} samples", c.count(), ds.len());
    Ok(())
}

pub fn share(g: &Global, a: &ShareArgs) -> Result<()> {
    let cfg = config("share", g, a);
    anyhow::ensure!(a.n_min <= a.n_max, "need n-min <= n-max");
    let config = RawConfig {
        mutation_prob: a.mutation_prob,
        doubled_prob: a.doubled_prob,
        ..RawConfig::default()
    };
    let ns: Vec<usize> = (a.n_min..=a.n_max).collect();
    let rows = cluster::cluster_share_report(&ns, a.samples, g.seed, &config, a.threshold)?;
    write_to(g.out.as_deref(), &(csv_header(&cfg) + &cluster::share_csv(&rows)?))
}
