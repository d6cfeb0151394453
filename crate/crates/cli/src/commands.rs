use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use mbf_core::benford::{extract_batch, ExtractionConfig};
use mbf_core::io::{load_json, read_features_file, read_mbfa_file, save_json, write_features_file, write_mbfa_file, MbfaError};
use mbf_core::net::TrainConfig;
use mbf_core::pipeline::statistics::group_and_attack;
use mbf_core::pipeline::{feature_statistics, run_desk, write_statistics_csv, DeskConfig, HypothesisConfig, Split};
use mbf_core::record::MbfFeature;
use mbf_core::stats::{ks_two_sample, verify_rayleigh};
use mbf_core::svm::evaluate;
use mbf_core::svm::{train_svm, KernelChoice, SvmModel, SvmParams};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{Cli, Command, DemoArgs, DetectArgs, EvalArgs, ExtractArgs, KernelArg, KsArgs, StatsArgs, TheoremArgs, TrainArgs};

const MODEL_KIND: &str = "mbf-detector";

#[derive(Debug, Serialize, Deserialize)]
struct DetectorFile {
    params: SvmParams,
    model: SvmModel,
}

pub fn error_line(kind: &str, message: &str) -> String {
    json!({ "error": { "kind": kind, "message": message } }).to_string()
}

/// One JSON line naming the innermost library error kind, with the full
/// context chain as the message.
pub fn describe(e: &anyhow::Error) -> String {
    let kind = e
        .chain()
        .find_map(|c| {
            c.downcast_ref::<mbf_core::Error>()
                .map(|e| e.kind())
                .or_else(|| c.downcast_ref::<MbfaError>().map(|e| e.kind()))
                .or_else(|| c.downcast_ref::<std::io::Error>().map(|_| "io"))
        })
        .unwrap_or("other");
    error_line(kind, &format!("{e:#}"))
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Extract(a) => extract(a),
        Command::Train(a) => train(a, cli.seed),
        Command::Detect(a) => detect(a),
        Command::Eval(a) => eval(a),
        Command::Demo(a) => demo(a, cli.seed),
        Command::VerifyTheorem1(a) => theorem1(a, cli.seed),
        Command::Kstest(a) => kstest(a),
        Command::Stats(a) => stats(a),
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn features(path: &Path) -> Result<Vec<MbfFeature>> {
    let f = read_features_file(path).with_context(|| format!("reading {}", path.display()))?;
    if f.is_empty() {
        bail!(mbf_core::Error::Empty("feature file has no rows"));
    }
    Ok(f)
}

fn load_model(path: &Path) -> Result<DetectorFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(load_json(MODEL_KIND, &text)?)
}

fn posteriors(model: &SvmModel, feats: &[MbfFeature]) -> Result<Vec<f64>> {
    let xs: Vec<Vec<f64>> = feats.iter().map(|f| f.values.clone()).collect();
    Ok(model.posteriors(&xs)?)
}

fn extract(a: &ExtractArgs) -> Result<()> {
    let records = read_mbfa_file(&a.input)?;
    let cfg = ExtractionConfig { harmonics: a.harmonics, mean_subtract: !a.no_mean_subtract };
    let feats = extract_batch(&records, &cfg)?;
    let degenerate = feats.iter().filter(|f| f.has_warning()).count();
    if degenerate > 0 {
        eprintln!("{}", json!({ "warning": "degenerate_layers", "records": degenerate }));
    }
    write_features_file(&a.output, &feats)?;
    Ok(())
}

fn train(a: &TrainArgs, seed: u64) -> Result<()> {
    let feats = features(&a.features)?;
    let params = SvmParams {
        c: a.c,
        kernel: match a.kernel {
            KernelArg::Rbf => KernelChoice::Rbf { gamma: a.gamma },
            KernelArg::Linear => KernelChoice::Linear,
        },
        calibration_folds: a.calibration_folds,
        seed,
        ..SvmParams::default()
    };
    let xs: Vec<Vec<f64>> = feats.iter().map(|f| f.values.clone()).collect();
    let ys: Vec<f64> = feats.iter().map(MbfFeature::label).collect();
    let model = train_svm(&xs, &ys, &params)?;
    emit(Some(&a.output), &save_json(MODEL_KIND, &DetectorFile { params, model })?)
}

fn detect(a: &DetectArgs) -> Result<()> {
    let file = load_model(&a.model)?;
    let feats = features(&a.features)?;
    let post = posteriors(&file.model, &feats)?;
    let mut out = String::from("sample_id,group,attack_id,posterior,verdict\n");
    for (f, p) in feats.iter().zip(&post) {
        let verdict = if *p >= 0.5 { "adversarial" } else { "benign" };
        out.push_str(&format!("{},{},{},{},{}\n", f.sample_id, f.group, f.attack, mbf_core::io::features::format_sig9(*p), verdict));
    }
    emit(a.output.as_deref(), &out)
}

fn eval(a: &EvalArgs) -> Result<()> {
    let file = load_model(&a.model)?;
    let feats = features(&a.features)?;
    let post = posteriors(&file.model, &feats)?;
    let labels: Vec<f64> = feats.iter().map(MbfFeature::label).collect();
    emit(a.output.as_deref(), &save_json("eval-report", &evaluate(&post, &labels)?)?)
}

fn demo(a: &DemoArgs, seed: u64) -> Result<()> {
    if a.attack.is_empty() {
        bail!(mbf_core::Error::InvalidConfig("at least one attack is required".into()));
    }
    let defaults = DeskConfig::default();
    let cfg = DeskConfig {
        seed,
        net_images: a.net_images,
        detection_images: a.detection_images,
        shifted_images: a.shifted_images,
        train: TrainConfig { epochs: a.epochs, ..defaults.train },
        attacks: a.attack.clone(),
        data_transfer_attacks: if a.no_data_transfer { Vec::new() } else { a.attack[..1].to_vec() },
        hypotheses: (!a.no_hypotheses).then(HypothesisConfig::default),
        ..defaults
    };
    let (artifacts, report) = run_desk(&cfg)?;
    if let Some(dir) = &a.dump_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for d in &artifacts.datasets {
            for (split, name) in [(Split::Train, "train"), (Split::Test, "test")] {
                let records: Vec<_> = d.records_in(split).into_iter().cloned().collect();
                write_mbfa_file(&dir.join(format!("{}-{}-{name}.mbfa", d.source, d.attack)), &records)?;
            }
        }
    }
    emit(a.output.as_deref(), &save_json("desk-report", &report)?)
}

fn theorem1(a: &TheoremArgs, seed: u64) -> Result<()> {
    let report = verify_rayleigh(a.c, a.n, a.m, a.trials, seed)?;
    emit(a.output.as_deref(), &save_json("theorem1-report", &report)?)
}

fn select<'a>(feats: &'a [MbfFeature], key: &str) -> Vec<&'a MbfFeature> {
    feats.iter().filter(|f| f.group.name() == key || group_and_attack(f) == key).collect()
}

fn kstest(a: &KsArgs) -> Result<()> {
    let feats = features(&a.features)?;
    let (xa, xb) = (select(&feats, &a.a), select(&feats, &a.b));
    if xa.is_empty() || xb.is_empty() {
        let missing = if xa.is_empty() { &a.a } else { &a.b };
        bail!(mbf_core::Error::InvalidParameter(format!("no rows match group `{missing}`")));
    }
    let dim = feats[0].values.len();
    let dims: Vec<usize> = if a.dims.is_empty() { (1..=dim).collect() } else { a.dims.clone() };
    if let Some(&bad) = dims.iter().find(|&&d| d == 0 || d > dim) {
        bail!(mbf_core::Error::InvalidParameter(format!("dimension {bad} outside 1..={dim}")));
    }
    let mut rows = Vec::with_capacity(dims.len());
    for &d in &dims {
        let col = |s: &[&MbfFeature]| s.iter().map(|f| f.values[d - 1]).collect::<Vec<_>>();
        let r = ks_two_sample(&col(&xa), &col(&xb))?;
        rows.push(json!({ "dim": d, "d_statistic": r.d_statistic, "p_value": r.p_value }));
    }
    let mean_p = rows.iter().map(|r| r["p_value"].as_f64().unwrap_or(f64::NAN)).sum::<f64>() / rows.len() as f64;
    let body = json!({ "a": a.a, "b": a.b, "n_a": xa.len(), "n_b": xb.len(), "average_p": mean_p, "dimensions": rows });
    emit(a.output.as_deref(), &save_json("kstest-report", &body)?)
}

fn stats(a: &StatsArgs) -> Result<()> {
    let feats = features(&a.features)?;
    let rows = feature_statistics(&feats, group_and_attack)?;
    let mut buf = Vec::new();
    write_statistics_csv(&mut buf, &rows)?;
    emit(a.output.as_deref(), std::str::from_utf8(&buf)?)
}
