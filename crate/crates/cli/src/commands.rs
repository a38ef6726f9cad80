use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use carnot_core::catalog::{get_entry, list_entries};
use carnot_core::diffops::{gradient_length, gradient_norm_ratio, sub_laplacian, GradientRatio};
use carnot_core::group::CarnotGroup;
use carnot_core::io::{export_group, parse_group_file, parse_spec_file, NormRef};
use carnot_core::measure::{mcmc_sample, MeasureSpec, SampleBatch};
use carnot_core::quasinorm::{preset, QuasiNorm};
use carnot_core::rng::stream_rng;
use carnot_core::spectral::{
    empirical_poincare_ratio, grid_gap_oracle, ritz_convergence, ritz_gap_estimate, Dictionary, GapEstimate,
    GridConfig,
};
use carnot_core::verifier::{
    estimate_condition_constant, fit_ubound_constants, ubound_function_sets, Verdict,
};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::*;
use crate::output::{csv_bytes, Outputs};
use crate::CliError;

pub enum Status {
    Success,
    VerdictFailed(String),
}

/// Every JSON output: the result plus the (group, norm, a, p) it belongs to.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Payload<T> {
    pub command: String,
    pub group: String,
    pub norm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub result: T,
}

struct Resolved {
    group: CarnotGroup,
    norm: QuasiNorm,
    group_label: String,
    norm_label: String,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn config<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).unwrap_or(Value::Null)
}

fn resolve_group(args: &GroupArgs) -> Result<Resolved, CliError> {
    match (&args.group, &args.group_file) {
        (Some(name), None) => {
            let e = get_entry(name)?;
            let label = args.norm.clone().unwrap_or_else(|| e.default_preset().to_string());
            Ok(Resolved {
                norm: e.norm(&label)?,
                group: e.group.clone(),
                group_label: name.clone(),
                norm_label: label,
            })
        }
        (None, Some(path)) => {
            let loaded = parse_group_file(&read(path)?)?;
            let (spec, label) = match (&args.norm, loaded.norm) {
                (Some(name), _) => (preset(name, &loaded.group)?, name.clone()),
                (None, Some(spec)) => {
                    let label = spec.variant_name().to_string();
                    (spec, label)
                }
                (None, None) => return Err(CliError::Usage("the group file has no norm; pass --norm".into())),
            };
            Ok(Resolved {
                norm: QuasiNorm::new(spec, &loaded.group)?,
                group_label: loaded.group.name().to_string(),
                group: loaded.group,
                norm_label: label,
            })
        }
        _ => Err(CliError::Usage("pass exactly one of --group or --group-file".into())),
    }
}

struct Measure {
    spec: MeasureSpec,
    group_label: String,
    norm_label: String,
}

fn resolve_measure(args: &MeasureArgs) -> Result<Measure, CliError> {
    if let Some(path) = &args.spec {
        if args.a.is_some() || args.p.is_some() || args.group.norm.is_some() {
            return Err(CliError::Usage("--a, --p and --norm come from the spec file when --spec is given".into()));
        }
        let r = parse_spec_file(&read(path)?)?;
        return Ok(Measure {
            spec: r.measure,
            group_label: r.group_label,
            norm_label: r.norm_label,
        });
    }
    let g = resolve_group(&args.group)?;
    let (Some(a), Some(p)) = (args.a, args.p) else {
        return Err(CliError::Usage("pass --a and --p, or a --spec file".into()));
    };
    let spec = MeasureSpec::new(g.group, g.norm, a, p)?;
    Ok(Measure {
        spec,
        group_label: g.group_label,
        norm_label: g.norm_label,
    })
}

fn payload<T>(command: &str, m: &Measure, result: T) -> Payload<T> {
    Payload {
        command: command.into(),
        group: m.group_label.clone(),
        norm: m.norm_label.clone(),
        a: Some(m.spec.a),
        p: Some(m.spec.p),
        result,
    }
}

fn generator_index(group: &CarnotGroup, j0: usize) -> Result<usize, CliError> {
    if j0 == 0 || j0 > group.n1() {
        return Err(CliError::Usage(format!("--j0 must lie in 1..={}", group.n1())));
    }
    Ok(j0 - 1)
}

fn gamma_or_default(norm: &QuasiNorm, gamma: Option<u32>) -> Result<u32, CliError> {
    match gamma.or_else(|| norm.spec().own_gamma()) {
        Some(g) if g >= 2 => Ok(g),
        Some(g) => Err(CliError::Usage(format!("gamma must be at least 2, got {g}"))),
        None => Err(CliError::Usage("this norm has no exponent of its own; pass --gamma".into())),
    }
}

fn warn_theorem_coverage(spec: &MeasureSpec) {
    if let Some(g) = spec.norm.spec().own_gamma() {
        if !spec.covers_theorem(g) {
            log::warn!("p = {} is below 2γ = {}; the Poincaré theorem does not cover this measure", spec.p, 2 * g);
        }
    }
}

fn sample_batch(m: &Measure, count: usize, chains: usize, seed: u64) -> Result<SampleBatch, CliError> {
    warn_theorem_coverage(&m.spec);
    let b = mcmc_sample(&m.spec, count, chains, seed)?;
    log::info!(
        "sampled {} points, acceptance {:.3}, min ESS {:.0}",
        b.len(),
        b.acceptance_rate,
        b.min_ess()
    );
    Ok(b)
}

fn verdict_status(v: Verdict, what: &str) -> Status {
    match v {
        Verdict::Holds => Status::Success,
        Verdict::Fails => Status::VerdictFailed(format!("{what} fails")),
        Verdict::Inconclusive => Status::VerdictFailed(format!("{what} inconclusive")),
    }
}

pub fn catalog(args: &CatalogArgs) -> Result<Status, CliError> {
    let mut out = Outputs::new();
    let cfg = config(args);
    match &args.action {
        CatalogAction::List { experimental, out: path } => {
            let entries: Vec<_> = list_entries(*experimental).iter().map(|e| e.summary()).collect();
            out.emit_json(path.as_deref(), &entries)?;
        }
        CatalogAction::Show { name, out: path, export } => {
            let e = get_entry(name)?;
            out.emit_json(path.as_deref(), &e.summary())?;
            if let Some(x) = export {
                let file = export_group(&e.group, Some(NormRef::Preset(e.default_preset().to_string())));
                out.emit_json(Some(x), &file)?;
            }
        }
    }
    out.finish("catalog", &cfg, None, None)?;
    Ok(Status::Success)
}

pub fn validate(args: &ValidateArgs) -> Result<Status, CliError> {
    if let Some(path) = &args.group_file {
        let g = parse_group_file(&read(path)?)?;
        eprintln!(
            "ok: group {:?}, dimension {}, step {}, weights {:?}{}",
            g.group.name(),
            g.group.dim(),
            g.group.step(),
            g.group.weights(),
            g.norm.map(|n| format!(", norm {}", n.variant_name())).unwrap_or_default()
        );
    }
    if let Some(path) = &args.spec {
        let r = parse_spec_file(&read(path)?)?;
        eprintln!(
            "ok: group {:?}, norm {}, a = {}, p = {}",
            r.group_label, r.norm_label, r.measure.a, r.measure.p
        );
    }
    Ok(Status::Success)
}

fn ratio_text(r: GradientRatio) -> String {
    match r {
        GradientRatio::Finite(v) => v.to_string(),
        GradientRatio::Infinite => "inf".into(),
        GradientRatio::Indeterminate => "indeterminate".into(),
    }
}

pub fn grad_check(args: &GradCheckArgs) -> Result<Status, CliError> {
    let r = resolve_group(&args.group)?;
    let j0 = generator_index(&r.group, args.j0)?;
    let gamma = gamma_or_default(&r.norm, args.gamma)?;
    let n = r.group.dim();
    let mut rng = stream_rng(args.seed, 0);
    let mut rows = Vec::with_capacity(args.count);
    while rows.len() < args.count {
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if x.iter().all(|v| *v == 0.0) {
            continue;
        }
        let g = gradient_length(&r.group, &r.norm, &x)?;
        let l = sub_laplacian(&r.group, &r.norm, &x)?;
        let q = gradient_norm_ratio(&r.group, &r.norm, j0, gamma, &x)?;
        let mut row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        row.extend([g.to_string(), l.to_string(), ratio_text(q)]);
        rows.push(row);
    }
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.extend(["gradNorm".into(), "subLaplacian".into(), "ratio".into()]);
    let meta = serde_json::json!({
        "group": r.group_label, "norm": r.norm_label, "j0": args.j0, "gamma": gamma, "seed": args.seed,
    });
    let mut out = Outputs::new();
    out.emit(args.out.as_deref(), &csv_bytes(Some(&meta.to_string()), &header, &rows)?)?;
    out.finish("grad-check", &config(args), Some(args.seed), None)?;
    Ok(Status::Success)
}

pub fn check_condition(args: &CheckConditionArgs) -> Result<Status, CliError> {
    let r = resolve_group(&args.group)?;
    let j0 = generator_index(&r.group, args.j0)?;
    let gamma = gamma_or_default(&r.norm, args.gamma)?;
    let report = estimate_condition_constant(&r.group, &r.norm, j0, gamma, args.budget, args.seed)?;
    let verdict = report.verdict;
    let body = Payload {
        command: "check-condition".into(),
        group: r.group_label,
        norm: r.norm_label,
        a: None,
        p: None,
        result: report,
    };
    let mut out = Outputs::new();
    out.emit_json(args.out.as_deref(), &body)?;
    out.finish("check-condition", &config(args), Some(args.seed), None)?;
    Ok(verdict_status(verdict, "gradient condition"))
}

pub fn sample(args: &SampleArgs) -> Result<Status, CliError> {
    let m = resolve_measure(&args.measure)?;
    let b = sample_batch(&m, args.count, args.chains, args.seed)?;
    let meta = serde_json::to_string(&payload("sample", &m, &b)).map_err(|e| CliError::Internal(e.to_string()))?;
    let header: Vec<String> = (1..=b.dim).map(|i| format!("x{i}")).collect();
    let rows: Vec<Vec<String>> = b.iter().map(|x| x.iter().map(|v| v.to_string()).collect()).collect();
    let mut out = Outputs::new();
    out.emit(args.out.as_deref(), &csv_bytes(Some(&meta), &header, &rows)?)?;
    out.finish("sample", &config(args), Some(args.seed), None)?;
    Ok(Status::Success)
}

pub fn ubound_fit(args: &UboundFitArgs) -> Result<Status, CliError> {
    let m = resolve_measure(&args.measure)?;
    let j0 = generator_index(&m.spec.group, args.j0)?;
    let gamma = gamma_or_default(&m.spec.norm, args.gamma)?;
    let q = match args.q {
        Some(q) => q,
        None if m.spec.p > 1.0 => m.spec.p / (m.spec.p - 1.0),
        None => return Err(CliError::Usage("p = 1 has no finite conjugate exponent; pass --q".into())),
    };
    let b = sample_batch(&m, args.count, args.chains, args.seed)?;
    let dict = Dictionary::weighted_monomials(&m.spec.group, args.dict_degree)?;
    let (train, holdout) = ubound_function_sets(&dict, args.train, args.holdout, args.seed)?;
    let fit = fit_ubound_constants(&m.spec.group, &m.spec.norm, j0, gamma, m.spec.p, q, &train, &holdout, &b)?;
    let verdict = fit.verdict;
    let mut out = Outputs::new();
    out.emit_json(args.out.as_deref(), &payload("ubound-fit", &m, fit))?;
    out.finish("ubound-fit", &config(args), Some(args.seed), None)?;
    Ok(verdict_status(verdict, "U-bound holdout"))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct GapOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    ritz: Option<GapEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GapEstimate>,
    /// `|ritz − grid| / grid`
    #[serde(skip_serializing_if = "Option::is_none")]
    relative_difference: Option<f64>,
}

fn default_grid_points(dim: usize) -> usize {
    match dim {
        1 => 2001,
        2 => 201,
        _ => 51,
    }
}

pub fn estimate_gap(args: &EstimateGapArgs) -> Result<Status, CliError> {
    let m = resolve_measure(&args.measure)?;
    let n = m.spec.dim();
    let want_ritz = args.method != Method::Grid;
    let mut want_grid = args.method != Method::Ritz;
    if want_grid && n > 3 && args.method == Method::Both {
        log::warn!("dimension {n} is too large for the grid; running Ritz only");
        want_grid = false;
    }
    let ritz = if want_ritz {
        let b = sample_batch(&m, args.count, args.chains, args.seed)?;
        let dict = Dictionary::weighted_monomials(&m.spec.group, args.dict_degree)?;
        let mut est = ritz_gap_estimate(&m.spec, &dict, &b, args.seed)?;
        let mut sizes = Vec::new();
        for d in 1..=args.dict_degree {
            if let Ok(k) = Dictionary::weighted_monomials(&m.spec.group, d).map(|x| x.len()) {
                if sizes.last() != Some(&k) {
                    sizes.push(k);
                }
            }
        }
        est.convergence = ritz_convergence(&m.spec, &dict, &b, &sizes)?;
        Some(est)
    } else {
        None
    };
    let grid = if want_grid {
        let mut cfg = GridConfig::new(args.grid_points.unwrap_or_else(|| default_grid_points(n)));
        if let Some(hw) = &args.half_widths {
            cfg = cfg.with_half_widths(hw.clone());
        }
        Some(grid_gap_oracle(&m.spec, &cfg)?)
    } else {
        None
    };
    let relative_difference = match (&ritz, &grid) {
        (Some(r), Some(g)) => Some((r.lambda1 - g.lambda1).abs() / g.lambda1),
        _ => None,
    };
    let body = payload(
        "estimate-gap",
        &m,
        GapOutput {
            ritz,
            grid,
            relative_difference,
        },
    );
    let mut out = Outputs::new();
    out.emit_json(args.out.as_deref(), &body)?;
    if let Some(path) = &args.emit_plot {
        let mut rows = Vec::new();
        for (name, kind, est) in [
            ("ritz", "dictionarySize", &body.result.ritz),
            ("grid", "gridSpacing", &body.result.grid),
        ] {
            for c in est.iter().flat_map(|e| &e.convergence) {
                rows.push(vec![name.into(), kind.into(), c.size.to_string(), c.lambda1.to_string()]);
            }
        }
        let header = ["method", "sizeKind", "size", "lambda1"].map(String::from);
        out.emit(Some(path), &csv_bytes(None, &header, &rows)?)?;
    }
    out.finish("estimate-gap", &config(args), Some(args.seed), None)?;
    Ok(Status::Success)
}

pub fn poincare_ratio(args: &PoincareRatioArgs) -> Result<Status, CliError> {
    let m = resolve_measure(&args.measure)?;
    let b = sample_batch(&m, args.count, args.chains, args.seed)?;
    let dict = Dictionary::weighted_monomials(&m.spec.group, args.dict_degree)?;
    let r = empirical_poincare_ratio(&m.spec, args.q, &dict, &b, args.seed, !args.explore)?;
    let mut out = Outputs::new();
    out.emit_json(args.out.as_deref(), &payload("poincare-ratio", &m, r))?;
    out.finish("poincare-ratio", &config(args), Some(args.seed), None)?;
    Ok(Status::Success)
}

/// Top-level scalars of a result, and scalars one level down as `key.sub`.
fn metrics(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let scalar = |x: &Value| match x {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    };
    if let Value::Object(map) = v {
        for (k, x) in map {
            if let Some(s) = scalar(x) {
                out.push((k.clone(), s));
            } else if let Value::Object(inner) = x {
                for (k2, y) in inner {
                    if let Some(s) = scalar(y) {
                        out.push((format!("{k}.{k2}"), s));
                    }
                }
            }
        }
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

pub fn report(args: &ReportArgs) -> Result<Status, CliError> {
    type Key = (String, String, String);
    let mut groups: BTreeMap<Key, Vec<(PathBuf, Payload<Value>)>> = BTreeMap::new();
    for path in &args.inputs {
        let body: Payload<Value> = serde_json::from_str(&read(path)?)
            .map_err(|e| CliError::Usage(format!("{}: not a carnot-gap JSON output: {e}", path.display())))?;
        let key = (body.group.clone(), body.norm.clone(), fmt_opt(body.p));
        groups.entry(key).or_default().push((path.clone(), body));
    }
    let mut md = String::from("# carnot-gap report\n");
    let mut rows = Vec::new();
    for ((group, norm, p), runs) in &groups {
        md.push_str(&format!("\n## {group} / {norm} / p = {p}\n\n| command | metric | value | source |\n|---|---|---|---|\n"));
        for (path, run) in runs {
            for (k, v) in metrics(&run.result) {
                md.push_str(&format!("| {} | {k} | {v} | {} |\n", run.command, path.display()));
                rows.push(vec![
                    group.clone(),
                    norm.clone(),
                    fmt_opt(run.a),
                    p.clone(),
                    run.command.clone(),
                    k,
                    v,
                    path.display().to_string(),
                ]);
            }
        }
    }
    let header = ["group", "norm", "a", "p", "command", "metric", "value", "source"].map(String::from);
    let mut out = Outputs::new();
    out.emit(Some(&args.out_dir.join("report.md")), md.as_bytes())?;
    out.emit(Some(&args.out_dir.join("summary.csv")), &csv_bytes(None, &header, &rows)?)?;
    out.finish("report", &config(args), None, None)?;
    Ok(Status::Success)
}
