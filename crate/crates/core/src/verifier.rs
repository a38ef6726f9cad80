//! Numerical checks of the gradient condition and of the U-bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffops::{euclidean_length, horizontal_from_gradient, ratio_from_parts, sample_sphere_point};
use crate::error::{CarnotError, Result};
use crate::field::{ScalarField, SharedField};
use crate::group::CarnotGroup;
use crate::lp;
use crate::measure::SampleBatch;
use crate::poly::{rational_from_f64, rational_to_f64, Rational};
use crate::quasinorm::{QuasiNorm, QuasiNormSpec};
use crate::rng::{chunks, stream_rng};
use crate::spectral::Dictionary;

pub const EPSILON_HOLD: f64 = 1e-8;
/// Sphere points with `|x_{j0}|` below this are left out of the infimum.
pub const KERNEL_EXCLUSION: f64 = 1e-9;
const POLISH_COUNT: usize = 32;
const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

fn verdict_for(inf: Option<f64>, eps: f64) -> Verdict {
    match inf {
        None => Verdict::Inconclusive,
        Some(v) if v > eps => Verdict::Holds,
        Some(_) => Verdict::Fails,
    }
}

mod one_based {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &usize, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(*v as u64 + 1)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        let v = u64::deserialize(d)?;
        if v == 0 {
            return Err(serde::de::Error::custom("generator indices are 1-based"));
        }
        Ok(v as usize - 1)
    }
}

/// Outcome of [`estimate_condition_constant`]. `j0` is 0-based in memory and
/// 1-based when serialized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionReport {
    #[serde(with = "one_based")]
    pub j0: usize,
    pub gamma: u32,
    /// The norm's own exponent, reported next to the condition's γ.
    pub norm_gamma: Option<u32>,
    pub infimum_estimate: Option<f64>,
    pub argmin: Vec<f64>,
    pub samples_used: usize,
    pub excluded_kernel: usize,
    pub refinement_iterations: usize,
    pub verdict: Verdict,
    pub epsilon_hold: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
struct Search {
    value: Option<f64>,
    argmin: Vec<f64>,
    excluded: usize,
    iterations: usize,
}

type Objective<'a> = dyn Fn(&[f64]) -> Result<Option<f64>> + Sync + 'a;

fn insert_lowest(best: &mut Vec<(f64, Vec<f64>)>, v: f64, x: Vec<f64>, keep: usize) {
    if best.len() == keep && v >= best[keep - 1].0 {
        return;
    }
    let pos = best.partition_point(|(b, _)| *b <= v);
    best.insert(pos, (v, x));
    best.truncate(keep);
}

/// Minimizes `objective` over `{N = 1}`: Gaussian sphere samples, then a
/// coordinate-descent polish of the lowest ones, each move projected back
/// onto the sphere. `None` from the objective marks an excluded point.
fn sphere_infimum(group: &CarnotGroup, norm: &QuasiNorm, budget: usize, seed: u64, objective: &Objective) -> Result<Search> {
    let parts: Vec<Result<(Vec<(f64, Vec<f64>)>, usize)>> = chunks(budget, CHUNK)
        .into_par_iter()
        .enumerate()
        .map(|(ci, (_, len))| {
            let mut rng = stream_rng(seed, ci as u64);
            let mut best = Vec::with_capacity(POLISH_COUNT + 1);
            let mut excluded = 0;
            for _ in 0..len {
                let x = sample_sphere_point(group, norm, &mut rng);
                match objective(&x)? {
                    Some(v) => insert_lowest(&mut best, v, x, POLISH_COUNT),
                    None => excluded += 1,
                }
            }
            Ok((best, excluded))
        })
        .collect();
    let mut best = Vec::new();
    let mut excluded = 0;
    for part in parts {
        let (b, e) = part?;
        excluded += e;
        for (v, x) in b {
            insert_lowest(&mut best, v, x, POLISH_COUNT);
        }
    }
    if best.is_empty() {
        return Ok(Search {
            value: None,
            argmin: Vec::new(),
            excluded,
            iterations: 0,
        });
    }
    let polished: Vec<Result<(f64, Vec<f64>, usize)>> = best
        .into_par_iter()
        .map(|(v, x)| polish(group, norm, v, x, objective))
        .collect();
    let mut out = Search {
        value: None,
        argmin: Vec::new(),
        excluded,
        iterations: 0,
    };
    for r in polished {
        let (v, x, it) = r?;
        out.iterations += it;
        if out.value.map_or(true, |b| v < b) {
            out.value = Some(v);
            out.argmin = x;
        }
    }
    Ok(out)
}

fn polish(group: &CarnotGroup, norm: &QuasiNorm, mut v: f64, mut x: Vec<f64>, objective: &Objective) -> Result<(f64, Vec<f64>, usize)> {
    let mut h = 0.1;
    let mut iterations = 0;
    while h > 1e-9 && iterations < 400 {
        iterations += 1;
        let mut improved = false;
        for i in 0..x.len() {
            for s in [h, -h] {
                let mut y = x.clone();
                y[i] += s;
                let ny = norm.value(&y);
                if ny <= 0.0 {
                    continue;
                }
                let y = group.dilate_unchecked(1.0 / ny, &y);
                if let Some(w) = objective(&y)? {
                    if w < v {
                        v = w;
                        x = y;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    Ok((v, x, iterations))
}

/// Empirical infimum of `|∇_G N| N^{γ−1}/|x_{j0}|^{γ−1}` on `{N = 1}`.
/// `j0` is 0-based.
pub fn estimate_condition_constant(
    group: &CarnotGroup,
    norm: &QuasiNorm,
    j0: usize,
    gamma: u32,
    budget: usize,
    seed: u64,
) -> Result<ConditionReport> {
    if j0 >= group.n1() {
        return Err(CarnotError::invalid(format!(
            "generator index {} outside 1..={}",
            j0 + 1,
            group.n1()
        )));
    }
    if gamma < 2 {
        return Err(CarnotError::invalid(format!("γ must be at least 2, got {gamma}")));
    }
    if budget == 0 {
        return Err(CarnotError::invalid("sample budget must be positive"));
    }
    let objective = |x: &[f64]| -> Result<Option<f64>> {
        if x[j0].abs() < KERNEL_EXCLUSION {
            return Ok(None);
        }
        let g = norm.gradient(x)?;
        let len = euclidean_length(&horizontal_from_gradient(group, &g, x));
        Ok(ratio_from_parts(len, norm.value(x), x[j0], gamma).finite())
    };
    let s = sphere_infimum(group, norm, budget, seed, &objective)?;
    Ok(ConditionReport {
        j0,
        gamma,
        norm_gamma: norm.spec().own_gamma(),
        infimum_estimate: s.value,
        argmin: s.argmin,
        samples_used: budget,
        excluded_kernel: s.excluded,
        refinement_iterations: s.iterations,
        verdict: verdict_for(s.value, EPSILON_HOLD),
        epsilon_hold: EPSILON_HOLD,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PureGeneratorReport {
    #[serde(with = "one_based")]
    pub j0: usize,
    /// `C = 2β_{j0} a_{j0}/γ_b` for the block containing `x_{j0}`.
    pub constant: f64,
    pub block_gamma: u32,
    pub max_relative_deviation: f64,
    pub points: usize,
    pub verdict: Verdict,
}

/// Checks `|X_{j0} N| = C |x_{j0}|^{γ−1}/N^{γ−1}` when `X_{j0} = ∂_{x_{j0}}`.
///
/// For a composite norm `N = (Σ_b S_b^{α/γ_b})^{1/α}` the identity becomes
/// `|X_{j0} N| = C |x_{j0}|^{γ_b−1} S_b^{α/γ_b−1} / N^{α−1}`, which reduces to
/// the power-sum form when there is one block.
pub fn check_pure_generator_identity(
    group: &CarnotGroup,
    norm: &QuasiNorm,
    j0: usize,
    points: usize,
    seed: u64,
) -> Result<PureGeneratorReport> {
    if j0 >= group.n1() {
        return Err(CarnotError::invalid(format!("generator index {} out of range", j0 + 1)));
    }
    if let Err((coord, mono)) = group.horizontal()[j0].pure_partial_witness(j0) {
        return Err(CarnotError::PreconditionFailed(format!(
            "X{} is not ∂_x{}: coefficient of ∂_x{} contains {mono}",
            j0 + 1,
            j0 + 1,
            coord + 1
        )));
    }
    // (a, β, γ_b, α)
    let (a, beta, gb, alpha) = match norm.spec() {
        QuasiNormSpec::PowerSum { a, beta, gamma } => (a[j0], beta[j0], *gamma, *gamma),
        QuasiNormSpec::Composite { blocks, alpha } => {
            let (b, pos) = blocks
                .iter()
                .find_map(|b| b.coords.iter().position(|&c| c == j0 + 1).map(|p| (b, p)))
                .ok_or_else(|| {
                    CarnotError::PreconditionFailed(format!("x{} is not covered by any block", j0 + 1))
                })?;
            (b.a[pos], b.beta[pos], b.gamma, *alpha)
        }
        other => {
            return Err(CarnotError::invalid(format!(
                "pure-generator identity needs a PowerSum or Composite norm, got {}",
                other.variant_name()
            )))
        }
    };
    let coeffs: Vec<(usize, f64, u32)> = match norm.spec() {
        QuasiNormSpec::PowerSum { a, beta, .. } => {
            (0..group.dim()).map(|i| (i, a[i], beta[i])).collect()
        }
        QuasiNormSpec::Composite { blocks, .. } => {
            let b = blocks.iter().find(|b| b.coords.contains(&(j0 + 1))).expect("found above");
            b.coords.iter().zip(&b.a).zip(&b.beta).map(|((c, a), be)| (c - 1, *a, *be)).collect()
        }
        _ => unreachable!(),
    };
    let c = 2.0 * beta as f64 * a / gb as f64;
    let mut rng = stream_rng(seed, 0);
    let mut worst: f64 = 0.0;
    let mut used = 0;
    while used < points {
        let x = sample_sphere_point(group, norm, &mut rng);
        let lambda = 0.1 + 9.9 * rand::Rng::gen::<f64>(&mut rng);
        let x = group.dilate_unchecked(lambda, &x);
        if x[j0] == 0.0 {
            continue;
        }
        let g = norm.gradient(&x)?;
        let lhs = horizontal_from_gradient(group, &g, &x)[j0].abs();
        let nv = norm.value(&x);
        let s_b: f64 = coeffs.iter().map(|(i, a, b)| a * x[*i].powi(2 * *b as i32)).sum();
        let rhs = c * x[j0].abs().powi(gb as i32 - 1) * s_b.powf(alpha as f64 / gb as f64 - 1.0)
            / nv.powi(alpha as i32 - 1);
        if rhs == 0.0 || !rhs.is_finite() {
            continue;
        }
        worst = worst.max((lhs - rhs).abs() / rhs);
        used += 1;
    }
    Ok(PureGeneratorReport {
        j0,
        constant: c,
        block_gamma: gb,
        max_relative_deviation: worst,
        points: used,
        verdict: if worst < 1e-10 { Verdict::Holds } else { Verdict::Fails },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Step2Report {
    pub alpha: u32,
    /// Infimum of `|∇_G N_α| N^{4α−1}/‖x‖^{4α−1}` on `{N = 1}`, `‖x‖` over the
    /// first stratum.
    pub infimum_estimate: Option<f64>,
    pub argmin: Vec<f64>,
    pub samples_used: usize,
    pub excluded: usize,
    pub refinement_iterations: usize,
    pub verdict: Verdict,
}

pub fn check_step2_proposition(group: &CarnotGroup, norm: &QuasiNorm, budget: usize, seed: u64) -> Result<Step2Report> {
    let QuasiNormSpec::Step2Alpha { alpha, .. } = norm.spec() else {
        return Err(CarnotError::invalid("step-2 proposition check needs a Step2Alpha norm"));
    };
    if group.step() != 2 {
        return Err(CarnotError::invalid(format!("{} is not a step-2 group", group.name())));
    }
    let n1 = group.n1();
    let e = (4 * alpha - 1) as i32;
    let objective = |x: &[f64]| -> Result<Option<f64>> {
        let r = euclidean_length(&x[..n1]);
        if r < KERNEL_EXCLUSION {
            return Ok(None);
        }
        let g = norm.gradient(x)?;
        let len = euclidean_length(&horizontal_from_gradient(group, &g, x));
        Ok(Some(len * (norm.value(x) / r).powi(e)))
    };
    let s = sphere_infimum(group, norm, budget, seed, &objective)?;
    Ok(Step2Report {
        alpha: *alpha,
        infimum_estimate: s.value,
        argmin: s.argmin,
        samples_used: budget,
        excluded: s.excluded,
        refinement_iterations: s.iterations,
        verdict: verdict_for(s.value, EPSILON_HOLD),
    })
}

/// Monte Carlo terms of the U-bound for one function, each divided by `M_f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UBoundTerms {
    /// `μ(|f|^q N^{p−2γ}|x_{j0}|^{2γ})`
    pub left: f64,
    /// `μ(|∇_G f|^q)`
    pub gradient: f64,
    /// `μ(|f|^q)`
    pub mass: f64,
}

pub fn ubound_terms(
    group: &CarnotGroup,
    norm: &QuasiNorm,
    j0: usize,
    gamma: u32,
    p: f64,
    q: f64,
    f: &dyn ScalarField,
    batch: &SampleBatch,
) -> Result<UBoundTerms> {
    let mut t = UBoundTerms {
        left: 0.0,
        gradient: 0.0,
        mass: 0.0,
    };
    let m = batch.len() as f64;
    for x in batch.iter() {
        let fv = f.value(x).abs().powf(q);
        let nv = norm.value(x);
        let w = if nv == 0.0 {
            0.0
        } else {
            nv.powf(p - 2.0 * gamma as f64) * x[j0].abs().powi(2 * gamma as i32)
        };
        let g = f.gradient(x)?;
        let gl = euclidean_length(&horizontal_from_gradient(group, &g, x));
        t.left += fv * w / m;
        t.gradient += gl.powf(q) / m;
        t.mass += fv / m;
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UBoundFit {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub q: f64,
    pub p: f64,
    pub gamma: u32,
    pub train_size: usize,
    pub holdout_size: usize,
    pub skipped: usize,
    /// `min (A G_f + B M_f − L_f)/M_f` over the holdout.
    pub worst_holdout_margin: f64,
    /// Largest `L_f/M_f` in the holdout, the scale the margin is judged against.
    pub term_scale: f64,
    pub lp_pivots: usize,
    pub verdict: Verdict,
}

/// Tolerance on the normalized holdout margin, relative to the term scale.
pub const HOLDOUT_TOLERANCE: f64 = 1e-8;

/// Fits `(A, B)` minimizing `A + B` subject to `L_f ≤ A G_f + B M_f` on the
/// training functions, exactly over the rationals, and scores the holdout.
///
/// Each constraint is divided by `M_f`. The LP solved is the dual
/// `max Σ l_f u_f s.t. Σ g_f u_f ≤ 1, Σ u_f ≤ 1, u ≥ 0`, whose dual values
/// are `(A, B)`.
pub fn fit_ubound_constants(
    group: &CarnotGroup,
    norm: &QuasiNorm,
    j0: usize,
    gamma: u32,
    p: f64,
    q: f64,
    train: &[SharedField],
    holdout: &[SharedField],
    batch: &SampleBatch,
) -> Result<UBoundFit> {
    if j0 >= group.n1() {
        return Err(CarnotError::invalid(format!("generator index {} out of range", j0 + 1)));
    }
    if p < 2.0 * gamma as f64 {
        return Err(CarnotError::invalid(format!("U-bound needs p ≥ 2γ, got p = {p}, γ = {gamma}")));
    }
    if ((1.0 / p + 1.0 / q) - 1.0).abs() > 1e-12 {
        return Err(CarnotError::invalid(format!("q = {q} is not conjugate to p = {p}")));
    }
    let terms = |fs: &[SharedField]| -> Result<Vec<UBoundTerms>> {
        fs.par_iter()
            .map(|f| ubound_terms(group, norm, j0, gamma, p, q, f.as_ref(), batch))
            .collect()
    };
    let train_terms = terms(train)?;
    let holdout_terms = terms(holdout)?;
    let mut skipped = 0;
    let mut l = Vec::new();
    let mut g = Vec::new();
    for t in &train_terms {
        if t.mass <= 0.0 || (t.gradient == 0.0 && t.mass == 0.0) {
            log::warn!("skipping degenerate training function with G = M = 0");
            skipped += 1;
            continue;
        }
        l.push(rational_from_f64(t.left / t.mass)?);
        g.push(rational_from_f64(t.gradient / t.mass)?);
    }
    if l.is_empty() {
        return Err(CarnotError::invalid("no usable training functions"));
    }
    let one = Rational::from_integer(1.into());
    let rows = vec![g, vec![one.clone(); l.len()]];
    let sol = lp::maximize(&l, &rows, &[one.clone(), one])?;
    let a = rational_to_f64(&sol.y[0]);
    let b = rational_to_f64(&sol.y[1]);
    let mut worst = f64::INFINITY;
    let mut scale: f64 = 0.0;
    for t in &holdout_terms {
        if t.mass <= 0.0 {
            skipped += 1;
            continue;
        }
        let margin = (a * t.gradient + b * t.mass - t.left) / t.mass;
        worst = worst.min(margin);
        scale = scale.max(t.left / t.mass);
    }
    if !worst.is_finite() {
        worst = 0.0;
    }
    let ok = a > 0.0 && b >= 0.0 && worst >= -HOLDOUT_TOLERANCE * scale.max(1.0);
    Ok(UBoundFit {
        a,
        b,
        q,
        p,
        gamma,
        train_size: train.len(),
        holdout_size: holdout.len(),
        skipped,
        worst_holdout_margin: worst,
        term_scale: scale,
        lp_pivots: sol.pivots,
        verdict: if ok { Verdict::Holds } else { Verdict::Fails },
    })
}

/// Training and holdout functions for [`fit_ubound_constants`]: training is
/// every dictionary function plus random combinations up to `train`; the
/// holdout is `holdout` further combinations from an independent stream.
pub fn ubound_function_sets(
    dict: &Dictionary,
    train: usize,
    holdout: usize,
    seed: u64,
) -> Result<(Vec<SharedField>, Vec<SharedField>)> {
    let mut t: Vec<SharedField> = dict.functions().iter().take(train).cloned().collect();
    let extra = train.saturating_sub(t.len());
    t.extend(dict.random_combinations(extra, seed, 1)?.into_iter().map(|c| c.1));
    let h = dict.random_combinations(holdout, seed, 2)?.into_iter().map(|c| c.1).collect();
    Ok((t, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_entry;

    #[test]
    fn absolute_value_condition() {
        let e = get_entry("euclidean-1d").unwrap();
        let n = e.norm("powersum-default").unwrap();
        let r = estimate_condition_constant(&e.group, &n, 0, 2, 1000, 1).unwrap();
        assert_eq!(r.infimum_estimate, Some(1.0));
        assert_eq!(r.verdict, Verdict::Holds);
        assert!((n.value(&r.argmin) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn heisenberg_kaplan_condition() {
        let e = get_entry("heisenberg-h1").unwrap();
        let n = e.norm("kaplan").unwrap();
        let r = estimate_condition_constant(&e.group, &n, 0, 4, 20_000, 7).unwrap();
        let v = r.infimum_estimate.unwrap();
        assert!((v - 1.0).abs() < 1e-3, "{v}");
        assert!((n.value(&r.argmin) - 1.0).abs() <= 1e-10);
        assert!(r.argmin[0].abs() > 0.99);
    }

    #[test]
    fn deterministic_reports() {
        let e = get_entry("engel").unwrap();
        let n = e.norm("powersum-default").unwrap();
        let a = estimate_condition_constant(&e.group, &n, 0, 12, 10_000, 3).unwrap();
        let b = estimate_condition_constant(&e.group, &n, 0, 12, 10_000, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn report_serializes_one_based() {
        let e = get_entry("euclidean-1d").unwrap();
        let n = e.norm("powersum-default").unwrap();
        let r = estimate_condition_constant(&e.group, &n, 0, 2, 10, 1).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["j0"], 1);
        assert_eq!(v["verdict"], "holds");
        let back: ConditionReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn pure_generator_cases() {
        let e = get_entry("engel").unwrap();
        let n = e.norm("powersum-default").unwrap();
        let r = check_pure_generator_identity(&e.group, &n, 0, 10_000, 1).unwrap();
        assert_eq!(r.constant, 1.0);
        assert!(r.max_relative_deviation < 1e-10, "{r:?}");
        let l = get_entry("euclidean-1d").unwrap();
        let r = check_pure_generator_identity(&l.group, &l.norm("powersum-default").unwrap(), 0, 100, 1).unwrap();
        assert_eq!(r.constant, 1.0);
        assert!(r.max_relative_deviation <= f64::EPSILON);
        let h = get_entry("heisenberg-h1").unwrap();
        let err = check_pure_generator_identity(&h.group, &h.norm("powersum-default").unwrap(), 0, 10, 1);
        match err {
            Err(CarnotError::PreconditionFailed(msg)) => assert!(msg.contains("x2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn composite_block_identity() {
        let e = get_entry("engel").unwrap();
        let n = e.norm("composite-strata").unwrap();
        let r = check_pure_generator_identity(&e.group, &n, 0, 5_000, 2).unwrap();
        assert!(r.max_relative_deviation < 1e-10, "{r:?}");
        assert_eq!(r.block_gamma, 2);
    }

    #[test]
    fn step2_kaplan_infimum() {
        let e = get_entry("heisenberg-h1").unwrap();
        let n = e.norm("kaplan").unwrap();
        let r = check_step2_proposition(&e.group, &n, 20_000, 1).unwrap();
        assert!((r.infimum_estimate.unwrap() - 1.0).abs() < 1e-6, "{r:?}");
        assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn constant_function_forces_mass_constant() {
        use crate::field::PolyField;
        use crate::measure::{mcmc_sample, MeasureSpec};
        use crate::poly::SparsePoly;
        use std::sync::Arc;
        let e = get_entry("euclidean-1d").unwrap();
        let spec = MeasureSpec::new(e.group.clone(), e.norm("powersum-default").unwrap(), 1.0, 4.0).unwrap();
        let b = mcmc_sample(&spec, 4000, 1, 5).unwrap();
        let one: SharedField = Arc::new(PolyField::new(SparsePoly::one(1)));
        let fit = fit_ubound_constants(&spec.group, &spec.norm, 0, 2, 4.0, 4.0 / 3.0, &[one.clone()], &[one], &b).unwrap();
        let m4 = b.points.iter().map(|x| x.powi(4)).sum::<f64>() / b.len() as f64;
        assert_eq!(fit.a, 0.0);
        assert!((fit.b - m4).abs() < 1e-12 * m4);
        assert!(fit.worst_holdout_margin.abs() < 1e-12);
    }

    #[test]
    fn gaussian_family_fit_passes() {
        use crate::measure::{mcmc_sample, MeasureSpec};
        let e = get_entry("euclidean-1d").unwrap();
        let spec = MeasureSpec::new(e.group.clone(), e.norm("powersum-default").unwrap(), 1.0, 4.0).unwrap();
        let b = mcmc_sample(&spec, 20_000, 2, 9).unwrap();
        let d = Dictionary::weighted_monomials(&spec.group, 6).unwrap();
        let (t, h) = ubound_function_sets(&d, 200, 200, 9).unwrap();
        assert_eq!(t.len(), 200);
        let fit = fit_ubound_constants(&spec.group, &spec.norm, 0, 2, 4.0, 4.0 / 3.0, &t, &h, &b).unwrap();
        assert!(fit.a > 0.0 && fit.b >= 0.0, "{fit:?}");
        assert_eq!(fit.verdict, Verdict::Holds, "{fit:?}");
    }
}
