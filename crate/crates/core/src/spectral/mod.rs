//! Spectral-gap estimates for `L_p = −Δ_G + a p N^{p−1} ∇_G N · ∇_G`.
//!
//! Every method works with the Dirichlet form `E(f,f) = μ(|∇_G f|²)` rather
//! than the drift operator, so the discrete problems stay symmetric.

mod grid;
mod lobpcg;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use grid::{GridProblem, DENSITY_FLOOR};

use crate::diffops::horizontal_from_gradient;
use crate::error::{CarnotError, Result};
use crate::field::{DampedField, PolyField, ScalarField, SharedField};
use crate::group::CarnotGroup;
use crate::measure::{MeasureSpec, SampleBatch};
use crate::poly::{rational_from_f64, weighted_monomials, SparsePoly};
use crate::rng::stream_rng;

/// Trial functions: polynomials, optionally damped by `exp(−ε N^p)`.
#[derive(Clone)]
pub struct Dictionary {
    polys: Vec<SparsePoly>,
    labels: Vec<String>,
    functions: Vec<SharedField>,
    max_degree: u32,
    damping: Option<(SharedField, f64, f64)>,
}

impl std::fmt::Debug for Dictionary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dictionary")
            .field("labels", &self.labels)
            .field("max_degree", &self.max_degree)
            .field("damping", &self.damping_epsilon())
            .finish()
    }
}

impl Dictionary {
    /// All monomials `x^α` with `1 ≤ ⟨α,σ⟩ ≤ max_degree`.
    pub fn weighted_monomials(group: &CarnotGroup, max_degree: u32) -> Result<Self> {
        let exps = weighted_monomials(group.weights(), max_degree);
        if exps.is_empty() {
            return Err(CarnotError::invalid(format!(
                "no monomials of weighted degree ≤ {max_degree}"
            )));
        }
        let polys: Vec<SparsePoly> = exps
            .into_iter()
            .map(|e| SparsePoly::monomial(e, rational_from_f64(1.0).expect("one")))
            .collect();
        let mut d = Self::from_polys(polys)?;
        d.max_degree = max_degree;
        Ok(d)
    }

    pub fn from_polys(polys: Vec<SparsePoly>) -> Result<Self> {
        if polys.is_empty() {
            return Err(CarnotError::invalid("dictionary is empty"));
        }
        let labels = polys.iter().map(|p| p.to_string()).collect();
        let functions = polys
            .iter()
            .map(|p| Arc::new(PolyField::new(p.clone())) as SharedField)
            .collect();
        Ok(Dictionary {
            max_degree: 0,
            polys,
            labels,
            functions,
            damping: None,
        })
    }

    /// Multiplies every function by `exp(−ε N^p)`.
    pub fn damped(mut self, norm: SharedField, epsilon: f64, p: f64) -> Self {
        if epsilon > 0.0 {
            self.functions = self.functions.iter().map(|f| self.damp(f.clone(), &norm, epsilon, p)).collect();
            self.damping = Some((norm, epsilon, p));
        }
        self
    }

    fn damp(&self, f: SharedField, norm: &SharedField, epsilon: f64, p: f64) -> SharedField {
        Arc::new(DampedField::new(f, norm.clone(), epsilon, p))
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[SharedField] {
        &self.functions
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn damping_epsilon(&self) -> f64 {
        self.damping.as_ref().map_or(0.0, |d| d.1)
    }

    /// The first `k` functions, as a smaller dictionary.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.clamp(1, self.len());
        Dictionary {
            polys: self.polys[..k].to_vec(),
            labels: self.labels[..k].to_vec(),
            functions: self.functions[..k].to_vec(),
            max_degree: self.max_degree,
            damping: self.damping.clone(),
        }
    }

    /// Standard-normal combinations of the dictionary polynomials, drawn from
    /// RNG stream `stream` of `seed`.
    pub fn random_combinations(&self, count: usize, seed: u64, stream: u64) -> Result<Vec<(Vec<f64>, SharedField)>> {
        let mut rng = stream_rng(seed, stream);
        let dim = self.polys[0].dim();
        (0..count)
            .map(|_| {
                let c: Vec<f64> = (0..self.len()).map(|_| rng.sample(StandardNormal)).collect();
                let mut p = SparsePoly::zero(dim);
                for (ci, pi) in c.iter().zip(&self.polys) {
                    p = &p + &pi.scale(&rational_from_f64(*ci)?);
                }
                let mut f: SharedField = Arc::new(PolyField::new(p));
                if let Some((norm, eps, pp)) = &self.damping {
                    f = self.damp(f, norm, *eps, *pp);
                }
                Ok((c, f))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapMethod {
    Ritz,
    Grid,
    EmpiricalRatio,
}

/// One point of a convergence curve: a size parameter (dictionary size or
/// grid spacing) and the estimate at that size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergencePoint {
    pub size: f64,
    pub lambda1: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SizeParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dictionary_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_weighted_degree: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kept_directions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points_per_axis: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GapEstimate {
    pub lambda1: f64,
    pub method: GapMethod,
    pub size_params: SizeParams,
    pub mc_stderr: Option<f64>,
    pub seed: Option<u64>,
    pub convergence: Vec<ConvergencePoint>,
}

/// Values `F[m×d]` and horizontal gradients `G_k[m×d]` of the dictionary at
/// every batch point.
struct Evaluated {
    f: DMatrix<f64>,
    g: Vec<DMatrix<f64>>,
}

fn evaluate(group: &CarnotGroup, fns: &[SharedField], batch: &SampleBatch) -> Result<Evaluated> {
    let m = batch.len();
    let d = fns.len();
    let n1 = group.n1();
    let rows: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let x = batch.point(i);
            let mut vals = Vec::with_capacity(d);
            let mut grads = vec![0.0; n1 * d];
            for (j, f) in fns.iter().enumerate() {
                vals.push(f.value(x));
                let hg = horizontal_from_gradient(group, &f.gradient(x)?, x);
                for k in 0..n1 {
                    grads[k * d + j] = hg[k];
                }
            }
            Ok((vals, grads))
        })
        .collect();
    let mut f = DMatrix::zeros(m, d);
    let mut g = vec![DMatrix::zeros(m, d); n1];
    for (i, r) in rows.into_iter().enumerate() {
        let (vals, grads) = r?;
        for j in 0..d {
            f[(i, j)] = vals[j];
            for k in 0..n1 {
                g[k][(i, j)] = grads[k * d + j];
            }
        }
    }
    Ok(Evaluated { f, g })
}

/// Sufficient statistics of one block of batch rows.
#[derive(Clone)]
struct BlockSums {
    count: f64,
    sf: DVector<f64>,
    sff: DMatrix<f64>,
    sgg: DMatrix<f64>,
}

impl BlockSums {
    fn zero(d: usize) -> Self {
        BlockSums {
            count: 0.0,
            sf: DVector::zeros(d),
            sff: DMatrix::zeros(d, d),
            sgg: DMatrix::zeros(d, d),
        }
    }

    fn add(&mut self, o: &BlockSums) {
        self.count += o.count;
        self.sf += &o.sf;
        self.sff += &o.sff;
        self.sgg += &o.sgg;
    }
}

const RITZ_BLOCKS: usize = 50;
const BOOTSTRAP_RESAMPLES: usize = 20;

fn block_sums(ev: &Evaluated) -> Vec<BlockSums> {
    let m = ev.f.nrows();
    let d = ev.f.ncols();
    let blocks = RITZ_BLOCKS.min(m).max(1);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * m / blocks;
            let end = (b + 1) * m / blocks;
            let fb = ev.f.rows(start, end - start);
            let mut s = BlockSums::zero(d);
            s.count = (end - start) as f64;
            s.sf = fb.row_sum().transpose();
            s.sff = fb.transpose() * fb;
            for gk in &ev.g {
                let gb = gk.rows(start, end - start);
                s.sgg += gb.transpose() * gb;
            }
            s
        })
        .collect()
}

struct RitzSolution {
    lambda: f64,
    kept: usize,
}

/// Smallest `λ` of `A v = λ B v` on the span of `B`'s non-null directions.
fn solve_ritz(s: &BlockSums) -> Result<RitzSolution> {
    let d = s.sf.len();
    let mean = &s.sf / s.count;
    let mut b = &s.sff / s.count - &mean * mean.transpose();
    let mut a = &s.sgg / s.count;
    // diagonal scaling
    let scale: Vec<f64> = (0..d)
        .map(|i| if b[(i, i)] > 0.0 { 1.0 / b[(i, i)].sqrt() } else { 0.0 })
        .collect();
    for i in 0..d {
        for j in 0..d {
            b[(i, j)] *= scale[i] * scale[j];
            a[(i, j)] *= scale[i] * scale[j];
        }
    }
    let eb = SymmetricEigen::new(b);
    let trace: f64 = eb.eigenvalues.iter().sum();
    let threshold = 1e-10 * trace / d as f64;
    let keep: Vec<usize> = (0..d).filter(|&i| eb.eigenvalues[i] > threshold).collect();
    if keep.is_empty() || !(trace > 0.0) {
        return Err(CarnotError::DictionaryDegenerate {
            kept: 0,
            total: d,
            removed: (0..d).collect(),
        });
    }
    let mut w = DMatrix::zeros(d, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let s = 1.0 / eb.eigenvalues[i].sqrt();
        for r in 0..d {
            w[(r, c)] = eb.eigenvectors[(r, i)] * s;
        }
    }
    let mut m = w.transpose() * a * &w;
    m = (&m + m.transpose()) * 0.5;
    let em = SymmetricEigen::new(m);
    let lambda = em.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !lambda.is_finite() {
        return Err(CarnotError::NonFinite {
            value: lambda,
            point: Vec::new(),
        });
    }
    Ok(RitzSolution {
        lambda,
        kept: keep.len(),
    })
}

/// Rayleigh–Ritz estimate of the gap from Monte Carlo Gram matrices, with a
/// block-bootstrap standard error over 20 resamples.
pub fn ritz_gap_estimate(spec: &MeasureSpec, dict: &Dictionary, batch: &SampleBatch, seed: u64) -> Result<GapEstimate> {
    if batch.len() < 2 {
        return Err(CarnotError::invalid("Ritz estimate needs at least two sample points"));
    }
    let ev = evaluate(&spec.group, dict.functions(), batch)?;
    let blocks = block_sums(&ev);
    let mut total = BlockSums::zero(dict.len());
    for b in &blocks {
        total.add(b);
    }
    let sol = solve_ritz(&total)?;
    let boots: Vec<Option<f64>> = (0..BOOTSTRAP_RESAMPLES)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let mut s = BlockSums::zero(dict.len());
            for _ in 0..blocks.len() {
                s.add(&blocks[rng.gen_range(0..blocks.len())]);
            }
            solve_ritz(&s).ok().map(|x| x.lambda)
        })
        .collect();
    let boots: Vec<f64> = boots.into_iter().flatten().collect();
    let stderr = if boots.len() >= 2 {
        let mu = boots.iter().sum::<f64>() / boots.len() as f64;
        (boots.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (boots.len() - 1) as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(GapEstimate {
        lambda1: sol.lambda,
        method: GapMethod::Ritz,
        size_params: SizeParams {
            dictionary_size: Some(dict.len()),
            max_weighted_degree: Some(dict.max_degree()),
            kept_directions: Some(sol.kept),
            batch_size: Some(batch.len()),
            ..Default::default()
        },
        mc_stderr: Some(stderr),
        seed: Some(seed),
        convergence: vec![ConvergencePoint {
            size: dict.len() as f64,
            lambda1: sol.lambda,
        }],
    })
}

/// Ritz estimates for the leading `k` dictionary functions, for each `k` in
/// `sizes`, sharing one evaluation of the batch.
pub fn ritz_convergence(spec: &MeasureSpec, dict: &Dictionary, batch: &SampleBatch, sizes: &[usize]) -> Result<Vec<ConvergencePoint>> {
    let ev = evaluate(&spec.group, dict.functions(), batch)?;
    let total = {
        let mut t = BlockSums::zero(dict.len());
        for b in block_sums(&ev) {
            t.add(&b);
        }
        t
    };
    sizes
        .iter()
        .map(|&k| {
            let k = k.clamp(1, dict.len());
            let sub = BlockSums {
                count: total.count,
                sf: total.sf.rows(0, k).into_owned(),
                sff: total.sff.view((0, 0), (k, k)).into_owned(),
                sgg: total.sgg.view((0, 0), (k, k)).into_owned(),
            };
            Ok(ConvergencePoint {
                size: k as f64,
                lambda1: solve_ritz(&sub)?.lambda,
            })
        })
        .collect()
}

/// Box and resolution for [`grid_gap_oracle`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GridConfig {
    /// Half-widths about the origin; `None` picks them from the density.
    pub half_widths: Option<Vec<f64>>,
    pub points_per_axis: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl GridConfig {
    pub fn new(points_per_axis: usize) -> Self {
        GridConfig {
            half_widths: None,
            points_per_axis,
            tolerance: 1e-6,
            max_iterations: 3000,
        }
    }

    pub fn with_half_widths(mut self, hw: Vec<f64>) -> Self {
        self.half_widths = Some(hw);
        self
    }
}

/// Half-widths where the density has dropped to `1e−12` of its maximum:
/// `a R^p = ln 10¹²` and `hw_i = R^{σ_i} · sup_{N=1} |x_i|`.
pub fn auto_half_widths(spec: &MeasureSpec, seed: u64) -> Vec<f64> {
    let r = (1e12f64.ln() / spec.a).powf(1.0 / spec.p);
    let sup = sphere_coordinate_sup(spec, seed);
    spec.group
        .weights()
        .iter()
        .zip(&sup)
        .map(|(&s, m)| r.powi(s as i32) * m)
        .collect()
}

/// `sup_{N=1} |x_i|` per coordinate, by sampling with a small safety margin.
fn sphere_coordinate_sup(spec: &MeasureSpec, seed: u64) -> Vec<f64> {
    let n = spec.dim();
    if n == 1 {
        let v = spec.norm.value(&[1.0]);
        return vec![1.0 / v];
    }
    let mut rng = stream_rng(seed, 0x5ee);
    let mut sup = vec![0.0f64; n];
    for _ in 0..20_000 {
        let x = crate::diffops::sample_sphere_point(&spec.group, &spec.norm, &mut rng);
        for (s, v) in sup.iter_mut().zip(&x) {
            *s = s.max(v.abs());
        }
    }
    // coordinate extremes along the axes themselves
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let v = spec.norm.value(&e);
        if v > 0.0 {
            let y = spec.group.dilate_unchecked(1.0 / v, &e);
            sup[i] = sup[i].max(y[i].abs());
        }
    }
    sup.iter().map(|s| s * 1.02).collect()
}

/// Boundary weights above this fraction of the maximum are refused.
pub const BOUNDARY_LIMIT: f64 = 1e-6;

/// Solves the grid problem on a cascade of grids, coarse to fine, each
/// started from the interpolated eigenvector of the previous one.
fn solve_cascade(
    group: &CarnotGroup,
    lower: &[f64],
    upper: &[f64],
    points: usize,
    log_weight: &(dyn Fn(&[f64]) -> f64 + Sync),
    tol: f64,
    max_iter: usize,
    check_boundary: bool,
) -> Result<(f64, SizeParams, Vec<ConvergencePoint>)> {
    let mut levels = vec![points];
    while levels.last().map_or(false, |&p| (p - 1) % 2 == 0 && (p - 1) / 2 + 1 >= 17) {
        let p = *levels.last().unwrap();
        levels.push((p - 1) / 2 + 1);
    }
    levels.reverse();
    let mut prev: Option<(usize, Vec<f64>)> = None;
    let mut curve = Vec::new();
    let mut last = None;
    for (li, &pts) in levels.iter().enumerate() {
        let finest = li + 1 == levels.len();
        let prob = GridProblem::new(group, lower, upper, pts, log_weight)?;
        if finest && check_boundary && prob.boundary_ratio() > BOUNDARY_LIMIT {
            let suggested = lower
                .iter()
                .zip(upper)
                .zip(group.weights())
                .map(|((l, u), &s)| 0.5 * (u - l) * 1.5f64.powi(s as i32))
                .collect();
            return Err(CarnotError::BoxTooSmall {
                boundary_ratio: prob.boundary_ratio(),
                suggested,
            });
        }
        let d: Vec<f64> = prob.mass().iter().map(|m| m.sqrt()).collect();
        let kd = prob.stiffness_diagonal();
        let precond: Vec<f64> = kd
            .iter()
            .zip(prob.mass())
            .map(|(k, m)| if *k > 0.0 { m / k } else { 1.0 })
            .collect();
        let dn = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u0: Vec<f64> = d.iter().map(|v| v / dn).collect();
        let nodal = match &prev {
            None => (0..prob.node_count())
                .map(|i| {
                    let x = prob.node_coordinates(i);
                    // a smooth start: first coordinate plus a little of the rest
                    x.iter().enumerate().map(|(k, v)| v / (1.0 + k as f64 * 7.0)).sum::<f64>()
                })
                .collect::<Vec<f64>>(),
            Some((cp, cv)) => prob.prolong_from(*cp, cv),
        };
        let x0: Vec<f64> = nodal.iter().zip(&d).map(|(f, di)| f * di).collect();
        let mut tmp = vec![0.0; prob.node_count()];
        let mut apply = |y: &[f64], out: &mut [f64]| {
            for i in 0..y.len() {
                tmp[i] = y[i] / d[i];
            }
            prob.apply_stiffness(&tmp, out);
            for i in 0..out.len() {
                out[i] /= d[i];
            }
        };
        let level_tol = if finest { tol } else { tol.max(1e-4) };
        let res = lobpcg::smallest_eigenpair(&mut apply, &precond, &[u0], x0, level_tol, max_iter);
        if !(res.value.is_finite() && res.value > 0.0) {
            return Err(CarnotError::NonFinite {
                value: res.value,
                point: Vec::new(),
            });
        }
        if !res.converged {
            log::warn!(
                "grid level {pts}: eigen-solver stopped after {} iterations, residual {:.3e}",
                res.iterations,
                res.residual
            );
        }
        curve.push(ConvergencePoint {
            size: prob.spacing().iter().cloned().fold(0.0, f64::max),
            lambda1: res.value,
        });
        let f: Vec<f64> = res.vector.iter().zip(&d).map(|(y, di)| y / di).collect();
        last = Some((
            res.value,
            SizeParams {
                points_per_axis: Some(pts),
                lower: Some(lower.to_vec()),
                upper: Some(upper.to_vec()),
                boundary_ratio: Some(prob.boundary_ratio()),
                iterations: Some(res.iterations),
                residual: Some(res.residual),
                converged: Some(res.converged),
                ..Default::default()
            },
        ));
        prev = Some((pts, f));
    }
    let (lambda, size) = last.expect("at least one level");
    Ok((lambda, size, curve))
}

/// Finite-element gap of the Dirichlet form with weight `exp(−aN^p − W)` on
/// a box (dimension ≤ 3, odd points per axis).
pub fn grid_gap_oracle(spec: &MeasureSpec, cfg: &GridConfig) -> Result<GapEstimate> {
    let n = spec.dim();
    if n > 3 {
        return Err(CarnotError::invalid(format!("grid oracle supports dimension ≤ 3, got {n}")));
    }
    if cfg.points_per_axis < 3 || cfg.points_per_axis % 2 == 0 {
        return Err(CarnotError::invalid(format!(
            "points per axis must be odd and at least 3, got {}",
            cfg.points_per_axis
        )));
    }
    let hw = match &cfg.half_widths {
        Some(h) if h.len() == n && h.iter().all(|v| *v > 0.0) => h.clone(),
        Some(_) => return Err(CarnotError::invalid("grid half-widths must be positive, one per coordinate")),
        None => auto_half_widths(spec, 0),
    };
    let lower: Vec<f64> = hw.iter().map(|v| -v).collect();
    let log_weight = |x: &[f64]| spec.log_density(x);
    let (lambda, size, curve) = solve_cascade(
        &spec.group,
        &lower,
        &hw,
        cfg.points_per_axis,
        &log_weight,
        cfg.tolerance,
        cfg.max_iterations,
        true,
    )?;
    Ok(GapEstimate {
        lambda1: lambda,
        method: GapMethod::Grid,
        size_params: size,
        mc_stderr: None,
        seed: None,
        convergence: curve,
    })
}

/// Self-test mode: uniform weight on `[lower, upper]` (Neumann problem).
pub fn uniform_gap_oracle(group: &CarnotGroup, lower: &[f64], upper: &[f64], points: usize) -> Result<GapEstimate> {
    if points < 3 || points % 2 == 0 {
        return Err(CarnotError::invalid("points per axis must be odd and at least 3"));
    }
    let (lambda, size, curve) = solve_cascade(group, lower, upper, points, &|_| 0.0, 1e-8, 5000, false)?;
    Ok(GapEstimate {
        lambda1: lambda,
        method: GapMethod::Grid,
        size_params: size,
        mc_stderr: None,
        seed: None,
        convergence: curve,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PoincareRatio {
    /// `max_f μ(|f − f̄|^q)/μ(|∇_G f|^q)`, a lower bound on the best constant.
    pub ratio: f64,
    /// Dictionary label, or `combination #k` for a random combination.
    pub argmax: String,
    pub argmax_coefficients: Vec<f64>,
    pub q: f64,
    pub functions_tried: usize,
    pub skipped: usize,
    pub theorem_mode: bool,
    pub seed: u64,
}

/// Empirical q-Poincaré ratio over the dictionary and `10 × len` random
/// combinations of it. In theorem mode `q` must be conjugate to `p`.
pub fn empirical_poincare_ratio(
    spec: &MeasureSpec,
    q: f64,
    dict: &Dictionary,
    batch: &SampleBatch,
    seed: u64,
    theorem_mode: bool,
) -> Result<PoincareRatio> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(CarnotError::invalid(format!("q must exceed 1, got {q}")));
    }
    if theorem_mode && ((1.0 / q + 1.0 / spec.p) - 1.0).abs() > 1e-12 {
        return Err(CarnotError::invalid(format!(
            "theorem mode needs 1/q + 1/p = 1, got q = {q}, p = {}",
            spec.p
        )));
    }
    if batch.is_empty() {
        return Err(CarnotError::invalid("Poincaré ratio needs sample points"));
    }
    let ev = evaluate(&spec.group, dict.functions(), batch)?;
    let d = dict.len();
    let combos = 10 * d;
    let mut rng = stream_rng(seed, 0);
    let mut coeffs = DMatrix::zeros(d, d + combos);
    for j in 0..d {
        coeffs[(j, j)] = 1.0;
    }
    for c in 0..combos {
        for j in 0..d {
            coeffs[(j, d + c)] = rng.sample(StandardNormal);
        }
    }
    let fv = &ev.f * &coeffs;
    let gv: Vec<DMatrix<f64>> = ev.g.iter().map(|g| g * &coeffs).collect();
    let m = batch.len() as f64;
    let mut best = PoincareRatio {
        ratio: 0.0,
        argmax: String::new(),
        argmax_coefficients: Vec::new(),
        q,
        functions_tried: d + combos,
        skipped: 0,
        theorem_mode,
        seed,
    };
    for c in 0..d + combos {
        let col = fv.column(c);
        let mean = col.sum() / m;
        let num = col.iter().map(|v| (v - mean).abs().powf(q)).sum::<f64>() / m;
        let den = (0..batch.len())
            .map(|i| {
                let s: f64 = gv.iter().map(|g| g[(i, c)] * g[(i, c)]).sum();
                s.sqrt().powf(q)
            })
            .sum::<f64>()
            / m;
        if !(den > 0.0) {
            log::warn!("skipping a function with zero gradient mass");
            best.skipped += 1;
            continue;
        }
        let r = num / den;
        if r > best.ratio {
            best.ratio = r;
            best.argmax = if c < d {
                dict.labels()[c].clone()
            } else {
                format!("combination #{}", c - d + 1)
            };
            best.argmax_coefficients = coeffs.column(c).iter().cloned().collect();
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_entry;
    use crate::measure::mcmc_sample;

    fn gaussian(a: f64) -> MeasureSpec {
        let e = get_entry("euclidean-1d").unwrap();
        MeasureSpec::new(e.group.clone(), e.norm("powersum-default").unwrap(), a, 2.0).unwrap()
    }

    #[test]
    fn single_function_ritz_is_rayleigh_quotient() {
        // dict {x}: λ = μ(1)/Var(x) exactly on the batch
        let s = gaussian(0.5);
        let b = mcmc_sample(&s, 20_000, 2, 1).unwrap();
        let d = Dictionary::weighted_monomials(&s.group, 1).unwrap();
        let est = ritz_gap_estimate(&s, &d, &b, 1).unwrap();
        let m = b.len() as f64;
        let mean = b.points.iter().sum::<f64>() / m;
        let var = b.points.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
        assert!((est.lambda1 - 1.0 / var).abs() < 1e-9);
    }

    #[test]
    fn gaussian_grid_gap() {
        let s = gaussian(0.5);
        let est = grid_gap_oracle(&s, &GridConfig::new(2001).with_half_widths(vec![8.0])).unwrap();
        assert!((est.lambda1 - 1.0).abs() < 0.005, "{est:?}");
    }

    #[test]
    fn neumann_interval() {
        let e = get_entry("euclidean-1d").unwrap();
        let est = uniform_gap_oracle(&e.group, &[0.0], &[1.0], 201).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((est.lambda1 - pi2).abs() < 0.01 * pi2, "{est:?}");
    }

    #[test]
    fn small_box_refused() {
        let s = gaussian(0.5);
        let r = grid_gap_oracle(&s, &GridConfig::new(101).with_half_widths(vec![2.0]));
        assert!(matches!(r, Err(CarnotError::BoxTooSmall { .. })));
    }

    #[test]
    fn ratio_is_scale_invariant() {
        let s = gaussian(0.5);
        let b = mcmc_sample(&s, 5_000, 1, 3).unwrap();
        let x = SparsePoly::var(1, 0);
        let d1 = Dictionary::from_polys(vec![x.clone()]).unwrap();
        let d2 = Dictionary::from_polys(vec![x.scale(&rational_from_f64(7.5).unwrap())]).unwrap();
        let r1 = empirical_poincare_ratio(&s, 2.0, &d1, &b, 1, false).unwrap();
        let r2 = empirical_poincare_ratio(&s, 2.0, &d2, &b, 1, false).unwrap();
        assert!((r1.ratio - r2.ratio).abs() < 1e-12 * r1.ratio);
        assert!(empirical_poincare_ratio(&s, 3.0, &d1, &b, 1, true).is_err());
    }
}
