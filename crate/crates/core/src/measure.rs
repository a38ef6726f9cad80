//! The measures `μ_p ∝ exp(−a N^p)` and `μ_W ∝ exp(−W) dμ_p`, and a sampler.

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::diffops::{euclidean_length, horizontal_gradient};
use crate::error::{CarnotError, Result};
use crate::field::{ScalarField, SharedField};
use crate::group::CarnotGroup;
use crate::quasinorm::QuasiNorm;
use crate::rng::{stream_rng, Rng};

#[derive(Clone)]
pub struct MeasureSpec {
    pub group: CarnotGroup,
    pub norm: QuasiNorm,
    pub a: f64,
    pub p: f64,
    pub perturbation: Option<SharedField>,
}

impl std::fmt::Debug for MeasureSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeasureSpec")
            .field("group", &self.group.name())
            .field("norm", self.norm.spec())
            .field("a", &self.a)
            .field("p", &self.p)
            .field("perturbed", &self.perturbation.is_some())
            .finish()
    }
}

impl MeasureSpec {
    pub fn new(group: CarnotGroup, norm: QuasiNorm, a: f64, p: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(CarnotError::invalid(format!("a must be positive, got {a}")));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(CarnotError::invalid(format!("p must be at least 1, got {p}")));
        }
        if norm.dim() != group.dim() {
            return Err(CarnotError::invalid("norm and group dimensions differ"));
        }
        Ok(MeasureSpec {
            group,
            norm,
            a,
            p,
            perturbation: None,
        })
    }

    pub fn with_perturbation(mut self, w: SharedField) -> Result<Self> {
        if w.dim() != self.group.dim() {
            return Err(CarnotError::invalid("perturbation dimension differs from the group"));
        }
        self.perturbation = Some(w);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    /// Whether `p ≥ 2γ`, the range in which the Poincaré theorem applies.
    pub fn covers_theorem(&self, gamma: u32) -> bool {
        self.p >= 2.0 * gamma as f64
    }

    /// `−a N(x)^p − W(x)`.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let nv = self.norm.value(x);
        let base = if nv == 0.0 { 0.0 } else { -self.a * nv.powf(self.p) };
        match &self.perturbation {
            Some(w) => base - w.value(x),
            None => base,
        }
    }

    /// The radius `R` with `a R^p = 1`.
    pub fn natural_radius(&self) -> f64 {
        self.a.powf(-1.0 / self.p)
    }
}

/// Points stored row-major, `dim` coordinates each.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleBatch {
    pub dim: usize,
    #[serde(skip)]
    pub points: Vec<f64>,
    pub seed: u64,
    pub chain_count: usize,
    pub burn_in: usize,
    pub acceptance_rate: f64,
    pub ess_estimate: Vec<f64>,
    pub proposal_scales: Vec<f64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.points.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    pub fn min_ess(&self) -> f64 {
        self.ess_estimate.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Metropolis rule on log scale: accept iff `ln u < log π(y) − log π(x)`.
pub fn metropolis_accept(log_ratio: f64, u: f64) -> bool {
    log_ratio >= 0.0 || u.ln() < log_ratio
}

const ADAPT_WINDOW: usize = 50;

struct Chain {
    points: Vec<f64>,
    accepted: usize,
    proposed: usize,
    burn_in: usize,
    scales: Vec<f64>,
}

fn run_chain(spec: &MeasureSpec, kept: usize, rng: &mut Rng, init_scales: &[f64]) -> Result<Chain> {
    let n = spec.dim();
    let burn_in = (kept as f64 * 0.2).ceil() as usize;
    let mut scales = init_scales.to_vec();
    let mut x: Vec<f64> = scales.iter().map(|s| 0.1 * s * rng.gen_range(-1.0..1.0)).collect();
    let mut lx = spec.log_density(&x);
    if !lx.is_finite() {
        return Err(CarnotError::NonFinite { value: lx, point: x });
    }
    let mut window_acc = vec![0usize; n];
    let mut points = Vec::with_capacity(kept * n);
    let (mut accepted, mut proposed) = (0, 0);
    for sweep in 0..burn_in + kept {
        for i in 0..n {
            let old = x[i];
            x[i] = old + scales[i] * rng.sample::<f64, _>(rand_distr::StandardNormal);
            let ly = spec.log_density(&x);
            if ly.is_nan() || ly == f64::INFINITY {
                return Err(CarnotError::NonFinite { value: ly, point: x });
            }
            let u: f64 = rng.gen();
            let ok = metropolis_accept(ly - lx, u);
            if ok {
                lx = ly;
            } else {
                x[i] = old;
            }
            if sweep < burn_in {
                window_acc[i] += ok as usize;
            } else {
                accepted += ok as usize;
                proposed += 1;
            }
        }
        if sweep < burn_in && (sweep + 1) % ADAPT_WINDOW == 0 {
            for i in 0..n {
                let rate = window_acc[i] as f64 / ADAPT_WINDOW as f64;
                if !(0.25..=0.40).contains(&rate) {
                    scales[i] *= (2.0 * (rate - 0.325)).exp();
                }
                window_acc[i] = 0;
            }
        }
        if sweep >= burn_in {
            points.extend_from_slice(&x);
        }
    }
    Ok(Chain {
        points,
        accepted,
        proposed,
        burn_in,
        scales,
    })
}

/// Initial proposal scale per coordinate: `R^{σ_i}` with `a R^p = 1`.
pub fn initial_scales(spec: &MeasureSpec) -> Vec<f64> {
    let r = spec.natural_radius();
    spec.group.weights().iter().map(|&s| r.powi(s as i32)).collect()
}

/// Component-wise random-walk Metropolis; `count` points split over chains.
///
/// Each chain runs a burn-in of 20% of its length, adapting the proposal
/// scales in windows of 50 sweeps, then records one point per sweep.
pub fn mcmc_sample(spec: &MeasureSpec, count: usize, chain_count: usize, seed: u64) -> Result<SampleBatch> {
    if count == 0 || chain_count == 0 {
        return Err(CarnotError::invalid("count and chain count must be positive"));
    }
    let chain_count = chain_count.min(count);
    let n = spec.dim();
    let init = initial_scales(spec);
    let chains: Vec<Result<Chain>> = (0..chain_count)
        .into_par_iter()
        .map(|c| {
            let kept = count / chain_count + usize::from(c < count % chain_count);
            let mut rng = stream_rng(seed, c as u64);
            run_chain(spec, kept, &mut rng, &init)
        })
        .collect();
    let mut points = Vec::with_capacity(count * n);
    let (mut acc, mut prop) = (0usize, 0usize);
    let mut ess = vec![0.0; n];
    let mut scales = vec![0.0; n];
    let mut burn_in = 0;
    for chain in chains {
        let chain = chain?;
        for (i, e) in ess.iter_mut().enumerate() {
            let series: Vec<f64> = chain.points.iter().skip(i).step_by(n).cloned().collect();
            *e += effective_sample_size(&series);
        }
        for (s, cs) in scales.iter_mut().zip(&chain.scales) {
            *s += cs / chain_count as f64;
        }
        acc += chain.accepted;
        prop += chain.proposed;
        burn_in = burn_in.max(chain.burn_in);
        points.extend_from_slice(&chain.points);
    }
    let acceptance_rate = if prop == 0 { 0.0 } else { acc as f64 / prop as f64 };
    Ok(SampleBatch {
        dim: n,
        points,
        seed,
        chain_count,
        burn_in,
        acceptance_rate,
        ess_estimate: ess,
        proposal_scales: scales,
    })
}

/// Geyer's initial positive sequence estimator, capped at the series length.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return n as f64;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let var = c.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if var == 0.0 {
        return n as f64;
    }
    let rho = |k: usize| -> f64 {
        c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / (n as f64 * var)
    };
    let mut tau = -1.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while k + 1 < n {
        let mut pair = rho(k) + rho(k + 1);
        if pair <= 0.0 {
            break;
        }
        // monotone sequence
        pair = pair.min(prev);
        tau += 2.0 * pair;
        prev = pair;
        k += 2;
    }
    (n as f64 / tau.max(1e-12)).min(n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NormalizationEstimate {
    pub z: f64,
    pub relative_error: f64,
    pub draws: usize,
}

/// Importance-sampling estimate of `Z = ∫ exp(log_density)` with a product
/// Cauchy proposal centred at the batch mean, scaled by the batch spread.
pub fn estimate_normalization(spec: &MeasureSpec, batch: &SampleBatch, draws: usize, seed: u64) -> Result<NormalizationEstimate> {
    let n = spec.dim();
    if batch.is_empty() || draws == 0 {
        return Err(CarnotError::invalid("normalization estimate needs a batch and draws"));
    }
    let m = batch.len() as f64;
    let mut mean = vec![0.0; n];
    for x in batch.iter() {
        for (mu, v) in mean.iter_mut().zip(x) {
            *mu += v / m;
        }
    }
    let mut scale = vec![0.0; n];
    for x in batch.iter() {
        for i in 0..n {
            scale[i] += (x[i] - mean[i]).powi(2) / m;
        }
    }
    for s in scale.iter_mut() {
        *s = s.sqrt().max(1e-12);
    }
    let mut rng = stream_rng(seed, u64::MAX);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut y = vec![0.0; n];
    for _ in 0..draws {
        let mut log_q = 0.0;
        for i in 0..n {
            let u: f64 = rng.gen_range(1e-12..1.0 - 1e-12);
            let z = (std::f64::consts::PI * (u - 0.5)).tan();
            y[i] = mean[i] + scale[i] * z;
            log_q -= (std::f64::consts::PI * scale[i] * (1.0 + z * z)).ln();
        }
        let w = (spec.log_density(&y) - log_q).exp();
        sum += w;
        sum_sq += w * w;
    }
    let d = draws as f64;
    let z = sum / d;
    let var = (sum_sq / d - z * z).max(0.0);
    Ok(NormalizationEstimate {
        z,
        relative_error: (var / d).sqrt() / z,
        draws,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PerturbationReport {
    pub holds: bool,
    /// `min (δ N^{p−2γ}|x_{j0}|^{2γ} + γ_δ − |∇_G W|^q)` over the points.
    pub worst_margin: f64,
    pub worst_point: Vec<f64>,
    /// `sup W/N` over the points, the growth constant `C̃`.
    pub growth_constant: f64,
    pub q: f64,
    pub points_checked: usize,
}

/// Checks the perturbation hypothesis pointwise. `points` is row-major with
/// the group's dimension; `j0` is 0-based.
pub fn check_perturbation(
    spec: &MeasureSpec,
    gamma: u32,
    j0: usize,
    delta: f64,
    gamma_delta: f64,
    points: &[f64],
) -> Result<PerturbationReport> {
    let n = spec.dim();
    if j0 >= spec.group.n1() {
        return Err(CarnotError::invalid(format!("generator index {} out of range", j0 + 1)));
    }
    if spec.p <= 1.0 {
        return Err(CarnotError::invalid("conjugate exponent needs p > 1"));
    }
    let q = spec.p / (spec.p - 1.0);
    let mut report = PerturbationReport {
        holds: true,
        worst_margin: f64::INFINITY,
        worst_point: Vec::new(),
        growth_constant: 0.0,
        q,
        points_checked: 0,
    };
    let Some(w) = &spec.perturbation else {
        report.worst_margin = 0.0;
        report.points_checked = points.len() / n;
        return Ok(report);
    };
    for x in points.chunks_exact(n) {
        let nv = spec.norm.value(x);
        if nv == 0.0 {
            continue;
        }
        let gw = euclidean_length(&horizontal_gradient(&spec.group, w.as_ref(), x)?);
        let rhs = delta * nv.powf(spec.p - 2.0 * gamma as f64) * x[j0].abs().powi(2 * gamma as i32)
            + gamma_delta;
        let margin = rhs - gw.powf(q);
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_point = x.to_vec();
        }
        report.growth_constant = report.growth_constant.max(w.value(x) / nv);
        report.points_checked += 1;
    }
    if report.points_checked == 0 {
        report.worst_margin = 0.0;
    }
    report.holds = report.worst_margin >= 0.0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_entry;
    use crate::field::PowerOfField;
    use std::sync::Arc;

    fn spec(name: &str, preset: &str, a: f64, p: f64) -> MeasureSpec {
        let e = get_entry(name).unwrap();
        MeasureSpec::new(e.group.clone(), e.norm(preset).unwrap(), a, p).unwrap()
    }

    #[test]
    fn log_density_examples() {
        let s = spec("euclidean-1d", "powersum-default", 0.5, 2.0);
        assert_eq!(s.log_density(&[1.0]), -0.5);
        assert_eq!(s.log_density(&[0.0]), 0.0);
        let h = spec("heisenberg-h1", "kaplan-sixteenth", 1.0, 8.0);
        assert_eq!(h.log_density(&[1.0, 0.0, 0.0]), -1.0);
        assert!(MeasureSpec::new(h.group.clone(), h.norm.clone(), 0.0, 2.0).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let s = spec("euclidean-1d", "powersum-default", 0.5, 2.0);
        let b = mcmc_sample(&s, 100_000, 4, 11).unwrap();
        let n = b.len() as f64;
        let mean = b.points.iter().sum::<f64>() / n;
        let var = b.points.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 4.0 / b.min_ess().sqrt(), "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
        assert!(b.acceptance_rate > 0.2 && b.acceptance_rate < 0.5);
    }

    #[test]
    fn deterministic_given_seed() {
        let s = spec("heisenberg-h1", "kaplan", 1.0, 8.0);
        let a = mcmc_sample(&s, 2000, 3, 5).unwrap();
        let b = mcmc_sample(&s, 2000, 3, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2000);
    }

    #[test]
    fn two_point_detailed_balance() {
        // target π = (0.3, 0.7) on {0, 1}, flip proposals
        let logp = [0.3f64.ln(), 0.7f64.ln()];
        let mut rng = stream_rng(17, 0);
        let mut state = 0usize;
        let steps = 200_000;
        let mut ones = 0usize;
        for _ in 0..steps {
            let prop = 1 - state;
            if metropolis_accept(logp[prop] - logp[state], rng.gen()) {
                state = prop;
            }
            ones += state;
        }
        let freq = ones as f64 / steps as f64;
        // the flip chain is negatively correlated, so the iid standard error is conservative
        let se = (0.7 * 0.3 / steps as f64).sqrt();
        assert!((freq - 0.7).abs() < 3.0 * se, "{freq}");
    }

    #[test]
    fn ess_of_independent_draws() {
        let mut rng = stream_rng(3, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let r = effective_sample_size(&xs) / xs.len() as f64;
        assert!((0.8..=1.0).contains(&r), "{r}");
    }

    #[test]
    fn scaling_a_shrinks_spread() {
        let sd = |a: f64| {
            let s = spec("euclidean-1d", "powersum-default", a, 2.0);
            let b = mcmc_sample(&s, 100_000, 4, 2).unwrap();
            let n = b.len() as f64;
            let m = b.points.iter().sum::<f64>() / n;
            (b.points.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt()
        };
        let r = sd(0.5) / sd(2.0);
        assert!((r - 2.0).abs() < 0.1, "{r}");
    }

    #[test]
    fn gaussian_normalization() {
        let s = spec("euclidean-1d", "powersum-default", 0.5, 2.0);
        let b = mcmc_sample(&s, 20_000, 2, 1).unwrap();
        let z = estimate_normalization(&s, &b, 100_000, 9).unwrap();
        let exact = (2.0 * std::f64::consts::PI).sqrt();
        assert!((z.z - exact).abs() < 4.0 * z.relative_error * exact + 1e-3, "{z:?}");
    }

    #[test]
    fn perturbation_examples() {
        let s = spec("heisenberg-h1", "kaplan", 1.0, 8.0);
        let b = mcmc_sample(&s, 5000, 2, 4).unwrap();
        let none = check_perturbation(&s, 4, 0, 0.0, 0.0, &b.points).unwrap();
        assert!(none.holds && none.worst_margin == 0.0);
        // W = 2N: |∇_G W| = 2‖x‖/N ≤ 2, so γ_δ = 2^q suffices with δ = 0
        let base: SharedField = Arc::new(s.norm.clone());
        let w = Arc::new(PowerOfField::new(base.clone(), 2.0, 1.0).unwrap());
        let sw = s.clone().with_perturbation(w).unwrap();
        let q = 8.0 / 7.0;
        let r = check_perturbation(&sw, 4, 0, 0.0, 2f64.powf(q), &b.points).unwrap();
        assert!(r.holds, "{r:?}");
        assert!((r.growth_constant - 2.0).abs() < 1e-12);
        // W = N²: along x1 = 0 the weight vanishes and |∇W|^q = (2‖x‖)^q grows
        let w2 = Arc::new(PowerOfField::new(base, 1.0, 2.0).unwrap());
        let sw2 = s.clone().with_perturbation(w2).unwrap();
        let mut pts = b.points.clone();
        pts.extend_from_slice(&[0.0, 50.0, 0.0]);
        let r2 = check_perturbation(&sw2, 4, 0, 0.5, 1.0, &pts).unwrap();
        assert!(!r2.holds);
        assert_eq!(r2.worst_point, vec![0.0, 50.0, 0.0]);
    }
}
