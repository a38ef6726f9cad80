//! Homogeneous quasi-norms smooth away from the origin.
//!
//! Every polynomial family is evaluated as `N = P^{1/k}` with `P` a
//! homogeneous polynomial of degree `k`, so first and second partials come
//! from exact polynomial derivatives:
//!
//! ```text
//! ∂_i N    = N ∂_i P / (k P)
//! ∂_i∂_j N = N ∂_i∂_j P / (k P) + (1/k)(1/k − 1) N ∂_i P ∂_j P / P²
//! ```
//!
//! The anisotropic Heisenberg norm has nested radicals and is differentiated
//! with hyper-dual numbers.

use serde::{Deserialize, Serialize};

use crate::error::{CarnotError, Result};
use crate::field::ScalarField;
use crate::group::CarnotGroup;
use crate::hyperdual::HyperDual;
use crate::poly::{rational_from_f64, CompiledPoly, Rational, SparsePoly};

/// One coordinate block of a [`QuasiNormSpec::Composite`] norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBlock {
    /// 1-based coordinate labels.
    pub coords: Vec<usize>,
    pub a: Vec<f64>,
    pub beta: Vec<u32>,
    pub gamma: u32,
}

/// The quasi-norm families.
///
/// * `PowerSum`: `N = (Σ a_j x_j^{2β_j})^{1/γ}` with `2σ_jβ_j = γ ≥ 2σ_n`.
/// * `Composite`: `N = (Σ_b N_b^α)^{1/α}` where `N_b` is a power-sum norm on
///   block `b` with exponent `γ_b`, and `γ_b` divides `α` so that
///   `N_b^α = S_b^{α/γ_b}` is a polynomial.
/// * `Step2Alpha`: `N_α = (‖x‖^{4α} + Σ c_k t_k^{2α})^{1/(4α)}` on step-2 groups.
/// * `AnisoHeisenberg`: the fundamental-solution norm on the anisotropic
///   Heisenberg group of dimension `2n+1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params")]
pub enum QuasiNormSpec {
    PowerSum {
        a: Vec<f64>,
        beta: Vec<u32>,
        gamma: u32,
    },
    Composite {
        blocks: Vec<NormBlock>,
        alpha: u32,
    },
    Step2Alpha {
        alpha: u32,
        c: Vec<f64>,
    },
    AnisoHeisenberg {
        n: usize,
    },
}

impl QuasiNormSpec {
    pub fn variant_name(&self) -> &'static str {
        match self {
            QuasiNormSpec::PowerSum { .. } => "PowerSum",
            QuasiNormSpec::Composite { .. } => "Composite",
            QuasiNormSpec::Step2Alpha { .. } => "Step2Alpha",
            QuasiNormSpec::AnisoHeisenberg { .. } => "AnisoHeisenberg",
        }
    }

    /// The exponent γ carried by the norm itself, where it has one.
    pub fn own_gamma(&self) -> Option<u32> {
        match self {
            QuasiNormSpec::PowerSum { gamma, .. } => Some(*gamma),
            QuasiNormSpec::Composite { alpha, .. } => Some(*alpha),
            QuasiNormSpec::Step2Alpha { alpha, .. } => Some(4 * alpha),
            QuasiNormSpec::AnisoHeisenberg { .. } => None,
        }
    }
}

pub const PRESET_NAMES: &[&str] = &[
    "powersum-default",
    "composite-strata",
    "kaplan",
    "kaplan-sixteenth",
    "step2-alpha1",
    "step2-alpha2",
    "aniso-heisenberg",
];

fn factorial(k: u32) -> u32 {
    (1..=k).product()
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Resolves a named preset against a group.
///
/// `kaplan` uses `c = 16`, the constant for which `|∇_G N| = ‖x‖/N` holds
/// with the `½ B` normalization of the step-2 fields; `kaplan-sixteenth`
/// keeps `c = 1/16`.
pub fn preset(name: &str, group: &CarnotGroup) -> Result<QuasiNormSpec> {
    let w = group.weights();
    let n = group.dim();
    let n1 = group.n1();
    let top = *w.last().expect("nonempty");
    let step2 = |alpha: u32, c: f64| -> Result<QuasiNormSpec> {
        if group.step() != 2 {
            return Err(CarnotError::invalid(format!(
                "preset {name} needs a step-2 group, {} has step {}",
                group.name(),
                group.step()
            )));
        }
        Ok(QuasiNormSpec::Step2Alpha {
            alpha,
            c: vec![c; n - n1],
        })
    };
    match name {
        "powersum-default" => {
            let big = factorial(top);
            Ok(QuasiNormSpec::PowerSum {
                a: vec![1.0; n],
                beta: w.iter().map(|s| big / s).collect(),
                gamma: 2 * big,
            })
        }
        "composite-strata" => {
            let mut blocks = Vec::new();
            let mut start = 0;
            let mut alpha = 1;
            for (s, &d) in group.stratification().stratum_dims().iter().enumerate() {
                let gamma = 2 * (s as u32 + 1);
                blocks.push(NormBlock {
                    coords: (start + 1..=start + d).collect(),
                    a: vec![1.0; d],
                    beta: vec![1; d],
                    gamma,
                });
                alpha = alpha * gamma / gcd(alpha, gamma);
                start += d;
            }
            Ok(QuasiNormSpec::Composite { blocks, alpha })
        }
        "kaplan" => step2(1, 16.0),
        "kaplan-sixteenth" => step2(1, 1.0 / 16.0),
        "step2-alpha1" => step2(1, 1.0),
        "step2-alpha2" => step2(2, 1.0),
        "aniso-heisenberg" => {
            if group.step() != 2 || n % 2 == 0 || n1 != n - 1 {
                return Err(CarnotError::invalid(format!(
                    "aniso-heisenberg needs a (2n+1)-dimensional step-2 group, got {}",
                    group.name()
                )));
            }
            Ok(QuasiNormSpec::AnisoHeisenberg { n: n1 / 2 })
        }
        other => Err(CarnotError::invalid(format!(
            "unknown norm preset {other:?}; known presets: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Root {
        root: u32,
        exact: SparsePoly,
        poly: CompiledPoly,
        grad: Vec<CompiledPoly>,
        // upper triangle, row-major
        hess: Vec<CompiledPoly>,
    },
    Aniso {
        n: usize,
    },
}

/// A validated quasi-norm bound to a group's dimension and weights.
#[derive(Clone, Debug)]
pub struct QuasiNorm {
    spec: QuasiNormSpec,
    dim: usize,
    weights: Vec<u32>,
    kind: Kind,
}

fn check_power_sum(
    weights: &[u32],
    coords: &[usize],
    a: &[f64],
    beta: &[u32],
    gamma: u32,
    label: &str,
) -> Result<()> {
    if a.len() != coords.len() || beta.len() != coords.len() {
        return Err(CarnotError::invalid(format!(
            "{label}: expected {} coefficients a_j and exponents β_j, got {} and {}",
            coords.len(),
            a.len(),
            beta.len()
        )));
    }
    if let Some(bad) = a.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(CarnotError::invalid(format!("{label}: a_j must be positive, got {bad}")));
    }
    let mut top = 0;
    for ((&c, &b), _) in coords.iter().zip(beta).zip(a) {
        let s = weights[c];
        top = top.max(s);
        if b == 0 || 2 * s * b != gamma {
            return Err(CarnotError::invalid(format!(
                "{label}: coordinate x{} has weight {s} and β = {b}, but 2σβ must equal γ = {gamma}",
                c + 1
            )));
        }
    }
    if gamma < 2 * top {
        return Err(CarnotError::invalid(format!(
            "{label}: γ = {gamma} must be at least 2σ_max = {}",
            2 * top
        )));
    }
    Ok(())
}

fn power_sum_poly(dim: usize, coords: &[usize], a: &[f64], beta: &[u32]) -> Result<SparsePoly> {
    let mut p = SparsePoly::zero(dim);
    for ((&c, &av), &b) in coords.iter().zip(a).zip(beta) {
        let mut e = vec![0; dim];
        e[c] = 2 * b;
        p.add_term(e, rational_from_f64(av)?);
    }
    Ok(p)
}

impl QuasiNorm {
    pub fn new(spec: QuasiNormSpec, group: &CarnotGroup) -> Result<Self> {
        let dim = group.dim();
        let weights = group.weights().to_vec();
        let kind = match &spec {
            QuasiNormSpec::PowerSum { a, beta, gamma } => {
                let coords: Vec<usize> = (0..dim).collect();
                check_power_sum(&weights, &coords, a, beta, *gamma, "PowerSum")?;
                Self::root_kind(power_sum_poly(dim, &coords, a, beta)?, *gamma)
            }
            QuasiNormSpec::Composite { blocks, alpha } => {
                if blocks.is_empty() || *alpha == 0 {
                    return Err(CarnotError::invalid("Composite needs blocks and α ≥ 1"));
                }
                let mut seen = vec![false; dim];
                let mut p = SparsePoly::zero(dim);
                for (b, blk) in blocks.iter().enumerate() {
                    let label = format!("Composite block {}", b + 1);
                    let mut coords = Vec::with_capacity(blk.coords.len());
                    for &c in &blk.coords {
                        if c == 0 || c > dim {
                            return Err(CarnotError::invalid(format!(
                                "{label}: coordinate label {c} outside 1..={dim}"
                            )));
                        }
                        if std::mem::replace(&mut seen[c - 1], true) {
                            return Err(CarnotError::invalid(format!(
                                "{label}: coordinate x{c} already used by another block"
                            )));
                        }
                        coords.push(c - 1);
                    }
                    if coords.is_empty() {
                        return Err(CarnotError::invalid(format!("{label} is empty")));
                    }
                    check_power_sum(&weights, &coords, &blk.a, &blk.beta, blk.gamma, &label)?;
                    if alpha % blk.gamma != 0 {
                        return Err(CarnotError::invalid(format!(
                            "{label}: γ_b = {} must divide α = {alpha}",
                            blk.gamma
                        )));
                    }
                    let s = power_sum_poly(dim, &coords, &blk.a, &blk.beta)?;
                    p = &p + &s.pow(alpha / blk.gamma);
                }
                Self::root_kind(p, *alpha)
            }
            QuasiNormSpec::Step2Alpha { alpha, c } => {
                if group.step() != 2 {
                    return Err(CarnotError::invalid(format!(
                        "Step2Alpha needs a step-2 group, {} has step {}",
                        group.name(),
                        group.step()
                    )));
                }
                let n1 = group.n1();
                if *alpha == 0 || c.len() != dim - n1 {
                    return Err(CarnotError::invalid(format!(
                        "Step2Alpha needs α ≥ 1 and {} constants c_k, got α = {alpha}, {} constants",
                        dim - n1,
                        c.len()
                    )));
                }
                if let Some(bad) = c.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return Err(CarnotError::invalid(format!("c_k must be positive, got {bad}")));
                }
                let mut sq = SparsePoly::zero(dim);
                for i in 0..n1 {
                    let xi = SparsePoly::var(dim, i);
                    sq = &sq + &(&xi * &xi);
                }
                let mut p = sq.pow(2 * alpha);
                for (k, &ck) in c.iter().enumerate() {
                    let mut e = vec![0; dim];
                    e[n1 + k] = 2 * alpha;
                    p.add_term(e, rational_from_f64(ck)?);
                }
                Self::root_kind(p, 4 * alpha)
            }
            QuasiNormSpec::AnisoHeisenberg { n } => {
                if *n == 0 || dim != 2 * n + 1 || group.step() != 2 || group.n1() != 2 * n {
                    return Err(CarnotError::invalid(format!(
                        "AnisoHeisenberg with n = {n} needs a step-2 group of dimension {}, got {} (dimension {})",
                        2 * n + 1,
                        group.name(),
                        dim
                    )));
                }
                Kind::Aniso { n: *n }
            }
        };
        Ok(QuasiNorm {
            spec,
            dim,
            weights,
            kind,
        })
    }

    fn root_kind(p: SparsePoly, root: u32) -> Kind {
        let n = p.dim();
        let grad_exact: Vec<SparsePoly> = (0..n).map(|i| p.derivative(i)).collect();
        let mut hess = Vec::new();
        for i in 0..n {
            for j in i..n {
                hess.push(grad_exact[i].derivative(j).compile());
            }
        }
        Kind::Root {
            root,
            poly: p.compile(),
            grad: grad_exact.iter().map(SparsePoly::compile).collect(),
            hess,
            exact: p,
        }
    }

    pub fn spec(&self) -> &QuasiNormSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// The homogeneous polynomial `P` with `N = P^{1/k}`, and `k`; `None` for
    /// the radical norm.
    pub fn root_polynomial(&self) -> Option<(&SparsePoly, u32)> {
        match &self.kind {
            Kind::Root { exact, root, .. } => Some((exact, *root)),
            Kind::Aniso { .. } => None,
        }
    }

    fn origin_error(&self) -> CarnotError {
        CarnotError::domain(format!(
            "{} norm is not differentiable where it vanishes",
            self.spec.variant_name()
        ))
    }

    /// Value, gradient and (optionally) the Hessian in one pass.
    fn jet(&self, x: &[f64], want_hessian: bool) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let n = self.dim;
        match &self.kind {
            Kind::Root {
                root,
                poly,
                grad,
                hess,
                ..
            } => {
                let p = poly.eval(x);
                if p <= 0.0 {
                    return Err(self.origin_error());
                }
                let k = *root as f64;
                let nv = p.powf(1.0 / k);
                let dp: Vec<f64> = grad.iter().map(|g| g.eval(x)).collect();
                let s1 = nv / (k * p);
                let g: Vec<f64> = dp.iter().map(|d| s1 * d).collect();
                let mut h = Vec::new();
                if want_hessian {
                    h = vec![0.0; n * n];
                    let s2 = (1.0 / k) * (1.0 / k - 1.0) * nv / (p * p);
                    let mut idx = 0;
                    for i in 0..n {
                        for j in i..n {
                            let v = s1 * hess[idx].eval(x) + s2 * dp[i] * dp[j];
                            h[i * n + j] = v;
                            h[j * n + i] = v;
                            idx += 1;
                        }
                    }
                }
                Ok((nv, g, h))
            }
            Kind::Aniso { n: half } => {
                if x.iter().all(|v| *v == 0.0) {
                    return Err(self.origin_error());
                }
                let mut g = vec![0.0; n];
                let mut h = Vec::new();
                let mut nv = 0.0;
                if want_hessian {
                    h = vec![0.0; n * n];
                    for i in 0..n {
                        for j in i..n {
                            let r = aniso_eval(*half, x, Some(i), Some(j));
                            nv = r.v;
                            if i == j {
                                g[i] = r.a;
                            }
                            h[i * n + j] = r.ab;
                            h[j * n + i] = r.ab;
                        }
                    }
                } else {
                    for (i, gi) in g.iter_mut().enumerate() {
                        let r = aniso_eval(*half, x, Some(i), None);
                        nv = r.v;
                        *gi = r.a;
                    }
                }
                Ok((nv, g, h))
            }
        }
    }
}

/// `N(x)` for the anisotropic Heisenberg group, transcribed term by term:
///
/// ```text
/// A = x₁²/2 + x_{n+1}²/2 + ½ Σ_{j≠n+1} x_j²
/// B = x₁²/4 + x_{n+1}²/4 + ½ Σ_{j≠n+1} x_j²
/// N = (B²+t²)^{1/4n} (AB + t² + A√(A²+B²))^{1/2−1/4n} / (B + √(B²+t²))^{1/2}
/// ```
///
/// with `j` ranging over `1..=2n` and `t = x_{2n+1}`.
fn aniso_eval(n: usize, x: &[f64], di: Option<usize>, dj: Option<usize>) -> HyperDual {
    let var = |k: usize| {
        HyperDual::seeded(
            x[k],
            if di == Some(k) { 1.0 } else { 0.0 },
            if dj == Some(k) { 1.0 } else { 0.0 },
        )
    };
    let x1 = var(0);
    let xn1 = var(n);
    let t = var(2 * n);
    let mut tail = HyperDual::ZERO;
    for j in 0..2 * n {
        if j != n {
            tail = tail + var(j).square();
        }
    }
    let a = x1.square().scale(0.5) + xn1.square().scale(0.5) + tail.scale(0.5);
    let b = x1.square().scale(0.25) + xn1.square().scale(0.25) + tail.scale(0.5);
    let t2 = t.square();
    let bt = (b.square() + t2).sqrt_guarded(1e-300);
    // A√(A²+B²) vanishes to fourth order on {x = 0}; the guard keeps its
    // derivatives at zero there instead of 0·∞.
    let ab_root = (a.square() + b.square()).sqrt_guarded(1e-300);
    let e = 1.0 / (4.0 * n as f64);
    let first = (b.square() + t2).powf(e);
    let second = (a * b + t2 + a * ab_root).powf(0.5 - e);
    let denom = (b + bt).sqrt();
    first * second / denom
}

impl ScalarField for QuasiNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Root { root, poly, .. } => {
                let p = poly.eval(x);
                if p <= 0.0 {
                    0.0
                } else {
                    p.powf(1.0 / *root as f64)
                }
            }
            Kind::Aniso { n } => {
                if x.iter().all(|v| *v == 0.0) {
                    0.0
                } else {
                    aniso_eval(*n, x, None, None).v
                }
            }
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.jet(x, false)?.1)
    }

    fn hessian(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.jet(x, true)?.2)
    }
}

/// `N(x)` with dimension checking.
pub fn eval_norm(norm: &QuasiNorm, x: &[f64]) -> Result<f64> {
    if x.len() != norm.dim {
        return Err(CarnotError::invalid(format!(
            "point has {} coordinates, norm expects {}",
            x.len(),
            norm.dim
        )));
    }
    Ok(norm.value(x))
}

/// `δ_{1/N(x)}(x)`, a point on the unit sphere `{N = 1}`.
pub fn project_to_unit_sphere(norm: &QuasiNorm, group: &CarnotGroup, x: &[f64]) -> Result<Vec<f64>> {
    let nv = eval_norm(norm, x)?;
    if nv <= 0.0 {
        return Err(CarnotError::domain("cannot project the origin onto the unit sphere"));
    }
    Ok(group.dilate_unchecked(1.0 / nv, x))
}

/// Converts a spec's real constants to exact rationals; used by exact tests.
pub fn spec_constants_exact(spec: &QuasiNormSpec) -> Result<Vec<Rational>> {
    match spec {
        QuasiNormSpec::PowerSum { a, .. } => a.iter().map(|v| rational_from_f64(*v)).collect(),
        QuasiNormSpec::Step2Alpha { c, .. } => c.iter().map(|v| rational_from_f64(*v)).collect(),
        QuasiNormSpec::Composite { blocks, .. } => blocks
            .iter()
            .flat_map(|b| b.a.iter())
            .map(|v| rational_from_f64(*v))
            .collect(),
        QuasiNormSpec::AnisoHeisenberg { .. } => Ok(Vec::new()),
    }
}
