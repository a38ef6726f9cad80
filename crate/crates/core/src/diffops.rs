//! Sub-gradient, its length, and the sub-Laplacian.

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CarnotError, Result};
use crate::field::ScalarField;
use crate::group::CarnotGroup;
use crate::quasinorm::QuasiNorm;
use crate::rng::{chunks, stream_rng, Rng};

fn check_dims(group: &CarnotGroup, f: &dyn ScalarField, x: &[f64]) -> Result<()> {
    if f.dim() != group.dim() || x.len() != group.dim() {
        return Err(CarnotError::invalid(format!(
            "dimension mismatch: group {}, function {}, point {}",
            group.dim(),
            f.dim(),
            x.len()
        )));
    }
    Ok(())
}

/// `(X_1 f, …, X_{n₁} f)` from a precomputed Euclidean gradient.
pub fn horizontal_from_gradient(group: &CarnotGroup, grad: &[f64], x: &[f64]) -> Vec<f64> {
    group
        .horizontal()
        .iter()
        .map(|xj| {
            xj.sparse_coefficients_at(x)
                .into_iter()
                .map(|(k, c)| c * grad[k])
                .sum()
        })
        .collect()
}

/// `∇_G f(x) = (X_1 f, …, X_{n₁} f)(x)`.
pub fn horizontal_gradient(group: &CarnotGroup, f: &dyn ScalarField, x: &[f64]) -> Result<Vec<f64>> {
    check_dims(group, f, x)?;
    let g = f.gradient(x)?;
    Ok(horizontal_from_gradient(group, &g, x))
}

pub fn euclidean_length(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// `|∇_G f(x)|`.
pub fn gradient_length(group: &CarnotGroup, f: &dyn ScalarField, x: &[f64]) -> Result<f64> {
    Ok(euclidean_length(&horizontal_gradient(group, f, x)?))
}

/// `Δ_G f(x) = Σ_j X_j(X_j f)(x)`.
///
/// With `X_j = Σ_k c_k ∂_k` this is `Σ_{k,l} c_k c_l ∂_k∂_l f + Σ_{k,l} c_k (∂_k c_l) ∂_l f`.
pub fn sub_laplacian(group: &CarnotGroup, f: &dyn ScalarField, x: &[f64]) -> Result<f64> {
    check_dims(group, f, x)?;
    let g = f.gradient(x)?;
    let h = f.hessian(x)?;
    Ok(sub_laplacian_from_jet(group, &g, &h, x))
}

pub(crate) fn sub_laplacian_from_jet(group: &CarnotGroup, g: &[f64], h: &[f64], x: &[f64]) -> f64 {
    let n = group.dim();
    let mut total = 0.0;
    for xj in group.horizontal() {
        let c = xj.sparse_coefficients_at(x);
        for &(k, ck) in &c {
            for &(l, cl) in &c {
                total += ck * cl * h[k * n + l];
            }
        }
        let mut dense = vec![0.0; n];
        for &(k, ck) in &c {
            dense[k] = ck;
        }
        // (l, m, ∂_m c_l): the term c_m ∂_m c_l ∂_l f
        for (l, m, d) in xj.coefficient_partials_at(x) {
            total += dense[m] * d * g[l];
        }
    }
    total
}

/// Value of `|∇_G N| N^{γ−1} / |x_{j0}|^{γ−1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum GradientRatio {
    Finite(f64),
    /// `x_{j0} = 0` while `∇_G N ≠ 0`.
    Infinite,
    /// `x_{j0} = 0` and `∇_G N = 0`.
    Indeterminate,
}

impl GradientRatio {
    pub fn finite(self) -> Option<f64> {
        match self {
            GradientRatio::Finite(v) => Some(v),
            _ => None,
        }
    }
}

/// Gradient lengths below this count as zero for the 0/0 classification.
pub const GRADIENT_ZERO: f64 = 1e-14;

/// `j0` is 0-based here.
pub fn gradient_norm_ratio(
    group: &CarnotGroup,
    norm: &QuasiNorm,
    j0: usize,
    gamma: u32,
    x: &[f64],
) -> Result<GradientRatio> {
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
    let len = gradient_length(group, norm, x)?;
    let nv = norm.value(x);
    Ok(ratio_from_parts(len, nv, x[j0], gamma))
}

pub(crate) fn ratio_from_parts(grad_len: f64, nv: f64, xj0: f64, gamma: u32) -> GradientRatio {
    if xj0 == 0.0 {
        return if grad_len > GRADIENT_ZERO {
            GradientRatio::Infinite
        } else {
            GradientRatio::Indeterminate
        };
    }
    let e = (gamma - 1) as i32;
    GradientRatio::Finite(grad_len * (nv / xj0.abs()).powi(e))
}

/// A point of `{N = 1}`: a Gaussian draw (rejected below `‖x‖ < 1e−6`)
/// projected by `δ_{1/N(x)}`.
pub fn sample_sphere_point(group: &CarnotGroup, norm: &QuasiNorm, rng: &mut Rng) -> Vec<f64> {
    let n = group.dim();
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if euclidean_length(&x) < 1e-6 {
            continue;
        }
        let nv = norm.value(&x);
        if nv > 0.0 && nv.is_finite() {
            return group.dilate_unchecked(1.0 / nv, &x);
        }
    }
}

/// Empirical suprema of `|∇_G N|` and `|Δ_G N|` on `{N = 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SphereSuprema {
    pub gradient_sup: f64,
    pub gradient_argmax: Vec<f64>,
    pub laplacian_sup: f64,
    pub laplacian_argmax: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

const CHUNK: usize = 4096;

pub fn sphere_suprema(group: &CarnotGroup, norm: &QuasiNorm, samples: usize, seed: u64) -> Result<SphereSuprema> {
    let parts: Vec<Result<(f64, Vec<f64>, f64, Vec<f64>)>> = chunks(samples, CHUNK)
        .into_par_iter()
        .enumerate()
        .map(|(ci, (_, len))| {
            let mut rng = stream_rng(seed, ci as u64);
            let mut best = (f64::NEG_INFINITY, Vec::new(), f64::NEG_INFINITY, Vec::new());
            for _ in 0..len {
                let x = sample_sphere_point(group, norm, &mut rng);
                let g = norm.gradient(&x)?;
                let h = norm.hessian(&x)?;
                let gl = euclidean_length(&horizontal_from_gradient(group, &g, &x));
                let lap = sub_laplacian_from_jet(group, &g, &h, &x).abs();
                if !(gl.is_finite() && lap.is_finite()) {
                    return Err(CarnotError::NonFinite {
                        value: if gl.is_finite() { lap } else { gl },
                        point: x,
                    });
                }
                if gl > best.0 {
                    best.0 = gl;
                    best.1 = x.clone();
                }
                if lap > best.2 {
                    best.2 = lap;
                    best.3 = x;
                }
            }
            Ok(best)
        })
        .collect();
    let mut out = SphereSuprema {
        gradient_sup: 0.0,
        gradient_argmax: Vec::new(),
        laplacian_sup: 0.0,
        laplacian_argmax: Vec::new(),
        samples,
        seed,
    };
    for part in parts {
        let (g, gx, l, lx) = part?;
        if g > out.gradient_sup {
            out.gradient_sup = g;
            out.gradient_argmax = gx;
        }
        if l > out.laplacian_sup {
            out.laplacian_sup = l;
            out.laplacian_argmax = lx;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PolyField;
    use crate::group::VectorField;
    use crate::poly::{parse_rational, SparsePoly};
    use crate::quasinorm::{preset, QuasiNormSpec};

    fn h1() -> CarnotGroup {
        let q = |s: &str| parse_rational(s).unwrap();
        CarnotGroup::step2("h1", 2, vec![vec![vec![q("0"), q("1")], vec![q("-1"), q("0")]]]).unwrap()
    }

    fn euclid(n: usize) -> CarnotGroup {
        CarnotGroup::from_fields(
            "rn",
            vec![n],
            (0..n).map(|j| VectorField::coordinate(n, j, 1)).collect(),
        )
        .unwrap()
    }

    fn kaplan(g: &CarnotGroup) -> QuasiNorm {
        QuasiNorm::new(preset("kaplan", g).unwrap(), g).unwrap()
    }

    #[test]
    fn kaplan_gradient_examples() {
        let g = h1();
        let n = kaplan(&g);
        assert!((gradient_length(&g, &n, &[1.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(gradient_length(&g, &n, &[0.0, 0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn abs_value_gradient() {
        let g = euclid(1);
        let n = QuasiNorm::new(preset("powersum-default", &g).unwrap(), &g).unwrap();
        assert_eq!(gradient_length(&g, &n, &[2.0]).unwrap(), 1.0);
        assert_eq!(
            gradient_norm_ratio(&g, &n, 0, 2, &[0.7]).unwrap(),
            GradientRatio::Finite(1.0)
        );
    }

    #[test]
    fn ratio_cases() {
        let g = h1();
        let n = kaplan(&g);
        let r = gradient_norm_ratio(&g, &n, 0, 4, &[1.0, 0.0, 0.0]).unwrap().finite().unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        assert_eq!(
            gradient_norm_ratio(&g, &n, 0, 4, &[0.0, 1.0, 0.0]).unwrap(),
            GradientRatio::Infinite
        );
        assert_eq!(
            gradient_norm_ratio(&g, &n, 0, 4, &[0.0, 0.0, 1.0]).unwrap(),
            GradientRatio::Indeterminate
        );
        assert!(gradient_norm_ratio(&g, &n, 0, 4, &[0.0; 3]).is_err());
    }

    #[test]
    fn laplacian_of_planar_radius() {
        let g = euclid(2);
        let spec = QuasiNormSpec::PowerSum {
            a: vec![1.0, 1.0],
            beta: vec![1, 1],
            gamma: 2,
        };
        let n = QuasiNorm::new(spec, &g).unwrap();
        assert!((sub_laplacian(&g, &n, &[3.0, 4.0]).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn laplacian_polynomial_cases() {
        let g = h1();
        let x1sq = PolyField::new(&SparsePoly::var(3, 0) * &SparsePoly::var(3, 0));
        let t = PolyField::new(SparsePoly::var(3, 2));
        for x in [[0.3, -1.2, 2.0], [1.0, 1.0, 1.0]] {
            assert!((sub_laplacian(&g, &x1sq, &x).unwrap() - 2.0).abs() < 1e-14);
            assert_eq!(sub_laplacian(&g, &t, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn laplacian_matches_nested_application() {
        // Δ_G f computed as Σ X_j(X_j f) with X_j f built symbolically.
        let g = h1();
        let mut p = SparsePoly::zero(3);
        p.add_term(vec![2, 1, 1], parse_rational("3/2").unwrap());
        p.add_term(vec![0, 3, 0], parse_rational("-1").unwrap());
        p.add_term(vec![1, 0, 2], parse_rational("1/3").unwrap());
        let mut nested = SparsePoly::zero(3);
        for xj in g.horizontal() {
            nested = &nested + &xj.apply_poly(&xj.apply_poly(&p));
        }
        let f = PolyField::new(p);
        let x = [0.4, -0.9, 1.7];
        let a = sub_laplacian(&g, &f, &x).unwrap();
        assert!((a - nested.eval(&x)).abs() < 1e-12);
    }

    #[test]
    fn sphere_suprema_are_deterministic() {
        let g = h1();
        let n = kaplan(&g);
        let a = sphere_suprema(&g, &n, 5000, 3).unwrap();
        let b = sphere_suprema(&g, &n, 5000, 3).unwrap();
        assert_eq!(a, b);
        // |∇N| = ‖x‖/N ≤ 1 on the unit sphere
        assert!(a.gradient_sup <= 1.0 + 1e-12 && a.gradient_sup > 0.9);
    }
}
