//! Scalar fields with exact first and second partials.

use std::sync::Arc;

use crate::error::{CarnotError, Result};
use crate::poly::{CompiledPoly, SparsePoly};

/// A real function on `ℝⁿ` that supplies closed-form partial derivatives.
///
/// `gradient` and `hessian` fail with a domain error where the field is not
/// differentiable (quasi-norms at the origin). The Hessian is returned
/// row-major, `n × n`.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn hessian(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn partial(&self, i: usize, x: &[f64]) -> Result<f64> {
        Ok(self.gradient(x)?[i])
    }

    fn second_partial(&self, i: usize, j: usize, x: &[f64]) -> Result<f64> {
        Ok(self.hessian(x)?[i * self.dim() + j])
    }

    fn smooth_away_from_origin(&self) -> bool {
        true
    }
}

pub type SharedField = Arc<dyn ScalarField>;

/// A polynomial as a scalar field; smooth everywhere.
#[derive(Clone, Debug)]
pub struct PolyField {
    poly: SparsePoly,
    value: CompiledPoly,
    grad: Vec<CompiledPoly>,
    // upper triangle, (i, j) with i <= j, row-major
    hess: Vec<CompiledPoly>,
}

impl PolyField {
    pub fn new(poly: SparsePoly) -> Self {
        let n = poly.dim();
        let grad_exact: Vec<SparsePoly> = (0..n).map(|i| poly.derivative(i)).collect();
        let mut hess = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                hess.push(grad_exact[i].derivative(j).compile());
            }
        }
        PolyField {
            value: poly.compile(),
            grad: grad_exact.iter().map(SparsePoly::compile).collect(),
            hess,
            poly,
        }
    }

    pub fn poly(&self) -> &SparsePoly {
        &self.poly
    }
}

impl ScalarField for PolyField {
    fn dim(&self) -> usize {
        self.poly.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.value.eval(x)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.grad.iter().map(|g| g.eval(x)).collect())
    }

    fn hessian(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut h = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let v = self.hess[k].eval(x);
                h[i * n + j] = v;
                h[j * n + i] = v;
                k += 1;
            }
        }
        Ok(h)
    }
}

/// `c · N(x)^k` for a quasi-norm (or any field) `N`; used as a perturbation
/// potential `W`.
#[derive(Clone)]
pub struct PowerOfField {
    base: SharedField,
    coeff: f64,
    power: f64,
}

impl PowerOfField {
    pub fn new(base: SharedField, coeff: f64, power: f64) -> Result<Self> {
        if !(coeff.is_finite() && power.is_finite() && power >= 1.0) {
            return Err(CarnotError::invalid(format!(
                "power-of-field needs finite coeff and power >= 1, got {coeff}, {power}"
            )));
        }
        Ok(PowerOfField { base, coeff, power })
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn power(&self) -> f64 {
        self.power
    }
}

impl ScalarField for PowerOfField {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.coeff * self.base.value(x).powf(self.power)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let v = self.base.value(x);
        let g = self.base.gradient(x)?;
        let s = self.coeff * self.power * v.powf(self.power - 1.0);
        Ok(g.into_iter().map(|gi| s * gi).collect())
    }

    fn hessian(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let v = self.base.value(x);
        let g = self.base.gradient(x)?;
        let h = self.base.hessian(x)?;
        let k = self.power;
        let s1 = self.coeff * k * v.powf(k - 1.0);
        let s2 = if k == 1.0 {
            0.0
        } else {
            self.coeff * k * (k - 1.0) * v.powf(k - 2.0)
        };
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = s1 * h[i * n + j] + s2 * g[i] * g[j];
            }
        }
        Ok(out)
    }

    fn smooth_away_from_origin(&self) -> bool {
        self.base.smooth_away_from_origin()
    }
}

/// `f(x) · exp(−ε N(x)^p)`: a dictionary function damped at infinity.
#[derive(Clone)]
pub struct DampedField {
    inner: SharedField,
    norm: SharedField,
    epsilon: f64,
    p: f64,
}

impl DampedField {
    pub fn new(inner: SharedField, norm: SharedField, epsilon: f64, p: f64) -> Self {
        DampedField {
            inner,
            norm,
            epsilon,
            p,
        }
    }

    fn damping(&self, x: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        let nv = self.norm.value(x);
        let e = (-self.epsilon * nv.powf(self.p)).exp();
        if nv == 0.0 {
            // exp(−εN^p) is C² at the origin for p > 2
            if self.p > 2.0 {
                return Ok((e, vec![0.0; n], vec![0.0; n * n]));
            }
            return Err(CarnotError::domain("damping factor at the origin"));
        }
        let g = self.norm.gradient(x)?;
        let h = self.norm.hessian(x)?;
        // phi = −ε N^p
        let d1 = -self.epsilon * self.p * nv.powf(self.p - 1.0);
        let d2 = -self.epsilon * self.p * (self.p - 1.0) * nv.powf(self.p - 2.0);
        let gphi: Vec<f64> = g.iter().map(|gi| d1 * gi).collect();
        let mut he = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let hphi = d1 * h[i * n + j] + d2 * g[i] * g[j];
                he[i * n + j] = e * (hphi + gphi[i] * gphi[j]);
            }
        }
        let ge = gphi.iter().map(|v| e * v).collect();
        Ok((e, ge, he))
    }
}

impl ScalarField for DampedField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x) * (-self.epsilon * self.norm.value(x).powf(self.p)).exp()
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (e, ge, _) = self.damping(x)?;
        let f = self.inner.value(x);
        let gf = self.inner.gradient(x)?;
        Ok(gf.iter().zip(&ge).map(|(a, b)| a * e + f * b).collect())
    }

    fn hessian(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let (e, ge, he) = self.damping(x)?;
        let f = self.inner.value(x);
        let gf = self.inner.gradient(x)?;
        let hf = self.inner.hessian(x)?;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] =
                    hf[i * n + j] * e + gf[i] * ge[j] + gf[j] * ge[i] + f * he[i * n + j];
            }
        }
        Ok(out)
    }
}

/// Central finite-difference gradient; test and diagnostic use only.
pub fn fd_gradient(f: &dyn ScalarField, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let xi = x[i];
            let mut stencil = |d: f64| {
                xp[i] = xi + d;
                let v = f.value(&xp);
                xp[i] = xi;
                v
            };
            (-stencil(2.0 * h) + 8.0 * stencil(h) - 8.0 * stencil(-h) + stencil(-2.0 * h))
                / (12.0 * h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_rational;

    #[test]
    fn poly_field_partials() {
        // f = x1^2 x2 - x2^3/3
        let mut p = SparsePoly::zero(2);
        p.add_term(vec![2, 1], parse_rational("1").unwrap());
        p.add_term(vec![0, 3], parse_rational("-1/3").unwrap());
        let f = PolyField::new(p);
        let x = [1.5, -0.5];
        let g = f.gradient(&x).unwrap();
        assert!((g[0] - 2.0 * 1.5 * -0.5).abs() < 1e-14);
        assert!((g[1] - (1.5f64 * 1.5 - 0.25)).abs() < 1e-14);
        assert!((f.second_partial(0, 1, &x).unwrap() - 3.0).abs() < 1e-14);
        assert!((f.second_partial(1, 1, &x).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn damped_field_matches_finite_differences() {
        let x1 = SparsePoly::var(2, 0);
        let norm: SharedField = Arc::new(PolyField::new(&(&x1 * &x1) + &SparsePoly::var(2, 1)));
        let inner: SharedField = Arc::new(PolyField::new(SparsePoly::var(2, 1)));
        let d = DampedField::new(inner, norm, 0.3, 2.0);
        let x = [0.7, 0.4];
        let g = d.gradient(&x).unwrap();
        let fd = fd_gradient(&d, &x, 1e-4);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
