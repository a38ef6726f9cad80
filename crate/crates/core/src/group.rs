//! Stratified groups, dilations and left-invariant horizontal vector fields.

use num_traits::{One, Zero};

use crate::error::{CarnotError, Result};
use crate::field::ScalarField;
use crate::poly::{format_rational, CompiledPoly, Rational, SparsePoly};

/// Layer dimensions `(n₁,…,n_r)` and the induced coordinate weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratification {
    stratum_dims: Vec<usize>,
    weights: Vec<u32>,
}

impl Stratification {
    pub fn new(stratum_dims: Vec<usize>) -> Result<Self> {
        if stratum_dims.is_empty() || stratum_dims.iter().any(|&d| d == 0) {
            return Err(CarnotError::structure(format!(
                "stratum dimensions must be a nonempty list of positive integers, got {stratum_dims:?}"
            )));
        }
        let weights = stratum_dims
            .iter()
            .enumerate()
            .flat_map(|(j, &d)| std::iter::repeat((j + 1) as u32).take(d))
            .collect();
        Ok(Stratification {
            stratum_dims,
            weights,
        })
    }

    pub fn stratum_dims(&self) -> &[usize] {
        &self.stratum_dims
    }

    /// `σ = (σ₁,…,σ_n)`, nondecreasing.
    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn step(&self) -> usize {
        self.stratum_dims.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Number of horizontal generators `n₁`.
    pub fn n1(&self) -> usize {
        self.stratum_dims[0]
    }

    /// Homogeneous dimension `Q = Σ σ_i`.
    pub fn homogeneous_dim(&self) -> u32 {
        self.weights.iter().sum()
    }
}

/// `X = Σ_k coeffs[k](x) ∂_{x_k}` with polynomial coefficients.
#[derive(Clone, Debug)]
pub struct VectorField {
    coeffs: Vec<SparsePoly>,
    degree: i32,
    // nonzero coefficients only
    compiled: Vec<(usize, CompiledPoly)>,
    // (k, l, ∂_l coeffs[k]) for nonzero derivatives
    compiled_partials: Vec<(usize, usize, CompiledPoly)>,
}

impl VectorField {
    pub fn new(coeffs: Vec<SparsePoly>, degree: i32) -> Result<Self> {
        let n = coeffs.len();
        if let Some(bad) = coeffs.iter().find(|c| c.dim() != n) {
            return Err(CarnotError::structure(format!(
                "vector field coefficient has {} variables, expected {n}",
                bad.dim()
            )));
        }
        let compiled = coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k, c.compile()))
            .collect();
        let mut compiled_partials = Vec::new();
        for (k, c) in coeffs.iter().enumerate() {
            for l in 0..n {
                let d = c.derivative(l);
                if !d.is_zero() {
                    compiled_partials.push((k, l, d.compile()));
                }
            }
        }
        Ok(VectorField {
            coeffs,
            degree,
            compiled,
            compiled_partials,
        })
    }

    /// The coordinate field `∂_{x_j}` in `dim` variables (degree `weight`).
    pub fn coordinate(dim: usize, j: usize, weight: u32) -> Self {
        let mut coeffs = vec![SparsePoly::zero(dim); dim];
        coeffs[j] = SparsePoly::one(dim);
        VectorField::new(coeffs, weight as i32).expect("coordinate field is well formed")
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[SparsePoly] {
        &self.coeffs
    }

    pub fn declared_degree(&self) -> i32 {
        self.degree
    }

    /// Coefficient values at `x` (all `n` of them).
    pub fn coefficients_at(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (k, c) in &self.compiled {
            out[*k] = c.eval(x);
        }
        out
    }

    /// Nonzero `(k, c_k(x))` pairs.
    pub fn sparse_coefficients_at(&self, x: &[f64]) -> Vec<(usize, f64)> {
        self.compiled.iter().map(|(k, c)| (*k, c.eval(x))).collect()
    }

    /// `(k, l, ∂_l c_k(x))` for every structurally nonzero derivative.
    pub fn coefficient_partials_at(&self, x: &[f64]) -> Vec<(usize, usize, f64)> {
        self.compiled_partials
            .iter()
            .map(|(k, l, c)| (*k, *l, c.eval(x)))
            .collect()
    }

    /// Exact image `X p` of a polynomial.
    pub fn apply_poly(&self, p: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero(p.dim());
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out = &out + &(c * &p.derivative(k));
        }
        out
    }

    /// `Ok(())` when the field is exactly `∂_{x_j}`; otherwise the first
    /// offending coordinate and monomial.
    pub fn pure_partial_witness(&self, j: usize) -> std::result::Result<(), (usize, String)> {
        for (k, c) in self.coeffs.iter().enumerate() {
            let expected = if k == j {
                SparsePoly::one(self.dim())
            } else {
                SparsePoly::zero(self.dim())
            };
            if *c != expected {
                let diff = c - &expected;
                let (e, q) = diff.terms().next().expect("nonzero difference");
                let mono = SparsePoly::monomial(e.clone(), q.clone());
                return Err((k, format!("({mono})·∂_x{}", k + 1)));
            }
        }
        Ok(())
    }
}

impl PartialEq for VectorField {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && self.degree == other.degree
    }
}

/// Outcome of [`check_homogeneity`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomogeneityVerdict {
    Pass,
    Fail {
        /// 0-based coordinate index of the offending coefficient.
        coord: usize,
        monomial: Vec<u32>,
        degree: u32,
        expected: i64,
    },
}

impl HomogeneityVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, HomogeneityVerdict::Pass)
    }
}

/// Checks that each nonzero `coeffs[k]` is `δ_λ`-homogeneous of degree
/// `σ_k − d`, where `d` is the field's declared degree.
pub fn check_homogeneity(strat: &Stratification, field: &VectorField) -> HomogeneityVerdict {
    let w = strat.weights();
    for (k, c) in field.coeffs().iter().enumerate() {
        let expected = w[k] as i64 - field.declared_degree() as i64;
        if let Some(e) = c.homogeneity_witness(w, expected) {
            let degree = e.iter().zip(w).map(|(a, s)| a * s).sum();
            return HomogeneityVerdict::Fail {
                coord: k,
                monomial: e,
                degree,
                expected,
            };
        }
    }
    HomogeneityVerdict::Pass
}

/// An `n₁ × n₁` rational matrix, checked skew-symmetric on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewMatrix {
    rows: Vec<Vec<Rational>>,
}

impl SkewMatrix {
    /// `index` is only used in diagnostics (0-based position in the list).
    pub fn new(rows: Vec<Vec<Rational>>, index: usize) -> Result<Self> {
        let m = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(CarnotError::Structure {
                    message: format!(
                        "matrix B^({}) is not square: row {} has {} entries, expected {m}",
                        index + 1,
                        i + 1,
                        r.len()
                    ),
                    location: Some(format!("step2Matrices[{index}][{i}]")),
                });
            }
        }
        for i in 0..m {
            for j in i..m {
                if rows[i][j] != -rows[j][i].clone() {
                    return Err(CarnotError::Structure {
                        message: format!(
                            "matrix B^({}) is not skew-symmetric: entry ({},{}) = {} but ({},{}) = {}",
                            index + 1,
                            i + 1,
                            j + 1,
                            format_rational(&rows[i][j]),
                            j + 1,
                            i + 1,
                            format_rational(&rows[j][i])
                        ),
                        location: Some(format!("step2Matrices[{index}][{i}][{j}]")),
                    });
                }
            }
        }
        Ok(SkewMatrix { rows })
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    /// `⟨B x, ξ⟩ = Σ_{i,j} B_ij x_j ξ_i`.
    pub fn bilinear_exact(&self, x: &[Rational], xi: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (i, row) in self.rows.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                if !b.is_zero() {
                    acc += b * &x[j] * &xi[i];
                }
            }
        }
        acc
    }

    fn to_f64(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(crate::poly::rational_to_f64).collect())
            .collect()
    }
}

/// A Carnot group on `ℝⁿ` in Jacobian coordinates, ordered stratum by stratum.
#[derive(Clone, Debug)]
pub struct CarnotGroup {
    name: String,
    strat: Stratification,
    horizontal: Vec<VectorField>,
    step2: Option<Vec<SkewMatrix>>,
    step2_f64: Option<Vec<Vec<Vec<f64>>>>,
}

impl CarnotGroup {
    /// Builds a group from its horizontal fields, validating the Jacobian form
    /// `X_j = ∂_j + Σ_{k>n₁} a_{j,k} ∂_k` with `a_{j,k}` homogeneous of degree `σ_k − 1`.
    pub fn from_fields(
        name: impl Into<String>,
        stratum_dims: Vec<usize>,
        horizontal: Vec<VectorField>,
    ) -> Result<Self> {
        let strat = Stratification::new(stratum_dims)?;
        validate_horizontal(&strat, &horizontal)?;
        Ok(CarnotGroup {
            name: name.into(),
            strat,
            horizontal,
            step2: None,
            step2_f64: None,
        })
    }

    /// Step-2 group on `ℝ^{n₁+m}` from skew matrices `B^(1),…,B^(m)`, with
    /// `X_j = ∂_{x_j} + ½ Σ_k Σ_i B^(k)_{ij} x_i ∂_{t_k}`.
    pub fn step2(name: impl Into<String>, n1: usize, matrices: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(CarnotError::structure("step-2 group needs at least one matrix"));
        }
        if n1 == 0 {
            return Err(CarnotError::structure("step-2 group needs n1 >= 1"));
        }
        let mut skew = Vec::with_capacity(matrices.len());
        for (k, rows) in matrices.into_iter().enumerate() {
            let b = SkewMatrix::new(rows, k)?;
            if b.size() != n1 {
                return Err(CarnotError::Structure {
                    message: format!("matrix B^({}) has size {}, expected {n1}", k + 1, b.size()),
                    location: Some(format!("step2Matrices[{k}]")),
                });
            }
            skew.push(b);
        }
        let m = skew.len();
        let n = n1 + m;
        let half = Rational::new(1.into(), 2.into());
        let mut horizontal = Vec::with_capacity(n1);
        for j in 0..n1 {
            let mut coeffs = vec![SparsePoly::zero(n); n];
            coeffs[j] = SparsePoly::one(n);
            for (k, b) in skew.iter().enumerate() {
                let mut c = SparsePoly::zero(n);
                for i in 0..n1 {
                    let bij = b.entry(i, j);
                    if !bij.is_zero() {
                        c = &c + &SparsePoly::var(n, i).scale(&(bij * &half));
                    }
                }
                coeffs[n1 + k] = c;
            }
            horizontal.push(VectorField::new(coeffs, 1)?);
        }
        let strat = Stratification::new(vec![n1, m])?;
        validate_horizontal(&strat, &horizontal)?;
        let step2_f64 = Some(skew.iter().map(SkewMatrix::to_f64).collect());
        Ok(CarnotGroup {
            name: name.into(),
            strat,
            horizontal,
            step2: Some(skew),
            step2_f64,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.strat.dim()
    }

    pub fn n1(&self) -> usize {
        self.strat.n1()
    }

    pub fn step(&self) -> usize {
        self.strat.step()
    }

    pub fn stratification(&self) -> &Stratification {
        &self.strat
    }

    pub fn weights(&self) -> &[u32] {
        self.strat.weights()
    }

    pub fn horizontal(&self) -> &[VectorField] {
        &self.horizontal
    }

    pub fn step2_matrices(&self) -> Option<&[SkewMatrix]> {
        self.step2.as_deref()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(CarnotError::invalid(format!(
                "point has {} coordinates, group {} has dimension {}",
                x.len(),
                self.name,
                self.dim()
            )));
        }
        Ok(())
    }

    /// `δ_λ(x) = (λ^{σ₁}x₁,…,λ^{σ_n}x_n)`.
    pub fn dilate(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(CarnotError::invalid(format!(
                "dilation factor must be positive and finite, got {lambda}"
            )));
        }
        self.check_point(x)?;
        Ok(self.dilate_unchecked(lambda, x))
    }

    pub(crate) fn dilate_unchecked(&self, lambda: f64, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.weights())
            .map(|(xi, &s)| xi * lambda.powi(s as i32))
            .collect()
    }

    pub fn dilate_exact(&self, lambda: &Rational, x: &[Rational]) -> Result<Vec<Rational>> {
        if *lambda <= Rational::zero() {
            return Err(CarnotError::invalid("dilation factor must be positive"));
        }
        if x.len() != self.dim() {
            return Err(CarnotError::invalid("point dimension mismatch"));
        }
        Ok(x.iter()
            .zip(self.weights())
            .map(|(xi, &s)| xi * num_traits::pow(lambda.clone(), s as usize))
            .collect())
    }

    fn require_step2(&self) -> Result<&[SkewMatrix]> {
        self.step2.as_deref().ok_or_else(|| {
            CarnotError::Unsupported(format!(
                "composition law is only stored for step-2 groups; {} has step {} without matrices",
                self.name,
                self.step()
            ))
        })
    }

    /// `(x,t)∘(ξ,τ) = (x+ξ, t_k + τ_k + ½⟨B^(k)x, ξ⟩)`.
    pub fn compose(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        self.require_step2()?;
        self.check_point(a)?;
        self.check_point(b)?;
        let n1 = self.n1();
        let mats = self.step2_f64.as_ref().expect("step-2 matrices");
        let mut out: Vec<f64> = a.iter().zip(b).map(|(u, v)| u + v).collect();
        for (k, bm) in mats.iter().enumerate() {
            let mut s = 0.0;
            for i in 0..n1 {
                for j in 0..n1 {
                    s += bm[i][j] * a[j] * b[i];
                }
            }
            out[n1 + k] += 0.5 * s;
        }
        Ok(out)
    }

    pub fn compose_exact(&self, a: &[Rational], b: &[Rational]) -> Result<Vec<Rational>> {
        let mats = self.require_step2()?;
        if a.len() != self.dim() || b.len() != self.dim() {
            return Err(CarnotError::invalid("point dimension mismatch"));
        }
        let n1 = self.n1();
        let half = Rational::new(1.into(), 2.into());
        let mut out: Vec<Rational> = a.iter().zip(b).map(|(u, v)| u + v).collect();
        for (k, bm) in mats.iter().enumerate() {
            out[n1 + k] += &half * bm.bilinear_exact(&a[..n1], &b[..n1]);
        }
        Ok(out)
    }

    /// Group inverse; for the step-2 law this is `x ↦ −x`.
    pub fn inverse(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.require_step2()?;
        self.check_point(x)?;
        Ok(x.iter().map(|v| -v).collect())
    }
}

fn validate_horizontal(strat: &Stratification, horizontal: &[VectorField]) -> Result<()> {
    let n = strat.dim();
    let n1 = strat.n1();
    if horizontal.len() != n1 {
        return Err(CarnotError::structure(format!(
            "expected {n1} horizontal fields, got {}",
            horizontal.len()
        )));
    }
    for (j, x) in horizontal.iter().enumerate() {
        if x.dim() != n {
            return Err(CarnotError::Structure {
                message: format!("field X{} has {} coefficients, expected {n}", j + 1, x.dim()),
                location: Some(format!("horizontalFields[{j}]")),
            });
        }
        if x.declared_degree() != 1 {
            return Err(CarnotError::structure(format!(
                "horizontal field X{} must have degree 1",
                j + 1
            )));
        }
        for k in 0..n1 {
            let c = &x.coeffs()[k];
            let ok = if k == j {
                *c == SparsePoly::one(n)
            } else {
                c.is_zero()
            };
            if !ok {
                return Err(CarnotError::Structure {
                    message: format!(
                        "field X{} must have coefficient {} on ∂_x{}, found {c}",
                        j + 1,
                        if k == j { 1 } else { 0 },
                        k + 1
                    ),
                    location: Some(format!("horizontalFields[{j}]")),
                });
            }
        }
        if let HomogeneityVerdict::Fail {
            coord,
            monomial,
            degree,
            expected,
        } = check_homogeneity(strat, x)
        {
            let mono = SparsePoly::monomial(monomial, Rational::one());
            return Err(CarnotError::Structure {
                message: format!(
                    "field X{}: monomial {mono} on ∂_x{} has degree {degree}, expected {expected}",
                    j + 1,
                    coord + 1
                ),
                location: Some(format!("horizontalFields[{j}]")),
            });
        }
    }
    Ok(())
}

/// `(X f)(x) = Σ_k c_k(x) ∂_k f(x)`.
pub fn apply_vector_field(field: &VectorField, f: &dyn ScalarField, x: &[f64]) -> Result<f64> {
    if f.dim() != field.dim() || x.len() != field.dim() {
        return Err(CarnotError::invalid(format!(
            "dimension mismatch: field {}, function {}, point {}",
            field.dim(),
            f.dim(),
            x.len()
        )));
    }
    let g = f.gradient(x)?;
    Ok(field
        .sparse_coefficients_at(x)
        .into_iter()
        .map(|(k, c)| c * g[k])
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PolyField;
    use crate::poly::parse_rational;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn h1() -> CarnotGroup {
        CarnotGroup::step2("h1", 2, vec![vec![vec![q("0"), q("1")], vec![q("-1"), q("0")]]]).unwrap()
    }

    #[test]
    fn dilation_examples() {
        let g = h1();
        assert_eq!(g.dilate(2.0, &[1.0, 0.0, 0.0]).unwrap(), vec![2.0, 0.0, 0.0]);
        assert_eq!(g.dilate(2.0, &[0.0, 0.0, 1.0]).unwrap(), vec![0.0, 0.0, 4.0]);
        let x = [0.3, -1.2, 5.0];
        assert_eq!(g.dilate(1.0, &x).unwrap(), x.to_vec());
        assert!(matches!(g.dilate(0.0, &x), Err(CarnotError::InvalidArgument(_))));
        assert!(matches!(g.dilate(-1.0, &x), Err(CarnotError::InvalidArgument(_))));
    }

    #[test]
    fn heisenberg_fields_from_matrix() {
        let g = h1();
        let x1 = &g.horizontal()[0];
        let x2 = &g.horizontal()[1];
        assert_eq!(x1.coeffs()[2], SparsePoly::var(3, 1).scale(&q("-1/2")));
        assert_eq!(x2.coeffs()[2], SparsePoly::var(3, 0).scale(&q("1/2")));
        assert_eq!(g.weights(), &[1, 1, 2]);
    }

    #[test]
    fn zero_matrix_gives_coordinate_fields() {
        let g = CarnotGroup::step2("flat", 2, vec![vec![vec![q("0"), q("0")], vec![q("0"), q("0")]]])
            .unwrap();
        for (j, x) in g.horizontal().iter().enumerate() {
            assert_eq!(*x, VectorField::coordinate(3, j, 1));
        }
    }

    #[test]
    fn symmetric_matrix_rejected_with_entry() {
        let err = CarnotGroup::step2("bad", 2, vec![vec![vec![q("0"), q("1")], vec![q("1"), q("0")]]])
            .unwrap_err();
        match err {
            CarnotError::Structure { message, location } => {
                assert!(message.contains("B^(1)"), "{message}");
                assert!(message.contains("(1,2)"), "{message}");
                assert_eq!(location.as_deref(), Some("step2Matrices[0][0][1]"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nonzero_diagonal_rejected() {
        let err = CarnotGroup::step2("bad", 2, vec![vec![vec![q("1"), q("0")], vec![q("0"), q("0")]]]);
        assert!(matches!(err, Err(CarnotError::Structure { .. })));
    }

    #[test]
    fn compose_examples() {
        let g = h1();
        assert_eq!(g.compose(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(), vec![1.0, 1.0, -0.5]);
        let x = [0.7, -2.0, 3.25];
        let inv = g.inverse(&x).unwrap();
        assert_eq!(g.compose(&x, &inv).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(g.compose(&x, &[0.0; 3]).unwrap(), x.to_vec());
    }

    #[test]
    fn compose_unsupported_without_matrices() {
        let n = 4;
        let mut c = vec![SparsePoly::zero(n); n];
        c[1] = SparsePoly::one(n);
        c[2] = SparsePoly::var(n, 0);
        let mut c4 = SparsePoly::var(n, 0).pow(2);
        c4 = c4.scale(&q("1/2"));
        c[3] = c4;
        let engel = CarnotGroup::from_fields(
            "engel",
            vec![2, 1, 1],
            vec![VectorField::coordinate(n, 0, 1), VectorField::new(c, 1).unwrap()],
        )
        .unwrap();
        assert!(matches!(
            engel.compose(&[0.0; 4], &[0.0; 4]),
            Err(CarnotError::Unsupported(_))
        ));
    }

    #[test]
    fn apply_field_examples() {
        let g = h1();
        let t = PolyField::new(SparsePoly::var(3, 2));
        let v = apply_vector_field(&g.horizontal()[0], &t, &[0.0, 3.0, 0.0]).unwrap();
        assert_eq!(v, -1.5);
        let c = PolyField::new(SparsePoly::constant(3, q("7")));
        for x in g.horizontal() {
            assert_eq!(apply_vector_field(x, &c, &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        }
        let wrong = PolyField::new(SparsePoly::var(2, 0));
        assert!(apply_vector_field(&g.horizontal()[0], &wrong, &[0.0; 3]).is_err());
    }

    #[test]
    fn homogeneity_examples() {
        let g = h1();
        assert!(check_homogeneity(g.stratification(), &g.horizontal()[0]).passed());
        // ∂1 + x1 ∂2 declared degree 1 on weights (1,1,2)
        let mut c = vec![SparsePoly::zero(3); 3];
        c[0] = SparsePoly::one(3);
        c[1] = SparsePoly::var(3, 0);
        let bad = VectorField::new(c, 1).unwrap();
        assert_eq!(
            check_homogeneity(g.stratification(), &bad),
            HomogeneityVerdict::Fail {
                coord: 1,
                monomial: vec![1, 0, 0],
                degree: 1,
                expected: 0
            }
        );
        assert!(check_homogeneity(g.stratification(), &VectorField::coordinate(3, 1, 1)).passed());
    }

    #[test]
    fn pure_partial_witness_names_monomial() {
        let g = h1();
        let err = g.horizontal()[0].pure_partial_witness(0).unwrap_err();
        assert_eq!(err.0, 2);
        assert!(err.1.contains("x2"), "{}", err.1);
        assert!(VectorField::coordinate(3, 0, 1).pure_partial_witness(0).is_ok());
    }
}
