//! Finite-element discretization of `E(f,f) = Σ_i ∫ |X_i f|² w dx` on a box.
//!
//! Multilinear elements on a tensor grid, full 2-point Gauss quadrature per
//! axis (one-point rules leave checkerboard modes with zero energy), and a
//! lumped diagonal mass matrix with trapezoid node volumes.

use crate::error::{CarnotError, Result};
use crate::group::CarnotGroup;
use crate::poly::CompiledPoly;

/// Weights below this fraction of the maximum are raised to it.
pub const DENSITY_FLOOR: f64 = 1e-200;

const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// The stiffness operator and mass diagonal on one grid.
pub struct GridProblem {
    n: usize,
    points: usize,
    lower: Vec<f64>,
    h: Vec<f64>,
    strides: Vec<usize>,
    /// local node offsets, 2ⁿ of them
    offsets: Vec<usize>,
    /// ∂_k φ_a at Gauss point g, `[g][a][k]`, already divided by `h_k`
    ref_grad: Vec<f64>,
    /// per generator, the coordinates `k` of its nonzero coefficients
    layout: Vec<Vec<usize>>,
    pack: usize,
    /// `√W_g · c_ik(x_g)` for every cell and Gauss point, in layout order
    packed: Vec<f64>,
    mass: Vec<f64>,
    boundary_ratio: f64,
}

fn unravel(mut idx: usize, extent: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for d in (0..n).rev() {
        out[d] = idx % extent;
        idx /= extent;
    }
    out
}

impl GridProblem {
    /// `log_weight` returns the log of the (unnormalized) weight; it is
    /// shifted by its maximum over the nodes before exponentiation.
    pub fn new(
        group: &CarnotGroup,
        lower: &[f64],
        upper: &[f64],
        points: usize,
        log_weight: &(dyn Fn(&[f64]) -> f64 + Sync),
    ) -> Result<Self> {
        let n = group.dim();
        if n > 3 {
            return Err(CarnotError::invalid(format!(
                "grid discretization supports dimension ≤ 3, got {n}"
            )));
        }
        if points < 3 {
            return Err(CarnotError::invalid("grid needs at least 3 points per axis"));
        }
        if lower.len() != n || upper.len() != n || lower.iter().zip(upper).any(|(l, u)| !(u > l)) {
            return Err(CarnotError::invalid("grid box bounds are malformed"));
        }
        let cells = points - 1;
        let h: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| (u - l) / cells as f64).collect();
        let mut strides = vec![1; n];
        for d in (0..n.saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * points;
        }
        let ng = 1usize << n;
        let offsets: Vec<usize> = (0..ng)
            .map(|a| (0..n).map(|d| ((a >> d) & 1) * strides[d]).sum())
            .collect();
        let mut ref_grad = vec![0.0; ng * ng * n];
        for g in 0..ng {
            let xi: Vec<f64> = (0..n).map(|d| GAUSS[(g >> d) & 1]).collect();
            for a in 0..ng {
                for k in 0..n {
                    let mut v = 1.0 / h[k];
                    for d in 0..n {
                        let bit = (a >> d) & 1;
                        if d == k {
                            v *= if bit == 1 { 1.0 } else { -1.0 };
                        } else {
                            v *= if bit == 1 { xi[d] } else { 1.0 - xi[d] };
                        }
                    }
                    ref_grad[(g * ng + a) * n + k] = v;
                }
            }
        }
        let mut layout = Vec::new();
        let mut coeff_polys: Vec<CompiledPoly> = Vec::new();
        for xj in group.horizontal() {
            let mut ks = Vec::new();
            for (k, c) in xj.coeffs().iter().enumerate() {
                if !c.is_zero() {
                    ks.push(k);
                    coeff_polys.push(c.compile());
                }
            }
            layout.push(ks);
        }
        let pack = coeff_polys.len();
        let node_count = points.pow(n as u32);
        let node_x = |idx: usize| -> Vec<f64> {
            unravel(idx, points, n)
                .iter()
                .enumerate()
                .map(|(d, &i)| lower[d] + i as f64 * h[d])
                .collect()
        };
        let node_logw: Vec<f64> = (0..node_count).map(|i| log_weight(&node_x(i))).collect();
        let log_max = node_logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !log_max.is_finite() {
            return Err(CarnotError::NonFinite {
                value: log_max,
                point: Vec::new(),
            });
        }
        let weight = |lw: f64| (lw - log_max).exp().max(DENSITY_FLOOR);
        let mut mass = vec![0.0; node_count];
        let mut boundary_ratio: f64 = 0.0;
        let cell_vol: f64 = h.iter().product();
        for (i, m) in mass.iter_mut().enumerate() {
            let ix = unravel(i, points, n);
            let mut vol = cell_vol;
            let mut boundary = false;
            for &c in &ix {
                if c == 0 || c == cells {
                    vol *= 0.5;
                    boundary = true;
                }
            }
            let w = weight(node_logw[i]);
            *m = w * vol;
            if boundary {
                boundary_ratio = boundary_ratio.max(w);
            }
        }
        let cell_count = cells.pow(n as u32);
        let gp_weight = cell_vol / ng as f64;
        let mut packed = vec![0.0; cell_count * ng * pack];
        let mut xg = vec![0.0; n];
        for cell in 0..cell_count {
            let ci = unravel(cell, cells, n);
            for g in 0..ng {
                for d in 0..n {
                    xg[d] = lower[d] + (ci[d] as f64 + GAUSS[(g >> d) & 1]) * h[d];
                }
                let sw = (weight(log_weight(&xg)) * gp_weight).sqrt();
                let base = (cell * ng + g) * pack;
                for (e, cp) in coeff_polys.iter().enumerate() {
                    packed[base + e] = sw * cp.eval(&xg);
                }
            }
        }
        Ok(GridProblem {
            n,
            points,
            lower: lower.to_vec(),
            h,
            strides,
            offsets,
            ref_grad,
            layout,
            pack,
            packed,
            mass,
            boundary_ratio,
        })
    }

    pub fn node_count(&self) -> usize {
        self.mass.len()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> &[f64] {
        &self.h
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Largest boundary-node weight relative to the maximum weight.
    pub fn boundary_ratio(&self) -> f64 {
        self.boundary_ratio
    }

    pub fn node_coordinates(&self, idx: usize) -> Vec<f64> {
        unravel(idx, self.points, self.n)
            .iter()
            .enumerate()
            .map(|(d, &i)| self.lower[d] + i as f64 * self.h[d])
            .collect()
    }

    fn for_each_cell(&self, mut f: impl FnMut(usize, usize)) {
        let cells = self.points - 1;
        let n = self.n;
        let mut idx = vec![0usize; n];
        let total = cells.pow(n as u32);
        for cell in 0..total {
            let base: usize = idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum();
            f(cell, base);
            for d in (0..n).rev() {
                idx[d] += 1;
                if idx[d] < cells {
                    break;
                }
                idx[d] = 0;
            }
        }
    }

    /// Local generator vectors `v_a = Σ_k √W c_ik ∂_k φ_a` at one Gauss point.
    #[inline]
    fn local_vectors(&self, pk: &[f64], g: usize, mut f: impl FnMut(&[f64])) {
        let ng = self.offsets.len();
        let n = self.n;
        let mut v = [0.0f64; 8];
        let mut e = 0;
        for ks in &self.layout {
            v[..ng].iter_mut().for_each(|x| *x = 0.0);
            for &k in ks {
                let c = pk[e];
                e += 1;
                if c == 0.0 {
                    continue;
                }
                for (a, va) in v[..ng].iter_mut().enumerate() {
                    *va += c * self.ref_grad[(g * ng + a) * n + k];
                }
            }
            f(&v[..ng]);
        }
    }

    /// `y = K x`.
    pub fn apply_stiffness(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let ng = self.offsets.len();
        self.for_each_cell(|cell, base| {
            let mut xl = [0.0f64; 8];
            for (a, o) in self.offsets.iter().enumerate() {
                xl[a] = x[base + o];
            }
            let mut yl = [0.0f64; 8];
            for g in 0..ng {
                let pk = &self.packed[(cell * ng + g) * self.pack..(cell * ng + g + 1) * self.pack];
                self.local_vectors(pk, g, |v| {
                    let s: f64 = v.iter().zip(&xl).map(|(a, b)| a * b).sum();
                    for (ya, va) in yl.iter_mut().zip(v) {
                        *ya += s * va;
                    }
                });
            }
            for (a, o) in self.offsets.iter().enumerate() {
                y[base + o] += yl[a];
            }
        });
    }

    pub fn stiffness_diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.node_count()];
        let ng = self.offsets.len();
        self.for_each_cell(|cell, base| {
            for g in 0..ng {
                let pk = &self.packed[(cell * ng + g) * self.pack..(cell * ng + g + 1) * self.pack];
                self.local_vectors(pk, g, |v| {
                    for (a, o) in self.offsets.iter().enumerate() {
                        d[base + o] += v[a] * v[a];
                    }
                });
            }
        });
        d
    }

    /// Multilinear interpolation of nodal values from a grid on the same box
    /// with `(points − 1)/2 + 1` points per axis.
    pub fn prolong_from(&self, coarse_points: usize, coarse: &[f64]) -> Vec<f64> {
        debug_assert_eq!((coarse_points - 1) * 2, self.points - 1);
        let n = self.n;
        let mut cstrides = vec![1; n];
        for d in (0..n.saturating_sub(1)).rev() {
            cstrides[d] = cstrides[d + 1] * coarse_points;
        }
        (0..self.node_count())
            .map(|i| {
                let ix = unravel(i, self.points, n);
                // average over the 1 or 2 coarse parents per axis
                let mut total = 0.0;
                let mut count = 0.0;
                let parents: Vec<Vec<usize>> = ix
                    .iter()
                    .map(|&c| if c % 2 == 0 { vec![c / 2] } else { vec![c / 2, c / 2 + 1] })
                    .collect();
                let combos: usize = parents.iter().map(Vec::len).product();
                for m in 0..combos {
                    let mut rem = m;
                    let mut idx = 0;
                    for d in 0..n {
                        let choice = rem % parents[d].len();
                        rem /= parents[d].len();
                        idx += parents[d][choice] * cstrides[d];
                    }
                    total += coarse[idx];
                    count += 1.0;
                }
                total / count
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_entry;

    #[test]
    fn constants_are_in_the_kernel() {
        let e = get_entry("heisenberg-h1").unwrap();
        let norm = e.norm("kaplan").unwrap();
        let lw = |x: &[f64]| -crate::field::ScalarField::value(&norm, x).powi(8);
        let g = GridProblem::new(&e.group, &[-1.5, -1.5, -0.6], &[1.5, 1.5, 0.6], 9, &lw).unwrap();
        let ones = vec![1.0; g.node_count()];
        let mut y = vec![0.0; g.node_count()];
        g.apply_stiffness(&ones, &mut y);
        let diag = g.stiffness_diagonal();
        let scale: f64 = diag.iter().sum();
        let k1: f64 = y.iter().map(|v| v.abs()).sum();
        assert!(k1 <= 1e-12 * scale, "{k1} vs {scale}");
    }

    #[test]
    fn stiffness_is_symmetric() {
        let e = get_entry("heisenberg-h1").unwrap();
        let lw = |x: &[f64]| -(x[0] * x[0] + x[1] * x[1] + x[2].abs());
        let g = GridProblem::new(&e.group, &[-2.0, -2.0, -1.0], &[2.0, 1.0, 2.0], 5, &lw).unwrap();
        let m = g.node_count();
        let u: Vec<f64> = (0..m).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let v: Vec<f64> = (0..m).map(|i| ((i * 104729) % 11) as f64 - 5.0).collect();
        let (mut ku, mut kv) = (vec![0.0; m], vec![0.0; m]);
        g.apply_stiffness(&u, &mut ku);
        g.apply_stiffness(&v, &mut kv);
        let a: f64 = v.iter().zip(&ku).map(|(x, y)| x * y).sum();
        let b: f64 = u.iter().zip(&kv).map(|(x, y)| x * y).sum();
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        let diag = g.stiffness_diagonal();
        let mut e0 = vec![0.0; m];
        e0[17] = 1.0;
        let mut k0 = vec![0.0; m];
        g.apply_stiffness(&e0, &mut k0);
        assert!((k0[17] - diag[17]).abs() <= 1e-12 * diag[17]);
    }

    #[test]
    fn prolongation_reproduces_linear_functions() {
        let e = get_entry("euclidean-2d").unwrap();
        let lw = |_: &[f64]| 0.0;
        let coarse = GridProblem::new(&e.group, &[0.0, -1.0], &[2.0, 1.0], 5, &lw).unwrap();
        let fine = GridProblem::new(&e.group, &[0.0, -1.0], &[2.0, 1.0], 9, &lw).unwrap();
        let f = |x: &[f64]| 3.0 * x[0] - 2.0 * x[1] + 0.5;
        let cv: Vec<f64> = (0..coarse.node_count()).map(|i| f(&coarse.node_coordinates(i))).collect();
        let fv = fine.prolong_from(5, &cv);
        for (i, v) in fv.iter().enumerate() {
            assert!((v - f(&fine.node_coordinates(i))).abs() < 1e-12);
        }
    }
}
