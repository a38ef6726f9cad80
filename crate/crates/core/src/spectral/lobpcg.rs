//! Single-vector LOBPCG for the smallest eigenpair of a symmetric operator,
//! with a diagonal preconditioner and explicit deflation.

use nalgebra::{DMatrix, SymmetricEigen};

pub(crate) struct EigResult {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn deflate(v: &mut [f64], basis: &[Vec<f64>]) {
    for u in basis {
        let c = dot(u, v);
        axpy(-c, u, v);
    }
}

const STALL_WINDOW: usize = 50;

/// `apply(x, out)` writes `A x`. `deflation` vectors must be orthonormal and
/// invariant under `A`; the iterate is kept orthogonal to them. Converged
/// means `‖Ax − λx‖ ≤ tol·|λ|`, or that `λ` has stopped moving with the
/// residual already below `√tol·|λ|`.
pub(crate) fn smallest_eigenpair(
    apply: &mut dyn FnMut(&[f64], &mut [f64]),
    precond: &[f64],
    deflation: &[Vec<f64>],
    x0: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> EigResult {
    let n = x0.len();
    let mut x = x0;
    deflate(&mut x, deflation);
    let nx = dot(&x, &x).sqrt();
    x.iter_mut().for_each(|v| *v /= nx);
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut lambda = dot(&x, &ax);
    let mut p: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut r = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut history = Vec::new();
    while iterations < max_iter {
        for i in 0..n {
            r[i] = ax[i] - lambda * x[i];
        }
        residual = dot(&r, &r).sqrt();
        if residual <= tol * lambda.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
        // rounding floor: the Rayleigh quotient no longer moves
        history.push(lambda);
        if history.len() > STALL_WINDOW {
            let old = history[history.len() - 1 - STALL_WINDOW];
            if (old - lambda).abs() <= 1e-13 * lambda.abs() {
                converged = residual <= tol.sqrt() * lambda.abs();
                break;
            }
        }
        iterations += 1;
        let mut w: Vec<f64> = r.iter().zip(precond).map(|(ri, ti)| ri * ti).collect();
        deflate(&mut w, deflation);
        let mut aw = vec![0.0; n];
        apply(&w, &mut aw);
        let mut vs = vec![x.clone(), w];
        let mut avs = vec![ax.clone(), aw];
        if let Some((pv, apv)) = p.take() {
            vs.push(pv);
            avs.push(apv);
        }
        // modified Gram–Schmidt, twice, carrying the A-images along
        let mut keep = vec![true; vs.len()];
        for j in 1..vs.len() {
            let before = dot(&vs[j], &vs[j]).sqrt();
            for _ in 0..2 {
                for i in 0..j {
                    if !keep[i] {
                        continue;
                    }
                    let c = dot(&vs[i], &vs[j]);
                    let (lo, hi) = vs.split_at_mut(j);
                    axpy(-c, &lo[i], &mut hi[0]);
                    let (alo, ahi) = avs.split_at_mut(j);
                    axpy(-c, &alo[i], &mut ahi[0]);
                }
            }
            let after = dot(&vs[j], &vs[j]).sqrt();
            if !(after > 1e-6 * before) || after == 0.0 {
                keep[j] = false;
                continue;
            }
            vs[j].iter_mut().for_each(|v| *v /= after);
            avs[j].iter_mut().for_each(|v| *v /= after);
        }
        let idx: Vec<usize> = (0..vs.len()).filter(|&i| keep[i]).collect();
        let k = idx.len();
        if k == 1 {
            break;
        }
        let mut h = DMatrix::zeros(k, k);
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate().skip(a) {
                let v = 0.5 * (dot(&vs[ia], &avs[ib]) + dot(&vs[ib], &avs[ia]));
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let (imin, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let c = eig.eigenvectors.column(imin);
        let mut xn = vec![0.0; n];
        let mut axn = vec![0.0; n];
        let mut pn = vec![0.0; n];
        let mut apn = vec![0.0; n];
        for (a, &ia) in idx.iter().enumerate() {
            axpy(c[a], &vs[ia], &mut xn);
            axpy(c[a], &avs[ia], &mut axn);
            if a > 0 {
                axpy(c[a], &vs[ia], &mut pn);
                axpy(c[a], &avs[ia], &mut apn);
            }
        }
        let nrm = dot(&xn, &xn).sqrt();
        xn.iter_mut().for_each(|v| *v /= nrm);
        axn.iter_mut().for_each(|v| *v /= nrm);
        x = xn;
        // refresh the image now and then; the recurrence drifts
        if iterations % 10 == 0 {
            deflate(&mut x, deflation);
            let nx = dot(&x, &x).sqrt();
            x.iter_mut().for_each(|v| *v /= nx);
            apply(&x, &mut ax);
        } else {
            ax = axn;
        }
        lambda = dot(&x, &ax);
        p = Some((pn, apn));
    }
    EigResult {
        value: lambda,
        vector: x,
        iterations,
        residual,
        converged,
    }
}
