use carnot_core::catalog::{get_entry, list_entries, CatalogEntry};
use carnot_core::diffops::{gradient_length, horizontal_gradient, sub_laplacian};
use carnot_core::field::{PolyField, ScalarField};
use carnot_core::measure::{mcmc_sample, MeasureSpec};
use carnot_core::poly::{Rational, SparsePoly};
use carnot_core::quasinorm::QuasiNorm;
use carnot_core::spectral::{empirical_poincare_ratio, ritz_convergence, Dictionary};
use carnot_core::verifier::estimate_condition_constant;
use num_bigint::BigInt;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-60i64..=60, 1i64..=12).prop_map(|(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=40, 1i64..=12).prop_map(|(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
}

fn step2_entries() -> Vec<&'static CatalogEntry> {
    list_entries(true).into_iter().filter(|e| e.group.step2_matrices().is_some()).collect()
}

fn all_pairs() -> Vec<(&'static CatalogEntry, QuasiNorm)> {
    list_entries(true)
        .into_iter()
        .flat_map(|e| e.presets.iter().map(move |p| (e, e.norm(p).unwrap())))
        .collect()
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, dim).prop_filter("away from 0", |x| x.iter().map(|v| v * v).sum::<f64>() > 1e-2)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn skew_forms_vanish(xs in prop::collection::vec(rational(), 8)) {
        for e in step2_entries() {
            let n1 = e.group.n1();
            for b in e.group.step2_matrices().unwrap() {
                prop_assert_eq!(b.bilinear_exact(&xs[..n1], &xs[..n1]), Rational::from_integer(0.into()));
            }
        }
    }

    #[test]
    fn dilation_is_an_automorphism(
        xs in prop::collection::vec(rational(), 8),
        ys in prop::collection::vec(rational(), 8),
        l in positive_rational(),
    ) {
        for e in step2_entries() {
            let g = &e.group;
            let n = g.dim();
            let (x, y) = (&xs[..n], &ys[..n]);
            let lhs = g.compose_exact(&g.dilate_exact(&l, x).unwrap(), &g.dilate_exact(&l, y).unwrap()).unwrap();
            let rhs = g.dilate_exact(&l, &g.compose_exact(x, y).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs, "{}", e.name);
        }
    }

    #[test]
    fn composition_is_associative(
        xs in prop::collection::vec(rational(), 8),
        ys in prop::collection::vec(rational(), 8),
        zs in prop::collection::vec(rational(), 8),
    ) {
        for e in step2_entries() {
            let g = &e.group;
            let n = g.dim();
            let (x, y, z) = (&xs[..n], &ys[..n], &zs[..n]);
            let l = g.compose_exact(&g.compose_exact(x, y).unwrap(), z).unwrap();
            let r = g.compose_exact(x, &g.compose_exact(y, z).unwrap()).unwrap();
            prop_assert_eq!(l, r, "{}", e.name);
        }
    }

    #[test]
    fn horizontal_fields_have_degree_one(exps in prop::collection::vec(0u32..4, 8), l in positive_rational()) {
        for e in list_entries(true) {
            let g = &e.group;
            let n = g.dim();
            let m = SparsePoly::monomial(exps[..n].to_vec(), Rational::from_integer(1.into()));
            for x in g.horizontal() {
                let lhs = x.apply_poly(&m.dilate(&l, g.weights()));
                let rhs = x.apply_poly(&m).dilate(&l, g.weights()).scale(&l);
                prop_assert_eq!(lhs, rhs, "{}", e.name);
            }
        }
    }

    #[test]
    fn norms_are_homogeneous(x in point(8), l in 0.2f64..5.0) {
        for (e, norm) in all_pairs() {
            let n = e.group.dim();
            if x[..n].iter().all(|v| *v == 0.0) {
                continue;
            }
            let y = e.group.dilate(l, &x[..n]).unwrap();
            prop_assert!(rel(norm.value(&y), l * norm.value(&x[..n])) < 1e-10, "{} {:?}", e.name, norm.spec());
        }
    }

    #[test]
    fn gradient_and_laplacian_scale(x in point(8), l in 0.2f64..5.0) {
        for (e, norm) in all_pairs() {
            let g = &e.group;
            let n = g.dim();
            let x = &x[..n];
            if x.iter().map(|v| v * v).sum::<f64>() < 1e-4 {
                continue;
            }
            let y = g.dilate(l, x).unwrap();
            let (g0, g1) = (gradient_length(g, &norm, x).unwrap(), gradient_length(g, &norm, &y).unwrap());
            prop_assert!(rel(g0, g1) < 1e-8, "{} {:?}: {g0} vs {g1}", e.name, norm.spec());
            let (d0, d1) = (sub_laplacian(g, &norm, x).unwrap(), sub_laplacian(g, &norm, &y).unwrap());
            let scale = d0.abs().max(sub_laplacian_scale(g, &norm, x)).max(g0 * g0 / norm.value(x));
            prop_assert!((d1 * l - d0).abs() < 1e-8 * scale, "{} {:?}: {d0} vs {}", e.name, norm.spec(), d1 * l);
        }
    }

    #[test]
    fn leibniz_rule(
        a in prop::collection::vec(-3i64..=3, 6),
        b in prop::collection::vec(-3i64..=3, 6),
        x in point(3),
    ) {
        let e = get_entry("heisenberg-h1").unwrap();
        let mk = |c: &[i64]| {
            let mut p = SparsePoly::zero(3);
            let exps = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0], [2, 0, 1]];
            for (ci, ex) in c.iter().zip(exps) {
                p.add_term(ex.to_vec(), Rational::from_integer((*ci).into()));
            }
            p
        };
        let (p, q) = (mk(&a), mk(&b));
        let pq = &p * &q;
        let (fp, fq, fpq) = (PolyField::new(p), PolyField::new(q), PolyField::new(pq));
        let g = &e.group;
        let lhs = horizontal_gradient(g, &fpq, &x).unwrap();
        let gp = horizontal_gradient(g, &fp, &x).unwrap();
        let gq = horizontal_gradient(g, &fq, &x).unwrap();
        for k in 0..g.n1() {
            let rhs = fp.value(&x) * gq[k] + fq.value(&x) * gp[k];
            prop_assert!((lhs[k] - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn poincare_ratio_ignores_scaling(c in 0.01f64..100.0, seed in 0u64..1000) {
        let e = get_entry("euclidean-1d").unwrap();
        let spec = MeasureSpec::new(e.group.clone(), e.norm("powersum-default").unwrap(), 1.0, 2.0).unwrap();
        let b = mcmc_sample(&spec, 1000, 1, seed).unwrap();
        let p = SparsePoly::var(1, 0).pow(3);
        let d1 = Dictionary::from_polys(vec![p.clone()]).unwrap();
        let cp = p.scale(&carnot_core::poly::rational_from_f64(c).unwrap());
        let d2 = Dictionary::from_polys(vec![cp]).unwrap();
        let r1 = empirical_poincare_ratio(&spec, 2.0, &d1, &b, 0, false).unwrap().ratio;
        let r2 = empirical_poincare_ratio(&spec, 2.0, &d2, &b, 0, false).unwrap().ratio;
        prop_assert!(rel(r1, r2) < 1e-9);
    }
}

/// Typical size of the terms summed into `Δ_G N` at `x`, so cancellation to
/// near zero is judged against the parts rather than the sum.
fn sub_laplacian_scale(g: &carnot_core::group::CarnotGroup, norm: &QuasiNorm, x: &[f64]) -> f64 {
    let h = norm.hessian(x).unwrap();
    let n = g.dim();
    let mut s = 0.0;
    for xf in g.horizontal() {
        let c = xf.coefficients_at(x);
        for i in 0..n {
            for j in 0..n {
                s += (c[i] * c[j] * h[i * n + j]).abs();
            }
        }
    }
    s.max(f64::MIN_POSITIVE)
}

#[test]
fn ritz_is_monotone_in_the_dictionary() {
    // nested dictionaries on one batch: the minimum can only go down
    for (name, preset, a, p) in [("euclidean-1d", "powersum-default", 0.5, 2.0), ("heisenberg-h1", "kaplan", 1.0, 8.0)] {
        let e = get_entry(name).unwrap();
        let spec = MeasureSpec::new(e.group.clone(), e.norm(preset).unwrap(), a, p).unwrap();
        let b = mcmc_sample(&spec, 20_000, 2, 4).unwrap();
        let d = Dictionary::weighted_monomials(&spec.group, 6).unwrap();
        let sizes: Vec<usize> = (1..=d.len()).collect();
        let curve = ritz_convergence(&spec, &d, &b, &sizes).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].lambda1 <= w[0].lambda1 * (1.0 + 1e-9), "{name}: {:?}", w);
        }
    }
}

#[test]
fn condition_infimum_grows_with_gamma() {
    // sup |x1| on the Kaplan sphere is 1, so raising γ can only raise the ratio
    let e = get_entry("heisenberg-h1").unwrap();
    let n = e.norm("kaplan").unwrap();
    let lo = estimate_condition_constant(&e.group, &n, 0, 4, 20_000, 3).unwrap();
    let hi = estimate_condition_constant(&e.group, &n, 0, 6, 20_000, 3).unwrap();
    assert!(hi.infimum_estimate.unwrap() >= lo.infimum_estimate.unwrap() * (1.0 - 1e-9));
}

#[test]
fn constants_span_the_grid_kernel() {
    use carnot_core::spectral::GridProblem;
    let e = get_entry("heisenberg-h1").unwrap();
    let prob = GridProblem::new(&e.group, &[-1.0, -1.0, -0.5], &[1.0, 1.0, 0.5], 9, &|x: &[f64]| -x.iter().map(|v| v * v).sum::<f64>()).unwrap();
    let ones = vec![1.0; prob.node_count()];
    let mut k1 = vec![0.0; ones.len()];
    prob.apply_stiffness(&ones, &mut k1);
    let diag: f64 = prob.stiffness_diagonal().iter().sum();
    let rayleigh: f64 = k1.iter().sum::<f64>() / prob.mass().iter().sum::<f64>();
    assert!(rayleigh.abs() < 1e-10 * diag / ones.len() as f64);
}
