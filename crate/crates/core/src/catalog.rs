//! Built-in groups with compatible norm presets.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{CarnotError, Result};
use crate::group::{CarnotGroup, VectorField};
use crate::poly::{parse_rational, Rational, SparsePoly};
use crate::quasinorm::{preset, QuasiNorm, QuasiNormSpec};

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub group: CarnotGroup,
    /// Preset names valid on this group, default first.
    pub presets: Vec<&'static str>,
    /// 1-based index `j0` with `X_{j0} = ∂_{x_{j0}}`.
    pub pure_generator_index: Option<usize>,
    pub note: &'static str,
    pub experimental: bool,
}

impl CatalogEntry {
    pub fn default_preset(&self) -> &'static str {
        self.presets[0]
    }

    pub fn norm_spec(&self, preset_name: &str) -> Result<QuasiNormSpec> {
        preset(preset_name, &self.group)
    }

    pub fn norm(&self, preset_name: &str) -> Result<QuasiNorm> {
        QuasiNorm::new(self.norm_spec(preset_name)?, &self.group)
    }

    pub fn summary(&self) -> EntrySummary {
        EntrySummary {
            name: self.name.to_string(),
            dimension: self.group.dim(),
            step: self.group.step(),
            stratum_dims: self.group.stratification().stratum_dims().to_vec(),
            weights: self.group.weights().to_vec(),
            presets: self.presets.iter().map(|s| s.to_string()).collect(),
            pure_generator_index: self.pure_generator_index,
            experimental: self.experimental,
            note: self.note.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EntrySummary {
    pub name: String,
    pub dimension: usize,
    pub step: usize,
    pub stratum_dims: Vec<usize>,
    pub weights: Vec<u32>,
    pub presets: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pure_generator_index: Option<usize>,
    pub experimental: bool,
    pub note: String,
}

fn q(s: &str) -> Rational {
    parse_rational(s).expect("catalog literal")
}

fn matrix(rows: &[&[&str]]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|s| q(s)).collect()).collect()
}

fn euclidean(name: &str, n: usize) -> CarnotGroup {
    CarnotGroup::from_fields(name, vec![n], (0..n).map(|j| VectorField::coordinate(n, j, 1)).collect())
        .expect("euclidean fields")
}

/// Horizontal field `∂_j + Σ (coeff · monomial) ∂_target` in `dim` variables.
fn field(dim: usize, j: usize, extra: &[(usize, &[u32], &str)]) -> VectorField {
    let mut coeffs = vec![SparsePoly::zero(dim); dim];
    coeffs[j] = SparsePoly::one(dim);
    for &(target, exps, c) in extra {
        coeffs[target].add_term(exps.to_vec(), q(c));
    }
    VectorField::new(coeffs, 1).expect("catalog field")
}

/// Anisotropic Heisenberg group of dimension `2n+1`: one skew form with
/// `B_{j,n+j} = λ_j`, `λ = (1/2, 1, …, 1)`.
pub fn aniso_heisenberg_group(n: usize) -> Result<CarnotGroup> {
    if n == 0 {
        return Err(CarnotError::invalid("anisotropic Heisenberg group needs n ≥ 1"));
    }
    let m = 2 * n;
    let mut b = vec![vec![Rational::from_integer(0.into()); m]; m];
    for j in 0..n {
        let lam = if j == 0 { q("1/2") } else { q("1") };
        b[j][n + j] = lam.clone();
        b[n + j][j] = -lam;
    }
    CarnotGroup::step2(format!("aniso-heisenberg-2n[n={n}]"), m, vec![b])
}

const STEP2_PRESETS: &[&str] = &[
    "kaplan",
    "kaplan-sixteenth",
    "step2-alpha1",
    "step2-alpha2",
    "powersum-default",
    "composite-strata",
];

fn build() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    out.push(CatalogEntry {
        name: "euclidean-1d",
        group: euclidean("euclidean-1d", 1),
        presets: vec!["powersum-default", "composite-strata"],
        pure_generator_index: Some(1),
        note: "abelian ℝ¹; powersum-default is |x|",
        experimental: false,
    });
    out.push(CatalogEntry {
        name: "euclidean-2d",
        group: euclidean("euclidean-2d", 2),
        presets: vec!["powersum-default", "composite-strata"],
        pure_generator_index: Some(1),
        note: "abelian ℝ²; powersum-default is the Euclidean norm",
        experimental: false,
    });
    out.push(CatalogEntry {
        name: "heisenberg-h1",
        group: CarnotGroup::step2("heisenberg-h1", 2, vec![matrix(&[&["0", "1"], &["-1", "0"]])])
            .expect("h1"),
        presets: STEP2_PRESETS.to_vec(),
        pure_generator_index: None,
        note: "first Heisenberg group, X1 = ∂1 − (x2/2)∂t, X2 = ∂2 + (x1/2)∂t",
        experimental: false,
    });
    let j1 = matrix(&[
        &["0", "-1", "0", "0"],
        &["1", "0", "0", "0"],
        &["0", "0", "0", "-1"],
        &["0", "0", "1", "0"],
    ]);
    let j2 = matrix(&[
        &["0", "0", "-1", "0"],
        &["0", "0", "0", "1"],
        &["1", "0", "0", "0"],
        &["0", "-1", "0", "0"],
    ]);
    out.push(CatalogEntry {
        name: "htype-generic",
        group: CarnotGroup::step2("htype-generic", 4, vec![j1, j2]).expect("htype"),
        presets: STEP2_PRESETS.to_vec(),
        pure_generator_index: None,
        note: "H-type group on ℝ⁴ × ℝ² with anticommuting orthogonal complex structures J1, J2",
        experimental: false,
    });
    out.push(CatalogEntry {
        name: "aniso-heisenberg-2n",
        group: aniso_heisenberg_group(1).expect("aniso").with_name("aniso-heisenberg-2n"),
        presets: vec![
            "aniso-heisenberg",
            "step2-alpha1",
            "step2-alpha2",
            "kaplan",
            "powersum-default",
            "composite-strata",
        ],
        pure_generator_index: None,
        note: "anisotropic Heisenberg group H_2n(1/2, 1) with n = 1; default norm is the fundamental-solution norm",
        experimental: false,
    });
    out.push(CatalogEntry {
        name: "engel",
        group: CarnotGroup::from_fields(
            "engel",
            vec![2, 1, 1],
            vec![
                field(4, 0, &[]),
                field(4, 1, &[(2, &[1, 0, 0, 0], "1"), (3, &[2, 0, 0, 0], "1/2")]),
            ],
        )
        .expect("engel"),
        presets: vec!["powersum-default", "composite-strata"],
        pure_generator_index: Some(1),
        note: "Engel group, X1 = ∂1, X2 = ∂2 + x1∂3 + (x1²/2)∂4; other filiform algebras are not enumerated",
        experimental: false,
    });
    out.push(CatalogEntry {
        name: "kolmogorov-type",
        group: CarnotGroup::from_fields(
            "kolmogorov-type",
            vec![2, 1, 1],
            vec![
                field(4, 0, &[]),
                field(4, 1, &[(2, &[1, 0, 0, 0], "1"), (3, &[0, 0, 1, 0], "1")]),
            ],
        )
        .expect("kolmogorov"),
        presets: vec!["powersum-default", "composite-strata"],
        pure_generator_index: Some(1),
        note: "textbook ℝ⁴ realization X1 = ∂1, X2 = ∂2 + x1∂3 + x3∂4 (coordinate convention)",
        experimental: false,
    });
    out.push(CatalogEntry {
        name: "cartan",
        group: CarnotGroup::from_fields(
            "cartan",
            vec![2, 1, 2],
            vec![
                field(5, 0, &[]),
                field(
                    5,
                    1,
                    &[
                        (2, &[1, 0, 0, 0, 0], "1"),
                        (3, &[2, 0, 0, 0, 0], "1/2"),
                        (4, &[1, 1, 0, 0, 0], "1"),
                    ],
                ),
            ],
        )
        .expect("cartan"),
        presets: vec!["powersum-default", "composite-strata"],
        pure_generator_index: Some(1),
        note: "free step-3 group of rank 2, X2 = ∂2 + x1∂3 + (x1²/2)∂4 + x1x2∂5; coordinates are a convention choice",
        experimental: true,
    });
    out
}

fn all() -> &'static [CatalogEntry] {
    static CATALOG: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    CATALOG.get_or_init(build)
}

/// Catalog entries; experimental ones only on request.
pub fn list_entries(include_experimental: bool) -> Vec<&'static CatalogEntry> {
    all()
        .iter()
        .filter(|e| include_experimental || !e.experimental)
        .collect()
}

pub fn get_entry(name: &str) -> Result<&'static CatalogEntry> {
    if let Some(e) = all().iter().find(|e| e.name == name) {
        return Ok(e);
    }
    let suggestion = all()
        .iter()
        .map(|e| (strsim::damerau_levenshtein(name, e.name), e.name))
        .min()
        .filter(|(d, cand)| *d <= cand.len() / 2 + 1)
        .map(|(_, cand)| cand.to_string());
    Err(CarnotError::NotFound {
        name: name.to_string(),
        suggestion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PolyField;
    use crate::group::apply_vector_field;

    #[test]
    fn mandatory_entries_present() {
        let names: Vec<&str> = list_entries(false).iter().map(|e| e.name).collect();
        for want in [
            "euclidean-1d",
            "euclidean-2d",
            "heisenberg-h1",
            "htype-generic",
            "aniso-heisenberg-2n",
            "engel",
            "kolmogorov-type",
        ] {
            assert!(names.contains(&want), "{want}");
        }
        assert!(!names.contains(&"cartan"));
        assert!(list_entries(true).iter().any(|e| e.name == "cartan"));
    }

    #[test]
    fn heisenberg_entry() {
        let e = get_entry("heisenberg-h1").unwrap();
        assert_eq!((e.group.step(), e.group.dim()), (2, 3));
        let t = PolyField::new(SparsePoly::var(3, 2));
        let v = apply_vector_field(&e.group.horizontal()[0], &t, &[0.0, 3.0, 0.0]).unwrap();
        assert_eq!(v, -1.5);
    }

    #[test]
    fn engel_entry() {
        let e = get_entry("engel").unwrap();
        assert_eq!(e.group.weights(), &[1, 1, 2, 3]);
        assert_eq!(e.pure_generator_index, Some(1));
        let x4 = PolyField::new(SparsePoly::var(4, 3));
        let v = apply_vector_field(&e.group.horizontal()[1], &x4, &[2.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn pure_generators_are_pure() {
        for e in list_entries(true) {
            if let Some(j) = e.pure_generator_index {
                assert!(e.group.horizontal()[j - 1].pure_partial_witness(j - 1).is_ok(), "{}", e.name);
            }
        }
    }

    #[test]
    fn htype_structures_anticommute() {
        let e = get_entry("htype-generic").unwrap();
        let ms = e.group.step2_matrices().unwrap();
        let (a, b) = (ms[0].rows(), ms[1].rows());
        for i in 0..4 {
            for j in 0..4 {
                let mut anti = Rational::from_integer(0.into());
                let mut sq = Rational::from_integer(0.into());
                for k in 0..4 {
                    anti += &a[i][k] * &b[k][j] + &b[i][k] * &a[k][j];
                    sq += &a[i][k] * &a[k][j];
                }
                assert_eq!(anti, Rational::from_integer(0.into()));
                let minus_id = if i == j { q("-1") } else { q("0") };
                assert_eq!(sq, minus_id);
            }
        }
    }

    #[test]
    fn every_preset_builds() {
        for e in list_entries(true) {
            for p in &e.presets {
                e.norm(p).unwrap_or_else(|err| panic!("{} / {p}: {err}", e.name));
            }
        }
    }

    #[test]
    fn unknown_name_suggests_nearest() {
        match get_entry("heisenberg-h2") {
            Err(CarnotError::NotFound { suggestion, .. }) => {
                assert_eq!(suggestion.as_deref(), Some("heisenberg-h1"))
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(get_entry("no-such-group"), Err(CarnotError::NotFound { .. })));
    }
}
