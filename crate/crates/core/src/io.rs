//! JSON formats for groups, norms and measure specs.
//!
//! Structural errors found after parsing are reported with the line of the
//! offending entry in the source text.

use serde::{Deserialize, Serialize};

use crate::catalog::get_entry;
use crate::error::{CarnotError, Result};
use crate::group::{CarnotGroup, VectorField};
use crate::measure::MeasureSpec;
use crate::poly::{format_rational, parse_rational, Rational, SparsePoly};
use crate::quasinorm::{preset, QuasiNorm, QuasiNormSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Integer(i64),
    Text(String),
}

impl Coefficient {
    fn rational(&self) -> Result<Rational> {
        match self {
            Coefficient::Integer(v) => Ok(Rational::from_integer((*v).into())),
            Coefficient::Text(s) => parse_rational(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialTerm {
    pub exponents: Vec<u32>,
    pub coeff: Coefficient,
}

/// The coefficient of `∂_{targetCoord}` (1-based) in one horizontal field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FieldComponent {
    pub target_coord: usize,
    pub monomials: Vec<MonomialTerm>,
}

/// A norm given either by preset name or in full.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormRef {
    Preset(String),
    Spec(QuasiNormSpec),
}

impl NormRef {
    pub fn resolve(&self, group: &CarnotGroup) -> Result<QuasiNormSpec> {
        match self {
            NormRef::Preset(name) => preset(name, group),
            NormRef::Spec(s) => Ok(s.clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            NormRef::Preset(name) => name.clone(),
            NormRef::Spec(s) => s.variant_name().to_string(),
        }
    }
}

/// Group file. Step-2 groups give `step2Matrices` as rational strings; other
/// groups list each horizontal field as its nonzero components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GroupFile {
    pub name: String,
    pub stratum_dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step2_matrices: Option<Vec<Vec<Vec<Coefficient>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizontal_fields: Option<Vec<Vec<FieldComponent>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormRef>,
}

#[derive(Clone, Debug)]
pub struct LoadedGroup {
    pub group: CarnotGroup,
    pub norm: Option<QuasiNormSpec>,
}

fn parse_error(what: &str, e: serde_json::Error) -> CarnotError {
    CarnotError::Parse {
        what: what.to_string(),
        message: format!("line {}, column {}: {e}", e.line(), e.column()),
    }
}

/// Adds the source line to a structural error's location path.
fn with_line(text: &str, prefix: &str, e: CarnotError) -> CarnotError {
    match e {
        CarnotError::Structure { message, location } => {
            let path = location.map(|l| format!("{prefix}{l}"));
            let line = path.as_deref().and_then(|p| locate(text, p)).map(|(l, _)| l);
            let location = match (line, path) {
                (Some(l), Some(p)) => Some(format!("line {l}, {p}")),
                (None, p) => p,
                (Some(l), None) => Some(format!("line {l}")),
            };
            CarnotError::Structure { message, location }
        }
        other => other,
    }
}

fn structure_at(text: &str, path: &str, message: String) -> CarnotError {
    with_line(
        text,
        "",
        CarnotError::Structure {
            message,
            location: Some(path.to_string()),
        },
    )
}

fn build_group(file: &GroupFile, text: &str, prefix: &str) -> Result<CarnotGroup> {
    match (&file.step2_matrices, &file.horizontal_fields) {
        (Some(_), Some(_)) => Err(structure_at(
            text,
            &format!("{prefix}horizontalFields"),
            "give either step2Matrices or horizontalFields, not both".into(),
        )),
        (None, None) => Err(structure_at(
            text,
            &format!("{prefix}stratumDims"),
            "group needs step2Matrices or horizontalFields".into(),
        )),
        (Some(mats), None) => {
            let mut exact = Vec::with_capacity(mats.len());
            for (k, m) in mats.iter().enumerate() {
                let mut rows = Vec::with_capacity(m.len());
                for (i, r) in m.iter().enumerate() {
                    let mut row = Vec::with_capacity(r.len());
                    for (j, c) in r.iter().enumerate() {
                        row.push(c.rational().map_err(|e| {
                            structure_at(text, &format!("{prefix}step2Matrices[{k}][{i}][{j}]"), e.to_string())
                        })?);
                    }
                    rows.push(row);
                }
                exact.push(rows);
            }
            let n1 = exact.first().map_or(0, |m| m.len());
            if file.stratum_dims != [n1, exact.len()] {
                return Err(structure_at(
                    text,
                    &format!("{prefix}stratumDims"),
                    format!(
                        "stratumDims {:?} disagree with {} matrices of size {n1}",
                        file.stratum_dims,
                        exact.len()
                    ),
                ));
            }
            CarnotGroup::step2(file.name.clone(), n1, exact).map_err(|e| with_line(text, prefix, e))
        }
        (None, Some(fields)) => {
            let n: usize = file.stratum_dims.iter().sum();
            let mut out = Vec::with_capacity(fields.len());
            for (j, comps) in fields.iter().enumerate() {
                let mut coeffs = vec![SparsePoly::zero(n); n];
                for (c, comp) in comps.iter().enumerate() {
                    let here = format!("{prefix}horizontalFields[{j}][{c}]");
                    if comp.target_coord == 0 || comp.target_coord > n {
                        return Err(structure_at(
                            text,
                            &here,
                            format!("targetCoord {} outside 1..={n}", comp.target_coord),
                        ));
                    }
                    for (t, m) in comp.monomials.iter().enumerate() {
                        if m.exponents.len() != n {
                            return Err(structure_at(
                                text,
                                &format!("{here}.monomials[{t}]"),
                                format!("monomial has {} exponents, expected {n}", m.exponents.len()),
                            ));
                        }
                        let q = m
                            .coeff
                            .rational()
                            .map_err(|e| structure_at(text, &format!("{here}.monomials[{t}]"), e.to_string()))?;
                        coeffs[comp.target_coord - 1] =
                            &coeffs[comp.target_coord - 1] + &SparsePoly::monomial(m.exponents.clone(), q);
                    }
                }
                out.push(VectorField::new(coeffs, 1).map_err(|e| with_line(text, prefix, e))?);
            }
            CarnotGroup::from_fields(file.name.clone(), file.stratum_dims.clone(), out)
                .map_err(|e| with_line(text, prefix, e))
        }
    }
}

/// Parses and validates a group file, including its optional norm.
pub fn parse_group_file(text: &str) -> Result<LoadedGroup> {
    let file: GroupFile = serde_json::from_str(text).map_err(|e| parse_error("group file", e))?;
    let group = build_group(&file, text, "")?;
    let norm = match &file.norm {
        None => None,
        Some(r) => {
            let spec = r.resolve(&group).map_err(|e| locate_message(text, "norm", e))?;
            QuasiNorm::new(spec.clone(), &group).map_err(|e| locate_message(text, "norm", e))?;
            Some(spec)
        }
    };
    Ok(LoadedGroup { group, norm })
}

fn locate_message(text: &str, path: &str, e: CarnotError) -> CarnotError {
    match locate(text, path) {
        Some((l, _)) => CarnotError::Structure {
            message: e.to_string(),
            location: Some(format!("line {l}, {path}")),
        },
        None => e,
    }
}

/// Group file for an existing group: matrices for step 2, fields otherwise.
pub fn export_group(group: &CarnotGroup, norm: Option<NormRef>) -> GroupFile {
    let (step2_matrices, horizontal_fields) = match group.step2_matrices() {
        Some(ms) => (
            Some(
                ms.iter()
                    .map(|m| {
                        m.rows()
                            .iter()
                            .map(|r| r.iter().map(|q| Coefficient::Text(format_rational(q))).collect())
                            .collect()
                    })
                    .collect(),
            ),
            None,
        ),
        None => (
            None,
            Some(
                group
                    .horizontal()
                    .iter()
                    .map(|x| {
                        x.coeffs()
                            .iter()
                            .enumerate()
                            .filter(|(_, c)| !c.is_zero())
                            .map(|(k, c)| FieldComponent {
                                target_coord: k + 1,
                                monomials: c
                                    .terms()
                                    .map(|(e, q)| MonomialTerm {
                                        exponents: e.clone(),
                                        coeff: Coefficient::Text(format_rational(q)),
                                    })
                                    .collect(),
                            })
                            .collect()
                    })
                    .collect(),
            ),
        ),
    };
    GroupFile {
        name: group.name().to_string(),
        stratum_dims: group.stratification().stratum_dims().to_vec(),
        step2_matrices,
        horizontal_fields,
        norm,
    }
}

/// A group by catalog name or inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    Catalog(String),
    Inline(Box<GroupFile>),
}

/// Group, norm and measure parameters in one file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SpecFile {
    pub group: GroupRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormRef>,
    pub a: f64,
    pub p: f64,
}

#[derive(Clone, Debug)]
pub struct ResolvedSpec {
    pub measure: MeasureSpec,
    pub group_label: String,
    pub norm_label: String,
}

/// Resolves group and norm references and validates the measure.
pub fn resolve_spec(file: &SpecFile, text: Option<&str>) -> Result<ResolvedSpec> {
    let text = text.unwrap_or("");
    let (group, inline_norm, group_label) = match &file.group {
        GroupRef::Catalog(name) => {
            let e = get_entry(name)?;
            (e.group.clone(), Some(NormRef::Preset(e.default_preset().to_string())), name.clone())
        }
        GroupRef::Inline(g) => (build_group(g, text, "group.")?, g.norm.clone(), g.name.clone()),
    };
    let norm_ref = file
        .norm
        .clone()
        .or(inline_norm)
        .ok_or_else(|| CarnotError::invalid("spec names no norm"))?;
    let spec = norm_ref.resolve(&group)?;
    let norm = QuasiNorm::new(spec, &group)?;
    let measure = MeasureSpec::new(group, norm, file.a, file.p)?;
    Ok(ResolvedSpec {
        measure,
        group_label,
        norm_label: norm_ref.label(),
    })
}

pub fn parse_spec_file(text: &str) -> Result<ResolvedSpec> {
    let file: SpecFile = serde_json::from_str(text).map_err(|e| parse_error("spec file", e))?;
    resolve_spec(&file, Some(text))
}

#[derive(Clone, Debug, PartialEq)]
enum Seg {
    Key(String),
    Index(usize),
}

fn split_path(path: &str) -> Vec<Seg> {
    let mut out = Vec::new();
    for part in path.split('.') {
        let (key, rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if !key.is_empty() {
            out.push(Seg::Key(key.to_string()));
        }
        for idx in rest.split('[').filter(|s| !s.is_empty()) {
            if let Ok(i) = idx.trim_end_matches(']').parse() {
                out.push(Seg::Index(i));
            }
        }
    }
    out
}

/// 1-based (line, column) of the value at `path` (`a.b[2][0]` syntax) in a
/// syntactically valid JSON text.
pub fn locate(text: &str, path: &str) -> Option<(usize, usize)> {
    let b = text.as_bytes();
    let mut i = skip_ws(b, 0);
    for seg in split_path(path) {
        i = match seg {
            Seg::Key(k) => member(b, i, &k)?,
            Seg::Index(n) => element(b, i, n)?,
        };
    }
    let line = b[..i].iter().filter(|&&c| c == b'\n').count() + 1;
    let col = i - b[..i].iter().rposition(|&c| c == b'\n').map_or(0, |p| p + 1) + 1;
    Some((line, col))
}

fn skip_ws(b: &[u8], mut i: usize) -> usize {
    while i < b.len() && b[i].is_ascii_whitespace() {
        i += 1;
    }
    i
}

fn skip_string(b: &[u8], mut i: usize) -> Option<usize> {
    i += 1;
    while i < b.len() {
        match b[i] {
            b'\\' => i += 2,
            b'"' => return Some(i + 1),
            _ => i += 1,
        }
    }
    None
}

fn skip_value(b: &[u8], i: usize) -> Option<usize> {
    match *b.get(i)? {
        b'"' => skip_string(b, i),
        b'{' | b'[' => {
            let mut depth = 0usize;
            let mut j = i;
            while j < b.len() {
                match b[j] {
                    b'"' => {
                        j = skip_string(b, j)?;
                        continue;
                    }
                    b'{' | b'[' => depth += 1,
                    b'}' | b']' => {
                        depth -= 1;
                        if depth == 0 {
                            return Some(j + 1);
                        }
                    }
                    _ => {}
                }
                j += 1;
            }
            None
        }
        _ => {
            let mut j = i;
            while j < b.len() && !matches!(b[j], b',' | b'}' | b']') && !b[j].is_ascii_whitespace() {
                j += 1;
            }
            Some(j)
        }
    }
}

fn member(b: &[u8], i: usize, key: &str) -> Option<usize> {
    if *b.get(i)? != b'{' {
        return None;
    }
    let mut j = skip_ws(b, i + 1);
    while j < b.len() && b[j] == b'"' {
        let end = skip_string(b, j)?;
        let name: String = serde_json::from_slice(&b[j..end]).ok()?;
        j = skip_ws(b, end);
        if b.get(j) != Some(&b':') {
            return None;
        }
        j = skip_ws(b, j + 1);
        if name == key {
            return Some(j);
        }
        j = skip_ws(b, skip_value(b, j)?);
        if b.get(j) == Some(&b',') {
            j = skip_ws(b, j + 1);
        }
    }
    None
}

fn element(b: &[u8], i: usize, n: usize) -> Option<usize> {
    if *b.get(i)? != b'[' {
        return None;
    }
    let mut j = skip_ws(b, i + 1);
    for _ in 0..n {
        j = skip_ws(b, skip_value(b, j)?);
        if b.get(j) != Some(&b',') {
            return None;
        }
        j = skip_ws(b, j + 1);
    }
    (j < b.len() && b[j] != b']').then_some(j)
}
