//! Stable text encoding for instances and reports.
//!
//! Everything the CLI reads or writes goes through the DTOs in this module
//! plus the canonical JSON printer below. Canonical form means: object keys
//! sorted, floats rendered with 17 significant digits (exact round-trip for
//! every finite f64), complex numbers as two-element arrays `[re, im]`,
//! negative zero normalized to zero, fixed two-space indentation. The same
//! data always prints to the same bytes, which is what makes report files
//! diffable and golden tests meaningful.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{AlgebraElement, AlgebraShape, Tolerance};
use crate::error::{Error, Result};
use crate::frames::{FrameBounds, OperatorFamily};
use crate::hilbert::ModuleVector;
use crate::linalg::CMat;
use crate::morphisms::StarHomomorphism;
use crate::operators::AdjointableOperator;
use num_complex::Complex64;

/// Complex scalar on the wire: `[re, im]`.
pub type ComplexDto = [f64; 2];
/// Dense matrix as rows of complex scalars.
pub type MatrixDto = Vec<Vec<ComplexDto>>;
/// Algebra element as one matrix block per factor.
pub type ElementDto = Vec<MatrixDto>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeDto {
    pub factors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorDto {
    pub cod_rank: usize,
    /// `coeffs[i][j]` with `i` over the domain rank, `j` over the codomain.
    pub coeffs: Vec<Vec<ElementDto>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDto {
    pub dom_rank: usize,
    pub members: Vec<OperatorDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorDto {
    pub entries: Vec<ElementDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundsDto {
    Scalar { lower: f64, upper: f64 },
    Star { lower: ElementDto, upper: ElementDto },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomDto {
    pub source: Vec<usize>,
    pub target: Vec<usize>,
    pub multiplicity: Vec<Vec<usize>>,
    pub twists: Vec<MatrixDto>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceDto {
    pub rel: f64,
    pub abs: f64,
}

/// One self-contained problem instance. `algebra` and `family` are always
/// present; the optional fields carry whatever a particular command needs
/// (a second family for tensor products, a homomorphism for transport, an
/// operator for compositions, candidate bounds, tolerance overrides, a seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct InstanceDto {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algebra: Option<ShapeDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right_algebra: Option<ShapeDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right_family: Option<FamilyDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right_bounds: Option<BoundsDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homomorphism: Option<HomDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<OperatorDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<OperatorDto>,
    /// Which tensor leg `q` acts on: "left" or "right".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_leg: Option<String>,
    /// Module vectors a vector-frame family was induced from, when relevant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<VectorDto>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<ToleranceDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn bad(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Pattern(format!("{path}: {msg}"))
}

pub fn parse_instance(text: &str) -> Result<InstanceDto> {
    serde_json::from_str(text).map_err(|e| Error::Pattern(format!("instance parse error: {e}")))
}

pub fn instance_to_string(dto: &InstanceDto) -> String {
    canonical_json(&serde_json::to_value(dto).expect("instance serializes"))
}

// ---------------------------------------------------------------------------
// DTO <-> domain conversions
// ---------------------------------------------------------------------------

pub fn shape_to_dto(shape: &AlgebraShape) -> ShapeDto {
    ShapeDto { factors: shape.factor_dims().to_vec() }
}

pub fn shape_from_dto(dto: &ShapeDto, path: &str) -> Result<AlgebraShape> {
    AlgebraShape::new(dto.factors.clone()).map_err(|e| bad(path, e))
}

pub fn cmat_to_dto(m: &CMat) -> MatrixDto {
    (0..m.rows())
        .map(|r| {
            (0..m.cols())
                .map(|c| {
                    let z = m[(r, c)];
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

pub fn cmat_from_dto(dto: &MatrixDto, path: &str) -> Result<CMat> {
    let rows = dto.len();
    let cols = dto.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 {
        return Err(bad(path, "matrix must be nonempty"));
    }
    if dto.iter().any(|r| r.len() != cols) {
        return Err(bad(path, "matrix rows have unequal lengths"));
    }
    for row in dto {
        for &[re, im] in row {
            if !re.is_finite() || !im.is_finite() {
                return Err(bad(path, "matrix entries must be finite"));
            }
        }
    }
    Ok(CMat::from_fn(rows, cols, |r, c| {
        let [re, im] = dto[r][c];
        Complex64::new(re, im)
    }))
}

pub fn elem_to_dto(a: &AlgebraElement) -> ElementDto {
    a.blocks().iter().map(cmat_to_dto).collect()
}

pub fn elem_from_dto(shape: &AlgebraShape, dto: &ElementDto, path: &str) -> Result<AlgebraElement> {
    if dto.len() != shape.num_factors() {
        return Err(bad(
            path,
            format!("element has {} blocks, algebra has {} factors", dto.len(), shape.num_factors()),
        ));
    }
    let mut blocks = Vec::with_capacity(dto.len());
    for (k, b) in dto.iter().enumerate() {
        let m = cmat_from_dto(b, &format!("{path}[{k}]"))?;
        let n = shape.factor_dims()[k];
        if m.rows() != n || m.cols() != n {
            return Err(bad(
                &format!("{path}[{k}]"),
                format!("block is {}x{}, factor {k} is {n}x{n}", m.rows(), m.cols()),
            ));
        }
        blocks.push(m);
    }
    AlgebraElement::from_blocks(shape.clone(), blocks).map_err(|e| bad(path, e))
}

pub fn vector_to_dto(x: &ModuleVector) -> VectorDto {
    VectorDto { entries: x.entries().iter().map(elem_to_dto).collect() }
}

pub fn vector_from_dto(shape: &AlgebraShape, dto: &VectorDto, path: &str) -> Result<ModuleVector> {
    if dto.entries.is_empty() {
        return Err(bad(path, "vector must have positive rank"));
    }
    let entries = dto
        .entries
        .iter()
        .enumerate()
        .map(|(j, e)| elem_from_dto(shape, e, &format!("{path}.entries[{j}]")))
        .collect::<Result<Vec<_>>>()?;
    ModuleVector::new(entries).map_err(|e| bad(path, e))
}

pub fn operator_to_dto(t: &AdjointableOperator) -> OperatorDto {
    OperatorDto {
        cod_rank: t.cod_rank(),
        coeffs: t
            .coeffs()
            .iter()
            .map(|row| row.iter().map(elem_to_dto).collect())
            .collect(),
    }
}

pub fn operator_from_dto(
    shape: &AlgebraShape,
    dto: &OperatorDto,
    path: &str,
) -> Result<AdjointableOperator> {
    if dto.coeffs.is_empty() {
        return Err(bad(path, "operator must have positive domain rank"));
    }
    if dto.cod_rank == 0 {
        return Err(bad(path, "operator must have positive codomain rank"));
    }
    let mut grid = Vec::with_capacity(dto.coeffs.len());
    for (i, row) in dto.coeffs.iter().enumerate() {
        if row.len() != dto.cod_rank {
            return Err(bad(
                &format!("{path}.coeffs[{i}]"),
                format!("row has {} entries, cod_rank is {}", row.len(), dto.cod_rank),
            ));
        }
        let mut out = Vec::with_capacity(row.len());
        for (j, e) in row.iter().enumerate() {
            out.push(elem_from_dto(shape, e, &format!("{path}.coeffs[{i}][{j}]"))?);
        }
        grid.push(out);
    }
    AdjointableOperator::from_coeffs(grid).map_err(|e| bad(path, e))
}

pub fn family_to_dto(fam: &OperatorFamily) -> FamilyDto {
    FamilyDto {
        dom_rank: fam.dom_rank(),
        members: fam.members().iter().map(operator_to_dto).collect(),
    }
}

pub fn family_from_dto(shape: &AlgebraShape, dto: &FamilyDto, path: &str) -> Result<OperatorFamily> {
    if dto.members.is_empty() {
        return Err(bad(path, "family must be nonempty"));
    }
    let members = dto
        .members
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let op = operator_from_dto(shape, m, &format!("{path}.members[{i}]"))?;
            if op.dom_rank() != dto.dom_rank {
                return Err(bad(
                    &format!("{path}.members[{i}]"),
                    format!("domain rank {} differs from family dom_rank {}", op.dom_rank(), dto.dom_rank),
                ));
            }
            Ok(op)
        })
        .collect::<Result<Vec<_>>>()?;
    OperatorFamily::new(members).map_err(|e| bad(path, e))
}

pub fn bounds_to_dto(bounds: &FrameBounds) -> BoundsDto {
    match bounds {
        FrameBounds::Scalar { lower, upper } => BoundsDto::Scalar { lower: *lower, upper: *upper },
        FrameBounds::Star { lower, upper } => {
            BoundsDto::Star { lower: elem_to_dto(lower), upper: elem_to_dto(upper) }
        }
    }
}

pub fn bounds_from_dto(shape: &AlgebraShape, dto: &BoundsDto, path: &str) -> Result<FrameBounds> {
    match dto {
        BoundsDto::Scalar { lower, upper } => {
            if !lower.is_finite() || !upper.is_finite() {
                return Err(bad(path, "scalar bounds must be finite"));
            }
            Ok(FrameBounds::scalar(*lower, *upper))
        }
        BoundsDto::Star { lower, upper } => Ok(FrameBounds::star(
            elem_from_dto(shape, lower, &format!("{path}.lower"))?,
            elem_from_dto(shape, upper, &format!("{path}.upper"))?,
        )),
    }
}

pub fn hom_to_dto(phi: &StarHomomorphism) -> HomDto {
    HomDto {
        source: phi.source().factor_dims().to_vec(),
        target: phi.target().factor_dims().to_vec(),
        multiplicity: phi.multiplicity().to_vec(),
        twists: phi.twists().iter().map(cmat_to_dto).collect(),
    }
}

pub fn hom_from_dto(dto: &HomDto, path: &str) -> Result<StarHomomorphism> {
    let source = AlgebraShape::new(dto.source.clone()).map_err(|e| bad(&format!("{path}.source"), e))?;
    let target = AlgebraShape::new(dto.target.clone()).map_err(|e| bad(&format!("{path}.target"), e))?;
    let twists = dto
        .twists
        .iter()
        .enumerate()
        .map(|(l, t)| cmat_from_dto(t, &format!("{path}.twists[{l}]")))
        .collect::<Result<Vec<_>>>()?;
    StarHomomorphism::new(source, target, dto.multiplicity.clone(), twists)
        .map_err(|e| bad(path, e))
}

pub fn tolerance_from_dto(dto: &ToleranceDto, path: &str) -> Result<Tolerance> {
    Tolerance::new(dto.rel, dto.abs).map_err(|e| bad(path, e))
}

// ---------------------------------------------------------------------------
// Canonical JSON printer
// ---------------------------------------------------------------------------

/// Render a JSON value to canonical text: keys sorted, floats at 17
/// significant digits, arrays of scalars inline, two-space indentation,
/// trailing newline.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

/// 17 significant digits: enough to reproduce any finite f64 exactly on
/// re-parse. Negative zero is folded into zero first.
pub fn fmt_float(f: f64) -> String {
    let f = if f == 0.0 { 0.0 } else { f };
    format!("{f:.16e}")
}

fn is_scalar(v: &Value) -> bool {
    matches!(v, Value::Null | Value::Bool(_) | Value::Number(_) | Value::String(_))
}

fn push_indent(out: &mut String, levels: usize) {
    for _ in 0..levels {
        out.push_str("  ");
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                out.push_str(&fmt_float(n.as_f64().expect("finite JSON number")));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string encodes"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else if items.iter().all(is_scalar) {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    push_indent(out, indent + 1);
                    write_value(out, item, indent + 1);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                push_indent(out, indent);
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            // Sort keys explicitly so canonical form does not depend on the
            // map backing chosen by feature flags elsewhere in the build.
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                push_indent(out, indent + 1);
                out.push_str(&serde_json::to_string(k).expect("key encodes"));
                out.push_str(": ");
                write_value(out, &map[k.as_str()], indent + 1);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            push_indent(out, indent);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames;
    use crate::rng::SplitMix64;
    use serde_json::json;

    fn shape23() -> AlgebraShape {
        AlgebraShape::new(vec![2, 3]).unwrap()
    }

    #[test]
    fn float_format_is_17_digits_and_round_trips() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(0.0), "0.0000000000000000e0");
        assert_eq!(fmt_float(-0.0), "0.0000000000000000e0");
        assert_eq!(fmt_float(0.25), "2.5000000000000000e-1");
        for &x in &[0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -9.81, f64::MIN_POSITIVE] {
            let printed = fmt_float(x);
            let back: f64 = printed.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{printed}");
        }
    }

    #[test]
    fn canonical_json_sorts_keys_and_inlines_scalar_arrays() {
        let v = json!({"zeta": [1, 2, 3], "alpha": {"b": 2.0, "a": [true, null]}});
        let text = canonical_json(&v);
        let alpha = text.find("\"alpha\"").unwrap();
        let zeta = text.find("\"zeta\"").unwrap();
        assert!(alpha < zeta);
        assert!(text.contains("[1, 2, 3]"));
        assert!(text.contains("2.0000000000000000e0"));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn canonical_json_is_reparse_stable() {
        let v = json!({
            "x": [0.1, -0.0, 3.0e-12],
            "y": {"nested": [[1.5, 2.5], [0.0, -4.25]]},
            "s": "text with \"quotes\" and \\ slash",
            "n": 42u64,
        });
        let once = canonical_json(&v);
        let reparsed: Value = serde_json::from_str(&once).unwrap();
        let twice = canonical_json(&reparsed);
        assert_eq!(once, twice);
    }

    #[test]
    fn element_round_trips_through_dto() {
        let shape = shape23();
        let mut rng = SplitMix64::new(7);
        let a = AlgebraElement::random(&shape, &mut rng, crate::algebra::RandomKind::General).unwrap();
        let dto = elem_to_dto(&a);
        let back = elem_from_dto(&shape, &dto, "a").unwrap();
        assert_eq!(a.sub(&back).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn element_with_wrong_block_size_is_rejected() {
        let shape = shape23();
        let dto: ElementDto = vec![
            vec![vec![[1.0, 0.0]; 2]; 2],
            vec![vec![[0.0, 0.0]; 2]; 2], // 2x2 block where factor needs 3x3
        ];
        let err = elem_from_dto(&shape, &dto, "bounds.lower").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bounds.lower[1]"), "{msg}");
    }

    #[test]
    fn family_round_trips_through_canonical_text() {
        let shape = shape23();
        let mut rng = SplitMix64::new(11);
        let fam = frames::random_family(&shape, 2, 3, &mut rng).unwrap();
        let dto = family_to_dto(&fam);
        let text = canonical_json(&serde_json::to_value(&dto).unwrap());
        let parsed: FamilyDto = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, dto);
        let back = family_from_dto(&shape, &parsed, "family").unwrap();
        let s0 = frames::frame_operator(&fam).unwrap().flatten();
        let s1 = frames::frame_operator(&back).unwrap().flatten();
        for k in 0..shape.num_factors() {
            assert_eq!(s0.factor(k).sub(s1.factor(k)).max_abs(), 0.0);
        }
    }

    #[test]
    fn bounds_dto_tags_scalar_and_star() {
        let shape = shape23();
        let scalar = FrameBounds::scalar(0.5, 2.0);
        let v = serde_json::to_value(bounds_to_dto(&scalar)).unwrap();
        assert_eq!(v["kind"], "scalar");
        let star = FrameBounds::star(
            AlgebraElement::identity(&shape),
            AlgebraElement::identity(&shape).scalar_mul(Complex64::new(2.0, 0.0)),
        );
        let v = serde_json::to_value(bounds_to_dto(&star)).unwrap();
        assert_eq!(v["kind"], "star");
        let back = bounds_from_dto(&shape, &serde_json::from_value(v).unwrap(), "bounds").unwrap();
        match back {
            FrameBounds::Star { lower, .. } => {
                assert_eq!(lower.sub(&AlgebraElement::identity(&shape)).unwrap().max_abs(), 0.0)
            }
            _ => panic!("expected star bounds"),
        }
    }

    #[test]
    fn hom_round_trips_and_revalidates() {
        let source = shape23();
        let mut rng = SplitMix64::new(3);
        let phi = crate::morphisms::random_surjective_hom(&source, &mut rng).unwrap();
        let dto = hom_to_dto(&phi);
        let text = canonical_json(&serde_json::to_value(&dto).unwrap());
        let parsed: HomDto = serde_json::from_str(&text).unwrap();
        let back = hom_from_dto(&parsed, "homomorphism").unwrap();
        assert_eq!(back.source().factor_dims(), phi.source().factor_dims());
        assert_eq!(back.target().factor_dims(), phi.target().factor_dims());
        assert_eq!(back.multiplicity(), phi.multiplicity());
    }

    #[test]
    fn non_unitary_twist_fails_on_parse() {
        let dto = HomDto {
            source: vec![2],
            target: vec![2],
            multiplicity: vec![vec![1]],
            twists: vec![vec![
                vec![[2.0, 0.0], [0.0, 0.0]],
                vec![[0.0, 0.0], [1.0, 0.0]],
            ]],
        };
        assert!(hom_from_dto(&dto, "homomorphism").is_err());
    }

    #[test]
    fn instance_with_unknown_geometry_reports_path() {
        let text = r#"{"algebra": {"factors": [2]}, "family": {"dom_rank": 1, "members": [
            {"cod_rank": 1, "coeffs": [[ [[[[1.0, 0.0]]]] ]]}
        ]}}"#;
        let inst = parse_instance(text).unwrap();
        let shape = shape_from_dto(inst.algebra.as_ref().unwrap(), "algebra").unwrap();
        // Declared algebra is M_2 but the lone coefficient block is 1x1.
        let err = family_from_dto(&shape, inst.family.as_ref().unwrap(), "family").unwrap_err();
        assert!(err.to_string().contains("family.members[0].coeffs[0][0]"), "{err}");
    }

    #[test]
    fn instance_serialization_is_byte_deterministic() {
        let shape = shape23();
        let mut rng = SplitMix64::new(99);
        let fam = frames::near_parseval_family(&shape, 2, 4, &mut rng).unwrap();
        let inst = InstanceDto {
            algebra: Some(shape_to_dto(&shape)),
            family: Some(family_to_dto(&fam)),
            bounds: Some(BoundsDto::Scalar { lower: 0.5, upper: 1.5 }),
            seed: Some(99),
            ..InstanceDto::default()
        };
        let a = instance_to_string(&inst);
        let b = instance_to_string(&parse_instance(&a).unwrap());
        assert_eq!(a, b);
        assert!(a.contains("\"seed\": 99"));
    }

    #[test]
    fn parse_error_carries_location() {
        let err = parse_instance("{\"algebra\": {\"factors\": [2,]}}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line") && msg.contains("column"), "{msg}");
    }
}

