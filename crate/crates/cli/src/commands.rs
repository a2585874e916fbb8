//! Command implementations. Each returns an `Outcome`: a report as a JSON
//! value (rendered canonically by the caller), an optional instance artifact
//! to write, and the process exit code.

use num_complex::Complex64;
use serde_json::{json, Value};

use starframe::algebra::{AlgebraElement, AlgebraShape, Tolerance};
use starframe::error::{Error, Result};
use starframe::frames::{self, BoundSide, FrameBounds, OperatorFamily, VerificationReport};
use starframe::hilbert::ModuleVector;
use starframe::morphisms;
use starframe::rng::SplitMix64;
use starframe::serial::{self, InstanceDto};
use starframe::tensor::{self, TensorLeg, TensorShape};

const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Outcome {
    pub report: Value,
    /// Constructed or generated instance text, with its destination path.
    pub artifact: Option<(String, String)>,
    pub exit: u8,
}

#[derive(Clone, Copy, Default)]
pub struct TolOverride {
    pub rel: Option<f64>,
    pub abs: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum ConstructKind {
    Parseval,
    Dual,
    ComposeLeft,
    ComposeRight,
    Tensor,
    Transport,
    QTensor,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum GenerateKind {
    Random,
    NearParseval,
    VectorFrame,
}

fn need<'a, T>(opt: &'a Option<T>, what: &str) -> Result<&'a T> {
    opt.as_ref()
        .ok_or_else(|| Error::Pattern(format!("instance is missing required field `{what}`")))
}

fn effective_tolerance(inst: &InstanceDto, ov: TolOverride) -> Result<Tolerance> {
    let base = match &inst.tolerance {
        Some(t) => serial::tolerance_from_dto(t, "tolerance")?,
        None => Tolerance::default(),
    };
    Tolerance::new(ov.rel.unwrap_or(base.rel), ov.abs.unwrap_or(base.abs))
}

fn side_str(side: BoundSide) -> &'static str {
    match side {
        BoundSide::Lower => "lower",
        BoundSide::Upper => "upper",
        BoundSide::Both => "both",
        BoundSide::None => "none",
    }
}

fn tol_value(tol: Tolerance) -> Value {
    json!({ "rel": tol.rel, "abs": tol.abs })
}

fn verdict_str(report: &VerificationReport) -> &'static str {
    if report.is_valid() {
        "valid"
    } else {
        "invalid"
    }
}

/// The shared verdict block of verify/construct reports.
fn verdict_value(report: &VerificationReport) -> Result<Value> {
    let witness = match &report.witness {
        Some(x) => serde_json::to_value(serial::vector_to_dto(x)).expect("vector serializes"),
        None => Value::Null,
    };
    let (defect, defect_min) = match &report.witness_defect {
        Some(d) => (
            serde_json::to_value(serial::elem_to_dto(d)).expect("element serializes"),
            Value::from(d.min_eigenvalue()?),
        ),
        None => (Value::Null, Value::Null),
    };
    Ok(json!({
        "verdict": verdict_str(report),
        "side": side_str(report.side),
        "margins": { "lower": report.lower_margins, "upper": report.upper_margins },
        "witness": witness,
        "witness_defect": defect,
        "witness_defect_min_eigenvalue": defect_min,
        "notes": report.notes,
    }))
}

fn merge(base: Value, extra: Value) -> Value {
    let (Value::Object(mut a), Value::Object(b)) = (base, extra) else {
        panic!("merge expects objects");
    };
    for (k, v) in b {
        a.insert(k, v);
    }
    Value::Object(a)
}

struct DecodedCore {
    inst: InstanceDto,
    shape: AlgebraShape,
    fam: OperatorFamily,
    tol: Tolerance,
}

fn decode_core(text: &str, ov: TolOverride) -> Result<DecodedCore> {
    let inst = serial::parse_instance(text)?;
    let tol = effective_tolerance(&inst, ov)?;
    let shape = serial::shape_from_dto(need(&inst.algebra, "algebra")?, "algebra")?;
    let fam = serial::family_from_dto(&shape, need(&inst.family, "family")?, "family")?;
    Ok(DecodedCore { inst, shape, fam, tol })
}

/// Like `decode_core`, but for directives whose family lives over the
/// lexicographic product of `algebra` and `right_algebra` rather than over
/// `algebra` alone.
fn decode_core_product(text: &str, ov: TolOverride) -> Result<DecodedCore> {
    let inst = serial::parse_instance(text)?;
    let tol = effective_tolerance(&inst, ov)?;
    let shape = serial::shape_from_dto(need(&inst.algebra, "algebra")?, "algebra")?;
    let rshape =
        serial::shape_from_dto(need(&inst.right_algebra, "right_algebra")?, "right_algebra")?;
    let ts = TensorShape::new(shape.clone(), rshape);
    let fam = serial::family_from_dto(ts.product(), need(&inst.family, "family")?, "family")?;
    Ok(DecodedCore { inst, shape, fam, tol })
}

pub fn cmd_verify(
    path: &str,
    text: &str,
    ov: TolOverride,
    seed_flag: Option<u64>,
    trials: usize,
) -> Result<Outcome> {
    let DecodedCore { inst, shape, fam, tol } = decode_core(text, ov)?;
    let bounds = serial::bounds_from_dto(&shape, need(&inst.bounds, "bounds")?, "bounds")?;
    let seed = seed_flag.or(inst.seed).unwrap_or(0);

    let report = frames::verify(&fam, &bounds, tol)?;
    let counterexample = frames::sampling_falsifier(&fam, &bounds, tol, seed, trials)?;
    if report.is_valid() {
        if let Some((x, defect)) = &counterexample {
            return Err(Error::Numeric(format!(
                "verifier accepted the bounds but a sampled vector violates them \
                 (defect eigenvalue {:.3e}); ‖x‖ = {:.3e}",
                defect.min_eigenvalue()?,
                starframe::hilbert::vector_norm(x)?,
            )));
        }
    }

    let falsifier = match &counterexample {
        Some((x, defect)) => json!({
            "trials": trials,
            "violation_found": true,
            "witness": serde_json::to_value(serial::vector_to_dto(x)).expect("vector serializes"),
            "defect_min_eigenvalue": defect.min_eigenvalue()?,
        }),
        None => json!({
            "trials": trials,
            "violation_found": false,
            "witness": null,
            "defect_min_eigenvalue": null,
        }),
    };

    let base = json!({
        "command": "verify",
        "version": VERSION,
        "instance": path,
        "tolerance": tol_value(tol),
        "seed": seed,
        "falsifier": falsifier,
        "timing_ms": null,
    });
    let exit = if report.is_valid() { 0 } else { 1 };
    Ok(Outcome { report: merge(base, verdict_value(&report)?), artifact: None, exit })
}

pub fn cmd_analyze(path: &str, text: &str, ov: TolOverride) -> Result<Outcome> {
    let DecodedCore { fam, tol, .. } = decode_core(text, ov)?;

    let analysis = frames::analyze(&fam)?;
    let transform_norm = frames::frame_transform(&fam)?.op_norm()?;
    let s_norm = analysis.frame_op.op_norm()?;
    let (a_opt, b_opt) = frames::optimal_scalar_bounds(&fam, tol)?;

    let mut notes: Vec<String> = Vec::new();
    let star = match frames::optimal_star_bounds(&fam, tol) {
        Ok((lo, hi)) => json!({
            "lower": serde_json::to_value(serial::elem_to_dto(&lo)).expect("element serializes"),
            "upper": serde_json::to_value(serial::elem_to_dto(&hi)).expect("element serializes"),
        }),
        Err(Error::NoLowerBound { factor, lambda_min }) => {
            notes.push(format!(
                "no invertible lower bound: factor {factor} has lambda_min = {lambda_min:.3e}"
            ));
            let hi = frames::optimal_star_upper(&fam)?;
            json!({
                "lower": null,
                "upper": serde_json::to_value(serial::elem_to_dto(&hi)).expect("element serializes"),
            })
        }
        Err(e) => return Err(e),
    };

    // λ_min(S) ≤ ‖S‖ = (optimal upper)², with the lower end equal to the
    // squared norm of the inverse of the optimal star lower bound when that
    // bound exists.
    let sc = tol.scale(s_norm);
    let sandwich = json!({
        "lambda_min": a_opt,
        "s_norm": s_norm,
        "squared_upper": b_opt,
        "holds": a_opt <= s_norm + sc && (s_norm - b_opt).abs() <= sc,
    });

    let report = json!({
        "command": "analyze",
        "version": VERSION,
        "instance": path,
        "tolerance": tol_value(tol),
        "frame_operator": serde_json::to_value(serial::operator_to_dto(&analysis.frame_op))
            .expect("operator serializes"),
        "spectra": analysis.spectra,
        "lambda_min": analysis.lambda_min,
        "lambda_max": analysis.lambda_max,
        "norms": { "frame_operator": s_norm, "transform": transform_norm },
        "optimal_scalar_bounds": [a_opt, b_opt],
        "optimal_star_bounds": star,
        "sandwich": sandwich,
        "notes": notes,
        "timing_ms": null,
    });
    Ok(Outcome { report, artifact: None, exit: 0 })
}

fn construct_pieces(
    kind: ConstructKind,
    core: &DecodedCore,
) -> Result<(AlgebraShape, OperatorFamily, FrameBounds, VerificationReport)> {
    let DecodedCore { inst, shape, fam, tol } = core;
    let tol = *tol;
    let bounds_in = || -> Result<FrameBounds> {
        serial::bounds_from_dto(shape, need(&inst.bounds, "bounds")?, "bounds")
    };
    match kind {
        ConstructKind::Parseval => {
            let (pfam, report) = frames::canonical_parseval(fam, tol)?;
            let one = AlgebraElement::identity(shape);
            Ok((shape.clone(), pfam, FrameBounds::star(one.clone(), one), report))
        }
        ConstructKind::Dual => {
            let dfam = frames::canonical_dual_type(fam, tol)?;
            let (a, b) = frames::optimal_scalar_bounds(&dfam, tol)?;
            let claimed = FrameBounds::scalar(a, b);
            let report = frames::verify(&dfam, &claimed, tol)?;
            Ok((shape.clone(), dfam, claimed, report))
        }
        ConstructKind::ComposeLeft | ConstructKind::ComposeRight => {
            let theta = serial::operator_from_dto(shape, need(&inst.theta, "theta")?, "theta")?;
            let bounds = bounds_in()?;
            let (fam2, claimed, report) = if kind == ConstructKind::ComposeRight {
                frames::compose_right(fam, &theta, &bounds, tol)?
            } else {
                frames::compose_left(fam, &theta, &bounds, tol)?
            };
            Ok((shape.clone(), fam2, claimed, report))
        }
        ConstructKind::Tensor => {
            let rshape =
                serial::shape_from_dto(need(&inst.right_algebra, "right_algebra")?, "right_algebra")?;
            let rfam = serial::family_from_dto(
                &rshape,
                need(&inst.right_family, "right_family")?,
                "right_family",
            )?;
            let bounds = bounds_in()?;
            let rbounds = serial::bounds_from_dto(
                &rshape,
                need(&inst.right_bounds, "right_bounds")?,
                "right_bounds",
            )?;
            let (tf, claimed, report) = tensor::family_tensor(fam, &bounds, &rfam, &rbounds, tol)?;
            let ts = TensorShape::new(shape.clone(), rshape);
            Ok((ts.product().clone(), tf, claimed, report))
        }
        ConstructKind::Transport => {
            let phi = serial::hom_from_dto(need(&inst.homomorphism, "homomorphism")?, "homomorphism")?;
            let bounds = bounds_in()?;
            let (tfam, claimed, report) = morphisms::transport_family(&phi, fam, &bounds, tol)?;
            Ok((phi.target().clone(), tfam, claimed, report))
        }
        ConstructKind::QTensor => {
            // For this directive `algebra` declares the left leg,
            // `right_algebra` the right leg, and the family (already decoded
            // by `decode_core_product`) lives over the product of the two.
            let rshape =
                serial::shape_from_dto(need(&inst.right_algebra, "right_algebra")?, "right_algebra")?;
            let ts = TensorShape::new(shape.clone(), rshape);
            let bounds = serial::bounds_from_dto(ts.product(), need(&inst.bounds, "bounds")?, "bounds")?;
            let leg = match need(&inst.q_leg, "q_leg")?.as_str() {
                "left" => TensorLeg::Left,
                "right" => TensorLeg::Right,
                other => {
                    return Err(Error::Pattern(format!(
                        "q_leg: expected \"left\" or \"right\", got {other:?}"
                    )))
                }
            };
            let leg_shape = match leg {
                TensorLeg::Left => ts.left(),
                TensorLeg::Right => ts.right(),
            };
            let q = serial::operator_from_dto(leg_shape, need(&inst.q, "q")?, "q")?;
            let (qfam, claimed, report) = tensor::q_tensor_compose(fam, &ts, &q, leg, &bounds, tol)?;
            Ok((ts.product().clone(), qfam, claimed, report))
        }
    }
}

pub fn cmd_construct(
    path: &str,
    text: &str,
    kind: ConstructKind,
    out_path: &str,
    ov: TolOverride,
) -> Result<Outcome> {
    let core = if kind == ConstructKind::QTensor {
        decode_core_product(text, ov)?
    } else {
        decode_core(text, ov)?
    };
    let (out_shape, out_fam, claimed, report) = construct_pieces(kind, &core)?;

    let directive = match kind {
        ConstructKind::Parseval => "parseval",
        ConstructKind::Dual => "dual",
        ConstructKind::ComposeLeft => "compose_left",
        ConstructKind::ComposeRight => "compose_right",
        ConstructKind::Tensor => "tensor",
        ConstructKind::Transport => "transport",
        ConstructKind::QTensor => "q_tensor",
    };

    let out_inst = InstanceDto {
        algebra: Some(serial::shape_to_dto(&out_shape)),
        family: Some(serial::family_to_dto(&out_fam)),
        bounds: Some(serial::bounds_to_dto(&claimed)),
        tolerance: core.inst.tolerance,
        seed: core.inst.seed,
        ..InstanceDto::default()
    };
    let artifact = serial::instance_to_string(&out_inst);

    let base = json!({
        "command": "construct",
        "directive": directive,
        "version": VERSION,
        "instance": path,
        "out": out_path,
        "tolerance": tol_value(core.tol),
        "claimed_bounds": serde_json::to_value(serial::bounds_to_dto(&claimed))
            .expect("bounds serialize"),
        "timing_ms": null,
    });
    let exit = if report.is_valid() { 0 } else { 1 };
    Ok(Outcome {
        report: merge(base, verdict_value(&report)?),
        artifact: Some((out_path.to_string(), artifact)),
        exit,
    })
}

pub fn cmd_generate(
    kind: GenerateKind,
    shape_dims: &[usize],
    rank: usize,
    members: usize,
    seed: u64,
    out_path: &str,
) -> Result<Outcome> {
    let shape = AlgebraShape::new(shape_dims.to_vec())?;
    if rank == 0 {
        return Err(Error::Pattern("rank must be at least 1".into()));
    }
    if members == 0 {
        return Err(Error::Pattern("members must be at least 1".into()));
    }
    let tol = Tolerance::default();
    let mut rng = SplitMix64::new(seed);

    let mut vectors: Option<Vec<ModuleVector>> = None;
    let (kind_str, fam) = match kind {
        GenerateKind::Random => ("random", frames::random_family(&shape, rank, members, &mut rng)?),
        GenerateKind::NearParseval => {
            ("near_parseval", frames::near_parseval_family(&shape, rank, members, &mut rng)?)
        }
        GenerateKind::VectorFrame => {
            // Scaled coordinate vectors keep the frame operator bounded away
            // from zero regardless of what the random draws do.
            let mut xs = Vec::with_capacity(rank + members);
            for j in 0..rank {
                xs.push(ModuleVector::unit(&shape, rank, j)?.scalar_mul(Complex64::new(0.5, 0.0)));
            }
            for _ in 0..members {
                xs.push(ModuleVector::random(&shape, rank, &mut rng)?);
            }
            let fam = frames::from_vector_frame(&xs)?;
            vectors = Some(xs);
            ("vector_frame", fam)
        }
    };

    let (a, b) = frames::optimal_scalar_bounds(&fam, tol)?;
    let bounds = FrameBounds::scalar(a, b);
    let inst = InstanceDto {
        algebra: Some(serial::shape_to_dto(&shape)),
        family: Some(serial::family_to_dto(&fam)),
        bounds: Some(serial::bounds_to_dto(&bounds)),
        vectors: vectors.map(|xs| xs.iter().map(serial::vector_to_dto).collect()),
        seed: Some(seed),
        ..InstanceDto::default()
    };
    let artifact = serial::instance_to_string(&inst);

    let report = json!({
        "command": "generate",
        "kind": kind_str,
        "version": VERSION,
        "out": out_path,
        "shape": shape.factor_dims(),
        "rank": rank,
        "members": members,
        "seed": seed,
        "optimal_scalar_bounds": [a, b],
        "timing_ms": null,
    });
    Ok(Outcome { report, artifact: Some((out_path.to_string(), artifact)), exit: 0 })
}
