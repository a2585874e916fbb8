//! Drives every `construct` directive through the compiled binary, including
//! the instance-file fields each one decodes (`theta`, `right_algebra`,
//! `right_family`, `right_bounds`, `homomorphism`, `q`, `q_leg`), and checks
//! that each produced artifact verifies on its own.

use std::path::PathBuf;
use std::process::Command;

use num_complex::Complex64;
use starframe::algebra::{AlgebraShape, Tolerance};
use starframe::frames::{self, FrameBounds, OperatorFamily};
use starframe::morphisms;
use starframe::operators::AdjointableOperator;
use starframe::rng::SplitMix64;
use starframe::serial::{self, InstanceDto};
use starframe::tensor::TensorShape;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn dir() -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("directives");
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_starframe"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("binary exits normally"),
        out.stdout,
        String::from_utf8(out.stderr).expect("stderr is utf-8"),
    )
}

fn write_instance(name: &str, dto: &InstanceDto) -> String {
    let path = dir().join(name);
    std::fs::write(&path, serial::instance_to_string(dto)).unwrap();
    path.to_str().unwrap().to_owned()
}

/// Runs `construct --directive <d>` on the given instance, expects success,
/// then verifies the written artifact with the default falsifier.
fn construct_and_verify(directive: &str, instance: &str) {
    let out = dir().join(format!("{directive}_out.json"));
    let out = out.to_str().unwrap();
    let (code, stdout, stderr) = run_cli(&[
        "construct", "--directive", directive, "--instance", instance, "--out", out,
    ]);
    assert_eq!(code, 0, "{directive}: construct failed: {stderr}");
    let report: serde_json::Value = serde_json::from_slice(&stdout).unwrap();
    assert_eq!(report["verdict"], "valid", "{directive}: claimed bounds did not verify");

    let (code, stdout, stderr) = run_cli(&["verify", "--instance", out]);
    assert_eq!(code, 0, "{directive}: artifact failed to verify: {stderr}");
    let report: serde_json::Value = serde_json::from_slice(&stdout).unwrap();
    assert_eq!(report["verdict"], "valid", "{directive}: artifact verdict");
}

/// An invertible endomorphism with sigma_min >= 1 by construction.
fn well_conditioned(
    shape: &AlgebraShape,
    rank: usize,
    rng: &mut SplitMix64,
) -> AdjointableOperator {
    let g = AdjointableOperator::random(shape, rank, rank, rng).unwrap();
    let ident = AdjointableOperator::identity(shape, rank).unwrap();
    ident
        .scalar_mul(c(1.0 + 0.2 * g.op_norm().unwrap()))
        .add(&g.scalar_mul(c(0.2)))
        .unwrap()
}

fn base_instance(
    shape: &AlgebraShape,
    fam: &OperatorFamily,
) -> InstanceDto {
    let (a, b) = frames::optimal_scalar_bounds(fam, tol()).unwrap();
    InstanceDto {
        algebra: Some(serial::shape_to_dto(shape)),
        family: Some(serial::family_to_dto(fam)),
        bounds: Some(serial::bounds_to_dto(&FrameBounds::scalar(a, b))),
        ..Default::default()
    }
}

#[test]
fn compose_directives_decode_theta_from_the_instance() {
    let mut rng = SplitMix64::new(31);
    let shape = AlgebraShape::new(vec![2]).unwrap();
    let fam = frames::random_family(&shape, 2, 3, &mut rng).unwrap();
    let theta = well_conditioned(&shape, 2, &mut rng);

    let mut inst = base_instance(&shape, &fam);
    inst.theta = Some(serial::operator_to_dto(&theta));
    let path = write_instance("compose.json", &inst);
    construct_and_verify("compose_right", &path);
    construct_and_verify("compose_left", &path);
}

#[test]
fn tensor_directive_decodes_the_right_leg() {
    let mut rng = SplitMix64::new(37);
    let lshape = AlgebraShape::new(vec![2]).unwrap();
    let rshape = AlgebraShape::new(vec![1, 2]).unwrap();
    let lfam = frames::random_family(&lshape, 2, 3, &mut rng).unwrap();
    let rfam = frames::random_family(&rshape, 1, 2, &mut rng).unwrap();

    let mut inst = base_instance(&lshape, &lfam);
    let (ra, rb) = frames::optimal_scalar_bounds(&rfam, tol()).unwrap();
    inst.right_algebra = Some(serial::shape_to_dto(&rshape));
    inst.right_family = Some(serial::family_to_dto(&rfam));
    inst.right_bounds = Some(serial::bounds_to_dto(&FrameBounds::scalar(ra, rb)));
    let path = write_instance("tensor.json", &inst);
    construct_and_verify("tensor", &path);
}

#[test]
fn transport_directive_decodes_the_homomorphism() {
    let mut rng = SplitMix64::new(41);
    let shape = AlgebraShape::new(vec![2, 3]).unwrap();
    let fam = frames::random_family(&shape, 2, 3, &mut rng).unwrap();
    let phi = morphisms::random_surjective_hom(&shape, &mut rng).unwrap();

    let mut inst = base_instance(&shape, &fam);
    inst.homomorphism = Some(serial::hom_to_dto(&phi));
    let path = write_instance("transport.json", &inst);
    construct_and_verify("transport", &path);
}

#[test]
fn q_tensor_directive_decodes_q_on_either_leg() {
    let mut rng = SplitMix64::new(43);
    let lshape = AlgebraShape::new(vec![2]).unwrap();
    let rshape = AlgebraShape::new(vec![1, 2]).unwrap();
    let ts = TensorShape::new(lshape.clone(), rshape.clone());
    let fam = frames::random_family(ts.product(), 2, 3, &mut rng).unwrap();

    let mut inst = base_instance(ts.product(), &fam);
    // The product family is declared with the two legs, not its own algebra.
    inst.algebra = Some(serial::shape_to_dto(&lshape));
    inst.right_algebra = Some(serial::shape_to_dto(&rshape));

    let q_left = well_conditioned(&lshape, 1, &mut rng);
    inst.q = Some(serial::operator_to_dto(&q_left));
    inst.q_leg = Some("left".to_owned());
    let path = write_instance("q_tensor_left.json", &inst);
    construct_and_verify("q_tensor", &path);

    let q_right = well_conditioned(&rshape, 2, &mut rng);
    inst.q = Some(serial::operator_to_dto(&q_right));
    inst.q_leg = Some("right".to_owned());
    let path = write_instance("q_tensor_right.json", &inst);
    construct_and_verify("q_tensor", &path);

    // An unknown leg is malformed input, not a crash.
    inst.q_leg = Some("middle".to_owned());
    let path = write_instance("q_tensor_bad.json", &inst);
    let out = dir().join("q_tensor_bad_out.json");
    let (code, _, stderr) = run_cli(&[
        "construct", "--directive", "q_tensor", "--instance", path.as_str(), "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "unknown q_leg must be rejected as malformed");
    assert!(stderr.contains("q_leg"), "stderr should name the bad field: {stderr}");
}
