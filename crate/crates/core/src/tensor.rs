//! Exterior tensor products of algebras, module vectors, operators, and
//! operator families.
//!
//! The product of ⊕_k M_{n_k} and ⊕_l M_{m_l} is ⊕_{(k,l)} M_{n_k·m_l} with
//! the factor pairs in lexicographic order, left index major. Entries of
//! product-module vectors and members of product families use the same
//! ordering, so serialized artifacts compare bit-stably across runs.

use num_complex::Complex64;

use crate::algebra::{AlgebraElement, AlgebraShape, Tolerance};
use crate::error::{Error, Result};
use crate::frames::{self, FrameBounds, OperatorFamily, VerificationReport};
use crate::hilbert::ModuleVector;
use crate::linalg;
use crate::operators::AdjointableOperator;

/// The two algebra shapes being combined and their product shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorShape {
    left: AlgebraShape,
    right: AlgebraShape,
    product: AlgebraShape,
}

impl TensorShape {
    pub fn new(left: AlgebraShape, right: AlgebraShape) -> Self {
        let dims: Vec<usize> = left
            .factor_dims()
            .iter()
            .flat_map(|&n| right.factor_dims().iter().map(move |&m| n * m))
            .collect();
        let product = AlgebraShape::new(dims).expect("product of valid shapes is valid");
        TensorShape { left, right, product }
    }

    pub fn left(&self) -> &AlgebraShape {
        &self.left
    }

    pub fn right(&self) -> &AlgebraShape {
        &self.right
    }

    pub fn product(&self) -> &AlgebraShape {
        &self.product
    }

    /// (left factor, right factor) provenance of each product factor.
    pub fn factor_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.left.num_factors())
            .flat_map(|k| (0..self.right.num_factors()).map(move |l| (k, l)))
            .collect()
    }
}

/// a⊗b: product factor (k,l) is the Kronecker product of a's block k with
/// b's block l.
pub fn elem_tensor(a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
    let ts = TensorShape::new(a.shape().clone(), b.shape().clone());
    let blocks = a
        .blocks()
        .iter()
        .flat_map(|ab| b.blocks().iter().map(move |bb| ab.kron(bb)))
        .collect();
    AlgebraElement::from_blocks(ts.product, blocks).expect("kron blocks match product shape")
}

/// x⊗y: entry (i,j) of the product module is x_i⊗y_j, lexicographic.
pub fn vector_tensor(x: &ModuleVector, y: &ModuleVector) -> ModuleVector {
    let entries: Vec<AlgebraElement> = x
        .entries()
        .iter()
        .flat_map(|xi| y.entries().iter().map(move |yj| elem_tensor(xi, yj)))
        .collect();
    ModuleVector::new(entries).expect("elementary tensor entries share the product shape")
}

/// S⊗T, acting as (S⊗T)(x⊗y) = Sx⊗Ty on elementary tensors.
pub fn op_tensor(s: &AdjointableOperator, t: &AdjointableOperator) -> AdjointableOperator {
    let m2 = t.dom_rank();
    let c2 = t.cod_rank();
    let mut coeffs = Vec::with_capacity(s.dom_rank() * m2);
    for i1 in 0..s.dom_rank() {
        for i2 in 0..m2 {
            let mut row = Vec::with_capacity(s.cod_rank() * c2);
            for j1 in 0..s.cod_rank() {
                for j2 in 0..c2 {
                    row.push(elem_tensor(s.coeff(i1, j1), t.coeff(i2, j2)));
                }
            }
            coeffs.push(row);
        }
    }
    AdjointableOperator::from_coeffs(coeffs).expect("tensor coefficient grid is rectangular")
}

fn star_parts(
    bounds: &FrameBounds,
    shape: &AlgebraShape,
) -> Result<(AlgebraElement, AlgebraElement)> {
    let star = match bounds {
        FrameBounds::Scalar { .. } => frames::scalar_to_star(bounds, shape)?,
        FrameBounds::Star { .. } => bounds.clone(),
    };
    match star {
        FrameBounds::Star { lower, upper } => Ok((lower, upper)),
        FrameBounds::Scalar { .. } => unreachable!(),
    }
}

/// All pairwise tensors {Λ_i⊗Γ_j}: the product family has frame operator
/// S_Λ⊗S_Γ and admits the bound pair (A⊗C, B⊗D). Both input pairs must
/// verify; the claim is re-verified on the result.
pub fn family_tensor(
    fam_left: &OperatorFamily,
    bounds_left: &FrameBounds,
    fam_right: &OperatorFamily,
    bounds_right: &FrameBounds,
    tol: Tolerance,
) -> Result<(OperatorFamily, FrameBounds, VerificationReport)> {
    for (fam, bounds, name) in [
        (fam_left, bounds_left, "left"),
        (fam_right, bounds_right, "right"),
    ] {
        let report = frames::verify(fam, bounds, tol)?;
        if !report.is_valid() {
            return Err(Error::MalformedBounds(format!(
                "family_tensor: {name} bounds do not verify for the {name} family"
            )));
        }
    }
    let (a, b) = star_parts(bounds_left, fam_left.shape())?;
    let (c, d) = star_parts(bounds_right, fam_right.shape())?;
    let members: Vec<AdjointableOperator> = fam_left
        .members()
        .iter()
        .flat_map(|li| fam_right.members().iter().map(move |rj| op_tensor(li, rj)))
        .collect();
    let product = OperatorFamily::new(members)?;
    let claimed = FrameBounds::star(elem_tensor(&a, &c), elem_tensor(&b, &d));
    let report = frames::verify(&product, &claimed, tol)?;
    Ok((product, claimed, report))
}

/// Which leg of the product an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorLeg {
    Left,
    Right,
}

/// {Λ_i∘(Q*⊗I)} (or (I⊗Q*)) for invertible Q on one leg: the result keeps
/// framehood with claimed bounds (‖Q*^{-1}‖^{-1}·A, ‖Q‖·B) and frame operator
/// (Q⊗I)∘S∘(Q*⊗I).
pub fn q_tensor_compose(
    fam: &OperatorFamily,
    ts: &TensorShape,
    q: &AdjointableOperator,
    leg: TensorLeg,
    bounds: &FrameBounds,
    tol: Tolerance,
) -> Result<(OperatorFamily, FrameBounds, VerificationReport)> {
    if fam.shape() != ts.product() {
        return Err(Error::Shape(
            "q_tensor_compose: family is not over the product algebra".into(),
        ));
    }
    let leg_shape = match leg {
        TensorLeg::Left => ts.left(),
        TensorLeg::Right => ts.right(),
    };
    if q.shape() != leg_shape {
        return Err(Error::Shape("q_tensor_compose: Q is not over the chosen leg".into()));
    }
    if q.dom_rank() != q.cod_rank() {
        return Err(Error::Shape("q_tensor_compose: Q must be an endomorphism".into()));
    }
    let q_rank = q.dom_rank();
    if !fam.dom_rank().is_multiple_of(q_rank) {
        return Err(Error::Shape(format!(
            "q_tensor_compose: product rank {} is not a multiple of Q's rank {q_rank}",
            fam.dom_rank()
        )));
    }
    let other_rank = fam.dom_rank() / q_rank;

    // Q must be invertible; report the worst factor if it is not.
    let flat = q.flatten();
    let scale = tol.scale(q.op_norm()?);
    for (k, f) in flat.factors().iter().enumerate() {
        let smin = linalg::sigma_min(f)?;
        if smin < scale {
            return Err(Error::NotInvertible { factor: k, sigma_min: smin });
        }
    }
    let diag = q.range_diagnostics(tol)?;

    let base = frames::verify(fam, bounds, tol)?;
    if !base.is_valid() {
        return Err(Error::MalformedBounds(
            "q_tensor_compose: input bounds do not verify for the family".into(),
        ));
    }
    let (a, b) = star_parts(bounds, fam.shape())?;

    let theta = match leg {
        TensorLeg::Left => op_tensor(
            &q.adjoint_op(),
            &AdjointableOperator::identity(ts.right(), other_rank)?,
        ),
        TensorLeg::Right => op_tensor(
            &AdjointableOperator::identity(ts.left(), other_rank)?,
            &q.adjoint_op(),
        ),
    };
    let c_low = 1.0 / diag.norm_inv_tstar_t.expect("invertible").sqrt();
    let c_up = q.op_norm()?;
    let claimed = FrameBounds::star(
        a.scalar_mul(Complex64::new(c_low, 0.0)),
        b.scalar_mul(Complex64::new(c_up, 0.0)),
    );
    let members = fam
        .members()
        .iter()
        .map(|t| t.compose(&theta))
        .collect::<Result<Vec<_>>>()?;
    let composed = OperatorFamily::new(members)?;
    let report = frames::verify(&composed, &claimed, tol)?;
    Ok((composed, claimed, report))
}
