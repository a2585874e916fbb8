//! Free Hilbert A-modules H = A^m.
//!
//! A vector is an m-tuple of algebra elements; the A-valued inner product is
//! ⟨x,y⟩ = Σ_j x_j·(y_j)*, which is A-linear in the first slot and conjugate
//! symmetric. Direct sums concatenate coordinates, which is how the frame
//! transform's codomain A^{Σ cod_ranks} is built.

use num_complex::Complex64;

use crate::algebra::{AlgebraElement, AlgebraShape, Tolerance};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Element of the free module A^m.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleVector {
    shape: AlgebraShape,
    entries: Vec<AlgebraElement>,
}

impl ModuleVector {
    pub fn new(entries: Vec<AlgebraElement>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::Shape("module vector needs at least one entry".into()))?;
        let shape = first.shape().clone();
        if let Some(bad) = entries.iter().position(|e| e.shape() != &shape) {
            return Err(Error::Shape(format!("entry {bad} has a different algebra shape")));
        }
        Ok(ModuleVector { shape, entries })
    }

    pub fn zero(shape: &AlgebraShape, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Shape("module rank must be positive".into()));
        }
        Ok(ModuleVector {
            shape: shape.clone(),
            entries: (0..rank).map(|_| AlgebraElement::zero(shape)).collect(),
        })
    }

    /// Coordinate vector with 1_A in slot `j`.
    pub fn unit(shape: &AlgebraShape, rank: usize, j: usize) -> Result<Self> {
        let mut v = ModuleVector::zero(shape, rank)?;
        if j >= rank {
            return Err(Error::Shape(format!("unit index {j} out of range for rank {rank}")));
        }
        v.entries[j] = AlgebraElement::identity(shape);
        Ok(v)
    }

    pub fn random(shape: &AlgebraShape, rank: usize, rng: &mut SplitMix64) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Shape("module rank must be positive".into()));
        }
        let entries = (0..rank)
            .map(|_| AlgebraElement::random(shape, rng, crate::algebra::RandomKind::General))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModuleVector { shape: shape.clone(), entries })
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[AlgebraElement] {
        &self.entries
    }

    pub fn entry(&self, j: usize) -> &AlgebraElement {
        &self.entries[j]
    }

    pub fn add(&self, other: &ModuleVector) -> Result<ModuleVector> {
        self.check_compatible(other, "add")?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModuleVector { shape: self.shape.clone(), entries })
    }

    pub fn sub(&self, other: &ModuleVector) -> Result<ModuleVector> {
        self.check_compatible(other, "sub")?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModuleVector { shape: self.shape.clone(), entries })
    }

    pub fn scalar_mul(&self, z: Complex64) -> ModuleVector {
        ModuleVector {
            shape: self.shape.clone(),
            entries: self.entries.iter().map(|e| e.scalar_mul(z)).collect(),
        }
    }

    fn check_compatible(&self, other: &ModuleVector, ctx: &str) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!("{ctx}: algebra shapes differ")));
        }
        if self.rank() != other.rank() {
            return Err(Error::Shape(format!(
                "{ctx}: ranks differ, {} vs {}",
                self.rank(),
                other.rank()
            )));
        }
        Ok(())
    }
}

/// ⟨x,y⟩ = Σ_j x_j·(y_j)*; A-linear in x, conjugate symmetric.
pub fn inner_product(x: &ModuleVector, y: &ModuleVector) -> Result<AlgebraElement> {
    x.check_compatible(y, "inner_product")?;
    let mut acc = AlgebraElement::zero(x.shape());
    for (xj, yj) in x.entries().iter().zip(y.entries()) {
        acc = acc.add(&xj.mul(&yj.adjoint())?)?;
    }
    Ok(acc)
}

/// Left module action: (a·x)_j = a·x_j.
pub fn module_action(a: &AlgebraElement, x: &ModuleVector) -> Result<ModuleVector> {
    if a.shape() != x.shape() {
        return Err(Error::Shape("module_action: algebra shapes differ".into()));
    }
    let entries = x.entries().iter().map(|e| a.mul(e)).collect::<Result<Vec<_>>>()?;
    ModuleVector::new(entries)
}

/// ‖x‖ = ‖⟨x,x⟩‖^{1/2}.
pub fn vector_norm(x: &ModuleVector) -> Result<f64> {
    Ok(inner_product(x, x)?.norm()?.sqrt())
}

/// Concatenation of coordinates; inner products add across summands.
pub fn direct_sum(xs: &[ModuleVector]) -> Result<ModuleVector> {
    let first = xs
        .first()
        .ok_or_else(|| Error::Shape("direct_sum needs at least one summand".into()))?;
    let shape = first.shape().clone();
    let mut entries = Vec::new();
    for x in xs {
        if x.shape() != &shape {
            return Err(Error::Shape("direct_sum: algebra shapes differ".into()));
        }
        entries.extend_from_slice(x.entries());
    }
    ModuleVector::new(entries)
}

/// Checks a vector family against frame bounds by verifying the induced
/// operator family x ↦ ⟨x,x_i⟩ (each member maps A^m → A¹), whose summed
/// inner products Σ⟨T_i x, T_i x⟩ reproduce Σ⟨x,x_i⟩⟨x_i,x⟩ exactly.
pub fn verify_vector_frame(
    xs: &[ModuleVector],
    bounds: &crate::frames::FrameBounds,
    tol: Tolerance,
) -> Result<crate::frames::VerificationReport> {
    let fam = crate::frames::from_vector_frame(xs)?;
    crate::frames::verify(&fam, bounds, tol)
}
