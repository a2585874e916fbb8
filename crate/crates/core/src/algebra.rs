//! Finite-dimensional C*-algebras A = M_{n_1}(C) ⊕ … ⊕ M_{n_K}(C).
//!
//! Every finite-dimensional C*-algebra is a finite direct sum of full complex
//! matrix algebras, so a shape (the list of factor sizes) plus one dense
//! complex block per factor represents the general element exactly. Positivity,
//! order comparison, inversion, and the functional calculus all reduce to
//! per-factor Hermitian eigendecompositions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::rng::SplitMix64;

/// Scale-aware comparison tolerance: thresholds are `abs + rel * (1 + magnitude)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-9, abs: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if rel.is_nan() || abs.is_nan() || rel < 0.0 || abs < 0.0 {
            return Err(Error::MalformedBounds(format!(
                "tolerances must be nonnegative, got rel={rel}, abs={abs}"
            )));
        }
        Ok(Tolerance { rel, abs })
    }

    /// Threshold for comparisons among quantities of the given magnitude.
    pub fn scale(&self, magnitude: f64) -> f64 {
        self.abs + self.rel * (1.0 + magnitude.abs())
    }
}

/// Factor sizes [n_1, …, n_K] of the direct sum ⊕ M_{n_k}(C).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgebraShape {
    factor_dims: Vec<usize>,
}

impl AlgebraShape {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::Shape("algebra shape needs at least one factor".into()));
        }
        if let Some(&bad) = factor_dims.iter().find(|&&n| n == 0) {
            return Err(Error::Shape(format!("factor dimension must be positive, got {bad}")));
        }
        Ok(AlgebraShape { factor_dims })
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn num_factors(&self) -> usize {
        self.factor_dims.len()
    }

    /// Σ n_k, the ambient dimension of the block-diagonal representation.
    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().sum()
    }

    /// True when every factor is 1×1, i.e. the algebra is commutative.
    pub fn is_commutative(&self) -> bool {
        self.factor_dims.iter().all(|&n| n == 1)
    }
}

/// Spectral functions available through the positive functional calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralFn {
    Sqrt,
    Inv,
    InvSqrt,
}

/// Generation recipes for seeded random elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomKind {
    General,
    Hermitian,
    Psd,
    Invertible,
    CentralPositiveInvertible,
}

/// Element of ⊕ M_{n_k}(C): one dense complex block per factor.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    shape: AlgebraShape,
    blocks: Vec<CMat>,
}

fn ensure_same_shape(a: &AlgebraElement, b: &AlgebraElement, ctx: &str) -> Result<()> {
    if a.shape != b.shape {
        return Err(Error::Shape(format!(
            "{ctx}: shapes differ, {:?} vs {:?}",
            a.shape.factor_dims(),
            b.shape.factor_dims()
        )));
    }
    Ok(())
}

impl AlgebraElement {
    pub fn from_blocks(shape: AlgebraShape, blocks: Vec<CMat>) -> Result<Self> {
        if blocks.len() != shape.num_factors() {
            return Err(Error::Shape(format!(
                "expected {} blocks, got {}",
                shape.num_factors(),
                blocks.len()
            )));
        }
        for (k, (b, &n)) in blocks.iter().zip(shape.factor_dims()).enumerate() {
            if b.rows() != n || b.cols() != n {
                return Err(Error::Shape(format!(
                    "block {k} is {}x{}, expected {n}x{n}",
                    b.rows(),
                    b.cols()
                )));
            }
        }
        Ok(AlgebraElement { shape, blocks })
    }

    pub fn zero(shape: &AlgebraShape) -> Self {
        let blocks = shape.factor_dims().iter().map(|&n| CMat::zeros(n, n)).collect();
        AlgebraElement { shape: shape.clone(), blocks }
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let blocks = shape.factor_dims().iter().map(|&n| CMat::identity(n)).collect();
        AlgebraElement { shape: shape.clone(), blocks }
    }

    /// z · 1_A.
    pub fn scalar(shape: &AlgebraShape, z: Complex64) -> Self {
        let blocks = shape.factor_dims().iter().map(|&n| CMat::scalar(n, z)).collect();
        AlgebraElement { shape: shape.clone(), blocks }
    }

    /// Central element with block k = scalars[k] · I. This is the general
    /// element of the center of the algebra.
    pub fn central(shape: &AlgebraShape, scalars: &[Complex64]) -> Result<Self> {
        if scalars.len() != shape.num_factors() {
            return Err(Error::Shape(format!(
                "expected {} central scalars, got {}",
                shape.num_factors(),
                scalars.len()
            )));
        }
        let blocks = shape
            .factor_dims()
            .iter()
            .zip(scalars)
            .map(|(&n, &z)| CMat::scalar(n, z))
            .collect();
        Ok(AlgebraElement { shape: shape.clone(), blocks })
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[CMat] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMat {
        &self.blocks[k]
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        ensure_same_shape(self, other, "add")?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.add(b)).collect();
        Ok(AlgebraElement { shape: self.shape.clone(), blocks })
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        ensure_same_shape(self, other, "sub")?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.sub(b)).collect();
        Ok(AlgebraElement { shape: self.shape.clone(), blocks })
    }

    pub fn mul(&self, other: &AlgebraElement) -> Result<AlgebraElement> {
        ensure_same_shape(self, other, "mul")?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.mul(b)).collect();
        Ok(AlgebraElement { shape: self.shape.clone(), blocks })
    }

    pub fn scalar_mul(&self, z: Complex64) -> AlgebraElement {
        let blocks = self.blocks.iter().map(|b| b.scale(z)).collect();
        AlgebraElement { shape: self.shape.clone(), blocks }
    }

    pub fn neg(&self) -> AlgebraElement {
        self.scalar_mul(Complex64::new(-1.0, 0.0))
    }

    /// The involution: blockwise conjugate transpose.
    pub fn adjoint(&self) -> AlgebraElement {
        let blocks = self.blocks.iter().map(CMat::adjoint).collect();
        AlgebraElement { shape: self.shape.clone(), blocks }
    }

    /// C*-norm: max over factors of the largest singular value.
    pub fn norm(&self) -> Result<f64> {
        let mut best = 0.0_f64;
        for b in &self.blocks {
            best = best.max(linalg::sigma_max(b)?);
        }
        Ok(best)
    }

    /// Largest entry modulus across all blocks; cheap proxy used for
    /// exact-zero and entrywise-equality checks.
    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(CMat::max_abs).fold(0.0, f64::max)
    }

    /// max_k max entry modulus of (block − block†); 0 for Hermitian elements.
    pub fn self_adjoint_defect(&self) -> f64 {
        self.blocks.iter().map(CMat::hermitian_defect).fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self, tol: Tolerance) -> Result<bool> {
        Ok(self.self_adjoint_defect() <= tol.scale(self.norm()?))
    }

    /// Eigenvalues (ascending) of the Hermitian part of each block.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<Vec<f64>>> {
        self.blocks.iter().map(|b| Ok(linalg::eigh(b)?.values)).collect()
    }

    /// Smallest eigenvalue of the Hermitian part across all factors.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for b in &self.blocks {
            best = best.min(linalg::eigh(b)?.values[0]);
        }
        Ok(best)
    }

    /// Positive cone membership: self-adjoint within tolerance and every
    /// block eigenvalue ≥ −(tolerance scale).
    pub fn is_positive(&self, tol: Tolerance) -> Result<bool> {
        let scale = tol.scale(self.norm()?);
        if self.self_adjoint_defect() > scale {
            return Ok(false);
        }
        Ok(self.min_eigenvalue()? >= -scale)
    }

    /// The C*-order: a ≤ b iff b − a is positive.
    pub fn leq(&self, other: &AlgebraElement, tol: Tolerance) -> Result<bool> {
        ensure_same_shape(self, other, "leq")?;
        other.sub(self)?.is_positive(tol)
    }

    /// Smallest singular value across all blocks.
    pub fn sigma_min(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for b in &self.blocks {
            best = best.min(linalg::sigma_min(b)?);
        }
        Ok(best)
    }

    pub fn is_invertible(&self, tol: Tolerance) -> Result<bool> {
        Ok(self.sigma_min()? >= tol.scale(self.norm()?))
    }

    /// Blockwise inverse; rejects elements with a nearly singular block.
    pub fn invert(&self, tol: Tolerance) -> Result<AlgebraElement> {
        let scale = tol.scale(self.norm()?);
        for (k, b) in self.blocks.iter().enumerate() {
            let smin = linalg::sigma_min(b)?;
            if smin < scale {
                return Err(Error::NotInvertible { factor: k, sigma_min: smin });
            }
        }
        let blocks: Result<Vec<CMat>> = self.blocks.iter().map(linalg::inverse).collect();
        Ok(AlgebraElement { shape: self.shape.clone(), blocks: blocks? })
    }

    /// Functional calculus on positive elements: eigendecompose each block,
    /// map the eigenvalues through `f`, reconstruct. `Inv` and `InvSqrt`
    /// additionally require the smallest eigenvalue to clear the tolerance
    /// scale.
    pub fn psd_calculus(&self, f: SpectralFn, tol: Tolerance) -> Result<AlgebraElement> {
        let scale = tol.scale(self.norm()?);
        if self.self_adjoint_defect() > scale {
            return Err(Error::NotPositive(format!(
                "element is not self-adjoint (defect {:.3e})",
                self.self_adjoint_defect()
            )));
        }
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (k, b) in self.blocks.iter().enumerate() {
            let eig = linalg::eigh(b)?;
            let lo = eig.values[0];
            if lo < -scale {
                return Err(Error::NotPositive(format!(
                    "factor {k} has eigenvalue {lo:.6e} below the positive cone"
                )));
            }
            if matches!(f, SpectralFn::Inv | SpectralFn::InvSqrt) && lo < scale {
                return Err(Error::NotInvertible { factor: k, sigma_min: lo.max(0.0) });
            }
            let mapped = linalg::reconstruct(&eig, |l| {
                let l = l.max(0.0);
                match f {
                    SpectralFn::Sqrt => l.sqrt(),
                    SpectralFn::Inv => 1.0 / l,
                    SpectralFn::InvSqrt => 1.0 / l.sqrt(),
                }
            });
            blocks.push(mapped);
        }
        Ok(AlgebraElement { shape: self.shape.clone(), blocks })
    }

    /// |a| = (a*a)^{1/2}.
    pub fn absolute_value(&self) -> Result<AlgebraElement> {
        let gram = self.adjoint().mul(self)?;
        // a*a is exactly positive up to rounding; a generous tolerance keeps
        // the cone check from tripping on that rounding.
        gram.psd_calculus(SpectralFn::Sqrt, Tolerance::default())
    }

    /// Projection onto the center: block k becomes (tr block_k / n_k)·I.
    /// Returns the central part and the C*-norm of the discarded remainder,
    /// which is zero exactly when the element is central.
    pub fn central_part(&self) -> Result<(AlgebraElement, f64)> {
        let blocks: Vec<CMat> = self
            .blocks
            .iter()
            .map(|b| {
                let n = b.rows();
                CMat::scalar(n, b.trace() / n as f64)
            })
            .collect();
        let central = AlgebraElement { shape: self.shape.clone(), blocks };
        let deviation = self.sub(&central)?.norm()?;
        Ok((central, deviation))
    }

    /// The central scalars λ_k when the element is central (deviation below
    /// the tolerance scale); None otherwise.
    pub fn central_scalars(&self, tol: Tolerance) -> Result<Option<Vec<Complex64>>> {
        let (central, dev) = self.central_part()?;
        if dev > tol.scale(self.norm()?) {
            return Ok(None);
        }
        Ok(Some(central.blocks.iter().map(|b| b[(0, 0)]).collect()))
    }

    /// Seeded random element of the requested kind. Deterministic for a fixed
    /// generator state; the advertised predicate holds by construction.
    pub fn random(shape: &AlgebraShape, rng: &mut SplitMix64, kind: RandomKind) -> Result<AlgebraElement> {
        let gaussian = |rng: &mut SplitMix64| {
            let blocks = shape
                .factor_dims()
                .iter()
                .map(|&n| CMat::from_fn(n, n, |_, _| rng.next_complex_gaussian()))
                .collect::<Vec<_>>();
            AlgebraElement { shape: shape.clone(), blocks }
        };
        let elem = match kind {
            RandomKind::General => gaussian(rng),
            RandomKind::Hermitian => {
                let g = gaussian(rng);
                let blocks = g.blocks.iter().map(CMat::hermitize).collect();
                AlgebraElement { shape: shape.clone(), blocks }
            }
            RandomKind::Psd => {
                let g = gaussian(rng);
                let blocks = g.blocks.iter().map(|b| b.mul_adjoint(b)).collect();
                AlgebraElement { shape: shape.clone(), blocks }
            }
            RandomKind::Invertible => {
                // g + (σ_max(g)+1)·I has every singular value ≥ 1.
                let g = gaussian(rng);
                let mut blocks = Vec::with_capacity(g.blocks.len());
                for b in &g.blocks {
                    let shift = linalg::sigma_max(b)? + 1.0;
                    blocks.push(b.add(&CMat::scalar(b.rows(), Complex64::new(shift, 0.0))));
                }
                AlgebraElement { shape: shape.clone(), blocks }
            }
            RandomKind::CentralPositiveInvertible => {
                let scalars: Vec<Complex64> = shape
                    .factor_dims()
                    .iter()
                    .map(|_| Complex64::new(0.5 + rng.next_f64(), 0.0))
                    .collect();
                AlgebraElement::central(shape, &scalars)?
            }
        };
        Ok(elem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn commutative(entries: &[(f64, f64)]) -> AlgebraElement {
        let shape = AlgebraShape::new(vec![1; entries.len()]).unwrap();
        let scalars: Vec<Complex64> = entries.iter().map(|&(re, im)| c(re, im)).collect();
        AlgebraElement::central(&shape, &scalars).unwrap()
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn commutative_product_is_entrywise() {
        let a = commutative(&[(1.0, 0.0), (2.0, 0.0)]);
        let b = commutative(&[(3.0, 0.0), (4.0, 0.0)]);
        let p = a.mul(&b).unwrap();
        assert_eq!(p, commutative(&[(3.0, 0.0), (8.0, 0.0)]));
    }

    #[test]
    fn product_with_inverse_is_identity() {
        let shape = AlgebraShape::new(vec![2]).unwrap();
        let mut rng = SplitMix64::new(5);
        let a = AlgebraElement::random(&shape, &mut rng, RandomKind::Invertible).unwrap();
        let prod = a.mul(&a.invert(tol()).unwrap()).unwrap();
        let diff = prod.sub(&AlgebraElement::identity(&shape)).unwrap();
        assert!(diff.max_abs() < 1e-9);
    }

    #[test]
    fn mul_matches_triple_loop() {
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        let mut rng = SplitMix64::new(7);
        let a = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
        let b = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
        let p = a.mul(&b).unwrap();
        for (k, &n) in shape.factor_dims().iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = c(0.0, 0.0);
                    for l in 0..n {
                        acc += a.block(k)[(i, l)] * b.block(k)[(l, j)];
                    }
                    assert!((p.block(k)[(i, j)] - acc).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn adjoint_conjugates_diagonal() {
        let shape = AlgebraShape::new(vec![2]).unwrap();
        let a = AlgebraElement::from_blocks(
            shape.clone(),
            vec![CMat::from_rows(vec![
                vec![c(0.0, 1.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, -1.0)],
            ])],
        )
        .unwrap();
        let expect = AlgebraElement::from_blocks(
            shape,
            vec![CMat::from_rows(vec![
                vec![c(0.0, -1.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 1.0)],
            ])],
        )
        .unwrap();
        assert_eq!(a.adjoint(), expect);
    }

    #[test]
    fn adjoint_fixes_hermitian_and_is_involutive() {
        let shape = AlgebraShape::new(vec![3, 1]).unwrap();
        let mut rng = SplitMix64::new(9);
        let h = AlgebraElement::random(&shape, &mut rng, RandomKind::Hermitian).unwrap();
        assert_eq!(h.adjoint(), h.clone());
        let g = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
        assert_eq!(g.adjoint().adjoint(), g);
    }

    #[test]
    fn norm_basics() {
        let shape = AlgebraShape::new(vec![3, 2]).unwrap();
        assert!((AlgebraElement::identity(&shape).norm().unwrap() - 1.0).abs() < 1e-14);
        let a = commutative(&[(2.0, 0.0), (-5.0, 0.0)]);
        assert!((a.norm().unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn c_star_identity_on_random_elements() {
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        let mut rng = SplitMix64::new(13);
        for _ in 0..20 {
            let a = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
            let na = a.norm().unwrap();
            let naa = a.adjoint().mul(&a).unwrap().norm().unwrap();
            assert!((naa - na * na).abs() <= 1e-9 * (1.0 + na * na));
        }
    }

    #[test]
    fn positivity_of_gram_and_boundary() {
        let shape = AlgebraShape::new(vec![2, 2]).unwrap();
        let mut rng = SplitMix64::new(21);
        let a = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
        let gram = a.adjoint().mul(&a).unwrap();
        assert!(gram.is_positive(tol()).unwrap());
        assert!(AlgebraElement::zero(&shape).is_positive(tol()).unwrap());

        let neg = AlgebraElement::from_blocks(
            AlgebraShape::new(vec![2]).unwrap(),
            vec![CMat::from_rows(vec![
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(-1e-3, 0.0)],
            ])],
        )
        .unwrap();
        assert!(!neg.is_positive(tol()).unwrap());
    }

    #[test]
    fn order_is_reflexive_and_gram_dominates_zero() {
        let shape = AlgebraShape::new(vec![2]).unwrap();
        let mut rng = SplitMix64::new(23);
        let a = AlgebraElement::random(&shape, &mut rng, RandomKind::Hermitian).unwrap();
        assert!(a.leq(&a, tol()).unwrap());
        let g = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
        let gram = g.adjoint().mul(&g).unwrap();
        assert!(AlgebraElement::zero(&shape).leq(&gram, tol()).unwrap());
    }

    #[test]
    fn conjugation_preserves_order() {
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        let mut rng = SplitMix64::new(29);
        for _ in 0..10 {
            let a = AlgebraElement::random(&shape, &mut rng, RandomKind::Psd).unwrap();
            let bump = AlgebraElement::random(&shape, &mut rng, RandomKind::Psd).unwrap();
            let b = a.add(&bump).unwrap();
            let c_el = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
            let ca = c_el.adjoint().mul(&a).unwrap().mul(&c_el).unwrap();
            let cb = c_el.adjoint().mul(&b).unwrap().mul(&c_el).unwrap();
            assert!(ca.leq(&cb, tol()).unwrap());
        }
    }

    #[test]
    fn scalar_inverse() {
        let a = commutative(&[(2.0, 0.0), (4.0, 0.0)]);
        let inv = a.invert(tol()).unwrap();
        assert_eq!(inv, commutative(&[(0.5, 0.0), (0.25, 0.0)]));
        let id = AlgebraElement::identity(a.shape());
        assert_eq!(id.invert(tol()).unwrap(), id);
    }

    #[test]
    fn invert_rejects_singular_factor() {
        let a = commutative(&[(1.0, 0.0), (0.0, 0.0)]);
        match a.invert(tol()) {
            Err(Error::NotInvertible { factor, sigma_min }) => {
                assert_eq!(factor, 1);
                assert!(sigma_min < 1e-12);
            }
            other => panic!("expected NotInvertible, got {other:?}"),
        }
    }

    #[test]
    fn calculus_on_diagonal_and_identity() {
        let shape = AlgebraShape::new(vec![2]).unwrap();
        let a = AlgebraElement::from_blocks(
            shape.clone(),
            vec![CMat::from_rows(vec![
                vec![c(4.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(9.0, 0.0)],
            ])],
        )
        .unwrap();
        let root = a.psd_calculus(SpectralFn::Sqrt, tol()).unwrap();
        let expect = AlgebraElement::from_blocks(
            shape.clone(),
            vec![CMat::from_rows(vec![
                vec![c(2.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(3.0, 0.0)],
            ])],
        )
        .unwrap();
        assert!(root.sub(&expect).unwrap().max_abs() < 1e-12);

        let id = AlgebraElement::identity(&shape);
        let r = id.psd_calculus(SpectralFn::InvSqrt, tol()).unwrap();
        assert!(r.sub(&id).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn calculus_roundtrips_on_random_psd() {
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        let mut rng = SplitMix64::new(31);
        for _ in 0..10 {
            let p = AlgebraElement::random(&shape, &mut rng, RandomKind::Psd).unwrap();
            let np = p.norm().unwrap();
            let root = p.psd_calculus(SpectralFn::Sqrt, tol()).unwrap();
            let back = root.mul(&root).unwrap();
            assert!(back.sub(&p).unwrap().norm().unwrap() <= 1e-9 * (1.0 + np));

            let shifted = p.add(&AlgebraElement::identity(&shape)).unwrap();
            let inv = shifted.psd_calculus(SpectralFn::Inv, tol()).unwrap();
            let prod = inv.mul(&shifted).unwrap();
            let id = AlgebraElement::identity(&shape);
            assert!(prod.sub(&id).unwrap().norm().unwrap() <= 1e-9 * (1.0 + shifted.norm().unwrap()));

            let invroot = shifted.psd_calculus(SpectralFn::InvSqrt, tol()).unwrap();
            let diff = invroot.mul(&invroot).unwrap().sub(&shifted.psd_calculus(SpectralFn::Inv, tol()).unwrap()).unwrap();
            assert!(diff.norm().unwrap() <= 1e-9 * (1.0 + shifted.norm().unwrap()));
        }
    }

    #[test]
    fn absolute_value_cases() {
        let a = commutative(&[(-3.0, 0.0), (0.0, 2.0)]);
        let abs = a.absolute_value().unwrap();
        assert!(abs.sub(&commutative(&[(3.0, 0.0), (2.0, 0.0)])).unwrap().max_abs() < 1e-12);

        let shape = AlgebraShape::new(vec![2]).unwrap();
        let mut rng = SplitMix64::new(37);
        let p = AlgebraElement::random(&shape, &mut rng, RandomKind::Psd).unwrap();
        assert!(p.absolute_value().unwrap().sub(&p).unwrap().norm().unwrap() <= 1e-9 * (1.0 + p.norm().unwrap()));
        // ‖|a|‖ = ‖a‖ on a general element
        let g = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
        assert!((g.absolute_value().unwrap().norm().unwrap() - g.norm().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn central_part_on_commutative_is_identity_map() {
        let a = commutative(&[(1.0, 2.0), (3.0, -1.0), (0.0, 0.0)]);
        let (central, dev) = a.central_part().unwrap();
        assert_eq!(central, a);
        assert!(dev < 1e-15);
    }

    #[test]
    fn central_part_trace_average() {
        let shape = AlgebraShape::new(vec![2]).unwrap();
        let a = AlgebraElement::from_blocks(
            shape.clone(),
            vec![CMat::from_rows(vec![
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(3.0, 0.0)],
            ])],
        )
        .unwrap();
        let (central, dev) = a.central_part().unwrap();
        assert!(central.sub(&AlgebraElement::scalar(&shape, c(2.0, 0.0))).unwrap().max_abs() < 1e-15);
        assert!((dev - 1.0).abs() < 1e-12);
    }

    #[test]
    fn central_residual_is_traceless() {
        let shape = AlgebraShape::new(vec![3, 2]).unwrap();
        let mut rng = SplitMix64::new(41);
        let a = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
        let (central, _) = a.central_part().unwrap();
        let resid = a.sub(&central).unwrap();
        for b in resid.blocks() {
            assert!(b.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn random_kinds_meet_their_predicates() {
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        let mut rng = SplitMix64::new(43);
        let p = AlgebraElement::random(&shape, &mut rng, RandomKind::Psd).unwrap();
        assert!(p.is_positive(tol()).unwrap());

        let mut r1 = SplitMix64::new(99);
        let mut r2 = SplitMix64::new(99);
        let a1 = AlgebraElement::random(&shape, &mut r1, RandomKind::General).unwrap();
        let a2 = AlgebraElement::random(&shape, &mut r2, RandomKind::General).unwrap();
        assert_eq!(a1, a2);

        let inv = AlgebraElement::random(&shape, &mut rng, RandomKind::Invertible).unwrap();
        assert!(inv.is_invertible(tol()).unwrap());

        let cpi = AlgebraElement::random(&shape, &mut rng, RandomKind::CentralPositiveInvertible).unwrap();
        let (_, dev) = cpi.central_part().unwrap();
        assert!(dev < 1e-15);
        assert!(cpi.is_positive(tol()).unwrap());
        assert!(cpi.sigma_min().unwrap() > 0.4);
    }

    #[test]
    fn norm_zero_iff_zero() {
        let shape = AlgebraShape::new(vec![2, 1]).unwrap();
        let z = AlgebraElement::zero(&shape);
        assert_eq!(z.norm().unwrap(), 0.0);
        let mut rng = SplitMix64::new(47);
        let a = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
        assert!(a.norm().unwrap() > 1e-6);
    }
}
