//! *-homomorphisms between finite-dimensional C*-algebras and transport of
//! operator families along them.
//!
//! Every *-homomorphism φ: ⊕_k M_{n_k} → ⊕_l M_{m_l} is determined up to
//! unitaries by a multiplicity matrix μ[l][k]: block l of φ(a) is a unitary
//! conjugate of blockdiag(a_1 repeated μ[l][1] times, …, a_K repeated μ[l][K]
//! times, zero padding). Transport of frames is implemented for surjective φ
//! only — factor selection up to unitary equivalence — because only then is
//! the image of a free module free again; entrywise application of φ to
//! vectors and operator coefficients then intertwines inner products and
//! preserves framehood with bounds (φ(A), φ(B)).

use crate::algebra::{AlgebraElement, AlgebraShape, RandomKind, Tolerance};
use crate::error::{Error, Result};
use crate::frames::{self, FrameBounds, OperatorFamily, VerificationReport};
use crate::hilbert::ModuleVector;
use crate::linalg::{self, CMat};
use crate::operators::AdjointableOperator;
use crate::rng::SplitMix64;

/// Standard-form *-homomorphism: multiplicity matrix plus one unitary twist
/// per target factor.
#[derive(Debug, Clone, PartialEq)]
pub struct StarHomomorphism {
    source: AlgebraShape,
    target: AlgebraShape,
    multiplicity: Vec<Vec<usize>>,
    twists: Vec<CMat>,
}

impl StarHomomorphism {
    pub fn new(
        source: AlgebraShape,
        target: AlgebraShape,
        multiplicity: Vec<Vec<usize>>,
        twists: Vec<CMat>,
    ) -> Result<Self> {
        let k_count = source.num_factors();
        let l_count = target.num_factors();
        if multiplicity.len() != l_count {
            return Err(Error::Shape(format!(
                "multiplicity has {} rows, target has {l_count} factors",
                multiplicity.len()
            )));
        }
        for (l, row) in multiplicity.iter().enumerate() {
            if row.len() != k_count {
                return Err(Error::Shape(format!(
                    "multiplicity row {l} has {} entries, source has {k_count} factors",
                    row.len()
                )));
            }
            let used: usize = row
                .iter()
                .zip(source.factor_dims())
                .map(|(&mu, &n)| mu * n)
                .sum();
            if used > target.factor_dims()[l] {
                return Err(Error::Shape(format!(
                    "multiplicity row {l} needs dimension {used} but target factor has {}",
                    target.factor_dims()[l]
                )));
            }
        }
        if twists.len() != l_count {
            return Err(Error::Shape(format!(
                "expected {l_count} twists, got {}",
                twists.len()
            )));
        }
        for (l, u) in twists.iter().enumerate() {
            let m = target.factor_dims()[l];
            if u.rows() != m || u.cols() != m {
                return Err(Error::Shape(format!(
                    "twist {l} is {}x{}, target factor needs {m}x{m}",
                    u.rows(),
                    u.cols()
                )));
            }
            let gram = u.adjoint_mul(u);
            if gram.sub(&CMat::identity(m)).max_abs() > 1e-9 {
                return Err(Error::Shape(format!("twist {l} is not unitary")));
            }
        }
        let hom = StarHomomorphism { source, target, multiplicity, twists };
        hom.check_laws()?;
        Ok(hom)
    }

    /// The identity homomorphism of a shape.
    pub fn identity(shape: &AlgebraShape) -> Self {
        let k = shape.num_factors();
        let multiplicity = (0..k)
            .map(|l| (0..k).map(|j| usize::from(j == l)).collect())
            .collect();
        let twists = shape.factor_dims().iter().map(|&n| CMat::identity(n)).collect();
        StarHomomorphism {
            source: shape.clone(),
            target: shape.clone(),
            multiplicity,
            twists,
        }
    }

    pub fn source(&self) -> &AlgebraShape {
        &self.source
    }

    pub fn target(&self) -> &AlgebraShape {
        &self.target
    }

    pub fn multiplicity(&self) -> &[Vec<usize>] {
        &self.multiplicity
    }

    pub fn twists(&self) -> &[CMat] {
        &self.twists
    }

    // Deterministic randomized guard: the standard form always passes, but
    // this catches corrupted inputs (e.g. twists drifting from unitarity)
    // the moment they are constructed rather than deep inside a transport.
    fn check_laws(&self) -> Result<()> {
        let mut rng = SplitMix64::new(0x600d_1a35);
        let tol = Tolerance::default();
        for _ in 0..16 {
            let a = AlgebraElement::random(&self.source, &mut rng, RandomKind::General)?;
            let b = AlgebraElement::random(&self.source, &mut rng, RandomKind::General)?;
            let scale = tol.scale(
                (1.0 + a.norm()?) * (1.0 + b.norm()?),
            ) * 10.0;
            let prod = hom_apply(self, &a.mul(&b)?)?;
            let split = hom_apply(self, &a)?.mul(&hom_apply(self, &b)?)?;
            if prod.sub(&split)?.max_abs() > scale {
                return Err(Error::Shape(
                    "homomorphism laws fail: φ(ab) ≠ φ(a)φ(b)".into(),
                ));
            }
            let star = hom_apply(self, &a.adjoint())?;
            if star.sub(&hom_apply(self, &a)?.adjoint())?.max_abs() > scale {
                return Err(Error::Shape(
                    "homomorphism laws fail: φ(a*) ≠ φ(a)*".into(),
                ));
            }
        }
        Ok(())
    }
}

/// φ(a): block l is U_l·blockdiag(a_k repeated μ[l][k] times, 0 pad)·U_l†.
pub fn hom_apply(phi: &StarHomomorphism, a: &AlgebraElement) -> Result<AlgebraElement> {
    if a.shape() != phi.source() {
        return Err(Error::Shape("hom_apply: element is not over the source algebra".into()));
    }
    let mut blocks = Vec::with_capacity(phi.target.num_factors());
    for (l, &m) in phi.target.factor_dims().iter().enumerate() {
        let mut diag = CMat::zeros(m, m);
        let mut offset = 0;
        for (k, &n) in phi.source.factor_dims().iter().enumerate() {
            for _ in 0..phi.multiplicity[l][k] {
                for r in 0..n {
                    for c in 0..n {
                        diag[(offset + r, offset + c)] = a.block(k)[(r, c)];
                    }
                }
                offset += n;
            }
        }
        let u = &phi.twists[l];
        blocks.push(u.mul(&diag).mul_adjoint(u));
    }
    AlgebraElement::from_blocks(phi.target.clone(), blocks)
}

/// True iff φ is factor selection up to unitary equivalence: each target
/// factor receives exactly one source factor with multiplicity one and equal
/// dimension, and no source factor feeds two targets.
pub fn is_surjective_hom(phi: &StarHomomorphism) -> bool {
    let mut used = vec![false; phi.source.num_factors()];
    for (l, row) in phi.multiplicity.iter().enumerate() {
        let mut chosen: Option<usize> = None;
        for (k, &mu) in row.iter().enumerate() {
            if mu == 0 {
                continue;
            }
            if mu > 1 || chosen.is_some() {
                return false;
            }
            chosen = Some(k);
        }
        let Some(k) = chosen else { return false };
        if phi.source.factor_dims()[k] != phi.target.factor_dims()[l] || used[k] {
            return false;
        }
        used[k] = true;
    }
    true
}

/// θx: entrywise φ. For surjective φ this satisfies ⟨θx,θy⟩ = φ(⟨x,y⟩).
pub fn module_transport(phi: &StarHomomorphism, x: &ModuleVector) -> Result<ModuleVector> {
    let entries = x
        .entries()
        .iter()
        .map(|e| hom_apply(phi, e))
        .collect::<Result<Vec<_>>>()?;
    ModuleVector::new(entries)
}

/// Transport a family along a surjective φ by mapping every operator
/// coefficient entrywise; bounds transport to (φ(A), φ(B)) and the claim is
/// re-verified on the result.
pub fn transport_family(
    phi: &StarHomomorphism,
    fam: &OperatorFamily,
    bounds: &FrameBounds,
    tol: Tolerance,
) -> Result<(OperatorFamily, FrameBounds, VerificationReport)> {
    if fam.shape() != phi.source() {
        return Err(Error::Shape("transport_family: family is not over the source algebra".into()));
    }
    if !is_surjective_hom(phi) {
        return Err(Error::NotSurjective(
            "transport is only defined along surjective homomorphisms (factor selection up to unitaries)"
                .into(),
        ));
    }
    let base = frames::verify(fam, bounds, tol)?;
    if !base.is_valid() {
        return Err(Error::MalformedBounds(
            "transport_family: input bounds do not verify for the family".into(),
        ));
    }
    let star = match bounds {
        FrameBounds::Scalar { .. } => frames::scalar_to_star(bounds, fam.shape())?,
        FrameBounds::Star { .. } => bounds.clone(),
    };
    let (a, b) = match star {
        FrameBounds::Star { lower, upper } => (lower, upper),
        FrameBounds::Scalar { .. } => unreachable!(),
    };
    let members = fam
        .members()
        .iter()
        .map(|t| {
            let coeffs = t
                .coeffs()
                .iter()
                .map(|row| row.iter().map(|e| hom_apply(phi, e)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            AdjointableOperator::from_coeffs(coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    let transported = OperatorFamily::new(members)?;
    let claimed = FrameBounds::star(hom_apply(phi, &a)?, hom_apply(phi, &b)?);
    let report = frames::verify(&transported, &claimed, tol)?;
    Ok((transported, claimed, report))
}

/// Seeded surjective homomorphism from `source`: a random subset of source
/// factors, permuted, with random unitary twists.
pub fn random_surjective_hom(source: &AlgebraShape, rng: &mut SplitMix64) -> Result<StarHomomorphism> {
    let k_count = source.num_factors();
    let mut picks: Vec<usize> = (0..k_count).collect();
    // Fisher–Yates, then keep a nonempty prefix.
    for i in (1..k_count).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        picks.swap(i, j);
    }
    let keep = 1 + (rng.next_u64() % k_count as u64) as usize;
    picks.truncate(keep);

    let target = AlgebraShape::new(
        picks.iter().map(|&k| source.factor_dims()[k]).collect(),
    )?;
    let multiplicity = picks
        .iter()
        .map(|&k| (0..k_count).map(|j| usize::from(j == k)).collect())
        .collect();
    let twists = picks
        .iter()
        .map(|&k| random_unitary(source.factor_dims()[k], rng))
        .collect::<Result<Vec<_>>>()?;
    StarHomomorphism::new(source.clone(), target, multiplicity, twists)
}

/// Haar-ish unitary: eigenvector matrix of a random Hermitian matrix.
pub fn random_unitary(n: usize, rng: &mut SplitMix64) -> Result<CMat> {
    let g = CMat::from_fn(n, n, |_, _| rng.next_complex_gaussian());
    let h = g.hermitize();
    Ok(linalg::eigh(&h)?.vectors)
}
