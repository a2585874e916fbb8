//! Adjointable A-linear maps between free modules and their concrete
//! (flattened) matrix form.
//!
//! An operator A^{m1} → A^{m2} is stored as an m1×m2 coefficient grid over A,
//! acting by right contraction: (Tx)_j = Σ_i x_i·coeffs[i][j]. That is the
//! general form of a left-A-linear map between free left modules, and it makes
//! the adjoint a literal conjugate transpose of the grid.
//!
//! Flattening replaces the grid by one dense complex matrix per algebra
//! factor: factor k becomes the (n_k·m1)×(n_k·m2) block matrix whose (i,j)
//! sub-block is coeffs[i][j]'s k-th block. Writing X for the n_k×(n_k·m1)
//! row-concatenation of x's factor-k blocks, the factor-k block of ⟨Tx,x'⟩ is
//! exactly X·flat_k·X'†. Flattening is bijective onto the full per-factor
//! matrix spaces, *-preserving (flat(T*) = flat(T)†), and contravariantly
//! multiplicative: flat(T∘U)_k = flat(U)_k · flat(T)_k.
//!
//! Positivity of a square operator is decided on the flattening. This is
//! sound on free modules: for Hermitian F, X·F·X† ⪰ 0 for every X iff F ⪰ 0.
//! (⇐ is the factorization X·F·X† = (XF^{1/2})(XF^{1/2})†; for ⇒ take
//! X = u·w† with u any unit vector and w arbitrary, so X·F·X† = (w†Fw)·uu†,
//! forcing w†Fw ≥ 0 for all w. The X arising from module vectors sweep all of
//! C^{n_k×(n_k·m1)}, so nothing weaker than PSD survives the quantifier.)
//! `free_module_positivity_equivalence` in the tests pins both directions.

use num_complex::Complex64;

use crate::algebra::{AlgebraElement, AlgebraShape, RandomKind, Tolerance};
use crate::error::{Error, Result};
use crate::hilbert::ModuleVector;
use crate::linalg::{self, CMat};
use crate::rng::SplitMix64;

pub use crate::algebra::SpectralFn;

/// A-linear adjointable map A^{m1} → A^{m2}.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointableOperator {
    shape: AlgebraShape,
    dom_rank: usize,
    cod_rank: usize,
    coeffs: Vec<Vec<AlgebraElement>>,
}

/// Per-factor dense representation of an operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatMatrix {
    shape: AlgebraShape,
    dom_rank: usize,
    cod_rank: usize,
    factors: Vec<CMat>,
}

/// Injectivity/surjectivity summary of an operator, from the singular values
/// of its flattening.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDiagnostics {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub injective: bool,
    pub surjective: bool,
    /// σ_min within a factor of 10 of the decision threshold: the verdicts
    /// above are numerically fragile.
    pub ill_conditioned: bool,
    /// ‖(T*T)^{-1}‖ when injective.
    pub norm_inv_tstar_t: Option<f64>,
    /// ‖(TT*)^{-1}‖ when surjective.
    pub norm_inv_t_tstar: Option<f64>,
}

impl AdjointableOperator {
    pub fn from_coeffs(coeffs: Vec<Vec<AlgebraElement>>) -> Result<Self> {
        let m1 = coeffs.len();
        if m1 == 0 {
            return Err(Error::Shape("operator needs at least one coefficient row".into()));
        }
        let m2 = coeffs[0].len();
        if m2 == 0 {
            return Err(Error::Shape("operator needs at least one coefficient column".into()));
        }
        let shape = coeffs[0][0].shape().clone();
        for (i, row) in coeffs.iter().enumerate() {
            if row.len() != m2 {
                return Err(Error::Shape(format!(
                    "coefficient row {i} has {} entries, expected {m2}",
                    row.len()
                )));
            }
            for (j, c) in row.iter().enumerate() {
                if c.shape() != &shape {
                    return Err(Error::Shape(format!(
                        "coefficient ({i},{j}) has a different algebra shape"
                    )));
                }
            }
        }
        Ok(AdjointableOperator { shape, dom_rank: m1, cod_rank: m2, coeffs })
    }

    pub fn identity(shape: &AlgebraShape, rank: usize) -> Result<Self> {
        Self::scalar_op(shape, rank, Complex64::new(1.0, 0.0))
    }

    pub fn zero(shape: &AlgebraShape, dom_rank: usize, cod_rank: usize) -> Result<Self> {
        if dom_rank == 0 || cod_rank == 0 {
            return Err(Error::Shape("operator ranks must be positive".into()));
        }
        let coeffs = (0..dom_rank)
            .map(|_| (0..cod_rank).map(|_| AlgebraElement::zero(shape)).collect())
            .collect();
        Self::from_coeffs(coeffs)
    }

    /// z times the identity on A^rank.
    pub fn scalar_op(shape: &AlgebraShape, rank: usize, z: Complex64) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Shape("operator ranks must be positive".into()));
        }
        let coeffs = (0..rank)
            .map(|i| {
                (0..rank)
                    .map(|j| {
                        if i == j {
                            AlgebraElement::scalar(shape, z)
                        } else {
                            AlgebraElement::zero(shape)
                        }
                    })
                    .collect()
            })
            .collect();
        Self::from_coeffs(coeffs)
    }

    pub fn random(
        shape: &AlgebraShape,
        dom_rank: usize,
        cod_rank: usize,
        rng: &mut SplitMix64,
    ) -> Result<Self> {
        if dom_rank == 0 || cod_rank == 0 {
            return Err(Error::Shape("operator ranks must be positive".into()));
        }
        let coeffs = (0..dom_rank)
            .map(|_| {
                (0..cod_rank)
                    .map(|_| AlgebraElement::random(shape, rng, RandomKind::General))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(coeffs)
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn dom_rank(&self) -> usize {
        self.dom_rank
    }

    pub fn cod_rank(&self) -> usize {
        self.cod_rank
    }

    pub fn coeffs(&self) -> &[Vec<AlgebraElement>] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> &AlgebraElement {
        &self.coeffs[i][j]
    }

    fn same_signature(&self, other: &Self, ctx: &str) -> Result<()> {
        if self.shape != other.shape
            || self.dom_rank != other.dom_rank
            || self.cod_rank != other.cod_rank
        {
            return Err(Error::Shape(format!("{ctx}: operator signatures differ")));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_signature(other, "operator add")?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(r1, r2)| r1.iter().zip(r2).map(|(a, b)| a.add(b)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_signature(other, "operator sub")?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(r1, r2)| r1.iter().zip(r2).map(|(a, b)| a.sub(b)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(coeffs)
    }

    pub fn scalar_mul(&self, z: Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| row.iter().map(|c| c.scalar_mul(z)).collect())
            .collect();
        AdjointableOperator {
            shape: self.shape.clone(),
            dom_rank: self.dom_rank,
            cod_rank: self.cod_rank,
            coeffs,
        }
    }

    /// (Tx)_j = Σ_i x_i·coeffs[i][j].
    pub fn apply(&self, x: &ModuleVector) -> Result<ModuleVector> {
        if x.shape() != &self.shape {
            return Err(Error::Shape("apply: algebra shapes differ".into()));
        }
        if x.rank() != self.dom_rank {
            return Err(Error::Shape(format!(
                "apply: vector rank {} does not match operator domain rank {}",
                x.rank(),
                self.dom_rank
            )));
        }
        let mut entries = Vec::with_capacity(self.cod_rank);
        for j in 0..self.cod_rank {
            let mut acc = AlgebraElement::zero(&self.shape);
            for i in 0..self.dom_rank {
                acc = acc.add(&x.entry(i).mul(&self.coeffs[i][j])?)?;
            }
            entries.push(acc);
        }
        ModuleVector::new(entries)
    }

    /// T* with coeffs'[j][i] = (coeffs[i][j])*; satisfies ⟨Tx,y⟩ = ⟨x,T*y⟩.
    pub fn adjoint_op(&self) -> Self {
        let coeffs = (0..self.cod_rank)
            .map(|j| (0..self.dom_rank).map(|i| self.coeffs[i][j].adjoint()).collect())
            .collect();
        AdjointableOperator {
            shape: self.shape.clone(),
            dom_rank: self.cod_rank,
            cod_rank: self.dom_rank,
            coeffs,
        }
    }

    /// T∘U (apply `other` first): coefficient grids multiply as U·T.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::Shape("compose: algebra shapes differ".into()));
        }
        if other.cod_rank != self.dom_rank {
            return Err(Error::Shape(format!(
                "compose: inner ranks differ, {} vs {}",
                other.cod_rank, self.dom_rank
            )));
        }
        let mut coeffs = Vec::with_capacity(other.dom_rank);
        for i in 0..other.dom_rank {
            let mut row = Vec::with_capacity(self.cod_rank);
            for l in 0..self.cod_rank {
                let mut acc = AlgebraElement::zero(&self.shape);
                for j in 0..other.cod_rank {
                    acc = acc.add(&other.coeffs[i][j].mul(&self.coeffs[j][l])?)?;
                }
                row.push(acc);
            }
            coeffs.push(row);
        }
        Self::from_coeffs(coeffs)
    }

    pub fn flatten(&self) -> FlatMatrix {
        let factors = self
            .shape
            .factor_dims()
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let mut f = CMat::zeros(n * self.dom_rank, n * self.cod_rank);
                for i in 0..self.dom_rank {
                    for j in 0..self.cod_rank {
                        let b = self.coeffs[i][j].block(k);
                        for r in 0..n {
                            for c in 0..n {
                                f[(i * n + r, j * n + c)] = b[(r, c)];
                            }
                        }
                    }
                }
                f
            })
            .collect();
        FlatMatrix {
            shape: self.shape.clone(),
            dom_rank: self.dom_rank,
            cod_rank: self.cod_rank,
            factors,
        }
    }

    /// Inverse of `flatten`. Every per-factor matrix of the right dimensions
    /// is the flattening of exactly one operator (the sub-blocks are free), so
    /// the pattern check reduces to the dimension constraints.
    pub fn unflatten(flat: &FlatMatrix) -> Result<Self> {
        let m1 = flat.dom_rank;
        let m2 = flat.cod_rank;
        if m1 == 0 || m2 == 0 {
            return Err(Error::Pattern("flat matrix with zero rank".into()));
        }
        if flat.factors.len() != flat.shape.num_factors() {
            return Err(Error::Pattern(format!(
                "flat matrix has {} factors, shape has {}",
                flat.factors.len(),
                flat.shape.num_factors()
            )));
        }
        for (k, (f, &n)) in flat.factors.iter().zip(flat.shape.factor_dims()).enumerate() {
            if f.rows() != n * m1 || f.cols() != n * m2 {
                return Err(Error::Pattern(format!(
                    "factor {k} is {}x{}, expected {}x{}",
                    f.rows(),
                    f.cols(),
                    n * m1,
                    n * m2
                )));
            }
        }
        let coeffs = (0..m1)
            .map(|i| {
                (0..m2)
                    .map(|j| {
                        let blocks = flat
                            .factors
                            .iter()
                            .zip(flat.shape.factor_dims())
                            .map(|(f, &n)| {
                                CMat::from_fn(n, n, |r, c| f[(i * n + r, j * n + c)])
                            })
                            .collect();
                        AlgebraElement::from_blocks(flat.shape.clone(), blocks)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(coeffs)
    }

    /// Operator norm: max over factors of the largest singular value of the
    /// flattening.
    pub fn op_norm(&self) -> Result<f64> {
        let flat = self.flatten();
        let mut best = 0.0_f64;
        for f in &flat.factors {
            best = best.max(linalg::sigma_max(f)?);
        }
        Ok(best)
    }

    /// Positivity as an operator: Hermitian and PSD flattening per factor,
    /// equivalent to ⟨Tx,x⟩ ≥ 0 for every module vector (see module docs).
    pub fn is_positive_op(&self, tol: Tolerance) -> Result<bool> {
        if self.dom_rank != self.cod_rank {
            return Err(Error::Shape(
                "operator positivity needs equal domain and codomain ranks".into(),
            ));
        }
        let flat = self.flatten();
        let scale = tol.scale(self.op_norm()?);
        for f in &flat.factors {
            if f.hermitian_defect() > scale {
                return Ok(false);
            }
            if linalg::eigh(f)?.values[0] < -scale {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Hermitian functional calculus through the flattening: eigendecompose
    /// each factor, map eigenvalues, reconstruct, unflatten. The reconstructed
    /// factors are exactly representable, so the final unflatten cannot fail
    /// on valid input.
    pub fn op_calculus(&self, f: SpectralFn, tol: Tolerance) -> Result<Self> {
        if self.dom_rank != self.cod_rank {
            return Err(Error::Shape(
                "operator calculus needs equal domain and codomain ranks".into(),
            ));
        }
        let flat = self.flatten();
        let scale = tol.scale(self.op_norm()?);
        let mut factors = Vec::with_capacity(flat.factors.len());
        for (k, fac) in flat.factors.iter().enumerate() {
            if fac.hermitian_defect() > scale {
                return Err(Error::NotPositive(format!(
                    "operator is not self-adjoint (factor {k} defect {:.3e})",
                    fac.hermitian_defect()
                )));
            }
            let eig = linalg::eigh(fac)?;
            let lo = eig.values[0];
            if lo < -scale {
                return Err(Error::NotPositive(format!(
                    "factor {k} has operator eigenvalue {lo:.6e} below the positive cone"
                )));
            }
            if matches!(f, SpectralFn::Inv | SpectralFn::InvSqrt) && lo < scale {
                return Err(Error::NotInvertible { factor: k, sigma_min: lo.max(0.0) });
            }
            factors.push(linalg::reconstruct(&eig, |l| {
                let l = l.max(0.0);
                match f {
                    SpectralFn::Sqrt => l.sqrt(),
                    SpectralFn::Inv => 1.0 / l,
                    SpectralFn::InvSqrt => 1.0 / l.sqrt(),
                }
            }));
        }
        Self::unflatten(&FlatMatrix {
            shape: self.shape.clone(),
            dom_rank: self.dom_rank,
            cod_rank: self.cod_rank,
            factors,
        })
    }

    /// Injectivity/surjectivity from the singular values of the flattening.
    /// Full row rank of every factor (with m1 ≤ m2) makes T injective; full
    /// column rank (with m1 ≥ m2) makes it surjective; closed range is
    /// automatic in finite dimension.
    pub fn range_diagnostics(&self, tol: Tolerance) -> Result<RangeDiagnostics> {
        let flat = self.flatten();
        let mut sig_min = f64::INFINITY;
        let mut sig_max = 0.0_f64;
        for f in &flat.factors {
            let sv = linalg::singular_values(f)?;
            sig_min = sig_min.min(sv.first().copied().unwrap_or(0.0));
            sig_max = sig_max.max(sv.last().copied().unwrap_or(0.0));
        }
        let scale = tol.scale(sig_max);
        let full_rank = sig_min >= scale;
        let injective = self.dom_rank <= self.cod_rank && full_rank;
        let surjective = self.dom_rank >= self.cod_rank && full_rank;
        let ill_conditioned = sig_min < 10.0 * scale;
        Ok(RangeDiagnostics {
            sigma_min: sig_min,
            sigma_max: sig_max,
            injective,
            surjective,
            ill_conditioned,
            norm_inv_tstar_t: injective.then(|| 1.0 / (sig_min * sig_min)),
            norm_inv_t_tstar: surjective.then(|| 1.0 / (sig_min * sig_min)),
        })
    }
}

impl FlatMatrix {
    pub fn new(
        shape: AlgebraShape,
        dom_rank: usize,
        cod_rank: usize,
        factors: Vec<CMat>,
    ) -> Self {
        FlatMatrix { shape, dom_rank, cod_rank, factors }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn dom_rank(&self) -> usize {
        self.dom_rank
    }

    pub fn cod_rank(&self) -> usize {
        self.cod_rank
    }

    pub fn factors(&self) -> &[CMat] {
        &self.factors
    }

    pub fn factor(&self, k: usize) -> &CMat {
        &self.factors[k]
    }
}

/// The n_k × (n_k·m) row-concatenation of x's factor-k blocks; the concrete
/// coordinate matrix that pairs with `flatten` in X·flat_k·X'†.
pub fn factor_row(x: &ModuleVector, k: usize) -> CMat {
    let n = x.shape().factor_dims()[k];
    let m = x.rank();
    CMat::from_fn(n, n * m, |r, c| x.entry(c / n).block(k)[(r, c % n)])
}

/// Inverse of `factor_row` applied across all factors.
pub fn vector_from_factor_rows(
    shape: &AlgebraShape,
    rank: usize,
    rows: &[CMat],
) -> Result<ModuleVector> {
    if rows.len() != shape.num_factors() {
        return Err(Error::Shape(format!(
            "expected {} factor rows, got {}",
            shape.num_factors(),
            rows.len()
        )));
    }
    for (k, (row, &n)) in rows.iter().zip(shape.factor_dims()).enumerate() {
        if row.rows() != n || row.cols() != n * rank {
            return Err(Error::Shape(format!(
                "factor row {k} is {}x{}, expected {}x{}",
                row.rows(),
                row.cols(),
                n,
                n * rank
            )));
        }
    }
    let entries = (0..rank)
        .map(|i| {
            let blocks = rows
                .iter()
                .zip(shape.factor_dims())
                .map(|(row, &n)| CMat::from_fn(n, n, |r, c| row[(r, i * n + c)]))
                .collect();
            AlgebraElement::from_blocks(shape.clone(), blocks)
        })
        .collect::<Result<Vec<_>>>()?;
    ModuleVector::new(entries)
}
