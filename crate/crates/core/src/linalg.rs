//! Dense complex matrices and the numeric kernels built on them.
//!
//! Everything in the crate ultimately reduces to three kernels on small dense
//! complex matrices: multiplication, Hermitian eigendecomposition, and
//! inversion. The eigensolver is a cyclic complex Jacobi iteration with a fixed
//! sweep order and a fixed convergence threshold (off-diagonal Frobenius mass
//! below `1e-13` relative to the matrix), so results are deterministic for a
//! given input on every platform. Inversion is Gauss-Jordan with partial
//! pivoting. Desk-scale dimensions (tens, not thousands) make the naive
//! kernels entirely adequate.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// `z` times the identity.
    pub fn scalar(n: usize, z: Complex64) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add dims");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sub dims");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, z: Complex64) -> CMat {
        let data = self.data.iter().map(|a| a * z).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "mul dims: {}x{} * {}x{}", self.rows, self.cols, other.rows, other.cols);
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// self * other^H without materializing the adjoint.
    pub fn mul_adjoint(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.cols, "mul_adjoint dims");
        let mut out = CMat::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            for j in 0..other.rows {
                let mut acc = ZERO;
                for k in 0..self.cols {
                    acc += self.data[i * self.cols + k] * other.data[j * other.cols + k].conj();
                }
                out.data[i * other.rows + j] = acc;
            }
        }
        out
    }

    /// self^H * other without materializing the adjoint.
    pub fn adjoint_mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.rows, other.rows, "adjoint_mul dims");
        let mut out = CMat::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i].conj();
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of non-square");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// (self + self^H) / 2. Requires square.
    pub fn hermitize(&self) -> CMat {
        assert!(self.is_square(), "hermitize of non-square");
        let mut out = CMat::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in 0..self.rows {
                out[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        out
    }

    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.rows {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Kronecker product, row-major block layout: entry ((i*p+k),(j*q+l)) = a_ij * b_kl.
    pub fn kron(&self, other: &CMat) -> CMat {
        let (p, q) = (other.rows, other.cols);
        let mut out = CMat::zeros(self.rows * p, self.cols * q);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..p {
                    for l in 0..q {
                        out[(i * p + k, j * q + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Column slice [c0, c1) as a fresh matrix.
    pub fn columns(&self, c0: usize, c1: usize) -> CMat {
        assert!(c0 <= c1 && c1 <= self.cols);
        CMat::from_fn(self.rows, c1 - c0, |i, j| self[(i, j + c0)])
    }

    /// Horizontal concatenation.
    pub fn hcat(blocks: &[&CMat]) -> CMat {
        assert!(!blocks.is_empty());
        let rows = blocks[0].rows;
        assert!(blocks.iter().all(|b| b.rows == rows), "hcat rows");
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = CMat::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            for i in 0..rows {
                for j in 0..b.cols {
                    out[(i, off + j)] = b[(i, j)];
                }
            }
            off += b.cols;
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a Hermitian matrix: `values` ascending,
/// `vectors` unitary with column j the eigenvector of `values[j]`.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

const JACOBI_REL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition for Hermitian input.
///
/// The input is Hermitized first, so a small anti-Hermitian perturbation is
/// tolerated; callers that must reject non-Hermitian matrices check the defect
/// themselves. Rotations run in a fixed (p, q) sweep order and the iteration
/// stops when the off-diagonal Frobenius mass drops below `1e-13` times the
/// Frobenius norm of the input, which the quadratic convergence of Jacobi
/// reaches in a handful of sweeps at these sizes. Eigenvector phases are fixed
/// by making the entry of largest modulus real positive, so downstream
/// artifacts (witness vectors, reports) are byte-stable.
pub fn eigh(m: &CMat) -> Result<Eigh> {
    assert!(m.is_square(), "eigh of non-square");
    let n = m.rows();
    if n == 0 {
        return Ok(Eigh { values: vec![], vectors: CMat::zeros(0, 0) });
    }
    let mut a = m.hermitize();
    let mut v = CMat::identity(n);
    let scale = a.frobenius();
    if scale == 0.0 {
        return Ok(Eigh { values: vec![0.0; n], vectors: v });
    }
    let threshold = JACOBI_REL_TOL * scale;

    let mut converged = false;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                // Phase out a_pq, then a real Jacobi rotation on the 2x2 block.
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J differs from the identity only in the (p,q) plane:
                //   J_pp = c*phase, J_pq = s*phase, J_qp = -s, J_qq = c.
                let jpp = phase * c;
                let jpq = phase * s;
                let jqp = Complex64::new(-s, 0.0);
                let jqq = Complex64::new(c, 0.0);
                // A <- J^H A J: columns first, then rows.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * jpp + aiq * jqp;
                    a[(i, q)] = aip * jpq + aiq * jqq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = jpp.conj() * apj + jqp.conj() * aqj;
                    a[(q, j)] = jpq.conj() * apj + jqq.conj() * aqj;
                }
                // Reassert exact symmetry of the zeroed pair.
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * jpp + viq * jqp;
                    v[(i, q)] = vip * jpq + viq * jqq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps on a {n}x{n} matrix"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap().then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        // Phase convention: first entry within 1e-12 of the max modulus is
        // rotated to the positive real axis.
        let mut maxm = 0.0;
        for i in 0..n {
            maxm = f64::max(maxm, v[(i, src)].norm());
        }
        let mut rot = ONE;
        for i in 0..n {
            let z = v[(i, src)];
            if z.norm() >= maxm * (1.0 - 1e-12) && maxm > 0.0 {
                rot = z.conj() / z.norm();
                break;
            }
        }
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)] * rot;
        }
    }
    Ok(Eigh { values, vectors })
}

/// Rebuild sum_j f(lambda_j) v_j v_j^H from an eigendecomposition.
pub fn reconstruct(eig: &Eigh, f: impl Fn(f64) -> f64) -> CMat {
    let n = eig.values.len();
    let mut out = CMat::zeros(n, n);
    for j in 0..n {
        let fj = f(eig.values[j]);
        if fj == 0.0 {
            continue;
        }
        for i in 0..n {
            let vij = eig.vectors[(i, j)];
            for k in 0..n {
                out[(i, k)] += vij * eig.vectors[(k, j)].conj() * fj;
            }
        }
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(m: &CMat) -> Result<CMat> {
    assert!(m.is_square(), "inverse of non-square");
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = CMat::identity(n);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[(col, col)].norm();
        for r in (col + 1)..n {
            let v = a[(r, col)].norm();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Err(Error::NotInvertible { factor: 0, sigma_min: 0.0 });
        }
        if piv != col {
            for j in 0..n {
                let (x, y) = (a[(col, j)], a[(piv, j)]);
                a[(col, j)] = y;
                a[(piv, j)] = x;
                let (x, y) = (inv[(col, j)], inv[(piv, j)]);
                inv[(col, j)] = y;
                inv[(piv, j)] = x;
            }
        }
        let d = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= d;
            inv[(col, j)] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f == ZERO {
                continue;
            }
            for j in 0..n {
                let acj = a[(col, j)];
                let icj = inv[(col, j)];
                a[(r, j)] -= f * acj;
                inv[(r, j)] -= f * icj;
            }
        }
    }
    Ok(inv)
}

/// Singular values (ascending) via the Hermitian eigenvalues of the smaller Gram matrix.
pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    let gram = if m.rows() <= m.cols() { m.mul_adjoint(m) } else { m.adjoint_mul(m) };
    let eig = eigh(&gram)?;
    Ok(eig.values.into_iter().map(|l| l.max(0.0).sqrt()).collect())
}

pub fn sigma_max(m: &CMat) -> Result<f64> {
    Ok(singular_values(m)?.last().copied().unwrap_or(0.0))
}

pub fn sigma_min(m: &CMat) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}
