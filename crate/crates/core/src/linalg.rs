//! Dense complex linear algebra for small dimensions (up to ~2^10).
//!
//! `ComplexMatrix` is the universal carrier for states, observables,
//! unitaries and Choi matrices. Storage is row-major; tensor products use
//! the "left factor most significant" index convention throughout, so the
//! basis vector |jk> of a qubit pair sits at index 2j + k.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default tolerance for structural predicates (Hermitian, unitary, PSD).
pub const DEFAULT_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count must equal rows*cols");
        assert!(
            data.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "matrix entries must be finite"
        );
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    /// Column vector e_i in dimension `dim`.
    pub fn basis_column(dim: usize, i: usize) -> Self {
        let mut m = Self::zeros(dim, 1);
        m[(i, 0)] = Complex64::ONE;
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let data = rows.iter().flat_map(|row| row.iter().map(|&x| cr(x))).collect();
        Self::new(r, c, data)
    }

    pub fn column_from_slice(v: &[Complex64]) -> Self {
        Self::new(v.len(), 1, v.to_vec())
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
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

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        self.conj().transpose()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(cr(-1.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "inner dimensions must agree ({}x{} * {}x{})",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius (Hilbert-Schmidt) norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest |difference| against `other`, entrywise.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.adjoint()
            .mul(self)
            .max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn determinant(&self) -> Complex64 {
        assert!(self.is_square());
        self.to_nalgebra().determinant()
    }

    /// Kronecker product; the LEFT factor carries the most significant index:
    /// out[(i*rb + k, j*cb + l)] = a[(i,j)] * b[(k,l)].
    pub fn tensor(&self, b: &Self) -> Self {
        let mut out = Self::zeros(self.rows * b.rows, self.cols * b.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == Complex64::ZERO {
                    continue;
                }
                for k in 0..b.rows {
                    for l in 0..b.cols {
                        out[(i * b.rows + k, j * b.cols + l)] = a * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigensystem of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    /// Rebuild U D U*.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let d = ComplexMatrix::diag(&self.eigenvalues.iter().map(|&x| cr(x)).collect::<Vec<_>>());
        u.mul(&d).mul(&u.adjoint())
    }
}

/// Make the first entry of magnitude > `eps` real positive.
fn phase_normalize(col: &mut [Complex64], eps: f64) {
    if let Some(z) = col.iter().find(|z| z.norm() > eps) {
        let phase = z / z.norm();
        let inv = phase.conj();
        for z in col.iter_mut() {
            *z *= inv;
        }
    }
}

/// Pauli matrices and friends.
pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[&[cr(0.0), cr(1.0)], &[cr(1.0), cr(0.0)]])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[&[cr(0.0), c(0.0, -1.0)], &[c(0.0, 1.0), cr(0.0)]])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[&[cr(1.0), cr(0.0)], &[cr(0.0), cr(-1.0)]])
}

pub fn pauli(i: usize) -> ComplexMatrix {
    match i {
        0 => ComplexMatrix::identity(2),
        1 => sigma_x(),
        2 => sigma_y(),
        3 => sigma_z(),
        _ => panic!("pauli index must be 0..=3"),
    }
}

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues come out descending; each eigenvector's first nonzero entry
/// is made real positive so outputs are deterministic.
pub fn hermitian_eig(a: &ComplexMatrix, tol: f64) -> Result<SpectralDecomposition> {
    let defect = a.hermiticity_defect();
    if defect > tol {
        return Err(Error::NotHermitian(defect));
    }
    let n = a.rows();
    // Symmetrize so nalgebra sees an exactly Hermitian input.
    let sym = a.add(&a.adjoint()).scale(cr(0.5));
    let eig = nalgebra::SymmetricEigen::new(sym.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (out_j, &j) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[j]);
        let mut col: Vec<Complex64> = (0..n).map(|i| eig.eigenvectors[(i, j)]).collect();
        phase_normalize(&mut col, 1e-12);
        for i in 0..n {
            vectors[(i, out_j)] = col[i];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Singular value decomposition with the convention A = U D V^T
/// (transpose, not adjoint, on V), so that the Schmidt vectors of a
/// bipartite state read directly off the columns of U and V.
pub fn svd(a: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let res = nalgebra::SVD::new(a.to_nalgebra(), true, true);
    let u_na = res.u.expect("svd requested u");
    let vt_na = res.v_t.expect("svd requested v_t");
    let k = res.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        res.singular_values[j]
            .partial_cmp(&res.singular_values[i])
            .unwrap()
    });
    let mut singulars = Vec::with_capacity(k);
    let mut u = ComplexMatrix::zeros(a.rows(), k);
    let mut v = ComplexMatrix::zeros(a.cols(), k);
    for (out_j, &j) in order.iter().enumerate() {
        singulars.push(res.singular_values[j]);
        // nalgebra gives A = U S V^H; our V is therefore conj of nalgebra's V,
        // i.e. the rows of v_t conjugated... A = U S V^T  <=>  V^T = V^H_na.
        let mut ucol: Vec<Complex64> = (0..a.rows()).map(|i| u_na[(i, j)]).collect();
        let mut vcol: Vec<Complex64> = (0..a.cols()).map(|i| vt_na[(j, i)]).collect();
        // Joint phase normalization: rotating U's column by e^{ia} must rotate
        // V's column by e^{-ia} to keep A = U D V^T.
        if let Some(z) = ucol.iter().find(|z| z.norm() > 1e-12) {
            let phase = z / z.norm();
            for z in ucol.iter_mut() {
                *z *= phase.conj();
            }
            for z in vcol.iter_mut() {
                *z *= phase;
            }
        }
        for i in 0..a.rows() {
            u[(i, out_j)] = ucol[i];
        }
        for i in 0..a.cols() {
            v[(i, out_j)] = vcol[i];
        }
    }
    (u, singulars, v)
}

/// Trace norm of a Hermitian matrix: sum of |eigenvalues|.
pub fn trace_norm(a: &ComplexMatrix, tol: f64) -> Result<f64> {
    let eig = hermitian_eig(a, tol)?;
    Ok(eig.eigenvalues.iter().map(|x| x.abs()).sum())
}

/// Operator norm: largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    let (_, s, _) = svd(a);
    s.first().copied().unwrap_or(0.0)
}

/// Kronecker product convenience wrapper.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.tensor(b)
}

/// Tensor product of a whole list of factors, left factor most significant.
pub fn tensor_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    let mut it = factors.iter();
    let first = it.next().expect("at least one factor").clone();
    it.fold(first, |acc, f| acc.tensor(f))
}

/// Haar-uniform SU(2) element, deterministic per seed: the quaternion
/// coordinates (u0, u1, u2, u3) of U = u0 I + i(u1 s1 + u2 s2 + u3 s3) are
/// drawn uniformly from the unit 3-sphere.
pub fn haar_random_su2(seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    su2_from_rng(&mut rng)
}

pub(crate) fn su2_from_rng<R: Rng>(rng: &mut R) -> ComplexMatrix {
    loop {
        let u: [f64; 4] = std::array::from_fn(|_| {
            // Box-Muller standard normal
            let a: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
            let b: f64 = rng.gen();
            (-2.0 * a.ln()).sqrt() * (std::f64::consts::TAU * b).cos()
        });
        let norm = (u.iter().map(|x| x * x).sum::<f64>()).sqrt();
        if norm < 1e-6 {
            continue;
        }
        let [u0, u1, u2, u3] = u.map(|x| x / norm);
        let mut m = ComplexMatrix::identity(2).scale(cr(u0));
        for (ui, si) in [(u1, sigma_x()), (u2, sigma_y()), (u3, sigma_z())] {
            m = m.add(&si.scale(c(0.0, ui)));
        }
        return m;
    }
}

/// Haar-ish random unitary in dimension n (Ginibre + Gram-Schmidt).
pub fn haar_random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |rng: &mut ChaCha8Rng| {
        let a: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let b: f64 = rng.gen();
        (-2.0 * a.ln()).sqrt() * (std::f64::consts::TAU * b).cos()
    };
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut v: Vec<Complex64> = (0..n).map(|_| c(gauss(&mut rng), gauss(&mut rng))).collect();
        for prev in &cols {
            let ip: Complex64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
            for (x, p) in v.iter_mut().zip(prev) {
                *x -= ip * p;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
        cols.push(v);
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    m
}

/// Random matrix with standard complex Gaussian entries, seeded.
pub fn random_complex_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || {
        let a: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let b: f64 = rng.gen();
        (-2.0 * a.ln()).sqrt() * (std::f64::consts::TAU * b).cos()
    };
    let data = (0..rows * cols).map(|_| c(gauss(), gauss())).collect();
    ComplexMatrix::new(rows, cols, data)
}

/// Random Hermitian matrix, seeded.
pub fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
    let g = random_complex_matrix(n, n, seed);
    g.add(&g.adjoint()).scale(cr(0.5))
}

/// exp(i t H) for Hermitian H, via the spectral decomposition.
pub fn unitary_exp_i(h: &ComplexMatrix, t: f64, tol: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h, tol)?;
    let u = &eig.eigenvectors;
    let d = ComplexMatrix::diag(
        &eig.eigenvalues
            .iter()
            .map(|&l| Complex64::from_polar(1.0, t * l))
            .collect::<Vec<_>>(),
    );
    Ok(u.mul(&d).mul(&u.adjoint()))
}
