//! Pure and mixed quantum states and their diagnostics: Bloch coordinates,
//! entropy, purity, Schmidt decomposition, purification and fidelity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cr, hermitian_eig, pauli, svd, ComplexMatrix, DEFAULT_TOL};

/// Eigenvalue / Schmidt-coefficient cut deciding what counts as nonzero
/// (rank, entanglement, purification ancilla size).
pub const RANK_CUT: f64 = 1e-7;

/// Normalized state vector on a tensor product of factors.
///
/// `dims` records the per-factor dimensions; their product is the length of
/// `amplitudes`. The left factor is the most significant index, so for a
/// qubit pair the amplitude of |jk> sits at position 2j + k.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != amplitudes.len() || dims.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes vs factor dims {:?}",
                amplitudes.len(),
                dims
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-8 {
            return Err(Error::NotNormalized(norm_sq.sqrt()));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Single-factor state of the given dimension.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let d = amplitudes.len();
        Self::new(amplitudes, vec![d])
    }

    /// Computational basis state |i> on factors of the given dimensions.
    pub fn basis_state(dims: &[usize], index: usize) -> Self {
        let total: usize = dims.iter().product();
        let mut amplitudes = vec![Complex64::ZERO; total];
        amplitudes[index] = Complex64::ONE;
        Self {
            amplitudes,
            dims: dims.to_vec(),
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn as_column(&self) -> ComplexMatrix {
        ComplexMatrix::column_from_slice(&self.amplitudes)
    }

    /// <self|other>.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState { amplitudes, dims }
    }

    /// Apply a unitary (or any matrix of matching dimension); the result is
    /// renormalized only through validation, so non-unitary inputs that break
    /// normalization are rejected.
    pub fn apply(&self, u: &ComplexMatrix) -> Result<PureState> {
        if u.cols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} on state of dim {}",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        let out = u.mul(&self.as_column());
        PureState::new(out.column(0), self.dims.clone())
    }

    /// Multiply by a global phase so the first amplitude of magnitude
    /// above the rank cut is real non-negative.
    pub fn phase_normalized(&self) -> PureState {
        let mut amplitudes = self.amplitudes.clone();
        if let Some(z) = amplitudes.iter().find(|z| z.norm() > RANK_CUT) {
            let inv = (z / z.norm()).conj();
            for a in amplitudes.iter_mut() {
                *a *= inv;
            }
        }
        PureState {
            amplitudes,
            dims: self.dims.clone(),
        }
    }

    /// Largest amplitude difference after phase normalization of both states.
    pub fn distance_up_to_phase(&self, other: &PureState) -> f64 {
        let a = self.phase_normalized();
        let b = other.phase_normalized();
        a.amplitudes
            .iter()
            .zip(&b.amplitudes)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

/// Positive unit-trace matrix, the general (possibly mixed) state.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !matrix.is_square() || matrix.rows() != total || dims.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix vs factor dims {:?}",
                matrix.rows(),
                matrix.cols(),
                dims
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > DEFAULT_TOL {
            return Err(Error::NotDensityMatrix(format!(
                "not Hermitian (asymmetry {defect:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::NotDensityMatrix(format!("trace {} != 1", tr.re)));
        }
        let eig = hermitian_eig(&matrix, DEFAULT_TOL)?;
        if let Some(&min) = eig
            .eigenvalues
            .iter()
            .min_by(|a, b| a.partial_cmp(b).unwrap())
        {
            if min < -DEFAULT_TOL {
                return Err(Error::NotDensityMatrix(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { matrix, dims })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let d: usize = dims.iter().product();
        Self {
            matrix: ComplexMatrix::identity(d).scale(cr(1.0 / d as f64)),
            dims: dims.to_vec(),
        }
    }

    /// Eigenvalues above the rank cut.
    pub fn rank(&self) -> usize {
        let eig = hermitian_eig(&self.matrix, DEFAULT_TOL).expect("validated on construction");
        eig.eigenvalues.iter().filter(|&&l| l > RANK_CUT).count()
    }
}

/// Bloch-sphere coordinates of a qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl StokesVector {
    pub fn norm(&self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3).sqrt()
    }
}

/// psi = sum_j lambda_j xi_j (x) eta_j with descending lambda_j >= 0.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    pub coefficients: Vec<f64>,
    pub left_basis: Vec<PureState>,
    pub right_basis: Vec<PureState>,
}

impl SchmidtForm {
    /// Number of coefficients above the rank cut.
    pub fn rank(&self) -> usize {
        self.coefficients.iter().filter(|&&l| l > RANK_CUT).count()
    }

    pub fn is_entangled(&self) -> bool {
        self.rank() > 1
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(
            self.left_basis[0].dim() * self.right_basis[0].dim(),
            1,
        );
        for (j, &l) in self.coefficients.iter().enumerate() {
            let term = self.left_basis[j]
                .as_column()
                .tensor(&self.right_basis[j].as_column())
                .scale(cr(l));
            acc = acc.add(&term);
        }
        acc
    }
}

/// rho = |psi><psi|.
pub fn density_from_pure(psi: &PureState) -> DensityMatrix {
    let col = psi.as_column();
    DensityMatrix {
        matrix: col.mul(&col.adjoint()),
        dims: psi.dims().to_vec(),
    }
}

/// Stokes parameters x_i = tr(rho sigma_i) of a qubit state.
pub fn stokes(rho: &DensityMatrix) -> Result<StokesVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "Stokes vector needs a qubit, got dim {}",
            rho.dim()
        )));
    }
    let comp = |i: usize| rho.matrix().mul(&pauli(i)).trace().re;
    Ok(StokesVector {
        x1: comp(1),
        x2: comp(2),
        x3: comp(3),
    })
}

/// rho = (I + x1 s1 + x2 s2 + x3 s3)/2.
pub fn density_from_stokes(x: &StokesVector) -> Result<DensityMatrix> {
    if x.norm() > 1.0 + DEFAULT_TOL {
        return Err(Error::NotDensityMatrix(format!(
            "Bloch vector norm {} > 1",
            x.norm()
        )));
    }
    let mut m = ComplexMatrix::identity(2);
    for (xi, i) in [(x.x1, 1), (x.x2, 2), (x.x3, 3)] {
        m = m.add(&pauli(i).scale(cr(xi)));
    }
    DensityMatrix::new(m.scale(cr(0.5)), vec![2])
}

/// Von Neumann entropy -tr(rho ln rho), with 0 ln 0 := 0.
pub fn entropy(rho: &DensityMatrix) -> f64 {
    let eig = hermitian_eig(rho.matrix(), DEFAULT_TOL).expect("validated on construction");
    eig.eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum()
}

/// Purity tr(rho^2).
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().mul(rho.matrix()).trace().re
}

/// Schmidt decomposition of a bipartite pure state across the (n, m) split.
pub fn schmidt(psi: &PureState, split: (usize, usize)) -> Result<SchmidtForm> {
    let (n, m) = split;
    if n * m != psi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "split {}x{} vs state dim {}",
            n,
            m,
            psi.dim()
        )));
    }
    // Amplitude matrix A with psi = sum_{jk} A_{jk} |j>|k>; the SVD convention
    // A = U D V^T makes U's columns the left factors and V's the right ones.
    let a = ComplexMatrix::new(n, m, psi.amplitudes().to_vec());
    let (u, s, v) = svd(&a);
    let k = s.len();
    let mut left = Vec::with_capacity(k);
    let mut right = Vec::with_capacity(k);
    for j in 0..k {
        left.push(PureState {
            amplitudes: u.column(j),
            dims: vec![n],
        });
        right.push(PureState {
            amplitudes: v.column(j),
            dims: vec![m],
        });
    }
    Ok(SchmidtForm {
        coefficients: s,
        left_basis: left,
        right_basis: right,
    })
}

/// Two-qubit product test: psi is product iff xi_00 xi_11 = xi_10 xi_01.
pub fn is_product_two_qubit(psi: &PureState) -> Result<bool> {
    if psi.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit test on dim {}",
            psi.dim()
        )));
    }
    let a = psi.amplitudes();
    Ok((a[0] * a[3] - a[2] * a[1]).norm() <= RANK_CUT)
}

/// Orthonormal qubit basis
///   e0 = (cos(b/2), e^{i phi} sin(b/2)),
///   e1 = (-e^{-i phi} sin(b/2), cos(b/2)),
/// the +1/-1 eigenvectors of the spin component along
/// n = (sin b cos phi, sin b sin phi, cos b).
pub fn qubit_basis(beta: f64, phi: f64) -> (PureState, PureState) {
    let (hc, hs) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let e0 = PureState {
        amplitudes: vec![cr(hc), Complex64::from_polar(hs, phi)],
        dims: vec![2],
    };
    let e1 = PureState {
        amplitudes: vec![-Complex64::from_polar(hs, -phi), cr(hc)],
        dims: vec![2],
    };
    (e0, e1)
}

/// Spin component S_{b,phi} = sin b cos phi s_x + sin b sin phi s_y + cos b s_z.
pub fn spin_component(beta: f64, phi: f64) -> ComplexMatrix {
    let mut m = pauli(1).scale(cr(beta.sin() * phi.cos()));
    m = m.add(&pauli(2).scale(cr(beta.sin() * phi.sin())));
    m.add(&pauli(3).scale(cr(beta.cos())))
}

/// The singlet (|01> - |10>)/sqrt(2).
pub fn singlet() -> PureState {
    let s = 1.0 / 2f64.sqrt();
    PureState {
        amplitudes: vec![cr(0.0), cr(s), cr(-s), cr(0.0)],
        dims: vec![2, 2],
    }
}

/// Bell basis state; index 0 is (|00>+|11>)/sqrt(2), 1 is (|00>-|11>)/sqrt(2),
/// 2 is (|01>+|10>)/sqrt(2), 3 is the singlet.
pub fn bell_state(index: usize) -> PureState {
    let s = 1.0 / 2f64.sqrt();
    let amplitudes = match index {
        0 => vec![cr(s), cr(0.0), cr(0.0), cr(s)],
        1 => vec![cr(s), cr(0.0), cr(0.0), cr(-s)],
        2 => vec![cr(0.0), cr(s), cr(s), cr(0.0)],
        3 => vec![cr(0.0), cr(s), cr(-s), cr(0.0)],
        _ => panic!("Bell index must be 0..=3"),
    };
    PureState {
        amplitudes,
        dims: vec![2, 2],
    }
}

/// Rotation invariance of the singlet: returns ||(u(x)u)s - det(u) s||,
/// which vanishes for u in SU(2).
pub fn singlet_invariance_check(u: &ComplexMatrix) -> Result<f64> {
    let defect = u.unitarity_defect();
    if u.rows() != 2 || defect > DEFAULT_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let s = singlet().as_column();
    let rotated = u.tensor(u).mul(&s);
    let target = s.scale(u.determinant());
    Ok(rotated.sub(&target).frobenius_norm())
}

/// Partial trace over the SECOND factor of an (n, m) split.
pub fn partial_trace_right(m: &ComplexMatrix, split: (usize, usize)) -> Result<ComplexMatrix> {
    let (n, k) = split;
    if m.rows() != n * k || !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix vs split {:?}",
            m.rows(),
            m.cols(),
            split
        )));
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            for a in 0..k {
                out[(i, j)] += m[(i * k + a, j * k + a)];
            }
        }
    }
    Ok(out)
}

/// Partial trace over the FIRST factor of an (n, m) split.
pub fn partial_trace_left(m: &ComplexMatrix, split: (usize, usize)) -> Result<ComplexMatrix> {
    let (n, k) = split;
    if m.rows() != n * k || !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix vs split {:?}",
            m.rows(),
            m.cols(),
            split
        )));
    }
    let mut out = ComplexMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            for i in 0..n {
                out[(a, b)] += m[(i * k + a, i * k + b)];
            }
        }
    }
    Ok(out)
}

/// Purification: a pure state on H (x) C^r, r = rank(rho), whose partial
/// trace over the ancilla recovers rho. Built as sum_j sqrt(p_j) xi_j (x) e_j.
pub fn purify(rho: &DensityMatrix) -> PureState {
    let eig = hermitian_eig(rho.matrix(), DEFAULT_TOL).expect("validated on construction");
    let kept: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&j| eig.eigenvalues[j] > RANK_CUT)
        .collect();
    let r = kept.len().max(1);
    let d = rho.dim();
    let mut amplitudes = vec![Complex64::ZERO; d * r];
    for (slot, &j) in kept.iter().enumerate() {
        let w = eig.eigenvalues[j].max(0.0).sqrt();
        for i in 0..d {
            amplitudes[i * r + slot] += cr(w) * eig.eigenvectors[(i, j)];
        }
    }
    // Renormalize: eigenvalues below the cut may carry a sliver of weight.
    let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for a in amplitudes.iter_mut() {
        *a /= norm;
    }
    PureState {
        amplitudes,
        dims: vec![d, r],
    }
    .phase_normalized()
}

/// Overlap matrix C_{jk} = sqrt(p_j q_k) <xi_j|eta_k> between the
/// eigensystems of the two states; the fidelity is its nuclear norm.
fn overlap_matrix(rho: &DensityMatrix, gamma: &DensityMatrix) -> ComplexMatrix {
    let er = hermitian_eig(rho.matrix(), DEFAULT_TOL).expect("validated");
    let eg = hermitian_eig(gamma.matrix(), DEFAULT_TOL).expect("validated");
    let d = rho.dim();
    let mut cmat = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            let ip: Complex64 = (0..d)
                .map(|i| er.eigenvectors[(i, j)].conj() * eg.eigenvectors[(i, k)])
                .sum();
            cmat[(j, k)] =
                cr((er.eigenvalues[j].max(0.0) * eg.eigenvalues[k].max(0.0)).sqrt()) * ip;
        }
    }
    cmat
}

/// Uhlmann fidelity: the maximal overlap |<xi|eta>| over purifications,
/// obtained by aligning the ancilla with the polar unitary of the overlap
/// matrix (a single polar/SVD step is already optimal and the iteration is a
/// fixed point after it).
pub fn fidelity(rho: &DensityMatrix, gamma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != gamma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between dims {} and {}",
            rho.dim(),
            gamma.dim()
        )));
    }
    let (_, s, _) = svd(&overlap_matrix(rho, gamma));
    Ok(s.iter().sum::<f64>().min(1.0))
}

/// Minimal purification distance min ||xi - eta|| = sqrt(2 - 2 F).
/// Experimental: exposed for diagnostics only.
pub fn fidelity_distance(rho: &DensityMatrix, gamma: &DensityMatrix) -> Result<f64> {
    let f = fidelity(rho, gamma)?;
    Ok((2.0 - 2.0 * f).max(0.0).sqrt())
}
