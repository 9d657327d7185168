//! Quantum operations: Kraus channels, Choi matrices, CP/TP verification,
//! Stinespring dilation, anti-unitary dressing, and the named unitary
//! factories (two-parameter strategy set, Cartan Z-Y-Z, Mach-Zender
//! interferometer, wave plates, Pauli channels).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    c, cr, hermitian_eig, pauli, sigma_x, tensor_product, ComplexMatrix, DEFAULT_TOL,
};
use crate::states::{partial_trace_left, partial_trace_right, DensityMatrix, PureState};

/// Floor for Choi eigenvalues when deciding complete positivity and when
/// extracting Kraus operators.
pub const CP_EIGENVALUE_FLOOR: f64 = 1e-9;

/// Quantum operation in Kraus form T(X) = sum_k V_k X V_k*.
///
/// Construction accepts any operation with sum V_k* V_k <= I; channels with
/// the sum equal to I are trace preserving.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
    input_dim: usize,
    output_dim: usize,
}

impl KrausChannel {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::DimensionMismatch("no Kraus operators".into()));
        }
        let input_dim = operators[0].cols();
        let output_dim = operators[0].rows();
        for v in &operators {
            if v.cols() != input_dim || v.rows() != output_dim {
                return Err(Error::DimensionMismatch(
                    "Kraus operators of unequal shape".into(),
                ));
            }
        }
        let ch = Self {
            operators,
            input_dim,
            output_dim,
        };
        let sum = ch.kraus_sum();
        let slack = ComplexMatrix::identity(input_dim).sub(&sum);
        let eig = hermitian_eig(&slack, 1e-8)?;
        if eig.eigenvalues.iter().any(|&l| l < -1e-8) {
            return Err(Error::NotCompletelyPositive(
                *eig.eigenvalues.last().unwrap(),
            ));
        }
        Ok(ch)
    }

    /// T(rho) = U rho U*.
    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        let defect = u.unitarity_defect();
        if defect > DEFAULT_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Self::new(vec![u.clone()])
    }

    pub fn identity(d: usize) -> Self {
        Self {
            operators: vec![ComplexMatrix::identity(d)],
            input_dim: d,
            output_dim: d,
        }
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    fn kraus_sum(&self) -> ComplexMatrix {
        self.operators
            .iter()
            .fold(ComplexMatrix::zeros(self.input_dim, self.input_dim), |acc, v| {
                acc.add(&v.adjoint().mul(v))
            })
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.kraus_sum()
            .max_abs_diff(&ComplexMatrix::identity(self.input_dim))
            < 1e-8
    }

    /// Raw action on a matrix (no density-matrix validation).
    pub fn apply_matrix(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.output_dim, self.output_dim);
        for v in &self.operators {
            out = out.add(&v.mul(x).mul(&v.adjoint()));
        }
        out
    }

    /// Action on a state. The result is revalidated, so applying a
    /// non-trace-preserving operation surfaces as an error.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "channel input dim {} vs state dim {}",
                self.input_dim,
                rho.dim()
            )));
        }
        let out = self.apply_matrix(rho.matrix());
        let dims = if self.output_dim == rho.dim() {
            rho.dims().to_vec()
        } else {
            vec![self.output_dim]
        };
        DensityMatrix::new(out, dims)
    }

    /// Composition self after other: (self . other)(X) = self(other(X)).
    pub fn compose(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if other.output_dim != self.input_dim {
            return Err(Error::DimensionMismatch(format!(
                "composing output dim {} into input dim {}",
                other.output_dim, self.input_dim
            )));
        }
        let mut operators = Vec::with_capacity(self.operators.len() * other.operators.len());
        for a in &self.operators {
            for b in &other.operators {
                operators.push(a.mul(b));
            }
        }
        KrausChannel::new(operators)
    }

    /// Tensor product channel acting factor-wise, left factor most
    /// significant.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let mut operators = Vec::with_capacity(self.operators.len() * other.operators.len());
        for a in &self.operators {
            for b in &other.operators {
                operators.push(tensor_product(a, b));
            }
        }
        KrausChannel {
            operators,
            input_dim: self.input_dim * other.input_dim,
            output_dim: self.output_dim * other.output_dim,
        }
    }

    /// Classical mixture of unitary strategies: Kraus set {sqrt(w_i) U_i}.
    pub fn mixture_of_unitaries(pairs: &[(f64, ComplexMatrix)]) -> Result<KrausChannel> {
        if pairs.is_empty() {
            return Err(Error::InvalidProbabilities("empty mixture".into()));
        }
        let total: f64 = pairs.iter().map(|(w, _)| w).sum();
        if pairs.iter().any(|(w, _)| *w < -DEFAULT_TOL) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidProbabilities(format!(
                "weights sum to {total}"
            )));
        }
        let mut operators = Vec::new();
        for (w, u) in pairs {
            let defect = u.unitarity_defect();
            if defect > DEFAULT_TOL {
                return Err(Error::NotUnitary(defect));
            }
            if *w > 0.0 {
                operators.push(u.scale(cr(w.sqrt())));
            }
        }
        KrausChannel::new(operators)
    }
}

/// Matrix of a channel on input (x) output space: the entry at row (i, j),
/// column (k, l) is <e_j | T(|e_i><e_k|) e_l>, with the INPUT index most
/// significant. No 1/d normalization is applied, so the identity qubit
/// channel has the single nonzero eigenvalue 2.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    pub matrix: ComplexMatrix,
    pub input_dim: usize,
    pub output_dim: usize,
}

impl ChoiMatrix {
    /// T is completely positive iff this matrix is positive semi-definite.
    pub fn is_cp(&self) -> bool {
        self.min_eigenvalue() >= -CP_EIGENVALUE_FLOOR
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let eig = hermitian_eig(&self.matrix, 1e-8).expect("Choi matrix must be Hermitian");
        *eig.eigenvalues.last().unwrap()
    }
}

/// vec(V) on input (x) output space: vec(V)[(i, k)] = V_{ki}.
fn vec_operator(v: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = (v.cols(), v.rows());
    let mut out = ComplexMatrix::zeros(n * m, 1);
    for i in 0..n {
        for k in 0..m {
            out[(i * m + k, 0)] = v[(k, i)];
        }
    }
    out
}

/// Choi matrix of a Kraus channel: sum_k vec(V_k) vec(V_k)*.
pub fn choi(ch: &KrausChannel) -> ChoiMatrix {
    let d = ch.input_dim * ch.output_dim;
    let mut m = ComplexMatrix::zeros(d, d);
    for v in ch.operators() {
        let w = vec_operator(v);
        m = m.add(&w.mul(&w.adjoint()));
    }
    ChoiMatrix {
        matrix: m,
        input_dim: ch.input_dim,
        output_dim: ch.output_dim,
    }
}

/// Choi matrix of an arbitrary linear map given by its action on the matrix
/// units |e_i><e_k|.
pub fn choi_from_map<F>(input_dim: usize, output_dim: usize, map: F) -> ChoiMatrix
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    let d = input_dim * output_dim;
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..input_dim {
        for k in 0..input_dim {
            let mut unit = ComplexMatrix::zeros(input_dim, input_dim);
            unit[(i, k)] = Complex64::ONE;
            let img = map(&unit);
            for j in 0..output_dim {
                for l in 0..output_dim {
                    m[(i * output_dim + j, k * output_dim + l)] = img[(j, l)];
                }
            }
        }
    }
    ChoiMatrix {
        matrix: m,
        input_dim,
        output_dim,
    }
}

/// Extract a Kraus representation from a positive Choi matrix; at most
/// input_dim * output_dim operators.
pub fn kraus_from_choi(cm: &ChoiMatrix) -> Result<KrausChannel> {
    let eig = hermitian_eig(&cm.matrix, 1e-8)?;
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -CP_EIGENVALUE_FLOOR {
            return Err(Error::NotCompletelyPositive(min));
        }
    }
    let mut operators = Vec::new();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        if l <= CP_EIGENVALUE_FLOOR {
            continue;
        }
        let w = l.sqrt();
        let col = eig.eigenvectors.column(j);
        let mut v = ComplexMatrix::zeros(cm.output_dim, cm.input_dim);
        for i in 0..cm.input_dim {
            for k in 0..cm.output_dim {
                v[(k, i)] = cr(w) * col[i * cm.output_dim + k];
            }
        }
        operators.push(v);
    }
    if operators.is_empty() {
        operators.push(ComplexMatrix::zeros(cm.output_dim, cm.input_dim));
        return KrausChannel::new(operators);
    }
    KrausChannel::new(operators)
}

/// Partial trace keeping the indicated factor of an (n, m) split.
pub fn partial_trace(
    a: &ComplexMatrix,
    keep: usize,
    dims: (usize, usize),
) -> Result<ComplexMatrix> {
    match keep {
        0 => partial_trace_right(a, dims),
        1 => partial_trace_left(a, dims),
        _ => Err(Error::InvalidParameter(format!(
            "keep must be 0 or 1, got {keep}"
        ))),
    }
}

/// Stinespring dilation of a trace-preserving channel: a unitary U on
/// H (x) C^K and the ancilla state omega = |e_0><e_0| such that
/// T(rho) = tr_anc[U (rho (x) omega) U*]. The ancilla-0 block column of U
/// stacks the Kraus operators; the rest is an orthonormal completion.
pub fn stinespring(ch: &KrausChannel) -> Result<(ComplexMatrix, DensityMatrix)> {
    if !ch.is_trace_preserving() {
        let dev = ch
            .kraus_sum()
            .max_abs_diff(&ComplexMatrix::identity(ch.input_dim));
        return Err(Error::NotTracePreserving(dev));
    }
    if ch.input_dim != ch.output_dim {
        return Err(Error::DimensionMismatch(
            "dilation implemented for equal input/output dimension".into(),
        ));
    }
    let d = ch.input_dim;
    let k = ch.operators.len();
    let n = d * k;
    // Prescribed columns: U (e_i (x) e_0) = sum_k (V_k e_i) (x) e_k.
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut positions: Vec<usize> = Vec::with_capacity(n);
    for i in 0..d {
        let mut col = vec![Complex64::ZERO; n];
        for (a, v) in ch.operators.iter().enumerate() {
            for j in 0..d {
                col[j * k + a] = v[(j, i)];
            }
        }
        cols.push(col);
        positions.push(i * k);
    }
    // Orthonormal completion from the standard basis.
    let mut free: Vec<usize> = (0..n).filter(|p| !positions.contains(p)).collect();
    for cand in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = vec![Complex64::ZERO; n];
        v[cand] = Complex64::ONE;
        for prev in &cols {
            let ip: Complex64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
            for (x, p) in v.iter_mut().zip(prev) {
                *x -= ip * p;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        cols.push(v);
        positions.push(free.remove(0));
    }
    let mut u = ComplexMatrix::zeros(n, n);
    for (col, &pos) in cols.iter().zip(&positions) {
        for r in 0..n {
            u[(r, pos)] = col[r];
        }
    }
    let omega = crate::states::density_from_pure(&PureState::basis_state(&[k], 0));
    Ok((u, omega))
}

/// Anti-unitary operator v -> U conj(v) with unitary linear part.
#[derive(Debug, Clone)]
pub struct AntiUnitaryOp {
    linear_part: ComplexMatrix,
}

impl AntiUnitaryOp {
    pub fn new(linear_part: ComplexMatrix) -> Result<Self> {
        let defect = linear_part.unitarity_defect();
        if defect > DEFAULT_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { linear_part })
    }

    pub fn linear_part(&self) -> &ComplexMatrix {
        &self.linear_part
    }
}

/// Anti-unitary dressing rho -> (U.s) rho (U.s)^{-1} = U conj(rho) U*,
/// the operator composition of v -> U conj(v) with its inverse. On the Bloch
/// sphere this acts as an orthogonal map of determinant -1 (conjugation
/// reflects x2, the unitary part rotates).
pub fn antiunitary_dress(a: &AntiUnitaryOp, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let u = &a.linear_part;
    if rho.dim() != u.rows() {
        return Err(Error::DimensionMismatch(format!(
            "operator dim {} vs state dim {}",
            u.rows(),
            rho.dim()
        )));
    }
    let out = u.mul(&rho.matrix().conj()).mul(&u.adjoint());
    DensityMatrix::new(out, rho.dims().to_vec())
}

/// Pure-state-collapsing map T(rho) = tr[rho B] |psi><psi|, returned as its
/// Choi matrix. Experimental: provided for completeness of the structure
/// theory of qubit operations, validated only through type invariants.
pub fn pure_collapse_choi(b: &ComplexMatrix, psi: &PureState) -> ChoiMatrix {
    let proj = psi.as_column().mul(&psi.as_column().adjoint());
    choi_from_map(b.rows(), psi.dim(), |x| proj.scale(x.mul(b).trace()))
}

// ---------------------------------------------------------------------------
// Unitary factories
// ---------------------------------------------------------------------------

/// General SU(2) element
///   [[ e^{i phi} cos th,   e^{i psi} sin th ],
///    [ -e^{-i psi} sin th, e^{-i phi} cos th ]]
/// with th in [0, pi/2], phi, psi in [-pi, pi].
pub fn su2(theta: f64, phi: f64, psi: f64) -> ComplexMatrix {
    let (ct, st) = (theta.cos(), theta.sin());
    ComplexMatrix::from_rows(&[
        &[
            Complex64::from_polar(ct, phi),
            Complex64::from_polar(st, psi),
        ],
        &[
            -Complex64::from_polar(st, -psi),
            Complex64::from_polar(ct, -phi),
        ],
    ])
}

/// Two-parameter strategy set
///   U(th, phi) = [[ e^{i phi} cos(th/2),  sin(th/2) ],
///                 [ -sin(th/2),  e^{-i phi} cos(th/2) ]],
/// with th in [0, pi] and phi in [0, pi/2]; U(0,0) = I ("cooperate"),
/// U(pi,0) = (0 1; -1 0) ("defect"), U(0, pi/2) = i sigma_z.
pub fn ewl_strategy(theta: f64, phi: f64) -> ComplexMatrix {
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    ComplexMatrix::from_rows(&[
        &[Complex64::from_polar(ct, phi), cr(st)],
        &[cr(-st), Complex64::from_polar(ct, -phi)],
    ])
}

/// Cartan (Z-Y) decomposition e^{i b Z} e^{i c Y} e^{i d Z}, computed by
/// direct multiplication of the three exponentials.
pub fn cartan(b: f64, cpar: f64, d: f64) -> ComplexMatrix {
    let ez = |t: f64| {
        ComplexMatrix::diag(&[Complex64::from_polar(1.0, t), Complex64::from_polar(1.0, -t)])
    };
    // e^{i c Y} = cos c I + i sin c sigma_y = [[cos c, sin c], [-sin c, cos c]]
    let ey = ComplexMatrix::from_rows(&[
        &[cr(cpar.cos()), cr(cpar.sin())],
        &[cr(-cpar.sin()), cr(cpar.cos())],
    ]);
    ez(b).mul(&ey).mul(&ez(d))
}

/// Phase shifter on the first polarization: diag(e^{i phi}, 1).
pub fn phase_shifter_r(phi: f64) -> ComplexMatrix {
    ComplexMatrix::diag(&[Complex64::from_polar(1.0, phi), Complex64::ONE])
}

/// Phase shifter on the second polarization: diag(1, e^{i phi}).
pub fn phase_shifter_l(phi: f64) -> ComplexMatrix {
    ComplexMatrix::diag(&[Complex64::ONE, Complex64::from_polar(1.0, phi)])
}

/// Symmetric beam splitter (I + i sigma_x)/sqrt(2).
pub fn beam_splitter() -> ComplexMatrix {
    ComplexMatrix::identity(2)
        .add(&sigma_x().scale(c(0.0, 1.0)))
        .scale(cr(1.0 / 2f64.sqrt()))
}

/// Mirror operator -i sigma_x.
pub fn mirror() -> ComplexMatrix {
    sigma_x().scale(c(0.0, -1.0))
}

/// Mach-Zender interferometer
///   U_MZ = U_R(th2) U_BS U_R(phi1) U_L(phi2) U_mir U_BS U_R(th1),
/// a full four-parameter family in U(2).
pub fn mach_zender(theta1: f64, theta2: f64, phi1: f64, phi2: f64) -> ComplexMatrix {
    phase_shifter_r(theta2)
        .mul(&beam_splitter())
        .mul(&phase_shifter_r(phi1))
        .mul(&phase_shifter_l(phi2))
        .mul(&mirror())
        .mul(&beam_splitter())
        .mul(&phase_shifter_r(theta1))
}

/// e^{i t sigma_2} as an explicit rotation matrix.
fn exp_i_sigma_y(t: f64) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        &[cr(t.cos()), cr(t.sin())],
        &[cr(-t.sin()), cr(t.cos())],
    ])
}

/// Quarter wave plate e^{-i th s2} e^{-i pi s3/4} e^{-i th s2}.
pub fn qwp(theta: f64) -> ComplexMatrix {
    let z = ComplexMatrix::diag(&[
        Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
        Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
    ]);
    exp_i_sigma_y(-theta).mul(&z).mul(&exp_i_sigma_y(-theta))
}

/// Half wave plate, the square of the quarter wave plate at the same angle.
pub fn hwp(theta: f64) -> ComplexMatrix {
    let q = qwp(theta);
    q.mul(&q)
}

fn validate_distribution(p: &[f64]) -> Result<()> {
    if p.iter().any(|&x| x < -DEFAULT_TOL) {
        return Err(Error::InvalidProbabilities("negative entry".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!("sum {total} != 1")));
    }
    Ok(())
}

/// Qubit Pauli channel T(rho) = sum_j p_j sigma_j rho sigma_j.
pub fn pauli_channel(p: [f64; 4]) -> Result<KrausChannel> {
    validate_distribution(&p)?;
    let operators = p
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(j, &w)| pauli(j).scale(cr(w.sqrt())))
        .collect();
    KrausChannel::new(operators)
}

/// Cyclic shift X e_j = e_{j-1 mod d}.
pub fn generalized_pauli_x(d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        m[((j + d - 1) % d, j)] = Complex64::ONE;
    }
    m
}

/// Clock operator Z e_j = e^{-2 pi i j / d} e_j.
pub fn generalized_pauli_z(d: usize) -> ComplexMatrix {
    let entries: Vec<Complex64> = (0..d)
        .map(|j| Complex64::from_polar(1.0, -std::f64::consts::TAU * j as f64 / d as f64))
        .collect();
    ComplexMatrix::diag(&entries)
}

/// Generalized Pauli channel T(rho) = sum_{kj} p_{kj} (X^k Z^j)* rho (X^k Z^j)
/// on C^d; `p` is a d x d probability table indexed (k, j).
pub fn generalized_pauli_channel(d: usize, p: &[Vec<f64>]) -> Result<KrausChannel> {
    if p.len() != d || p.iter().any(|row| row.len() != d) {
        return Err(Error::DimensionMismatch(format!(
            "probability table must be {d}x{d}"
        )));
    }
    let flat: Vec<f64> = p.iter().flatten().copied().collect();
    validate_distribution(&flat)?;
    let x = generalized_pauli_x(d);
    let z = generalized_pauli_z(d);
    let mut xk = ComplexMatrix::identity(d);
    let mut operators = Vec::new();
    for k in 0..d {
        let mut xkzj = xk.clone();
        for j in 0..d {
            if p[k][j] > 0.0 {
                operators.push(xkzj.adjoint().scale(cr(p[k][j].sqrt())));
            }
            if j + 1 < d {
                xkzj = xkzj.mul(&z);
            }
        }
        if k + 1 < d {
            xk = x.mul(&xk);
        }
    }
    KrausChannel::new(operators)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        haar_random_su2, haar_random_unitary, random_complex_matrix, sigma_y, sigma_z,
        DEFAULT_TOL,
    };
    use crate::states::{density_from_pure, density_from_stokes, stokes, StokesVector};
    use approx::assert_abs_diff_eq;

    fn random_density(dim: usize, seed: u64) -> DensityMatrix {
        let g = random_complex_matrix(dim, dim, seed);
        let p = g.mul(&g.adjoint());
        let tr = p.trace().re;
        DensityMatrix::new(p.scale(cr(1.0 / tr)), vec![dim]).unwrap()
    }

    fn random_tp_channel(dim: usize, kraus: usize, seed: u64) -> KrausChannel {
        // random isometry columns from a Haar unitary on dim*kraus
        let u = haar_random_unitary(dim * kraus, seed);
        let mut ops = Vec::with_capacity(kraus);
        for a in 0..kraus {
            let mut v = ComplexMatrix::zeros(dim, dim);
            for j in 0..dim {
                for i in 0..dim {
                    v[(j, i)] = u[(j * kraus + a, i * kraus)];
                }
            }
            ops.push(v);
        }
        KrausChannel::new(ops).unwrap()
    }

    #[test]
    fn apply_identity_and_degenerate_pauli() {
        let rho = random_density(2, 1);
        let id = KrausChannel::identity(2);
        assert!(id.apply(&rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-12);
        let ch = pauli_channel([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(ch.apply(&rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn unitary_dressing_matches_single_kraus() {
        for seed in 0..10 {
            let u = haar_random_su2(seed);
            let rho = random_density(2, 100 + seed);
            let ch = KrausChannel::from_unitary(&u).unwrap();
            let direct = u.mul(rho.matrix()).mul(&u.adjoint());
            assert!(ch.apply(&rho).unwrap().matrix().max_abs_diff(&direct) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_examples() {
        let b = random_complex_matrix(2, 2, 5);
        let d = random_complex_matrix(2, 2, 6);
        let out = partial_trace(&tensor_product(&b, &d), 0, (2, 2)).unwrap();
        assert!(out.max_abs_diff(&b.scale(d.trace())) < 1e-12);

        let bell = density_from_pure(&crate::states::bell_state(0));
        for keep in 0..2 {
            let half = partial_trace(bell.matrix(), keep, (2, 2)).unwrap();
            assert!(half.max_abs_diff(&ComplexMatrix::identity(2).scale(cr(0.5))) < 1e-12);
        }
    }

    #[test]
    fn partial_trace_duality() {
        // tr[(A (x) I) (sigma (x) rho)]-type duality:
        // tr[ tr_2(M) A ] = tr[ M (A (x) I) ] on random M, A
        for seed in 0..5 {
            let m = random_complex_matrix(6, 6, 200 + seed);
            let a = random_complex_matrix(2, 2, 300 + seed);
            let lhs = partial_trace(&m, 0, (2, 3)).unwrap().mul(&a).trace();
            let rhs = m
                .mul(&tensor_product(&a, &ComplexMatrix::identity(3)))
                .trace();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn choi_of_identity() {
        let cm = choi(&KrausChannel::identity(2));
        let eig = hermitian_eig(&cm.matrix, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(eig.eigenvalues[0], 2.0, epsilon = 1e-12);
        for &l in &eig.eigenvalues[1..] {
            assert!(l.abs() < 1e-12);
        }
        assert!(cm.is_cp());
    }

    #[test]
    fn transpose_map_is_not_cp() {
        let cm = choi_from_map(2, 2, |x| x.transpose());
        assert!(!cm.is_cp());
        assert!(cm.min_eigenvalue() < -0.5);
    }

    #[test]
    fn kraus_channels_are_cp() {
        for seed in 0..5 {
            let ch = random_tp_channel(2, 2, 400 + seed);
            assert!(choi(&ch).is_cp());
            assert!(ch.is_trace_preserving());
        }
    }

    #[test]
    fn choi_matches_map_construction() {
        for seed in 0..5 {
            let ch = random_tp_channel(2, 3, 500 + seed);
            let direct = choi(&ch);
            let via_map = choi_from_map(2, 2, |x| ch.apply_matrix(x));
            assert!(direct.matrix.max_abs_diff(&via_map.matrix) < 1e-10);
        }
    }

    #[test]
    fn kraus_from_choi_round_trip() {
        // identity: single Kraus = I up to phase
        let ch = kraus_from_choi(&choi(&KrausChannel::identity(2))).unwrap();
        assert_eq!(ch.operators().len(), 1);
        let v = &ch.operators()[0];
        let phase = v[(0, 0)] / v[(0, 0)].norm();
        assert!(v.scale(phase.conj()).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-10);

        // two-term Pauli mixture: two operators, each sqrt(1/2) * Pauli
        let ch = pauli_channel([0.5, 0.5, 0.0, 0.0]).unwrap();
        let rec = kraus_from_choi(&choi(&ch)).unwrap();
        assert_eq!(rec.operators().len(), 2);
        for seed in 0..5 {
            let rho = random_density(2, 600 + seed);
            assert!(
                rec.apply_matrix(rho.matrix())
                    .max_abs_diff(&ch.apply_matrix(rho.matrix()))
                    < 1e-9
            );
        }

        // random CP channels: equal action on 20 random states
        for seed in 0..3 {
            let ch = random_tp_channel(3, 2, 700 + seed);
            let rec = kraus_from_choi(&choi(&ch)).unwrap();
            assert!(rec.operators().len() <= 9);
            for s in 0..20 {
                let rho = random_density(3, 1000 + 100 * seed + s);
                assert!(
                    rec.apply_matrix(rho.matrix())
                        .max_abs_diff(&ch.apply_matrix(rho.matrix()))
                        < 1e-9
                );
            }
            // and choi of the reconstruction matches the original choi
            assert!(choi(&rec).matrix.max_abs_diff(&choi(&ch).matrix) < 1e-9);
        }
    }

    #[test]
    fn kraus_from_choi_rejects_non_cp() {
        let cm = choi_from_map(2, 2, |x| x.transpose());
        assert!(matches!(
            kraus_from_choi(&cm),
            Err(Error::NotCompletelyPositive(_))
        ));
    }

    #[test]
    fn stinespring_examples() {
        // unitary channel: ancilla dimension 1
        let u = haar_random_su2(3);
        let (dil, omega) = stinespring(&KrausChannel::from_unitary(&u).unwrap()).unwrap();
        assert_eq!(omega.dim(), 1);
        assert!(dil.unitarity_defect() < 1e-9);

        // fully depolarizing Pauli mixture on 2 (x) 4
        let ch = pauli_channel([0.25; 4]).unwrap();
        let (dil, omega) = stinespring(&ch).unwrap();
        assert_eq!(dil.rows(), 8);
        assert!(dil.unitarity_defect() < 1e-9);
        for seed in 0..5 {
            let rho = random_density(2, 800 + seed);
            let joint = tensor_product(rho.matrix(), omega.matrix());
            let evolved = dil.mul(&joint).mul(&dil.adjoint());
            let out = partial_trace(&evolved, 0, (2, omega.dim())).unwrap();
            assert!(out.max_abs_diff(&ch.apply_matrix(rho.matrix())) < 1e-9);
        }
    }

    #[test]
    fn stinespring_reproduces_random_channels() {
        let mut count = 0;
        for dim in 2..=3usize {
            for kraus in 1..=3usize {
                for seed in 0..6u64 {
                    let ch = random_tp_channel(dim, kraus, 2000 + 100 * seed + 10 * dim as u64 + kraus as u64);
                    let (dil, omega) = stinespring(&ch).unwrap();
                    assert!(dil.unitarity_defect() < 1e-8);
                    let rho = random_density(dim, 3000 + seed);
                    let joint = tensor_product(rho.matrix(), omega.matrix());
                    let evolved = dil.mul(&joint).mul(&dil.adjoint());
                    let out = partial_trace(&evolved, 0, (dim, omega.dim())).unwrap();
                    assert!(out.max_abs_diff(&ch.apply_matrix(rho.matrix())) < 1e-9);
                    count += 1;
                }
            }
        }
        assert!(count >= 36);
    }

    #[test]
    fn stinespring_rejects_non_tp() {
        let op = KrausChannel::new(vec![ComplexMatrix::identity(2).scale(cr(0.5))]).unwrap();
        assert!(matches!(
            stinespring(&op),
            Err(Error::NotTracePreserving(_))
        ));
    }

    /// Fit the 3x3 linear part of the induced Stokes map of a qubit channel.
    fn stokes_map<F: Fn(&DensityMatrix) -> DensityMatrix>(f: F) -> ([[f64; 3]; 3], [f64; 3]) {
        let center = stokes(&f(&DensityMatrix::maximally_mixed(&[2]))).unwrap();
        let offset = [center.x1, center.x2, center.x3];
        let mut m = [[0.0; 3]; 3];
        for (j, x) in [
            StokesVector { x1: 1.0, x2: 0.0, x3: 0.0 },
            StokesVector { x1: 0.0, x2: 1.0, x3: 0.0 },
            StokesVector { x1: 0.0, x2: 0.0, x3: 1.0 },
        ]
        .iter()
        .enumerate()
        {
            let out = stokes(&f(&density_from_stokes(x).unwrap())).unwrap();
            m[0][j] = out.x1 - offset[0];
            m[1][j] = out.x2 - offset[1];
            m[2][j] = out.x3 - offset[2];
        }
        (m, offset)
    }

    fn det3(m: &[[f64; 3]; 3]) -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[test]
    fn antiunitary_dressing_examples() {
        // pure conjugation (U = I) realizes the reflection
        // s1 -> s1, s2 -> -s2, s3 -> s3 on Stokes vectors
        let a = AntiUnitaryOp::new(ComplexMatrix::identity(2)).unwrap();
        let (m, off) = stokes_map(|rho| antiunitary_dress(&a, rho).unwrap());
        assert!(off.iter().all(|x| x.abs() < 1e-10));
        let expected = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(m[i][j], expected[i][j], epsilon = 1e-10);
            }
        }

        // U = e^{ibZ}: the z axis stays fixed and the map is the reflection
        // composed with a z rotation, still orthogonal with det -1
        let u = ComplexMatrix::diag(&[
            Complex64::from_polar(1.0, 0.6),
            Complex64::from_polar(1.0, -0.6),
        ]);
        let a = AntiUnitaryOp::new(u).unwrap();
        let (m, off) = stokes_map(|rho| antiunitary_dress(&a, rho).unwrap());
        assert!(off.iter().all(|x| x.abs() < 1e-10));
        assert_abs_diff_eq!(m[2][2], 1.0, epsilon = 1e-10);
        assert!(m[0][2].abs() < 1e-10 && m[1][2].abs() < 1e-10);
        assert_abs_diff_eq!(det3(&m), -1.0, epsilon = 1e-9);

        // identity linear part on a real state: unchanged
        let a = AntiUnitaryOp::new(ComplexMatrix::identity(2)).unwrap();
        let rho = density_from_stokes(&StokesVector { x1: 0.3, x2: 0.0, x3: 0.4 }).unwrap();
        assert!(antiunitary_dress(&a, &rho)
            .unwrap()
            .matrix()
            .max_abs_diff(rho.matrix())
            < 1e-12);
    }

    #[test]
    fn dressing_determinants() {
        for seed in 0..10 {
            let u = haar_random_su2(4000 + seed);
            // unitary dressing: SO(3), det +1, zero offset
            let ch = KrausChannel::from_unitary(&u).unwrap();
            let (m, off) = stokes_map(|rho| ch.apply(rho).unwrap());
            assert!(off.iter().all(|x| x.abs() < 1e-9));
            assert_abs_diff_eq!(det3(&m), 1.0, epsilon = 1e-9);
            // orthogonality of the linear part
            for i in 0..3 {
                for j in 0..3 {
                    let dot: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(dot, expect, epsilon = 1e-9);
                }
            }
            // anti-unitary dressing: det -1
            let a = AntiUnitaryOp::new(u).unwrap();
            let (m, _) = stokes_map(|rho| antiunitary_dress(&a, rho).unwrap());
            assert_abs_diff_eq!(det3(&m), -1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn composition_of_cptp_is_cptp() {
        for seed in 0..5 {
            let a = random_tp_channel(2, 2, 5000 + seed);
            let b = random_tp_channel(2, 3, 6000 + seed);
            let comp = a.compose(&b).unwrap();
            assert!(comp.is_trace_preserving());
            assert!(choi(&comp).is_cp());
        }
    }

    #[test]
    fn ewl_strategy_endpoints() {
        assert!(ewl_strategy(0.0, 0.0).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        let dhat = ComplexMatrix::from_rows(&[&[cr(0.0), cr(1.0)], &[cr(-1.0), cr(0.0)]]);
        assert!(ewl_strategy(std::f64::consts::PI, 0.0).max_abs_diff(&dhat) < 1e-12);
        let qhat = sigma_z().scale(c(0.0, 1.0));
        assert!(ewl_strategy(0.0, std::f64::consts::FRAC_PI_2).max_abs_diff(&qhat) < 1e-12);
    }

    #[test]
    fn su2_factory_properties() {
        for seed in 0..10 {
            let t = 0.1 + 0.14 * seed as f64;
            let u = su2(t, 1.7 - 0.3 * seed as f64, -2.0 + 0.5 * seed as f64);
            assert!(u.unitarity_defect() < 1e-12);
            assert!((u.determinant() - Complex64::ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn cartan_matches_su2_form() {
        for (b, cpar, d) in [(0.3, 0.7, -0.4), (1.2, 0.2, 2.1), (-0.8, 1.4, 0.5)] {
            let u = cartan(b, cpar, d);
            assert!(u.unitarity_defect() < 1e-12);
            assert!((u.determinant() - Complex64::ONE).norm() < 1e-12);
            // e^{ibZ} e^{icY} e^{idZ} = su2(c, b+d, b-d)
            let v = su2(cpar, b + d, b - d);
            assert!(u.max_abs_diff(&v) < 1e-12);
        }
    }

    #[test]
    fn mach_zender_is_unitary_and_covers_u2() {
        for (t1, t2, p1, p2) in [
            (0.0, 0.0, 0.0, 0.0),
            (0.5, 1.1, -0.7, 2.2),
            (3.0, -1.0, 0.3, 0.9),
        ] {
            let u = mach_zender(t1, t2, p1, p2);
            assert!(u.unitarity_defect() < 1e-12);
        }
        // four parameters reach non-special unitaries: det is not always 1
        let u = mach_zender(0.4, 0.0, 0.0, 0.0);
        assert!((u.determinant() - Complex64::ONE).norm() > 1e-3);
    }

    #[test]
    fn wave_plates() {
        for theta in [0.0, 0.3, 1.0, 2.5] {
            let q = qwp(theta);
            assert!(q.unitarity_defect() < 1e-12);
            assert!(hwp(theta).max_abs_diff(&q.mul(&q)) < 1e-12);
        }
        // qwp(0) = e^{-i pi s3 / 4}
        let expected = ComplexMatrix::diag(&[
            Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
        ]);
        assert!(qwp(0.0).max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn pauli_channel_properties() {
        assert!(pauli_channel([0.5, 0.6, 0.0, 0.0]).is_err());
        assert!(pauli_channel([-0.1, 0.6, 0.3, 0.2]).is_err());
        let ch = pauli_channel([0.4, 0.3, 0.2, 0.1]).unwrap();
        assert!(ch.is_trace_preserving());
        // unital: I/2 is a fixed point
        let mixed = DensityMatrix::maximally_mixed(&[2]);
        assert!(ch.apply(&mixed).unwrap().matrix().max_abs_diff(mixed.matrix()) < 1e-12);
    }

    #[test]
    fn generalized_pauli_operators() {
        let d = 4;
        let x = generalized_pauli_x(d);
        let z = generalized_pauli_z(d);
        assert!(x.unitarity_defect() < 1e-12);
        assert!(z.unitarity_defect() < 1e-12);
        for j in 0..d {
            let e = ComplexMatrix::basis_column(d, j);
            let xe = x.mul(&e);
            assert_abs_diff_eq!(xe[((j + d - 1) % d, 0)].re, 1.0, epsilon = 1e-14);
            let ze = z.mul(&e);
            let expected = Complex64::from_polar(1.0, -std::f64::consts::TAU * j as f64 / d as f64);
            assert!((ze[(j, 0)] - expected).norm() < 1e-14);
        }
        // Weyl commutation ZX = e^{-2 pi i/d} XZ
        let lhs = z.mul(&x);
        let rhs = x
            .mul(&z)
            .scale(Complex64::from_polar(1.0, std::f64::consts::TAU / d as f64));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn generalized_pauli_channel_unital() {
        let d = 3;
        let p: Vec<Vec<f64>> = vec![vec![1.0 / 9.0; 3]; 3];
        let ch = generalized_pauli_channel(d, &p).unwrap();
        assert!(ch.is_trace_preserving());
        assert!(choi(&ch).is_cp());
        let mixed = DensityMatrix::maximally_mixed(&[3]);
        assert!(ch.apply(&mixed).unwrap().matrix().max_abs_diff(mixed.matrix()) < 1e-12);
        // fully uniform distribution depolarizes completely
        let rho = random_density(3, 7777);
        assert!(ch.apply(&rho).unwrap().matrix().max_abs_diff(mixed.matrix()) < 1e-10);
    }

    #[test]
    fn mixture_of_unitaries_validation() {
        let u = haar_random_su2(1);
        assert!(KrausChannel::mixture_of_unitaries(&[(0.7, u.clone())]).is_err());
        let ch =
            KrausChannel::mixture_of_unitaries(&[(0.7, u.clone()), (0.3, sigma_x())]).unwrap();
        assert!(ch.is_trace_preserving());
        let rho = random_density(2, 2);
        let direct = u
            .mul(rho.matrix())
            .mul(&u.adjoint())
            .scale(cr(0.7))
            .add(&sigma_x().mul(rho.matrix()).mul(&sigma_x()).scale(cr(0.3)));
        assert!(ch.apply(&rho).unwrap().matrix().max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn pure_collapse_map_shape() {
        let psi = PureState::basis_state(&[2], 0);
        let b = ComplexMatrix::identity(2);
        let cm = pure_collapse_choi(&b, &psi);
        // trace-preserving for B = I: partial trace over output is I
        assert!(cm.is_cp());
        assert_eq!(cm.matrix.rows(), 4);
    }

    #[test]
    fn sigma_y_consistency() {
        // ensure the y-rotation helper matches the exponential
        let t = 0.83;
        let via_exp = crate::linalg::unitary_exp_i(&sigma_y(), t, DEFAULT_TOL).unwrap();
        assert!(exp_i_sigma_y(t).max_abs_diff(&via_exp) < 1e-12);
    }
}
