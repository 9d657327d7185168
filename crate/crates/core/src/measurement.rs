//! Observables, projector-valued and general positive operator-valued
//! measures, outcome statistics, selective collapse and pinching.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{cr, hermitian_eig, ComplexMatrix, DEFAULT_TOL};
use crate::states::DensityMatrix;

/// Probability below which a selective collapse is refused.
pub const COLLAPSE_THRESHOLD: f64 = 1e-12;

/// Relative gap under which eigenvalues are treated as degenerate when
/// building spectral projectors.
pub const EIGENVALUE_MERGE_GAP: f64 = 1e-7;

/// Self-adjoint matrix representing a physical quantity.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: ComplexMatrix,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        if defect > DEFAULT_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Expectation tr(rho A).
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.matrix.rows() {
            return Err(Error::DimensionMismatch(format!(
                "observable dim {} vs state dim {}",
                self.matrix.rows(),
                rho.dim()
            )));
        }
        Ok(rho.matrix().mul(&self.matrix).trace().re)
    }
}

/// One labeled POVM effect.
#[derive(Debug, Clone)]
pub struct Effect {
    pub label: String,
    pub operator: ComplexMatrix,
}

/// Positive operator-valued measure: effects are PSD and sum to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    outcomes: Vec<Effect>,
}

impl Povm {
    pub fn new(outcomes: Vec<Effect>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidPovm("no effects".into()));
        }
        let d = outcomes[0].operator.rows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for e in &outcomes {
            if !e.operator.is_square() || e.operator.rows() != d {
                return Err(Error::InvalidPovm("effects of unequal dimension".into()));
            }
            let eig = hermitian_eig(&e.operator, DEFAULT_TOL)
                .map_err(|_| Error::InvalidPovm(format!("effect '{}' not Hermitian", e.label)))?;
            if eig.eigenvalues.iter().any(|&l| l < -DEFAULT_TOL) {
                return Err(Error::InvalidPovm(format!(
                    "effect '{}' has a negative eigenvalue",
                    e.label
                )));
            }
            sum = sum.add(&e.operator);
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(d));
        if defect > 1e-8 {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {defect:.3e}"
            )));
        }
        Ok(Self { outcomes })
    }

    pub fn outcomes(&self) -> &[Effect] {
        &self.outcomes
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].operator.rows()
    }

    /// True when every effect is an orthogonal projector.
    pub fn is_projective(&self) -> bool {
        self.outcomes.iter().all(|e| {
            e.operator
                .mul(&e.operator)
                .max_abs_diff(&e.operator)
                < 1e-8
        })
    }

    /// Computational-basis PVM in dimension d, labels "0".."d-1".
    pub fn computational(d: usize) -> Self {
        let outcomes = (0..d)
            .map(|i| {
                let v = ComplexMatrix::basis_column(d, i);
                Effect {
                    label: i.to_string(),
                    operator: v.mul(&v.adjoint()),
                }
            })
            .collect();
        Self { outcomes }
    }

    /// Two-outcome PVM {P, I-P} from a projector.
    pub fn binary(p: ComplexMatrix, label_yes: &str, label_no: &str) -> Result<Self> {
        let d = p.rows();
        let q = ComplexMatrix::identity(d).sub(&p);
        Self::new(vec![
            Effect {
                label: label_yes.into(),
                operator: p,
            },
            Effect {
                label: label_no.into(),
                operator: q,
            },
        ])
    }
}

/// Probabilities attached to outcome labels.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    pub labels: Vec<String>,
    pub probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(labels: Vec<String>, probabilities: Vec<f64>) -> Result<Self> {
        if labels.len() != probabilities.len() {
            return Err(Error::InvalidProbabilities(
                "label/probability count mismatch".into(),
            ));
        }
        if probabilities.iter().any(|&p| p < -DEFAULT_TOL) {
            return Err(Error::InvalidProbabilities("negative probability".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidProbabilities(format!("sum {total} != 1")));
        }
        Ok(Self {
            labels,
            probabilities,
        })
    }

    pub fn probability_of(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.probabilities[i])
    }
}

/// Format an eigenvalue as an outcome label, 12 significant digits.
fn eigenvalue_label(l: f64) -> String {
    format!("{:.*e}", 11, l)
}

/// Spectral PVM of an observable: one projector per eigenvalue cluster,
/// clusters merged by a relative gap of `EIGENVALUE_MERGE_GAP`.
pub fn pvm_from_observable(a: &Observable) -> Povm {
    let eig = hermitian_eig(a.matrix(), DEFAULT_TOL).expect("validated on construction");
    let n = a.matrix().rows();
    let max_abs = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, &l| m.max(l.abs()))
        .max(1.0);
    let gap = EIGENVALUE_MERGE_GAP * max_abs;
    let mut outcomes: Vec<Effect> = Vec::new();
    let mut j = 0;
    while j < n {
        let mut k = j + 1;
        while k < n && (eig.eigenvalues[k - 1] - eig.eigenvalues[k]).abs() <= gap {
            k += 1;
        }
        let mut proj = ComplexMatrix::zeros(n, n);
        let mut mean = 0.0;
        for t in j..k {
            let v = ComplexMatrix::column_from_slice(&eig.eigenvectors.column(t));
            proj = proj.add(&v.mul(&v.adjoint()));
            mean += eig.eigenvalues[t];
        }
        mean /= (k - j) as f64;
        outcomes.push(Effect {
            label: eigenvalue_label(mean),
            operator: proj,
        });
        j = k;
    }
    Povm { outcomes }
}

/// Outcome distribution p_w = tr(rho M_w).
pub fn probabilities(rho: &DensityMatrix, m: &Povm) -> Result<OutcomeDistribution> {
    if rho.dim() != m.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs POVM dim {}",
            rho.dim(),
            m.dim()
        )));
    }
    let labels = m.outcomes.iter().map(|e| e.label.clone()).collect();
    let probs: Vec<f64> = m
        .outcomes
        .iter()
        .map(|e| rho.matrix().mul(&e.operator).trace().re.max(0.0))
        .collect();
    OutcomeDistribution::new(labels, probs)
}

/// Selective measurement update: P rho P / tr(rho P).
pub fn collapse(rho: &DensityMatrix, projector: &ComplexMatrix) -> Result<DensityMatrix> {
    if projector.rows() != rho.dim() || !projector.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "projector {}x{} vs state dim {}",
            projector.rows(),
            projector.cols(),
            rho.dim()
        )));
    }
    if projector.mul(projector).max_abs_diff(projector) > 1e-8 {
        return Err(Error::NotProjective);
    }
    let p = rho.matrix().mul(projector).trace().re;
    if p < COLLAPSE_THRESHOLD {
        return Err(Error::UndefinedCollapse(p));
    }
    let updated = projector
        .mul(rho.matrix())
        .mul(projector)
        .scale(cr(1.0 / p));
    DensityMatrix::new(updated, rho.dims().to_vec())
}

/// Non-selective measurement / conditional expectation onto the
/// block-diagonal algebra: B -> sum_j P_j B P_j.
pub fn pinch(b: &ComplexMatrix, m: &Povm) -> Result<ComplexMatrix> {
    if !m.is_projective() {
        return Err(Error::NotProjective);
    }
    if b.rows() != m.dim() || !b.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "matrix {}x{} vs PVM dim {}",
            b.rows(),
            b.cols(),
            m.dim()
        )));
    }
    let mut out = ComplexMatrix::zeros(b.rows(), b.cols());
    for e in &m.outcomes {
        out = out.add(&e.operator.mul(b).mul(&e.operator));
    }
    Ok(out)
}

/// Inverse-CDF sample from a distribution, deterministic per seed.
pub fn sample(dist: &OutcomeDistribution, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with_rng(dist, &mut rng)
}

/// Same draw, but advancing a caller-owned generator.
pub fn sample_with_rng<R: rand::Rng>(dist: &OutcomeDistribution, rng: &mut R) -> String {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (label, &p) in dist.labels.iter().zip(&dist.probabilities) {
        acc += p;
        if u < acc {
            return label.clone();
        }
    }
    dist.labels.last().expect("nonempty distribution").clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        c, random_complex_matrix, random_hermitian, sigma_z, tensor_product,
    };
    use crate::states::{
        bell_state, density_from_pure, qubit_basis, spin_component, DensityMatrix, PureState,
    };
    use approx::assert_abs_diff_eq;

    fn random_density(dim: usize, seed: u64) -> DensityMatrix {
        let g = random_complex_matrix(dim, dim, seed);
        let p = g.mul(&g.adjoint());
        let tr = p.trace().re;
        DensityMatrix::new(p.scale(cr(1.0 / tr)), vec![dim]).unwrap()
    }

    fn random_pure(dim: usize, seed: u64) -> PureState {
        let g = random_complex_matrix(dim, 1, seed);
        let norm = g.frobenius_norm();
        PureState::from_amplitudes(g.column(0).iter().map(|z| z / norm).collect()).unwrap()
    }

    #[test]
    fn pvm_from_sigma_z() {
        let m = pvm_from_observable(&Observable::new(sigma_z()).unwrap());
        assert_eq!(m.outcomes().len(), 2);
        assert!(m.is_projective());
        assert!(m.outcomes()[0].label.starts_with("1.0"));
        assert!(m.outcomes()[1].label.starts_with("-1.0"));
        assert_abs_diff_eq!(m.outcomes()[0].operator[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.outcomes()[1].operator[(1, 1)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pvm_merges_degenerate_spectrum() {
        let m = pvm_from_observable(&Observable::new(ComplexMatrix::identity(3)).unwrap());
        assert_eq!(m.outcomes().len(), 1);
        assert!(m.outcomes()[0]
            .operator
            .max_abs_diff(&ComplexMatrix::identity(3))
            < 1e-12);
    }

    #[test]
    fn pvm_from_spin_component_matches_rotated_basis() {
        for (beta, phi) in [(0.4, 0.9), (1.2, -1.5), (2.8, 2.2)] {
            let m = pvm_from_observable(&Observable::new(spin_component(beta, phi)).unwrap());
            let (e0, e1) = qubit_basis(beta, phi);
            let p0 = e0.as_column().mul(&e0.as_column().adjoint());
            let p1 = e1.as_column().mul(&e1.as_column().adjoint());
            assert!(m.outcomes()[0].operator.max_abs_diff(&p0) < 1e-10);
            assert!(m.outcomes()[1].operator.max_abs_diff(&p1) < 1e-10);
            // orthogonality P_i P_j = delta_ij P_i
            let cross = m.outcomes()[0].operator.mul(&m.outcomes()[1].operator);
            assert!(cross.frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn probabilities_examples() {
        // sigma_3 PVM reads the diagonal
        let rho = random_density(2, 1);
        let m = pvm_from_observable(&Observable::new(sigma_z()).unwrap());
        let dist = probabilities(&rho, &m).unwrap();
        assert_abs_diff_eq!(dist.probabilities[0], rho.matrix()[(0, 0)].re, epsilon = 1e-12);
        assert_abs_diff_eq!(dist.probabilities[1], rho.matrix()[(1, 1)].re, epsilon = 1e-12);

        // product state in the computational PVM factorizes
        let a = random_density(2, 2);
        let b = random_density(2, 3);
        let joint = DensityMatrix::new(
            tensor_product(a.matrix(), b.matrix()),
            vec![2, 2],
        )
        .unwrap();
        let dist = probabilities(&joint, &Povm::computational(4)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(
                    dist.probabilities[2 * i + j],
                    a.matrix()[(i, i)].re * b.matrix()[(j, j)].re,
                    epsilon = 1e-12
                );
            }
        }

        // pure bipartite state: p_ij = |psi_ij|^2
        let psi = random_pure(4, 4);
        let dist = probabilities(&density_from_pure(&psi), &Povm::computational(4)).unwrap();
        for (p, amp) in dist.probabilities.iter().zip(psi.amplitudes()) {
            assert_abs_diff_eq!(*p, amp.norm_sqr(), epsilon = 1e-12);
        }
    }

    #[test]
    fn probability_sums() {
        for seed in 0..100u64 {
            let rho = random_density(3, 100 + seed);
            let obs = Observable::new(random_hermitian(3, 200 + seed)).unwrap();
            let m = pvm_from_observable(&obs);
            let total = ComplexMatrix::identity(3);
            let sum = m
                .outcomes()
                .iter()
                .fold(ComplexMatrix::zeros(3, 3), |acc, e| acc.add(&e.operator));
            assert!(sum.max_abs_diff(&total) < 1e-10);
            let dist = probabilities(&rho, &m).unwrap();
            let s: f64 = dist.probabilities.iter().sum();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn collapse_examples() {
        let z0 = density_from_pure(&PureState::basis_state(&[2], 0));
        let p0 = z0.matrix().clone();
        let out = collapse(&z0, &p0).unwrap();
        assert!(out.matrix().max_abs_diff(z0.matrix()) < 1e-12);

        // I/2 collapsed on |1><1|
        let e1 = ComplexMatrix::basis_column(2, 1);
        let p1 = e1.mul(&e1.adjoint());
        let out = collapse(&DensityMatrix::maximally_mixed(&[2]), &p1).unwrap();
        assert!(out.matrix().max_abs_diff(&p1) < 1e-12);
    }

    #[test]
    fn collapse_of_bell_state_gives_product() {
        // measuring the first qubit of (|00>+|11>)/sqrt2 with the filter
        // along (sin b, 0, cos b) yields e0^{b0} (x) conj(e0^{b0})
        let rho = density_from_pure(&bell_state(0));
        for beta in [0.3, 1.0, 2.1] {
            let (e0, _) = qubit_basis(beta, 0.0);
            let p = e0.as_column().mul(&e0.as_column().adjoint());
            let proj = tensor_product(&p, &ComplexMatrix::identity(2));
            let out = collapse(&rho, &proj).unwrap();
            let expected = e0.tensor(&PureState::new(
                e0.amplitudes().iter().map(|z| z.conj()).collect(),
                vec![2],
            )
            .unwrap());
            let target = density_from_pure(&expected);
            assert!(out.matrix().max_abs_diff(target.matrix()) < 1e-10, "beta={beta}");
            // and the branch probability is cos^2(beta/2)... for the filter on
            // the first factor it is 1/2 by maximal entanglement
            let prob = rho.matrix().mul(&proj).trace().re;
            assert_abs_diff_eq!(prob, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn epr_correlation_is_perfect() {
        // measure both halves of the Bell state with the same filter:
        // identical outcomes with probability one
        let rho = density_from_pure(&bell_state(0));
        for beta in [0.0, 0.7, 1.9] {
            let (e0, e1) = qubit_basis(beta, 0.0);
            let p0 = e0.as_column().mul(&e0.as_column().adjoint());
            // conjugated basis on the second factor, per the rotated-basis
            // expansion of the maximally entangled state
            let q0 = e0.as_column().conj().mul(&e0.as_column().conj().adjoint());
            let q1 = e1.as_column().conj().mul(&e1.as_column().conj().adjoint());
            let first = collapse(&rho, &tensor_product(&p0, &ComplexMatrix::identity(2))).unwrap();
            let same = first
                .matrix()
                .mul(&tensor_product(&ComplexMatrix::identity(2), &q0))
                .trace()
                .re;
            let opposite = first
                .matrix()
                .mul(&tensor_product(&ComplexMatrix::identity(2), &q1))
                .trace()
                .re;
            assert_abs_diff_eq!(same, 1.0, epsilon = 1e-10);
            assert!(opposite.abs() < 1e-10);
        }
    }

    #[test]
    fn collapse_error_paths() {
        let z0 = density_from_pure(&PureState::basis_state(&[2], 0));
        let e1 = ComplexMatrix::basis_column(2, 1);
        let p1 = e1.mul(&e1.adjoint());
        // zero-probability branch
        assert!(matches!(
            collapse(&z0, &p1),
            Err(Error::UndefinedCollapse(_))
        ));
        // non-projector effect
        let half = ComplexMatrix::identity(2).scale(cr(0.5));
        assert!(matches!(collapse(&z0, &half), Err(Error::NotProjective)));
    }

    #[test]
    fn pinch_examples_and_properties() {
        let m = Povm::computational(2);
        let rho = random_density(2, 10);
        let out = pinch(rho.matrix(), &m).unwrap();
        assert_abs_diff_eq!(out[(0, 0)].re, rho.matrix()[(0, 0)].re, epsilon = 1e-12);
        assert!(out[(0, 1)].norm() < 1e-14, "off-diagonal zeroed");

        // commuting input is a fixed point; diag matrices commute with the
        // computational projectors
        let diag = ComplexMatrix::diag(&[c(1.0, 0.0), c(-2.0, 0.0)]);
        assert!(pinch(&diag, &m).unwrap().max_abs_diff(&diag) < 1e-14);

        // take-out-what-we-know: E(X1 B X2) = X1 E(B) X2 for X1, X2 in the
        // commutant (here: diagonal), random B
        let b = random_complex_matrix(2, 2, 11);
        let x1 = ComplexMatrix::diag(&[c(0.3, 0.2), c(1.0, -0.5)]);
        let x2 = ComplexMatrix::diag(&[c(-1.0, 0.0), c(0.0, 2.0)]);
        let lhs = pinch(&x1.mul(&b).mul(&x2), &m).unwrap();
        let rhs = x1.mul(&pinch(&b, &m).unwrap()).mul(&x2);
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);

        // adjoint covariance, idempotence, positivity on random inputs
        let obs = random_hermitian(4, 12);
        let pvm = pvm_from_observable(&Observable::new(random_hermitian(4, 13)).unwrap());
        let once = pinch(&obs, &pvm).unwrap();
        assert!(pinch(&once, &pvm).unwrap().max_abs_diff(&once) < 1e-10);
        let badj = pinch(&obs.adjoint(), &pvm).unwrap();
        assert!(badj.max_abs_diff(&once.adjoint()) < 1e-10);
        let rho4 = random_density(4, 14);
        let pinched = pinch(rho4.matrix(), &pvm).unwrap();
        assert_abs_diff_eq!(pinched.trace().re, 1.0, epsilon = 1e-10);
        let eig = hermitian_eig(&pinched, DEFAULT_TOL).unwrap();
        assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-9));
    }

    #[test]
    fn pinch_rejects_non_projective() {
        let half = Povm::new(vec![
            Effect {
                label: "a".into(),
                operator: ComplexMatrix::identity(2).scale(cr(0.5)),
            },
            Effect {
                label: "b".into(),
                operator: ComplexMatrix::identity(2).scale(cr(0.5)),
            },
        ])
        .unwrap();
        assert!(matches!(
            pinch(&ComplexMatrix::identity(2), &half),
            Err(Error::NotProjective)
        ));
    }

    #[test]
    fn povm_validation() {
        // effects not summing to identity
        let bad = Povm::new(vec![Effect {
            label: "x".into(),
            operator: ComplexMatrix::identity(2).scale(cr(0.5)),
        }]);
        assert!(bad.is_err());
        // negative effect
        let bad = Povm::new(vec![
            Effect {
                label: "x".into(),
                operator: sigma_z(),
            },
            Effect {
                label: "y".into(),
                operator: ComplexMatrix::identity(2).sub(&sigma_z()),
            },
        ]);
        assert!(bad.is_err());
    }

    #[test]
    fn sampling_determinism_and_frequencies() {
        let point = OutcomeDistribution::new(vec!["H".into()], vec![1.0]).unwrap();
        assert_eq!(sample(&point, 0), "H");

        let fair =
            OutcomeDistribution::new(vec!["a".into(), "b".into()], vec![0.5, 0.5]).unwrap();
        let first = sample(&fair, 42);
        for _ in 0..5 {
            assert_eq!(sample(&fair, 42), first);
        }

        let skew =
            OutcomeDistribution::new(vec!["a".into(), "b".into()], vec![0.25, 0.75]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mut count_a = 0;
        for _ in 0..n {
            if sample_with_rng(&skew, &mut rng) == "a" {
                count_a += 1;
            }
        }
        let freq = count_a as f64 / n as f64;
        assert!((freq - 0.25).abs() < 0.01, "freq {freq}");
    }
}
