//! The mixture-dressing quantization protocol for 2x2 games: both players
//! dress a shared (possibly entangled) two-qubit state with classical
//! identity/flip mixtures and measure in the computational basis, with no
//! final disentangler.

use num_complex::Complex64;

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{cr, sigma_x, ComplexMatrix};
use crate::measurement::{probabilities, OutcomeDistribution, Povm};
use crate::states::{density_from_pure, DensityMatrix, PureState};

/// Protocol configuration: the shared initial amplitudes c_ij (row-player
/// index first) and the two payoff tables.
#[derive(Debug, Clone)]
pub struct MWConfig {
    /// Amplitudes [c00, c01, c10, c11], normalized.
    pub initial_amplitudes: [Complex64; 4],
    pub alpha: [[f64; 2]; 2],
    pub beta: [[f64; 2]; 2],
}

impl MWConfig {
    pub fn new(
        initial_amplitudes: [Complex64; 4],
        alpha: [[f64; 2]; 2],
        beta: [[f64; 2]; 2],
    ) -> Result<Self> {
        let norm: f64 = initial_amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        Ok(MWConfig {
            initial_amplitudes,
            alpha,
            beta,
        })
    }

    pub fn initial_state(&self) -> DensityMatrix {
        let psi = PureState::from_amplitudes(self.initial_amplitudes.to_vec())
            .expect("validated at construction");
        density_from_pure(&psi)
    }
}

/// Outcome probabilities when the row player keeps identity with
/// probability `p` and the column player with probability `q`, from the
/// closed form
/// P_ij = pq |c_ij|^2 + (1-p)q |c_i'j|^2 + p(1-q) |c_ij'|^2
///        + (1-p)(1-q) |c_i'j'|^2.
pub fn mw_final_probabilities(cfg: &MWConfig, p: f64, q: f64) -> Result<OutcomeDistribution> {
    for x in [p, q] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::InvalidProbabilities(format!("weight {x}")));
        }
    }
    let c = |i: usize, j: usize| cfg.initial_amplitudes[2 * i + j].norm_sqr();
    let mut labels = Vec::with_capacity(4);
    let mut probs = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            labels.push(format!("{i}{j}"));
            probs.push(
                p * q * c(i, j)
                    + (1.0 - p) * q * c(1 - i, j)
                    + p * (1.0 - q) * c(i, 1 - j)
                    + (1.0 - p) * (1.0 - q) * c(1 - i, 1 - j),
            );
        }
    }
    OutcomeDistribution::new(labels, probs)
}

/// Same probabilities through the density-matrix pipeline: dress with the
/// product of the two identity/flip mixtures and read the diagonal.
pub fn mw_pipeline_probabilities(cfg: &MWConfig, p: f64, q: f64) -> Result<OutcomeDistribution> {
    let mix = |w: f64| {
        KrausChannel::mixture_of_unitaries(&[
            (w, ComplexMatrix::identity(2)),
            (1.0 - w, sigma_x()),
        ])
    };
    let joint = mix(p)?.tensor(&mix(q)?);
    let rho = joint.apply(&cfg.initial_state())?;
    let outcomes = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| crate::measurement::Effect {
            label: format!("{i}{j}"),
            operator: {
                let mut m = ComplexMatrix::zeros(4, 4);
                m[(2 * i + j, 2 * i + j)] = cr(1.0);
                m
            },
        })
        .collect();
    probabilities(&rho, &Povm::new(outcomes)?)
}

/// The protocol seen as a classical 2x2 game: transformed payoff tables
/// where action 0 is "keep" and action 1 is "flip",
/// alpha~[x][y] = sum_ij alpha_ij |c_{i xor x, j xor y}|^2.
pub fn mw_transformed_tables(cfg: &MWConfig) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let c = |i: usize, j: usize| cfg.initial_amplitudes[2 * i + j].norm_sqr();
    let mut at = [[0.0; 2]; 2];
    let mut bt = [[0.0; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let w = c(i ^ x, j ^ y);
                    at[x][y] += cfg.alpha[i][j] * w;
                    bt[x][y] += cfg.beta[i][j] * w;
                }
            }
        }
    }
    (at, bt)
}

/// Pre-stage acceptance of the referee's entangled state: the entangled
/// amplitudes are used only if both players accept, otherwise the game
/// starts from the product state |00>.
pub fn mw_prestage(
    entangled: [Complex64; 4],
    accept_row: bool,
    accept_column: bool,
) -> [Complex64; 4] {
    if accept_row && accept_column {
        entangled
    } else {
        [cr(1.0), cr(0.0), cr(0.0), cr(0.0)]
    }
}

/// The ultimatum game in this protocol. Row actions: unfair offer (99/1)
/// or fair offer (50/50); column actions: accept or reject. Rejection
/// leaves both with nothing.
pub fn ultimatum_spec(initial_amplitudes: [Complex64; 4]) -> Result<MWConfig> {
    MWConfig::new(
        initial_amplitudes,
        [[99.0, 0.0], [50.0, 0.0]],
        [[1.0, 0.0], [50.0, 0.0]],
    )
}
