//! The entangle/disentangle quantization protocol: the referee prepares
//! J|0...0>, each player applies a local unitary, the referee undoes the
//! entangler and measures in the computational basis. Includes the N-player
//! closed-form amplitudes, the minority game, and the three-player
//! prisoner's dilemma.

use num_complex::Complex64;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::games::{QuantumGameSpec, StrategySpace};
use crate::linalg::{c, cr, sigma_x, unitary_exp_i, ComplexMatrix, DEFAULT_TOL};
use crate::measurement::{Effect, Povm};
use crate::states::{density_from_pure, PureState};

/// Which flip operator the entangler is built from: the sign-changing
/// [[0, 1], [-1, 0]] of the original two-player scheme, or the plain
/// sigma_x used in the N-player literature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipConvention {
    DHat,
    SigmaX,
}

impl FlipConvention {
    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            FlipConvention::DHat => {
                ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]])
            }
            FlipConvention::SigmaX => sigma_x(),
        }
    }
}

fn tensor_power(m: &ComplexMatrix, n: usize) -> ComplexMatrix {
    let mut out = m.clone();
    for _ in 1..n {
        out = out.tensor(m);
    }
    out
}

/// The entangler J = exp{i (gamma/2) F^{(x)n}}. With the sign-changing
/// flip, F^{(x)n} is Hermitian only for even n, so odd player counts
/// require the sigma_x convention.
pub fn entangler(n: usize, gamma: f64, convention: FlipConvention) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("player count {n}")));
    }
    if convention == FlipConvention::DHat && n % 2 != 0 {
        return Err(Error::InvalidParameter(
            "the sign-changing flip convention needs an even player count".into(),
        ));
    }
    let f_n = tensor_power(&convention.matrix(), n);
    unitary_exp_i(&f_n, gamma / 2.0, DEFAULT_TOL)
}

fn bit_label(index: usize, n: usize) -> String {
    (0..n)
        .map(|k| {
            if index & (1 << (n - 1 - k)) != 0 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Configuration of the protocol as a strategic-form game.
#[derive(Debug, Clone)]
pub struct EWLConfig {
    pub player_count: usize,
    /// Entangling strength in [0, pi/2].
    pub gamma: f64,
    pub flip_convention: FlipConvention,
    /// One payoff row per player, indexed by outcome (most significant bit
    /// = first player).
    pub payoff_tables: Vec<Vec<f64>>,
    /// Strategy space shared by all players.
    pub strategy_box: StrategySpace,
}

/// Build the full game: initial state J|0...0>, measurement effects
/// J|w><w|J* (equivalent to undoing J before a computational-basis
/// measurement), outcome labels as bit strings.
pub fn ewl_spec(cfg: &EWLConfig) -> Result<QuantumGameSpec> {
    let n = cfg.player_count;
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&cfg.gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma {} outside [0, pi/2]",
            cfg.gamma
        )));
    }
    let dim = 1usize << n;
    if cfg.payoff_tables.len() != n || cfg.payoff_tables.iter().any(|t| t.len() != dim) {
        return Err(Error::InvalidParameter(format!(
            "need {n} payoff tables of {dim} outcomes"
        )));
    }
    let j = entangler(n, cfg.gamma, cfg.flip_convention)?;
    let initial = PureState::basis_state(&vec![2; n], 0).apply(&j)?;
    let outcomes = (0..dim)
        .map(|w| {
            let col = ComplexMatrix::column_from_slice(&j.column(w));
            Effect {
                label: bit_label(w, n),
                operator: col.mul(&col.adjoint()),
            }
        })
        .collect();
    let payoffs = cfg
        .payoff_tables
        .iter()
        .map(|t| {
            t.iter()
                .enumerate()
                .map(|(w, &v)| (bit_label(w, n), v))
                .collect::<HashMap<_, _>>()
        })
        .collect();
    let spec = QuantumGameSpec {
        player_dims: vec![2; n],
        initial_state: density_from_pure(&initial),
        outcome_povm: Povm::new(outcomes)?,
        payoffs,
        strategy_spaces: vec![cfg.strategy_box.clone(); n],
    };
    spec.validate()?;
    Ok(spec)
}

/// Closed-form final amplitudes of the maximally entangled (gamma = pi/2,
/// sigma_x convention) protocol for two or three players, with each player
/// j applying the unitary with angles (theta_j, phi_j, psi_j) of the
/// standard three-parameter form
/// [[e^{i phi} cos(theta), e^{i psi} sin(theta)],
///  [-e^{-i psi} sin(theta), e^{-i phi} cos(theta)]].
/// Amplitudes are ordered by outcome index, first player most significant.
pub fn ewl_amplitudes_n(profile: &[(f64, f64, f64)]) -> Result<Vec<Complex64>> {
    match profile {
        [(t1, f1, p1), (t2, f2, p2)] => {
            let (c1, s1, c2, s2) = (t1.cos(), t1.sin(), t2.cos(), t2.sin());
            let xi00 = cr(c1 * c2 * (f1 + f2).cos() - s1 * s2 * (p1 + p2).sin());
            let xi11 = cr(s1 * s2 * (p1 + p2).cos() + c1 * c2 * (f1 + f2).sin());
            let xi01 = c(0.0, c1 * s2 * (p2 - f1).sin() + s1 * c2 * (f2 - p1).cos());
            let xi10 = c(0.0, c2 * s1 * (p1 - f2).sin() + s2 * c1 * (f1 - p2).cos());
            Ok(vec![xi00, xi01, xi10, xi11])
        }
        [a, b, cc] => {
            let players = [*a, *b, *cc];
            let cos = |k: usize| players[k].0.cos();
            let sin = |k: usize| players[k].0.sin();
            let phi = |k: usize| players[k].1;
            let psi = |k: usize| players[k].2;
            let mut out = vec![cr(0.0); 8];
            let big_c = cos(0) * cos(1) * cos(2);
            let big_s = sin(0) * sin(1) * sin(2);
            let phi_sum = phi(0) + phi(1) + phi(2);
            let psi_sum = psi(0) + psi(1) + psi(2);
            out[0] = c(big_c * phi_sum.cos(), big_s * psi_sum.cos());
            out[7] = c(big_c * phi_sum.sin(), big_s * psi_sum.sin());
            // outcomes with a single 1 at player k; (a, b) are the others
            for (k, idx) in [(2usize, 1usize), (1, 2), (0, 4)] {
                let (oa, ob) = match k {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                out[idx] = c(
                    sin(oa) * sin(ob) * cos(k) * (phi(k) - psi(oa) - psi(ob)).sin(),
                    cos(oa) * cos(ob) * sin(k) * (psi(k) - phi(oa) - phi(ob)).sin(),
                );
            }
            // outcomes with a single 0 at player k
            for (k, idx) in [(0usize, 3usize), (1, 5), (2, 6)] {
                let (oa, ob) = match k {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                out[idx] = c(
                    cos(k) * sin(oa) * sin(ob) * (psi(oa) + psi(ob) - phi(k)).cos(),
                    sin(k) * cos(oa) * cos(ob) * (phi(oa) + phi(ob) - psi(k)).cos(),
                );
            }
            Ok(out)
        }
        _ => Err(Error::InvalidParameter(format!(
            "closed forms cover 2 or 3 players, got {}",
            profile.len()
        ))),
    }
}

/// Final-state amplitudes through the full matrix pipeline (gamma = pi/2,
/// sigma_x convention), optionally skipping the final disentangler.
pub fn pipeline_amplitudes(
    unitaries: &[ComplexMatrix],
    apply_final_gate: bool,
) -> Result<Vec<Complex64>> {
    let n = unitaries.len();
    let j = entangler(n, std::f64::consts::FRAC_PI_2, FlipConvention::SigmaX)?;
    let mut state = PureState::basis_state(&vec![2; n], 0).apply(&j)?;
    let mut joint = unitaries[0].clone();
    for u in &unitaries[1..] {
        joint = joint.tensor(u);
    }
    state = state.apply(&joint)?;
    if apply_final_gate {
        state = state.apply(&j.adjoint())?;
    }
    Ok(state.amplitudes().to_vec())
}

/// Expected minority payoffs: each player scores one point when their bit
/// is held by strictly fewer players than its complement. Maximally
/// entangled protocol, N >= 3.
pub fn minority_payoff(unitaries: &[ComplexMatrix], apply_final_gate: bool) -> Result<Vec<f64>> {
    let n = unitaries.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "minority game needs at least 3 players, got {n}"
        )));
    }
    let amps = pipeline_amplitudes(unitaries, apply_final_gate)?;
    let mut payoffs = vec![0.0; n];
    for (w, amp) in amps.iter().enumerate() {
        let prob = amp.norm_sqr();
        let ones = (w as u32 & ((1u32 << n) - 1)).count_ones() as usize;
        for (k, payoff) in payoffs.iter_mut().enumerate() {
            let bit = (w >> (n - 1 - k)) & 1;
            let same = if bit == 1 { ones } else { n - ones };
            if 2 * same < n {
                *payoff += prob;
            }
        }
    }
    Ok(payoffs)
}

/// Payoff tables of the three-player prisoner's dilemma, indexed by
/// outcome (first player most significant, 1 = defect).
pub fn three_player_pd_tables() -> [Vec<f64>; 3] {
    [
        vec![3.0, 2.0, 2.0, 0.0, 5.0, 4.0, 4.0, 1.0],
        vec![3.0, 2.0, 5.0, 4.0, 2.0, 0.0, 4.0, 1.0],
        vec![3.0, 5.0, 2.0, 4.0, 2.0, 4.0, 0.0, 1.0],
    ]
}

/// Payoffs of the three-player prisoner's dilemma at entangling strength
/// gamma (sigma_x convention) for a profile of local unitaries.
pub fn three_player_pd_payoffs(gamma: f64, unitaries: &[ComplexMatrix; 3]) -> Result<[f64; 3]> {
    let j = entangler(3, gamma, FlipConvention::SigmaX)?;
    let joint = unitaries[0].tensor(&unitaries[1]).tensor(&unitaries[2]);
    let state = PureState::basis_state(&[2, 2, 2], 0)
        .apply(&j)?
        .apply(&joint)?
        .apply(&j.adjoint())?;
    let tables = three_player_pd_tables();
    let mut out = [0.0; 3];
    for (w, amp) in state.amplitudes().iter().enumerate() {
        let prob = amp.norm_sqr();
        for (k, table) in tables.iter().enumerate() {
            out[k] += prob * table[w];
        }
    }
    Ok(out)
}
