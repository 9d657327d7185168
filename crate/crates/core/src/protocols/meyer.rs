//! The quantum penny-flip game: a sequential game on a single qubit where
//! one player is restricted to classical flip/no-flip mixtures and the
//! other may apply arbitrary unitaries.

use num_complex::Complex64;

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{sigma_x, ComplexMatrix, DEFAULT_TOL};
use crate::states::{density_from_pure, DensityMatrix, PureState};

/// The det = -1 unitary family [[u, conj(v)], [v, -conj(u)]] used for the
/// quantum player's moves; requires |u|^2 + |v|^2 = 1.
pub fn meyer_unitary(u: Complex64, v: Complex64) -> Result<ComplexMatrix> {
    let norm = u.norm_sqr() + v.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized((norm - 1.0).abs()));
    }
    Ok(ComplexMatrix::from_rows(&[
        &[u, v.conj()],
        &[v, -u.conj()],
    ]))
}

/// Play the three-move game: the quantum player moves first and last with
/// unitaries, the classical player in between flips with probability `p`.
/// The coin starts heads up (|0>). Returns the final state and the
/// classical player's expected payoff, prob(tails) - prob(heads).
pub fn meyer_play(
    q_first: &ComplexMatrix,
    p: f64,
    q_second: &ComplexMatrix,
) -> Result<(DensityMatrix, f64)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbabilities(format!("flip probability {p}")));
    }
    for u in [q_first, q_second] {
        let defect = u.unitarity_defect();
        if u.rows() != 2 || u.cols() != 2 || defect > DEFAULT_TOL {
            return Err(Error::NotUnitary(defect));
        }
    }
    let rho0 = density_from_pure(&PureState::basis_state(&[2], 0));
    let rho1 = KrausChannel::from_unitary(q_first)?.apply(&rho0)?;
    let mix = KrausChannel::mixture_of_unitaries(&[
        (p, sigma_x()),
        (1.0 - p, ComplexMatrix::identity(2)),
    ])?;
    let rho2 = mix.apply(&rho1)?;
    let rho3 = KrausChannel::from_unitary(q_second)?.apply(&rho2)?;
    let payoff = rho3.matrix()[(1, 1)].re - rho3.matrix()[(0, 0)].re;
    Ok((rho3, payoff))
}

/// Value of the game truncated after the classical player's move, with the
/// quantum player's first move sending |0> to u|0> + v|1>:
/// (2p - 1)(|u|^2 - |v|^2).
pub fn meyer_midgame_value(u: Complex64, v: Complex64, p: f64) -> Result<f64> {
    let norm = u.norm_sqr() + v.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized((norm - 1.0).abs()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbabilities(format!("flip probability {p}")));
    }
    Ok((2.0 * p - 1.0) * (u.norm_sqr() - v.norm_sqr()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cr;
    use approx::assert_abs_diff_eq;

    fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        meyer_unitary(cr(s), cr(s)).unwrap()
    }

    #[test]
    fn hadamard_twice_always_wins() {
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let (rho, payoff) = meyer_play(&hadamard(), p, &hadamard()).unwrap();
            assert!(
                (rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12,
                "p = {p}: heads probability {}",
                rho.matrix()[(0, 0)].re
            );
            assert_abs_diff_eq!(payoff, -1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_moves_reduce_to_classical_flip() {
        let id = ComplexMatrix::identity(2);
        let (_, payoff) = meyer_play(&id, 1.0, &id).unwrap();
        assert_abs_diff_eq!(payoff, 1.0, epsilon = 1e-12);
        let (_, payoff) = meyer_play(&id, 0.5, &id).unwrap();
        assert_abs_diff_eq!(payoff, 0.0, epsilon = 1e-12);
        let (_, payoff) = meyer_play(&id, 0.0, &id).unwrap();
        assert_abs_diff_eq!(payoff, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn midgame_value_examples() {
        assert_abs_diff_eq!(
            meyer_midgame_value(cr(1.0), cr(0.0), 1.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (u, v) in [(1.0, 0.0), (0.0, 1.0), (s, s), (0.6, 0.8)] {
            assert_abs_diff_eq!(
                meyer_midgame_value(cr(u), cr(v), 0.5).unwrap(),
                0.0,
                epsilon = 1e-15
            );
        }
        assert_abs_diff_eq!(
            meyer_midgame_value(cr(0.0), cr(1.0), 0.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn midgame_value_matches_truncated_play() {
        // play two moves only: first the unitary sending |0> to u|0>+v|1>,
        // then the p-mixture; measure payoff directly
        for (u, v, p) in [(0.6, 0.8, 0.0), (0.28, 0.96, 0.7), (1.0, 0.0, 1.0)] {
            let uu = meyer_unitary(cr(u), cr(v)).unwrap();
            let rho0 = density_from_pure(&PureState::basis_state(&[2], 0));
            let rho1 = KrausChannel::from_unitary(&uu).unwrap().apply(&rho0).unwrap();
            let mix = KrausChannel::mixture_of_unitaries(&[
                (p, sigma_x()),
                (1.0 - p, ComplexMatrix::identity(2)),
            ])
            .unwrap();
            let rho2 = mix.apply(&rho1).unwrap();
            let direct = -rho2.matrix()[(0, 0)].re + rho2.matrix()[(1, 1)].re;
            assert_abs_diff_eq!(
                meyer_midgame_value(cr(u), cr(v), p).unwrap(),
                direct,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn midgame_minimax_is_zero_at_uniform_strategies() {
        // grid-certify max_p min_{u,v} = min_{u,v} max_p = 0 with the
        // optimizers p = 1/2 and |u|^2 = |v|^2 = 1/2
        let n = 200;
        let mut outer_max = f64::NEG_INFINITY;
        for i in 0..=n {
            let p = i as f64 / n as f64;
            let mut inner_min = f64::INFINITY;
            for j in 0..=n {
                let t = std::f64::consts::FRAC_PI_2 * j as f64 / n as f64;
                let value = meyer_midgame_value(cr(t.cos()), cr(t.sin()), p).unwrap();
                inner_min = inner_min.min(value);
            }
            outer_max = outer_max.max(inner_min);
        }
        assert_abs_diff_eq!(outer_max, 0.0, epsilon = 1e-9);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(
            meyer_midgame_value(cr(s), cr(s), 0.5).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(meyer_unitary(cr(1.0), cr(1.0)).is_err());
        assert!(meyer_midgame_value(cr(0.9), cr(0.9), 0.5).is_err());
        let id = ComplexMatrix::identity(2);
        assert!(meyer_play(&id, 1.5, &id).is_err());
        let not_unitary = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(meyer_play(&not_unitary, 0.5, &id).is_err());
    }
}
