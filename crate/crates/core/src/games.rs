//! Generic quantum game abstraction and equilibrium machinery.
//!
//! A game is a product Hilbert space with an initial state, a POVM whose
//! outcomes carry per-player payoffs, and per-player strategy spaces of
//! CP-TP operations. Payoffs are
//!   Pi_j(s_1..s_N) = sum_w f_j(w) tr[M_w (s_1 (x) ... (x) s_N) rho].

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::{ewl_strategy, su2, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{cr, su2_from_rng, ComplexMatrix};
use crate::measurement::Povm;
use crate::states::DensityMatrix;

/// Identifier of a unitary factory used by parametric strategy spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitaryFactory {
    /// su2(theta, phi, psi): the full three-parameter SU(2) family.
    Su2,
    /// ewl_strategy(theta, phi): the restricted two-parameter family.
    EwlTwoParam,
    /// su2(theta, 0, phi): real diagonal, phase on the off-diagonal.
    PhaseFlipTwoParam,
}

impl UnitaryFactory {
    pub fn parameter_count(&self) -> usize {
        match self {
            UnitaryFactory::Su2 => 3,
            UnitaryFactory::EwlTwoParam | UnitaryFactory::PhaseFlipTwoParam => 2,
        }
    }

    pub fn build(&self, params: &[f64]) -> ComplexMatrix {
        match self {
            UnitaryFactory::Su2 => su2(params[0], params[1], params[2]),
            UnitaryFactory::EwlTwoParam => ewl_strategy(params[0], params[1]),
            UnitaryFactory::PhaseFlipTwoParam => su2(params[0], 0.0, params[1]),
        }
    }
}

/// Description of one player's admissible strategies.
#[derive(Debug, Clone)]
pub enum StrategySpace {
    /// Unitaries from a factory over a box of parameters.
    UnitaryParametric {
        factory: UnitaryFactory,
        bounds: Vec<(f64, f64)>,
    },
    /// All unitaries of the player's dimension; no search support.
    FullUnitary,
    /// All CP-TP channels; no search support.
    Channel,
    /// Classical mixtures of a fixed finite set of unitaries.
    ClassicalMixture { unitaries: Vec<ComplexMatrix> },
}

/// One player's chosen strategy.
#[derive(Debug, Clone)]
pub enum Strategy {
    Parameters(Vec<f64>),
    Channel(KrausChannel),
    Mixture(Vec<f64>),
}

pub type StrategyProfile = Vec<Strategy>;

/// Static quantum game: state preparation, measurement, payoffs, and the
/// per-player strategy spaces.
#[derive(Debug, Clone)]
pub struct QuantumGameSpec {
    pub player_dims: Vec<usize>,
    pub initial_state: DensityMatrix,
    pub outcome_povm: Povm,
    /// Per-player payoff per POVM outcome label.
    pub payoffs: Vec<HashMap<String, f64>>,
    pub strategy_spaces: Vec<StrategySpace>,
}

impl QuantumGameSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.player_dims.len();
        let total: usize = self.player_dims.iter().product();
        if self.initial_state.dim() != total {
            return Err(Error::DimensionMismatch(format!(
                "initial state dim {} vs player dims {:?}",
                self.initial_state.dim(),
                self.player_dims
            )));
        }
        if self.outcome_povm.dim() != total {
            return Err(Error::DimensionMismatch(format!(
                "POVM dim {} vs player dims {:?}",
                self.outcome_povm.dim(),
                self.player_dims
            )));
        }
        if self.payoffs.len() != n || self.strategy_spaces.len() != n {
            return Err(Error::DimensionMismatch(
                "payoff table or strategy space count != player count".into(),
            ));
        }
        for table in &self.payoffs {
            for e in self.outcome_povm.outcomes() {
                if !table.contains_key(&e.label) {
                    return Err(Error::InvalidParameter(format!(
                        "payoff missing for outcome '{}'",
                        e.label
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn player_count(&self) -> usize {
        self.player_dims.len()
    }
}

/// Turn a strategy into the channel it denotes within its space.
pub fn strategy_to_channel(
    space: &StrategySpace,
    strategy: &Strategy,
    dim: usize,
) -> Result<KrausChannel> {
    match (space, strategy) {
        (StrategySpace::UnitaryParametric { factory, bounds }, Strategy::Parameters(p)) => {
            if p.len() != factory.parameter_count() || p.len() != bounds.len() {
                return Err(Error::InvalidParameter(format!(
                    "expected {} parameters, got {}",
                    factory.parameter_count(),
                    p.len()
                )));
            }
            for (x, (lo, hi)) in p.iter().zip(bounds) {
                if *x < lo - 1e-9 || *x > hi + 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "parameter {x} outside [{lo}, {hi}]"
                    )));
                }
            }
            KrausChannel::from_unitary(&factory.build(p))
        }
        (StrategySpace::FullUnitary, Strategy::Channel(ch))
        | (StrategySpace::Channel, Strategy::Channel(ch)) => {
            if ch.input_dim() != dim || ch.output_dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "channel on dim {} for a player of dim {dim}",
                    ch.input_dim()
                )));
            }
            if !ch.is_trace_preserving() {
                return Err(Error::NotTracePreserving(0.0));
            }
            Ok(ch.clone())
        }
        (StrategySpace::ClassicalMixture { unitaries }, Strategy::Mixture(w)) => {
            if w.len() != unitaries.len() {
                return Err(Error::InvalidProbabilities(format!(
                    "{} weights for {} unitaries",
                    w.len(),
                    unitaries.len()
                )));
            }
            let pairs: Vec<(f64, ComplexMatrix)> = w
                .iter()
                .cloned()
                .zip(unitaries.iter().cloned())
                .collect();
            KrausChannel::mixture_of_unitaries(&pairs)
        }
        _ => Err(Error::InvalidParameter(
            "strategy kind does not match the player's strategy space".into(),
        )),
    }
}

/// Expected payoffs of a profile.
pub fn evaluate(spec: &QuantumGameSpec, profile: &StrategyProfile) -> Result<Vec<f64>> {
    if profile.len() != spec.player_count() {
        return Err(Error::DimensionMismatch(format!(
            "profile of {} strategies for {} players",
            profile.len(),
            spec.player_count()
        )));
    }
    let mut joint: Option<KrausChannel> = None;
    for ((space, strategy), &dim) in spec
        .strategy_spaces
        .iter()
        .zip(profile)
        .zip(&spec.player_dims)
    {
        let ch = strategy_to_channel(space, strategy, dim)?;
        joint = Some(match joint {
            None => ch,
            Some(acc) => acc.tensor(&ch),
        });
    }
    let joint = joint.expect("at least one player");
    // inputs are validated at construction, so skip the density-matrix
    // revalidation and read the outcome probabilities off directly; this
    // is the hot path of every grid search
    let final_matrix = joint.apply_matrix(spec.initial_state.matrix());
    let mut total = 0.0;
    let mut out = vec![0.0; spec.player_count()];
    for effect in spec.outcome_povm.outcomes() {
        let mut p = 0.0;
        let m = &effect.operator;
        let d = m.rows();
        for i in 0..d {
            for j in 0..d {
                let prod = m[(i, j)] * final_matrix[(j, i)];
                p += prod.re;
            }
        }
        total += p;
        for (player, table) in spec.payoffs.iter().enumerate() {
            out[player] += p * table[&effect.label];
        }
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!(
            "outcome probabilities sum to {total}"
        )));
    }
    Ok(out)
}

/// Iterate the Cartesian grid over a box, lexicographic order.
fn grid_points(bounds: &[(f64, f64)], resolution: &[usize]) -> Vec<Vec<f64>> {
    let mut points = vec![vec![]];
    for (dim, (lo, hi)) in bounds.iter().enumerate() {
        let n = resolution[dim.min(resolution.len() - 1)].max(2);
        let mut next = Vec::with_capacity(points.len() * n);
        for p in &points {
            for t in 0..n {
                let x = lo + (hi - lo) * t as f64 / (n - 1) as f64;
                let mut q = p.clone();
                q.push(x);
                next.push(q);
            }
        }
        points = next;
    }
    points
}

/// Grid over the probability simplex with `k` vertices.
fn simplex_grid(k: usize, per_axis: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, n: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if k == 1 {
            let used: usize = acc.iter().sum();
            let mut w: Vec<f64> = acc.iter().map(|&t| t as f64 / n as f64).collect();
            w.push((n - used) as f64 / n as f64);
            out.push(w);
            return;
        }
        let used: usize = acc.iter().sum();
        for t in 0..=(n - used) {
            acc.push(t);
            rec(k - 1, n, acc, out);
            acc.pop();
        }
    }
    let n = per_axis.max(1);
    let mut out = Vec::new();
    rec(k, n, &mut Vec::new(), &mut out);
    out
}

fn payoff_with(
    spec: &QuantumGameSpec,
    profile: &StrategyProfile,
    player: usize,
    replacement: Strategy,
) -> Result<f64> {
    let mut trial = profile.clone();
    trial[player] = replacement;
    Ok(evaluate(spec, &trial)?[player])
}

/// Best deviation for one player: exhaustive grid search over the player's
/// strategy box plus one coordinate-descent refinement from the best grid
/// point. Ties break toward the lexicographically smallest parameters.
pub fn best_response(
    spec: &QuantumGameSpec,
    profile: &StrategyProfile,
    player: usize,
    resolution: &[usize],
) -> Result<(Strategy, f64)> {
    let current = evaluate(spec, profile)?[player];
    match &spec.strategy_spaces[player] {
        StrategySpace::UnitaryParametric { bounds, .. } => {
            let bounds = bounds.clone();
            let mut best_pay = f64::NEG_INFINITY;
            let mut best_point: Vec<f64> = Vec::new();
            for point in grid_points(&bounds, resolution) {
                let pay = payoff_with(spec, profile, player, Strategy::Parameters(point.clone()))?;
                if pay > best_pay + 1e-12 {
                    best_pay = pay;
                    best_point = point;
                }
            }
            // one refinement pass: per-coordinate local scan around the best
            // grid cell
            for dim in 0..bounds.len() {
                let (lo, hi) = bounds[dim];
                let n = resolution[dim.min(resolution.len() - 1)].max(2);
                let cell = (hi - lo) / (n - 1) as f64;
                let center = best_point[dim];
                for t in 0..=40 {
                    let x = (center - cell + 2.0 * cell * t as f64 / 40.0).clamp(lo, hi);
                    let mut q = best_point.clone();
                    q[dim] = x;
                    let pay = payoff_with(spec, profile, player, Strategy::Parameters(q.clone()))?;
                    if pay > best_pay + 1e-12 {
                        best_pay = pay;
                        best_point = q;
                    }
                }
            }
            Ok((Strategy::Parameters(best_point), (best_pay - current).max(0.0)))
        }
        StrategySpace::ClassicalMixture { unitaries } => {
            let k = unitaries.len();
            let n = resolution.first().copied().unwrap_or(20).max(1);
            let mut best_pay = f64::NEG_INFINITY;
            let mut best_w: Vec<f64> = Vec::new();
            for w in simplex_grid(k, n) {
                let pay = payoff_with(spec, profile, player, Strategy::Mixture(w.clone()))?;
                if pay > best_pay + 1e-12 {
                    best_pay = pay;
                    best_w = w;
                }
            }
            Ok((Strategy::Mixture(best_w), (best_pay - current).max(0.0)))
        }
        StrategySpace::FullUnitary | StrategySpace::Channel => Err(Error::UnsupportedSearch),
    }
}

/// Result of an epsilon-Nash verification.
#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub payoffs: Vec<f64>,
    /// Max best-response gain over players.
    pub epsilon: f64,
    pub per_player_gain: Vec<f64>,
    pub grid_resolution: Vec<usize>,
}

/// Certify a profile as epsilon-Nash: epsilon is the largest payoff any
/// player can gain by deviating within their strategy space (at the given
/// grid resolution).
pub fn verify_epsilon_nash(
    spec: &QuantumGameSpec,
    profile: &StrategyProfile,
    resolution: &[usize],
) -> Result<EquilibriumReport> {
    let payoffs = evaluate(spec, profile)?;
    let mut gains = Vec::with_capacity(spec.player_count());
    for player in 0..spec.player_count() {
        let (_, gain) = best_response(spec, profile, player, resolution)?;
        gains.push(gain);
    }
    let epsilon = gains.iter().cloned().fold(0.0, f64::max);
    Ok(EquilibriumReport {
        payoffs,
        epsilon,
        per_player_gain: gains,
        grid_resolution: resolution.to_vec(),
    })
}

/// Interior mixed equilibrium of a 2x2 bimatrix game. `alpha[i][j]` is the
/// row player's payoff and `beta[i][j]` the column player's when row plays i
/// and column plays j. Returns (p, q, payoffs) with p the row player's
/// probability of action 0 and q the column player's.
pub fn mixed_equilibrium_2x2(
    alpha: &[[f64; 2]; 2],
    beta: &[[f64; 2]; 2],
) -> Result<(f64, f64, (f64, f64))> {
    let da = alpha[0][0] - alpha[0][1] - alpha[1][0] + alpha[1][1];
    let db = beta[0][0] - beta[0][1] - beta[1][0] + beta[1][1];
    if da.abs() < 1e-12 || db.abs() < 1e-12 {
        return Err(Error::NoInteriorEquilibrium);
    }
    let q = (alpha[1][1] - alpha[0][1]) / da;
    let p = (beta[1][1] - beta[1][0]) / db;
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::NoInteriorEquilibrium);
    }
    let mut pay_a = 0.0;
    let mut pay_b = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let w = (if i == 0 { p } else { 1.0 - p }) * (if j == 0 { q } else { 1.0 - q });
            pay_a += w * alpha[i][j];
            pay_b += w * beta[i][j];
        }
    }
    Ok((p, q, (pay_a, pay_b)))
}

/// Finite mixture of unitary dressings applied to a state.
pub fn sample_mixed_unitary(
    pairs: &[(f64, ComplexMatrix)],
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    KrausChannel::mixture_of_unitaries(pairs)?.apply(rho)
}

/// Seeded Monte-Carlo average of U rho U* over Haar-random U in SU(2)
/// (the twirl; converges to I/2 for any qubit input).
pub fn haar_twirl_monte_carlo(rho: &DensityMatrix, samples: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = ComplexMatrix::zeros(2, 2);
    for _ in 0..samples {
        let u = su2_from_rng(&mut rng);
        acc = acc.add(&u.mul(rho.matrix()).mul(&u.adjoint()));
    }
    acc.scale(cr(1.0 / samples as f64))
}
