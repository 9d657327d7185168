//! Dispatch a scenario to the library and shape the results into a
//! report. Results are deterministic for a fixed config and seed; floats
//! are rounded to 12 significant digits before serialization.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use qgt::games::{
    best_response, evaluate, mixed_equilibrium_2x2, strategy_to_channel, verify_epsilon_nash,
    QuantumGameSpec, Strategy, StrategyProfile, StrategySpace, UnitaryFactory,
};
use qgt::linalg::{c, cr, ComplexMatrix};
use qgt::measurement::probabilities;
use qgt::protocols::{
    bv_guess, cournot_closed_form, ewl_spec, meyer_midgame_value, meyer_play, meyer_unitary,
    minority_payoff, mw_final_probabilities, mw_transformed_tables, stackelberg_solve,
    three_player_pd_tables, BVInstance, CournotConfig, EWLConfig, FlipConvention, MWConfig,
};

use crate::config::{Analysis, CliError, Protocol, ScenarioConfig};

/// Round to 12 significant digits so report snapshots are stable.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{:.*e}", 11, x).parse().unwrap_or(x)
}

fn jf(x: f64) -> Value {
    serde_json::Number::from_f64(sig12(x))
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(format!("{x}")))
}

fn jvec(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| jf(x)).collect())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeyerParams {
    u: f64,
    v: f64,
    p: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EwlParams {
    #[serde(default = "default_players")]
    players: usize,
    gamma: f64,
    #[serde(default)]
    flip_convention: Option<String>,
    #[serde(default)]
    payoff_tables: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_family")]
    strategy_family: String,
    profile: Vec<Vec<f64>>,
}

fn default_players() -> usize {
    2
}

fn default_family() -> String {
    "ewl2".into()
}

fn default_su2_family() -> String {
    "su2".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MinorityParams {
    profile: Vec<Vec<f64>>,
    #[serde(default = "default_su2_family")]
    strategy_family: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MwParams {
    /// Four amplitudes as [re, im] pairs, outcome order 00, 01, 10, 11.
    initial_amplitudes: Vec<[f64; 2]>,
    alpha: [[f64; 2]; 2],
    beta: [[f64; 2]; 2],
    p: f64,
    q: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BvParams {
    n: usize,
    a: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DuopolyParams {
    a: f64,
    c: f64,
    gamma: f64,
    #[serde(default = "default_width")]
    h: f64,
}

fn default_width() -> f64 {
    0.1
}

fn strategy_family(name: &str) -> Result<(UnitaryFactory, Vec<(f64, f64)>), CliError> {
    match name {
        "ewl2" => Ok((
            UnitaryFactory::EwlTwoParam,
            vec![(0.0, PI), (0.0, FRAC_PI_2)],
        )),
        "su2" => Ok((
            UnitaryFactory::Su2,
            vec![(0.0, FRAC_PI_2), (-PI, PI), (-PI, PI)],
        )),
        "phase_flip" => Ok((
            UnitaryFactory::PhaseFlipTwoParam,
            vec![(0.0, FRAC_PI_2), (0.0, FRAC_PI_2)],
        )),
        other => Err(CliError::Config(format!(
            "unknown strategy_family '{other}' (expected ewl2, su2, or phase_flip)"
        ))),
    }
}

fn profile_strategies(
    profile: &[Vec<f64>],
    players: usize,
    factory: UnitaryFactory,
) -> Result<StrategyProfile, CliError> {
    if profile.len() != players {
        return Err(CliError::Config(format!(
            "profile lists {} players, expected {players}",
            profile.len()
        )));
    }
    for (k, p) in profile.iter().enumerate() {
        if p.len() != factory.parameter_count() {
            return Err(CliError::Config(format!(
                "profile entry {k} has {} parameters, the strategy family takes {}",
                p.len(),
                factory.parameter_count()
            )));
        }
    }
    Ok(profile
        .iter()
        .map(|p| Strategy::Parameters(p.clone()))
        .collect())
}

fn ewl_game(params: &EwlParams) -> Result<(QuantumGameSpec, StrategyProfile), CliError> {
    let (factory, bounds) = strategy_family(&params.strategy_family)?;
    let flip = match params.flip_convention.as_deref() {
        Some("dhat") => FlipConvention::DHat,
        Some("sigma_x") => FlipConvention::SigmaX,
        Some(other) => {
            return Err(CliError::Config(format!(
                "unknown flip_convention '{other}' (expected dhat or sigma_x)"
            )))
        }
        None if params.players == 2 => FlipConvention::DHat,
        None => FlipConvention::SigmaX,
    };
    let tables = match &params.payoff_tables {
        Some(t) => t.clone(),
        None if params.players == 2 => {
            vec![vec![3.0, 0.0, 5.0, 1.0], vec![3.0, 5.0, 0.0, 1.0]]
        }
        None if params.players == 3 => three_player_pd_tables().to_vec(),
        None => {
            return Err(CliError::Config(
                "payoff_tables is required for more than 3 players".into(),
            ))
        }
    };
    let cfg = EWLConfig {
        player_count: params.players,
        gamma: params.gamma,
        flip_convention: flip,
        payoff_tables: tables,
        strategy_box: StrategySpace::UnitaryParametric { factory, bounds },
    };
    let spec = ewl_spec(&cfg)?;
    let profile = profile_strategies(&params.profile, params.players, factory)?;
    Ok((spec, profile))
}

fn minority_game(params: &MinorityParams) -> Result<(QuantumGameSpec, StrategyProfile), CliError> {
    let players = params.profile.len();
    if players < 3 {
        return Err(CliError::Config(format!(
            "minority game needs at least 3 players, profile lists {players}"
        )));
    }
    let (factory, bounds) = strategy_family(&params.strategy_family)?;
    let tables: Vec<Vec<f64>> = (0..players)
        .map(|k| {
            (0..(1usize << players))
                .map(|w| {
                    let ones = (w as u32).count_ones() as usize;
                    let bit = (w >> (players - 1 - k)) & 1;
                    let same = if bit == 1 { ones } else { players - ones };
                    if 2 * same < players {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let cfg = EWLConfig {
        player_count: players,
        gamma: FRAC_PI_2,
        flip_convention: FlipConvention::SigmaX,
        payoff_tables: tables,
        strategy_box: StrategySpace::UnitaryParametric { factory, bounds },
    };
    let spec = ewl_spec(&cfg)?;
    let profile = profile_strategies(&params.profile, players, factory)?;
    Ok((spec, profile))
}

fn game_distribution(
    spec: &QuantumGameSpec,
    profile: &StrategyProfile,
) -> Result<Map<String, Value>, CliError> {
    let mut joint: Option<qgt::channels::KrausChannel> = None;
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
    let rho = joint.expect("at least one player").apply(&spec.initial_state)?;
    let dist = probabilities(&rho, &spec.outcome_povm)?;
    let mut out = Map::new();
    for (label, p) in dist.labels.iter().zip(&dist.probabilities) {
        out.insert(label.clone(), jf(*p));
    }
    Ok(out)
}

fn nash_results(
    spec: &QuantumGameSpec,
    profile: &StrategyProfile,
    resolution: &[usize],
    tolerance: f64,
) -> Result<Value, CliError> {
    let report = verify_epsilon_nash(spec, profile, resolution)?;
    Ok(json!({
        "payoffs": jvec(&report.payoffs),
        "epsilon": jf(report.epsilon),
        "per_player_gain": jvec(&report.per_player_gain),
        "grid": report.grid_resolution,
        "tolerance": jf(tolerance),
        "certified": report.epsilon <= tolerance,
    }))
}

fn search_results(
    spec: &QuantumGameSpec,
    profile: &StrategyProfile,
    resolution: &[usize],
) -> Result<Value, CliError> {
    let payoffs = evaluate(spec, profile)?;
    let mut deviations = Vec::new();
    for player in 0..spec.player_count() {
        let (best, gain) = best_response(spec, profile, player, resolution)?;
        let params = match best {
            Strategy::Parameters(p) => jvec(&p),
            Strategy::Mixture(w) => jvec(&w),
            Strategy::Channel(_) => Value::Null,
        };
        deviations.push(json!({
            "player": player,
            "best_parameters": params,
            "gain": jf(gain),
        }));
    }
    Ok(json!({
        "payoffs": jvec(&payoffs),
        "deviations": deviations,
    }))
}

/// Execute one analysis and return the results section of the report.
pub fn run_analysis(config: &ScenarioConfig) -> Result<Value, CliError> {
    let resolution = config.resolution();
    let tolerance = config.tolerance.unwrap_or(1e-3);
    let unsupported = |what: &str| {
        Err(CliError::Config(format!(
            "analysis '{what}' is not supported for this protocol"
        )))
    };
    match config.protocol {
        Protocol::Meyer => {
            let p: MeyerParams = config.typed_parameters()?;
            if config.analysis != Analysis::Evaluate {
                return unsupported("non-evaluate");
            }
            let u = meyer_unitary(cr(p.u), cr(p.v))?;
            let (rho, payoff) = meyer_play(&u, p.p, &u)?;
            Ok(json!({
                "payoff": jf(payoff),
                "prob_heads": jf(rho.matrix()[(0, 0)].re),
                "prob_tails": jf(rho.matrix()[(1, 1)].re),
                "midgame_value": jf(meyer_midgame_value(cr(p.u), cr(p.v), p.p)?),
            }))
        }
        Protocol::Ewl => {
            let params: EwlParams = config.typed_parameters()?;
            let (spec, profile) = ewl_game(&params)?;
            match config.analysis {
                Analysis::Evaluate | Analysis::Sweep => {
                    let payoffs = evaluate(&spec, &profile)?;
                    Ok(json!({
                        "payoffs": jvec(&payoffs),
                        "outcome_probabilities": game_distribution(&spec, &profile)?,
                    }))
                }
                Analysis::NashVerify => nash_results(&spec, &profile, &resolution, tolerance),
                Analysis::NashSearch => search_results(&spec, &profile, &resolution),
            }
        }
        Protocol::Minority => {
            let params: MinorityParams = config.typed_parameters()?;
            match config.analysis {
                Analysis::Evaluate | Analysis::Sweep => {
                    // the direct pipeline agrees with the game spec and is
                    // cheaper for plain evaluation
                    let (factory, _) = strategy_family(&params.strategy_family)?;
                    let unitaries: Vec<ComplexMatrix> = params
                        .profile
                        .iter()
                        .map(|p| {
                            if p.len() != factory.parameter_count() {
                                return Err(CliError::Config(format!(
                                    "profile entry has {} parameters, expected {}",
                                    p.len(),
                                    factory.parameter_count()
                                )));
                            }
                            Ok(factory.build(p))
                        })
                        .collect::<Result<_, _>>()?;
                    let payoffs = minority_payoff(&unitaries, true)?;
                    Ok(json!({ "payoffs": jvec(&payoffs) }))
                }
                Analysis::NashVerify => {
                    let (spec, profile) = minority_game(&params)?;
                    nash_results(&spec, &profile, &resolution, tolerance)
                }
                Analysis::NashSearch => {
                    let (spec, profile) = minority_game(&params)?;
                    search_results(&spec, &profile, &resolution)
                }
            }
        }
        Protocol::Mw => {
            let params: MwParams = config.typed_parameters()?;
            if params.initial_amplitudes.len() != 4 {
                return Err(CliError::Config(format!(
                    "initial_amplitudes needs 4 entries, got {}",
                    params.initial_amplitudes.len()
                )));
            }
            let amps: Vec<Complex64> = params
                .initial_amplitudes
                .iter()
                .map(|&[re, im]| c(re, im))
                .collect();
            let cfg = MWConfig::new(
                [amps[0], amps[1], amps[2], amps[3]],
                params.alpha,
                params.beta,
            )?;
            match config.analysis {
                Analysis::Evaluate | Analysis::Sweep => {
                    let dist = mw_final_probabilities(&cfg, params.p, params.q)?;
                    let mut probs = Map::new();
                    let mut pay = (0.0, 0.0);
                    for (label, prob) in dist.labels.iter().zip(&dist.probabilities) {
                        probs.insert(label.clone(), jf(*prob));
                        let i = label.as_bytes()[0] as usize - b'0' as usize;
                        let j = label.as_bytes()[1] as usize - b'0' as usize;
                        pay.0 += prob * params.alpha[i][j];
                        pay.1 += prob * params.beta[i][j];
                    }
                    let (alpha_t, beta_t) = mw_transformed_tables(&cfg);
                    Ok(json!({
                        "probabilities": probs,
                        "payoffs": jvec(&[pay.0, pay.1]),
                        "transformed_alpha": [jvec(&alpha_t[0]), jvec(&alpha_t[1])],
                        "transformed_beta": [jvec(&beta_t[0]), jvec(&beta_t[1])],
                    }))
                }
                Analysis::NashVerify => {
                    // classical mixed equilibrium of the transformed game
                    let (alpha_t, beta_t) = mw_transformed_tables(&cfg);
                    let (p_star, q_star, (pay_a, pay_b)) =
                        mixed_equilibrium_2x2(&alpha_t, &beta_t)?;
                    Ok(json!({
                        "p_star": jf(p_star),
                        "q_star": jf(q_star),
                        "payoffs": jvec(&[pay_a, pay_b]),
                    }))
                }
                Analysis::NashSearch => unsupported("nash-search"),
            }
        }
        Protocol::Bv => {
            let params: BvParams = config.typed_parameters()?;
            if config.analysis != Analysis::Evaluate {
                return unsupported("non-evaluate");
            }
            let (guessed, calls) = bv_guess(BVInstance::new(params.n, params.a)?)?;
            Ok(json!({
                "guessed": guessed,
                "oracle_calls": calls,
            }))
        }
        Protocol::Cournot => {
            let params: DuopolyParams = config.typed_parameters()?;
            if config.analysis != Analysis::Evaluate && config.analysis != Analysis::Sweep {
                return unsupported("nash analyses (the equilibrium is closed-form)");
            }
            let cfg = CournotConfig::new(params.a, params.c, params.gamma, params.h)?;
            let sol = cournot_closed_form(&cfg)?;
            Ok(json!({
                "y_star": jf(sol.y_star),
                "q_star": jf(sol.q_star),
                "profit": jf(sol.profit),
            }))
        }
        Protocol::Stackelberg => {
            let params: DuopolyParams = config.typed_parameters()?;
            if config.analysis != Analysis::Evaluate && config.analysis != Analysis::Sweep {
                return unsupported("nash analyses (the equilibrium is closed-form)");
            }
            let cfg = CournotConfig::new(params.a, params.c, params.gamma, params.h)?;
            let sol = stackelberg_solve(&cfg)?;
            Ok(json!({
                "y1_star": jf(sol.y1_star),
                "y2_star": jf(sol.y2_star),
                "leader_profit": jf(sol.leader_profit),
                "follower_profit": jf(sol.follower_profit),
            }))
        }
    }
}

/// Flatten a results object into named numeric columns, depth-first with
/// underscore-joined keys; array indices are 1-based.
fn flatten_into(prefix: &str, value: &Value, out: &mut Vec<(String, Value)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}_{k}")
                };
                flatten_into(&key, v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_into(&format!("{prefix}_{}", i + 1), v, out);
            }
        }
        other => out.push((prefix.to_string(), other.clone())),
    }
}

/// One sweep: rewrite the swept parameter for every grid value and
/// evaluate. Returns (column names, rows).
pub fn run_sweep(config: &ScenarioConfig) -> Result<(Vec<String>, Vec<Vec<Value>>), CliError> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
    let name = sweep.parameter_name()?;
    let values = sweep.grid_values()?;
    let mut columns: Vec<String> = vec![name.clone()];
    let mut rows = Vec::new();
    for &v in &values {
        let mut point = config.clone();
        point.analysis = Analysis::Sweep;
        point
            .parameters
            .insert(name.clone(), toml::Value::Float(v));
        let results = run_analysis(&point)?;
        let mut flat = Vec::new();
        flatten_into("", &results, &mut flat);
        if rows.is_empty() {
            columns.extend(flat.iter().map(|(k, _)| k.clone()));
        }
        let mut row = vec![jf(v)];
        row.extend(flat.into_iter().map(|(_, x)| x));
        rows.push(row);
    }
    Ok((columns, rows))
}

/// Assemble the full report document around a results payload.
pub fn report_document(config: &ScenarioConfig, results: Value, started: Instant) -> Value {
    json!({
        "scenario": {
            "protocol": config.protocol,
            "analysis": config.analysis,
            "parameters": parameters_echo(&config.parameters),
            "grid": config.resolution(),
            "tolerance": jf(config.tolerance.unwrap_or(1e-3)),
        },
        "results": results,
        "seed": config.seed.unwrap_or(0),
        "library_version": env!("CARGO_PKG_VERSION"),
        "timing_ms": started.elapsed().as_millis() as u64,
    })
}

fn parameters_echo(table: &toml::value::Table) -> Value {
    fn convert(v: &toml::Value) -> Value {
        match v {
            toml::Value::Float(x) => jf(*x),
            toml::Value::Integer(i) => json!(i),
            toml::Value::Boolean(b) => json!(b),
            toml::Value::String(s) => json!(s),
            toml::Value::Array(items) => Value::Array(items.iter().map(convert).collect()),
            toml::Value::Table(t) => {
                Value::Object(t.iter().map(|(k, v)| (k.clone(), convert(v))).collect())
            }
            toml::Value::Datetime(d) => json!(d.to_string()),
        }
    }
    convert(&toml::Value::Table(table.clone()))
}
