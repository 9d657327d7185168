//! Continuous-strategy duopolies quantized through a hyperbolic-rotation
//! entangler acting on Gaussian wave packets. The analysis runs entirely
//! in closed form on the Gaussian means; the exact Gaussian expected
//! payoff differs from the simplified one by the constant -h/2.

use crate::error::{Error, Result};

/// Duopoly parameters: linear inverse demand a - Q, constant unit cost c,
/// entangling strength gamma, and Gaussian wave-packet width h.
#[derive(Debug, Clone, Copy)]
pub struct CournotConfig {
    pub a: f64,
    pub c: f64,
    pub gamma: f64,
    pub h: f64,
}

impl CournotConfig {
    pub fn new(a: f64, c: f64, gamma: f64, h: f64) -> Result<Self> {
        if !(a > c && c >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need a > c >= 0, got a = {a}, c = {c}"
            )));
        }
        if gamma < 0.0 || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma = {gamma}")));
        }
        if h <= 0.0 {
            return Err(Error::InvalidParameter(format!("width h = {h}")));
        }
        Ok(CournotConfig { a, c, gamma, h })
    }

    /// Mean produced quantities after the entangler: the hyperbolic
    /// rotation of the players' shift parameters (y1, y2).
    pub fn quantities(&self, y1: f64, y2: f64) -> (f64, f64) {
        let (ch, sh) = (self.gamma.cosh(), self.gamma.sinh());
        (y1 * ch + y2 * sh, y1 * sh + y2 * ch)
    }

    /// Simplified payoff of firm j (1 or 2): q_j [a - c - (q1 + q2)]
    /// evaluated on the mean quantities.
    pub fn payoff_simplified(&self, firm: usize, y1: f64, y2: f64) -> f64 {
        let (q1, q2) = self.quantities(y1, y2);
        let margin = self.a - self.c - (q1 + q2);
        match firm {
            1 => q1 * margin,
            2 => q2 * margin,
            _ => panic!("firm index must be 1 or 2"),
        }
    }

    /// Exact Gaussian expected payoff E[x_j (a - c - x1 - x2)]: the
    /// simplified payoff shifted down by h/2 (the wave-packet variance).
    pub fn payoff_exact(&self, firm: usize, y1: f64, y2: f64) -> f64 {
        self.payoff_simplified(firm, y1, y2) - self.h / 2.0
    }
}

/// Closed-form simultaneous-move equilibrium.
#[derive(Debug, Clone, Copy)]
pub struct CournotSolution {
    /// Common equilibrium shift parameter y1* = y2*.
    pub y_star: f64,
    /// Common equilibrium mean quantity.
    pub q_star: f64,
    /// Common equilibrium profit (simplified payoff).
    pub profit: f64,
}

/// Solve the simultaneous-move game:
/// y* = (a - c) cosh(g) / (1 + 2 e^{2g}),
/// profit = (a - c)^2 e^g cosh(g) / (3 cosh(g) + sinh(g))^2.
/// At gamma = 0 this is the classical (a-c)/3 and (a-c)^2/9; as gamma
/// grows the profit rises toward the cooperative (a-c)^2/8.
pub fn cournot_closed_form(cfg: &CournotConfig) -> Result<CournotSolution> {
    let k = cfg.a - cfg.c;
    let g = cfg.gamma;
    let y_star = k * g.cosh() / (1.0 + 2.0 * (2.0 * g).exp());
    let profit = k * k * g.exp() * g.cosh() / (3.0 * g.cosh() + g.sinh()).powi(2);
    let (q1, q2) = cfg.quantities(y_star, y_star);
    if q1 + q2 > cfg.a {
        return Err(Error::InvalidParameter(format!(
            "equilibrium output {} exceeds demand intercept {}",
            q1 + q2,
            cfg.a
        )));
    }
    Ok(CournotSolution {
        y_star,
        q_star: q1,
        profit,
    })
}

/// Closed-form sequential-move (leader/follower) equilibrium.
#[derive(Debug, Clone, Copy)]
pub struct StackelbergSolution {
    pub y1_star: f64,
    pub y2_star: f64,
    pub leader_profit: f64,
    pub follower_profit: f64,
}

/// Follower's best reply to the leader's choice:
/// y2(y1) = ((a - c) cosh(g) - y1 e^{2g}) / (1 + e^{2g}).
pub fn follower_reaction(cfg: &CournotConfig, y1: f64) -> f64 {
    let g = cfg.gamma;
    ((cfg.a - cfg.c) * g.cosh() - y1 * (2.0 * g).exp()) / (1.0 + (2.0 * g).exp())
}

/// Solve the sequential game: the leader maximizes against the follower's
/// reaction, giving y1* = (a - c)(1 + cosh(2g)) / (2 (cosh(g) + e^g)).
/// At gamma = 0 this recovers the classical (a-c)/2 and (a-c)/4.
pub fn stackelberg_solve(cfg: &CournotConfig) -> Result<StackelbergSolution> {
    let k = cfg.a - cfg.c;
    let g = cfg.gamma;
    let y1_star = k * (1.0 + (2.0 * g).cosh()) / (2.0 * (g.cosh() + g.exp()));
    let y2_star = follower_reaction(cfg, y1_star);
    let (q1, q2) = cfg.quantities(y1_star, y2_star);
    if q1 + q2 > cfg.a {
        return Err(Error::InvalidParameter(format!(
            "equilibrium output {} exceeds demand intercept {}",
            q1 + q2,
            cfg.a
        )));
    }
    Ok(StackelbergSolution {
        y1_star,
        y2_star,
        leader_profit: cfg.payoff_simplified(1, y1_star, y2_star),
        follower_profit: cfg.payoff_simplified(2, y1_star, y2_star),
    })
}
