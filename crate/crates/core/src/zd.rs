//! Zero-determinant strategy constructors.
//!
//! A memory-one strategy whose column `p̂ = (p1 - 1, p2 - 1, p3, p4)` equals
//! `α S_x + β S_y + γ 1` forces `α s_x + β s_y + γ = 0` against every
//! opponent. The constructors here solve for `p` and reject (never clamp)
//! anything outside the unit cube.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::GameParams;
use crate::markov::{ScorePair, ScoreVectors, StrategyVector, PROB_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZdError {
    #[error("constraint needs alpha or beta to be non-zero")]
    TrivialConstraint,
    #[error("infeasible strategy: {0}")]
    Infeasible(Feasibility),
    #[error("p1 = 1 and p4 = 0 enforce no score (0/0)")]
    DegenerateTarget,
    #[error("{name} = {value} outside [0, 1]")]
    InvalidInput { name: &'static str, value: f64 },
    #[error("extortion factor chi = {0} must be at least 1")]
    InvalidExtortionFactor(f64),
    #[error("scale phi = {phi} outside (0, {upper}]")]
    InvalidScale { phi: f64, upper: f64 },
}

/// Coefficients of `alpha * s_x + beta * s_y + gamma = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl LinearConstraint {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, ZdError> {
        if alpha == 0.0 && beta == 0.0 {
            return Err(ZdError::TrivialConstraint);
        }
        Ok(LinearConstraint { alpha, beta, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Left-hand side evaluated at a score pair.
    pub fn residual(&self, scores: &ScorePair) -> f64 {
        self.alpha * scores.s_x + self.beta * scores.s_y + self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Zero-based component index.
    pub component: usize,
    pub value: f64,
    /// The bound that was crossed (0 or 1).
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub violations: Vec<Violation>,
    /// The raw candidate vector, possibly outside the unit cube.
    pub candidate: [f64; 4],
}

impl Feasibility {
    pub fn check(candidate: [f64; 4]) -> Self {
        let violations: Vec<Violation> = candidate
            .iter()
            .enumerate()
            .filter_map(|(component, &value)| {
                if value.is_nan() || value < -PROB_TOL {
                    Some(Violation { component, value, bound: 0.0 })
                } else if value > 1.0 + PROB_TOL {
                    Some(Violation { component, value, bound: 1.0 })
                } else {
                    None
                }
            })
            .collect();
        Feasibility { feasible: violations.is_empty(), violations, candidate }
    }

    fn into_strategy(self) -> Result<StrategyVector, ZdError> {
        if self.feasible {
            StrategyVector::new(self.candidate).map_err(|_| ZdError::Infeasible(self))
        } else {
            Err(ZdError::Infeasible(self))
        }
    }
}

impl std::fmt::Display for Feasibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.feasible {
            return write!(f, "feasible");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| {
                let op = if v.bound >= 1.0 { ">" } else { "<" };
                format!("p{} = {} {} {}", v.component + 1, v.value, op, v.bound)
            })
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// `p = α S_x + β S_y + γ 1 + (1, 1, 0, 0)`.
pub fn zd_from_constraint(c: &LinearConstraint, params: &GameParams) -> Result<StrategyVector, ZdError> {
    let sv = ScoreVectors::new(params);
    let shift = [1.0, 1.0, 0.0, 0.0];
    let candidate = [0, 1, 2, 3].map(|i| c.alpha * sv.s_x[i] + c.beta * sv.s_y[i] + c.gamma + shift[i]);
    Feasibility::check(candidate).into_strategy()
}

/// A strategy that pins the opponent's long-run score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetScoreStrategy {
    pub p: StrategyVector,
    pub s_y: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SetScoreStrategy {
    pub fn constraint(&self) -> LinearConstraint {
        LinearConstraint { alpha: 0.0, beta: self.beta, gamma: self.gamma }
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<(), ZdError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(ZdError::InvalidInput { name, value });
    }
    Ok(())
}

/// Solves `p̂ = β S_y + γ 1` for the free choice of `p1` and `p4`.
pub fn set_opponent_score(p1: f64, p4: f64, params: &GameParams) -> Result<SetScoreStrategy, ZdError> {
    check_probability("p1", p1)?;
    check_probability("p4", p4)?;
    let weight = p4 + (1.0 - p1);
    if weight == 0.0 {
        return Err(ZdError::DegenerateTarget);
    }
    let (t, r, p, s) = params.as_tuple();
    let spread = r - p;
    let beta = (p1 - p4 - 1.0) / spread;
    let gamma = (r * p4 - p * p1 + p) / spread;
    let p2 = (p1 * (t - p) - (1.0 + p4) * (t - r)) / spread;
    let p3 = ((1.0 - p1) * (p - s) + p4 * (r - s)) / spread;
    let strategy = Feasibility::check([p1, p2, p3, p4]).into_strategy()?;
    // Weighted average of R and P.
    let s_y = (r * p4 + p * (1.0 - p1)) / weight;
    Ok(SetScoreStrategy { p: strategy, s_y, beta, gamma })
}

/// `(p2, p3)` forced by `p̂ = α S_x + γ 1` for a given `p1`, `p4`. Returned
/// unchecked; only `p1 = 1, p4 = 0` lands inside the unit cube.
pub fn own_score_components(p1: f64, p4: f64, params: &GameParams) -> (f64, f64) {
    let (t, r, p, s) = params.as_tuple();
    let p2 = ((1.0 + p4) * (r - s) - p1 * (p - s)) / (r - p);
    let p3 = (-(1.0 - p1) * (t - p) - p4 * (t - r)) / (r - p);
    (p2, p3)
}

/// The only feasible strategy that fixes its own score: `(1, 1, 0, 0)`.
/// Because `p2 >= 1` and `p3 <= 0` for every choice of `p1` and `p4`, X has
/// no freedom to pick the value.
pub fn own_score_strategy(params: &GameParams) -> StrategyVector {
    let (p2, p3) = own_score_components(1.0, 0.0, params);
    StrategyVector::new([1.0, p2, p3, 0.0]).expect("(1, 1, 0, 0) is a valid strategy")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtortionParams {
    pub chi: f64,
    pub phi: f64,
}

/// Largest admissible scale: the smaller of the two bounds from `p2 >= 0`
/// and `p3 <= 1`. Which one binds flips with the sign of `T + S - 2P`.
pub fn phi_upper_bound(chi: f64, params: &GameParams) -> f64 {
    let (t, _, p, s) = params.as_tuple();
    let from_p2 = (p - s) / (chi * (t - p) + (p - s));
    let from_p3 = (p - s) / (chi * (p - s) + (t - p));
    from_p2.min(from_p3)
}

/// The unchecked extortionate vector for `(chi, phi)`.
pub fn extortionate_candidate(e: &ExtortionParams, params: &GameParams) -> [f64; 4] {
    let (t, r, p, s) = params.as_tuple();
    let ExtortionParams { chi, phi } = *e;
    [
        1.0 - phi * (chi - 1.0) * (r - p) / (p - s),
        1.0 - phi * (1.0 + chi * (t - p) / (p - s)),
        phi * (chi + (t - p) / (p - s)),
        0.0,
    ]
}

/// Enforces `s_x - P = chi (s_y - P)`.
pub fn extortionate(e: &ExtortionParams, params: &GameParams) -> Result<StrategyVector, ZdError> {
    if !(e.chi >= 1.0 && e.chi.is_finite()) {
        return Err(ZdError::InvalidExtortionFactor(e.chi));
    }
    let upper = phi_upper_bound(e.chi, params);
    let feasibility = Feasibility::check(extortionate_candidate(e, params));
    if !feasibility.feasible {
        return Err(ZdError::Infeasible(feasibility));
    }
    if e.phi.is_nan() || e.phi <= 0.0 || e.phi > upper * (1.0 + 1e-12) {
        return Err(ZdError::InvalidScale { phi: e.phi, upper });
    }
    feasibility.into_strategy()
}

/// Scores an extortioner gets against an unconditional cooperator, the best
/// case for both players.
pub fn extortion_best_case(chi: f64, params: &GameParams) -> ScorePair {
    let (t, r, p, s) = params.as_tuple();
    let s_x = (p * (t - r) + chi * (r * (t - s) - p * (t - r))) / ((t - r) + chi * (r - s));
    let s_y = (s_x - p) / chi + p;
    ScorePair { s_x, s_y }
}
