//! Payoff structure and outcome alphabet of the 2x2 prisoner's dilemma.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("payoff ordering violated: {larger} = {larger_value} must exceed {smaller} = {smaller_value}")]
    OrderingViolation {
        larger: &'static str,
        smaller: &'static str,
        larger_value: f64,
        smaller_value: f64,
    },
    #[error("payoff {0} is not finite")]
    NonFinite(&'static str),
    #[error("donation game needs b > c > 0, got b = {b}, c = {c}")]
    InvalidDonation { b: f64, c: f64 },
}

/// The payoff tuple `(T, R, P, S)`.
///
/// Construction through [`GameParams::new`] enforces `T > R > P > S`. The
/// auxiliary condition `2R > T + S` is deliberately not required.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGameParams", into = "RawGameParams")]
pub struct GameParams {
    t: f64,
    r: f64,
    p: f64,
    s: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGameParams {
    #[serde(rename = "T")]
    t: f64,
    #[serde(rename = "R")]
    r: f64,
    #[serde(rename = "P")]
    p: f64,
    #[serde(rename = "S")]
    s: f64,
}

impl TryFrom<RawGameParams> for GameParams {
    type Error = GameError;
    fn try_from(raw: RawGameParams) -> Result<Self, Self::Error> {
        GameParams::new(raw.t, raw.r, raw.p, raw.s)
    }
}

impl From<GameParams> for RawGameParams {
    fn from(g: GameParams) -> Self {
        RawGameParams { t: g.t, r: g.r, p: g.p, s: g.s }
    }
}

impl GameParams {
    pub fn new(t: f64, r: f64, p: f64, s: f64) -> Result<Self, GameError> {
        let params = GameParams { t, r, p, s };
        validate(&params)?;
        Ok(params)
    }

    /// The conventional `(5, 3, 1, 0)` game.
    pub fn standard() -> Self {
        GameParams { t: 5.0, r: 3.0, p: 1.0, s: 0.0 }
    }

    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn s(&self) -> f64 {
        self.s
    }

    /// `(T, R, P, S)` in that order.
    pub fn as_tuple(&self) -> (f64, f64, f64, f64) {
        (self.t, self.r, self.p, self.s)
    }
}

impl Default for GameParams {
    fn default() -> Self {
        Self::standard()
    }
}

impl fmt::Display for GameParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(T={}, R={}, P={}, S={})", self.t, self.r, self.p, self.s)
    }
}

/// Checks finiteness and the strict ordering `T > R > P > S`.
pub fn validate(params: &GameParams) -> Result<(), GameError> {
    let named = [("T", params.t), ("R", params.r), ("P", params.p), ("S", params.s)];
    for (name, value) in named {
        if !value.is_finite() {
            return Err(GameError::NonFinite(name));
        }
    }
    for pair in named.windows(2) {
        let (larger, larger_value) = pair[0];
        let (smaller, smaller_value) = pair[1];
        if larger_value <= smaller_value {
            return Err(GameError::OrderingViolation {
                larger,
                smaller,
                larger_value,
                smaller_value,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    C,
    D,
}

impl Action {
    pub fn is_cooperate(self) -> bool {
        self == Action::C
    }

    pub fn from_cooperate(cooperate: bool) -> Self {
        if cooperate {
            Action::C
        } else {
            Action::D
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Action::C => 'C',
            Action::D => 'D',
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Joint outcome of one round, seen from a designated player: the first
/// letter is that player's action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    CC,
    CD,
    DC,
    DD,
}

impl Outcome {
    /// Canonical order shared by every vector and matrix in the crate.
    pub const ALL: [Outcome; 4] = [Outcome::CC, Outcome::CD, Outcome::DC, Outcome::DD];

    pub fn from_actions(own: Action, other: Action) -> Self {
        match (own, other) {
            (Action::C, Action::C) => Outcome::CC,
            (Action::C, Action::D) => Outcome::CD,
            (Action::D, Action::C) => Outcome::DC,
            (Action::D, Action::D) => Outcome::DD,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Zero-based position in the `CC, CD, DC, DD` order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn own_action(self) -> Action {
        match self {
            Outcome::CC | Outcome::CD => Action::C,
            Outcome::DC | Outcome::DD => Action::D,
        }
    }

    pub fn other_action(self) -> Action {
        match self {
            Outcome::CC | Outcome::DC => Action::C,
            Outcome::CD | Outcome::DD => Action::D,
        }
    }

    /// The same round seen by the other player.
    pub fn swap(self) -> Self {
        match self {
            Outcome::CD => Outcome::DC,
            Outcome::DC => Outcome::CD,
            o => o,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.own_action(), self.other_action())
    }
}

/// `(score_self, score_other)` for one round.
pub fn payoff(outcome: Outcome, params: &GameParams) -> (f64, f64) {
    match outcome {
        Outcome::CC => (params.r, params.r),
        Outcome::CD => (params.s, params.t),
        Outcome::DC => (params.t, params.s),
        Outcome::DD => (params.p, params.p),
    }
}

/// Benefit/cost parametrisation of the donation game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DonationParams {
    pub b: f64,
    pub c: f64,
}

impl DonationParams {
    pub fn new(b: f64, c: f64) -> Result<Self, GameError> {
        let d = DonationParams { b, c };
        d.check()?;
        Ok(d)
    }

    fn check(&self) -> Result<(), GameError> {
        if !(self.b.is_finite() && self.c.is_finite() && self.c > 0.0 && self.b > self.c) {
            return Err(GameError::InvalidDonation { b: self.b, c: self.c });
        }
        Ok(())
    }
}

/// `(T, R, P, S) = (b, b - c, 0, -c)`.
pub fn donation_to_params(d: DonationParams) -> Result<GameParams, GameError> {
    d.check()?;
    GameParams::new(d.b, d.b - d.c, 0.0, -d.c)
}
