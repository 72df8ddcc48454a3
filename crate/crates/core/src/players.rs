//! Playable strategies: memory-one vectors, the classic demo opponents and
//! the adaptive frequency-model learner.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Action, Outcome};
use crate::markov::StrategyVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlayerError {
    #[error("no previous outcome supplied after round 1")]
    MissingHistory,
    #[error("{name} = {value} outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },
}

/// How a memory-one player opens the match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum FirstMovePolicy {
    AlwaysCooperate,
    AlwaysDefect,
    Bernoulli { rate: f64 },
}

impl Default for FirstMovePolicy {
    fn default() -> Self {
        FirstMovePolicy::Bernoulli { rate: 0.5 }
    }
}

impl FirstMovePolicy {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        match *self {
            FirstMovePolicy::AlwaysCooperate => Action::C,
            FirstMovePolicy::AlwaysDefect => Action::D,
            FirstMovePolicy::Bernoulli { rate } => bernoulli(rng, rate),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlayerSpec {
    /// `first_move: None` defers to the match configuration.
    MemoryOne {
        p: StrategyVector,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        first_move: Option<FirstMovePolicy>,
    },
    Cooperator,
    Defector,
    TitForTat,
    Grudger,
    Random { coop_rate: f64 },
    Adaptive { epsilon: f64, k: u64 },
}

impl PlayerSpec {
    pub fn memory_one(p: StrategyVector) -> Self {
        PlayerSpec::MemoryOne { p, first_move: None }
    }

    pub fn validate(&self) -> Result<(), PlayerError> {
        let check = |name, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(PlayerError::InvalidProbability { name, value })
            }
        };
        match *self {
            PlayerSpec::Random { coop_rate } => check("coop_rate", coop_rate),
            PlayerSpec::Adaptive { epsilon, .. } => check("epsilon", epsilon),
            PlayerSpec::MemoryOne { first_move: Some(FirstMovePolicy::Bernoulli { rate }), .. } => {
                check("rate", rate)
            }
            _ => Ok(()),
        }
    }

    /// A short human-readable label.
    pub fn label(&self) -> String {
        match self {
            PlayerSpec::MemoryOne { p, .. } => {
                let v = p.values();
                format!("MemoryOne({}, {}, {}, {})", short(v[0]), short(v[1]), short(v[2]), short(v[3]))
            }
            PlayerSpec::Cooperator => "Cooperator".into(),
            PlayerSpec::Defector => "Defector".into(),
            PlayerSpec::TitForTat => "TitForTat".into(),
            PlayerSpec::Grudger => "Grudger".into(),
            PlayerSpec::Random { coop_rate } => format!("Random({})", short(*coop_rate)),
            PlayerSpec::Adaptive { epsilon, k } => format!("Adaptive(eps={}, K={})", short(*epsilon), k),
        }
    }
}

fn short(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.into()
    }
}

/// Visit and follow-up cooperation counts of the adaptive learner, indexed
/// by its own view of the previous outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AdaptiveState {
    pub n_counts: [u64; 4],
    pub d_counts: [u64; 4],
    pub round: u64,
}

impl AdaptiveState {
    pub fn is_consistent(&self) -> bool {
        self.n_counts.iter().zip(&self.d_counts).all(|(n, d)| d <= n)
            && self.n_counts.iter().sum::<u64>() <= self.round
    }
}

/// Records that the opponent played `opponent_action` right after
/// `prev_outcome`.
pub fn adaptive_update(state: &AdaptiveState, prev_outcome: Outcome, opponent_action: Action) -> AdaptiveState {
    let mut next = *state;
    let i = prev_outcome.index();
    next.n_counts[i] += 1;
    if opponent_action.is_cooperate() {
        next.d_counts[i] += 1;
    }
    next.round += 1;
    next
}

/// Estimated probability that the opponent cooperates after each outcome;
/// unvisited outcomes default to one half.
pub fn estimate_policy(state: &AdaptiveState) -> [f64; 4] {
    let mut out = [0.5; 4];
    for (i, slot) in out.iter_mut().enumerate() {
        if state.n_counts[i] > 0 {
            *slot = state.d_counts[i] as f64 / state.n_counts[i] as f64;
        }
    }
    out
}

/// Per-kind mutable state carried between rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlayerState {
    #[default]
    Stateless,
    Grudger { triggered: bool },
    Adaptive(AdaptiveState),
}

impl PlayerState {
    pub fn initial(spec: &PlayerSpec) -> Self {
        match spec {
            PlayerSpec::Grudger => PlayerState::Grudger { triggered: false },
            PlayerSpec::Adaptive { .. } => PlayerState::Adaptive(AdaptiveState::default()),
            _ => PlayerState::Stateless,
        }
    }
}

fn bernoulli<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> Action {
    Action::from_cooperate(rng.gen::<f64>() < rate)
}

/// Chooses the next action. `round` is 1-based and `last_outcome` is the
/// previous round from this player's view.
pub fn next_action<R: Rng + ?Sized>(
    spec: &PlayerSpec,
    state: &PlayerState,
    round: u64,
    last_outcome: Option<Outcome>,
    default_first_move: FirstMovePolicy,
    rng: &mut R,
) -> Result<Action, PlayerError> {
    if round > 1 && last_outcome.is_none() {
        return Err(PlayerError::MissingHistory);
    }
    let action = match spec {
        PlayerSpec::Cooperator => Action::C,
        PlayerSpec::Defector => Action::D,
        PlayerSpec::TitForTat => last_outcome.map_or(Action::C, Outcome::other_action),
        PlayerSpec::Grudger => match state {
            PlayerState::Grudger { triggered: true } => Action::D,
            _ => Action::C,
        },
        PlayerSpec::Random { coop_rate } => bernoulli(rng, *coop_rate),
        PlayerSpec::MemoryOne { p, first_move } => match last_outcome {
            None => first_move.unwrap_or(default_first_move).draw(rng),
            Some(o) => bernoulli(rng, p.get(o)),
        },
        PlayerSpec::Adaptive { epsilon, k } => {
            let learned = match state {
                PlayerState::Adaptive(s) => *s,
                _ => AdaptiveState::default(),
            };
            if round <= *k {
                bernoulli(rng, 0.5)
            } else {
                // Exploration coin first, then the action coin.
                let explore = rng.gen::<f64>() < *epsilon;
                match (explore, last_outcome) {
                    (false, Some(o)) => bernoulli(rng, estimate_policy(&learned)[o.index()]),
                    _ => bernoulli(rng, 0.5),
                }
            }
        }
    };
    Ok(action)
}

/// Updates `state` after a round in which this player saw `outcome` and the
/// round before was `prev_outcome`.
pub fn observe(state: &mut PlayerState, prev_outcome: Option<Outcome>, outcome: Outcome) {
    match state {
        PlayerState::Stateless => {}
        PlayerState::Grudger { triggered } => {
            if outcome.other_action() == Action::D {
                *triggered = true;
            }
        }
        PlayerState::Adaptive(s) => {
            *s = match prev_outcome {
                Some(prev) => adaptive_update(s, prev, outcome.other_action()),
                None => AdaptiveState { round: s.round + 1, ..*s },
            };
        }
    }
}

/// A spec bundled with its state and random stream for one match.
#[derive(Debug, Clone)]
pub struct Player<R> {
    pub spec: PlayerSpec,
    pub state: PlayerState,
    rng: R,
    round: u64,
    last: Option<Outcome>,
    default_first_move: FirstMovePolicy,
}

impl<R: Rng> Player<R> {
    pub fn new(spec: PlayerSpec, rng: R, default_first_move: FirstMovePolicy) -> Self {
        Player { state: PlayerState::initial(&spec), spec, rng, round: 1, last: None, default_first_move }
    }

    pub fn act(&mut self) -> Action {
        next_action(&self.spec, &self.state, self.round, self.last, self.default_first_move, &mut self.rng)
            .expect("player tracks its own history")
    }

    /// Feeds back the round just played, from this player's view.
    pub fn record(&mut self, outcome: Outcome) {
        observe(&mut self.state, self.last, outcome);
        self.last = Some(outcome);
        self.round += 1;
    }

    pub fn adaptive_state(&self) -> Option<&AdaptiveState> {
        match &self.state {
            PlayerState::Adaptive(s) => Some(s),
            _ => None,
        }
    }
}
