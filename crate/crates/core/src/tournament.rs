//! Seeded matches, round-robin tournaments and their summary statistics.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{payoff, Action, GameParams, Outcome};
use crate::markov::{build_transition_matrix, stationary_distribution, MarkovError, ScoreVectors, StrategyVector};
use crate::par::{self, Execution};
use crate::players::{FirstMovePolicy, Player, PlayerError, PlayerSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TournamentError {
    #[error("match length must be at least one round")]
    EmptyMatch,
    #[error("continuation probability omega = {0} must lie strictly inside (0, 1)")]
    InvalidOmega(f64),
    #[error("a tournament needs at least two players, got {0}")]
    TooFewPlayers(usize),
    #[error("repetitions must be at least 1")]
    NoRepetitions,
    #[error("duplicate player name {0:?}")]
    DuplicatePlayer(String),
    #[error("missing result for players {row} vs {col}, repetition {repetition}")]
    IncompleteResults { row: usize, col: usize, repetition: usize },
    #[error("strategy list is empty")]
    EmptyStrategyList,
    #[error(transparent)]
    Player(#[from] PlayerError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchLength {
    Fixed(u64),
    /// Another round follows with probability `omega`.
    Geometric(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub length: MatchLength,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub default_first_move: FirstMovePolicy,
}

impl MatchConfig {
    pub fn fixed(rounds: u64, seed: u64) -> Self {
        MatchConfig { length: MatchLength::Fixed(rounds), seed, default_first_move: FirstMovePolicy::default() }
    }

    pub fn validate(&self) -> Result<(), TournamentError> {
        match self.length {
            MatchLength::Fixed(0) => Err(TournamentError::EmptyMatch),
            MatchLength::Geometric(w) if !(w > 0.0 && w < 1.0) => Err(TournamentError::InvalidOmega(w)),
            _ => Ok(()),
        }
    }
}

/// `1 / (1 - omega)`.
pub fn expected_length(omega: f64) -> f64 {
    1.0 / (1.0 - omega)
}

/// Number of rounds of a geometric match: one, plus one more for every
/// continuation draw below `omega`.
pub fn draw_geometric_length<R: Rng + ?Sized>(omega: f64, rng: &mut R) -> u64 {
    let mut n = 1;
    while rng.gen::<f64>() < omega {
        n += 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// Every round from X's view.
    pub outcomes: Vec<Outcome>,
    pub totals: (f64, f64),
    pub per_round_mean: (f64, f64),
    pub cooperation_counts: (u64, u64),
    pub first_moves: (Action, Action),
}

impl MatchResult {
    pub fn rounds(&self) -> usize {
        self.outcomes.len()
    }

    /// `"CCDC..."`, two letters per round.
    pub fn outcome_string(&self) -> String {
        self.outcomes.iter().map(|o| o.to_string()).collect()
    }

    /// Recomputes both totals from the outcome sequence.
    pub fn recompute_totals(&self, params: &GameParams) -> (f64, f64) {
        self.outcomes.iter().fold((0.0, 0.0), |(a, b), o| {
            let (x, y) = payoff(*o, params);
            (a + x, b + y)
        })
    }

    /// Visit frequencies over `CC, CD, DC, DD`.
    pub fn state_frequencies(&self) -> [f64; 4] {
        let mut counts = [0u64; 4];
        for o in &self.outcomes {
            counts[o.index()] += 1;
        }
        counts.map(|c| c as f64 / self.outcomes.len() as f64)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive mix of several words into one seed.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6A09_E667_F3BC_C908, |h, &p| splitmix64(h ^ splitmix64(p)))
}

/// FNV-1a over the name, used as a stable player identity.
pub fn identity_hash(name: &str) -> u64 {
    name.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

const STREAM_MATCH: u64 = 0;
const STREAM_X: u64 = 1;
const STREAM_Y: u64 = 2;

pub fn play_match(x: &PlayerSpec, y: &PlayerSpec, config: &MatchConfig, params: &GameParams) -> Result<MatchResult, TournamentError> {
    config.validate()?;
    x.validate()?;
    y.validate()?;
    let mut match_rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, STREAM_MATCH]));
    let rounds = match config.length {
        MatchLength::Fixed(n) => n,
        MatchLength::Geometric(w) => draw_geometric_length(w, &mut match_rng),
    };
    let mut px = Player::new(*x, ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, STREAM_X])), config.default_first_move);
    let mut py = Player::new(*y, ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, STREAM_Y])), config.default_first_move);

    let mut outcomes = Vec::with_capacity(rounds as usize);
    let mut totals = (0.0, 0.0);
    let mut coops = (0u64, 0u64);
    let mut first_moves = (Action::C, Action::C);
    for round in 0..rounds {
        let a = px.act();
        let b = py.act();
        if round == 0 {
            first_moves = (a, b);
        }
        let outcome = Outcome::from_actions(a, b);
        let (sx, sy) = payoff(outcome, params);
        totals.0 += sx;
        totals.1 += sy;
        coops.0 += a.is_cooperate() as u64;
        coops.1 += b.is_cooperate() as u64;
        px.record(outcome);
        py.record(outcome.swap());
        outcomes.push(outcome);
    }
    let n = rounds as f64;
    Ok(MatchResult {
        outcomes,
        totals,
        per_round_mean: (totals.0 / n, totals.1 / n),
        cooperation_counts: coops,
        first_moves,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerEntry {
    pub name: String,
    pub spec: PlayerSpec,
}

impl PlayerEntry {
    pub fn new(name: impl Into<String>, spec: PlayerSpec) -> Self {
        PlayerEntry { name: name.into(), spec }
    }
}

impl From<PlayerSpec> for PlayerEntry {
    fn from(spec: PlayerSpec) -> Self {
        PlayerEntry { name: spec.label(), spec }
    }
}

fn default_game() -> GameParams {
    GameParams::standard()
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentConfig {
    pub players: Vec<PlayerEntry>,
    #[serde(rename = "match")]
    pub match_config: MatchConfig,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub include_self_play: bool,
    #[serde(default = "default_game")]
    pub game: GameParams,
}

impl TournamentConfig {
    pub fn new(players: Vec<PlayerEntry>, match_config: MatchConfig, repetitions: usize) -> Self {
        TournamentConfig { players, match_config, repetitions, include_self_play: false, game: GameParams::standard() }
    }

    pub fn validate(&self) -> Result<(), TournamentError> {
        if self.players.len() < 2 {
            return Err(TournamentError::TooFewPlayers(self.players.len()));
        }
        if self.repetitions == 0 {
            return Err(TournamentError::NoRepetitions);
        }
        self.match_config.validate()?;
        let mut names: Vec<&str> = self.players.iter().map(|p| p.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(TournamentError::DuplicatePlayer(w[0].to_string()));
        }
        for p in &self.players {
            p.spec.validate()?;
        }
        Ok(())
    }
}

/// One match of a tournament. `row` played as X, `col` as Y; indices refer
/// to the input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub row: usize,
    pub col: usize,
    pub repetition: usize,
    pub seed: u64,
    pub result: MatchResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSummary {
    pub name: String,
    pub median_score: f64,
    pub mean_score: f64,
    pub cooperation_rate: f64,
    pub initial_cooperation_rate: f64,
    /// Matches won per repetition (strictly larger total). Self-play matches
    /// count as neither wins nor draws.
    pub wins: f64,
    pub draws: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentSummary {
    /// In input order.
    pub players: Vec<PlayerSummary>,
    /// `payoff_matrix[i][j]`: player i's per-round mean against j, averaged
    /// over repetitions. `None` on the diagonal without self-play.
    pub payoff_matrix: Vec<Vec<Option<f64>>>,
    /// Input indices from best to worst.
    pub ranking: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentRun {
    pub summary: TournamentSummary,
    pub matches: Vec<MatchRecord>,
}

struct Job {
    row: usize,
    col: usize,
    repetition: usize,
    seed: u64,
}

/// Per-match seed derived from the two player identities and the
/// repetition, independent of the enumeration order.
pub fn match_seed(master: u64, a: &str, b: &str, repetition: usize) -> u64 {
    let (ha, hb) = (identity_hash(a), identity_hash(b));
    derive_seed(&[master, ha.min(hb), ha.max(hb), repetition as u64])
}

fn schedule(config: &TournamentConfig) -> Vec<Job> {
    let players = &config.players;
    let mut order: Vec<usize> = (0..players.len()).collect();
    order.sort_by(|&a, &b| players[a].name.cmp(&players[b].name));
    let mut jobs = Vec::new();
    for (oi, &i) in order.iter().enumerate() {
        let start = if config.include_self_play { oi } else { oi + 1 };
        for &j in &order[start..] {
            for repetition in 0..config.repetitions {
                let seed = match_seed(config.match_config.seed, &players[i].name, &players[j].name, repetition);
                jobs.push(Job { row: i, col: j, repetition, seed });
            }
        }
    }
    jobs
}

pub fn round_robin(config: &TournamentConfig) -> Result<TournamentRun, TournamentError> {
    round_robin_with(config, Execution::default())
}

pub fn round_robin_with(config: &TournamentConfig, exec: Execution) -> Result<TournamentRun, TournamentError> {
    config.validate()?;
    let jobs = schedule(config);
    let results = par::map(exec, &jobs, |job| {
        let mc = MatchConfig { seed: job.seed, ..config.match_config };
        play_match(&config.players[job.row].spec, &config.players[job.col].spec, &mc, &config.game)
    });
    let mut matches = Vec::with_capacity(jobs.len());
    for (job, result) in jobs.into_iter().zip(results) {
        matches.push(MatchRecord { row: job.row, col: job.col, repetition: job.repetition, seed: job.seed, result: result? });
    }
    let summary = summarize(config, &matches)?;
    Ok(TournamentRun { summary, matches })
}

/// Per-round mean payoffs averaged over repetitions.
pub fn payoff_matrix(
    records: &[MatchRecord],
    players: usize,
    repetitions: usize,
    include_self_play: bool,
) -> Result<Vec<Vec<Option<f64>>>, TournamentError> {
    let mut sums = vec![vec![0.0; players]; players];
    let mut seen = vec![vec![vec![false; repetitions]; players]; players];
    for rec in records {
        if rec.row >= players || rec.col >= players || rec.repetition >= repetitions {
            continue;
        }
        let (mx, my) = rec.result.per_round_mean;
        if rec.row == rec.col {
            sums[rec.row][rec.row] += (mx + my) / 2.0;
        } else {
            sums[rec.row][rec.col] += mx;
            sums[rec.col][rec.row] += my;
        }
        seen[rec.row][rec.col][rec.repetition] = true;
        seen[rec.col][rec.row][rec.repetition] = true;
    }
    let mut out = vec![vec![None; players]; players];
    for i in 0..players {
        for j in 0..players {
            if i == j && !include_self_play {
                continue;
            }
            if let Some(repetition) = seen[i][j].iter().position(|s| !s) {
                return Err(TournamentError::IncompleteResults { row: i, col: j, repetition });
            }
            out[i][j] = Some(sums[i][j] / repetitions as f64);
        }
    }
    Ok(out)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    coops: u64,
    rounds: u64,
    openings: u64,
    opening_coops: u64,
    wins: u64,
    draws: u64,
}

fn summarize(config: &TournamentConfig, matches: &[MatchRecord]) -> Result<TournamentSummary, TournamentError> {
    let n = config.players.len();
    let reps = config.repetitions;
    let matrix = payoff_matrix(matches, n, reps, config.include_self_play)?;

    // Canonical (name-sorted) iteration order keeps every sum independent of
    // the input order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| config.players[a].name.cmp(&config.players[b].name));
    let mut sorted_matches: Vec<&MatchRecord> = matches.iter().collect();
    sorted_matches.sort_by(|a, b| {
        let key = |m: &MatchRecord| {
            let (r, c) = (&config.players[m.row].name, &config.players[m.col].name);
            (r.clone(), c.clone(), m.repetition)
        };
        key(a).cmp(&key(b))
    });

    let mut tallies = vec![Tally::default(); n];
    for rec in sorted_matches {
        let r = &rec.result;
        let rounds = r.rounds() as u64;
        let sides = [
            (rec.row, r.cooperation_counts.0, r.first_moves.0, r.totals.0, r.totals.1),
            (rec.col, r.cooperation_counts.1, r.first_moves.1, r.totals.1, r.totals.0),
        ];
        for (who, coops, first, own, other) in sides {
            let t = &mut tallies[who];
            t.coops += coops;
            t.rounds += rounds;
            t.openings += 1;
            t.opening_coops += first.is_cooperate() as u64;
            if rec.row != rec.col {
                match own.partial_cmp(&other) {
                    Some(Ordering::Greater) => t.wins += 1,
                    Some(Ordering::Equal) => t.draws += 1,
                    _ => {}
                }
            }
        }
    }

    let players: Vec<PlayerSummary> = (0..n)
        .map(|i| {
            let mut scores: Vec<f64> = order.iter().filter_map(|&j| matrix[i][j]).collect();
            let mean_score = scores.iter().sum::<f64>() / scores.len() as f64;
            scores.sort_by(f64::total_cmp);
            let t = tallies[i];
            PlayerSummary {
                name: config.players[i].name.clone(),
                median_score: median(&scores),
                mean_score,
                cooperation_rate: t.coops as f64 / t.rounds.max(1) as f64,
                initial_cooperation_rate: t.opening_coops as f64 / t.openings.max(1) as f64,
                wins: t.wins as f64 / reps as f64,
                draws: t.draws as f64 / reps as f64,
            }
        })
        .collect();

    let mut ranking: Vec<usize> = (0..n).collect();
    ranking.sort_by(|&a, &b| {
        players[b]
            .median_score
            .total_cmp(&players[a].median_score)
            .then(players[b].mean_score.total_cmp(&players[a].mean_score))
            .then(a.cmp(&b))
    });
    Ok(TournamentSummary { players, payoff_matrix: matrix, ranking })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragingReport {
    /// Empirical visit frequencies over `CC, CD, DC, DD`.
    pub empirical: [f64; 4],
    /// Stationary distribution of `M(p, q̄)` with `q̄` the mean of the list.
    pub predicted: [f64; 4],
    pub mean_strategy: StrategyVector,
    pub empirical_scores: (f64, f64),
    pub predicted_scores: (f64, f64),
}

/// X plays `p`; every round Y picks one of `q_list` uniformly at random.
/// Both open with a fair coin.
pub fn averaging_experiment(
    p: &StrategyVector,
    q_list: &[StrategyVector],
    rounds: u64,
    seed: u64,
    params: &GameParams,
) -> Result<AveragingReport, TournamentError> {
    let mean_strategy = StrategyVector::mean(q_list).ok_or(TournamentError::EmptyStrategyList)?;
    if rounds == 0 {
        return Err(TournamentError::EmptyMatch);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0u64; 4];
    let mut totals = (0.0, 0.0);
    let mut state: Option<Outcome> = None;
    for _ in 0..rounds {
        let pick = rng.gen_range(0..q_list.len());
        let (px, qy) = match state {
            None => (0.5, 0.5),
            Some(o) => (p.get(o), q_list[pick].get(o.swap())),
        };
        let a = Action::from_cooperate(rng.gen::<f64>() < px);
        let b = Action::from_cooperate(rng.gen::<f64>() < qy);
        let o = Outcome::from_actions(a, b);
        counts[o.index()] += 1;
        let (sx, sy) = payoff(o, params);
        totals.0 += sx;
        totals.1 += sy;
        state = Some(o);
    }
    let n = rounds as f64;
    let predicted = stationary_distribution(&build_transition_matrix(p, &mean_strategy))?.v;
    let sv = ScoreVectors::new(params);
    let dot = |v: &[f64; 4], f: &[f64; 4]| v.iter().zip(f).map(|(a, b)| a * b).sum::<f64>();
    Ok(AveragingReport {
        empirical: counts.map(|c| c as f64 / n),
        predicted,
        mean_strategy,
        empirical_scores: (totals.0 / n, totals.1 / n),
        predicted_scores: (dot(&predicted, &sv.s_x), dot(&predicted, &sv.s_y)),
    })
}
