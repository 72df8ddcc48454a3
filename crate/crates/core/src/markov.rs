//! The joint Markov chain of two memory-one strategies.
//!
//! States are ordered `CC, CD, DC, DD` from X's point of view. Both players'
//! strategies are always passed in their owner's view; the reindexing of Y's
//! vector (`q1, q3, q2, q4`) happens inside the builders.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{GameParams, Outcome};

/// Tolerance on the `[0, 1]` bounds of a probability.
pub const PROB_TOL: f64 = 1e-12;
/// Entries above this count as edges when testing reachability.
pub const EDGE_TOL: f64 = 1e-12;
/// Below this `|D(p, q, 1)|` the determinant route is not trusted.
pub const DET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarkovError {
    #[error("component {index} = {value} is not a probability")]
    InvalidProbability { index: usize, value: f64 },
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("chain has {closed_classes} closed classes; the long-run score depends on the start (uniform start gives s_x = {}, s_y = {})", .scores.s_x, .scores.s_y)]
    Degenerate {
        closed_classes: usize,
        scores: ScorePair,
        start: [f64; 4],
        distribution: [f64; 4],
    },
}

/// Conditional cooperation probabilities indexed by the owner's previous
/// outcome (`CC, CD, DC, DD`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct StrategyVector([f64; 4]);

impl StrategyVector {
    /// Values within [`PROB_TOL`] of the unit interval are snapped onto it.
    pub fn new(values: [f64; 4]) -> Result<Self, MarkovError> {
        let mut out = values;
        for (index, v) in out.iter_mut().enumerate() {
            if !v.is_finite() || *v < -PROB_TOL || *v > 1.0 + PROB_TOL {
                return Err(MarkovError::InvalidProbability { index, value: *v });
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(StrategyVector(out))
    }

    pub fn constant(value: f64) -> Result<Self, MarkovError> {
        Self::new([value; 4])
    }

    pub fn values(&self) -> [f64; 4] {
        self.0
    }

    pub fn get(&self, outcome: Outcome) -> f64 {
        self.0[outcome.index()]
    }

    /// Componentwise mean of a non-empty list of strategies.
    pub fn mean(list: &[StrategyVector]) -> Option<StrategyVector> {
        if list.is_empty() {
            return None;
        }
        let mut acc = [0.0; 4];
        for q in list {
            for (a, v) in acc.iter_mut().zip(q.0) {
                *a += v;
            }
        }
        let n = list.len() as f64;
        StrategyVector::new(acc.map(|a| a / n)).ok()
    }
}

impl TryFrom<[f64; 4]> for StrategyVector {
    type Error = MarkovError;
    fn try_from(v: [f64; 4]) -> Result<Self, Self::Error> {
        StrategyVector::new(v)
    }
}

impl From<StrategyVector> for [f64; 4] {
    fn from(s: StrategyVector) -> Self {
        s.0
    }
}

impl std::ops::Index<usize> for StrategyVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Row-stochastic 4x4 matrix; rows are the previous outcome, columns the next.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix(pub [[f64; 4]; 4]);

impl TransitionMatrix {
    pub fn rows(&self) -> &[[f64; 4]; 4] {
        &self.0
    }

    /// `v^T M`.
    pub fn left_multiply(&self, v: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, row) in self.0.iter().enumerate() {
            for (j, m) in row.iter().enumerate() {
                out[j] += v[i] * m;
            }
        }
        out
    }

    /// Transitive closure of the edge relation `M(i, j) > EDGE_TOL`,
    /// including the trivial path from each state to itself.
    pub fn reachability(&self) -> [[bool; 4]; 4] {
        let mut reach = [[false; 4]; 4];
        for i in 0..4 {
            reach[i][i] = true;
            for j in 0..4 {
                if self.0[i][j] > EDGE_TOL {
                    reach[i][j] = true;
                }
            }
        }
        for k in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        reach
    }

    /// Communicating classes that cannot be left, as sorted state indices.
    pub fn closed_classes(&self) -> Vec<Vec<usize>> {
        let reach = self.reachability();
        let mut seen = [false; 4];
        let mut classes = Vec::new();
        for i in 0..4 {
            if seen[i] {
                continue;
            }
            let class: Vec<usize> = (0..4).filter(|&j| reach[i][j] && reach[j][i]).collect();
            for &j in &class {
                seen[j] = true;
            }
            let closed = (0..4).all(|j| !reach[i][j] || reach[j][i]);
            if closed {
                classes.push(class);
            }
        }
        classes
    }
}

pub fn build_transition_matrix(p: &StrategyVector, q: &StrategyVector) -> TransitionMatrix {
    let mut m = [[0.0; 4]; 4];
    for outcome in Outcome::ALL {
        let px = p.get(outcome);
        // Y sees the same round with the roles swapped.
        let qy = q.get(outcome.swap());
        m[outcome.index()] = [px * qy, px * (1.0 - qy), (1.0 - px) * qy, (1.0 - px) * (1.0 - qy)];
    }
    TransitionMatrix(m)
}

/// True iff the state graph of `m` is strongly connected.
pub fn is_irreducible(m: &TransitionMatrix) -> bool {
    m.reachability().iter().all(|row| row.iter().all(|&r| r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryMethod {
    LinearSolve,
    PowerIteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub v: [f64; 4],
    /// False when the chain has several closed classes and `v` is only the
    /// limit from the uniform start.
    pub unique: bool,
    pub method: StationaryMethod,
}

impl StationaryDistribution {
    pub fn dot(&self, f: &[f64; 4]) -> f64 {
        dot(&self.v, f)
    }
}

/// Settings for the power-iteration fallback used on reducible chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// When set, each step mixes `damping * vM` with `(1 - damping)` of the
    /// uniform vector.
    pub damping: Option<f64>,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration { tolerance: 1e-12, max_iterations: 1_000_000, damping: None }
    }
}

impl PowerIteration {
    pub fn run(&self, m: &TransitionMatrix, start: [f64; 4]) -> Result<[f64; 4], MarkovError> {
        let mut v = start;
        let mut residual = f64::INFINITY;
        for _ in 0..self.max_iterations {
            let mut next = m.left_multiply(&v);
            if let Some(d) = self.damping {
                for x in next.iter_mut() {
                    *x = d * *x + (1.0 - d) * 0.25;
                }
            }
            let total: f64 = next.iter().sum();
            for x in next.iter_mut() {
                *x /= total;
            }
            residual = v.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            v = next;
            if residual < self.tolerance {
                return Ok(v);
            }
        }
        Err(MarkovError::NonConvergence { iterations: self.max_iterations, residual })
    }
}

const UNIFORM: [f64; 4] = [0.25; 4];

pub fn stationary_distribution(m: &TransitionMatrix) -> Result<StationaryDistribution, MarkovError> {
    stationary_distribution_with(m, &PowerIteration::default())
}

/// Chains with a single closed class (irreducible ones included) have a
/// rank-3 balance system and are solved directly. Anything else falls back
/// to power iteration from the uniform start.
pub fn stationary_distribution_with(
    m: &TransitionMatrix,
    power: &PowerIteration,
) -> Result<StationaryDistribution, MarkovError> {
    let unique = m.closed_classes().len() == 1;
    if unique {
        if let Some(v) = solve_stationary(m) {
            return Ok(StationaryDistribution { v, unique, method: StationaryMethod::LinearSolve });
        }
    }
    let v = power.run(m, UNIFORM)?;
    Ok(StationaryDistribution { v, unique, method: StationaryMethod::PowerIteration })
}

/// Solves `(M^T - I) v = 0` with the last balance equation replaced by
/// `sum(v) = 1`. The balance equations sum to zero, so nothing is lost.
fn solve_stationary(m: &TransitionMatrix) -> Option<[f64; 4]> {
    let mut a = [[0.0; 4]; 4];
    for (i, row) in a.iter_mut().enumerate().take(3) {
        for (j, x) in row.iter_mut().enumerate() {
            *x = m.0[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[3] = [1.0; 4];
    let mut v = solve4(a, [0.0, 0.0, 0.0, 1.0])?;
    for x in v.iter_mut() {
        if *x < 0.0 && *x > -1e-12 {
            *x = 0.0;
        }
    }
    Some(v)
}

/// Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let factor = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let tail: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant by cofactor expansion along the first row.
pub fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let mut total = 0.0;
    for col in 0..4 {
        let mut minor = [[0.0; 3]; 3];
        for (r, row) in m.iter().skip(1).enumerate() {
            let mut c = 0;
            for (k, value) in row.iter().enumerate() {
                if k != col {
                    minor[r][c] = *value;
                    c += 1;
                }
            }
        }
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * m[0][col] * det3(minor);
    }
    total
}

/// The 4x4 matrix whose determinant is `D(p, q, f)`: columns are the
/// joint-cooperation column, X's column `p̂`, Y's column `q̂` and `f`.
pub fn determinant_matrix(p: &StrategyVector, q: &StrategyVector, f: &[f64; 4]) -> [[f64; 4]; 4] {
    let [p1, p2, p3, p4] = p.values();
    let [q1, q2, q3, q4] = q.values();
    [
        [p1 * q1 - 1.0, p1 - 1.0, q1 - 1.0, f[0]],
        [p2 * q3, p2 - 1.0, q3, f[1]],
        [p3 * q2, p3, q2 - 1.0, f[2]],
        [p4 * q4, p4, q4, f[3]],
    ]
}

pub fn determinant_form(p: &StrategyVector, q: &StrategyVector, f: &[f64; 4]) -> f64 {
    det4(&determinant_matrix(p, q, f))
}

/// Per-round payoff vectors over `CC, CD, DC, DD` for X and Y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreVectors {
    pub s_x: [f64; 4],
    pub s_y: [f64; 4],
}

impl ScoreVectors {
    pub fn new(params: &GameParams) -> Self {
        let (t, r, p, s) = params.as_tuple();
        ScoreVectors { s_x: [r, s, t, p], s_y: [r, t, s, p] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    pub s_x: f64,
    pub s_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreRoute {
    Determinant,
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub scores: ScorePair,
    pub route: ScoreRoute,
    pub stationary: StationaryDistribution,
}

pub fn expected_scores(
    p: &StrategyVector,
    q: &StrategyVector,
    params: &GameParams,
) -> Result<ScorePair, MarkovError> {
    expected_scores_report(p, q, params).map(|r| r.scores)
}

/// Long-run per-round scores together with the route used and the
/// stationary distribution.
pub fn expected_scores_report(
    p: &StrategyVector,
    q: &StrategyVector,
    params: &GameParams,
) -> Result<ScoreReport, MarkovError> {
    let vectors = ScoreVectors::new(params);
    let m = build_transition_matrix(p, q);
    let stationary = stationary_distribution(&m)?;
    let closed = m.closed_classes().len();
    if closed > 1 {
        return Err(MarkovError::Degenerate {
            closed_classes: closed,
            scores: ScorePair { s_x: stationary.dot(&vectors.s_x), s_y: stationary.dot(&vectors.s_y) },
            start: UNIFORM,
            distribution: stationary.v,
        });
    }
    let norm = determinant_form(p, q, &[1.0; 4]);
    if norm.abs() > DET_TOL {
        let scores = ScorePair {
            s_x: determinant_form(p, q, &vectors.s_x) / norm,
            s_y: determinant_form(p, q, &vectors.s_y) / norm,
        };
        return Ok(ScoreReport { scores, route: ScoreRoute::Determinant, stationary });
    }
    let scores = ScorePair { s_x: stationary.dot(&vectors.s_x), s_y: stationary.dot(&vectors.s_y) };
    Ok(ScoreReport { scores, route: ScoreRoute::Stationary, stationary })
}

pub(crate) fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
