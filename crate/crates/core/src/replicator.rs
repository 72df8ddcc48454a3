//! Replicator dynamics for Cooperators, Defectors and Reciprocators (TFT)
//! with geometric game length.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{donation_to_params, DonationParams, GameError, GameParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplicatorError {
    #[error("continuation probability omega = {0} must lie strictly inside (0, 1)")]
    InvalidOmega(f64),
    #[error("population ({0}, {1}, {2}) is not on the simplex")]
    InvalidPopulation(f64, f64, f64),
    #[error("step {0} must be positive and finite")]
    InvalidStep(f64),
    #[error("step too large: component {value} left the simplex at t = {time}")]
    StepTooLarge { time: f64, value: f64 },
    #[error("payoff difference between strategies {0} and {1} vanishes identically")]
    DegeneratePair(usize, usize),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Shares of Cooperators, Defectors and Reciprocators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationState(pub [f64; 3]);

impl PopulationState {
    pub fn new(x: [f64; 3]) -> Result<Self, ReplicatorError> {
        let ok = x.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v))
            && (x.iter().sum::<f64>() - 1.0).abs() <= 1e-10;
        if !ok {
            return Err(ReplicatorError::InvalidPopulation(x[0], x[1], x[2]));
        }
        Ok(PopulationState(x))
    }

    pub fn vertex(i: usize) -> Self {
        let mut x = [0.0; 3];
        x[i] = 1.0;
        PopulationState(x)
    }

    pub fn shares(&self) -> [f64; 3] {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicatorMatrix {
    pub a: [[f64; 3]; 3],
    pub omega: f64,
}

impl ReplicatorMatrix {
    pub fn apply(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, row) in self.a.iter().enumerate() {
            out[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        out
    }
}

fn check_omega(omega: f64) -> Result<(), ReplicatorError> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(ReplicatorError::InvalidOmega(omega));
    }
    Ok(())
}

/// Per-round payoffs between the three strategies when the game continues
/// with probability `omega` after each round.
pub fn build_full_matrix(params: &GameParams, omega: f64) -> Result<ReplicatorMatrix, ReplicatorError> {
    check_omega(omega)?;
    let (t, r, p, s) = params.as_tuple();
    Ok(ReplicatorMatrix {
        a: [
            [r, s, r],
            [t, p, (1.0 - omega) * t + omega * p],
            [r, (1.0 - omega) * s + omega * p, r],
        ],
        omega,
    })
}

pub fn build_donation_matrix(d: DonationParams, omega: f64) -> Result<ReplicatorMatrix, ReplicatorError> {
    build_full_matrix(&donation_to_params(d)?, omega)
}

/// Subtracts the first row from every row so that row one is zero. Column
/// shifts leave the dynamics unchanged.
pub fn reduce_matrix(m: &ReplicatorMatrix) -> ReplicatorMatrix {
    let mut a = m.a;
    for j in 0..3 {
        let shift = m.a[0][j];
        for row in a.iter_mut() {
            row[j] -= shift;
        }
    }
    ReplicatorMatrix { a, omega: m.omega }
}

/// `ẋ_i = x_i ((Ax)_i - xᵀAx)`.
pub fn replicator_rhs(x: &[f64; 3], m: &ReplicatorMatrix) -> [f64; 3] {
    let ax = m.apply(x);
    let mean: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
    [0, 1, 2].map(|i| x[i] * (ax[i] - mean))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<(f64, PopulationState)>,
    /// Largest correction applied by renormalisation over the run.
    pub max_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &PopulationState {
        &self.points.last().expect("trajectory holds the initial state").1
    }
}

const SIMPLEX_SLACK: f64 = 1e-6;

fn rk4_step(x: &[f64; 3], m: &ReplicatorMatrix, h: f64) -> [f64; 3] {
    let add = |a: &[f64; 3], b: &[f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = replicator_rhs(x, m);
    let k2 = replicator_rhs(&add(x, &k1, h / 2.0), m);
    let k3 = replicator_rhs(&add(x, &k2, h / 2.0), m);
    let k4 = replicator_rhs(&add(x, &k3, h), m);
    [0, 1, 2].map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn renormalize(raw: [f64; 3], time: f64) -> Result<([f64; 3], f64), ReplicatorError> {
    for &v in &raw {
        if !v.is_finite() || !(-SIMPLEX_SLACK..=1.0 + SIMPLEX_SLACK).contains(&v) {
            return Err(ReplicatorError::StepTooLarge { time, value: v });
        }
    }
    let clipped = raw.map(|v| v.max(0.0));
    let total: f64 = clipped.iter().sum();
    let out = clipped.map(|v| v / total);
    let drift = raw.iter().zip(&out).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((out, drift))
}

fn step_count(step: f64, horizon: f64) -> Result<usize, ReplicatorError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(ReplicatorError::InvalidStep(step));
    }
    Ok((horizon.max(0.0) / step).round() as usize)
}

/// Fixed-step RK4 over `[0, horizon]`, every state projected back onto the
/// simplex.
pub fn integrate(
    x0: &PopulationState,
    m: &ReplicatorMatrix,
    step: f64,
    horizon: f64,
) -> Result<Trajectory, ReplicatorError> {
    let n = step_count(step, horizon)?;
    let mut points = Vec::with_capacity(n + 1);
    points.push((0.0, *x0));
    let mut x = x0.0;
    let mut max_drift: f64 = 0.0;
    for k in 1..=n {
        let t = k as f64 * step;
        let (next, drift) = renormalize(rk4_step(&x, m, step), t)?;
        max_drift = max_drift.max(drift);
        x = next;
        points.push((t, PopulationState(x)));
    }
    Ok(Trajectory { points, max_drift })
}

/// Same as [`integrate`] without storing the path.
pub fn integrate_final(
    x0: &PopulationState,
    m: &ReplicatorMatrix,
    step: f64,
    horizon: f64,
) -> Result<PopulationState, ReplicatorError> {
    let n = step_count(step, horizon)?;
    let mut x = x0.0;
    for k in 1..=n {
        x = renormalize(rk4_step(&x, m, step), k as f64 * step)?.0;
    }
    Ok(PopulationState(x))
}

/// `{ (x2, x3) : coef_x2 * x2 + coef_x3 * x3 = rhs }` with `x1 = 1 - x2 - x3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineLine {
    pub pair: (usize, usize),
    pub coef_x2: f64,
    pub coef_x3: f64,
    pub rhs: f64,
}

impl AffineLine {
    pub fn residual(&self, x2: f64, x3: f64) -> f64 {
        self.coef_x2 * x2 + self.coef_x3 * x3 - self.rhs
    }
}

fn payoff_difference(m: &ReplicatorMatrix, i: usize, j: usize) -> Result<AffineLine, ReplicatorError> {
    let d = [0, 1, 2].map(|k| m.a[i][k] - m.a[j][k]);
    // d·x with x1 = 1 - x2 - x3.
    let line = AffineLine { pair: (i + 1, j + 1), coef_x2: d[1] - d[0], coef_x3: d[2] - d[0], rhs: -d[0] };
    let scale = d.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    if line.coef_x2.abs() <= 1e-12 * scale && line.coef_x3.abs() <= 1e-12 * scale {
        return Err(ReplicatorError::DegeneratePair(i + 1, j + 1));
    }
    Ok(line)
}

/// Zero sets of `(Ax)_i - (Ax)_j` for the pairs (1,2), (1,3), (2,3).
pub fn indifference_lines(m: &ReplicatorMatrix) -> [Result<AffineLine, ReplicatorError>; 3] {
    [payoff_difference(m, 0, 1), payoff_difference(m, 0, 2), payoff_difference(m, 1, 2)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DonationIndifference {
    pub lines: Vec<AffineLine>,
    /// `x3` where `(Ax)_1 = (Ax)_2`, computed from the matrix: `c / (omega b)`.
    pub z12_computed_x3: f64,
    /// The commonly quoted threshold `c / b`.
    pub z12_quoted_x3: f64,
}

pub fn donation_indifference(d: DonationParams, omega: f64) -> Result<DonationIndifference, ReplicatorError> {
    let m = build_donation_matrix(d, omega)?;
    let lines: Vec<AffineLine> = indifference_lines(&m).into_iter().collect::<Result<_, _>>()?;
    let z12 = &lines[0];
    Ok(DonationIndifference {
        z12_computed_x3: z12.rhs / z12.coef_x3,
        z12_quoted_x3: d.c / d.b,
        lines,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointKind {
    Vertex,
    Edge,
    EdgeLine,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Attracting,
    Repelling,
    Saddle,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub location: PopulationState,
    /// For an edge line, the other end of the segment of fixed points.
    pub end: Option<PopulationState>,
    pub kind: FixedPointKind,
    pub stability: Stability,
    /// Real parts of the two tangent-space eigenvalues.
    pub eigenvalues: [f64; 2],
}

pub const NEUTRAL_TOL: f64 = 1e-9;

fn jacobian(x: &[f64; 3], m: &ReplicatorMatrix) -> [[f64; 3]; 3] {
    let ax = m.apply(x);
    // Gradient of xᵀAx is (A + Aᵀ) x.
    let mut grad_mean = [0.0; 3];
    for (k, g) in grad_mean.iter_mut().enumerate() {
        *g = (0..3).map(|i| (m.a[k][i] + m.a[i][k]) * x[i]).sum();
    }
    let mean: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
    let mut j = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            let delta = if i == k { ax[i] - mean } else { 0.0 };
            j[i][k] = delta + x[i] * (m.a[i][k] - grad_mean[k]);
        }
    }
    j
}

/// Real parts of the Jacobian eigenvalues in the simplex tangent space,
/// using coordinates `(x2, x3)` with `x1 = 1 - x2 - x3`.
pub fn tangent_eigenvalues(x: &[f64; 3], m: &ReplicatorMatrix) -> [f64; 2] {
    let j = jacobian(x, m);
    let r = |i: usize, k: usize| j[i][k] - j[i][0];
    let (a, b, c, d) = (r(1, 1), r(1, 2), r(2, 1), r(2, 2));
    let tr = a + d;
    let det = a * d - b * c;
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [tr / 2.0 + s, tr / 2.0 - s]
    } else {
        [tr / 2.0, tr / 2.0]
    }
}

fn classify(eig: [f64; 2]) -> Stability {
    let pos = eig.iter().filter(|&&e| e > NEUTRAL_TOL).count();
    let neg = eig.iter().filter(|&&e| e < -NEUTRAL_TOL).count();
    match (pos, neg) {
        (0, 2) => Stability::Attracting,
        (2, 0) => Stability::Repelling,
        (1, 1) => Stability::Saddle,
        _ => Stability::Neutral,
    }
}

fn report(x: [f64; 3], kind: FixedPointKind, m: &ReplicatorMatrix) -> FixedPointReport {
    let eigenvalues = tangent_eigenvalues(&x, m);
    FixedPointReport { location: PopulationState(x), end: None, kind, stability: classify(eigenvalues), eigenvalues }
}

/// Vertices, edge equilibria (or whole edges of equilibria) and an interior
/// equilibrium when one exists.
pub fn classify_fixed_points(m: &ReplicatorMatrix) -> Vec<FixedPointReport> {
    let mut out: Vec<FixedPointReport> = (0..3).map(|i| report(PopulationState::vertex(i).0, FixedPointKind::Vertex, m)).collect();

    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        // On the edge x_i = s, x_j = 1 - s the difference (Ax)_i - (Ax)_j is affine in s.
        let diff_at = |s: f64| {
            let mut x = [0.0; 3];
            x[i] = s;
            x[j] = 1.0 - s;
            let ax = m.apply(&x);
            ax[i] - ax[j]
        };
        let d0 = diff_at(0.0);
        let d1 = diff_at(1.0);
        let scale = d0.abs().max(d1.abs()).max(1.0);
        if d0.abs() <= 1e-12 * scale && d1.abs() <= 1e-12 * scale {
            // Stability is read off at the midpoint of the segment.
            let mut mid = [0.0; 3];
            mid[i] = 0.5;
            mid[j] = 0.5;
            out.push(FixedPointReport {
                location: PopulationState::vertex(i),
                end: Some(PopulationState::vertex(j)),
                ..report(mid, FixedPointKind::EdgeLine, m)
            });
            continue;
        }
        if d0 == d1 {
            continue;
        }
        let s = d0 / (d0 - d1);
        if s > 1e-12 && s < 1.0 - 1e-12 {
            let mut x = [0.0; 3];
            x[i] = s;
            x[j] = 1.0 - s;
            out.push(report(x, FixedPointKind::Edge, m));
        }
    }

    if let Some(x) = interior_equilibrium(m) {
        out.push(report(x, FixedPointKind::Interior, m));
    }
    out
}

fn interior_equilibrium(m: &ReplicatorMatrix) -> Option<[f64; 3]> {
    // (Ax)_1 = (Ax)_2 = (Ax)_3, x1 + x2 + x3 = 1.
    let rows = [
        [m.a[0][0] - m.a[1][0], m.a[0][1] - m.a[1][1], m.a[0][2] - m.a[1][2], 0.0],
        [m.a[0][0] - m.a[2][0], m.a[0][1] - m.a[2][1], m.a[0][2] - m.a[2][2], 0.0],
        [1.0, 1.0, 1.0, 1.0],
    ];
    let det = |c: [usize; 3]| {
        let g = |r: usize, k: usize| rows[r][c[k]];
        g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
            + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
    };
    let d = det([0, 1, 2]);
    if d.abs() < 1e-12 {
        return None;
    }
    let x = [det([3, 1, 2]) / d, det([0, 3, 2]) / d, det([0, 1, 3]) / d];
    x.iter().all(|&v| v > 1e-12).then_some(x)
}
