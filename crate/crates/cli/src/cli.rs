use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::parse;
use crate::render::Format;

#[derive(Debug, Parser)]
#[command(name = "ipd", version, about = "Iterated prisoner's dilemma analysis and tournaments")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Payoffs T,R,P,S (fractions allowed).
    #[arg(long, global = true, value_parser = parse::game, value_name = "T,R,P,S", conflicts_with = "donation")]
    pub game: Option<[f64; 4]>,
    /// Donation game b,c, mapped to T=b, R=b-c, P=0, S=-c.
    #[arg(long, global = true, value_parser = parse::donation, value_name = "B,C")]
    pub donation: Option<[f64; 2]>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Directory for output files, written atomically.
    #[arg(long, global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Long-run scores of two memory-one strategies.
    Scores(Pair),
    /// Stationary distribution of the joint Markov chain.
    Stationary(Pair),
    /// Zero-determinant strategy constructors.
    #[command(subcommand)]
    Zd(Zd),
    /// Play one seeded match.
    Match(MatchArgs),
    /// Run a round-robin tournament from a JSON config.
    Tournament(TournamentArgs),
    /// Replicator dynamics for Cooperator / Defector / Tit-for-Tat.
    Replicator(ReplicatorArgs),
}

#[derive(Debug, Args)]
pub struct Pair {
    /// X's strategy: four probabilities for CC, CD, DC, DD.
    #[arg(short = 'p', required = true, num_args = 1..=4, value_delimiter = ',', value_parser = parse::number)]
    pub p: Vec<f64>,
    /// Y's strategy, from Y's own point of view.
    #[arg(short = 'q', required = true, num_args = 1..=4, value_delimiter = ',', value_parser = parse::number)]
    pub q: Vec<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Zd {
    /// Strategy that pins the opponent's score.
    SetScore {
        #[arg(long, value_parser = parse::number)]
        p1: f64,
        #[arg(long, value_parser = parse::number)]
        p4: f64,
    },
    /// Extortionate strategy with factor chi and scale phi.
    Extort {
        #[arg(long, value_parser = parse::number)]
        chi: f64,
        #[arg(long, value_parser = parse::number)]
        phi: f64,
    },
    /// Largest admissible phi for a given chi.
    Bound {
        #[arg(long, value_parser = parse::number)]
        chi: f64,
    },
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("length").required(true).args(["rounds", "omega"])))]
pub struct MatchArgs {
    /// Player X (see README for accepted forms).
    #[arg(long)]
    pub x: String,
    /// Player Y.
    #[arg(long)]
    pub y: String,
    /// Fixed number of rounds.
    #[arg(long)]
    pub rounds: Option<u64>,
    /// Continuation probability of a geometric match.
    #[arg(long, value_parser = parse::number)]
    pub omega: Option<f64>,
    /// Master seed; falls back to IPD_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TournamentArgs {
    #[arg(long, value_name = "FILE")]
    pub config: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("start").required(true).args(["grid", "x0"])))]
pub struct ReplicatorArgs {
    /// Donation benefit (requires --c).
    #[arg(long, value_parser = parse::number, requires = "c")]
    pub b: Option<f64>,
    /// Donation cost (requires --b).
    #[arg(long, value_parser = parse::number, requires = "b")]
    pub c: Option<f64>,
    /// Continuation probability.
    #[arg(long, value_parser = parse::number)]
    pub omega: f64,
    /// N x N grid of interior starting points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// A single starting point x1,x2,x3.
    #[arg(long, value_parser = parse::shares, value_name = "X1,X2,X3")]
    pub x0: Option<[f64; 3]>,
    #[arg(long, value_parser = parse::number, default_value = "0.01")]
    pub step: f64,
    #[arg(long, value_parser = parse::number, default_value = "100")]
    pub horizon: f64,
    /// Keep every n-th trajectory point.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
}
