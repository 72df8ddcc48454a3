//! Runs the eleven-strategy field a few times and prints each ranking.

use ipd_core::lineup::standard_lineup;
use ipd_core::tournament::round_robin;
use ipd_core::{GameParams, MatchConfig, TournamentConfig};

fn main() {
    let params = GameParams::standard();
    let players = standard_lineup(&params).expect("standard game admits the field");
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    for seed in 0..seeds {
        let config = TournamentConfig::new(players.clone(), MatchConfig::fixed(200, seed), 30);
        let run = round_robin(&config).expect("valid config");
        let s = &run.summary;
        let line: Vec<String> = s
            .ranking
            .iter()
            .map(|&i| format!("{}={:.3}/{:.3}", s.players[i].name, s.players[i].median_score, s.players[i].mean_score))
            .collect();
        println!("seed {seed}: {}", line.join(" "));
    }
}
