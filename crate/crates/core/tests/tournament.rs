use ipd_core::lineup::standard_lineup;
use ipd_core::tournament::{match_seed, round_robin, round_robin_with, TournamentError};
use ipd_core::{Execution, GameParams, MatchConfig, MatchLength, PlayerEntry, PlayerSpec, TournamentConfig};

fn small() -> TournamentConfig {
    let players = vec![
        PlayerEntry::new("tft", PlayerSpec::TitForTat),
        PlayerEntry::new("alld", PlayerSpec::Defector),
        PlayerEntry::new("rand", PlayerSpec::Random { coop_rate: 0.5 }),
        PlayerEntry::new("learner", PlayerSpec::Adaptive { epsilon: 0.1, k: 5 }),
    ];
    TournamentConfig::new(players, MatchConfig::fixed(100, 42), 4)
}

#[test]
fn sequential_and_parallel_agree() {
    let config = TournamentConfig::new(standard_lineup(&GameParams::standard()).unwrap(), MatchConfig::fixed(200, 1), 3);
    let a = round_robin_with(&config, Execution::Sequential).unwrap();
    let b = round_robin_with(&config, Execution::Parallel).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn config_round_trips_through_json() {
    let mut config = small();
    config.match_config.length = MatchLength::Geometric(0.9);
    config.include_self_play = true;
    let text = serde_json::to_string_pretty(&config).unwrap();
    assert!(text.contains("\"match\""));
    let back: TournamentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, config);
}

#[test]
fn minimal_json_config_uses_defaults() {
    let text = r#"{
        "players": [
            {"name": "a", "spec": {"kind": "tit_for_tat"}},
            {"name": "b", "spec": {"kind": "memory_one", "p": [1, 0, 1, 0.5]}}
        ],
        "match": {"length": {"fixed": 10}, "seed": 7}
    }"#;
    let config: TournamentConfig = serde_json::from_str(text).unwrap();
    assert_eq!(config.repetitions, 1);
    assert!(!config.include_self_play);
    assert_eq!(config.game, GameParams::standard());
    round_robin(&config).unwrap();
}

#[test]
fn self_play_fills_the_diagonal() {
    let mut config = small();
    let without = round_robin(&config).unwrap().summary;
    assert!((0..4).all(|i| without.payoff_matrix[i][i].is_none()));
    config.include_self_play = true;
    let with = round_robin(&config).unwrap();
    assert!((0..4).all(|i| with.summary.payoff_matrix[i][i].is_some()));
    assert_eq!(with.matches.len(), 10 * 4);
    // Self-play never counts as a win or a draw.
    for (a, b) in without.players.iter().zip(&with.summary.players) {
        assert_eq!((a.wins, a.draws), (b.wins, b.draws));
    }
}

#[test]
fn every_pair_plays_every_repetition_with_its_own_seed() {
    let config = small();
    let run = round_robin(&config).unwrap();
    assert_eq!(run.matches.len(), 6 * 4);
    for m in &run.matches {
        let (a, b) = (&config.players[m.row].name, &config.players[m.col].name);
        assert!(a < b, "X role goes to the smaller name");
        assert_eq!(m.seed, match_seed(42, a, b, m.repetition));
    }
    let mut seeds: Vec<u64> = run.matches.iter().map(|m| m.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), run.matches.len());
}

#[test]
fn defector_never_loses() {
    let run = round_robin(&small()).unwrap();
    let d = run.summary.players.iter().find(|p| p.name == "alld").unwrap();
    assert_eq!(d.wins + d.draws, 3.0);
    assert_eq!(d.cooperation_rate, 0.0);
    assert_eq!(d.initial_cooperation_rate, 0.0);
}

#[test]
fn invalid_configs_are_rejected() {
    let mut config = small();
    config.players.push(PlayerEntry::new("tft", PlayerSpec::Cooperator));
    assert!(matches!(round_robin(&config), Err(TournamentError::DuplicatePlayer(_))));

    let mut config = small();
    config.repetitions = 0;
    assert!(matches!(round_robin(&config), Err(TournamentError::NoRepetitions)));

    let mut config = small();
    config.match_config.length = MatchLength::Geometric(1.0);
    assert!(matches!(round_robin(&config), Err(TournamentError::InvalidOmega(_))));

    let mut config = small();
    config.players.truncate(1);
    assert!(matches!(round_robin(&config), Err(TournamentError::TooFewPlayers(1))));
}
