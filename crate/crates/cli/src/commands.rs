use std::path::Path;

use ipd_core::lineup::standard_lineup;
use ipd_core::markov::{build_transition_matrix, expected_scores_report, is_irreducible, stationary_distribution};
use ipd_core::par::{self, Execution};
use ipd_core::replicator::{
    build_donation_matrix, build_full_matrix, classify_fixed_points, donation_indifference, indifference_lines,
    integrate, PopulationState,
};
use ipd_core::tournament::{play_match, round_robin, TournamentRun};
use ipd_core::zd::{extortion_best_case, extortionate, phi_upper_bound, set_opponent_score, ExtortionParams};
use ipd_core::{
    payoff, DonationParams, GameParams, MarkovError, MatchConfig, MatchLength, Outcome, StrategyVector,
    TournamentConfig,
};
use serde_json::{json, Value};

use crate::cli::{Command, Global, MatchArgs, Pair, ReplicatorArgs, TournamentArgs, Zd};
use crate::error::CliError;
use crate::parse;
use crate::render::{num, Report, Table};

pub fn execute(command: &Command, global: &Global) -> Result<Report, CliError> {
    let game = game(global)?;
    match command {
        Command::Scores(pair) => scores(pair, &game),
        Command::Stationary(pair) => stationary(pair),
        Command::Zd(zd) => zd_command(zd, &game),
        Command::Match(args) => match_command(args, &game),
        Command::Tournament(args) => tournament(args, &game),
        Command::Replicator(args) => replicator(args, global, &game),
    }
}

fn game(global: &Global) -> Result<GameParams, CliError> {
    Ok(match (global.game, global.donation) {
        (_, Some([b, c])) => ipd_core::game::donation_to_params(DonationParams::new(b, c)?)?,
        (Some([t, r, p, s]), None) => GameParams::new(t, r, p, s)?,
        (None, None) => GameParams::standard(),
    })
}

fn game_json(g: &GameParams) -> Value {
    serde_json::to_value(g).expect("game params serialise")
}

fn strategies(pair: &Pair) -> Result<(StrategyVector, StrategyVector), CliError> {
    let p = StrategyVector::new(parse::four(&pair.p, "-p")?)?;
    let q = StrategyVector::new(parse::four(&pair.q, "-q")?)?;
    Ok((p, q))
}

/// Falls back to `IPD_SEED`, then 0.
fn seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("IPD_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Config(format!("IPD_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn scores(pair: &Pair, game: &GameParams) -> Result<Report, CliError> {
    let (p, q) = strategies(pair)?;
    let mut value = json!({ "game": game_json(game), "p": p, "q": q });
    match expected_scores_report(&p, &q, game) {
        Ok(r) => {
            value["scores"] = json!(r.scores);
            value["route"] = json!(r.route);
            value["stationary"] = json!(r.stationary.v);
            value["degenerate"] = json!(false);
        }
        Err(MarkovError::Degenerate { closed_classes, scores, start, distribution }) => {
            value["scores"] = json!(scores);
            value["route"] = json!("stationary");
            value["stationary"] = json!(distribution);
            value["degenerate"] = json!(true);
            value["closed_classes"] = json!(closed_classes);
            value["start"] = json!(start);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(Report::new("scores", value))
}

fn stationary(pair: &Pair) -> Result<Report, CliError> {
    let (p, q) = strategies(pair)?;
    let m = build_transition_matrix(&p, &q);
    let dist = stationary_distribution(&m)?;
    let classes: Vec<Vec<String>> = m
        .closed_classes()
        .iter()
        .map(|c| c.iter().map(|&i| Outcome::from_index(i).expect("state index").to_string()).collect())
        .collect();
    let value = json!({
        "p": p,
        "q": q,
        "v": dist.v,
        "method": dist.method,
        "unique": dist.unique,
        "irreducible": is_irreducible(&m),
        "closed_classes": classes,
        "transition_matrix": m.0,
    });
    Ok(Report::new("stationary", value))
}

fn zd_command(zd: &Zd, game: &GameParams) -> Result<Report, CliError> {
    let value = match *zd {
        Zd::SetScore { p1, p4 } => {
            let s = set_opponent_score(p1, p4, game)?;
            json!({
                "game": game_json(game),
                "p": s.p,
                "s_y": s.s_y,
                "constraint": { "alpha": 0.0, "beta": s.beta, "gamma": s.gamma },
                "feasibility": "feasible",
            })
        }
        Zd::Extort { chi, phi } => {
            let p = extortionate(&ExtortionParams { chi, phi }, game)?;
            json!({
                "game": game_json(game),
                "chi": chi,
                "phi": phi,
                "phi_upper_bound": phi_upper_bound(chi, game),
                "p": p,
                "best_case": extortion_best_case(chi, game),
                "feasibility": "feasible",
            })
        }
        Zd::Bound { chi } => {
            if chi.is_nan() || chi < 1.0 {
                return Err(CliError::Config(format!("extortion factor chi = {chi} must be at least 1")));
            }
            json!({ "game": game_json(game), "chi": chi, "phi_upper_bound": phi_upper_bound(chi, game) })
        }
    };
    Ok(Report::new("zd", value))
}

fn match_command(args: &MatchArgs, game: &GameParams) -> Result<Report, CliError> {
    let x = parse::player(&args.x, game)?;
    let y = parse::player(&args.y, game)?;
    let length = match (args.rounds, args.omega) {
        (Some(n), _) => MatchLength::Fixed(n),
        (None, Some(w)) => MatchLength::Geometric(w),
        (None, None) => unreachable!("clap requires one of --rounds, --omega"),
    };
    let config = MatchConfig { length, seed: seed(args.seed)?, default_first_move: Default::default() };
    let m = play_match(&x, &y, &config, game)?;
    let n = m.rounds() as f64;
    let mut rounds = Table::new("rounds", &["round", "outcome", "payoff_x", "payoff_y"], false);
    for (i, &o) in m.outcomes.iter().enumerate() {
        let (a, b) = payoff(o, game);
        rounds.rows.push(vec![(i + 1).to_string(), o.to_string(), num(a), num(b)]);
    }
    let value = json!({
        "x": x.label(),
        "y": y.label(),
        "seed": config.seed,
        "rounds": m.rounds(),
        "totals": [m.totals.0, m.totals.1],
        "per_round_mean": [m.per_round_mean.0, m.per_round_mean.1],
        "cooperation_rate": [m.cooperation_counts.0 as f64 / n, m.cooperation_counts.1 as f64 / n],
        "state_frequencies": m.state_frequencies(),
        "outcomes": m.outcome_string(),
    });
    let mut report = Report::new("match", value);
    report.tables.push(rounds);
    Ok(report)
}

fn read_config(path: &Path) -> Result<Value, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Applies the conveniences the config file allows on top of the plain
/// serialised form: a `donation` block instead of `game`, players given as
/// short strings or as `"standard"`, and a missing seed.
fn resolve_config(mut raw: Value, args: &TournamentArgs, fallback: &GameParams) -> Result<TournamentConfig, CliError> {
    let obj = raw.as_object_mut().ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
    let game = match (obj.remove("game"), obj.remove("donation")) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either \"game\" or \"donation\", not both".into())),
        (Some(g), None) => serde_json::from_value(g).map_err(|e| CliError::Config(format!("game: {e}")))?,
        (None, Some(d)) => {
            let d: DonationParams =
                serde_json::from_value(d).map_err(|e| CliError::Config(format!("donation: {e}")))?;
            ipd_core::game::donation_to_params(DonationParams::new(d.b, d.c)?)?
        }
        (None, None) => *fallback,
    };
    obj.insert("game".into(), game_json(&game));

    let players = match obj.remove("players") {
        Some(Value::String(s)) if s == "standard" => {
            serde_json::to_value(standard_lineup(&game)?).expect("players serialise")
        }
        Some(Value::Array(list)) => {
            let mut out = Vec::with_capacity(list.len());
            for entry in list {
                out.push(match entry {
                    Value::String(s) => {
                        let spec = parse::player(&s, &game)?;
                        json!({ "name": s, "spec": spec })
                    }
                    Value::Object(mut e) => {
                        if let Some(Value::String(s)) = e.get("spec").cloned() {
                            e.insert("spec".into(), json!(parse::player(&s, &game)?));
                        }
                        Value::Object(e)
                    }
                    other => return Err(CliError::Config(format!("bad player entry {other}"))),
                });
            }
            Value::Array(out)
        }
        Some(other) => return Err(CliError::Config(format!("\"players\" must be a list or \"standard\", got {other}"))),
        None => return Err(CliError::Config("missing \"players\"".into())),
    };
    obj.insert("players".into(), players);

    let m = obj
        .get_mut("match")
        .and_then(Value::as_object_mut)
        .ok_or_else(|| CliError::Config("missing \"match\" object".into()))?;
    if args.seed.is_some() || !m.contains_key("seed") {
        m.insert("seed".into(), json!(seed(args.seed)?));
    }
    let config: TournamentConfig = serde_json::from_value(raw).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

fn tournament(args: &TournamentArgs, fallback: &GameParams) -> Result<Report, CliError> {
    let config = resolve_config(read_config(&args.config)?, args, fallback)?;
    let run = round_robin(&config)?;
    let s = &run.summary;

    let mut summary = Table::new(
        "summary",
        &["rank", "player", "median_score", "mean_score", "cooperation_rate", "initial_cooperation_rate", "wins", "draws"],
        true,
    );
    let mut ranking = Vec::new();
    for (rank, &i) in s.ranking.iter().enumerate() {
        let p = &s.players[i];
        summary.rows.push(vec![
            (rank + 1).to_string(),
            p.name.clone(),
            num(p.median_score),
            num(p.mean_score),
            num(p.cooperation_rate),
            num(p.initial_cooperation_rate),
            num(p.wins),
            num(p.draws),
        ]);
        ranking.push(json!({
            "rank": rank + 1,
            "player": p.name,
            "median_score": p.median_score,
            "mean_score": p.mean_score,
            "cooperation_rate": p.cooperation_rate,
            "initial_cooperation_rate": p.initial_cooperation_rate,
            "wins": p.wins,
            "draws": p.draws,
        }));
    }

    let names: Vec<&str> = s.players.iter().map(|p| p.name.as_str()).collect();
    let header: Vec<&str> = std::iter::once("player").chain(names.iter().copied()).collect();
    let mut matrix = Table::new("payoff_matrix", &header, true);
    for (name, row) in names.iter().zip(&s.payoff_matrix) {
        let cells = row.iter().map(|c| c.map_or_else(String::new, num));
        matrix.rows.push(std::iter::once(name.to_string()).chain(cells).collect());
    }

    let value = json!({
        "seed": config.match_config.seed,
        "repetitions": config.repetitions,
        "ranking": ranking,
        "payoff_matrix": { "players": names, "rows": s.payoff_matrix },
    });
    let mut report = Report::new("summary", value);
    report.text_skip = vec!["ranking".into(), "payoff_matrix".into()];
    report.tables = vec![summary, matrix];
    report.extra.push(("tournament.json".into(), bundle(&config, &run)));
    Ok(report)
}

fn bundle(config: &TournamentConfig, run: &TournamentRun) -> Value {
    let matches: Vec<Value> = run
        .matches
        .iter()
        .map(|m| {
            json!({
                "x": config.players[m.row].name,
                "y": config.players[m.col].name,
                "repetition": m.repetition,
                "seed": m.seed,
                "totals": [m.result.totals.0, m.result.totals.1],
                "outcomes": m.result.outcome_string(),
            })
        })
        .collect();
    json!({ "config": config, "summary": run.summary, "matches": matches })
}

fn replicator(args: &ReplicatorArgs, global: &Global, game: &GameParams) -> Result<Report, CliError> {
    let donation = match (args.b, args.c, global.donation) {
        (Some(b), Some(c), _) | (None, None, Some([b, c])) => Some(DonationParams::new(b, c)?),
        _ => None,
    };
    let m = match donation {
        Some(d) => build_donation_matrix(d, args.omega)?,
        None => build_full_matrix(game, args.omega)?,
    };
    let indifference = match donation {
        Some(d) => json!(donation_indifference(d, args.omega)?),
        None => Value::Array(
            indifference_lines(&m)
                .into_iter()
                .map(|l| l.map_or_else(|e| json!({ "error": e.to_string() }), |l| json!(l)))
                .collect(),
        ),
    };
    let fixed = classify_fixed_points(&m);

    let starts: Vec<PopulationState> = match (args.grid, args.x0) {
        (_, Some(x0)) => vec![PopulationState::new(x0)?],
        (Some(n), None) => {
            if n == 0 {
                return Err(CliError::Config("--grid must be at least 1".into()));
            }
            (0..n * n)
                .map(|k| {
                    let u = ((k / n) as f64 + 0.5) / n as f64;
                    let v = ((k % n) as f64 + 0.5) / n as f64;
                    let (x2, x3) = (u, (1.0 - u) * v);
                    PopulationState([1.0 - x2 - x3, x2, x3])
                })
                .collect()
        }
        (None, None) => unreachable!("clap requires one of --grid, --x0"),
    };
    let trajectories = par::map(Execution::Parallel, &starts, |x0| integrate(x0, &m, args.step, args.horizon));
    let trajectories: Vec<_> = trajectories.into_iter().collect::<Result<_, _>>()?;

    let grid = args.grid.is_some() && args.x0.is_none();
    let header: &[&str] = if grid { &["run", "t", "x1", "x2", "x3"] } else { &["t", "x1", "x2", "x3"] };
    let mut table = Table::new("trajectory", header, false);
    let mut runs = Vec::new();
    for (run, tr) in trajectories.iter().enumerate() {
        let last = tr.points.len() - 1;
        for (k, (t, x)) in tr.points.iter().enumerate() {
            if !(k as u64).is_multiple_of(args.stride) && k != last {
                continue;
            }
            let mut row = Vec::with_capacity(5);
            if grid {
                row.push(run.to_string());
            }
            row.push(num(*t));
            row.extend(x.0.iter().map(|v| num(*v)));
            table.rows.push(row);
        }
        runs.push(json!({ "x0": tr.points[0].1, "final": tr.last(), "max_drift": tr.max_drift }));
    }

    let value = json!({
        "omega": args.omega,
        "matrix": m.a,
        "fixed_points": fixed,
        "indifference": indifference,
        "runs": runs,
    });
    let mut report = Report::new("replicator", value);
    if grid {
        report.text_skip = vec!["runs".into()];
    }
    report.extra.push(("fixed_points.json".into(), json!({ "omega": args.omega, "fixed_points": fixed })));
    report.tables.push(table);
    Ok(report)
}
