//! The eleven-strategy field built from the ZD constructors for a game.

use crate::game::GameParams;
use crate::players::PlayerSpec;
use crate::tournament::PlayerEntry;
use crate::zd::{extortionate, set_opponent_score, ExtortionParams, ZdError};

/// Tit-For-Tat, Defector, Cooperator, four opponent-score setters, three
/// extortioners and the adaptive learner (`epsilon = 0.1`, `K = 20`).
pub fn standard_lineup(params: &GameParams) -> Result<Vec<PlayerEntry>, ZdError> {
    let set = |name: &str, p1: f64, p4: f64| -> Result<PlayerEntry, ZdError> {
        Ok(PlayerEntry::new(name, PlayerSpec::memory_one(set_opponent_score(p1, p4, params)?.p)))
    };
    let extort = |name: &str, chi: f64, phi: f64| -> Result<PlayerEntry, ZdError> {
        Ok(PlayerEntry::new(name, PlayerSpec::memory_one(extortionate(&ExtortionParams { chi, phi }, params)?)))
    };
    Ok(vec![
        PlayerEntry::new("TitForTat", PlayerSpec::TitForTat),
        PlayerEntry::new("Defector", PlayerSpec::Defector),
        PlayerEntry::new("Cooperator", PlayerSpec::Cooperator),
        set("SetScore1a", 0.5, 0.0)?,
        set("SetScore1b", 0.75, 0.0)?,
        set("SetScore7/3", 0.75, 0.5)?,
        set("SetScore3", 1.0, 0.5)?,
        extort("Extort2a", 2.0, 1.0 / 18.0)?,
        extort("Extort2b", 2.0, 1.0 / 10.0)?,
        extort("Extort3", 3.0, 1.0 / 26.0)?,
        PlayerEntry::new("Adaptive", PlayerSpec::Adaptive { epsilon: 0.1, k: 20 }),
    ])
}
