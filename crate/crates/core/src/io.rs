//! JSON encodings of transition systems and games.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::games::{Player, QuantParityGame};
use crate::semantics::Qts;
use crate::values::{Discount, ExtValue};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    id: String,
    #[serde(default)]
    predicates: BTreeMap<String, ExtValue>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeJson {
    from: String,
    to: String,
    discount: Discount,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QtsJson {
    states: Vec<StateJson>,
    #[serde(default)]
    edges: Vec<EdgeJson>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PositionJson {
    id: String,
    #[serde(default = "default_owner")]
    owner: Player,
    #[serde(default)]
    priority: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    payoff: Option<ExtValue>,
}

fn default_owner() -> Player {
    Player::P0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameJson {
    positions: Vec<PositionJson>,
    #[serde(default)]
    moves: Vec<EdgeJson>,
}

fn json_err(e: serde_json::Error) -> ModelError {
    ModelError::Json(e.to_string())
}

impl Qts {
    /// Reads `{"states": [{"id", "predicates"}], "edges": [{"from", "to", "discount"}]}`.
    /// A predicate named at some state but not at another is 0 there.
    pub fn from_json_str(text: &str) -> Result<Qts, ModelError> {
        let j: QtsJson = serde_json::from_str(text).map_err(json_err)?;
        let mut k = Qts::new(j.states.iter().map(|s| s.id.clone()))?;
        for (i, s) in j.states.iter().enumerate() {
            for (name, &x) in &s.predicates {
                k.set_predicate(name, i, x);
            }
        }
        for e in &j.edges {
            let (f, t) = (lookup(&k, &e.from)?, lookup(&k, &e.to)?);
            k.add_edge(f, t, e.discount)?;
        }
        Ok(k)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let states = (0..self.len())
            .map(|s| StateJson {
                id: self.id(s).to_string(),
                predicates: self.predicates().iter().map(|(n, v)| (n.clone(), v[s])).collect(),
            })
            .collect();
        let edges = self
            .edges()
            .map(|(f, t, d)| EdgeJson { from: self.id(f).to_string(), to: self.id(t).to_string(), discount: d })
            .collect();
        serde_json::to_value(QtsJson { states, edges }).expect("serializable")
    }
}

fn lookup(k: &Qts, id: &str) -> Result<usize, ModelError> {
    k.state(id).ok_or_else(|| ModelError::UnknownId(id.to_string()))
}

impl QuantParityGame {
    /// Reads `{"positions": [{"id", "owner", "priority", "payoff"}], "moves": [{"from", "to", "discount"}]}`
    /// and checks that payoffs sit exactly on terminal positions.
    pub fn from_json_str(text: &str) -> Result<QuantParityGame, ModelError> {
        let j: GameJson = serde_json::from_str(text).map_err(json_err)?;
        let mut g = QuantParityGame::new();
        for p in j.positions {
            g.add_position(p.id, p.owner, p.priority, p.payoff)?;
        }
        for m in &j.moves {
            let f = g.position(&m.from).ok_or_else(|| ModelError::UnknownId(m.from.clone()))?;
            let t = g.position(&m.to).ok_or_else(|| ModelError::UnknownId(m.to.clone()))?;
            g.add_move(f, t, m.discount)?;
        }
        g.validate()?;
        Ok(g)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let positions = self
            .positions()
            .iter()
            .map(|p| PositionJson { id: p.id.clone(), owner: p.owner, priority: p.priority, payoff: p.payoff })
            .collect();
        let moves = self
            .edges()
            .map(|(f, t, d)| EdgeJson { from: self.id(f).to_string(), to: self.id(t).to_string(), discount: d })
            .collect();
        serde_json::to_value(GameJson { positions, moves }).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qts_round_trip() {
        let text = r#"{"states": [{"id": "s", "predicates": {"P": 1}}, {"id": "t", "predicates": {"P": "inf", "Q": 2.5}}],
                       "edges": [{"from": "s", "to": "t", "discount": 2}]}"#;
        let k = Qts::from_json_str(text).unwrap();
        assert_eq!(k.predicate("Q").unwrap(), &[ExtValue::ZERO, ExtValue::of(2.5)]);
        assert_eq!(k.predicate("P").unwrap()[1], ExtValue::INFINITY);
        assert_eq!(k.successors(0), &[(1, Discount::new(2.0).unwrap())]);
        let again = Qts::from_json_str(&k.to_json().to_string()).unwrap();
        assert_eq!(again, k);
    }

    #[test]
    fn qts_errors() {
        assert!(matches!(Qts::from_json_str("{"), Err(ModelError::Json(_))));
        let bad_edge = r#"{"states": [{"id": "s"}], "edges": [{"from": "s", "to": "x", "discount": 1}]}"#;
        assert_eq!(Qts::from_json_str(bad_edge), Err(ModelError::UnknownId("x".into())));
        let zero = r#"{"states": [{"id": "s"}], "edges": [{"from": "s", "to": "s", "discount": 0}]}"#;
        assert!(Qts::from_json_str(zero).is_err());
        let dup = r#"{"states": [{"id": "s"}, {"id": "s"}]}"#;
        assert_eq!(Qts::from_json_str(dup), Err(ModelError::DuplicateId("s".into())));
    }

    #[test]
    fn game_round_trip() {
        let text = r#"{"positions": [
            {"id": "a", "owner": 1, "priority": 0},
            {"id": "b", "owner": 0, "priority": 1},
            {"id": "t", "owner": 0, "priority": 0, "payoff": 1}],
          "moves": [{"from": "a", "to": "a", "discount": 0.5}, {"from": "a", "to": "b", "discount": 1},
                    {"from": "b", "to": "b", "discount": 2}, {"from": "b", "to": "t", "discount": 1}]}"#;
        let g = QuantParityGame::from_json_str(text).unwrap();
        assert_eq!(g.owner(0), Player::P1);
        assert_eq!(g.payoff(2), Some(ExtValue::ONE));
        let again = QuantParityGame::from_json_str(&g.to_json().to_string()).unwrap();
        assert_eq!(again, g);
        let missing = r#"{"positions": [{"id": "a", "owner": 0, "priority": 0}]}"#;
        assert_eq!(QuantParityGame::from_json_str(missing), Err(ModelError::MissingPayoff("a".into())));
        let owner = r#"{"positions": [{"id": "a", "owner": 2, "priority": 0, "payoff": 1}]}"#;
        assert!(matches!(QuantParityGame::from_json_str(owner), Err(ModelError::Json(_))));
    }
}
