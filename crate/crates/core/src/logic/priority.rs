use std::collections::BTreeMap;

use serde::Serialize;

use super::Formula;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FixKind {
    Least,
    Greatest,
}

/// Priorities of the fixpoint variables of a well-named formula.
///
/// The alternation level of a variable `X` bound by `ηX.ψ` is the maximum, over the
/// enclosing binders `Y` that occur free in `ηX.ψ`, of the level of `Y` plus one when
/// `Y` and `X` are of different kinds (0 when there is no such `Y`). The priority is
/// the level itself when its parity already matches (`ν` even, `μ` odd) and the level
/// plus one otherwise. `depth` is the alternation depth, one more than the highest
/// level (0 without fixpoints); it is the priority given to every non-variable
/// position of the model-checking game.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriorityAssignment {
    pub priorities: BTreeMap<String, u32>,
    pub levels: BTreeMap<String, u32>,
    pub kinds: BTreeMap<String, FixKind>,
    pub depth: u32,
}

impl PriorityAssignment {
    pub fn priority(&self, var: &str) -> Option<u32> {
        self.priorities.get(var).copied()
    }
}

pub fn assign_priorities(phi: &Formula) -> PriorityAssignment {
    let mut out = PriorityAssignment {
        priorities: BTreeMap::new(),
        levels: BTreeMap::new(),
        kinds: BTreeMap::new(),
        depth: 0,
    };
    let mut enclosing: Vec<(String, FixKind, u32)> = Vec::new();
    visit(phi, &mut enclosing, &mut out);
    out
}

fn visit(f: &Formula, enclosing: &mut Vec<(String, FixKind, u32)>, out: &mut PriorityAssignment) {
    if let Formula::Mu(x, body) | Formula::Nu(x, body) = f {
        let kind = if matches!(f, Formula::Mu(..)) { FixKind::Least } else { FixKind::Greatest };
        let free = f.free_vars();
        let level = enclosing
            .iter()
            .filter(|(y, _, _)| free.contains(y))
            .map(|(_, k, l)| if *k == kind { *l } else { l + 1 })
            .max()
            .unwrap_or(0);
        let wants_odd = kind == FixKind::Least;
        let priority = if (level % 2 == 1) == wants_odd { level } else { level + 1 };
        out.priorities.insert(x.clone(), priority);
        out.levels.insert(x.clone(), level);
        out.kinds.insert(x.clone(), kind);
        out.depth = out.depth.max(level + 1);
        enclosing.push((x.clone(), kind, level));
        visit(body, enclosing, out);
        enclosing.pop();
        return;
    }
    for c in f.children() {
        visit(c, enclosing, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse;

    fn prios(s: &str) -> (Vec<(String, u32)>, u32) {
        let a = assign_priorities(&parse(s).unwrap());
        (a.priorities.into_iter().collect(), a.depth)
    }

    #[test]
    fn single_least_fixpoint() {
        assert_eq!(prios("mu X. <>X"), (vec![("X".into(), 1)], 1));
        assert_eq!(prios("nu X. []X"), (vec![("X".into(), 0)], 1));
    }

    #[test]
    fn dependent_alternation() {
        assert_eq!(prios("nu X. mu Y. ([]X /\\ <>Y)"), (vec![("X".into(), 0), ("Y".into(), 1)], 2));
        assert_eq!(prios("mu X. nu Y. (X /\\ Y)"), (vec![("X".into(), 1), ("Y".into(), 2)], 2));
        // inner binder does not mention X: no alternation
        assert_eq!(prios("nu X. (mu Y. (<>Y \\/ |P - 1|)) /\\ []X"), (vec![("X".into(), 0), ("Y".into(), 1)], 1));
        // same-kind nesting stays on one level
        assert_eq!(prios("mu X. mu Y. (X \\/ Y)"), (vec![("X".into(), 1), ("Y".into(), 1)], 1));
        assert_eq!(
            prios("nu X. mu Y. nu Z. (X /\\ Y /\\ Z)"),
            (vec![("X".into(), 0), ("Y".into(), 1), ("Z".into(), 2)], 3)
        );
    }

    #[test]
    fn no_fixpoints() {
        assert_eq!(prios("<>|P - 1| /\\ |Q - 0|"), (vec![], 0));
    }
}
