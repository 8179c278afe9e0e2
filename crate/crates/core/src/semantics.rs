//! Quantitative transition systems and the fixpoint evaluator for formulae.

use std::collections::{BTreeMap, HashMap};
use std::ops::Index;

use serde::Serialize;

use crate::error::{EvalError, LogicError, ModelError};
use crate::logic::Formula;
use crate::values::{ext_recip, rel_change, Discount, ExtValue, Tolerances};

/// A finite quantitative transition system: states, discounted edges and
/// predicate valuations.
#[derive(Clone, Debug, PartialEq)]
pub struct Qts {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    succ: Vec<Vec<(usize, Discount)>>,
    predicates: BTreeMap<String, Vec<ExtValue>>,
}

impl Qts {
    pub fn new<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> Result<Qts, ModelError> {
        let ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        let mut index = HashMap::new();
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(ModelError::DuplicateId(id.clone()));
            }
        }
        let n = ids.len();
        Ok(Qts { ids, index, succ: vec![Vec::new(); n], predicates: BTreeMap::new() })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, s: usize) -> &str {
        &self.ids[s]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn state(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    fn lookup(&self, id: &str) -> Result<usize, ModelError> {
        self.state(id).ok_or_else(|| ModelError::UnknownId(id.to_string()))
    }

    pub fn add_edge(&mut self, from: usize, to: usize, discount: Discount) -> Result<(), ModelError> {
        if self.succ[from].iter().any(|&(t, _)| t == to) {
            return Err(ModelError::DuplicateEdge(self.ids[from].clone(), self.ids[to].clone()));
        }
        self.succ[from].push((to, discount));
        Ok(())
    }

    pub fn add_edge_by_id(&mut self, from: &str, to: &str, discount: f64) -> Result<(), ModelError> {
        let (f, t) = (self.lookup(from)?, self.lookup(to)?);
        self.add_edge(f, t, Discount::new(discount)?)
    }

    /// Sets `P(s)`. Unset entries of a known predicate read as 0.
    pub fn set_predicate(&mut self, name: &str, state: usize, value: ExtValue) {
        let n = self.len();
        self.predicates.entry(name.to_string()).or_insert_with(|| vec![ExtValue::ZERO; n])[state] = value;
    }

    pub fn set_predicate_by_id(&mut self, name: &str, state: &str, value: ExtValue) -> Result<(), ModelError> {
        let s = self.lookup(state)?;
        self.set_predicate(name, s, value);
        Ok(())
    }

    pub fn predicate(&self, name: &str) -> Option<&[ExtValue]> {
        self.predicates.get(name).map(Vec::as_slice)
    }

    pub fn predicates(&self) -> &BTreeMap<String, Vec<ExtValue>> {
        &self.predicates
    }

    pub fn successors(&self, s: usize) -> &[(usize, Discount)] {
        &self.succ[s]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Discount)> + '_ {
        self.succ.iter().enumerate().flat_map(|(s, out)| out.iter().map(move |&(t, d)| (s, t, d)))
    }

    /// Every predicate takes only the values 0 and ∞.
    pub fn is_qualitative(&self) -> bool {
        self.predicates.values().flatten().all(|v| v.is_zero() || v.is_infinite())
    }

    pub fn is_non_discounted(&self) -> bool {
        self.edges().all(|(_, _, d)| d == Discount::ONE)
    }

    /// Every state has a successor.
    pub fn is_total(&self) -> bool {
        self.succ.iter().all(|s| !s.is_empty())
    }
}

/// A total map from states to values.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Valuation(pub Vec<ExtValue>);

impl Valuation {
    pub fn constant(n: usize, v: ExtValue) -> Valuation {
        Valuation(vec![v; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ExtValue> {
        self.0.iter()
    }

    /// Pointwise `self ≤ other`.
    pub fn le(&self, other: &Valuation) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn map(&self, f: impl Fn(ExtValue) -> ExtValue) -> Valuation {
        Valuation(self.0.iter().copied().map(f).collect())
    }

    /// Named view for JSON output, in state order.
    pub fn to_json(&self, sys: &Qts) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .0
            .iter()
            .enumerate()
            .map(|(s, v)| (sys.id(s).to_string(), serde_json::to_value(v).unwrap()))
            .collect();
        serde_json::Value::Object(map)
    }
}

impl Index<usize> for Valuation {
    type Output = ExtValue;
    fn index(&self, s: usize) -> &ExtValue {
        &self.0[s]
    }
}

/// Interpretation of free variables.
pub type Environment = BTreeMap<String, Valuation>;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EvalStats {
    /// Fixpoint binders evaluated (inner binders count once per outer iteration).
    pub fixpoints: usize,
    /// Kleene steps summed over all fixpoint evaluations.
    pub iterations: usize,
    /// Coordinates promoted to ∞ or floored to 0.
    pub limit_steps: usize,
}

/// Evaluates a formula in negation normal form.
///
/// Fixpoints are computed by Jacobi-style Kleene iteration from the all-0 (μ) or
/// all-∞ (ν) valuation until the largest relative change is at most `tol.tol_fix`.
/// Ascending coordinates that exceed `tol.cap` are promoted to ∞, descending ones
/// below `1/tol.cap` floored to 0. Inner fixpoints are recomputed from scratch for
/// every outer iterate.
pub fn eval(system: &Qts, phi: &Formula, env: &Environment, tol: &Tolerances) -> Result<Valuation, EvalError> {
    eval_with_stats(system, phi, env, tol).map(|(v, _)| v)
}

pub fn eval_with_stats(
    system: &Qts,
    phi: &Formula,
    env: &Environment,
    tol: &Tolerances,
) -> Result<(Valuation, EvalStats), EvalError> {
    let mut ev = Evaluator::new(system, *tol, false);
    ev.run(phi, env)
}

/// Evaluation over a qualitative, non-discounted system, asserting that every
/// intermediate and final value is exactly 0 or ∞.
pub fn eval_qualitative(system: &Qts, phi: &Formula) -> Result<Valuation, EvalError> {
    if !(system.is_qualitative() && system.is_non_discounted()) {
        return Err(EvalError::SystemNotQualitative);
    }
    let mut ev = Evaluator::new(system, Tolerances::default(), true);
    ev.run(phi, &Environment::new()).map(|(v, _)| v)
}

struct Evaluator<'a> {
    sys: &'a Qts,
    tol: Tolerances,
    qualitative: bool,
    stats: EvalStats,
    env: HashMap<String, Vec<ExtValue>>,
}

impl<'a> Evaluator<'a> {
    fn new(sys: &'a Qts, tol: Tolerances, qualitative: bool) -> Self {
        Evaluator { sys, tol, qualitative, stats: EvalStats::default(), env: HashMap::new() }
    }

    fn run(&mut self, phi: &Formula, env: &Environment) -> Result<(Valuation, EvalStats), EvalError> {
        for (x, v) in env {
            if v.len() != self.sys.len() {
                return Err(EvalError::BadEnvironment(x.clone()));
            }
            self.env.insert(x.clone(), v.0.clone());
        }
        let v = self.node(phi)?;
        Ok((Valuation(v), std::mem::take(&mut self.stats)))
    }

    fn check(&self, vals: &[ExtValue]) -> Result<(), EvalError> {
        if self.qualitative {
            if let Some((s, v)) = vals.iter().enumerate().find(|(_, v)| !(v.is_zero() || v.is_infinite())) {
                return Err(EvalError::NotQualitative { state: self.sys.id(s).to_string(), value: v.to_string() });
            }
        }
        Ok(())
    }

    fn predicate(&self, name: &str, c: f64) -> Result<Vec<ExtValue>, EvalError> {
        let p = self.sys.predicate(name).ok_or_else(|| EvalError::UnknownPredicate(name.to_string()))?;
        Ok(p.iter().map(|v| v.abs_diff(c)).collect())
    }

    fn node(&mut self, f: &Formula) -> Result<Vec<ExtValue>, EvalError> {
        let n = self.sys.len();
        let out = match f {
            Formula::Pred { name, c } => self.predicate(name, *c)?,
            Formula::Not(inner) => match &**inner {
                Formula::Pred { name, c } => self.predicate(name, *c)?.into_iter().map(ext_recip).collect(),
                _ => return Err(LogicError::NotNnf.into()),
            },
            Formula::Var(x) => self.env.get(x).cloned().ok_or_else(|| EvalError::UnboundVariable(x.clone()))?,
            Formula::And(a, b) | Formula::Or(a, b) => {
                let (a, b) = (self.node(a)?, self.node(b)?);
                let conj = matches!(f, Formula::And(..));
                a.into_iter().zip(b).map(|(x, y)| if conj { x.min(y) } else { x.max(y) }).collect()
            }
            Formula::Diamond(a) => {
                let a = self.node(a)?;
                (0..n)
                    .map(|s| {
                        self.sys.successors(s).iter().map(|&(t, d)| a[t].scale(d)).max().unwrap_or(ExtValue::ZERO)
                    })
                    .collect()
            }
            Formula::Box(a) => {
                let a = self.node(a)?;
                (0..n)
                    .map(|s| {
                        self.sys
                            .successors(s)
                            .iter()
                            .map(|&(t, d)| a[t].scale(d.recip()))
                            .min()
                            .unwrap_or(ExtValue::INFINITY)
                    })
                    .collect()
            }
            Formula::Scale(d, a) => self.node(a)?.into_iter().map(|v| v.scale(*d)).collect(),
            Formula::Mu(x, body) => self.fixpoint(x, body, true)?,
            Formula::Nu(x, body) => self.fixpoint(x, body, false)?,
        };
        self.check(&out)?;
        Ok(out)
    }

    fn fixpoint(&mut self, x: &str, body: &Formula, least: bool) -> Result<Vec<ExtValue>, EvalError> {
        self.stats.fixpoints += 1;
        let start = if least { ExtValue::ZERO } else { ExtValue::INFINITY };
        let mut cur = vec![start; self.sys.len()];
        let shadowed = self.env.remove(x);
        let mut iters = 0;
        let result = loop {
            self.env.insert(x.to_string(), cur.clone());
            let raw = match self.node(body) {
                Ok(v) => v,
                Err(e) => break Err(e),
            };
            let next: Vec<ExtValue> = cur
                .iter()
                .zip(&raw)
                .map(|(&p, &q)| {
                    let r = self.tol.limit_step(p, q, least);
                    if r != q {
                        self.stats.limit_steps += 1;
                    }
                    r
                })
                .collect();
            iters += 1;
            self.stats.iterations += 1;
            let change = cur.iter().zip(&next).map(|(&a, &b)| rel_change(a, b)).fold(0.0, f64::max);
            cur = next;
            if change <= self.tol.tol_fix {
                break Ok(cur);
            }
            if iters >= self.tol.max_iters {
                break Err(EvalError::NoConvergence { var: x.to_string(), iters, residual: change });
            }
        };
        self.env.remove(x);
        if let Some(v) = shadowed {
            self.env.insert(x.to_string(), v);
        }
        result
    }
}
