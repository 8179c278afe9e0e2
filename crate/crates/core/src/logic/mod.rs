//! Formulae of the quantitative μ-calculus: syntax tree, parser, printer,
//! negation normal form and priority assignment.

mod nnf;
mod parse;
mod priority;

use std::collections::BTreeSet;
use std::fmt;

use crate::values::Discount;

pub use nnf::{is_nnf, to_nnf};
pub use parse::parse;
pub use priority::{assign_priorities, FixKind, PriorityAssignment};

/// A formula tree. `Pred { name, c }` denotes `|P − c|`; `Scale(d, φ)` denotes `d·φ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Pred { name: String, c: f64 },
    Var(String),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Diamond(Box<Formula>),
    Box(Box<Formula>),
    Scale(Discount, Box<Formula>),
    Mu(String, Box<Formula>),
    Nu(String, Box<Formula>),
    Not(Box<Formula>),
}

impl Formula {
    pub fn pred(name: impl Into<String>, c: f64) -> Formula {
        assert!(c.is_finite() && c >= 0.0, "predicate constants are finite and nonnegative");
        Formula::Pred { name: name.into(), c }
    }

    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn diamond(a: Formula) -> Formula {
        Formula::Diamond(Box::new(a))
    }

    pub fn boxed(a: Formula) -> Formula {
        Formula::Box(Box::new(a))
    }

    pub fn scale(d: f64, a: Formula) -> Formula {
        Formula::Scale(Discount::new(d).expect("scale factor must be positive"), Box::new(a))
    }

    pub fn mu(x: impl Into<String>, body: Formula) -> Formula {
        Formula::Mu(x.into(), Box::new(body))
    }

    pub fn nu(x: impl Into<String>, body: Formula) -> Formula {
        Formula::Nu(x.into(), Box::new(body))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    /// Disjunction of a non-empty list, associated to the left.
    pub fn or_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        let first = it.next().expect("empty disjunction");
        it.fold(first, Formula::or)
    }

    pub fn and_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        let first = it.next().expect("empty conjunction");
        it.fold(first, Formula::and)
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Pred { .. } | Formula::Var(_) => vec![],
            Formula::And(a, b) | Formula::Or(a, b) => vec![a, b],
            Formula::Diamond(a)
            | Formula::Box(a)
            | Formula::Scale(_, a)
            | Formula::Mu(_, a)
            | Formula::Nu(_, a)
            | Formula::Not(a) => vec![a],
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().into_iter().map(Formula::depth).max().unwrap_or(0)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Every variable bound somewhere in the formula, in pre-order.
    pub fn bound_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |f| {
            if let Formula::Mu(x, _) | Formula::Nu(x, _) = f {
                out.push(x.clone());
            }
        });
        out
    }

    pub fn predicate_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Pred { name, .. } = f {
                out.insert(name.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Formula)) {
        visit(self);
        for c in self.children() {
            c.walk(visit);
        }
    }

    /// Each variable bound at most once and never also free.
    pub fn is_well_named(&self) -> bool {
        let bound = self.bound_vars();
        let set: BTreeSet<&String> = bound.iter().collect();
        set.len() == bound.len() && self.free_vars().iter().all(|x| !set.contains(x))
    }

    /// Replaces free occurrences of `var` by `with`.
    pub fn substitute(&self, var: &str, with: &Formula) -> Formula {
        let rec = |a: &Formula| Box::new(a.substitute(var, with));
        match self {
            Formula::Var(x) if x == var => with.clone(),
            Formula::Pred { .. } | Formula::Var(_) => self.clone(),
            Formula::And(a, b) => Formula::And(rec(a), rec(b)),
            Formula::Or(a, b) => Formula::Or(rec(a), rec(b)),
            Formula::Diamond(a) => Formula::Diamond(rec(a)),
            Formula::Box(a) => Formula::Box(rec(a)),
            Formula::Scale(d, a) => Formula::Scale(*d, rec(a)),
            Formula::Not(a) => Formula::Not(rec(a)),
            Formula::Mu(x, _) | Formula::Nu(x, _) if x == var => self.clone(),
            Formula::Mu(x, a) => Formula::Mu(x.clone(), rec(a)),
            Formula::Nu(x, a) => Formula::Nu(x.clone(), rec(a)),
        }
    }

    /// Renames binders so that the result is well-named. Binders whose name is
    /// already taken (by an earlier binder or a free variable) get a fresh name.
    pub fn rename_apart(&self) -> Formula {
        let mut taken: BTreeSet<String> = self.free_vars();
        let mut all_names: BTreeSet<String> = taken.clone();
        all_names.extend(self.bound_vars());
        let mut scope: Vec<(String, String)> = Vec::new();
        rename(self, &mut taken, &all_names, &mut scope)
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match f {
        Formula::Var(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        Formula::Mu(x, a) | Formula::Nu(x, a) => {
            bound.push(x.clone());
            collect_free(a, bound, out);
            bound.pop();
        }
        _ => {
            for c in f.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

fn rename(
    f: &Formula,
    taken: &mut BTreeSet<String>,
    all: &BTreeSet<String>,
    scope: &mut Vec<(String, String)>,
) -> Formula {
    let rec = |a: &Formula, taken: &mut BTreeSet<String>, scope: &mut Vec<(String, String)>| {
        Box::new(rename(a, taken, all, scope))
    };
    match f {
        Formula::Var(x) => {
            let mapped = scope.iter().rev().find(|(from, _)| from == x).map(|(_, to)| to.clone());
            Formula::Var(mapped.unwrap_or_else(|| x.clone()))
        }
        Formula::Pred { .. } => f.clone(),
        Formula::And(a, b) => {
            let a = rec(a, taken, scope);
            Formula::And(a, rec(b, taken, scope))
        }
        Formula::Or(a, b) => {
            let a = rec(a, taken, scope);
            Formula::Or(a, rec(b, taken, scope))
        }
        Formula::Diamond(a) => Formula::Diamond(rec(a, taken, scope)),
        Formula::Box(a) => Formula::Box(rec(a, taken, scope)),
        Formula::Scale(d, a) => Formula::Scale(*d, rec(a, taken, scope)),
        Formula::Not(a) => Formula::Not(rec(a, taken, scope)),
        Formula::Mu(x, a) | Formula::Nu(x, a) => {
            let fresh = if taken.contains(x) {
                (1..)
                    .map(|i| format!("{x}_{i}"))
                    .find(|n| !taken.contains(n) && !all.contains(n))
                    .unwrap()
            } else {
                x.clone()
            };
            taken.insert(fresh.clone());
            scope.push((x.clone(), fresh.clone()));
            let body = rec(a, taken, scope);
            scope.pop();
            match f {
                Formula::Mu(..) => Formula::Mu(fresh, body),
                _ => Formula::Nu(fresh, body),
            }
        }
    }
}

// Printing precedence: 0 = binder position, 1 = disjunct, 2 = conjunct, 3 = unary.
fn write_prec(f: &Formula, ctx: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let paren = match f {
        Formula::Mu(..) | Formula::Nu(..) => ctx > 0,
        Formula::Or(..) => ctx > 1,
        Formula::And(..) => ctx > 2,
        _ => false,
    };
    if paren {
        out.write_str("(")?;
    }
    match f {
        Formula::Pred { name, c } => write!(out, "|{name} - {c}|")?,
        Formula::Var(x) => out.write_str(x)?,
        Formula::Or(a, b) => {
            write_prec(a, 1, out)?;
            out.write_str(" \\/ ")?;
            write_prec(b, 2, out)?;
        }
        Formula::And(a, b) => {
            write_prec(a, 2, out)?;
            out.write_str(" /\\ ")?;
            write_prec(b, 3, out)?;
        }
        Formula::Diamond(a) => {
            out.write_str("<>")?;
            write_prec(a, 3, out)?;
        }
        Formula::Box(a) => {
            out.write_str("[]")?;
            write_prec(a, 3, out)?;
        }
        Formula::Scale(d, a) => {
            write!(out, "{} * ", d.get())?;
            write_prec(a, 3, out)?;
        }
        Formula::Not(a) => {
            out.write_str("~")?;
            write_prec(a, 3, out)?;
        }
        Formula::Mu(x, a) => {
            write!(out, "mu {x}. ")?;
            write_prec(a, 0, out)?;
        }
        Formula::Nu(x, a) => {
            write!(out, "nu {x}. ")?;
            write_prec(a, 0, out)?;
        }
    }
    if paren {
        out.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, 0, f)
    }
}

impl std::str::FromStr for Formula {
    type Err = crate::error::ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
