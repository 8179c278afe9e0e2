use super::Formula;
use crate::error::LogicError;

/// Pushes every negation down to the predicates using the dualities of the
/// reciprocal negation: `~~φ = φ`, De Morgan, `~<>φ = []~φ`, `~(d·φ) = (1/d)·~φ`
/// and `~μX.φ = νX.~φ[X/~X]`.
///
/// Fails if a bound variable sits under an odd number of negations inside its
/// binder, or if a free variable would end up negated.
pub fn to_nnf(phi: &Formula) -> Result<Formula, LogicError> {
    let mut scope = Vec::new();
    push(phi, false, &mut scope)
}

/// `scope` holds the enclosing binders together with whether each one was dualized.
fn push(f: &Formula, neg: bool, scope: &mut Vec<(String, bool)>) -> Result<Formula, LogicError> {
    Ok(match f {
        Formula::Pred { .. } => {
            if neg {
                Formula::not(f.clone())
            } else {
                f.clone()
            }
        }
        Formula::Var(x) => match scope.iter().rev().find(|(y, _)| y == x) {
            Some((_, flipped)) => {
                if neg != *flipped {
                    return Err(LogicError::NotMonotone(x.clone()));
                }
                f.clone()
            }
            None if neg => return Err(LogicError::NegatedFreeVariable(x.clone())),
            None => f.clone(),
        },
        Formula::Not(a) => push(a, !neg, scope)?,
        Formula::And(a, b) => {
            let (a, b) = (push(a, neg, scope)?, push(b, neg, scope)?);
            if neg {
                Formula::or(a, b)
            } else {
                Formula::and(a, b)
            }
        }
        Formula::Or(a, b) => {
            let (a, b) = (push(a, neg, scope)?, push(b, neg, scope)?);
            if neg {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
        Formula::Diamond(a) => {
            let a = push(a, neg, scope)?;
            if neg {
                Formula::boxed(a)
            } else {
                Formula::diamond(a)
            }
        }
        Formula::Box(a) => {
            let a = push(a, neg, scope)?;
            if neg {
                Formula::diamond(a)
            } else {
                Formula::boxed(a)
            }
        }
        Formula::Scale(d, a) => {
            let d = if neg { d.recip() } else { *d };
            Formula::Scale(d, Box::new(push(a, neg, scope)?))
        }
        Formula::Mu(x, a) | Formula::Nu(x, a) => {
            scope.push((x.clone(), neg));
            let body = push(a, neg, scope);
            scope.pop();
            let body = Box::new(body?);
            let least = matches!(f, Formula::Mu(..)) != neg;
            if least {
                Formula::Mu(x.clone(), body)
            } else {
                Formula::Nu(x.clone(), body)
            }
        }
    })
}

/// True when negation occurs only directly above predicates.
pub fn is_nnf(f: &Formula) -> bool {
    match f {
        Formula::Not(a) => matches!(**a, Formula::Pred { .. }),
        _ => f.children().into_iter().all(is_nnf),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse;

    fn nnf(s: &str) -> Formula {
        to_nnf(&parse(s).unwrap()).unwrap()
    }

    #[test]
    fn dualities() {
        assert_eq!(nnf("~<>|P - 1|"), parse("[]~|P - 1|").unwrap());
        assert_eq!(nnf("~~|P - 1|"), parse("|P - 1|").unwrap());
        assert_eq!(nnf("~(2 * |P - 0|)"), parse("0.5 * ~|P - 0|").unwrap());
        assert_eq!(nnf("~(|P - 0| /\\ []|Q - 1|)"), parse("~|P - 0| \\/ <>~|Q - 1|").unwrap());
        assert_eq!(nnf("~(mu X. (|P - 0| \\/ <>X))"), parse("nu X. ~|P - 0| /\\ []X").unwrap());
        assert_eq!(nnf("~(nu X. ~~X)"), parse("mu X. X").unwrap());
    }

    #[test]
    fn monotonicity_violations() {
        assert_eq!(to_nnf(&parse("mu X. ~X").unwrap()), Err(LogicError::NotMonotone("X".into())));
        assert_eq!(
            to_nnf(&parse("~(nu X. <>(~X /\\ |P - 1|))").unwrap()),
            Err(LogicError::NotMonotone("X".into()))
        );
        assert_eq!(to_nnf(&parse("~Y").unwrap()), Err(LogicError::NegatedFreeVariable("Y".into())));
    }

    #[test]
    fn idempotent_and_recognized() {
        let f = nnf("~(mu X. ~(nu Y. ~<>(X \\/ ~(3 * Y))) /\\ ~|P - 2|)");
        assert!(is_nnf(&f));
        assert_eq!(to_nnf(&f).unwrap(), f);
        assert!(!is_nnf(&parse("~<>|P - 1|").unwrap()));
    }
}
