use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValueError {
    #[error("NaN is not a valid value")]
    NaN,
    #[error("negative value {0}")]
    Negative(f64),
    #[error("discount must be strictly positive and finite, got {0}")]
    BadDiscount(f64),
    #[error("the product 0·∞ is undefined")]
    ZeroTimesInfinity,
    #[error("{0} must be in the admissible range, got {1}")]
    BadTolerance(&'static str, f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable {var} bound twice (at {pos})")]
    Rebound { var: String, pos: usize },
    #[error("variable {var} occurs both free and bound")]
    FreeAndBound { var: String },
    #[error("negative constant at {pos}")]
    NegativeConstant { pos: usize },
}

impl ParseError {
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::Rebound { pos, .. }
            | ParseError::NegativeConstant { pos } => Some(*pos),
            ParseError::FreeAndBound { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogicError {
    #[error("variable {0} occurs under an odd number of negations inside its binder")]
    NotMonotone(String),
    #[error("negated free variable {0} has no negation normal form")]
    NegatedFreeVariable(String),
    #[error("formula is not in negation normal form")]
    NotNnf,
    #[error("formula has free variables: {0:?}")]
    NotClosed(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("fixpoint of {var} did not stabilize within {iters} iterations (residual change {residual:e})")]
    NoConvergence { var: String, iters: usize, residual: f64 },
    #[error("intermediate value {value} at state {state} is neither 0 nor ∞")]
    NotQualitative { state: String, value: String },
    #[error("system is not qualitative and non-discounted")]
    SystemNotQualitative,
    #[error("environment valuation for {0} has the wrong length")]
    BadEnvironment(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("unknown id {0}")]
    UnknownId(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("terminal position {0} has no payoff")]
    MissingPayoff(String),
    #[error("non-terminal position {0} has a payoff")]
    UnexpectedPayoff(String),
    #[error("predicate {pred} undefined at state {state}")]
    MissingPredicate { pred: String, state: String },
    #[error(transparent)]
    Value(#[from] ValueError),
    #[error("malformed JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("play is invalid: {0}")]
    InvalidPlay(String),
    #[error("game has more than one priority on non-terminal positions")]
    NotSinglePriority,
    #[error("game is not qualitative and non-discounted")]
    NotQualitative,
    #[error("value iteration did not stabilize within {iters} iterations (residual change {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("unfolding at priority {priority} did not stabilize within {stages} stages (residual change {residual:e})")]
    StageBudget { priority: u32, stages: usize, residual: f64 },
    #[error("epsilon must be in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("solve result carries no strategy data; solve with strategies enabled")]
    NoStrategyData,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BridgeError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("priority {priority} of position {position} is outside 0..{d}")]
    PriorityOutOfRange { position: String, priority: u32, d: u32 },
    #[error("number of priorities must be at least 1")]
    ZeroPriorities,
}

impl From<ModelError> for BridgeError {
    fn from(e: ModelError) -> Self {
        BridgeError::Game(GameError::Model(e))
    }
}

impl BridgeError {
    /// True when the failure is a budget exhaustion rather than bad input.
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            BridgeError::Eval(EvalError::NoConvergence { .. })
                | BridgeError::Game(GameError::NoConvergence { .. })
                | BridgeError::Game(GameError::StageBudget { .. })
        )
    }
}
