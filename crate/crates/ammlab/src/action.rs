//! Actions, payoffs, and pool states.
//!
//! An [`Action`] is an element of the free monoid over a pool's atomic action
//! space: the null action, an atomic trade, or a flattened composition.
//! Atomic trades are payoff-parameterized: they record the state they were
//! built for and the pre-fee payoff they expect, and a pool only admits them
//! when the current state reproduces that payoff. This makes duplicate
//! submissions of the same profitable trade self-invalidating once one of
//! them executes.

use serde::{Deserialize, Serialize};

use crate::numeric::approx_eq;

/// Change in the trader's holdings: `dx` of the risky asset, `dy` of the
/// numeraire. Positive values flow to the trader.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Payoff {
    pub dx: f64,
    pub dy: f64,
}

impl Payoff {
    pub const ZERO: Payoff = Payoff { dx: 0.0, dy: 0.0 };

    pub fn new(dx: f64, dy: f64) -> Self {
        Self { dx, dy }
    }

    /// Mark-to-market value `dx * price + dy` in numeraire units.
    pub fn value_at(&self, price: f64) -> f64 {
        self.dx * price + self.dy
    }

    pub fn approx_eq(&self, other: &Payoff) -> bool {
        approx_eq(self.dx, other.dx) && approx_eq(self.dy, other.dy)
    }

    pub fn is_zero(&self) -> bool {
        self.approx_eq(&Payoff::ZERO)
    }
}

impl std::ops::Add for Payoff {
    type Output = Payoff;
    fn add(self, rhs: Payoff) -> Payoff {
        Payoff::new(self.dx + rhs.dx, self.dy + rhs.dy)
    }
}

impl std::ops::AddAssign for Payoff {
    fn add_assign(&mut self, rhs: Payoff) {
        self.dx += rhs.dx;
        self.dy += rhs.dy;
    }
}

impl std::ops::Neg for Payoff {
    type Output = Payoff;
    fn neg(self) -> Payoff {
        Payoff::new(-self.dx, -self.dy)
    }
}

/// Canonical pool state, one representation per pool family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolState {
    /// Asset reserves `(x, y)`; used by reserve-curve pools.
    Reserves { x: f64, y: f64 },
    /// Scalar pool price; used by price-parameterized books.
    Price(f64),
    /// Componentwise state of a product of two pools.
    Pair(Box<PoolState>, Box<PoolState>),
}

impl PoolState {
    pub fn reserves(x: f64, y: f64) -> Self {
        PoolState::Reserves { x, y }
    }

    pub fn pair(left: PoolState, right: PoolState) -> Self {
        PoolState::Pair(Box::new(left), Box::new(right))
    }

    /// Structural equality up to numeric tolerance.
    pub fn approx_eq(&self, other: &PoolState) -> bool {
        match (self, other) {
            (PoolState::Reserves { x: x1, y: y1 }, PoolState::Reserves { x: x2, y: y2 }) => {
                approx_eq(*x1, *x2) && approx_eq(*y1, *y2)
            }
            (PoolState::Price(p1), PoolState::Price(p2)) => approx_eq(*p1, *p2),
            (PoolState::Pair(l1, r1), PoolState::Pair(l2, r2)) => {
                l1.approx_eq(l2) && r1.approx_eq(r2)
            }
            _ => false,
        }
    }
}

/// Pool-specific content of an atomic trade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomicKind {
    /// Move the pool to `target`; the usual form for single pools.
    TargetState(PoolState),
    /// Simultaneous component actions on a product pool.
    Pair(Box<Action>, Box<Action>),
}

/// An atomic trade: where it expects the pool to be, what it does, and the
/// pre-fee payoff it was built to deliver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicAction {
    /// State the trade was constructed against.
    pub source: PoolState,
    pub kind: AtomicKind,
    /// Pre-fee (underlying) payoff expected from `source`.
    pub payoff: Payoff,
}

/// Element of the free monoid over atomic actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Null,
    Atomic(AtomicAction),
    /// Flattened, length >= 2, containing no nested composites and no nulls.
    Composite(Vec<Action>),
}

impl Action {
    pub fn atomic(source: PoolState, kind: AtomicKind, payoff: Payoff) -> Self {
        Action::Atomic(AtomicAction {
            source,
            kind,
            payoff,
        })
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Action::Null)
    }

    /// Pre-fee payoff: the recorded payoff for atomics, summed over
    /// components for pairs and composites, zero for null. A monoid
    /// homomorphism into (R^2, +).
    pub fn underlying_payoff(&self) -> Payoff {
        match self {
            Action::Null => Payoff::ZERO,
            Action::Atomic(a) => match &a.kind {
                AtomicKind::TargetState(_) => a.payoff,
                AtomicKind::Pair(l, r) => l.underlying_payoff() + r.underlying_payoff(),
            },
            Action::Composite(parts) => parts
                .iter()
                .fold(Payoff::ZERO, |acc, a| acc + a.underlying_payoff()),
        }
    }

    /// Total numeraire turnover: `|dy|` of the pre-fee payoff per atomic leg,
    /// summed over legs. Always at least `|dy|` of the total payoff.
    pub fn volume(&self) -> f64 {
        match self {
            Action::Null => 0.0,
            Action::Atomic(a) => match &a.kind {
                AtomicKind::TargetState(_) => a.payoff.dy.abs(),
                AtomicKind::Pair(l, r) => l.volume() + r.volume(),
            },
            Action::Composite(parts) => parts.iter().map(Action::volume).sum(),
        }
    }

    /// Atomic legs in execution order (pairs count as one leg).
    pub fn legs(&self) -> Vec<&Action> {
        match self {
            Action::Null => Vec::new(),
            Action::Atomic(_) => vec![self],
            Action::Composite(parts) => parts.iter().flat_map(Action::legs).collect(),
        }
    }
}

/// Monoid composition with flattening: nulls vanish, composites splice, an
/// empty or singleton result collapses. `compose(a, compose(b, c))` and
/// `compose(compose(a, b), c)` yield structurally equal actions.
pub fn compose(a1: Action, a2: Action) -> Action {
    let mut parts = Vec::new();
    push_flat(&mut parts, a1);
    push_flat(&mut parts, a2);
    match parts.len() {
        0 => Action::Null,
        1 => parts.pop().expect("len checked"),
        _ => Action::Composite(parts),
    }
}

/// Compose a sequence of actions left to right.
pub fn compose_all<I: IntoIterator<Item = Action>>(actions: I) -> Action {
    actions.into_iter().fold(Action::Null, compose)
}

fn push_flat(parts: &mut Vec<Action>, action: Action) {
    match action {
        Action::Null => {}
        Action::Composite(inner) => {
            for a in inner {
                push_flat(parts, a);
            }
        }
        atomic => parts.push(atomic),
    }
}
