use std::collections::BTreeSet;
use std::fmt;

use crate::id::Id;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn apply(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }
}

/// Operand of a comparison.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Id),
    Int(i64),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Int(n) => write!(f, "{n}"),
        }
    }
}

/// Guard condition attached to a transition.
///
/// A bare variable in boolean position is true when its value is non-zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GuardExpr {
    Bool(bool),
    Truthy(Id),
    Cmp(CmpOp, Term, Term),
    Not(Box<GuardExpr>),
    And(Box<GuardExpr>, Box<GuardExpr>),
    Or(Box<GuardExpr>, Box<GuardExpr>),
}

impl GuardExpr {
    pub fn cmp(op: CmpOp, lhs: Term, rhs: Term) -> Self {
        GuardExpr::Cmp(op, lhs, rhs)
    }

    pub fn negate(e: GuardExpr) -> Self {
        GuardExpr::Not(Box::new(e))
    }

    pub fn and(a: GuardExpr, b: GuardExpr) -> Self {
        GuardExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: GuardExpr, b: GuardExpr) -> Self {
        GuardExpr::Or(Box::new(a), Box::new(b))
    }

    /// Variables referenced anywhere in the expression.
    pub fn variables(&self) -> BTreeSet<Id> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Id>) {
        match self {
            GuardExpr::Bool(_) => {}
            GuardExpr::Truthy(v) => {
                out.insert(v.clone());
            }
            GuardExpr::Cmp(_, a, b) => {
                for t in [a, b] {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            GuardExpr::Not(e) => e.collect_vars(out),
            GuardExpr::And(a, b) | GuardExpr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Integer constants appearing in comparisons.
    pub fn constants(&self) -> BTreeSet<i64> {
        let mut out = BTreeSet::new();
        self.collect_consts(&mut out);
        out
    }

    fn collect_consts(&self, out: &mut BTreeSet<i64>) {
        match self {
            GuardExpr::Bool(_) | GuardExpr::Truthy(_) => {}
            GuardExpr::Cmp(_, a, b) => {
                for t in [a, b] {
                    if let Term::Int(n) = t {
                        out.insert(*n);
                    }
                }
            }
            GuardExpr::Not(e) => e.collect_consts(out),
            GuardExpr::And(a, b) | GuardExpr::Or(a, b) => {
                a.collect_consts(out);
                b.collect_consts(out);
            }
        }
    }

    // 0 = or, 1 = and, 2 = unary/atom
    fn precedence(&self) -> u8 {
        match self {
            GuardExpr::Or(..) => 0,
            GuardExpr::And(..) => 1,
            _ => 2,
        }
    }
}

/// Canonical rendering: single spaces around operators, parentheses only
/// where precedence requires them, `not (...)` around any compound operand.
impl fmt::Display for GuardExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardExpr::Bool(b) => write!(f, "{b}"),
            GuardExpr::Truthy(v) => write!(f, "{v}"),
            GuardExpr::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            GuardExpr::Not(e) => match e.as_ref() {
                GuardExpr::Bool(_) | GuardExpr::Truthy(_) | GuardExpr::Not(_) => {
                    write!(f, "not {e}")
                }
                _ => write!(f, "not ({e})"),
            },
            GuardExpr::And(a, b) => {
                write_operand(f, a, 1, false)?;
                f.write_str(" and ")?;
                write_operand(f, b, 1, true)
            }
            GuardExpr::Or(a, b) => {
                write_operand(f, a, 0, false)?;
                f.write_str(" or ")?;
                write_operand(f, b, 0, true)
            }
        }
    }
}

// Binary operators parse left-associatively, so a right operand of equal
// precedence needs parentheses to round-trip.
fn write_operand(
    f: &mut fmt::Formatter<'_>,
    e: &GuardExpr,
    parent: u8,
    right: bool,
) -> fmt::Result {
    let p = e.precedence();
    if p < parent || (right && p == parent) {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}
