use alloc::boxed::Box;
use alloc::vec::Vec;

use super::parser::Op;
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum Builtin {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Tanh,
    Dot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum AggKind {
    Sum,
    Mean,
    Prod,
    /// Elementary symmetric polynomial `e_k`.
    Esym(usize),
    /// Power sum `p_k`.
    Psum(i32),
}

/// Resolved expression. Shapes were checked at compile time.
#[derive(Clone, Debug, PartialEq)]
pub(super) enum Node {
    Const(f64),
    /// Entry of the input tuple (0 is the cell itself).
    Input(usize),
    /// Variable bound by the `depth`-th enclosing aggregate, outermost first.
    Bound(usize),
    Index(Box<Node>, usize),
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Builtin, Vec<Node>),
    Vector(Vec<Node>),
    Agg { kind: AggKind, arrow_type: usize, body: Box<Node> },
}

#[derive(Clone, Debug, PartialEq)]
pub(super) enum Val {
    S(f64),
    V(Vec<f64>),
}

impl Val {
    fn from_slice(s: &[f64]) -> Val {
        if s.len() == 1 {
            Val::S(s[0])
        } else {
            Val::V(s.to_vec())
        }
    }

    pub(super) fn scalar(&self) -> f64 {
        match self {
            Val::S(v) => *v,
            Val::V(v) => v[0],
        }
    }

    pub(super) fn write(&self, out: &mut [f64]) {
        match self {
            Val::S(v) => out.fill(*v),
            Val::V(v) => out.copy_from_slice(v),
        }
    }

    fn map(self, f: impl Fn(f64) -> Result<f64, &'static str>) -> Result<Val, &'static str> {
        Ok(match self {
            Val::S(v) => Val::S(f(v)?),
            Val::V(v) => Val::V(v.into_iter().map(f).collect::<Result<_, _>>()?),
        })
    }
}

pub(super) struct Env<'a> {
    pub inputs: &'a [&'a [f64]],
    /// Input positions of each arrow type.
    pub positions: &'a [Vec<usize>],
    pub bound: Vec<&'a [f64]>,
}

fn apply(op: Op, a: f64, b: f64) -> Result<f64, &'static str> {
    Ok(match op {
        Op::Add => a + b,
        Op::Sub => a - b,
        Op::Mul => a * b,
        Op::Div => {
            if b == 0.0 {
                return Err("division");
            }
            a / b
        }
        Op::Pow => {
            if b == math::round(b) && math::abs(b) <= i32::MAX as f64 {
                if a == 0.0 && b < 0.0 {
                    return Err("power");
                }
                math::powi(a, b as i32)
            } else if a > 0.0 {
                math::pow(a, b)
            } else if a == 0.0 && b > 0.0 {
                0.0
            } else {
                return Err("power");
            }
        }
    })
}

pub(super) fn binary(op: Op, a: Val, b: Val) -> Result<Val, &'static str> {
    Ok(match (a, b) {
        (Val::S(x), Val::S(y)) => Val::S(apply(op, x, y)?),
        (Val::V(x), Val::S(y)) => Val::V(x.into_iter().map(|v| apply(op, v, y)).collect::<Result<_, _>>()?),
        (Val::S(x), Val::V(y)) => Val::V(y.into_iter().map(|v| apply(op, x, v)).collect::<Result<_, _>>()?),
        (Val::V(x), Val::V(y)) => {
            Val::V(x.into_iter().zip(y).map(|(u, v)| apply(op, u, v)).collect::<Result<_, _>>()?)
        }
    })
}

fn call(f: Builtin, mut args: Vec<Val>) -> Result<Val, &'static str> {
    if f == Builtin::Dot {
        let b = args.pop().expect("arity checked");
        let a = args.pop().expect("arity checked");
        return Ok(match (a, b) {
            (Val::V(x), Val::V(y)) => Val::S(x.iter().zip(&y).map(|(u, v)| u * v).sum()),
            (a, b) => Val::S(a.scalar() * b.scalar()),
        });
    }
    let a = args.pop().expect("arity checked");
    a.map(|v| match f {
        Builtin::Exp => Ok(math::exp(v)),
        Builtin::Log if v > 0.0 => Ok(math::ln(v)),
        Builtin::Log => Err("log"),
        Builtin::Sqrt if v >= 0.0 => Ok(math::sqrt(v)),
        Builtin::Sqrt => Err("sqrt"),
        Builtin::Sin => Ok(math::sin(v)),
        Builtin::Cos => Ok(math::cos(v)),
        Builtin::Tanh => Ok(math::tanh(v)),
        Builtin::Dot => unreachable!(),
    })
}

/// `e_k` of `values` by the usual recurrence.
fn elementary_symmetric(values: &[f64], k: usize) -> f64 {
    let mut e = alloc::vec![0.0; k + 1];
    e[0] = 1.0;
    for &v in values {
        for j in (1..=k.min(values.len())).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e[k]
}

pub(super) fn eval<'a>(node: &Node, env: &mut Env<'a>) -> Result<Val, &'static str> {
    Ok(match node {
        Node::Const(v) => Val::S(*v),
        Node::Input(i) => Val::from_slice(env.inputs[*i]),
        Node::Bound(d) => Val::from_slice(env.bound[*d]),
        Node::Index(inner, k) => match eval(inner, env)? {
            Val::S(v) => Val::S(v),
            Val::V(v) => Val::S(v[*k]),
        },
        Node::Neg(inner) => eval(inner, env)?.map(|v| Ok(-v))?,
        Node::Bin(op, a, b) => {
            let a = eval(a, env)?;
            let b = eval(b, env)?;
            binary(*op, a, b)?
        }
        Node::Call(f, args) => {
            let vals = args.iter().map(|a| eval(a, env)).collect::<Result<Vec<_>, _>>()?;
            call(*f, vals)?
        }
        Node::Vector(items) => {
            Val::V(items.iter().map(|e| eval(e, env).map(|v| v.scalar())).collect::<Result<_, _>>()?)
        }
        Node::Agg { kind, arrow_type, body } => {
            let inputs = env.inputs;
            let positions = env.positions;
            let members = &positions[*arrow_type];
            let mut values = Vec::with_capacity(members.len());
            for &p in members {
                env.bound.push(inputs[p]);
                let v = eval(body, env);
                env.bound.pop();
                values.push(v?);
            }
            match kind {
                AggKind::Sum | AggKind::Mean => {
                    let mut acc = Val::S(0.0);
                    for v in values {
                        acc = binary(Op::Add, acc, v)?;
                    }
                    if *kind == AggKind::Mean {
                        acc = binary(Op::Div, acc, Val::S(members.len() as f64))?;
                    }
                    acc
                }
                AggKind::Prod => {
                    let mut acc = Val::S(1.0);
                    for v in values {
                        acc = binary(Op::Mul, acc, v)?;
                    }
                    acc
                }
                AggKind::Esym(k) => {
                    let xs: Vec<f64> = values.iter().map(Val::scalar).collect();
                    Val::S(elementary_symmetric(&xs, *k))
                }
                AggKind::Psum(k) => Val::S(values.iter().map(|v| math::powi(v.scalar(), *k)).sum()),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_symmetric_polynomials() {
        let xs = [1.0, 2.0, 3.0];
        assert_eq!(elementary_symmetric(&xs, 0), 1.0);
        assert_eq!(elementary_symmetric(&xs, 1), 6.0);
        assert_eq!(elementary_symmetric(&xs, 2), 11.0);
        assert_eq!(elementary_symmetric(&xs, 3), 6.0);
        assert_eq!(elementary_symmetric(&xs, 4), 0.0);
    }

    #[test]
    fn guarded_operations() {
        assert_eq!(apply(Op::Div, 1.0, 0.0), Err("division"));
        assert_eq!(apply(Op::Pow, -8.0, 0.5), Err("power"));
        assert_eq!(apply(Op::Pow, -2.0, 3.0), Ok(-8.0));
        assert_eq!(call(Builtin::Log, alloc::vec![Val::S(0.0)]), Err("log"));
        assert_eq!(call(Builtin::Sqrt, alloc::vec![Val::S(-1.0)]), Err("sqrt"));
    }

    #[test]
    fn broadcasting() {
        let v = binary(Op::Mul, Val::S(2.0), Val::V(alloc::vec![1.0, -1.0])).unwrap();
        assert_eq!(v, Val::V(alloc::vec![2.0, -2.0]));
    }
}
