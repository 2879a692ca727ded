use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::eval::{eval, AggKind, Builtin, Env, Node};
use super::parser::{parse, Arg, Expr, Item, Op};
use super::{DslError, DslErrorKind, Pos};
use crate::field::{symmetrize, CellField, FieldError, RawFunction, SymmetrizedField};
use crate::network::{CellId, TypedNetwork};

/// How a class computes `f_c`.
#[derive(Clone, Debug, PartialEq)]
enum Def {
    Whole(Node),
    Components(Vec<Node>),
}

/// A compiled field: one definition per input-isomorphism class, plus the
/// symmetrized `raw` terms if the source has any.
pub struct FieldSpec {
    params: Vec<(String, f64)>,
    class_of: Vec<usize>,
    defs: Vec<Option<Def>>,
    positions: Vec<Vec<Vec<usize>>>,
    raw: Option<SymmetrizedField>,
}

impl FieldSpec {
    /// Parameters after overrides, in declaration order.
    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn has_raw_terms(&self) -> bool {
        self.raw.is_some()
    }

    /// The symmetrized raw part, if any.
    pub fn raw_part(&self) -> Option<&SymmetrizedField> {
        self.raw.as_ref()
    }
}

fn relabel(cell: CellId) -> impl Fn(&'static str) -> FieldError {
    move |operation| FieldError::Domain { cell, operation }
}

impl CellField for FieldSpec {
    fn eval_cell(&self, cell: CellId, inputs: &[&[f64]], out: &mut [f64]) -> Result<(), FieldError> {
        let class = *self.class_of.get(cell.index()).ok_or(FieldError::UnknownCell { cell })?;
        let positions = &self.positions[cell.index()];
        let arity = positions.iter().map(Vec::len).sum::<usize>() + 1;
        if inputs.len() != arity {
            return Err(FieldError::Arity { cell, expected: arity, found: inputs.len() });
        }
        let mut env = Env { inputs, positions, bound: Vec::new() };
        match &self.defs[class] {
            None => out.fill(0.0),
            Some(Def::Whole(node)) => eval(node, &mut env).map_err(relabel(cell))?.write(out),
            Some(Def::Components(nodes)) => {
                for (o, node) in out.iter_mut().zip(nodes) {
                    *o = eval(node, &mut env).map_err(relabel(cell))?.scalar();
                }
            }
        }
        if let Some(raw) = &self.raw {
            let mut extra = alloc::vec![0.0; out.len()];
            raw.eval_cell(cell, inputs, &mut extra)?;
            out.iter_mut().zip(&extra).for_each(|(o, e)| *o += e);
        }
        Ok(())
    }
}

/// `φ` of a raw block, evaluated on a tuple in the representative's order.
struct RawDsl {
    phi: Node,
    positions: Vec<Vec<usize>>,
}

impl RawFunction for RawDsl {
    fn eval(&self, inputs: &[&[f64]]) -> Result<f64, FieldError> {
        let mut env = Env { inputs, positions: &self.positions, bound: Vec::new() };
        eval(&self.phi, &mut env)
            .map(|v| v.scalar())
            .map_err(|operation| FieldError::Domain { cell: CellId::new(usize::MAX), operation })
    }
}

/// Raw blocks applied as written to every cell of the representative's
/// class, without symmetrization. Generally not admissible; kept as a
/// negative control for [`check_admissibility`](crate::field::check_admissibility).
pub struct UnsymmetrizedField {
    terms: Vec<Vec<(RawDsl, Vec<f64>)>>,
}

impl CellField for UnsymmetrizedField {
    fn eval_cell(&self, cell: CellId, inputs: &[&[f64]], out: &mut [f64]) -> Result<(), FieldError> {
        out.fill(0.0);
        for (raw, dir) in self.terms.get(cell.index()).ok_or(FieldError::UnknownCell { cell })? {
            let v = raw.eval(inputs).map_err(|e| match e {
                FieldError::Domain { operation, .. } => FieldError::Domain { cell, operation },
                other => other,
            })?;
            out.iter_mut().zip(dir).for_each(|(o, y)| *o += v * y);
        }
        Ok(())
    }
}

struct FnDef {
    args: Vec<String>,
    body: Expr,
    order: usize,
}

struct Globals {
    params: BTreeMap<String, f64>,
    param_order: Vec<String>,
    fns: BTreeMap<String, FnDef>,
}

/// Compilation context for one expression.
struct Scope<'a> {
    net: &'a TypedNetwork,
    /// Cell the expression is compiled for; `None` for constants.
    cell: Option<CellId>,
    positions: &'a [Vec<usize>],
    raw: bool,
    /// Inside a function body: only functions declared before `fn_limit`.
    fn_limit: Option<usize>,
    lambdas: Vec<(String, usize)>,
    args: Vec<(String, Node, usize)>,
}

fn err<T>(kind: DslErrorKind, pos: Pos, message: String) -> Result<T, DslError> {
    Err(DslError::new(kind, pos, message))
}

/// Input positions of each arrow type for `cell`.
fn positions_of(net: &TypedNetwork, cell: CellId) -> Vec<Vec<usize>> {
    let mut out = alloc::vec![Vec::new(); net.num_arrow_types()];
    for (i, &a) in net.input_arrows(cell).iter().enumerate().skip(1) {
        out[net.arrow_type(a).index()].push(i);
    }
    out
}

fn agg_kind(name: &str) -> Option<(AggKind, bool)> {
    Some(match name {
        "sum" | "agg_sum" => (AggKind::Sum, false),
        "mean" | "agg_mean" => (AggKind::Mean, false),
        "prod" | "agg_prod" => (AggKind::Prod, false),
        "esym" => (AggKind::Esym(0), true),
        "psum" => (AggKind::Psum(0), true),
        _ => return None,
    })
}

fn builtin(name: &str) -> Option<(Builtin, usize)> {
    Some(match name {
        "exp" => (Builtin::Exp, 1),
        "log" => (Builtin::Log, 1),
        "sqrt" => (Builtin::Sqrt, 1),
        "sin" => (Builtin::Sin, 1),
        "cos" => (Builtin::Cos, 1),
        "tanh" => (Builtin::Tanh, 1),
        "dot" => (Builtin::Dot, 2),
        _ => return None,
    })
}

fn expr_pos(e: &Expr) -> Pos {
    match e {
        Expr::Num(_) | Expr::Neg(_) => Pos::default(),
        Expr::Name(_, p)
        | Expr::SelfRef(p)
        | Expr::Input(_, p)
        | Expr::Index(_, _, p)
        | Expr::Bin(_, _, _, p)
        | Expr::Call(_, _, p)
        | Expr::Vector(_, p) => *p,
    }
}

impl Globals {
    fn compile(&self, e: &Expr, scope: &mut Scope<'_>) -> Result<(Node, usize), DslError> {
        match e {
            Expr::Num(v) => Ok((Node::Const(*v), 1)),
            Expr::Name(name, pos) => {
                if let Some(d) = scope.lambdas.iter().rposition(|(n, _)| n == name) {
                    return Ok((Node::Bound(d), scope.lambdas[d].1));
                }
                if let Some((_, node, len)) = scope.args.iter().find(|(n, _, _)| n == name) {
                    return Ok((node.clone(), *len));
                }
                if let Some(v) = self.params.get(name) {
                    return Ok((Node::Const(*v), 1));
                }
                err(DslErrorKind::UnknownName, *pos, format!("unknown name `{name}`"))
            }
            Expr::SelfRef(pos) => match (scope.cell, scope.fn_limit) {
                (Some(c), None) => Ok((Node::Input(0), scope.net.dim(c))),
                _ => err(DslErrorKind::UnknownName, *pos, "`self` is only available in cell blocks".into()),
            },
            Expr::Input(k, pos) => {
                let c = match (scope.cell, scope.fn_limit) {
                    (Some(c), None) => c,
                    _ => return err(DslErrorKind::UnknownName, *pos, "`input` is only available in raw blocks".into()),
                };
                if !scope.raw {
                    return err(
                        DslErrorKind::AsymmetricAccess,
                        *pos,
                        "positional input access is only allowed in `raw cells` blocks; use an aggregate".into(),
                    );
                }
                let arrows = scope.net.input_arrows(c);
                if k + 1 >= arrows.len() {
                    return err(
                        DslErrorKind::Shape,
                        *pos,
                        format!("cell {} has {} inputs", scope.net.cell_name(c), arrows.len() - 1),
                    );
                }
                Ok((Node::Input(k + 1), scope.net.dim(scope.net.tail(arrows[k + 1]))))
            }
            Expr::Index(inner, k, pos) => {
                let (node, len) = self.compile(inner, scope)?;
                if len == 1 && *k == 0 {
                    Ok((node, 1))
                } else if *k < len {
                    Ok((Node::Index(Box::new(node), *k), 1))
                } else {
                    err(DslErrorKind::Shape, *pos, format!("index {k} out of range for length {len}"))
                }
            }
            Expr::Neg(inner) => {
                let (node, len) = self.compile(inner, scope)?;
                Ok((Node::Neg(Box::new(node)), len))
            }
            Expr::Bin(op, a, b, pos) => {
                let (na, la) = self.compile(a, scope)?;
                let (nb, lb) = self.compile(b, scope)?;
                if *op == Op::Pow && lb != 1 {
                    return err(DslErrorKind::Shape, *pos, "exponent must be a scalar".into());
                }
                let len = match (la, lb) {
                    (x, y) if x == y => x,
                    (1, y) => y,
                    (x, 1) => x,
                    (x, y) => return err(DslErrorKind::Shape, *pos, format!("length mismatch: {x} vs {y}")),
                };
                Ok((Node::Bin(*op, Box::new(na), Box::new(nb)), len))
            }
            Expr::Vector(items, pos) => {
                let mut nodes = Vec::with_capacity(items.len());
                for item in items {
                    let (n, len) = self.compile(item, scope)?;
                    if len != 1 {
                        return err(DslErrorKind::Shape, *pos, "vector entries must be scalars".into());
                    }
                    nodes.push(n);
                }
                if nodes.len() == 1 {
                    Ok((nodes.pop().expect("one entry"), 1))
                } else {
                    let len = nodes.len();
                    Ok((Node::Vector(nodes), len))
                }
            }
            Expr::Call(name, args, pos) => self.compile_call(name, args, *pos, scope),
        }
    }

    fn compile_call(
        &self,
        name: &str,
        args: &[Arg],
        pos: Pos,
        scope: &mut Scope<'_>,
    ) -> Result<(Node, usize), DslError> {
        if let Some((kind, indexed)) = agg_kind(name) {
            return self.compile_aggregate(name, kind, indexed, args, pos, scope);
        }
        let mut plain = Vec::with_capacity(args.len());
        for a in args {
            match a {
                Arg::Expr(e) => plain.push(e),
                Arg::Lambda(_, _, p) => {
                    return err(DslErrorKind::Syntax, *p, format!("`{name}` does not take a `u -> ...` argument"))
                }
            }
        }
        if let Some((f, arity)) = builtin(name) {
            if plain.len() != arity {
                return err(DslErrorKind::Shape, pos, format!("`{name}` takes {arity} argument(s)"));
            }
            let mut nodes = Vec::new();
            let mut lens = Vec::new();
            for e in plain {
                let (n, l) = self.compile(e, scope)?;
                nodes.push(n);
                lens.push(l);
            }
            let len = if f == Builtin::Dot {
                if lens[0] != lens[1] {
                    return err(DslErrorKind::Shape, pos, "`dot` needs equal lengths".into());
                }
                1
            } else {
                lens[0]
            };
            return Ok((Node::Call(f, nodes), len));
        }
        let def = match self.fns.get(name) {
            Some(d) if scope.fn_limit.is_none_or(|limit| d.order < limit) => d,
            _ => return err(DslErrorKind::UnknownName, pos, format!("unknown function `{name}`")),
        };
        if plain.len() != def.args.len() {
            return err(DslErrorKind::Shape, pos, format!("`{name}` takes {} argument(s)", def.args.len()));
        }
        let mut bound = Vec::with_capacity(plain.len());
        for (arg_name, e) in def.args.iter().zip(plain) {
            let (n, l) = self.compile(e, scope)?;
            bound.push((arg_name.clone(), n, l));
        }
        let mut inner = Scope {
            net: scope.net,
            cell: scope.cell,
            positions: scope.positions,
            raw: scope.raw,
            fn_limit: Some(def.order),
            lambdas: Vec::new(),
            args: bound,
        };
        self.compile(&def.body, &mut inner)
    }

    fn compile_aggregate(
        &self,
        name: &str,
        kind: AggKind,
        indexed: bool,
        args: &[Arg],
        pos: Pos,
        scope: &mut Scope<'_>,
    ) -> Result<(Node, usize), DslError> {
        let usage = if indexed {
            format!("usage: {name}(k, arrow_type, u -> expr)")
        } else {
            format!("usage: {name}(arrow_type, u -> expr)")
        };
        let cell = match (scope.cell, scope.fn_limit) {
            (Some(c), None) => c,
            _ => return err(DslErrorKind::UnknownName, pos, format!("`{name}` is only available in cell blocks")),
        };
        let (k, rest) = if indexed {
            match args.split_first() {
                Some((Arg::Expr(Expr::Num(k)), rest)) if *k >= 0.0 && *k == libm::floor(*k) => (*k as usize, rest),
                _ => return err(DslErrorKind::Syntax, pos, usage),
            }
        } else {
            (0, args)
        };
        let (type_name, type_pos, var, body) = match rest {
            [Arg::Expr(Expr::Name(t, tp)), Arg::Lambda(v, body, _)] => (t, *tp, v, body),
            _ => return err(DslErrorKind::Syntax, pos, usage),
        };
        let net = scope.net;
        let at = match net.arrow_type_id(type_name) {
            Some(t) if !net.arrow_types()[t.index()].internal.is_some() => t,
            _ => return err(DslErrorKind::UnknownArrowType, type_pos, format!("unknown arrow type `{type_name}`")),
        };
        let members = &scope.positions[at.index()];
        let Some(&first) = members.first() else {
            return err(
                DslErrorKind::MissingArrowType,
                type_pos,
                format!("cell {} has no `{type_name}` inputs", net.cell_name(cell)),
            );
        };
        let var_len = net.dim(net.tail(net.input_arrows(cell)[first]));
        scope.lambdas.push((var.clone(), var_len));
        let compiled = self.compile(body, scope);
        scope.lambdas.pop();
        let (body, len) = compiled?;
        let kind = match kind {
            AggKind::Esym(_) | AggKind::Psum(_) if len != 1 => {
                return err(DslErrorKind::Shape, pos, format!("`{name}` needs a scalar body"))
            }
            AggKind::Esym(_) => AggKind::Esym(k),
            AggKind::Psum(_) => AggKind::Psum(k.min(i32::MAX as usize) as i32),
            other => other,
        };
        Ok((Node::Agg { kind, arrow_type: at.index(), body: Box::new(body) }, len))
    }

    /// Compiles and evaluates an expression with no cell context.
    fn constant(&self, net: &TypedNetwork, e: &Expr) -> Result<Vec<f64>, DslError> {
        let mut scope =
            Scope { net, cell: None, positions: &[], raw: false, fn_limit: None, lambdas: Vec::new(), args: Vec::new() };
        let (node, len) = self.compile(e, &mut scope)?;
        let mut env = Env { inputs: &[], positions: &[], bound: Vec::new() };
        let v = eval(&node, &mut env).map_err(|op| {
            DslError::new(DslErrorKind::Domain, expr_pos(e), format!("{op} outside its domain in constant"))
        })?;
        let mut out = alloc::vec![0.0; len];
        v.write(&mut out);
        Ok(out)
    }
}

struct Compiled {
    globals: Globals,
    defs: Vec<Option<(Def, Pos)>>,
    raw: Vec<(CellId, Node, Vec<f64>)>,
}

fn compile_source(src: &str, net: &TypedNetwork, overrides: &[(&str, f64)]) -> Result<Compiled, DslError> {
    let items = parse(src)?;
    let classes = net.input_classes();
    let n_classes = classes.iter().max().map_or(0, |m| m + 1);
    let mut globals = Globals { params: BTreeMap::new(), param_order: Vec::new(), fns: BTreeMap::new() };
    let mut defs: Vec<Option<(Def, Pos)>> = (0..n_classes).map(|_| None).collect();
    let mut raw = Vec::new();
    let lookup = |name: &str, pos: Pos| {
        net.cell_id(name)
            .ok_or_else(|| DslError::new(DslErrorKind::UnknownCell, pos, format!("unknown cell `{name}`")))
    };
    for item in &items {
        match item {
            Item::Param { name, value, pos } => {
                if globals.params.contains_key(name) {
                    return err(DslErrorKind::Redefinition, *pos, format!("parameter `{name}` declared twice"));
                }
                let v = match overrides.iter().find(|(n, _)| n == name) {
                    Some((_, v)) => *v,
                    None => {
                        let v = globals.constant(net, value)?;
                        if v.len() != 1 {
                            return err(DslErrorKind::Shape, *pos, "parameters must be scalars".into());
                        }
                        v[0]
                    }
                };
                globals.params.insert(name.clone(), v);
                globals.param_order.push(name.clone());
            }
            Item::Fn { name, args, body, pos } => {
                if globals.fns.contains_key(name) || builtin(name).is_some() || agg_kind(name).is_some() {
                    return err(DslErrorKind::Redefinition, *pos, format!("function `{name}` already defined"));
                }
                let order = globals.fns.len();
                globals.fns.insert(name.clone(), FnDef { args: args.clone(), body: body.clone(), order });
            }
            Item::Cells { cells, equations, pos } => {
                let mut done: Vec<usize> = Vec::new();
                for (name, cpos) in cells {
                    let c = lookup(name, *cpos)?;
                    let class = classes[c.index()];
                    if done.contains(&class) {
                        continue;
                    }
                    done.push(class);
                    let def = compile_cell_block(&globals, net, c, equations, *pos)?;
                    match &defs[class] {
                        Some((old, old_pos)) if *old != def => {
                            return err(
                                DslErrorKind::Redefinition,
                                *cpos,
                                format!(
                                    "cell `{name}` belongs to a class already defined differently at {}:{}",
                                    old_pos.line, old_pos.col
                                ),
                            );
                        }
                        Some(_) => {}
                        None => defs[class] = Some((def, *pos)),
                    }
                }
            }
            Item::Raw { cell: (name, cpos), phi, dir, pos } => {
                let c = lookup(name, *cpos)?;
                let positions = positions_of(net, c);
                let mut scope = Scope {
                    net,
                    cell: Some(c),
                    positions: &positions,
                    raw: true,
                    fn_limit: None,
                    lambdas: Vec::new(),
                    args: Vec::new(),
                };
                let (node, len) = globals.compile(phi, &mut scope)?;
                if len != 1 {
                    return err(DslErrorKind::Shape, *pos, "`phi` must be a scalar".into());
                }
                let mut y = globals.constant(net, dir)?;
                if y.len() == 1 && net.dim(c) > 1 {
                    y = alloc::vec![y[0]; net.dim(c)];
                }
                if y.len() != net.dim(c) {
                    return err(DslErrorKind::Shape, *pos, format!("`dir` must have length {}", net.dim(c)));
                }
                raw.push((c, node, y));
            }
        }
    }
    for (name, _) in overrides {
        if !globals.params.contains_key(*name) {
            return err(DslErrorKind::UnknownParameter, Pos::default(), format!("no parameter named `{name}`"));
        }
    }
    Ok(Compiled { globals, defs, raw })
}

fn compile_cell_block(
    globals: &Globals,
    net: &TypedNetwork,
    c: CellId,
    equations: &[super::parser::Equation],
    pos: Pos,
) -> Result<Def, DslError> {
    let positions = positions_of(net, c);
    let mut scope =
        Scope { net, cell: Some(c), positions: &positions, raw: false, fn_limit: None, lambdas: Vec::new(), args: Vec::new() };
    let d = net.dim(c);
    if equations.is_empty() {
        return err(DslErrorKind::Syntax, pos, "cell block defines no `dx`".into());
    }
    if equations.iter().any(|e| e.component.is_none()) {
        if equations.len() != 1 {
            return err(DslErrorKind::Redefinition, equations[1].pos, "`dx` assigned more than once".into());
        }
        let (node, len) = globals.compile(&equations[0].value, &mut scope)?;
        if len != d {
            return err(
                DslErrorKind::Shape,
                equations[0].pos,
                format!("`dx` has length {len}, cell {} has dimension {d}", net.cell_name(c)),
            );
        }
        return Ok(Def::Whole(node));
    }
    let mut comps: Vec<Option<Node>> = (0..d).map(|_| None).collect();
    for eq in equations {
        let k = eq.component.expect("checked above");
        if k >= d {
            return err(DslErrorKind::Shape, eq.pos, format!("component {k} out of range for dimension {d}"));
        }
        let (node, len) = globals.compile(&eq.value, &mut scope)?;
        if len != 1 {
            return err(DslErrorKind::Shape, eq.pos, "`dx[k]` must be a scalar".into());
        }
        if comps[k].replace(node).is_some() {
            return err(DslErrorKind::Redefinition, eq.pos, format!("`dx[{k}]` assigned twice"));
        }
    }
    let comps = comps.into_iter().enumerate().map(|(k, n)| {
        n.ok_or_else(|| DslError::new(DslErrorKind::UndefinedClass, pos, format!("`dx[{k}]` is not defined")))
    });
    Ok(Def::Components(comps.collect::<Result<_, _>>()?))
}

/// Parses and compiles a field for `net`.
pub fn parse_field(src: &str, net: &TypedNetwork) -> Result<FieldSpec, DslError> {
    parse_field_with(src, net, &[])
}

/// [`parse_field`] with parameter values overridden by name.
pub fn parse_field_with(src: &str, net: &TypedNetwork, overrides: &[(&str, f64)]) -> Result<FieldSpec, DslError> {
    let compiled = compile_source(src, net, overrides)?;
    let classes = net.input_classes();
    if compiled.raw.is_empty() {
        for c in net.cells() {
            if compiled.defs[classes[c.index()]].is_none() {
                return err(
                    DslErrorKind::UndefinedClass,
                    Pos::default(),
                    format!("no definition for the input class of cell `{}`", net.cell_name(c)),
                );
            }
        }
    }
    let raw = if compiled.raw.is_empty() {
        None
    } else {
        let terms = compiled
            .raw
            .into_iter()
            .map(|(c, phi, y)| {
                let f: Box<dyn RawFunction> = Box::new(RawDsl { phi, positions: positions_of(net, c) });
                (c, f, y)
            })
            .collect();
        Some(symmetrize(net, terms).expect("representatives and directions checked at compile time"))
    };
    let params = compiled.globals.param_order.iter().map(|n| (n.clone(), compiled.globals.params[n])).collect();
    Ok(FieldSpec {
        params,
        class_of: classes,
        defs: compiled.defs.into_iter().map(|d| d.map(|(d, _)| d)).collect(),
        positions: net.cells().map(|c| positions_of(net, c)).collect(),
        raw,
    })
}

/// Compiles only the raw blocks of `src` and applies each one verbatim to
/// every cell input isomorphic to its representative.
pub fn parse_unsymmetrized(src: &str, net: &TypedNetwork) -> Result<UnsymmetrizedField, DslError> {
    let compiled = compile_source(src, net, &[])?;
    let mut terms: Vec<Vec<(RawDsl, Vec<f64>)>> = net.cells().map(|_| Vec::new()).collect();
    for (rep, phi, y) in compiled.raw {
        for c in net.cells().filter(|&c| net.input_isomorphic(rep, c)) {
            terms[c.index()].push((RawDsl { phi: phi.clone(), positions: positions_of(net, c) }, y.clone()));
        }
    }
    Ok(UnsymmetrizedField { terms })
}
