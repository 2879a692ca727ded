use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::lexer::{lex, Tok};
use super::{DslError, DslErrorKind, Pos};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub(super) enum Expr {
    Num(f64),
    Name(String, Pos),
    SelfRef(Pos),
    Input(usize, Pos),
    Index(Box<Expr>, usize, Pos),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>, Pos),
    Call(String, Vec<Arg>, Pos),
    Vector(Vec<Expr>, Pos),
}

#[derive(Clone, Debug, PartialEq)]
pub(super) enum Arg {
    Expr(Expr),
    Lambda(String, Expr, Pos),
}

#[derive(Clone, Debug, PartialEq)]
pub(super) struct Equation {
    pub component: Option<usize>,
    pub value: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub(super) enum Item {
    Param { name: String, value: Expr, pos: Pos },
    Fn { name: String, args: Vec<String>, body: Expr, pos: Pos },
    Cells { cells: Vec<(String, Pos)>, equations: Vec<Equation>, pos: Pos },
    Raw { cell: (String, Pos), phi: Expr, dir: Expr, pos: Pos },
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

pub(super) fn parse(src: &str) -> Result<Vec<Item>, DslError> {
    let mut p = Parser { toks: lex(src)?, at: 0 };
    let mut items = Vec::new();
    while p.peek() != &Tok::Eof {
        items.push(p.item()?);
    }
    Ok(items)
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => alloc::format!("`{s}`"),
        Tok::Num(_, s) => alloc::format!("`{s}`"),
        Tok::Str(s) => alloc::format!("\"{s}\""),
        Tok::Sym(s) => alloc::format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, DslError> {
        Err(DslError::new(
            DslErrorKind::Syntax,
            self.pos(),
            alloc::format!("expected {expected}, found {}", describe(self.peek())),
        ))
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), DslError> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.error(&alloc::format!("`{sym}`"))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DslError> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(&alloc::format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<String, DslError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("a name"),
        }
    }

    fn index(&mut self) -> Result<usize, DslError> {
        match self.peek().clone() {
            Tok::Num(v, _) if v >= 0.0 && v == libm::floor(v) && v < 1e9 => {
                self.bump();
                Ok(v as usize)
            }
            _ => self.error("a non-negative integer"),
        }
    }

    fn cell_ref(&mut self) -> Result<(String, Pos), DslError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Str(s) | Tok::Num(_, s) => {
                self.bump();
                Ok((s, pos))
            }
            _ => self.error("a cell id"),
        }
    }

    fn item(&mut self) -> Result<Item, DslError> {
        let pos = self.pos();
        if self.is_keyword("param") {
            self.bump();
            let name = self.ident()?;
            self.expect("=")?;
            let value = self.expr()?;
            self.expect(";")?;
            Ok(Item::Param { name, value, pos })
        } else if self.is_keyword("fn") {
            self.bump();
            let name = self.ident()?;
            self.expect("(")?;
            let mut args = Vec::new();
            if !self.eat(")") {
                loop {
                    args.push(self.ident()?);
                    if self.eat(")") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            self.expect("=")?;
            let body = self.expr()?;
            self.expect(";")?;
            Ok(Item::Fn { name, args, body, pos })
        } else if self.is_keyword("cells") {
            self.bump();
            let mut cells = alloc::vec![self.cell_ref()?];
            while self.eat(",") {
                cells.push(self.cell_ref()?);
            }
            self.expect("{")?;
            let mut equations = Vec::new();
            while !self.eat("}") {
                let pos = self.pos();
                self.keyword("dx")?;
                let component = if self.eat("[") {
                    let k = self.index()?;
                    self.expect("]")?;
                    Some(k)
                } else {
                    None
                };
                self.expect("=")?;
                let value = self.expr()?;
                self.expect(";")?;
                equations.push(Equation { component, value, pos });
            }
            Ok(Item::Cells { cells, equations, pos })
        } else if self.is_keyword("raw") {
            self.bump();
            self.keyword("cells")?;
            let cell = self.cell_ref()?;
            self.expect("{")?;
            let (mut phi, mut dir) = (None, None);
            while !self.eat("}") {
                let at = self.pos();
                let is_phi = if self.is_keyword("phi") {
                    true
                } else if self.is_keyword("dir") {
                    false
                } else {
                    return self.error("`phi` or `dir`");
                };
                self.bump();
                self.expect("=")?;
                let e = self.expr()?;
                self.expect(";")?;
                let slot = if is_phi { &mut phi } else { &mut dir };
                if slot.replace(e).is_some() {
                    return Err(DslError::new(DslErrorKind::Redefinition, at, "repeated statement in raw block".into()));
                }
            }
            let phi = phi.ok_or_else(|| DslError::new(DslErrorKind::Syntax, pos, "raw block needs `phi = ...;`".into()))?;
            let dir = dir.unwrap_or(Expr::Num(1.0));
            Ok(Item::Raw { cell, phi, dir, pos })
        } else {
            self.error("`param`, `fn`, `cells` or `raw`")
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            let pos = self.pos();
            let op = if self.eat("+") {
                Op::Add
            } else if self.eat("-") {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let pos = self.pos();
            let op = if self.eat("*") {
                Op::Mul
            } else if self.eat("/") {
                Op::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), pos);
        }
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        if self.eat("-") {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat("+") {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.postfix()?;
        let pos = self.pos();
        if self.eat("^") {
            let exp = self.unary()?;
            Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp), pos))
        } else {
            Ok(base)
        }
    }

    fn postfix(&mut self) -> Result<Expr, DslError> {
        let mut e = self.primary()?;
        loop {
            let pos = self.pos();
            if !self.eat("[") {
                return Ok(e);
            }
            let k = self.index()?;
            self.expect("]")?;
            e = Expr::Index(Box::new(e), k, pos);
        }
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(v, _) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Sym("[") => {
                self.bump();
                let mut items = alloc::vec![self.expr()?];
                while self.eat(",") {
                    items.push(self.expr()?);
                }
                self.expect("]")?;
                Ok(Expr::Vector(items, pos))
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "self" => Ok(Expr::SelfRef(pos)),
                    "input" => {
                        self.expect("[")?;
                        let k = self.index()?;
                        self.expect("]")?;
                        Ok(Expr::Input(k, pos))
                    }
                    _ if self.eat("(") => {
                        let mut args = Vec::new();
                        if !self.eat(")") {
                            loop {
                                args.push(self.arg()?);
                                if self.eat(")") {
                                    break;
                                }
                                self.expect(",")?;
                            }
                        }
                        Ok(Expr::Call(name, args, pos))
                    }
                    _ => Ok(Expr::Name(name, pos)),
                }
            }
            _ => self.error("an expression"),
        }
    }

    fn arg(&mut self) -> Result<Arg, DslError> {
        if matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) == &Tok::Sym("->") {
            let pos = self.pos();
            let var = self.ident()?;
            self.expect("->")?;
            Ok(Arg::Lambda(var, self.expr()?, pos))
        } else {
            Ok(Arg::Expr(self.expr()?))
        }
    }
}
