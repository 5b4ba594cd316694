use super::ast::{Cmp, Expr, Formula, Operand, StateTerm, Term, Value};
use crate::ids::PointPos;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BltlError {
    #[error("syntax error at column {0}: {1}")]
    Syntax(usize, String),
    #[error("unknown operator '{0}'")]
    UnknownOperator(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("next() may not nest")]
    NestedNext,
    #[error("next() is not supported under GF")]
    NextUnderGf,
    #[error("bounds must be positive")]
    ZeroBound,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Cmp(Cmp),
    And,
    Or,
    Not,
    Implies,
    Eof,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, BltlError> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                toks.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, col));
                i += 1;
            }
            '[' => {
                toks.push((Tok::LBracket, col));
                i += 1;
            }
            ']' => {
                toks.push((Tok::RBracket, col));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, col));
                i += 1;
            }
            '=' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((Tok::Cmp(Cmp::Eq), col));
                    i += 2;
                } else if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Implies, col));
                    i += 2;
                } else {
                    return Err(BltlError::Syntax(col, "expected '==' or '=>'".into()));
                }
            }
            '!' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((Tok::Cmp(Cmp::Ne), col));
                    i += 2;
                } else {
                    toks.push((Tok::Not, col));
                    i += 1;
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((Tok::Cmp(Cmp::Le), col));
                    i += 2;
                } else {
                    toks.push((Tok::Cmp(Cmp::Lt), col));
                    i += 1;
                }
            }
            '>' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((Tok::Cmp(Cmp::Ge), col));
                    i += 2;
                } else {
                    toks.push((Tok::Cmp(Cmp::Gt), col));
                    i += 1;
                }
            }
            '&' => {
                if bytes.get(i + 1) == Some(&b'&') {
                    toks.push((Tok::And, col));
                    i += 2;
                } else {
                    return Err(BltlError::Syntax(col, "expected '&&'".into()));
                }
            }
            '|' => {
                if bytes.get(i + 1) == Some(&b'|') {
                    toks.push((Tok::Or, col));
                    i += 2;
                } else {
                    return Err(BltlError::Syntax(col, "expected '||'".into()));
                }
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = i;
                while i < bytes.len() {
                    let c2 = bytes[i] as char;
                    if c2.is_ascii_alphanumeric() || c2 == '_' {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let s = &text[start..i];
                if s.bytes().all(|b| b.is_ascii_digit()) {
                    let n: i64 = s
                        .parse()
                        .map_err(|_| BltlError::Syntax(col, format!("integer '{s}' out of range")))?;
                    toks.push((Tok::Int(n), col));
                } else {
                    toks.push((Tok::Ident(s.to_string()), col));
                }
            }
            other => {
                return Err(BltlError::Syntax(col, format!("unexpected character '{other}'")));
            }
        }
    }
    toks.push((Tok::Eof, text.len() + 1));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos.min(self.toks.len() - 1)].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos.min(self.toks.len() - 1)].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos.min(self.toks.len() - 1)].0.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), BltlError> {
        if self.peek() == &t {
            self.bump();
            Ok(())
        } else {
            Err(BltlError::Syntax(self.col(), format!("expected {what}")))
        }
    }

    fn positive(&mut self, what: &str) -> Result<u32, BltlError> {
        match self.bump() {
            Tok::Int(n) if n > 0 && n <= u32::MAX as i64 => Ok(n as u32),
            Tok::Int(_) => Err(BltlError::ZeroBound),
            _ => Err(BltlError::Syntax(self.col(), format!("expected {what}"))),
        }
    }

    /// A component name, possibly with one parenthesised suffix as in
    /// `U_IR(01C)`.
    fn component_name(&mut self) -> Result<String, BltlError> {
        let mut name = match self.bump() {
            Tok::Ident(s) => s,
            Tok::Int(n) => n.to_string(),
            _ => return Err(BltlError::Syntax(self.col(), "expected a component name".into())),
        };
        if self.peek() == &Tok::LParen {
            self.bump();
            let inner = match self.bump() {
                Tok::Ident(s) => s,
                Tok::Int(n) => n.to_string(),
                _ => return Err(BltlError::Syntax(self.col(), "expected a name inside '('".into())),
            };
            self.expect(Tok::RParen, "')'")?;
            name = format!("{name}({inner})");
        }
        Ok(name)
    }

    fn term(&mut self, in_next: bool) -> Result<Term, BltlError> {
        let kw = match self.bump() {
            Tok::Ident(s) => s,
            _ => return Err(BltlError::Syntax(self.col(), "expected a state term".into())),
        };
        if kw == "next" {
            if in_next {
                return Err(BltlError::NestedNext);
            }
            self.expect(Tok::LParen, "'('")?;
            let mut t = self.term(true)?;
            self.expect(Tok::RParen, "')'")?;
            t.next = true;
            return Ok(t);
        }
        self.expect(Tok::LParen, "'('")?;
        let name = self.component_name()?;
        self.expect(Tok::RParen, "')'")?;
        let base = match kw.as_str() {
            "trains" => StateTerm::Trains(name),
            "point" => StateTerm::Point(name),
            "route" => StateTerm::Route(name),
            "sub" => StateTerm::Sub(name),
            "uir" => StateTerm::Uir(name),
            other => return Err(BltlError::UnknownOperator(other.to_string())),
        };
        Ok(Term { base, next: false })
    }

    fn operand(&mut self) -> Result<Operand, BltlError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Operand::Lit(Value::Int(n)))
            }
            Tok::Ident(s) => match s.as_str() {
                "set" => {
                    self.bump();
                    Ok(Operand::Lit(Value::Route(true)))
                }
                "unset" => {
                    self.bump();
                    Ok(Operand::Lit(Value::Route(false)))
                }
                "free" => {
                    self.bump();
                    Ok(Operand::Lit(Value::Lock(false)))
                }
                "locked" => {
                    self.bump();
                    Ok(Operand::Lit(Value::Lock(true)))
                }
                "left" | "normal" => {
                    self.bump();
                    Ok(Operand::Lit(Value::Point(PointPos::Normal)))
                }
                "right" | "reverse" => {
                    self.bump();
                    Ok(Operand::Lit(Value::Point(PointPos::Reverse)))
                }
                _ => Ok(Operand::Term(self.term(false)?)),
            },
            _ => Err(BltlError::Syntax(self.col(), "expected a value or a state term".into())),
        }
    }

    fn atom(&mut self) -> Result<Expr, BltlError> {
        let lhs = self.term(false)?;
        let cmp = match self.bump() {
            Tok::Cmp(c) => c,
            _ => return Err(BltlError::Syntax(self.col(), "expected a comparison".into())),
        };
        let rhs = self.operand()?;
        check_atom_types(&lhs, cmp, &rhs)?;
        Ok(Expr::Atom { lhs, cmp, rhs })
    }

    fn primary(&mut self) -> Result<Expr, BltlError> {
        match self.peek() {
            Tok::LParen => {
                self.bump();
                let e = self.implies()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Not => {
                self.bump();
                Ok(Expr::Not(Box::new(self.primary()?)))
            }
            _ => self.atom(),
        }
    }

    fn conjunction(&mut self) -> Result<Expr, BltlError> {
        let mut e = self.primary()?;
        while self.peek() == &Tok::And {
            self.bump();
            e = Expr::And(Box::new(e), Box::new(self.primary()?));
        }
        Ok(e)
    }

    fn disjunction(&mut self) -> Result<Expr, BltlError> {
        let mut e = self.conjunction()?;
        while self.peek() == &Tok::Or {
            self.bump();
            e = Expr::Or(Box::new(e), Box::new(self.conjunction()?));
        }
        Ok(e)
    }

    fn implies(&mut self) -> Result<Expr, BltlError> {
        let lhs = self.disjunction()?;
        if self.peek() == &Tok::Implies {
            self.bump();
            let rhs = self.implies()?;
            Ok(Expr::Implies(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }
}

fn term_is_int(t: &Term) -> bool {
    matches!(t.base, StateTerm::Trains(_))
}

fn check_atom_types(lhs: &Term, cmp: Cmp, rhs: &Operand) -> Result<(), BltlError> {
    let compatible = match rhs {
        Operand::Term(rt) => term_kind(lhs) == term_kind(rt),
        Operand::Lit(v) => matches!(
            (term_kind(lhs), v),
            (TermKindTag::Int, Value::Int(_))
                | (TermKindTag::Point, Value::Point(_))
                | (TermKindTag::Route, Value::Route(_))
                | (TermKindTag::Lock, Value::Lock(_))
        ),
    };
    if !compatible {
        return Err(BltlError::TypeMismatch(format!(
            "cannot compare {lhs} with {rhs}"
        )));
    }
    if cmp.ordered() {
        let ok = term_is_int(lhs)
            && match rhs {
                Operand::Term(rt) => term_is_int(rt),
                Operand::Lit(v) => matches!(v, Value::Int(_)),
            };
        if !ok {
            return Err(BltlError::TypeMismatch(format!(
                "ordered comparison '{}' needs train counts",
                cmp.symbol()
            )));
        }
    }
    Ok(())
}

#[derive(Debug, PartialEq, Eq)]
enum TermKindTag {
    Int,
    Point,
    Route,
    Lock,
}

fn term_kind(t: &Term) -> TermKindTag {
    match t.base {
        StateTerm::Trains(_) => TermKindTag::Int,
        StateTerm::Point(_) => TermKindTag::Point,
        StateTerm::Route(_) => TermKindTag::Route,
        StateTerm::Sub(_) | StateTerm::Uir(_) => TermKindTag::Lock,
    }
}

/// Parse one formula: `G[n] expr` or `GF[n,k] expr`. Next-terms bind
/// tightest, then comparisons, `!`, `&&`, `||`, `=>`.
pub fn parse_formula(text: &str) -> Result<Formula, BltlError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let op = match p.bump() {
        Tok::Ident(s) => s,
        _ => return Err(BltlError::Syntax(1, "expected 'G' or 'GF'".into())),
    };
    let formula = match op.as_str() {
        "G" => {
            p.expect(Tok::LBracket, "'['")?;
            let bound = p.positive("a bound")?;
            p.expect(Tok::RBracket, "']'")?;
            let body = p.implies()?;
            Formula::Globally { bound, body }
        }
        "GF" => {
            p.expect(Tok::LBracket, "'['")?;
            let bound = p.positive("a bound")?;
            p.expect(Tok::Comma, "','")?;
            let window = p.positive("a window")?;
            p.expect(Tok::RBracket, "']'")?;
            let body = p.implies()?;
            if body.has_next() {
                return Err(BltlError::NextUnderGf);
            }
            Formula::GloballyFinally { bound, window, body }
        }
        other => return Err(BltlError::UnknownOperator(other.to_string())),
    };
    if p.peek() != &Tok::Eof {
        return Err(BltlError::Syntax(p.col(), "unexpected trailing input".into()));
    }
    Ok(formula)
}

/// Parse a property file: one formula per line, `#` comments.
pub fn parse_property_file(text: &str) -> Result<Vec<Formula>, BltlError> {
    let mut out = Vec::new();
    for raw in text.lines() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.push(parse_formula(line)?);
    }
    Ok(out)
}
