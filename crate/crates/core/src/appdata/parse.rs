use super::ast::{
    Act, Action, ApplicationData, Condition, PointCommandRule, ReleaseRule, RouteRequestRule, Test,
};
use crate::ids::{ComponentId, Kind, PointPos};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AppDataError {
    #[error("syntax error at {line}:{col}: expected {expected}, found {found}")]
    Syntax { line: u32, col: u32, expected: String, found: String },
    #[error("duplicate rule for {0}")]
    DuplicateRule(String),
    #[error("{tag:?} is not applicable to {name} ({kind}) at line {line}")]
    KindMismatch { name: String, kind: Kind, tag: String, line: u32 },
    #[error("unsupported construct *{0} at line {1}; this dialect covers route requests (*Q_R), point rules (*P_..N/R), release lines and *sub_free_ blocks")]
    UnsupportedConstruct(String, u32),
    #[error("route request *Q_R({0}) must contain exactly one `{1} s` action")]
    BadRouteRequest(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Star,
    Comma,
    If,
    Then,
    Ident(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Star => "'*'".into(),
            Tok::Comma => "','".into(),
            Tok::If => "'if'".into(),
            Tok::Then => "'then'".into(),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<Vec<Spanned>, AppDataError> {
    let mut toks = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '/' => {
                let (l, co) = (line, col);
                chars.next();
                col += 1;
                if chars.peek() == Some(&'/') {
                    while let Some(&c2) = chars.peek() {
                        if c2 == '\n' {
                            break;
                        }
                        chars.next();
                        col += 1;
                    }
                } else {
                    return Err(AppDataError::Syntax {
                        line: l,
                        col: co,
                        expected: "'//' comment".into(),
                        found: "'/'".into(),
                    });
                }
            }
            '*' => {
                toks.push(Spanned { tok: Tok::Star, line, col });
                chars.next();
                col += 1;
            }
            ',' => {
                toks.push(Spanned { tok: Tok::Comma, line, col });
                chars.next();
                col += 1;
            }
            c if is_ident_char(c) => {
                let (l, co) = (line, col);
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if is_ident_char(c2) {
                        s.push(c2);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                // One parenthesised suffix, as in U_IR(09C) or Q_R(CGC_011).
                if chars.peek() == Some(&'(') {
                    s.push('(');
                    chars.next();
                    col += 1;
                    while let Some(&c2) = chars.peek() {
                        if is_ident_char(c2) {
                            s.push(c2);
                            chars.next();
                            col += 1;
                        } else {
                            break;
                        }
                    }
                    if chars.peek() == Some(&')') {
                        s.push(')');
                        chars.next();
                        col += 1;
                    } else {
                        return Err(AppDataError::Syntax {
                            line,
                            col,
                            expected: "')'".into(),
                            found: chars.peek().map_or("end of input".into(), |c| format!("'{c}'")),
                        });
                    }
                }
                let tok = match s.as_str() {
                    "if" => Tok::If,
                    "then" => Tok::Then,
                    _ => Tok::Ident(s),
                };
                toks.push(Spanned { tok, line: l, col: co });
            }
            other => {
                return Err(AppDataError::Syntax {
                    line,
                    col,
                    expected: "a rule".into(),
                    found: format!("'{other}'"),
                });
            }
        }
    }
    toks.push(Spanned { tok: Tok::Eof, line, col });
    Ok(toks)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek_at(&self, off: usize) -> &Spanned {
        &self.toks[(self.pos + off).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos.min(self.toks.len() - 1)].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, expected: &str) -> AppDataError {
        let t = self.peek();
        AppDataError::Syntax {
            line: t.line,
            col: t.col,
            expected: expected.into(),
            found: t.tok.describe(),
        }
    }

    fn expect_if(&mut self) -> Result<(), AppDataError> {
        match self.peek().tok {
            Tok::If => {
                self.bump();
                Ok(())
            }
            _ => Err(self.err_here("'if'")),
        }
    }

    /// Classify an appdata ident; signals never occur in application data.
    fn subject(&self, name: &str, line: u32) -> Result<ComponentId, AppDataError> {
        let id = ComponentId::infer(name);
        if id.kind == Kind::Signal {
            return Err(AppDataError::Syntax {
                line,
                col: 0,
                expected: "a component name (R_/P_/U_/T_ prefix)".into(),
                found: format!("'{name}'"),
            });
        }
        Ok(id)
    }

    /// `subject tag` pairs; commas between pairs are optional (the listings
    /// omit them at some line breaks). A pair whose following token is `if`
    /// starts the next release line and is not consumed.
    fn cond_list(&mut self, restrict_free: bool) -> Result<Vec<Condition>, AppDataError> {
        let mut conds = Vec::new();
        loop {
            while self.peek().tok == Tok::Comma {
                self.bump();
            }
            let (subj_name, line) = match &self.peek().tok {
                Tok::Ident(s) => (s.clone(), self.peek().line),
                _ => break,
            };
            let tag = match &self.peek_at(1).tok {
                Tok::Ident(t) if Test::from_tag(t).is_some() => t.clone(),
                _ => break,
            };
            if self.peek_at(2).tok == Tok::If {
                break;
            }
            self.bump();
            self.bump();
            let test = Test::from_tag(&tag).unwrap();
            if restrict_free && test != Test::CompFree {
                return Err(AppDataError::Syntax {
                    line,
                    col: 0,
                    expected: "'f' (sub_free blocks list free subroutes)".into(),
                    found: format!("'{tag}'"),
                });
            }
            let subject = self.subject(&subj_name, line)?;
            if !test.applies_to(subject.kind) {
                return Err(AppDataError::KindMismatch {
                    name: subject.name,
                    kind: subject.kind,
                    tag,
                    line,
                });
            }
            conds.push(Condition { subject, test });
        }
        if conds.is_empty() {
            return Err(self.err_here("at least one condition"));
        }
        Ok(conds)
    }

    fn act_list(&mut self) -> Result<Vec<Action>, AppDataError> {
        let mut acts = Vec::new();
        loop {
            while self.peek().tok == Tok::Comma {
                self.bump();
            }
            let (subj_name, line) = match &self.peek().tok {
                Tok::Ident(s) => (s.clone(), self.peek().line),
                _ => break,
            };
            let tag = match &self.peek_at(1).tok {
                Tok::Ident(t) if Act::from_tag(t).is_some() => t.clone(),
                _ => break,
            };
            // `X f if ...` after the action list is the next release line;
            // 'f' is not an action tag so the loop stops there naturally.
            if self.peek_at(2).tok == Tok::If {
                break;
            }
            self.bump();
            self.bump();
            let act = Act::from_tag(&tag).unwrap();
            let subject = self.subject(&subj_name, line)?;
            if !act.applies_to(subject.kind) {
                return Err(AppDataError::KindMismatch {
                    name: subject.name,
                    kind: subject.kind,
                    tag,
                    line,
                });
            }
            acts.push(Action { subject, act });
        }
        if acts.is_empty() {
            return Err(self.err_here("at least one action"));
        }
        Ok(acts)
    }
}

/// Parse an SSI-dialect document into an [`ApplicationData`] AST.
///
/// The grammar covers exactly the constructs exercised by the bundled data:
/// `*Q_R(name) if ... then ...`, `*P_<id>N|R conds`, `target f if conds`
/// and `*sub_free_<id>` blocks (desugared to one release rule for
/// `U_IR(<id>)`). `//` comments are stripped; whitespace and newlines are
/// insignificant; commas between list items are optional.
pub fn parse_appdata(text: &str) -> Result<ApplicationData, AppDataError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let mut data = ApplicationData::default();

    loop {
        match p.peek().tok.clone() {
            Tok::Eof => break,
            Tok::Star => {
                let star_line = p.peek().line;
                p.bump();
                let name = match p.bump() {
                    Spanned { tok: Tok::Ident(s), .. } => s,
                    other => {
                        return Err(AppDataError::Syntax {
                            line: other.line,
                            col: other.col,
                            expected: "a block name after '*'".into(),
                            found: other.tok.describe(),
                        })
                    }
                };
                if let Some(inner) = name.strip_prefix("Q_R(").and_then(|s| s.strip_suffix(')')) {
                    let route = ComponentId::route(format!("R_{inner}"));
                    p.expect_if()?;
                    let conditions = p.cond_list(false)?;
                    match p.peek().tok {
                        Tok::Then => {
                            p.bump();
                        }
                        _ => return Err(p.err_here("'then'")),
                    }
                    let actions = p.act_list()?;
                    let setters: Vec<_> = actions
                        .iter()
                        .filter(|a| a.act == Act::SetRoute)
                        .collect();
                    if setters.len() != 1 || setters[0].subject != route {
                        return Err(AppDataError::BadRouteRequest(
                            inner.to_string(),
                            route.name.clone(),
                        ));
                    }
                    if data.route_requests.contains_key(&route.name) {
                        return Err(AppDataError::DuplicateRule(route.name.clone()));
                    }
                    data.note_components(conditions.iter().map(|c| &c.subject));
                    data.note_components(actions.iter().map(|a| &a.subject));
                    data.components.insert(route.clone());
                    data.route_requests.insert(
                        route.name.clone(),
                        RouteRequestRule { route, conditions, actions },
                    );
                } else if let Some(id) = name.strip_prefix("sub_free_") {
                    let target = ComponentId::uir(format!("U_IR({id})"));
                    let conditions = p.cond_list(true)?;
                    if data.releases.contains_key(&target.name) {
                        return Err(AppDataError::DuplicateRule(target.name.clone()));
                    }
                    data.note_components(conditions.iter().map(|c| &c.subject));
                    data.components.insert(target.clone());
                    data.releases
                        .insert(target.name.clone(), ReleaseRule { target, conditions });
                } else if name.starts_with("P_") && (name.ends_with('N') || name.ends_with('R')) {
                    let position = if name.ends_with('N') { PointPos::Normal } else { PointPos::Reverse };
                    let point = ComponentId::point(name[..name.len() - 1].to_string());
                    let conditions = p.cond_list(false)?;
                    let key = (point.name.clone(), position);
                    if data.point_commands.contains_key(&key) {
                        return Err(AppDataError::DuplicateRule(format!(
                            "{}{}",
                            point.name,
                            if position == PointPos::Normal { "N" } else { "R" }
                        )));
                    }
                    data.note_components(conditions.iter().map(|c| &c.subject));
                    data.components.insert(point.clone());
                    data.point_commands
                        .insert(key, PointCommandRule { point, position, conditions });
                } else {
                    return Err(AppDataError::UnsupportedConstruct(name, star_line));
                }
            }
            Tok::Ident(name) => {
                // Release line: `target f if conds`.
                let line = p.peek().line;
                p.bump();
                let target = p.subject(&name, line)?;
                if target.kind != Kind::Subroute && target.kind != Kind::Uir {
                    return Err(AppDataError::KindMismatch {
                        name: target.name,
                        kind: target.kind,
                        tag: "f (release line)".into(),
                        line,
                    });
                }
                match p.bump() {
                    Spanned { tok: Tok::Ident(t), .. } if t == "f" => {}
                    other => {
                        return Err(AppDataError::Syntax {
                            line: other.line,
                            col: other.col,
                            expected: "'f'".into(),
                            found: other.tok.describe(),
                        })
                    }
                }
                p.expect_if()?;
                let conditions = p.cond_list(false)?;
                if data.releases.contains_key(&target.name) {
                    return Err(AppDataError::DuplicateRule(target.name.clone()));
                }
                data.note_components(conditions.iter().map(|c| &c.subject));
                data.components.insert(target.clone());
                data.releases
                    .insert(target.name.clone(), ReleaseRule { target, conditions });
            }
            _ => return Err(p.err_here("a block ('*...' or a release line)")),
        }
    }

    Ok(data)
}
