//! Recursive-descent parser for the concrete formula syntax.
//!
//! Precedence, loosest first: `<->` (left), `->` (right), `|`, `&`, then the
//! prefix operators `~ <F> [F] <B> [B]`.

use super::connective::ConnectiveTable;
use super::formula::{Dir, Formula};
use super::SyntaxError;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Bot,
    Top,
    Neg,
    Or,
    And,
    Imp,
    Iff,
    Dia(Dir),
    Box(Dir),
    Nabla(Dir),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Sharp(String),
    Ident(String),
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::End => "end of input".into(),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Sharp(s) => format!("`#{s}`"),
        other => format!("{other:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: &str| SyntaxError::Parse {
        pos,
        message: msg.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let rest = &text[i..];
        let start = i;
        let fixed: &[(&str, Tok)] = &[
            ("_|_", Tok::Bot),
            ("<->", Tok::Iff),
            ("->", Tok::Imp),
            ("<F>", Tok::Dia(Dir::F)),
            ("<B>", Tok::Dia(Dir::B)),
            ("[F]", Tok::Box(Dir::F)),
            ("[B]", Tok::Box(Dir::B)),
            ("nablaF", Tok::Nabla(Dir::F)),
            ("nablaB", Tok::Nabla(Dir::B)),
            ("~", Tok::Neg),
            ("|", Tok::Or),
            ("&", Tok::And),
            ("{", Tok::LBrace),
            ("}", Tok::RBrace),
            ("(", Tok::LParen),
            (")", Tok::RParen),
            (",", Tok::Comma),
        ];
        if let Some((s, t)) = fixed.iter().find(|(s, _)| rest.starts_with(s)) {
            out.push((start, t.clone()));
            i += s.len();
            continue;
        }
        if c == b'T'
            && !bytes
                .get(i + 1)
                .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
        {
            out.push((start, Tok::Top));
            i += 1;
            continue;
        }
        if c == b'#' {
            i += 1;
            let s = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            if s == i {
                return Err(err(start, "expected connective name after `#`"));
            }
            out.push((start, Tok::Sharp(text[s..i].to_string())));
            continue;
        }
        if c.is_ascii_lowercase() {
            while i < bytes.len() && (bytes[i].is_ascii_lowercase() || bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
            continue;
        }
        let ch = rest.chars().next().unwrap();
        return Err(err(start, &format!("unexpected character `{ch}`")));
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    table: &'a ConnectiveTable,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {}", describe(&t))))
        }
    }

    fn unexpected(&self, what: &str) -> SyntaxError {
        SyntaxError::Parse {
            pos: self.offset(),
            message: format!("{what}, found {}", describe(self.peek())),
        }
    }

    fn iff(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.imp()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.imp()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Imp {
            self.bump();
            let rhs = self.imp()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::Neg => {
                self.bump();
                Ok(Formula::neg(self.unary()?))
            }
            Tok::Dia(d) => {
                self.bump();
                Ok(Formula::dia(d, self.unary()?))
            }
            Tok::Box(d) => {
                self.bump();
                Ok(Formula::boxed(d, self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn list(&mut self, close: Tok) -> Result<Vec<Formula>, SyntaxError> {
        let mut items = Vec::new();
        if *self.peek() == close {
            self.bump();
            return Ok(items);
        }
        loop {
            items.push(self.iff()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                t if *t == close => {
                    self.bump();
                    return Ok(items);
                }
                _ => return Err(self.unexpected("expected `,` or closing bracket")),
            }
        }
    }

    fn atom(&mut self) -> Result<Formula, SyntaxError> {
        let at = self.offset();
        match self.bump() {
            Tok::Bot => Ok(Formula::Bottom),
            Tok::Top => Ok(Formula::top()),
            Tok::Ident(v) => Ok(Formula::Var(v)),
            Tok::LParen => {
                let f = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Nabla(d) => {
                self.expect(Tok::LBrace)?;
                let parts = self.list(Tok::RBrace)?;
                Ok(Formula::nabla(d, parts))
            }
            Tok::Sharp(name) => {
                let conn = self
                    .table
                    .get(&name)
                    .cloned()
                    .ok_or_else(|| SyntaxError::UnknownConnective {
                        name: name.clone(),
                        pos: at,
                    })?;
                let args = if *self.peek() == Tok::LParen {
                    self.bump();
                    self.list(Tok::RParen)?
                } else {
                    Vec::new()
                };
                if args.len() != conn.arity() {
                    return Err(SyntaxError::Arity {
                        name,
                        expected: conn.arity(),
                        found: args.len(),
                        pos: at,
                    });
                }
                Ok(Formula::Sharp(conn, args))
            }
            other => Err(SyntaxError::Parse {
                pos: at,
                message: format!("expected a formula, found {}", describe(&other)),
            }),
        }
    }
}

/// Parses concrete syntax into a primitive formula.
pub fn parse(text: &str, table: &ConnectiveTable) -> Result<Formula, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, table };
    let f = p.iff()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("expected end of input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s, &ConnectiveTable::new()).unwrap()
    }

    #[test]
    fn basic_shapes() {
        assert_eq!(
            p("p | <F>q"),
            Formula::or(Formula::var("p"), Formula::dia_f(Formula::var("q")))
        );
        assert_eq!(p("nablaF{}"), Formula::box_f(Formula::Bottom));
        assert_eq!(p("nablaB{}"), Formula::box_b(Formula::Bottom));
        assert_eq!(p("a -> b -> c"), p("a -> (b -> c)"));
        assert_eq!(p("a & b | c"), p("(a & b) | c"));
        assert_eq!(p("T"), Formula::top());
    }

    #[test]
    fn nabla_expansion() {
        let expected = Formula::and(
            Formula::and(Formula::dia_f(Formula::var("a")), Formula::dia_f(Formula::var("b"))),
            Formula::box_f(Formula::or(Formula::var("a"), Formula::var("b"))),
        );
        assert_eq!(p("nablaF{a, b}"), expected);
    }

    #[test]
    fn errors() {
        let t = ConnectiveTable::new();
        assert!(matches!(
            parse("~<F>~#0", &t),
            Err(SyntaxError::UnknownConnective { .. })
        ));
        assert!(matches!(parse("p |", &t), Err(SyntaxError::Parse { pos: 3, .. })));
        assert!(matches!(parse("p $ q", &t), Err(SyntaxError::Parse { pos: 2, .. })));
        let mut t = ConnectiveTable::new();
        t.define("r", 1, "q1 | <F>x").unwrap();
        assert!(matches!(
            parse("#r(p, q)", &t),
            Err(SyntaxError::Arity {
                expected: 1,
                found: 2,
                ..
            })
        ));
        assert!(parse("#r(p)", &t).is_ok());
    }
}
