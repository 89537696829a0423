//! Recursive-descent parser.
//!
//! ```text
//! sentence := iff
//! iff      := imp ("<->" imp)*
//! imp      := or ("->" imp)?
//! or       := and ("|" and)*
//! and      := unary ("&" unary)*
//! unary    := ("!" | "not") unary | ("exists" | "forall") var "." iff | primary
//! primary  := "(" iff ")" | pred "(" var ("," var)? ")" | Set "(" var ")" | var "=" var
//! ```
//!
//! A quantifier's scope extends as far to the right as possible.

use super::{to_prenex, Atom, Expr, Formula, FormulaError, Logic, Quant, Sentence, Var, VarKind};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Eq,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'.' => Tok::Dot,
            b'!' | b'~' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'=' => Tok::Eq,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Implies
            }
            b'<' if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') => {
                i += 2;
                Tok::Iff
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_alphanumeric() || bytes[i + 1] == b'_')
                {
                    i += 1;
                }
                Tok::Ident(text[start..=i].to_string())
            }
            _ => {
                return Err(FormulaError::Syntax {
                    pos: i,
                    msg: format!("unexpected character {:?}", c as char),
                })
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

const PREDICATES: [&str; 6] = ["adj", "inc", "vtx", "edg", "lv", "le"];
const KEYWORDS: [&str; 3] = ["exists", "forall", "not"];

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    logic: Logic,
    vars: Vec<Var>,
    // names in scope, innermost last
    scope: Vec<(String, usize)>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FormulaError> {
        Err(FormulaError::Syntax {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), FormulaError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.err(format!("expected {t:?}"))
        }
    }

    fn ident(&mut self) -> Result<String, FormulaError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected a name"),
        }
    }

    fn kind_of(name: &str) -> VarKind {
        if name.starts_with(|c: char| c.is_ascii_uppercase()) {
            VarKind::Set
        } else {
            VarKind::Individual
        }
    }

    fn lookup(&self, name: &str, kind: VarKind) -> Result<usize, FormulaError> {
        let (_, idx) = self
            .scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .ok_or_else(|| FormulaError::FreeVariable(name.to_string()))?;
        if self.vars[*idx].kind != kind {
            return Err(FormulaError::WrongKind(name.to_string()));
        }
        Ok(*idx)
    }

    fn individual(&mut self) -> Result<usize, FormulaError> {
        let name = self.ident()?;
        self.lookup(&name, VarKind::Individual)
    }

    fn iff(&mut self) -> Result<Expr, FormulaError> {
        let mut e = self.imp()?;
        while self.eat(&Tok::Iff) {
            let r = self.imp()?;
            e = Expr::Iff(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn imp(&mut self) -> Result<Expr, FormulaError> {
        let e = self.or()?;
        if self.eat(&Tok::Implies) {
            let r = self.imp()?;
            return Ok(Expr::Implies(Box::new(e), Box::new(r)));
        }
        Ok(e)
    }

    fn or(&mut self) -> Result<Expr, FormulaError> {
        let mut e = self.and()?;
        while self.eat(&Tok::Or) {
            e = Expr::or(e, self.and()?);
        }
        Ok(e)
    }

    fn and(&mut self) -> Result<Expr, FormulaError> {
        let mut e = self.unary()?;
        while self.eat(&Tok::And) {
            e = Expr::and(e, self.unary()?);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, FormulaError> {
        if self.eat(&Tok::Not) {
            return Ok(Expr::not(self.unary()?));
        }
        if let Some(Tok::Ident(w)) = self.peek() {
            match w.as_str() {
                "not" => {
                    self.pos += 1;
                    return Ok(Expr::not(self.unary()?));
                }
                "exists" | "forall" => {
                    let q = if w == "exists" { Quant::Exists } else { Quant::Forall };
                    self.pos += 1;
                    let name = self.ident()?;
                    if KEYWORDS.contains(&name.as_str()) || PREDICATES.contains(&name.as_str()) {
                        return self.err(format!("{name} is reserved"));
                    }
                    if self.scope.iter().any(|(n, _)| *n == name) {
                        return Err(FormulaError::DuplicateVariable(name));
                    }
                    self.expect(Tok::Dot)?;
                    let idx = self.vars.len();
                    self.vars.push(Var {
                        kind: Self::kind_of(&name),
                        name: name.clone(),
                    });
                    self.scope.push((name, idx));
                    let body = self.iff()?;
                    self.scope.pop();
                    return Ok(Expr::Quant(q, idx, Box::new(body)));
                }
                _ => {}
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, FormulaError> {
        if self.eat(&Tok::LParen) {
            let e = self.iff()?;
            self.expect(Tok::RParen)?;
            return Ok(e);
        }
        let name = self.ident()?;
        if self.peek() == Some(&Tok::LParen) && PREDICATES.contains(&name.as_str()) {
            self.pos += 1;
            let a = self.individual()?;
            let atom = match name.as_str() {
                "adj" | "inc" => {
                    self.expect(Tok::Comma)?;
                    let b = self.individual()?;
                    if name == "adj" {
                        Atom::Adj(a, b)
                    } else {
                        Atom::Inc(a, b)
                    }
                }
                "vtx" => Atom::Vtx(a),
                "edg" => Atom::Edg(a),
                "lv" => Atom::Lv(a),
                _ => Atom::Le(a),
            };
            self.expect(Tok::RParen)?;
            if atom.logic().is_some_and(|l| l != self.logic) {
                return Err(FormulaError::WrongLogic(name));
            }
            return Ok(Expr::Atom(atom));
        }
        if Self::kind_of(&name) == VarKind::Set {
            let s = self.lookup(&name, VarKind::Set)?;
            self.expect(Tok::LParen)?;
            let x = self.individual()?;
            self.expect(Tok::RParen)?;
            return Ok(Expr::Atom(Atom::Mem(s, x)));
        }
        let a = self.lookup(&name, VarKind::Individual)?;
        if self.eat(&Tok::Eq) {
            let b = self.individual()?;
            return Ok(Expr::Atom(Atom::Eq(a, b)));
        }
        self.err("expected an atom")
    }
}

/// Parses a sentence with arbitrary nesting.
pub fn parse_sentence(text: &str, logic: Logic) -> Result<Sentence, FormulaError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        end: text.len(),
        logic,
        vars: Vec::new(),
        scope: Vec::new(),
    };
    let body = p.iff()?;
    if p.pos != p.toks.len() {
        return p.err("unexpected trailing input");
    }
    if p.vars.is_empty() {
        return Err(FormulaError::NoQuantifier);
    }
    Ok(Sentence {
        logic,
        vars: p.vars,
        body,
    })
}

/// Parses and converts to prenex normal form.
pub fn parse_formula(text: &str, logic: Logic) -> Result<Formula, FormulaError> {
    parse_sentence(text, logic).map(|s| to_prenex(&s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f1(t: &str) -> Result<Formula, FormulaError> {
        parse_formula(t, Logic::Mso1)
    }

    #[test]
    fn counters() {
        let f = f1("exists x. exists y. adj(x,y)").unwrap();
        assert_eq!((f.q_v(), f.q_s()), (2, 0));
        let f = f1("exists X. forall x. X(x)").unwrap();
        assert_eq!((f.q_v(), f.q_s()), (1, 1));
    }

    #[test]
    fn errors() {
        assert!(matches!(f1("adj(x,y)"), Err(FormulaError::FreeVariable(_))));
        assert!(matches!(
            f1("exists x. exists x. adj(x,x)"),
            Err(FormulaError::DuplicateVariable(_))
        ));
        assert!(matches!(f1("exists x. X(x)"), Err(FormulaError::FreeVariable(_))));
        assert!(matches!(
            f1("exists X. exists y. adj(X,y)"),
            Err(FormulaError::WrongKind(_))
        ));
        assert!(matches!(f1("exists x. edg(x)"), Err(FormulaError::WrongLogic(_))));
        assert!(matches!(f1("exists x. adj(x,"), Err(FormulaError::Syntax { .. })));
        assert!(matches!(f1("exists x. x = x )"), Err(FormulaError::Syntax { .. })));
        assert!(matches!(f1("exists x. x # x"), Err(FormulaError::Syntax { .. })));
    }

    #[test]
    fn scope_extends_right() {
        let s = parse_sentence("exists x. x = x & adj(x,x)", Logic::Mso1).unwrap();
        assert!(matches!(s.body, Expr::Quant(_, _, ref b) if matches!(**b, Expr::And(..))));
        let s = parse_sentence("forall x. exists y. adj(x,y) -> x = y -> y = x", Logic::Mso1)
            .unwrap();
        assert_eq!(
            s.to_string(),
            "forall x. exists y. (adj(x,y)) -> ((x = y) -> (y = x))"
        );
    }

    #[test]
    fn prenex_shapes() {
        let f = f1("(exists x. adj(x,x)) | (exists x. adj(x,x))").unwrap();
        assert_eq!(f.to_string(), "exists x. exists x1. (adj(x,x)) | (adj(x1,x1))");
        let f = f1("not (forall x. adj(x,x))").unwrap();
        assert_eq!(f.prefix, vec![Quant::Exists]);
        assert_eq!(f.to_string(), "exists x. !(adj(x,x))");
        let text = "forall x. exists Y. Y(x)";
        assert_eq!(f1(text).unwrap().to_string(), text);
        let f = f1("(exists x. adj(x,x)) -> forall y. y = y").unwrap();
        assert_eq!(f.prefix, vec![Quant::Forall, Quant::Forall]);
    }

    #[test]
    fn display_round_trip() {
        for text in [
            "exists X. forall x. forall y. adj(x,y) -> !(X(x) <-> X(y))",
            "forall x. (exists y. adj(x,y)) | !(exists z. z = x)",
        ] {
            let s = parse_sentence(text, Logic::Mso1).unwrap();
            let again = parse_sentence(&s.to_string(), Logic::Mso1).unwrap();
            assert_eq!(s, again);
        }
    }
}
