//! Recursive-descent parser for the property language.
//!
//! ```text
//! formula := unary
//!          | formula '->' formula        (right assoc, loosest)
//!          | formula '|' formula
//!          | formula '&' formula
//!          | formula 'U' formula         (right assoc, tightest binary)
//! unary   := ('!' | 'X' | 'F' | 'G') unary | primary
//! primary := 'true' | 'false' | 't' INDEX OP NUMBER | '(' formula ')'
//! OP      := '<' | '<=' | '>' | '>='
//! ```

use crate::error::{Error, Result};
use crate::num::Num;

use super::ast::{CmpOp, Ltl, LtlFormula, TimeDiffProposition};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Bang,
    Amp,
    Bar,
    Arrow,
    Cmp(CmpOp),
    Word(String),
    Number(String),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: &str| Error::Syntax { pos: pos + 1, msg: msg.to_string() };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let two = |s: &str| text[i..].starts_with(s);
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'!' => Tok::Bang,
            b'&' if two("&&") => {
                i += 1;
                Tok::Amp
            }
            b'&' => Tok::Amp,
            b'|' if two("||") => {
                i += 1;
                Tok::Bar
            }
            b'|' => Tok::Bar,
            b'-' if two("->") => {
                i += 1;
                Tok::Arrow
            }
            b'<' if two("<=") => {
                i += 1;
                Tok::Cmp(CmpOp::Le)
            }
            b'<' => Tok::Cmp(CmpOp::Lt),
            b'>' if two(">=") => {
                i += 1;
                Tok::Cmp(CmpOp::Ge)
            }
            b'>' => Tok::Cmp(CmpOp::Gt),
            b'-' | b'+' | b'.' | b'0'..=b'9' => {
                i += 1;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                out.push((start, Tok::Number(text[start..i].to_string())));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Word(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(err(i, &format!("unexpected character `{ch}`")));
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o) + 1
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(s)) if s == w)
    }

    fn implication(&mut self) -> Result<LtlFormula> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let rhs = self.implication()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<LtlFormula> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Tok::Bar) {
            self.bump();
            lhs = lhs.or(self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<LtlFormula> {
        let mut lhs = self.until()?;
        while self.peek() == Some(&Tok::Amp) {
            self.bump();
            lhs = lhs.and(self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<LtlFormula> {
        let lhs = self.unary()?;
        if self.is_word("U") {
            self.bump();
            let rhs = self.until()?;
            return Ok(lhs.until(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<LtlFormula> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.bump();
                Ok(self.unary()?.negate())
            }
            Some(Tok::Word(w)) if w == "X" => {
                self.bump();
                Ok(self.unary()?.next())
            }
            Some(Tok::Word(w)) if w == "F" => {
                self.bump();
                Ok(self.unary()?.eventually())
            }
            Some(Tok::Word(w)) if w == "G" => {
                self.bump();
                Ok(self.unary()?.always())
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<LtlFormula> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.implication()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.error("expected `)`");
                }
                self.bump();
                Ok(inner)
            }
            Some(Tok::Word(w)) if w == "true" => {
                self.bump();
                Ok(Ltl::True)
            }
            Some(Tok::Word(w)) if w == "false" => {
                self.bump();
                Ok(Ltl::falsum())
            }
            Some(Tok::Word(w)) if w.starts_with('t') && w.len() > 1 => {
                let index: usize = match w[1..].parse() {
                    Ok(i) if i >= 1 => i,
                    _ => return self.error(format!("bad component `{w}` (expected t1, t2, ...)")),
                };
                self.bump();
                let op = match self.bump() {
                    Some(Tok::Cmp(op)) => op,
                    _ => {
                        self.pos -= 1;
                        return self.error("expected one of <, <=, >, >=");
                    }
                };
                let alpha: Num = match self.peek() {
                    Some(Tok::Number(s)) => match s.parse() {
                        Ok(v) => v,
                        Err(_) => return self.error(format!("invalid number `{s}`")),
                    },
                    _ => return self.error("expected a number"),
                };
                self.bump();
                Ok(Ltl::Atom(TimeDiffProposition::new(index - 1, op, alpha)))
            }
            Some(t) => self.error(format!("unexpected token {t:?}")),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parses a formula string into a desugared formula.
pub fn parse(text: &str) -> Result<LtlFormula> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let f = p.implication()?;
    if p.pos < p.toks.len() {
        return p.error("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(i: usize, op: CmpOp, a: i64) -> LtlFormula {
        Ltl::Atom(TimeDiffProposition::new(i - 1, op, Num::from_int(a)))
    }

    #[test]
    fn eventually_always() {
        let f = parse("F G (t1 <= 5)").unwrap();
        assert_eq!(f, atom(1, CmpOp::Le, 5).always().eventually());
        assert_eq!(f.as_eventually_always_atom().unwrap().index, 0);
    }

    #[test]
    fn until_node() {
        let f = parse("(t1 >= 2) U (t2 >= 3)").unwrap();
        assert_eq!(f, atom(1, CmpOp::Ge, 2).until(atom(2, CmpOp::Ge, 3)));
    }

    #[test]
    fn trailing_garbage() {
        let err = parse("t1 <= 5))").unwrap_err();
        assert!(matches!(err, Error::Syntax { pos: 8, .. }), "{err}");
    }

    #[test]
    fn precedence() {
        let a = || atom(1, CmpOp::Lt, 1);
        let b = || atom(2, CmpOp::Lt, 2);
        let c = || atom(3, CmpOp::Lt, 3);
        // U binds tighter than &, & tighter than |, | tighter than ->
        assert_eq!(parse("t1<1 & t2<2 U t3<3").unwrap(), a().and(b().until(c())));
        assert_eq!(parse("t1<1 | t2<2 & t3<3").unwrap(), a().or(b().and(c())));
        assert_eq!(parse("t1<1 -> t2<2 | t3<3").unwrap(), a().implies(b().or(c())));
        // right associativity
        assert_eq!(parse("t1<1 U t2<2 U t3<3").unwrap(), a().until(b().until(c())));
        assert_eq!(parse("t1<1 -> t2<2 -> t3<3").unwrap(), a().implies(b().implies(c())));
        // prefix operators bind tightest
        assert_eq!(parse("! t1<1 U t2<2").unwrap(), a().negate().until(b()));
        assert_eq!(parse("X F t1<1 & t2<2").unwrap(), a().eventually().next().and(b()));
    }

    #[test]
    fn sugar_identities() {
        assert_eq!(parse("F t1 <= 5").unwrap(), parse("true U t1 <= 5").unwrap());
        assert_eq!(parse("G t1 <= 5").unwrap(), parse("! F ! t1 <= 5").unwrap());
        assert_eq!(parse("false").unwrap(), parse("!true").unwrap());
    }

    #[test]
    fn numbers_and_errors() {
        let f = parse("t2 > -1.25").unwrap();
        assert_eq!(f, Ltl::Atom(TimeDiffProposition::new(1, CmpOp::Gt, Num::from_ticks(-1_250_000))));
        for bad in ["", "t0 < 1", "t1 <", "t1 5", "(t1 < 1", "t1 < 1 &", "x1 < 2", "t1 < 1 # 2"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn index_checked_at_binding() {
        let f = parse("t3 <= 1").unwrap();
        assert!(f.check_indices(3).is_ok());
        assert!(matches!(f.check_indices(2), Err(Error::IndexOutOfRange { index: 3, n: 2 })));
    }

    #[test]
    fn display_round_trips() {
        for s in ["F G (t1 <= 5)", "(t1 >= 2) U (t2 >= 3)", "G (t1 < 1 -> X t2 > 0) | false", "!(t1 <= 1 & t2 <= 2)"] {
            let f = parse(s).unwrap();
            assert_eq!(parse(&f.to_string()).unwrap(), f, "{s} -> {f}");
        }
    }
}
