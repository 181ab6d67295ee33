//! Recursive-descent parser from expression text straight to a [`Superfunction`].
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary | primary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' '-'? INTEGER)?
//! primary := INTEGER | IDENT | '(' expr ')'
//! ```
//!
//! Juxtaposition multiplies, so `2x` and `th1 th2` are products.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::grassmann::{GeneratorPool, Superfunction};

/// Largest accepted exponent magnitude.
pub const MAX_EXPONENT: u32 = 64;
/// Largest accepted parenthesis nesting.
pub const MAX_DEPTH: usize = 64;
/// Largest accepted number of stored terms in any intermediate result.
pub const MAX_TERMS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.char_indices().collect(), pos: 0, text }
    }

    fn tokens(mut self) -> std::result::Result<Vec<(usize, Tok)>, (usize, String)> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
                self.pos += 1;
            }
            let col = self.pos;
            let Some(&(start, c)) = self.chars.get(self.pos) else {
                out.push((col, Tok::End));
                return Ok(out);
            };
            if c.is_ascii_digit() {
                while self.pos < self.chars.len() && self.chars[self.pos].1.is_ascii_digit() {
                    self.pos += 1;
                }
                let end = self.chars.get(self.pos).map_or(self.text.len(), |p| p.0);
                let n: BigInt = self.text[start..end].parse().map_err(|_| (col, "bad integer".to_string()))?;
                out.push((col, Tok::Int(n)));
            } else if c.is_ascii_alphabetic() || c == '_' {
                while self.pos < self.chars.len()
                    && (self.chars[self.pos].1.is_ascii_alphanumeric() || self.chars[self.pos].1 == '_')
                {
                    self.pos += 1;
                }
                let end = self.chars.get(self.pos).map_or(self.text.len(), |p| p.0);
                out.push((col, Tok::Ident(self.text[start..end].to_string())));
            } else if "+-*/^()".contains(c) {
                self.pos += 1;
                out.push((col, Tok::Sym(c)));
            } else {
                return Err((col, format!("unexpected character {c:?}")));
            }
        }
    }
}

struct Parser<'p> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    pool: &'p Arc<GeneratorPool>,
    depth: usize,
}

type PResult<T> = std::result::Result<T, (usize, String)>;

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn col(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn guard(&self, f: Superfunction, col: usize) -> PResult<Superfunction> {
        let size: usize = f.terms().map(|(_, c)| c.numer().num_terms() + c.denom().num_terms()).sum();
        if size > MAX_TERMS {
            return Err((col, "expression too large".into()));
        }
        Ok(f)
    }

    fn expr(&mut self) -> PResult<Superfunction> {
        let mut acc = self.term()?;
        loop {
            let col = self.col();
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    let r = self.term()?;
                    acc = self.guard(&acc + &r, col)?;
                }
                Tok::Sym('-') => {
                    self.bump();
                    let r = self.term()?;
                    acc = self.guard(&acc - &r, col)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> PResult<Superfunction> {
        let mut acc = self.unary()?;
        loop {
            let col = self.col();
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    let r = self.unary()?;
                    acc = self.guard(&acc * &r, col)?;
                }
                Tok::Sym('/') => {
                    self.bump();
                    let r = self.unary()?;
                    let inv = r.invert().map_err(|_| (col, "division by a non-invertible expression".to_string()))?;
                    acc = self.guard(&acc * &inv, col)?;
                }
                Tok::Int(_) | Tok::Ident(_) | Tok::Sym('(') => {
                    let r = self.power()?;
                    acc = self.guard(&acc * &r, col)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> PResult<Superfunction> {
        match self.peek() {
            Tok::Sym('-') => {
                self.enter()?;
                self.bump();
                let v = -&self.unary()?;
                self.depth -= 1;
                Ok(v)
            }
            Tok::Sym('+') => {
                self.enter()?;
                self.bump();
                let v = self.unary()?;
                self.depth -= 1;
                Ok(v)
            }
            _ => self.power(),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err((self.col(), "expression nested too deeply".into()));
        }
        Ok(())
    }

    fn power(&mut self) -> PResult<Superfunction> {
        let base = self.primary()?;
        if self.peek() != &Tok::Sym('^') {
            return Ok(base);
        }
        let col = self.col();
        self.bump();
        let neg = if self.peek() == &Tok::Sym('-') {
            self.bump();
            true
        } else {
            false
        };
        let ecol = self.col();
        let Tok::Int(n) = self.bump() else {
            return Err((ecol, "exponent must be an integer literal".into()));
        };
        let e: u32 = u32::try_from(&n)
            .ok()
            .filter(|&e| e <= MAX_EXPONENT)
            .ok_or((ecol, format!("exponent exceeds {MAX_EXPONENT}")))?;
        let mut acc = Superfunction::one(self.pool);
        for _ in 0..e {
            acc = self.guard(&acc * &base, col)?;
        }
        if neg {
            acc = acc.invert().map_err(|_| (col, "negative power of a non-invertible expression".to_string()))?;
            acc = self.guard(acc, col)?;
        }
        if self.peek() == &Tok::Sym('^') {
            return Err((self.col(), "chained exponents need parentheses".into()));
        }
        Ok(acc)
    }

    fn primary(&mut self) -> PResult<Superfunction> {
        let col = self.col();
        match self.bump() {
            Tok::Int(n) => Ok(Superfunction::constant(self.pool, BigRational::from_integer(n))),
            Tok::Ident(name) => match self.pool.lookup(&name) {
                Some(v) => Ok(Superfunction::generator(self.pool, v)),
                None => Err((col, format!("unknown identifier `{name}`"))),
            },
            Tok::Sym('(') => {
                self.enter()?;
                let v = self.expr()?;
                self.depth -= 1;
                let ccol = self.col();
                if self.bump() != Tok::Sym(')') {
                    return Err((ccol, "expected `)`".into()));
                }
                Ok(v)
            }
            Tok::End => Err((col, "unexpected end of expression".into())),
            Tok::Sym(c) => Err((col, format!("unexpected `{c}`"))),
        }
    }
}

/// Parses `text` over `pool`. Errors report line 1 and a 1-based character column.
pub fn parse_expression(text: &str, pool: &Arc<GeneratorPool>) -> Result<Superfunction> {
    parse_at(text, pool, 1, 1)
}

/// Parses `text` whose first character sits at `line:column` of an enclosing file.
pub fn parse_at(text: &str, pool: &Arc<GeneratorPool>, line: usize, column: usize) -> Result<Superfunction> {
    let err = |(c, message): (usize, String)| Error::Parse { line, column: column + c, message };
    let toks = Lexer::new(text).tokens().map_err(err)?;
    let mut p = Parser { toks, pos: 0, pool, depth: 0 };
    let v = p.expr().map_err(err)?;
    if p.peek() != &Tok::End {
        let col = p.col();
        return Err(err((col, "unexpected trailing input".into())));
    }
    Ok(v)
}
