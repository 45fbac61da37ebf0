//! Call-style expressions such as `binomial(4, 0.25)` or
//! `perturbed_lattice(spacing=1, replication=poisson(1))`.
//!
//! Grammar:
//!
//! ```text
//! value := number | ident | call | '[' value (',' value)* ']'
//! call  := ident '(' (arg (',' arg)*)? ')'
//! arg   := (ident '=')? value
//! ```

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Ident(String),
    List(Vec<Expr>),
    Call { name: String, args: Vec<Arg> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arg {
    pub key: Option<String>,
    pub value: Expr,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.value()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(e)
    }

    pub fn as_f64(&self) -> Result<f64> {
        match self {
            Expr::Number(x) => Ok(*x),
            Expr::Ident(s) if s == "inf" => Ok(f64::INFINITY),
            other => Err(Error::Parse(format!("expected a number, found `{other}`"))),
        }
    }

    pub fn as_u64(&self) -> Result<u64> {
        let x = self.as_f64()?;
        if x < 0.0 || x.fract() != 0.0 || x > u64::MAX as f64 {
            return Err(Error::Parse(format!("expected a non-negative integer, found `{x}`")));
        }
        Ok(x as u64)
    }

    pub fn as_bool(&self) -> Result<bool> {
        match self {
            Expr::Ident(s) if s == "true" => Ok(true),
            Expr::Ident(s) if s == "false" => Ok(false),
            other => Err(Error::Parse(format!("expected true or false, found `{other}`"))),
        }
    }

    pub fn as_ident(&self) -> Result<&str> {
        match self {
            Expr::Ident(s) => Ok(s),
            other => Err(Error::Parse(format!("expected a name, found `{other}`"))),
        }
    }

    pub fn as_list(&self) -> Result<&[Expr]> {
        match self {
            Expr::List(v) => Ok(v),
            other => Err(Error::Parse(format!("expected a list, found `{other}`"))),
        }
    }

    /// Name and arguments of a call; a bare identifier is a call without arguments.
    pub fn as_call(&self) -> Result<(&str, &[Arg])> {
        match self {
            Expr::Call { name, args } => Ok((name, args)),
            Expr::Ident(name) => Ok((name, &[])),
            other => Err(Error::Parse(format!("expected a call, found `{other}`"))),
        }
    }
}

/// Keyword/positional argument access for one call.
pub struct Args<'a> {
    call: &'a str,
    args: &'a [Arg],
    used: Vec<bool>,
}

impl<'a> Args<'a> {
    pub fn new(call: &'a str, args: &'a [Arg]) -> Self {
        Self {
            call,
            args,
            used: vec![false; args.len()],
        }
    }

    /// Argument by keyword, or by position when given positionally.
    pub fn get(&mut self, key: &str, position: usize) -> Option<&'a Expr> {
        if let Some(i) = self.args.iter().position(|a| a.key.as_deref() == Some(key)) {
            self.used[i] = true;
            return Some(&self.args[i].value);
        }
        match self.args.get(position) {
            Some(a) if a.key.is_none() => {
                self.used[position] = true;
                Some(&a.value)
            }
            _ => None,
        }
    }

    pub fn require(&mut self, key: &str, position: usize) -> Result<&'a Expr> {
        let call = self.call;
        self.get(key, position)
            .ok_or_else(|| Error::Parse(format!("`{call}` is missing argument `{key}`")))
    }

    pub fn positional(&self) -> &'a [Arg] {
        self.args
    }

    /// Fails on arguments that were never consumed.
    pub fn finish(self) -> Result<()> {
        if let Some(i) = self.used.iter().position(|u| !u) {
            let a = &self.args[i];
            let what = a.key.clone().unwrap_or_else(|| format!("#{i}"));
            return Err(Error::Parse(format!("`{}` does not accept argument `{what}`", self.call)));
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(x) => write!(f, "{x}"),
            Expr::Ident(s) => f.write_str(s),
            Expr::List(v) => {
                f.write_str("[")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str("]")
            }
            Expr::Call { name, args } => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    if let Some(k) = &a.key {
                        write!(f, "{k}=")?;
                    }
                    write!(f, "{}", a.value)?;
                }
                f.write_str(")")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::Parse(format!(
            "{what} at offset {} in `{}`",
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            if self.pos == start && self.src[self.pos].is_ascii_digit() {
                return None;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && matches!(self.src[self.pos], b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>().map_err(|_| {
            self.pos = start;
            self.error("malformed number")
        })
    }

    fn value(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'[') => {
                self.pos += 1;
                let mut items = Vec::new();
                if !self.eat(b']') {
                    loop {
                        items.push(self.value()?);
                        if self.eat(b']') {
                            break;
                        }
                        if !self.eat(b',') {
                            return Err(self.error("expected `,` or `]`"));
                        }
                    }
                }
                Ok(Expr::List(items))
            }
            Some(c) if c.is_ascii_digit() || c == b'-' || c == b'+' || c == b'.' => Ok(Expr::Number(self.number()?)),
            Some(_) => {
                let name = self.ident().ok_or_else(|| self.error("expected a name"))?;
                if !self.eat(b'(') {
                    return Ok(Expr::Ident(name));
                }
                let mut args = Vec::new();
                if !self.eat(b')') {
                    loop {
                        args.push(self.arg()?);
                        if self.eat(b')') {
                            break;
                        }
                        if !self.eat(b',') {
                            return Err(self.error("expected `,` or `)`"));
                        }
                    }
                }
                Ok(Expr::Call { name, args })
            }
        }
    }

    fn arg(&mut self) -> Result<Arg> {
        let save = self.pos;
        if let Some(key) = self.ident() {
            if self.eat(b'=') {
                return Ok(Arg {
                    key: Some(key),
                    value: self.value()?,
                });
            }
        }
        self.pos = save;
        Ok(Arg { key: None, value: self.value()? })
    }
}

pub(crate) fn call(name: &str, args: Vec<(Option<&str>, Expr)>) -> Expr {
    Expr::Call {
        name: name.to_string(),
        args: args
            .into_iter()
            .map(|(k, v)| Arg {
                key: k.map(str::to_string),
                value: v,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_calls() {
        let e = Expr::parse("perturbed_lattice(spacing=1, replication=binomial(1, 1), displacement=uniform_in_cell)").unwrap();
        let (name, args) = e.as_call().unwrap();
        assert_eq!(name, "perturbed_lattice");
        assert_eq!(args.len(), 3);
        assert_eq!(args[1].value.to_string(), "binomial(1, 1)");
    }

    #[test]
    fn display_round_trips() {
        for src in ["mixture([0.5, poisson(0)], [0.5, poisson(2)])", "f(a=-1.5e-7, b=[1, 2], c=x)", "g()", "0.1"] {
            let e = Expr::parse(src).unwrap();
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("f(1,").is_err());
        assert!(Expr::parse("f(1) x").is_err());
        assert!(Expr::parse("[1 2]").is_err());
        assert!(Expr::parse("1.2.3").is_err());
    }

    #[test]
    fn unused_arguments_are_reported() {
        let e = Expr::parse("poisson(1, extra=2)").unwrap();
        let (name, args) = e.as_call().unwrap();
        let mut a = Args::new(name, args);
        a.require("lambda", 0).unwrap();
        assert!(a.finish().unwrap_err().to_string().contains("extra"));
    }
}
