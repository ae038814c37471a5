//! Tokenizer and Pratt parser for the expression language.
//!
//! Grammar: `+ - * / ^` with the usual precedence, `^` right-associative and
//! binding tighter than unary minus, integer literals, parentheses, function
//! application `R(t)` and derivative ticks `R''(t)`, `l'[y,t](y, t)`.
//! Exponents must reduce to integer constants.

use std::collections::HashMap;

use num_bigint::BigInt;

use super::ParseError;
use crate::expr::{normalize, Expr, Function, RawExpr, Symbol};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Tick,
    Equals,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("`{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Tick => "`'`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Splits one line into tokens; columns are 1-based character positions.
pub(crate) fn tokenize(text: &str, line: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                return Err(ParseError::syntax(
                    line,
                    i + 1,
                    "decimal literals are not supported; write a fraction",
                ));
            }
            let digits: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Int(digits.parse().expect("digits")),
                line,
                col,
            });
            continue;
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line,
                col,
            });
            continue;
        } else {
            match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                '\'' => Tok::Tick,
                '=' => Tok::Equals,
                _ => return Err(ParseError::syntax(line, col, format!("unexpected character `{c}`"))),
            }
        };
        out.push(Token { tok, line, col });
        i += 1;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col: chars.len() + 1,
    });
    Ok(out)
}

/// Names visible to the parser.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    coords: Vec<(String, Symbol)>,
    functions: HashMap<String, Function>,
    atoms: HashMap<String, Symbol>,
    auto_functions: bool,
}

impl Scope {
    pub fn new(coords: &[Symbol]) -> Scope {
        Scope {
            coords: coords.iter().map(|&c| (c.name(), c)).collect(),
            ..Scope::default()
        }
    }

    /// Declares `f`; later declarations of the same name replace earlier ones.
    pub fn with_function(mut self, f: Function) -> Scope {
        self.functions.insert(f.name(), f);
        self
    }

    /// Makes a custom symbol such as an adjoined `f` nameable.
    pub fn with_atom(mut self, s: Symbol) -> Scope {
        self.atoms.insert(s.name(), s);
        self
    }

    /// Treats an undeclared name applied to distinct coordinates, as in
    /// `R(v)`, as a function of those coordinates.
    pub fn with_auto_functions(mut self) -> Scope {
        self.auto_functions = true;
        self
    }

    pub fn coordinate(&self, name: &str) -> Option<Symbol> {
        self.coords.iter().find(|(n, _)| n == name).map(|(_, s)| *s)
    }

    pub fn function(&self, name: &str) -> Option<Function> {
        self.functions.get(name).copied()
    }

    pub fn functions(&self) -> impl Iterator<Item = Function> + '_ {
        self.functions.values().copied()
    }
}

const ADD_BP: (u8, u8) = (10, 11);
const MUL_BP: (u8, u8) = (20, 21);
const UNARY_BP: u8 = 25;
const POW_BP: (u8, u8) = (31, 30);

pub(crate) struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    scope: &'a Scope,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(tokens: Vec<Token>, pos: usize, scope: &'a Scope) -> Parser<'a> {
        Parser { tokens, pos, scope }
    }

    pub(crate) fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    pub(crate) fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn expect(&mut self, want: Tok) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(ParseError::syntax(
                t.line,
                t.col,
                format!("expected {}, found {}", want.describe(), t.tok.describe()),
            ))
        }
    }

    pub(crate) fn expect_end(&mut self) -> Result<(), ParseError> {
        let t = self.peek().clone();
        if t.tok == Tok::Eof {
            Ok(())
        } else {
            Err(ParseError::syntax(
                t.line,
                t.col,
                format!("unexpected {}", t.tok.describe()),
            ))
        }
    }

    /// A full expression, normalized.
    pub(crate) fn expression(&mut self) -> Result<Expr, ParseError> {
        let start = self.peek().clone();
        let raw = self.raw(0)?;
        normalize(&raw).map_err(|e| ParseError::math(start.line, start.col, e))
    }

    fn raw(&mut self, min_bp: u8) -> Result<RawExpr, ParseError> {
        let t = self.next();
        let mut lhs = match t.tok {
            Tok::Int(n) => RawExpr::Int(n),
            Tok::Minus => RawExpr::Neg(Box::new(self.raw(UNARY_BP)?)),
            Tok::Plus => self.raw(UNARY_BP)?,
            Tok::LParen => {
                let inner = self.raw(0)?;
                self.expect(Tok::RParen)?;
                inner
            }
            Tok::Ident(ref name) => RawExpr::Atom(self.atom(name, &t)?),
            other => {
                return Err(ParseError::syntax(
                    t.line,
                    t.col,
                    format!("expected an expression, found {}", other.describe()),
                ))
            }
        };
        loop {
            let op = self.peek().clone();
            let (l, r) = match op.tok {
                Tok::Plus | Tok::Minus => ADD_BP,
                Tok::Star | Tok::Slash => MUL_BP,
                Tok::Caret => POW_BP,
                _ => break,
            };
            if l < min_bp {
                break;
            }
            self.next();
            if op.tok == Tok::Caret {
                let at = self.peek().clone();
                let exp = self.raw(r)?;
                let k = integer_exponent(&exp)
                    .ok_or_else(|| ParseError::syntax(at.line, at.col, "exponent must be an integer constant"))?;
                lhs = RawExpr::Pow(Box::new(lhs), k);
                continue;
            }
            let rhs = self.raw(r)?;
            lhs = match op.tok {
                Tok::Plus => RawExpr::Add(Box::new(lhs), Box::new(rhs)),
                Tok::Minus => RawExpr::Sub(Box::new(lhs), Box::new(rhs)),
                Tok::Star => RawExpr::Mul(Box::new(lhs), Box::new(rhs)),
                _ => RawExpr::Div(Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn atom(&mut self, name: &str, at: &Token) -> Result<Expr, ParseError> {
        if let Some(c) = self.scope.coordinate(name) {
            return Ok(Expr::symbol(c));
        }
        if let Some(&s) = self.scope.atoms.get(name) {
            return Ok(Expr::symbol(s));
        }
        let declared = self.scope.function(name);
        let applied = matches!(self.peek().tok, Tok::LParen | Tok::Tick);
        if declared.is_none() && !(self.scope.auto_functions && applied) {
            return Err(ParseError::UnknownSymbol {
                line: at.line,
                col: at.col,
                name: name.to_string(),
            });
        }
        let ticks = self.ticks()?;
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek().tok != Tok::RParen {
            loop {
                args.push(self.expression()?);
                if self.peek().tok == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let f = match declared {
            Some(f) => f,
            None => self.implicit_function(name, &args, at)?,
        };
        let params = f.params();
        if args.len() != params.len() {
            return Err(ParseError::syntax(
                at.line,
                at.col,
                format!("`{name}` takes {} argument(s), got {}", params.len(), args.len()),
            ));
        }
        let orders = match ticks {
            Ticks::Count(0) => vec![0; params.len()],
            Ticks::Count(n) if params.len() == 1 => vec![n],
            Ticks::Count(_) => {
                return Err(ParseError::syntax(
                    at.line,
                    at.col,
                    format!("derivatives of `{name}` need the form {name}'[...](...)"),
                ))
            }
            Ticks::Named(names) => {
                let mut orders = vec![0; params.len()];
                for (n, t) in names {
                    let Some(k) = params.iter().position(|p| p.name() == n) else {
                        return Err(ParseError::UnknownSymbol {
                            line: t.line,
                            col: t.col,
                            name: n,
                        });
                    };
                    orders[k] += 1;
                }
                orders
            }
        };
        let s = f
            .jet(&orders, &args)
            .map_err(|e| ParseError::math(at.line, at.col, e))?;
        Ok(Expr::symbol(s))
    }

    fn implicit_function(&self, name: &str, args: &[Expr], at: &Token) -> Result<Function, ParseError> {
        let params: Vec<Symbol> = args
            .iter()
            .filter_map(Expr::as_symbol)
            .filter(|s| s.is_coordinate())
            .collect();
        let distinct = params.iter().enumerate().all(|(i, p)| !params[..i].contains(p));
        if params.len() != args.len() || !distinct || params.is_empty() {
            return Err(ParseError::UnknownSymbol {
                line: at.line,
                col: at.col,
                name: name.to_string(),
            });
        }
        Ok(Function::new(name, &params))
    }

    fn ticks(&mut self) -> Result<Ticks, ParseError> {
        let mut n = 0;
        while self.peek().tok == Tok::Tick {
            self.next();
            n += 1;
        }
        if n == 1 && self.peek().tok == Tok::LBracket {
            self.next();
            let mut names = Vec::new();
            loop {
                let t = self.next();
                match t.tok {
                    Tok::Ident(ref s) => names.push((s.clone(), t.clone())),
                    ref other => {
                        return Err(ParseError::syntax(
                            t.line,
                            t.col,
                            format!("expected a parameter name, found {}", other.describe()),
                        ))
                    }
                }
                match self.next() {
                    Token { tok: Tok::Comma, .. } => continue,
                    Token { tok: Tok::RBracket, .. } => break,
                    t => {
                        return Err(ParseError::syntax(
                            t.line,
                            t.col,
                            format!("expected `,` or `]`, found {}", t.tok.describe()),
                        ))
                    }
                }
            }
            return Ok(Ticks::Named(names));
        }
        Ok(Ticks::Count(n))
    }
}

enum Ticks {
    Count(u32),
    Named(Vec<(String, Token)>),
}

fn integer_exponent(e: &RawExpr) -> Option<i64> {
    let v = normalize(e).ok()?.as_rational()?;
    if !v.is_integer() {
        return None;
    }
    num_traits::ToPrimitive::to_i64(v.numer())
}

/// Parses a single-line expression over the names in `scope`.
pub fn parse_expr(text: &str, scope: &Scope) -> Result<Expr, ParseError> {
    parse_expr_at(text, 1, 0, scope)
}

/// As [`parse_expr`], reporting positions relative to `line` and shifting
/// columns by `col_offset`.
pub(crate) fn parse_expr_at(text: &str, line: usize, col_offset: usize, scope: &Scope) -> Result<Expr, ParseError> {
    let mut tokens = tokenize(text, line)?;
    for t in &mut tokens {
        t.col += col_offset;
    }
    let mut p = Parser::new(tokens, 0, scope);
    let e = p.expression()?;
    p.expect_end()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{case1_g, function_of_t};
    use crate::tensor::Chart;

    fn scope() -> Scope {
        let t = Symbol::coordinate("t");
        Scope::new(&Chart::yxt().coords())
            .with_function(Function::new("R", &[t]))
            .with_function(Function::new("S", &[t]))
            .with_function(Function::new("c", &[t]))
    }

    fn p(s: &str) -> Expr {
        parse_expr(s, &scope()).unwrap()
    }

    #[test]
    fn parses_case1_coefficient() {
        let g = p("x*(R(t) - y/2) + y^4/48 + R(t)*y^3/12 + S(t)*y");
        assert_eq!(g, case1_g(&function_of_t("R"), &function_of_t("S")));
    }

    #[test]
    fn precedence() {
        assert_eq!(p("-y^2"), -(p("y*y")));
        assert_eq!(p("2^3^2"), Expr::int(512));
        assert_eq!(p("1 - 2 - 3"), Expr::int(-4));
        assert_eq!(p("8/2/2"), Expr::int(2));
        assert_eq!(p("y^-1"), p("1/y"));
        assert_eq!(p("(-y)^2"), p("y*y"));
    }

    #[test]
    fn function_symbols_and_ticks() {
        let e = p("1/(y+c(t))");
        assert!(e.symbols().iter().any(|s| s.name() == "c(t)"));
        let t = Symbol::coordinate("t");
        assert_eq!(p("R''(t)"), function_of_t("R").diff(t).unwrap().diff(t).unwrap());
        let half = p("R(t/2)");
        assert_eq!(half.diff(t).unwrap(), p("R'(t/2)/2"));
    }

    #[test]
    fn errors_are_positioned() {
        let err = parse_expr("y^(1/2)", &scope()).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 1, col: 3, .. }), "{err:?}");
        let err = parse_expr("y + q", &scope()).unwrap_err();
        assert!(matches!(err, ParseError::UnknownSymbol { col: 5, .. }), "{err:?}");
        assert!(matches!(parse_expr("y +", &scope()), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_expr("(y", &scope()), Err(ParseError::Syntax { .. })));
        assert!(matches!(
            parse_expr("y y", &scope()),
            Err(ParseError::Syntax { col: 3, .. })
        ));
        assert!(matches!(
            parse_expr("R(t, y)", &scope()),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(parse_expr("1/(y-y)", &scope()), Err(ParseError::Math { .. })));
        assert!(matches!(parse_expr("0.5*y", &scope()), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn auto_functions() {
        let s = Scope::new(&Chart::vwz().coords()).with_auto_functions();
        let e = parse_expr("2*(z+R(v))/(1+v*w)", &s).unwrap();
        let r = Function::new("R", &[Symbol::coordinate("v")]).formal();
        assert_eq!(e, crate::catalog::toda_kernel(&r));
        assert!(parse_expr("R(v*w)", &s).is_err());
    }

    #[test]
    fn multi_parameter_jets_round_trip() {
        let (y, t) = (Symbol::coordinate("y"), Symbol::coordinate("t"));
        let l = Function::new("l", &[y, t]);
        let s = Scope::new(&Chart::yxt().coords()).with_function(l);
        let e = l.formal().diff(y).unwrap().diff(t).unwrap();
        assert_eq!(parse_expr(&e.render(), &s).unwrap(), e);
    }
}
