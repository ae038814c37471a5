//! The `.ew` structure file format.
//!
//! ```text
//! coords: y x t
//! functions: R(t) S(t)
//! metric:
//!   g[1,1] = 1
//!   g[2,3] = 1
//!   g[3,3] = x*(R(t) - y/2) + y^4/48 + R(t)*y^3/12 + S(t)*y
//! omega:
//!   w[3] = y
//! orientation: +1
//! refpoint: 1 1 1
//! signature: + + -
//! ```
//!
//! Lines starting with `#` are comments. Metric entries are given for
//! `i <= j` only; anything unassigned is zero.

use std::collections::{BTreeSet, HashMap};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::parser::{tokenize, Parser, Scope, Tok};
use super::{FrontendError, ParseError};
use crate::expr::{Expr, Function};
use crate::tensor::{det3, Chart};
use crate::weyl::WeylStructure;

#[derive(Clone, Debug, PartialEq)]
pub struct StructureFile {
    pub chart: Chart,
    pub functions: Vec<Function>,
    pub metric: [[Expr; 3]; 3],
    pub omega: [Expr; 3],
    pub orientation: i8,
    pub refpoint: [BigRational; 3],
    pub signature: Option<[i8; 3]>,
}

impl StructureFile {
    /// Names usable in expressions over this file's chart.
    pub fn scope(&self) -> Scope {
        self.functions
            .iter()
            .fold(Scope::new(&self.chart.coords()), |s, &f| s.with_function(f))
    }

    pub fn to_structure(&self) -> Result<WeylStructure, FrontendError> {
        let s = WeylStructure::from_components(&self.chart, self.metric.clone(), self.omega.clone())?;
        Ok(s.with_orientation(self.orientation)
            .with_refpoint(self.refpoint.clone()))
    }

    /// The file describing `s`, declaring every function its components use.
    pub fn from_structure(s: &WeylStructure) -> StructureFile {
        let mut functions: Vec<Function> = Vec::new();
        let comps = s.metric().tensor().components().iter().chain(s.omega().components());
        for e in comps {
            for sym in e.symbols() {
                if let Some(j) = sym.jet() {
                    if !functions.contains(&j.function) {
                        functions.push(j.function);
                    }
                }
            }
        }
        functions.sort_by_key(|f| f.name());
        StructureFile {
            chart: s.chart().clone(),
            functions,
            metric: s.metric().components(),
            omega: std::array::from_fn(|i| s.omega().get(&[i]).clone()),
            orientation: s.orientation(),
            refpoint: s.refpoint().clone(),
            signature: s.chart().signature(),
        }
    }

    /// Canonical `.ew` text; parses back to an equal file.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("coords: {}\n", self.chart.names().join(" ")));
        if !self.functions.is_empty() {
            let decls: Vec<String> = self
                .functions
                .iter()
                .map(|f| {
                    let params: Vec<String> = f.params().iter().map(|p| p.name()).collect();
                    format!("{}({})", f.name(), params.join(","))
                })
                .collect();
            out.push_str(&format!("functions: {}\n", decls.join(" ")));
        }
        out.push_str("metric:\n");
        for i in 0..3 {
            for j in i..3 {
                if !self.metric[i][j].is_zero() {
                    out.push_str(&format!("  g[{},{}] = {}\n", i + 1, j + 1, self.metric[i][j].render()));
                }
            }
        }
        out.push_str("omega:\n");
        for (i, w) in self.omega.iter().enumerate() {
            if !w.is_zero() {
                out.push_str(&format!("  w[{}] = {}\n", i + 1, w.render()));
            }
        }
        out.push_str(&format!(
            "orientation: {}\n",
            if self.orientation < 0 { "-1" } else { "+1" }
        ));
        let rp: Vec<String> = self.refpoint.iter().map(|q| q.to_string()).collect();
        out.push_str(&format!("refpoint: {}\n", rp.join(" ")));
        if let Some(sig) = self.signature {
            let s: Vec<&str> = sig.iter().map(|&k| if k < 0 { "-" } else { "+" }).collect();
            out.push_str(&format!("signature: {}\n", s.join(" ")));
        }
        out
    }
}

#[derive(Copy, Clone, PartialEq)]
enum Section {
    Header,
    Metric,
    Omega,
}

struct Builder {
    chart: Option<Chart>,
    scope: Scope,
    functions: Vec<Function>,
    metric: [[Option<Expr>; 3]; 3],
    omega: [Option<Expr>; 3],
    orientation: Option<i8>,
    refpoint: Option<[BigRational; 3]>,
    signature: Option<[i8; 3]>,
    seen: BTreeSet<&'static str>,
}

fn rational_one() -> BigRational {
    BigRational::from_integer(BigInt::from(1))
}

/// Parses `.ew` text.
pub fn parse_structure(text: &str) -> Result<StructureFile, ParseError> {
    let mut b = Builder {
        chart: None,
        scope: Scope::default(),
        functions: Vec::new(),
        metric: Default::default(),
        omega: Default::default(),
        orientation: None,
        refpoint: None,
        signature: None,
        seen: BTreeSet::new(),
    };
    let mut section = Section::Header;
    let mut last_line = 0;
    let mut metric_at = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.chars().take_while(|c| c.is_whitespace()).count();
        let body = content.trim();
        if body.starts_with("g[") || body.starts_with("w[") {
            let want = if body.starts_with('g') {
                Section::Metric
            } else {
                Section::Omega
            };
            if section != want {
                let block = if want == Section::Metric { "metric" } else { "omega" };
                return Err(ParseError::syntax(
                    line,
                    indent + 1,
                    format!("entry outside the `{block}:` block"),
                ));
            }
            b.entry(content, line)?;
            continue;
        }
        let Some(colon) = body.find(':') else {
            return Err(ParseError::syntax(
                line,
                indent + 1,
                "expected `key: value` or a component assignment",
            ));
        };
        let key = body[..colon].trim();
        let value = &body[colon + 1..];
        let value_col = indent + body[..colon + 1].chars().count() + 1;
        section = Section::Header;
        match key {
            "coords" => b.coords(value, line, value_col)?,
            "functions" => b.declare_functions(value, line, value_col)?,
            "metric" | "omega" => {
                b.once(if key == "metric" { "metric" } else { "omega" }, line, indent + 1)?;
                b.require_chart(line, indent + 1)?;
                if !value.trim().is_empty() {
                    return Err(ParseError::syntax(
                        line,
                        value_col,
                        format!("`{key}:` starts a block; put entries on the following lines"),
                    ));
                }
                if key == "metric" {
                    metric_at = Some((line, indent + 1));
                    section = Section::Metric;
                } else {
                    section = Section::Omega;
                }
            }
            "orientation" => {
                b.once("orientation", line, indent + 1)?;
                b.orientation = Some(match value.trim() {
                    "+1" | "1" => 1,
                    "-1" => -1,
                    other => {
                        return Err(ParseError::syntax(
                            line,
                            value_col,
                            format!("orientation must be +1 or -1, found `{other}`"),
                        ))
                    }
                });
            }
            "refpoint" => {
                b.once("refpoint", line, indent + 1)?;
                b.refpoint = Some(refpoint(value, line, value_col)?);
            }
            "signature" => {
                b.once("signature", line, indent + 1)?;
                b.signature = Some(signature(value, line, value_col)?);
            }
            other => return Err(ParseError::syntax(line, indent + 1, format!("unknown key `{other}`"))),
        }
    }
    let Some(chart) = b.chart else {
        return Err(ParseError::Dimension {
            line: last_line.max(1),
            col: 1,
            message: "no `coords:` line; exactly 3 coordinates are required".into(),
        });
    };
    let z = Expr::zero;
    let metric: [[Expr; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let (a, c) = if i <= j { (i, j) } else { (j, i) };
            b.metric[a][c].clone().unwrap_or_else(z)
        })
    });
    if det3(&metric).is_zero() {
        let (line, col) = metric_at.unwrap_or((last_line, 1));
        return Err(ParseError::Singular { line, col });
    }
    let chart = match b.signature {
        Some(s) => chart.with_signature(s),
        None => chart,
    };
    Ok(StructureFile {
        chart,
        functions: b.functions,
        metric,
        omega: b.omega.map(|w| w.unwrap_or_else(z)),
        orientation: b.orientation.unwrap_or(1),
        refpoint: b.refpoint.unwrap_or_else(|| std::array::from_fn(|_| rational_one())),
        signature: b.signature,
    })
}

impl Builder {
    fn once(&mut self, key: &'static str, line: usize, col: usize) -> Result<(), ParseError> {
        if !self.seen.insert(key) {
            return Err(ParseError::DuplicateAssignment {
                line,
                col,
                target: format!("{key}:"),
            });
        }
        Ok(())
    }

    fn require_chart(&self, line: usize, col: usize) -> Result<(), ParseError> {
        if self.chart.is_none() {
            return Err(ParseError::Dimension {
                line,
                col,
                message: "`coords:` must come first".into(),
            });
        }
        Ok(())
    }

    fn coords(&mut self, value: &str, line: usize, col: usize) -> Result<(), ParseError> {
        self.once("coords", line, 1)?;
        let names = words(value, col);
        for &(w, c) in &names {
            let ok = w.chars().next().is_some_and(|ch| ch.is_alphabetic() || ch == '_')
                && w.chars().all(|ch| ch.is_alphanumeric() || ch == '_');
            if !ok {
                return Err(ParseError::syntax(
                    line,
                    c,
                    format!("`{w}` is not a valid coordinate name"),
                ));
            }
        }
        if names.len() != 3 {
            return Err(ParseError::Dimension {
                line,
                col,
                message: format!("exactly 3 coordinates are required, found {}", names.len()),
            });
        }
        let chart = Chart::new([names[0].0, names[1].0, names[2].0]).map_err(|_| ParseError::DuplicateAssignment {
            line,
            col,
            target: "coordinate name".into(),
        })?;
        self.scope = Scope::new(&chart.coords());
        self.chart = Some(chart);
        Ok(())
    }

    fn declare_functions(&mut self, value: &str, line: usize, col: usize) -> Result<(), ParseError> {
        self.once("functions", line, 1)?;
        self.require_chart(line, 1)?;
        let coords = self.scope.clone();
        let mut p = Parser::new(tokenize(value, line)?, 0, &coords);
        let shift = col - 1;
        let pos = |t: &super::parser::Token| t.col + shift;
        let mut declared: HashMap<String, Function> = HashMap::new();
        while p.peek().tok != Tok::Eof {
            let t = p.next();
            let Tok::Ident(name) = t.tok.clone() else {
                return Err(ParseError::syntax(
                    line,
                    pos(&t),
                    "expected a function declaration such as `R(t)`",
                ));
            };
            if coords.coordinate(&name).is_some() {
                return Err(ParseError::DuplicateAssignment {
                    line,
                    col: pos(&t),
                    target: name,
                });
            }
            let open = p.next();
            if open.tok != Tok::LParen {
                return Err(ParseError::syntax(
                    line,
                    pos(&open),
                    "expected `(` after the function name",
                ));
            }
            let mut params = Vec::new();
            loop {
                let a = p.next();
                let Tok::Ident(pn) = a.tok.clone() else {
                    return Err(ParseError::syntax(line, pos(&a), "expected a coordinate name"));
                };
                let Some(c) = coords.coordinate(&pn) else {
                    return Err(ParseError::UnknownSymbol {
                        line,
                        col: pos(&a),
                        name: pn,
                    });
                };
                if params.contains(&c) {
                    return Err(ParseError::DuplicateAssignment {
                        line,
                        col: pos(&a),
                        target: pn,
                    });
                }
                params.push(c);
                let sep = p.next();
                match sep.tok {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    _ => return Err(ParseError::syntax(line, pos(&sep), "expected `,` or `)`")),
                }
            }
            if declared.contains_key(&name) {
                return Err(ParseError::DuplicateAssignment {
                    line,
                    col: pos(&t),
                    target: name,
                });
            }
            let f = Function::new(&name, &params);
            declared.insert(name, f);
            self.functions.push(f);
            self.scope = std::mem::take(&mut self.scope).with_function(f);
            if p.peek().tok == Tok::Comma {
                p.next();
            }
        }
        Ok(())
    }

    fn entry(&mut self, raw: &str, line: usize) -> Result<(), ParseError> {
        let tokens = tokenize(raw, line)?;
        let mut p = Parser::new(tokens, 0, &self.scope);
        let head = p.next();
        let is_metric = head.tok == Tok::Ident("g".into());
        p.expect(Tok::LBracket)?;
        let rank = if is_metric { 2 } else { 1 };
        let mut idx = Vec::new();
        for k in 0..rank {
            if k > 0 {
                p.expect(Tok::Comma)?;
            }
            let t = p.next();
            let Tok::Int(n) = &t.tok else {
                return Err(ParseError::syntax(line, t.col, "expected an index 1, 2 or 3"));
            };
            let i = num_traits::ToPrimitive::to_usize(n).unwrap_or(usize::MAX);
            if !(1..=3).contains(&i) {
                return Err(ParseError::Dimension {
                    line,
                    col: t.col,
                    message: format!("index {n} is out of range 1..3"),
                });
            }
            idx.push(i - 1);
        }
        p.expect(Tok::RBracket)?;
        p.expect(Tok::Equals)?;
        let value = p.expression()?;
        p.expect_end()?;
        let target = if is_metric {
            format!("g[{},{}]", idx[0] + 1, idx[1] + 1)
        } else {
            format!("w[{}]", idx[0] + 1)
        };
        let slot = if is_metric {
            if idx[0] > idx[1] {
                return Err(ParseError::Dimension {
                    line,
                    col: head.col,
                    message: format!("{target}: give metric entries with i <= j"),
                });
            }
            &mut self.metric[idx[0]][idx[1]]
        } else {
            &mut self.omega[idx[0]]
        };
        if slot.is_some() {
            return Err(ParseError::DuplicateAssignment {
                line,
                col: head.col,
                target,
            });
        }
        *slot = Some(value);
        Ok(())
    }
}

/// Whitespace-separated words with their 1-based columns.
fn words(value: &str, col: usize) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, (byte, ch)) in value.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((byte, k)),
            (true, Some((b0, k0))) => {
                out.push((&value[b0..byte], col + k0));
                start = None;
            }
            _ => {}
        }
    }
    if let Some((b0, k0)) = start {
        out.push((&value[b0..], col + k0));
    }
    out
}

fn refpoint(value: &str, line: usize, col: usize) -> Result<[BigRational; 3], ParseError> {
    let ws = words(value, col);
    if ws.len() != 3 {
        return Err(ParseError::Dimension {
            line,
            col,
            message: format!("refpoint needs 3 values, found {}", ws.len()),
        });
    }
    let mut out: [BigRational; 3] = std::array::from_fn(|_| rational_one());
    for (k, &(w, c)) in ws.iter().enumerate() {
        out[k] = BigRational::from_str(w.trim_start_matches('+'))
            .map_err(|_| ParseError::syntax(line, c, format!("`{w}` is not a rational number")))?;
    }
    Ok(out)
}

fn signature(value: &str, line: usize, col: usize) -> Result<[i8; 3], ParseError> {
    let mut signs = Vec::new();
    for (k, ch) in value.chars().enumerate() {
        match ch {
            '+' => signs.push(1),
            '-' => signs.push(-1),
            c if c.is_whitespace() || c == ',' => {}
            c => {
                return Err(ParseError::syntax(
                    line,
                    col + k,
                    format!("signature entries are `+` or `-`, found `{c}`"),
                ))
            }
        }
    }
    if signs.len() != 3 {
        return Err(ParseError::Dimension {
            line,
            col,
            message: format!("signature needs 3 signs, found {}", signs.len()),
        });
    }
    Ok([signs[0], signs[1], signs[2]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::case1_formal;

    const CASE1: &str = "coords: y x t
functions: R(t) S(t)
metric:
  g[1,1] = 1
  g[2,3] = 1
  g[3,3] = x*(R(t) - y/2) + y^4/48 + R(t)*y^3/12 + S(t)*y
omega:
  w[3] = y
orientation: +1
refpoint: 1 1 1
";

    #[test]
    fn case1_file_matches_catalog() {
        let f = parse_structure(CASE1).unwrap();
        assert_eq!(f.to_structure().unwrap(), case1_formal());
    }

    #[test]
    fn render_round_trips() {
        let f = parse_structure(CASE1).unwrap();
        assert_eq!(parse_structure(&f.render()).unwrap(), f);
        let g = StructureFile::from_structure(&case1_formal());
        assert_eq!(g, f);
    }

    #[test]
    fn missing_coordinate() {
        let err = parse_structure("coords: y x\nmetric:\n").unwrap_err();
        assert!(matches!(err, ParseError::Dimension { line: 1, .. }), "{err:?}");
    }

    #[test]
    fn duplicate_assignment() {
        let text = "coords: y x t\nmetric:\n  g[2,3] = 1\n  g[2,3] = 1\n";
        let err = parse_structure(text).unwrap_err();
        assert!(
            matches!(err, ParseError::DuplicateAssignment { line: 4, col: 3, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn positioned_errors() {
        let err = parse_structure("coords: y x t\nmetric:\n  g[1,1] = y +* 2\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 3, col: 15, .. }), "{err:?}");
        let err = parse_structure("coords: y x t\nmetric:\n  g[1,1] = R(t)\n").unwrap_err();
        assert!(
            matches!(err, ParseError::UnknownSymbol { line: 3, col: 12, .. }),
            "{err:?}"
        );
        let err = parse_structure("coords: y x t\nmetric:\n  g[3,1] = 1\n").unwrap_err();
        assert!(matches!(err, ParseError::Dimension { line: 3, .. }), "{err:?}");
        let err = parse_structure("coords: y x t\nomega:\n  w[4] = 1\n").unwrap_err();
        assert!(matches!(err, ParseError::Dimension { line: 3, col: 5, .. }), "{err:?}");
        let err = parse_structure("coords: y x t\nfunctions: R(q)\n").unwrap_err();
        assert!(
            matches!(err, ParseError::UnknownSymbol { line: 2, col: 14, .. }),
            "{err:?}"
        );
        let err = parse_structure("metric:\n").unwrap_err();
        assert!(matches!(err, ParseError::Dimension { .. }), "{err:?}");
        let err = parse_structure("coords: y x t\ncolour: red\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, col: 1, .. }), "{err:?}");
        let err = parse_structure("coords: y x t\n  g[1,1] = 1\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn optional_declarations() {
        let f = parse_structure(
            "coords: y x t\nmetric:\n g[1,1]=1\n g[2,3]=1\nrefpoint: 1/2 -1 3\norientation: -1\nsignature: ++-\n",
        )
        .unwrap();
        assert_eq!(f.orientation, -1);
        assert_eq!(f.refpoint[0], BigRational::new(1.into(), 2.into()));
        assert_eq!(f.signature, Some([1, 1, -1]));
        assert_eq!(parse_structure(&f.render()).unwrap(), f);
    }

    #[test]
    fn comments_and_blank_lines() {
        let f = parse_structure("# flat\n\ncoords: y x t   # chart\nmetric:\n  g[1,1] = 1  # dy^2\n  g[2,3] = 1\n")
            .unwrap();
        assert_eq!(f.to_structure().unwrap(), crate::catalog::flat());
    }

    #[test]
    fn singular_metric_points_at_block() {
        let err = parse_structure("coords: y x t\n\nmetric:\n  g[1,1] = 1\n").unwrap_err();
        assert_eq!(err, ParseError::Singular { line: 3, col: 1 });
    }
}
