use std::collections::HashMap;

use super::symbol::{Function, Symbol, SymbolKind};
use super::{Expr, ExprError};

/// Simultaneous substitution map. Functions are bound by an expression in
/// their formal parameters; every jet of a bound function is replaced by the
/// corresponding derivative of that expression, evaluated at the jet's
/// (substituted) arguments.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    symbols: HashMap<Symbol, Expr>,
    functions: HashMap<Function, Expr>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, s: Symbol, value: Expr) -> &mut Self {
        self.symbols.insert(s, value);
        self
    }

    pub fn bind_function(&mut self, f: Function, value: Expr) -> &mut Self {
        self.functions.insert(f, value);
        self
    }

    pub fn with(mut self, s: Symbol, value: Expr) -> Self {
        self.bind(s, value);
        self
    }

    pub fn with_function(mut self, f: Function, value: Expr) -> Self {
        self.bind_function(f, value);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty() && self.functions.is_empty()
    }

    pub fn symbol(&self, s: Symbol) -> Option<&Expr> {
        self.symbols.get(&s)
    }

    pub fn function(&self, f: Function) -> Option<&Expr> {
        self.functions.get(&f)
    }
}

pub(super) fn substitute(e: &Expr, b: &Bindings) -> Result<Expr, ExprError> {
    if b.is_empty() {
        return Ok(e.clone());
    }
    let mut images: HashMap<Symbol, Expr> = HashMap::new();
    for s in e.symbols() {
        images.insert(s, image(s, b)?);
    }
    let (num, den) = eval(e, &images);
    num.checked_div(&den)
}

fn eval(e: &Expr, images: &HashMap<Symbol, Expr>) -> (Expr, Expr) {
    let mut powers: HashMap<(super::Symbol, u32), Expr> = HashMap::new();
    let mut value = |s: Symbol, k: u32| -> Expr {
        powers
            .entry((s, k))
            .or_insert_with(|| images[&s].pow(k as i64).expect("nonnegative power"))
            .clone()
    };
    e.eval_parts(&mut value, Expr::zero(), |c| Expr::from_bigint(c.clone()))
}

fn image(s: Symbol, b: &Bindings) -> Result<Expr, ExprError> {
    let direct = b.symbols.get(&s).cloned();
    match s.kind() {
        SymbolKind::Coordinate => Ok(direct.unwrap_or_else(|| Expr::symbol(s))),
        SymbolKind::Custom => match direct {
            Some(v) => {
                check_rule(s, &v)?;
                Ok(v)
            }
            None => Ok(Expr::symbol(s)),
        },
        SymbolKind::Jet(jet) => {
            let derived = match b.functions.get(&jet.function) {
                Some(body) => {
                    let args = jet
                        .args
                        .iter()
                        .map(|a| substitute(a, b))
                        .collect::<Result<Vec<_>, _>>()?;
                    Some(apply_body(jet.function, body, &jet.orders, &args)?)
                }
                None => None,
            };
            match (direct, derived) {
                (Some(d), Some(v)) => {
                    if d == v {
                        Ok(v)
                    } else {
                        Err(ExprError::InconsistentJetBinding(s.name()))
                    }
                }
                (Some(d), None) => Ok(d),
                (None, Some(v)) => Ok(v),
                (None, None) => {
                    let args = jet
                        .args
                        .iter()
                        .map(|a| substitute(a, b))
                        .collect::<Result<Vec<_>, _>>()?;
                    if args == jet.args {
                        Ok(Expr::symbol(s))
                    } else {
                        Ok(Expr::symbol(jet.function.jet(&jet.orders, &args)?))
                    }
                }
            }
        }
    }
}

/// Derivative of a function body of the given orders, evaluated at `args`.
fn apply_body(f: Function, body: &Expr, orders: &[u32], args: &[Expr]) -> Result<Expr, ExprError> {
    let params = f.params();
    let mut d = body.clone();
    for (p, &k) in params.iter().zip(orders) {
        for _ in 0..k {
            d = d.diff(*p)?;
        }
    }
    let mut at = Bindings::new();
    for (p, a) in params.iter().zip(args) {
        at.bind(*p, a.clone());
    }
    substitute(&d, &at)
}

/// A custom symbol may only be replaced by a value that satisfies its
/// derivative rule.
fn check_rule(s: Symbol, v: &Expr) -> Result<(), ExprError> {
    let rules = s.custom_rules().unwrap_or_default();
    let mut coords: Vec<Symbol> = v.symbols().into_iter().filter(|c| c.is_coordinate()).collect();
    for (c, _) in rules.iter() {
        if !coords.contains(c) {
            coords.push(*c);
        }
    }
    let at = Bindings::new().with(s, v.clone());
    for c in coords {
        let lhs = v.diff(c)?;
        let rhs = match rules.iter().find(|(k, _)| *k == c) {
            Some((_, r)) => substitute_unchecked(r, &at)?,
            None => Expr::zero(),
        };
        if lhs != rhs {
            return Err(ExprError::InconsistentJetBinding(s.name()));
        }
    }
    Ok(())
}

/// Substitution of custom symbols without re-checking their rules (used
/// while checking a rule, which refers to the symbol itself).
fn substitute_unchecked(e: &Expr, b: &Bindings) -> Result<Expr, ExprError> {
    let mut images = HashMap::new();
    for s in e.symbols() {
        let v = match (s.kind(), b.symbols.get(&s)) {
            (SymbolKind::Custom, Some(v)) => v.clone(),
            _ => image(s, b)?,
        };
        images.insert(s, v);
    }
    let (num, den) = eval(e, &images);
    num.checked_div(&den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn jet_coherence() {
        let t = Symbol::coordinate("t");
        let r = Function::new("R", &[t]);
        let tt = Expr::symbol(t);
        let b = Bindings::new().with_function(r, &tt * &tt);
        let e = r.derivative(&[1]).unwrap();
        assert_eq!(e.substitute(&b).unwrap(), &Expr::int(2) * &tt);
    }

    #[test]
    fn numeric_value() {
        let y = Symbol::coordinate("y");
        let e = Expr::symbol(y)
            .pow(4)
            .unwrap()
            .scale(&BigRational::new(1.into(), 48.into()));
        let b = Bindings::new().with(y, Expr::int(2));
        assert_eq!(e.substitute(&b).unwrap(), Expr::rational(1, 3));
    }

    #[test]
    fn composed_arguments_differentiate_by_chain_rule() {
        let t = Symbol::coordinate("t");
        let r = Function::new("R", &[t]);
        let half_t = Expr::symbol(t).scale(&BigRational::new(1.into(), 2.into()));
        let e = r.formal().substitute(&Bindings::new().with(t, half_t.clone())).unwrap();
        assert_eq!(e.to_string(), "R(t/2)");
        let d = e.diff(t).unwrap();
        let want = Expr::symbol(r.jet(&[1], &[half_t]).unwrap()).scale(&BigRational::new(1.into(), 2.into()));
        assert_eq!(d, want);
    }

    #[test]
    fn inconsistent_direct_jet_binding() {
        let t = Symbol::coordinate("t");
        let r = Function::new("R", &[t]);
        let rp = r.derivative(&[1]).unwrap().as_symbol().unwrap();
        let tt = Expr::symbol(t);
        let b = Bindings::new().with_function(r, &tt * &tt).with(rp, Expr::int(5));
        assert!(matches!(
            r.derivative(&[1]).unwrap().substitute(&b),
            Err(ExprError::InconsistentJetBinding(_))
        ));
    }

    #[test]
    fn custom_symbol_binding_must_satisfy_rule() {
        let t = Symbol::coordinate("t");
        let f = Symbol::custom("f", |f| vec![(t, -Expr::symbol(f))]);
        let tt = Expr::symbol(t);
        let bad = Bindings::new().with(f, &tt * &tt);
        assert!(matches!(
            Expr::symbol(f).substitute(&bad),
            Err(ExprError::InconsistentJetBinding(_))
        ));
        // A constant binding fails too: its derivative is 0, not -f.
        let bad = Bindings::new().with(f, Expr::int(3));
        assert!(Expr::symbol(f).substitute(&bad).is_err());
        let g = Symbol::custom("g", |_| vec![]);
        let ok = Bindings::new().with(g, Expr::int(3));
        assert_eq!(Expr::symbol(g).substitute(&ok).unwrap(), Expr::int(3));
    }
}
