//! Process-wide symbol registry.
//!
//! Coordinates are interned by name, functions by `(name, parameters)`, and
//! jet symbols by `(function, derivative orders, arguments)`. Jets are the
//! indeterminates standing for an arbitrary function and its partial
//! derivatives, so `R(t)`, `R'(t)`, `R''(t)` are algebraically independent.
//! Custom symbols carry an explicit derivative rule such as `f_t = -R f / 2`.
//!
//! Interning is invisible to callers: equal keys always give the same symbol.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Arc, LazyLock, RwLock};

use super::{Expr, ExprError};

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(u32);

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Function(u32);

/// A jet symbol: `function` differentiated `orders[k]` times in its k-th
/// parameter, evaluated at `args`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Jet {
    pub function: Function,
    pub orders: Vec<u32>,
    pub args: Vec<Expr>,
}

impl Jet {
    pub fn total_order(&self) -> u32 {
        self.orders.iter().sum()
    }
}

#[derive(Clone, Debug)]
pub enum SymbolKind {
    Coordinate,
    Jet(Jet),
    Custom,
}

struct SymbolData {
    display: String,
    kind: SymbolKind,
}

struct FunctionData {
    name: String,
    params: Vec<Symbol>,
}

#[derive(Default)]
struct Registry {
    symbols: Vec<Arc<SymbolData>>,
    coordinates: HashMap<String, Symbol>,
    functions: Vec<Arc<FunctionData>>,
    function_index: HashMap<(String, Vec<Symbol>), Function>,
    jets: HashMap<Jet, Symbol>,
    rules: HashMap<Symbol, Arc<Vec<(Symbol, Expr)>>>,
    partials: HashMap<(Symbol, Symbol), Expr>,
}

static REGISTRY: LazyLock<RwLock<Registry>> = LazyLock::new(|| RwLock::new(Registry::default()));

static MAX_JET_ORDER: AtomicU32 = AtomicU32::new(6);

/// Caps the total derivative order of any jet symbol created from now on.
pub fn set_max_jet_order(n: u32) {
    MAX_JET_ORDER.store(n, Ordering::Relaxed);
}

pub fn max_jet_order() -> u32 {
    MAX_JET_ORDER.load(Ordering::Relaxed)
}

fn read() -> std::sync::RwLockReadGuard<'static, Registry> {
    REGISTRY.read().unwrap_or_else(|e| e.into_inner())
}

fn write() -> std::sync::RwLockWriteGuard<'static, Registry> {
    REGISTRY.write().unwrap_or_else(|e| e.into_inner())
}

fn push_symbol(reg: &mut Registry, display: String, kind: SymbolKind) -> Symbol {
    let s = Symbol(reg.symbols.len() as u32);
    reg.symbols.push(Arc::new(SymbolData { display, kind }));
    s
}

impl Symbol {
    #[cfg(test)]
    pub(crate) fn from_raw(i: u32) -> Symbol {
        Symbol(i)
    }

    /// The coordinate named `name`, created on first use.
    pub fn coordinate(name: &str) -> Symbol {
        if let Some(&s) = read().coordinates.get(name) {
            return s;
        }
        let mut reg = write();
        if let Some(&s) = reg.coordinates.get(name) {
            return s;
        }
        let s = push_symbol(&mut reg, name.to_string(), SymbolKind::Coordinate);
        reg.coordinates.insert(name.to_string(), s);
        s
    }

    /// A fresh atom whose partial derivatives are given by `rules`, which
    /// receives the new symbol so that rules may refer to it. Coordinates
    /// absent from the rules differentiate it to zero.
    pub fn custom(name: &str, rules: impl FnOnce(Symbol) -> Vec<(Symbol, Expr)>) -> Symbol {
        let s = push_symbol(&mut write(), name.to_string(), SymbolKind::Custom);
        let rules = rules(s);
        write().rules.insert(s, Arc::new(rules));
        s
    }

    pub fn name(&self) -> String {
        read().symbols[self.0 as usize].display.clone()
    }

    pub fn kind(&self) -> SymbolKind {
        read().symbols[self.0 as usize].kind.clone()
    }

    pub fn is_coordinate(&self) -> bool {
        matches!(read().symbols[self.0 as usize].kind, SymbolKind::Coordinate)
    }

    pub fn jet(&self) -> Option<Jet> {
        match &read().symbols[self.0 as usize].kind {
            SymbolKind::Jet(j) => Some(j.clone()),
            _ => None,
        }
    }

    pub fn custom_rules(&self) -> Option<Arc<Vec<(Symbol, Expr)>>> {
        read().rules.get(self).cloned()
    }

    /// Ordering key for rendering: kind rank, then display name, then id.
    pub(crate) fn sort_key(&self) -> (u8, String, u32) {
        let reg = read();
        let data = &reg.symbols[self.0 as usize];
        let rank = match data.kind {
            SymbolKind::Coordinate => 0,
            SymbolKind::Jet(_) => 1,
            SymbolKind::Custom => 2,
        };
        (rank, data.display.clone(), self.0)
    }

    /// Partial derivative of this indeterminate with respect to coordinate `c`.
    pub fn partial(&self, c: Symbol) -> Result<Expr, ExprError> {
        if let Some(e) = read().partials.get(&(*self, c)) {
            return Ok(e.clone());
        }
        let kind = self.kind();
        let value = match kind {
            SymbolKind::Coordinate => {
                if *self == c {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            SymbolKind::Custom => {
                let rules = self.custom_rules().unwrap_or_default();
                rules
                    .iter()
                    .find(|(v, _)| *v == c)
                    .map(|(_, e)| e.clone())
                    .unwrap_or_else(Expr::zero)
            }
            SymbolKind::Jet(jet) => {
                let mut acc = Expr::zero();
                for (k, arg) in jet.args.iter().enumerate() {
                    let da = arg.diff(c)?;
                    if da.is_zero() {
                        continue;
                    }
                    let mut orders = jet.orders.clone();
                    orders[k] += 1;
                    let next = jet.function.jet(&orders, &jet.args)?;
                    acc = &acc + &(&Expr::symbol(next) * &da);
                }
                acc
            }
        };
        write().partials.insert((*self, c), value.clone());
        Ok(value)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match REGISTRY.try_read() {
            Ok(reg) if (self.0 as usize) < reg.symbols.len() => {
                write!(f, "{}", reg.symbols[self.0 as usize].display)
            }
            _ => write!(f, "#{}", self.0),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Function {
    /// The function `name` of the given coordinate parameters.
    pub fn new(name: &str, params: &[Symbol]) -> Function {
        let key = (name.to_string(), params.to_vec());
        if let Some(&f) = read().function_index.get(&key) {
            return f;
        }
        let mut reg = write();
        if let Some(&f) = reg.function_index.get(&key) {
            return f;
        }
        let f = Function(reg.functions.len() as u32);
        reg.functions.push(Arc::new(FunctionData {
            name: name.to_string(),
            params: params.to_vec(),
        }));
        reg.function_index.insert(key, f);
        f
    }

    pub fn name(&self) -> String {
        read().functions[self.0 as usize].name.clone()
    }

    pub fn params(&self) -> Vec<Symbol> {
        read().functions[self.0 as usize].params.clone()
    }

    pub fn arity(&self) -> usize {
        read().functions[self.0 as usize].params.len()
    }

    /// The function applied to its own parameters, e.g. `R(t)`.
    pub fn formal(&self) -> Expr {
        let args: Vec<Expr> = self.params().into_iter().map(Expr::symbol).collect();
        Expr::symbol(
            self.jet(&vec![0; args.len()], &args)
                .expect("order-zero jet is always admissible"),
        )
    }

    /// The formal derivative of the given orders at the parameters.
    pub fn derivative(&self, orders: &[u32]) -> Result<Expr, ExprError> {
        let args: Vec<Expr> = self.params().into_iter().map(Expr::symbol).collect();
        Ok(Expr::symbol(self.jet(orders, &args)?))
    }

    pub fn apply(&self, args: &[Expr]) -> Result<Expr, ExprError> {
        Ok(Expr::symbol(self.jet(&vec![0; args.len()], args)?))
    }

    /// Interns the jet symbol with the given orders and arguments.
    pub fn jet(&self, orders: &[u32], args: &[Expr]) -> Result<Symbol, ExprError> {
        let arity = self.arity();
        if orders.len() != arity || args.len() != arity {
            return Err(ExprError::ArityMismatch {
                function: self.name(),
                expected: arity,
                found: args.len(),
            });
        }
        let key = Jet {
            function: *self,
            orders: orders.to_vec(),
            args: args.to_vec(),
        };
        if let Some(&s) = read().jets.get(&key) {
            return Ok(s);
        }
        let total = key.total_order();
        let max = max_jet_order();
        if total > max {
            return Err(ExprError::JetDepthExceeded {
                function: self.name(),
                order: total,
                max,
            });
        }
        let display = jet_display(&self.name(), &self.params(), orders, args);
        let mut reg = write();
        if let Some(&s) = reg.jets.get(&key) {
            return Ok(s);
        }
        let s = push_symbol(&mut reg, display, SymbolKind::Jet(key.clone()));
        reg.jets.insert(key, s);
        Ok(s)
    }
}

fn jet_display(name: &str, params: &[Symbol], orders: &[u32], args: &[Expr]) -> String {
    let mut out = name.to_string();
    let total: u32 = orders.iter().sum();
    if total > 0 {
        if params.len() == 1 {
            out.extend(std::iter::repeat_n('\'', total as usize));
        } else {
            let names: Vec<String> = params
                .iter()
                .zip(orders)
                .flat_map(|(p, &k)| std::iter::repeat_n(p.name(), k as usize))
                .collect();
            out.push_str(&format!("'[{}]", names.join(",")));
        }
    }
    let rendered: Vec<String> = args.iter().map(|a| a.to_string()).collect();
    out.push('(');
    out.push_str(&rendered.join(", "));
    out.push(')');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_are_interned() {
        assert_eq!(Symbol::coordinate("q1"), Symbol::coordinate("q1"));
        assert_ne!(Symbol::coordinate("q1"), Symbol::coordinate("q2"));
        assert!(Symbol::coordinate("q1").is_coordinate());
    }

    #[test]
    fn jet_tower_advances() {
        let t = Symbol::coordinate("t");
        let r = Function::new("R", &[t]);
        let d = r.formal().diff(t).unwrap();
        assert_eq!(d, r.derivative(&[1]).unwrap());
        assert_eq!(d.to_string(), "R'(t)");
        let y = Symbol::coordinate("y");
        assert!(r.formal().diff(y).unwrap().is_zero());
    }

    #[test]
    fn multi_parameter_display() {
        let y = Symbol::coordinate("y");
        let t = Symbol::coordinate("t");
        let l = Function::new("l", &[y, t]);
        let e = l.formal().diff(y).unwrap().diff(y).unwrap();
        assert_eq!(e.to_string(), "l'[y,y](y, t)");
    }

    #[test]
    fn jet_cap_is_enforced() {
        let s = Symbol::coordinate("s_cap");
        let g = Function::new("gcap", &[s]);
        let err = g.derivative(&[max_jet_order() + 1]).unwrap_err();
        assert!(matches!(err, ExprError::JetDepthExceeded { .. }));
    }
}
