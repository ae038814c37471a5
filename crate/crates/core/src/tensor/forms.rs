use super::{Slot, Tensor, TensorError};
use crate::expr::{Expr, ExprError};

/// `dφ` for a scalar, `(dα)_ij = ∂_i α_j - ∂_j α_i` for a one-form.
pub fn exterior_derivative(a: &Tensor) -> Result<Tensor, TensorError> {
    let chart = a.chart().clone();
    let out = match a.slots() {
        [] => Tensor::try_from_fn::<ExprError>(&chart, &[Slot::Down], |idx| a.value().diff(chart.coord(idx[0])))?,
        [Slot::Down] => Tensor::try_from_fn::<ExprError>(&chart, &[Slot::Down, Slot::Down], |idx| {
            let (i, j) = (idx[0], idx[1]);
            if i == j {
                return Ok(Expr::zero());
            }
            Ok(&a.get(&[j]).diff(chart.coord(i))? - &a.get(&[i]).diff(chart.coord(j))?)
        })?,
        other => {
            return Err(TensorError::Valence(format!(
                "exterior derivative of {other:?} is not supported"
            )))
        }
    };
    Ok(out.with_weight(a.weight().clone()))
}

/// `(α ∧ β)_ij = α_i β_j - α_j β_i` for one-forms.
pub fn wedge_one_forms(a: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
    for t in [a, b] {
        if t.slots() != [Slot::Down] {
            return Err(TensorError::Valence(format!("one-form expected, got {:?}", t.slots())));
        }
    }
    Ok(Tensor::from_fn(a.chart(), &[Slot::Down, Slot::Down], |idx| {
        let (i, j) = (idx[0], idx[1]);
        &(a.get(&[i]) * b.get(&[j])) - &(a.get(&[j]) * b.get(&[i]))
    }))
}

/// The `dx^1 ∧ dx^2 ∧ dx^3` coefficient of `α ∧ β`, for a one-form `α` and
/// a two-form `β = β_ij dx^i ⊗ dx^j` (so `β = Σ_{i<j} β_ij dx^i ∧ dx^j`).
pub fn wedge(a: &Tensor, b: &Tensor) -> Result<Expr, TensorError> {
    if a.slots() != [Slot::Down] || b.slots() != [Slot::Down, Slot::Down] {
        return Err(TensorError::Valence(format!(
            "wedge needs a one-form and a two-form, got {:?} and {:?}",
            a.slots(),
            b.slots()
        )));
    }
    let t1 = a.get(&[0]) * b.get(&[1, 2]);
    let t2 = a.get(&[1]) * b.get(&[0, 2]);
    let t3 = a.get(&[2]) * b.get(&[0, 1]);
    Ok(&(&t1 - &t2) + &t3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Symbol;
    use crate::tensor::Chart;

    fn c(name: &str) -> Expr {
        Expr::symbol(Symbol::coordinate(name))
    }

    fn e(n: i64) -> Expr {
        Expr::int(n)
    }

    #[test]
    fn d_of_y_dt() {
        let ch = Chart::yxt();
        let w = Tensor::one_form(&ch, [e(0), e(0), c("y")]);
        let dw = exterior_derivative(&w).unwrap();
        assert_eq!(dw.get(&[0, 2]), &e(1));
        assert_eq!(dw.get(&[2, 0]), &e(-1));
        assert_eq!(dw.nonzero().len(), 2);
        let dt = Tensor::one_form(&ch, [e(0), e(0), e(1)]);
        assert!(exterior_derivative(&dt).unwrap().is_zero());
    }

    #[test]
    fn d_squared_vanishes() {
        let ch = Chart::yxt();
        let (y, x, t) = (c("y"), c("x"), c("t"));
        let phi = (&(&y * &x) * &t).checked_div(&(&(&x * &x) + &e(1))).unwrap();
        let ddphi = exterior_derivative(&exterior_derivative(&Tensor::scalar(&ch, phi)).unwrap()).unwrap();
        assert!(ddphi.is_zero());
    }

    #[test]
    fn wedge_values() {
        let ch = Chart::yxt();
        let w = Tensor::one_form(&ch, [e(0), e(0), c("y")]);
        let dw = exterior_derivative(&w).unwrap();
        assert!(wedge(&w, &dw).unwrap().is_zero());
        let dy = Tensor::one_form(&ch, [e(1), e(0), e(0)]);
        let dx = Tensor::one_form(&ch, [e(0), e(1), e(0)]);
        let dt = Tensor::one_form(&ch, [e(0), e(0), e(1)]);
        let dxdt = wedge_one_forms(&dx, &dt).unwrap();
        assert_eq!(wedge(&dy, &dxdt).unwrap(), e(1));
        assert!(wedge(&dx, &dxdt).unwrap().is_zero());
    }
}
