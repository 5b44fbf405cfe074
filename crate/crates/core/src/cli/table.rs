use super::Sink;
use crate::error::Result;
use crate::mechanism::{
    compose_smoothness, compose_symbolic, poa_from_smoothness, poa_symbolic, Monomial, SmoothnessParams, Symbol,
};
use crate::rational::{self, half, int, ratio, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub lambda: Monomial,
    pub mu: Rational,
    pub alpha: Monomial,
    pub poa: Monomial,
}

fn rational_row(label: String, p: SmoothnessParams, alpha: Rational) -> Result<TableRow> {
    let c = compose_smoothness(&p, &alpha)?;
    Ok(TableRow {
        label,
        lambda: Monomial::constant(c.lambda.clone()),
        mu: c.mu.clone(),
        alpha: Monomial::constant(alpha),
        poa: Monomial::constant(poa_from_smoothness(&c)?),
    })
}

fn symbolic_row(label: String, p: SmoothnessParams, alpha: Monomial) -> Result<TableRow> {
    let c = compose_symbolic(&p, &alpha)?;
    Ok(TableRow {
        label,
        poa: poa_symbolic(&c)?,
        lambda: c.lambda,
        mu: c.mu,
        alpha,
    })
}

/// Composed price-of-anarchy bounds for every relax-and-round mechanism.
pub fn paper_table() -> Result<Vec<TableRow>> {
    let hv = SmoothnessParams::half_value;
    let mut rows = vec![rational_row("multi-unit".into(), hv(half(), int(2))?, int(8))?];
    for d in 1..=5i64 {
        rows.push(rational_row(format!("d-sparse d={d}"), hv(half(), int(d + 1))?, int(8 * d))?);
    }
    rows.push(rational_row("maxtsp-fisher".into(), hv(half(), int(3))?, int(2))?);
    for eps in [ratio(1, 10), half(), int(1)] {
        let label = format!("flow eps={}", rational::format(&eps));
        rows.push(rational_row(label, hv(half(), int(1))?, int(1) + eps)?);
    }
    rows.push(symbolic_row("xos".into(), hv(half(), int(2))?, Monomial::symbol(Symbol::EOverEMinusOne))?);
    for k in 1..=3i64 {
        let alpha = Monomial::symbol(Symbol::Named(format!("alpha_{k}")));
        rows.push(symbolic_row(format!("mph-k k={k}"), hv(half(), int(k + 1))?, alpha)?);
    }
    rows.push(rational_row("symmetric-ca fair".into(), hv(half(), int(2))?, int(16))?);
    Ok(rows)
}

pub(super) fn emit(sink: &mut Sink) -> Result<()> {
    for r in paper_table()? {
        let decimal = r.poa.approx().map(|x| format!("{x:.6}")).unwrap_or_default();
        sink.push(&r.label, "lambda", r.lambda.to_string(), String::new(), "", String::new());
        sink.rat(&r.label, "mu", &r.mu);
        sink.push(&r.label, "alpha", r.alpha.to_string(), String::new(), "", String::new());
        sink.push(&r.label, "poa", r.poa.to_string(), decimal, "", String::new());
    }
    Ok(())
}
