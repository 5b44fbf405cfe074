//! Smoothness parameters, the price-of-anarchy bound they imply, and their
//! composition with oblivious rounding.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};
use crate::rational::{self, int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationMode {
    /// Any deviation, possibly depending on the whole valuation profile.
    General,
    /// Every player deviates to half its true valuation.
    HalfValue,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothnessParams {
    pub lambda: Rational,
    pub mu: Rational,
    pub mode: DeviationMode,
}

impl SmoothnessParams {
    pub fn new(lambda: Rational, mu: Rational, mode: DeviationMode) -> Result<Self> {
        if !lambda.is_positive() {
            return Err(structural("lambda must be positive"));
        }
        if mu.is_negative() {
            return Err(structural("mu must be nonnegative"));
        }
        Ok(Self { lambda, mu, mode })
    }

    pub fn half_value(lambda: Rational, mu: Rational) -> Result<Self> {
        Self::new(lambda, mu, DeviationMode::HalfValue)
    }
}

/// `max(1, mu) / lambda`.
pub fn poa_from_smoothness(p: &SmoothnessParams) -> Result<Rational> {
    if !p.lambda.is_positive() {
        return Err(structural("lambda must be positive"));
    }
    Ok(rational::max(&int(1), &p.mu) / &p.lambda)
}

/// Irrational or unspecified constants carried symbolically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Symbol {
    /// `e / (e - 1)`.
    EOverEMinusOne,
    /// Approximation factor of a rounding scheme that is only known up to
    /// a constant, e.g. `alpha_k`.
    Named(String),
}

impl Symbol {
    fn approx(&self) -> Option<f64> {
        match self {
            Symbol::EOverEMinusOne => Some(std::f64::consts::E / (std::f64::consts::E - 1.0)),
            Symbol::Named(_) => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::EOverEMinusOne => f.write_str("e/(e-1)"),
            Symbol::Named(n) => f.write_str(n),
        }
    }
}

/// `coefficient * prod symbol^power`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coefficient: Rational,
    pub powers: BTreeMap<Symbol, i32>,
}

impl Monomial {
    pub fn constant(c: Rational) -> Self {
        Self {
            coefficient: c,
            powers: BTreeMap::new(),
        }
    }

    pub fn symbol(s: Symbol) -> Self {
        Self {
            coefficient: int(1),
            powers: BTreeMap::from([(s, 1)]),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.powers.is_empty().then_some(&self.coefficient)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut powers = self.powers.clone();
        for (s, p) in &other.powers {
            *powers.entry(s.clone()).or_insert(0) += p;
        }
        powers.retain(|_, p| *p != 0);
        Monomial {
            coefficient: &self.coefficient * &other.coefficient,
            powers,
        }
    }

    pub fn recip(&self) -> Monomial {
        Monomial {
            coefficient: self.coefficient.recip(),
            powers: self.powers.iter().map(|(s, p)| (s.clone(), -p)).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Monomial {
        Monomial {
            coefficient: &self.coefficient * c,
            powers: self.powers.clone(),
        }
    }

    /// Decimal value when every symbol has a known numeric value.
    pub fn approx(&self) -> Option<f64> {
        let mut v = rational::to_f64(&self.coefficient);
        for (s, p) in &self.powers {
            v *= s.approx()?.powi(*p);
        }
        Some(v)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = rational::format(&self.coefficient);
        if self.powers.is_empty() {
            return f.write_str(&c);
        }
        let mut parts = Vec::new();
        if !self.coefficient.is_one() {
            parts.push(c);
        }
        for (s, p) in &self.powers {
            parts.push(if *p == 1 { s.to_string() } else { format!("({s})^{p}") });
        }
        f.write_str(&parts.join("*"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicParams {
    pub lambda: Monomial,
    pub mu: Rational,
    pub mode: DeviationMode,
}

/// Smoothness of the rounded mechanism given smoothness of the relaxation
/// and an `alpha`-approximate oblivious rounding scheme: general mode first
/// halves lambda to reach half-value deviations, then divides by `alpha`.
pub fn compose_symbolic(p: &SmoothnessParams, alpha: &Monomial) -> Result<SymbolicParams> {
    if alpha.as_rational().is_some_and(|a| *a < int(1)) || !alpha.coefficient.is_positive() {
        return Err(structural("rounding factor alpha must be at least 1"));
    }
    let base = match p.mode {
        DeviationMode::HalfValue => Monomial::constant(p.lambda.clone()),
        DeviationMode::General => Monomial::constant(&p.lambda / int(2)),
    };
    Ok(SymbolicParams {
        lambda: base.mul(&alpha.recip()),
        mu: p.mu.clone(),
        mode: DeviationMode::HalfValue,
    })
}

pub fn compose_smoothness(p: &SmoothnessParams, alpha: &Rational) -> Result<SmoothnessParams> {
    let s = compose_symbolic(p, &Monomial::constant(alpha.clone()))?;
    Ok(SmoothnessParams {
        lambda: s.lambda.coefficient,
        mu: s.mu,
        mode: s.mode,
    })
}

/// `max(1, mu) / lambda` with a symbolic lambda.
pub fn poa_symbolic(p: &SymbolicParams) -> Result<Monomial> {
    if !p.lambda.coefficient.is_positive() {
        return Err(structural("lambda must be positive"));
    }
    Ok(p.lambda.recip().scale(&rational::max(&int(1), &p.mu)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn hv(l: Rational, m: Rational) -> SmoothnessParams {
        SmoothnessParams::half_value(l, m).unwrap()
    }

    #[test]
    fn poa_values() {
        assert_eq!(poa_from_smoothness(&hv(int(1), int(1))).unwrap(), int(1));
        assert_eq!(poa_from_smoothness(&hv(ratio(1, 4), int(3))).unwrap(), int(12));
        assert_eq!(poa_from_smoothness(&hv(ratio(1, 16), int(2))).unwrap(), int(32));
        assert_eq!(poa_from_smoothness(&hv(ratio(1, 2), ratio(1, 3))).unwrap(), int(2));
    }

    #[test]
    fn nonpositive_lambda_rejected() {
        assert!(SmoothnessParams::half_value(int(0), int(1)).is_err());
        let raw = SmoothnessParams {
            lambda: int(-1),
            mu: int(1),
            mode: DeviationMode::General,
        };
        assert!(poa_from_smoothness(&raw).is_err());
    }

    #[test]
    fn composition_examples() {
        let c = compose_smoothness(&hv(ratio(1, 2), int(2)), &int(8)).unwrap();
        assert_eq!((c.lambda.clone(), c.mu.clone()), (ratio(1, 16), int(2)));
        assert_eq!(poa_from_smoothness(&c).unwrap(), int(32));

        let p = hv(ratio(3, 7), int(5));
        assert_eq!(compose_smoothness(&p, &int(1)).unwrap(), p);

        let c = compose_smoothness(&hv(ratio(1, 2), int(3)), &int(2)).unwrap();
        assert_eq!(c.lambda, ratio(1, 4));
        assert_eq!(poa_from_smoothness(&c).unwrap(), int(12));

        let general = SmoothnessParams::new(int(1), int(1), DeviationMode::General).unwrap();
        let c = compose_smoothness(&general, &int(2)).unwrap();
        assert_eq!(c.lambda, ratio(1, 4));
        assert_eq!(c.mode, DeviationMode::HalfValue);
    }

    #[test]
    fn alpha_below_one_rejected() {
        assert!(compose_smoothness(&hv(int(1), int(1)), &ratio(1, 2)).is_err());
    }

    #[test]
    fn symbolic_xos() {
        let alpha = Monomial::symbol(Symbol::EOverEMinusOne);
        let s = compose_symbolic(&hv(ratio(1, 2), int(1)), &alpha).unwrap();
        let poa = poa_symbolic(&s).unwrap();
        assert_eq!(poa.coefficient, int(2));
        assert_eq!(poa.powers.get(&Symbol::EOverEMinusOne), Some(&1));
        assert_eq!(poa.to_string(), "2*e/(e-1)");
    }
}
