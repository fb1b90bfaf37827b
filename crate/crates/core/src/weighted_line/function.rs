use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

pub type ScalarMap = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Derivative {
    Analytic(ScalarMap),
    /// Central differences with step `1e-6 * (1 + |x|)`.
    Numeric,
}

/// A function on an interval of the line, together with its derivative.
#[derive(Clone)]
pub struct LineFunction {
    domain: (f64, f64),
    value: ScalarMap,
    derivative: Derivative,
    /// `Some(a)` when the function is `b + a * int_0^x w^{1/(1-p)}` for the
    /// weight it was built from.
    pub(crate) conjugate_coef: Option<f64>,
}

impl fmt::Debug for LineFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LineFunction")
            .field("domain", &self.domain)
            .field("numeric_derivative", &self.has_numeric_derivative())
            .field("conjugate_coef", &self.conjugate_coef)
            .finish()
    }
}

impl LineFunction {
    /// A function whose derivative is obtained by differencing.
    pub fn numeric(domain: (f64, f64), value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        LineFunction {
            domain,
            value: Arc::new(move |x| Ok(value(x))),
            derivative: Derivative::Numeric,
            conjugate_coef: None,
        }
    }

    pub fn analytic(
        domain: (f64, f64),
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        LineFunction {
            domain,
            value: Arc::new(move |x| Ok(value(x))),
            derivative: Derivative::Analytic(Arc::new(move |x| Ok(derivative(x)))),
            conjugate_coef: None,
        }
    }

    pub fn constant(domain: (f64, f64), c: f64) -> Self {
        LineFunction::analytic(domain, move |_| c, |_| 0.0)
    }

    pub(crate) fn from_maps(domain: (f64, f64), value: ScalarMap, derivative: Derivative) -> Self {
        LineFunction {
            domain,
            value,
            derivative,
            conjugate_coef: None,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn has_numeric_derivative(&self) -> bool {
        matches!(self.derivative, Derivative::Numeric)
    }

    fn check(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain;
        if x >= lo && x <= hi && x.is_finite() {
            Ok(())
        } else {
            Err(Error::DomainMismatch { x, lo, hi })
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        (self.value)(x)
    }

    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        match &self.derivative {
            Derivative::Analytic(d) => d(x),
            Derivative::Numeric => {
                let h = 1e-6 * (1.0 + x.abs());
                let (lo, hi) = self.domain;
                let f = &self.value;
                if x - h >= lo && x + h <= hi {
                    return Ok((f(x + h)? - f(x - h)?) / (2.0 * h));
                }
                // Second-order one-sided stencils near the ends of the domain.
                if x + 2.0 * h <= hi {
                    Ok((-3.0 * f(x)? + 4.0 * f(x + h)? - f(x + 2.0 * h)?) / (2.0 * h))
                } else if x - 2.0 * h >= lo {
                    Ok((3.0 * f(x)? - 4.0 * f(x - h)? + f(x - 2.0 * h)?) / (2.0 * h))
                } else {
                    Err(Error::DegenerateInterval { a: lo, b: hi })
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_derivative_matches_analytic() {
        let f = LineFunction::numeric((-2.0, 2.0), |x| x.sin());
        for &x in &[-1.5, 0.0, 0.7, 2.0] {
            assert!((f.derivative(x).unwrap() - x.cos()).abs() < 1e-6, "{x}");
        }
        assert!(f.has_numeric_derivative());
    }

    #[test]
    fn evaluation_outside_domain_fails() {
        let f = LineFunction::constant((0.0, 1.0), 3.0);
        assert_eq!(f.eval(0.5).unwrap(), 3.0);
        assert!(matches!(f.eval(1.5), Err(Error::DomainMismatch { .. })));
    }
}
