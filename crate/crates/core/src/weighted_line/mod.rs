//! p-harmonic and quasiharmonic functions on the weighted line `(R, w dx)`.
//!
//! Every p-harmonic function on the weighted line has the form
//! `u(x) = b + a * int_0^x w^{1/(1-p)} dt`, and its energy over an interval is
//! `|a|^p` times the integral of the conjugate weight over that interval. The
//! bounded and positive Liouville properties therefore reduce to whether the
//! conjugate weight is integrable on the whole line, respectively on at least
//! one half-line.

mod function;
mod weight;

use serde::Serialize;

pub use function::{Derivative, LineFunction, ScalarMap};
pub use weight::{Bound, Integral, Profile, ProfileSpec, Segment, SegmentSpec, Weight};

use std::sync::Arc;

use crate::quadrature::{half_line, simpson, Quad, QuadOptions, TailFlag, TailOptions};
use crate::{Error, Extended, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LineOptions {
    pub quad: QuadOptions,
    pub tail: TailOptions,
}

/// An integral over a possibly unbounded interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineIntegral {
    pub value: Extended,
    pub error: f64,
    pub tail: TailFlag,
    /// Set when a half-line was truncated.
    pub truncation_radius: Option<f64>,
}

impl LineIntegral {
    fn bounded(i: Integral) -> Self {
        LineIntegral {
            value: i.value,
            error: i.error,
            tail: TailFlag::Converged,
            truncation_radius: None,
        }
    }

    fn join(self, other: LineIntegral) -> LineIntegral {
        let tail = match (self.tail, other.tail) {
            // One divergent half decides the sum regardless of the other.
            (TailFlag::DivergenceDetected, _) | (_, TailFlag::DivergenceDetected) => {
                TailFlag::DivergenceDetected
            }
            (a, b) => a.worst(b),
        };
        LineIntegral {
            value: self.value + other.value,
            error: self.error + other.error,
            tail,
            truncation_radius: match (self.truncation_radius, other.truncation_radius) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
        }
    }
}

/// Integrates over `[a, b]`, where either end may be infinite. `piece`
/// integrates over bounded subintervals.
fn integrate_over<F>(a: f64, b: f64, opts: &LineOptions, mut piece: F) -> Result<LineIntegral>
where
    F: FnMut(f64, f64) -> Result<Integral>,
{
    if a.is_nan() || b.is_nan() || !(a < b) {
        return Err(Error::DegenerateInterval { a, b });
    }
    let tail_of = |start: f64, dir: f64, piece: &mut F| -> Result<LineIntegral> {
        let h = half_line(
            |lo, hi| {
                let i = piece(lo, hi)?;
                Ok(Quad {
                    value: i.value.to_f64(),
                    error: i.error,
                    evals: 0,
                })
            },
            start,
            dir,
            &opts.tail,
        )?;
        Ok(LineIntegral {
            value: h.value,
            error: h.error,
            tail: h.tail,
            truncation_radius: Some(h.truncation_radius),
        })
    };
    match (a.is_finite(), b.is_finite()) {
        (true, true) => piece(a, b).map(LineIntegral::bounded),
        (true, false) => tail_of(a, 1.0, &mut piece),
        (false, true) => tail_of(b, -1.0, &mut piece),
        (false, false) => {
            let left = tail_of(0.0, -1.0, &mut piece)?;
            let right = tail_of(0.0, 1.0, &mut piece)?;
            Ok(left.join(right))
        }
    }
}

/// `int_a^b w^{1/(1-p)} dt`; `a` may be `-inf` and `b` may be `+inf`.
pub fn conjugate_integral(w: &Weight, a: f64, b: f64, opts: &LineOptions) -> Result<LineIntegral> {
    w.check_within(a, b)?;
    let gamma = w.conjugate_exponent();
    integrate_over(a, b, opts, |lo, hi| w.integrate_power(gamma, lo, hi, &opts.quad))
}

fn anchor(w: &Weight) -> f64 {
    let (lo, hi) = w.domain();
    0f64.clamp(lo, hi)
}

/// Signed `int_from^to w^{1/(1-p)}` over a bounded interval.
fn signed_conjugate(w: &Weight, from: f64, to: f64, quad: &QuadOptions) -> Result<f64> {
    if from == to {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if from < to { (from, to, 1.0) } else { (to, from, -1.0) };
    match w.integrate_power(w.conjugate_exponent(), lo, hi, quad)?.value {
        Extended::Finite(v) => Ok(sign * v),
        Extended::Infinite => Err(Error::InfiniteConjugateIntegral { a: lo, b: hi }),
    }
}

/// `u(x) = b_coef + a_coef * int_0^x w^{1/(1-p)} dt`, the general p-harmonic
/// function on the weighted line. The base point is `0`, clamped into the
/// weight's domain.
pub fn p_harmonic_on_line(w: &Weight, a_coef: f64, b_coef: f64) -> Result<LineFunction> {
    if !(a_coef.is_finite() && b_coef.is_finite()) {
        return Err(Error::param("coefficients must be finite"));
    }
    let domain = w.domain();
    if a_coef == 0.0 {
        let mut f = LineFunction::constant(domain, b_coef);
        f.conjugate_coef = Some(0.0);
        return Ok(f);
    }
    let base = anchor(w);
    let quad = QuadOptions::default();
    let wv = w.clone();
    let value: ScalarMap = Arc::new(move |x| Ok(b_coef + a_coef * signed_conjugate(&wv, base, x, &quad)?));
    let wd = w.clone();
    let derivative: ScalarMap = Arc::new(move |x| Ok(a_coef * wd.conjugate(x)?));
    let mut f = LineFunction::from_maps(domain, value, Derivative::Analytic(derivative));
    f.conjugate_coef = Some(a_coef);
    Ok(f)
}

/// Relative agreement demanded between the two energy routes.
const ENERGY_CROSS_CHECK: f64 = 1e-6;

/// `int_a^b |u'|^p w dx`. For functions built by [`p_harmonic_on_line`] or
/// [`dirichlet_solve_line`] the quadrature value is checked against
/// `|a_coef|^p * conjugate_integral`.
pub fn line_energy(u: &LineFunction, w: &Weight, a: f64, b: f64, opts: &LineOptions) -> Result<LineIntegral> {
    w.check_within(a, b)?;
    let (lo, hi) = u.domain();
    for x in [a, b] {
        if !(x >= lo && x <= hi) {
            return Err(Error::DomainMismatch { x, lo, hi });
        }
    }
    let p = w.p();
    if u.conjugate_coef == Some(0.0) {
        return integrate_over(a, b, opts, |_, _| {
            Ok(Integral {
                value: Extended::Finite(0.0),
                error: 0.0,
            })
        });
    }
    let direct = integrate_over(a, b, opts, |lo, hi| {
        let mut total = Quad::ZERO;
        for (s, t, _) in w.pieces(lo, hi) {
            // A vanishing gradient carries no energy, even where w overflows.
            let integrand = |x| {
                let d = u.derivative(x)?;
                if d == 0.0 {
                    Ok(0.0)
                } else {
                    Ok((d.abs() * w.power(x, 1.0 / p)?).powf(p))
                }
            };
            let q = simpson(integrand, s, t, &opts.quad)?;
            total = total.combine(q);
        }
        Ok(Integral {
            value: Extended::Finite(total.value),
            error: total.error,
        })
    });
    let Some(coef) = u.conjugate_coef else {
        return direct;
    };
    let conj = conjugate_integral(w, a, b, opts)?;
    let expected = LineIntegral {
        value: conj.value.scale(coef.abs().powf(p)),
        error: conj.error * coef.abs().powf(p),
        ..conj
    };
    match direct {
        Ok(d) => {
            let agree = match (d.value, expected.value) {
                (Extended::Infinite, Extended::Infinite) => true,
                (Extended::Finite(x), Extended::Finite(y)) => {
                    (x - y).abs() <= ENERGY_CROSS_CHECK * y.abs().max(f64::MIN_POSITIVE)
                }
                _ => d.tail == TailFlag::Inconclusive || expected.tail == TailFlag::Inconclusive,
            };
            if agree {
                Ok(d)
            } else {
                Err(Error::Invariant(format!(
                    "energy {} disagrees with |a|^p * conjugate integral {}",
                    d.value, expected.value
                )))
            }
        }
        // The derivative cannot be sampled at a singular point of a pure
        // power weight; the conjugate route is exact there.
        Err(Error::Overflow { .. }) | Err(Error::NonPositiveWeight { .. }) => Ok(expected),
        Err(e) => Err(e),
    }
}

/// The p-harmonic function on `[x0, x1]` with boundary values `v0`, `v1`:
/// `u(x) = v0 + (v1 - v0) * I(x0, x) / I(x0, x1)` with `I` the conjugate
/// integral. It is the unique energy minimizer with these boundary values.
pub fn dirichlet_solve_line(
    w: &Weight,
    x0: f64,
    x1: f64,
    v0: f64,
    v1: f64,
    opts: &LineOptions,
) -> Result<LineFunction> {
    if !(x0.is_finite() && x1.is_finite()) || !(x0 < x1) {
        return Err(Error::DegenerateInterval { a: x0, b: x1 });
    }
    w.check_within(x0, x1)?;
    let total = match w.integrate_power(w.conjugate_exponent(), x0, x1, &opts.quad)?.value {
        Extended::Finite(v) => v,
        Extended::Infinite => return Err(Error::InfiniteConjugateIntegral { a: x0, b: x1 }),
    };
    let slope = (v1 - v0) / total;
    let quad = opts.quad;
    let (wv, wd) = (w.clone(), w.clone());
    let value: ScalarMap = Arc::new(move |x| {
        if x == x1 {
            return Ok(v1);
        }
        Ok(v0 + slope * signed_conjugate(&wv, x0, x, &quad)?)
    });
    let derivative: ScalarMap = Arc::new(move |x| Ok(slope * wd.conjugate(x)?));
    let mut f = LineFunction::from_maps((x0, x1), value, Derivative::Analytic(derivative));
    f.conjugate_coef = Some(slope);
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApEstimate {
    /// Largest `(avg_I w) (avg_I w^{1/(1-p)})^{p-1}` over the family.
    pub value: Extended,
    pub per_interval: Vec<Extended>,
    pub worst_interval: usize,
}

/// The Muckenhoupt product over each interval of a family of bounded
/// intervals, and its maximum. The product is at least 1 by Jensen.
pub fn ap_estimate(w: &Weight, intervals: &[(f64, f64)], quad: &QuadOptions) -> Result<ApEstimate> {
    if intervals.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let p = w.p();
    let gamma = w.conjugate_exponent();
    let mut per_interval = Vec::with_capacity(intervals.len());
    for &(a, b) in intervals {
        if !(a.is_finite() && b.is_finite()) || !(a < b) {
            return Err(Error::DegenerateInterval { a, b });
        }
        let len = b - a;
        let mass = w.integrate_power(1.0, a, b, quad)?.value;
        let conj = w.integrate_power(gamma, a, b, quad)?.value;
        let product = match (mass, conj) {
            (Extended::Finite(m), Extended::Finite(c)) => {
                Extended::from((m / len) * (c / len).powf(p - 1.0))
            }
            _ => Extended::Infinite,
        };
        per_interval.push(product);
    }
    let (worst_interval, value) = per_interval
        .iter()
        .copied()
        .enumerate()
        .fold((0, Extended::Finite(f64::NEG_INFINITY)), |(bi, bv), (i, v)| match (bv, v) {
            (Extended::Infinite, _) => (bi, bv),
            (_, Extended::Infinite) => (i, v),
            (Extended::Finite(x), Extended::Finite(y)) if y > x => (i, v),
            _ => (bi, bv),
        });
    Ok(ApEstimate {
        value,
        per_interval,
        worst_interval,
    })
}

/// A bounded nonconstant p-harmonic function, recorded when the bounded
/// Liouville property fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessSummary {
    pub a_coef: f64,
    pub b_coef: f64,
    pub limit_minus_infinity: f64,
    pub limit_plus_infinity: f64,
    pub sup_norm: f64,
    /// `(x, u(x))` at `x = 0, +-2^k`, `k = 0..=10`.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiouvilleVerdict {
    pub full_line_integral: Extended,
    pub left_integral: Extended,
    pub right_integral: Extended,
    pub bounded_liouville_holds: bool,
    pub positive_liouville_holds: bool,
    pub truncation_radius: f64,
    pub tail_flag: TailFlag,
    pub left_tail: TailFlag,
    pub right_tail: TailFlag,
    pub witness: Option<WitnessSummary>,
    #[serde(skip)]
    pub witness_function: Option<LineFunction>,
}

/// Decides the bounded and positive Liouville properties of `(R, w dx)` from
/// the conjugate integrals over the two half-lines.
///
/// Bounded Liouville holds iff the full-line integral is infinite; positive
/// Liouville holds iff both half-line integrals are. When bounded Liouville
/// fails, `u = int_0^x w^{1/(1-p)}` is returned as a bounded witness.
pub fn classify_liouville(w: &Weight, opts: &LineOptions) -> Result<LiouvilleVerdict> {
    if !w.covers_line() {
        let (lo, hi) = w.domain();
        let x = if lo.is_finite() { lo } else { hi };
        return Err(Error::DomainMismatch { x, lo, hi });
    }
    let left = conjugate_integral(w, f64::NEG_INFINITY, 0.0, opts)?;
    let right = conjugate_integral(w, 0.0, f64::INFINITY, opts)?;
    let full = left.join(right);
    let bounded_liouville_holds = full.value.is_infinite();
    let positive_liouville_holds = left.value.min(right.value).is_infinite();

    let (witness, witness_function) = if bounded_liouville_holds {
        (None, None)
    } else {
        let u = p_harmonic_on_line(w, 1.0, 0.0)?;
        let mut samples = vec![(0.0, u.eval(0.0)?)];
        for k in 0..=10 {
            let x = 2f64.powi(k);
            samples.push((x, u.eval(x)?));
            samples.push((-x, u.eval(-x)?));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (l, r) = (left.value.to_f64(), right.value.to_f64());
        let summary = WitnessSummary {
            a_coef: 1.0,
            b_coef: 0.0,
            limit_minus_infinity: -l,
            limit_plus_infinity: r,
            sup_norm: l.max(r),
            samples,
        };
        (Some(summary), Some(u))
    };

    Ok(LiouvilleVerdict {
        full_line_integral: full.value,
        left_integral: left.value,
        right_integral: right.value,
        bounded_liouville_holds,
        positive_liouville_holds,
        truncation_radius: full.truncation_radius.unwrap_or(opts.tail.r_max),
        tail_flag: left.tail.worst(right.tail),
        left_tail: left.tail,
        right_tail: right.tail,
        witness,
        witness_function,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub x: f64,
    pub v: f64,
    pub u: f64,
    /// `|v(x)| / u(x)^{1 - 1/p}`.
    pub ratio: f64,
}

/// Tabulates `|v(x)| / u(x)^{1-1/p}` along `radii`, where
/// `u = int_0^x w^{1/(1-p)}`. A finite-energy `v` drives the ratio to 0 when
/// the conjugate integral over `(0, inf)` diverges.
pub fn halfline_growth_diagnostic(
    v: &LineFunction,
    w: &Weight,
    radii: &[f64],
    quad: &QuadOptions,
) -> Result<Vec<GrowthRow>> {
    let p = w.p();
    let (vlo, vhi) = v.domain();
    let mut rows = Vec::with_capacity(radii.len());
    let mut prev = 0.0;
    let mut u_prev = 0.0;
    let mut sorted: Vec<f64> = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    for &x in &sorted {
        if !(x > 0.0 && x.is_finite()) || x < vlo || x > vhi {
            return Err(Error::DomainMismatch { x, lo: vlo.max(0.0), hi: vhi });
        }
        w.check_within(0.0, x)?;
        // Accumulate u along the sorted radii instead of restarting at 0.
        let u = u_prev + signed_conjugate(w, prev, x, quad)?;
        let vx = v.eval(x)?;
        rows.push(GrowthRow {
            x,
            v: vx,
            u,
            ratio: vx.abs() / u.powf(1.0 - 1.0 / p),
        });
        prev = x;
        u_prev = u;
    }
    Ok(rows)
}
