//! Globally adaptive Simpson quadrature and a dyadic-shell scheme for
//! integrals over half-lines.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::{Error, Extended, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Total integrand evaluations allowed for one call.
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_evals: 2_000_000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        QuadOptions { rel_tol, ..self }
    }
}

/// Result of a finite quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

impl Quad {
    pub const ZERO: Quad = Quad {
        value: 0.0,
        error: 0.0,
        evals: 0,
    };

    pub fn combine(self, other: Quad) -> Quad {
        Quad {
            value: self.value + other.value,
            error: self.error + other.error,
            evals: self.evals + other.evals,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    refined: f64,
    fl: f64,
    fr: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn sample<F>(f: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { x })
    }
}

fn simpson_rule(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn make_panel<F>(f: &mut F, a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let fl = sample(f, 0.5 * (a + m))?;
    let fr = sample(f, 0.5 * (m + b))?;
    let whole = simpson_rule(a, b, fa, fm, fb);
    let left = simpson_rule(a, m, fa, fl, fm);
    let right = simpson_rule(m, b, fm, fr, fb);
    let delta = left + right - whole;
    Ok(Panel {
        a,
        b,
        fa,
        fm,
        fb,
        refined: left + right + delta / 15.0,
        fl,
        fr,
        error: delta.abs() / 15.0,
    })
}

/// Integrates `f` over `[a, b]` by globally adaptive Simpson refinement: the
/// panel with the largest error estimate is bisected until the summed
/// estimate drops below `max(rel_tol * |I|, abs_tol)`.
///
/// Non-finite samples abort with [`Error::Overflow`]; running out of
/// evaluations yields [`Error::ToleranceNotMet`].
pub fn simpson<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Quad>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::param(format!("quadrature bounds must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quad::ZERO);
    }
    if a > b {
        let q = simpson(f, b, a, opts)?;
        return Ok(Quad {
            value: -q.value,
            ..q
        });
    }

    // Eight initial panels so that the first error estimate is not fooled by
    // a function that happens to vanish at three equispaced nodes.
    const INITIAL: usize = 8;
    let h = (b - a) / INITIAL as f64;
    let nodes: Vec<f64> = (0..=2 * INITIAL)
        .map(|i| if i == 2 * INITIAL { b } else { a + 0.5 * h * i as f64 })
        .collect();
    let values = nodes
        .iter()
        .map(|&x| sample(&mut f, x))
        .collect::<Result<Vec<_>>>()?;
    let mut evals = values.len();
    let mut heap = BinaryHeap::with_capacity(64);
    for i in 0..INITIAL {
        let (l, m, r) = (2 * i, 2 * i + 1, 2 * i + 2);
        heap.push(make_panel(&mut f, nodes[l], nodes[r], values[l], values[m], values[r])?);
        evals += 2;
    }

    let mut total: f64 = heap.iter().map(|p| p.refined).sum();
    let mut error: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        let target = (opts.rel_tol * total.abs()).max(opts.abs_tol);
        if error <= target {
            // Running sums drift; confirm with exact sums before accepting.
            total = heap.iter().map(|p| p.refined).sum();
            error = heap.iter().map(|p| p.error).sum();
            if error <= (opts.rel_tol * total.abs()).max(opts.abs_tol) {
                return Ok(Quad {
                    value: total,
                    error,
                    evals,
                });
            }
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        // Panels that cannot be bisected in floating point end the refinement.
        let splittable = m > worst.a && m < worst.b && 0.5 * (worst.a + m) > worst.a;
        if evals + 4 > opts.max_evals || !splittable {
            heap.push(worst);
            let error: f64 = heap.iter().map(|p| p.error).sum();
            return Err(Error::ToleranceNotMet { a, b, error });
        }
        let left = make_panel(&mut f, worst.a, m, worst.fa, worst.fl, worst.fm)?;
        let right = make_panel(&mut f, m, worst.b, worst.fm, worst.fr, worst.fb)?;
        evals += 4;
        total += left.refined + right.refined - worst.refined;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailFlag {
    Converged,
    DivergenceDetected,
    Inconclusive,
}

impl TailFlag {
    /// The less decisive of two flags.
    pub fn worst(self, other: TailFlag) -> TailFlag {
        use TailFlag::*;
        match (self, other) {
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            (DivergenceDetected, _) | (_, DivergenceDetected) => DivergenceDetected,
            _ => Converged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailOptions {
    /// Truncation radius, measured from the start of the half-line.
    pub r_max: f64,
    /// Shell ratio above which a shell counts as non-decaying.
    pub ratio_threshold: f64,
    /// Number of consecutive trailing shells the decision is based on.
    pub window: usize,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions {
            r_max: 1e6,
            ratio_threshold: 0.9,
            window: 8,
        }
    }
}

/// Integral over a half-line `[start, start + dir * inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLine {
    pub value: Extended,
    pub error: f64,
    pub tail: TailFlag,
    /// Length of the integrated stretch before extrapolation.
    pub truncation_radius: f64,
    /// Integral over `[0, 1]` followed by the dyadic shells `[2^k, 2^{k+1}]`.
    pub shells: Vec<f64>,
}

/// Integrates over a half-line by dyadic shells. `integrate(lo, hi)` with
/// `lo < hi` must return the integral over `[lo, hi]` in the original
/// coordinate. The sequence of shell integrals decides the tail:
///
/// * every one of the last `window` ratios `I_k / I_{k-1}` exceeds the
///   threshold: divergence, the value is [`Extended::Infinite`];
/// * every one of them is at most the threshold: convergence, the partial
///   sum is extended by the geometric tail `I_K rho / (1 - rho)`;
/// * otherwise the partial sum is returned flagged inconclusive.
///
/// A shell that overflows is taken as divergence.
pub fn half_line<F>(mut integrate: F, start: f64, dir: f64, opts: &TailOptions) -> Result<HalfLine>
where
    F: FnMut(f64, f64) -> Result<Quad>,
{
    if dir != 1.0 && dir != -1.0 {
        return Err(Error::param("half-line direction must be +1 or -1"));
    }
    let max_shell = opts.r_max.log2().floor();
    if !(max_shell >= (opts.window + 1) as f64) {
        return Err(Error::param(format!(
            "truncation radius {} too small for a {}-shell window",
            opts.r_max, opts.window
        )));
    }
    let n_shells = max_shell as i32;
    let mut shells = Vec::with_capacity(n_shells as usize + 1);
    let mut error = 0.0;
    let mut run = |t0: f64, t1: f64| -> Result<Option<Quad>> {
        let (x0, x1) = (start + dir * t0, start + dir * t1);
        let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
        match integrate(lo, hi) {
            Ok(q) if q.value.is_finite() => Ok(Some(q)),
            Ok(_) | Err(Error::Overflow { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };

    let diverged = |shells: Vec<f64>, t: f64| HalfLine {
        value: Extended::Infinite,
        error: 0.0,
        tail: TailFlag::DivergenceDetected,
        truncation_radius: t,
        shells,
    };

    match run(0.0, 1.0)? {
        Some(q) => {
            shells.push(q.value);
            error += q.error;
        }
        None => return Ok(diverged(shells, 1.0)),
    }
    for k in 0..n_shells {
        let (t0, t1) = (2f64.powi(k), 2f64.powi(k + 1));
        match run(t0, t1)? {
            Some(q) => {
                shells.push(q.value);
                error += q.error;
            }
            None => return Ok(diverged(shells, t1)),
        }
    }
    let truncation_radius = 2f64.powi(n_shells);
    let partial: f64 = shells.iter().sum();

    // Ratios of consecutive dyadic shells (the base interval is excluded).
    let ratios: Vec<f64> = shells[1..]
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (prev, next) if prev == 0.0 && next == 0.0 => 0.0,
            (0.0, _) => f64::INFINITY,
            (prev, next) => next / prev,
        })
        .collect();
    let trailing = &ratios[ratios.len() - opts.window..];
    let thr = opts.ratio_threshold;

    if trailing.iter().all(|&r| r > thr) {
        return Ok(diverged(shells, truncation_radius));
    }
    if trailing.iter().all(|&r| r <= thr) {
        let last = *shells.last().expect("at least one shell");
        let rho = trailing[trailing.len() - 1];
        let prev_rho = trailing[trailing.len() - 2];
        let tail = last * rho / (1.0 - rho);
        error += tail.abs() * ((rho - prev_rho).abs() / (1.0 - rho)).min(1.0);
        return Ok(HalfLine {
            value: Extended::Finite(partial + tail),
            error,
            tail: TailFlag::Converged,
            truncation_radius,
            shells,
        });
    }
    Ok(HalfLine {
        value: Extended::Finite(partial),
        error,
        tail: TailFlag::Inconclusive,
        truncation_radius,
        shells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<f64> {
        move |x| Ok(f(x))
    }

    #[test]
    fn polynomials_are_exact() {
        let q = simpson(ok(|x| x * x * x - 2.0 * x), 0.0, 2.0, &QuadOptions::default()).unwrap();
        assert!((q.value - 0.0).abs() < 1e-14);
        let q = simpson(ok(|_| 1.0), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert_eq!(q.value, 1.0);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let q = simpson(ok(f64::exp), 1.0, 0.0, &QuadOptions::default()).unwrap();
        assert!((q.value + (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn smooth_integrand_meets_relative_tolerance() {
        let q = simpson(ok(|x| 1.0 / (1.0 + x * x)), -3.0, 5.0, &QuadOptions::default()).unwrap();
        let exact = 5f64.atan() + 3f64.atan();
        assert!((q.value - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadOptions {
            max_evals: 40,
            ..QuadOptions::default()
        };
        let err = simpson(ok(|x| (50.0 * x).sin().abs()), 0.0, 10.0, &opts).unwrap_err();
        assert!(matches!(err, Error::ToleranceNotMet { .. }));
    }

    #[test]
    fn overflow_is_an_error() {
        let err = simpson(ok(|x| 1.0 / x), 0.0, 1.0, &QuadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
    }

    fn shells_of(f: fn(f64) -> f64) -> HalfLine {
        let quad = QuadOptions::default();
        half_line(|a, b| simpson(ok(f), a, b, &quad), 0.0, 1.0, &TailOptions::default()).unwrap()
    }

    #[test]
    fn half_line_classification() {
        let conv = shells_of(|x| 1.0 / (1.0 + x * x));
        assert_eq!(conv.tail, TailFlag::Converged);
        let v = conv.value.finite().unwrap();
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-9, "{v}");
        assert_eq!(conv.truncation_radius, 524288.0);

        let div = shells_of(|_| 1.0);
        assert_eq!(div.tail, TailFlag::DivergenceDetected);
        assert!(div.value.is_infinite());

        let log_div = shells_of(|x| 1.0 / (1.0 + x));
        assert_eq!(log_div.tail, TailFlag::DivergenceDetected);

        let exp = shells_of(|x| (-x).exp());
        assert_eq!(exp.tail, TailFlag::Converged);
        assert!((exp.value.finite().unwrap() - 1.0).abs() < 1e-10);

        let blowup = shells_of(f64::exp);
        assert!(blowup.value.is_infinite());
    }

    #[test]
    fn mixed_shell_behavior_is_inconclusive() {
        // Decays like 1/x^2 up to 2^12, then is constant.
        let f = |x: f64| if x < 4096.0 { 1.0 / (1.0 + x * x) } else { 1e-12 };
        let quad = QuadOptions::default();
        let opts = TailOptions {
            r_max: 2f64.powi(16),
            ..TailOptions::default()
        };
        let r = half_line(|a, b| simpson(ok(f), a, b, &quad), 0.0, 1.0, &opts).unwrap();
        assert_eq!(r.tail, TailFlag::Inconclusive);
    }

    #[test]
    fn negative_direction() {
        let quad = QuadOptions::default();
        let r = half_line(
            |a, b| simpson(ok(f64::exp), a, b, &quad),
            0.0,
            -1.0,
            &TailOptions::default(),
        )
        .unwrap();
        assert!((r.value.finite().unwrap() - 1.0).abs() < 1e-10);
    }
}
