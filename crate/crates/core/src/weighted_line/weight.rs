use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::check_exponent;
use crate::quadrature::{simpson, Quad, QuadOptions};
use crate::{Error, Extended, Result};

/// Pointwise description of a weight on one segment.
#[derive(Clone)]
pub enum Profile {
    /// `w(x) = value`.
    Constant { value: f64 },
    /// `w(x) = coef * (shift + |x - center|^degree)^exponent`.
    ///
    /// With `shift = 0` the profile may vanish or blow up at `center`; such
    /// pure powers are integrated in closed form and never sampled there.
    Power {
        coef: f64,
        center: f64,
        shift: f64,
        degree: f64,
        exponent: f64,
    },
    /// `w(x) = coef * exp(rate * (x - center))`, or with `absolute`
    /// `coef * exp(rate * |x - center|)`.
    Exponential {
        coef: f64,
        rate: f64,
        center: f64,
        absolute: bool,
    },
    /// Piecewise-linear interpolation of `(x, w)` knots.
    Table { points: Vec<(f64, f64)> },
    /// Arbitrary closure; positivity is only checked where it is sampled.
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant { value } => write!(f, "Constant({value})"),
            Profile::Power {
                coef,
                center,
                shift,
                degree,
                exponent,
            } => write!(f, "Power({coef} * ({shift} + |x - {center}|^{degree})^{exponent})"),
            Profile::Exponential {
                coef,
                rate,
                center,
                absolute,
            } => {
                if *absolute {
                    write!(f, "Exponential({coef} * exp({rate} |x - {center}|))")
                } else {
                    write!(f, "Exponential({coef} * exp({rate} (x - {center})))")
                }
            }
            Profile::Table { points } => write!(f, "Table({} knots)", points.len()),
            Profile::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    /// `coef * |x - center|^exponent`.
    pub fn pure_power(coef: f64, center: f64, exponent: f64) -> Self {
        Profile::Power {
            coef,
            center,
            shift: 0.0,
            degree: 1.0,
            exponent,
        }
    }

    /// `(1 + x^2)^exponent`.
    pub fn bracket(exponent: f64) -> Self {
        Profile::Power {
            coef: 1.0,
            center: 0.0,
            shift: 1.0,
            degree: 2.0,
            exponent,
        }
    }

    pub fn exponential(coef: f64, rate: f64, center: f64, absolute: bool) -> Self {
        Profile::Exponential {
            coef,
            rate,
            center,
            absolute,
        }
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Profile::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProfile(msg));
        match self {
            Profile::Constant { value } if !(*value > 0.0 && value.is_finite()) => {
                bad(format!("constant weight must be positive, got {value}"))
            }
            Profile::Power {
                coef,
                shift,
                degree,
                exponent,
                center,
            } => {
                if !(*coef > 0.0 && coef.is_finite()) {
                    bad(format!("power coefficient must be positive, got {coef}"))
                } else if !(*shift >= 0.0 && shift.is_finite()) {
                    bad(format!("power shift must be nonnegative, got {shift}"))
                } else if !(*degree > 0.0 && degree.is_finite()) {
                    bad(format!("power degree must be positive, got {degree}"))
                } else if !exponent.is_finite() || !center.is_finite() {
                    bad("power exponent and center must be finite".into())
                } else {
                    Ok(())
                }
            }
            Profile::Exponential {
                coef, rate, center, ..
            } => {
                if !(*coef > 0.0 && coef.is_finite()) {
                    bad(format!("exponential coefficient must be positive, got {coef}"))
                } else if !rate.is_finite() || !center.is_finite() {
                    bad("exponential rate and center must be finite".into())
                } else {
                    Ok(())
                }
            }
            Profile::Table { points } => {
                if points.len() < 2 {
                    return bad("table needs at least two knots".into());
                }
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return bad(format!("table knots must increase strictly, {} then {}", w[0].0, w[1].0));
                    }
                }
                if let Some(&(x, v)) = points.iter().find(|&&(_, v)| !(v > 0.0 && v.is_finite())) {
                    return Err(Error::NonPositiveWeight { x, value: v });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Pointwise value, without positivity checks.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Power {
                coef,
                center,
                shift,
                degree,
                exponent,
            } => coef * (shift + (x - center).abs().powf(*degree)).powf(*exponent),
            Profile::Exponential {
                coef,
                rate,
                center,
                absolute,
            } => {
                let t = if *absolute { (x - center).abs() } else { x - center };
                coef * (rate * t).exp()
            }
            Profile::Table { points } => interpolate(points, x),
            Profile::Custom { f, .. } => f(x),
        }
    }

    /// Points where the profile may fail to be smooth.
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Profile::Power { center, .. } => vec![*center],
            Profile::Exponential {
                center,
                absolute: true,
                ..
            } => vec![*center],
            Profile::Table { points } => points.iter().map(|&(x, _)| x).collect(),
            _ => Vec::new(),
        }
    }

    /// `int_lo^hi w^gamma dx` in closed form when the profile allows it.
    /// `[lo, hi]` must not contain a breakpoint in its interior.
    fn closed_form_power(&self, gamma: f64, lo: f64, hi: f64) -> Option<Extended> {
        match self {
            Profile::Constant { value } => Some(Extended::Finite(value.powf(gamma) * (hi - lo))),
            Profile::Power {
                coef,
                center,
                shift,
                degree,
                exponent,
            } if *shift == 0.0 => {
                let beta = degree * exponent * gamma;
                let (t0, t1) = {
                    let (a, b) = ((lo - center).abs(), (hi - center).abs());
                    if a <= b {
                        (a, b)
                    } else {
                        (b, a)
                    }
                };
                let scale = coef.powf(gamma);
                if t0 == 0.0 && beta <= -1.0 {
                    return Some(Extended::Infinite);
                }
                let v = if (beta + 1.0).abs() < 1e-15 {
                    (t1 / t0).ln()
                } else {
                    (t1.powf(beta + 1.0) - t0.powf(beta + 1.0)) / (beta + 1.0)
                };
                Some(Extended::from(scale * v))
            }
            Profile::Exponential {
                coef,
                rate,
                center,
                absolute,
            } => {
                // On a piece the exponent is affine: w^gamma = coef^gamma e^{k (x - center)}.
                let side = if *absolute && (lo + hi) / 2.0 < *center { -1.0 } else { 1.0 };
                let k = gamma * rate * side;
                let scale = coef.powf(gamma);
                let (s, t) = (lo - center, hi - center);
                if k == 0.0 {
                    return Some(Extended::from(scale * (hi - lo)));
                }
                // Factor out the larger endpoint so that only the ratio is exponentiated.
                let v = if k > 0.0 {
                    (scale.ln() + k * t).exp() * -(-k * (t - s)).exp_m1() / k
                } else {
                    (scale.ln() + k * s).exp() * -(k * (t - s)).exp_m1() / -k
                };
                Some(Extended::from(v))
            }
            _ => None,
        }
    }

    /// `value(x)^gamma`, computed in log space for exponential profiles so
    /// that a far tail of `w` does not under- or overflow before the power.
    fn value_pow(&self, x: f64, gamma: f64) -> f64 {
        match self {
            Profile::Exponential {
                coef,
                rate,
                center,
                absolute,
            } => {
                let t = if *absolute { (x - center).abs() } else { x - center };
                (gamma * (coef.ln() + rate * t)).exp()
            }
            _ => self.value(x).powf(gamma),
        }
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = points.partition_point(|&(px, _)| px <= x);
    let (x0, y0) = points[i - 1];
    let (x1, y1) = points[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub profile: Profile,
}

/// A positive weight `w` on a union of consecutive segments together with the
/// exponent `p`; the measure is `dμ = w dx`.
#[derive(Debug, Clone)]
pub struct Weight {
    p: f64,
    segments: Vec<Segment>,
}

/// Integral over an interval of the line, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Extended,
    pub error: f64,
}

impl Weight {
    pub fn new(p: f64, segments: Vec<Segment>) -> Result<Self> {
        check_exponent(p)?;
        if segments.is_empty() {
            return Err(Error::Tiling("no segments".into()));
        }
        for (i, seg) in segments.iter().enumerate() {
            if seg.start.is_nan() || seg.end.is_nan() || !(seg.start < seg.end) {
                return Err(Error::Tiling(format!(
                    "segment {i} has empty interval [{}, {}]",
                    seg.start, seg.end
                )));
            }
            if (i > 0 && seg.start.is_infinite()) || (i + 1 < segments.len() && seg.end.is_infinite()) {
                return Err(Error::Tiling(format!("segment {i} has an infinite inner endpoint")));
            }
            seg.profile.validate()?;
            if let Profile::Table { points } = &seg.profile {
                let (lo, hi) = (points[0].0, points[points.len() - 1].0);
                if seg.start < lo || seg.end > hi {
                    return Err(Error::InvalidProfile(format!(
                        "table on segment {i} covers [{lo}, {hi}] but the segment is [{}, {}]",
                        seg.start, seg.end
                    )));
                }
            }
        }
        for (i, pair) in segments.windows(2).enumerate() {
            if pair[0].end < pair[1].start {
                return Err(Error::Tiling(format!(
                    "gap between segments {i} and {} at [{}, {}]",
                    i + 1,
                    pair[0].end,
                    pair[1].start
                )));
            }
            if pair[0].end > pair[1].start {
                return Err(Error::Tiling(format!(
                    "segments {i} and {} overlap on [{}, {}]",
                    i + 1,
                    pair[1].start,
                    pair[0].end
                )));
            }
        }
        Ok(Weight { p, segments })
    }

    /// One profile on the whole real line.
    pub fn on_line(p: f64, profile: Profile) -> Result<Self> {
        Weight::new(
            p,
            vec![Segment {
                start: f64::NEG_INFINITY,
                end: f64::INFINITY,
                profile,
            }],
        )
    }

    pub fn unweighted(p: f64) -> Result<Self> {
        Weight::on_line(p, Profile::constant(1.0))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `1 / (1 - p)`, the exponent of the conjugate weight.
    pub fn conjugate_exponent(&self) -> f64 {
        1.0 / (1.0 - self.p)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.segments[0].start, self.segments[self.segments.len() - 1].end)
    }

    pub fn covers_line(&self) -> bool {
        let (lo, hi) = self.domain();
        lo == f64::NEG_INFINITY && hi == f64::INFINITY
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && x <= hi
    }

    pub(crate) fn check_within(&self, a: f64, b: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        for x in [a, b] {
            if !(x >= lo && x <= hi) {
                return Err(Error::DomainMismatch { x, lo, hi });
            }
        }
        Ok(())
    }

    fn segment_at(&self, x: f64) -> Option<&Segment> {
        let i = self.segments.partition_point(|s| s.end <= x);
        self.segments
            .get(i)
            .or_else(|| self.segments.last().filter(|s| s.end == x))
            .filter(|s| s.start <= x)
    }

    /// `w(x)`, rejecting points outside the domain and nonpositive values.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let seg = self.segment_at(x).ok_or_else(|| {
            let (lo, hi) = self.domain();
            Error::DomainMismatch { x, lo, hi }
        })?;
        let value = seg.profile.value(x);
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else if value == f64::INFINITY {
            Err(Error::Overflow { x })
        } else {
            Err(Error::NonPositiveWeight { x, value })
        }
    }

    /// `w(x)^{1/(1-p)}`.
    pub fn conjugate(&self, x: f64) -> Result<f64> {
        self.power(x, self.conjugate_exponent())
    }

    /// `w(x)^gamma`, evaluated in log space for exponential profiles so
    /// that it stays finite where `w` itself overflows.
    pub fn power(&self, x: f64, gamma: f64) -> Result<f64> {
        if let Some(seg) = self.segment_at(x) {
            if let Profile::Exponential { .. } = seg.profile {
                let v = seg.profile.value_pow(x, gamma);
                return if v.is_finite() { Ok(v) } else { Err(Error::Overflow { x }) };
            }
        }
        Ok(self.eval(x)?.powf(gamma))
    }

    /// Subintervals of `[a, b]` on which a single profile is smooth.
    pub(crate) fn pieces(&self, a: f64, b: f64) -> Vec<(f64, f64, &Profile)> {
        let mut out = Vec::new();
        for seg in &self.segments {
            let lo = seg.start.max(a);
            let hi = seg.end.min(b);
            if !(lo < hi) {
                continue;
            }
            let mut cuts: Vec<f64> = seg
                .profile
                .breakpoints()
                .into_iter()
                .filter(|&c| c > lo && c < hi)
                .collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut left = lo;
            for c in cuts.into_iter().chain(std::iter::once(hi)) {
                out.push((left, c, &seg.profile));
                left = c;
            }
        }
        out
    }

    /// `int_a^b w^gamma dx` over a bounded interval.
    pub fn integrate_power(&self, gamma: f64, a: f64, b: f64, quad: &QuadOptions) -> Result<Integral> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::param("integrate_power needs a bounded interval"));
        }
        self.check_within(a, b)?;
        let mut value = Extended::Finite(0.0);
        let mut total = Quad::ZERO;
        for (lo, hi, profile) in self.pieces(a, b) {
            if let Some(v) = profile.closed_form_power(gamma, lo, hi) {
                value = value + v;
                continue;
            }
            let q = simpson(
                |x| {
                    let w = profile.value(x);
                    if w > 0.0 && w.is_finite() {
                        Ok(w.powf(gamma))
                    } else if w == f64::INFINITY {
                        Err(Error::Overflow { x })
                    } else {
                        Err(Error::NonPositiveWeight { x, value: w })
                    }
                },
                lo,
                hi,
                quad,
            )?;
            value = value + Extended::Finite(q.value);
            total = total.combine(q);
        }
        Ok(Integral {
            value,
            error: total.error,
        })
    }
}

/// A numeric endpoint that also accepts `"inf"` / `"-inf"` strings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound(pub f64);

impl Serialize for Bound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str(if self.0 > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Bound(v)),
            Raw::Int(v) => Ok(Bound(v as f64)),
            Raw::Text(t) => match t.trim() {
                "inf" | "+inf" | "infinity" => Ok(Bound(f64::INFINITY)),
                "-inf" | "-infinity" => Ok(Bound(f64::NEG_INFINITY)),
                other => other.parse().map(Bound).map_err(serde::de::Error::custom),
            },
        }
    }
}

fn one() -> f64 {
    1.0
}

/// File representation of one weight segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpec {
    pub interval: [Bound; 2],
    #[serde(flatten)]
    pub kind: ProfileSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileSpec {
    Constant {
        value: f64,
    },
    Power {
        #[serde(default = "one")]
        coef: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        shift: f64,
        #[serde(default = "one")]
        degree: f64,
        exponent: f64,
    },
    Exponential {
        #[serde(default = "one")]
        coef: f64,
        rate: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        absolute: bool,
    },
    Table {
        points: Vec<(f64, f64)>,
    },
}

impl From<&ProfileSpec> for Profile {
    fn from(spec: &ProfileSpec) -> Self {
        match *spec {
            ProfileSpec::Constant { value } => Profile::Constant { value },
            ProfileSpec::Power {
                coef,
                center,
                shift,
                degree,
                exponent,
            } => Profile::Power {
                coef,
                center,
                shift,
                degree,
                exponent,
            },
            ProfileSpec::Exponential {
                coef,
                rate,
                center,
                absolute,
            } => Profile::Exponential {
                coef,
                rate,
                center,
                absolute,
            },
            ProfileSpec::Table { ref points } => Profile::Table { points: points.clone() },
        }
    }
}

impl Weight {
    pub fn from_specs(p: f64, specs: &[SegmentSpec]) -> Result<Self> {
        let segments = specs
            .iter()
            .map(|s| Segment {
                start: s.interval[0].0,
                end: s.interval[1].0,
                profile: Profile::from(&s.kind),
            })
            .collect();
        Weight::new(p, segments)
    }
}
