//! Nonnegative quantities that may be infinite.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A value in `[-inf, inf]` where infinity is an explicit marker rather than
/// an IEEE overflow. Serializes as a JSON number, or as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinite)
    }

    pub fn is_finite(self) -> bool {
        !self.is_infinite()
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    /// Lossy conversion, `Infinite` becomes `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn max(self, other: Extended) -> Extended {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a.max(b)),
            _ => Extended::Infinite,
        }
    }

    pub fn min(self, other: Extended) -> Extended {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a.min(b)),
            (Extended::Finite(a), Extended::Infinite) | (Extended::Infinite, Extended::Finite(a)) => {
                Extended::Finite(a)
            }
            (Extended::Infinite, Extended::Infinite) => Extended::Infinite,
        }
    }

    pub fn scale(self, factor: f64) -> Extended {
        match self {
            Extended::Finite(v) => Extended::Finite(v * factor),
            Extended::Infinite if factor == 0.0 => Extended::Finite(0.0),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

impl std::ops::Add for Extended {
    type Output = Extended;

    fn add(self, rhs: Extended) -> Extended {
        match (self, rhs) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::Infinite,
        }
    }
}

impl From<f64> for Extended {
    fn from(v: f64) -> Self {
        if v.is_infinite() {
            Extended::Infinite
        } else {
            Extended::Finite(v)
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(v) => serializer.serialize_f64(*v),
            Extended::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ExtendedVisitor;

        impl Visitor<'_> for ExtendedVisitor {
            type Value = Extended;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Extended, E> {
                Ok(Extended::from(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Extended, E> {
                Ok(Extended::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Extended, E> {
                Ok(Extended::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Extended, E> {
                match v {
                    "inf" | "+inf" | "infinity" => Ok(Extended::Infinite),
                    other => other.parse::<f64>().map(Extended::from).map_err(E::custom),
                }
            }
        }

        deserializer.deserialize_any(ExtendedVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_ordering() {
        let a = Extended::Finite(1.5);
        assert_eq!(a + Extended::Finite(2.0), Extended::Finite(3.5));
        assert_eq!(a + Extended::Infinite, Extended::Infinite);
        assert_eq!(a.min(Extended::Infinite), a);
        assert_eq!(a.max(Extended::Infinite), Extended::Infinite);
        assert_eq!(Extended::Infinite.scale(0.0), Extended::Finite(0.0));
    }

    #[test]
    fn json_markers() {
        let s = serde_json::to_string(&vec![Extended::Finite(2.0), Extended::Infinite]).unwrap();
        assert_eq!(s, "[2.0,\"inf\"]");
        let back: Vec<Extended> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Extended::Finite(2.0), Extended::Infinite]);
    }
}
