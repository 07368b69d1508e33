//! Scalar abstraction shared by every numeric container in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type usable as a coefficient type.
///
/// Implemented for `f32` and `f64`. Serialization goes through `f64`, which
/// represents every `f32` exactly, so round-trips are lossless for both.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Display
    + LowerExp
    + Debug
    + FromStr
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Short type name used in file headers.
    const NAME: &'static str;

    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn from_usize_lossy(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).unwrap_or_else(Self::nan)
    }

    /// Exact bit pattern widened to 64 bits, used for hashing and bit-equality.
    fn bits(self) -> u64;
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";

    fn bits(self) -> u64 {
        self.to_bits()
    }
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";

    fn bits(self) -> u64 {
        u64::from(self.to_bits())
    }
}

/// Shortest decimal text that parses back to the same value.
///
/// Plain notation inside `[1e-5, 1e16)`, exponent notation outside, so that
/// huge or tiny magnitudes do not blow up into hundreds of digits.
pub fn format_shortest<T: Scalar>(v: T) -> String {
    if v.is_infinite() {
        return if v.is_sign_positive() { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if a == T::zero() {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let lo = T::from_f64_lossy(1e-5);
    let hi = T::from_f64_lossy(1e16);
    if a >= lo && a < hi {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Serde adapter for extended reals: finite values as JSON numbers,
/// infinities as the strings `"inf"` / `"-inf"`.
pub mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Scalar;

    pub fn serialize<T: Scalar, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(v.to_f64_lossy())
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v.is_sign_positive() {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(T::from_f64_lossy(v)),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(T::infinity()),
                "-inf" => Ok(T::neg_infinity()),
                "nan" => Ok(T::nan()),
                other => Err(serde::de::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}
