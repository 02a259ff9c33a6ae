//! Canonical units and suffix parsing.
//!
//! Everything inside the crate is expressed in bits and seconds. Configuration
//! files may spell sizes as `"5 Gb"` and rates as `"20 Mbps"`; plain numbers are
//! taken to be canonical already.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

pub const KILO: f64 = 1e3;
pub const MEGA: f64 = 1e6;
pub const GIGA: f64 = 1e9;
pub const TERA: f64 = 1e12;

/// What a suffixed quantity measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Bits,
    BitRate,
    Dimensionless,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Dimension::Bits => "size in bits",
            Dimension::BitRate => "rate in bits/second",
            Dimension::Dimensionless => "plain number",
        }
    }
}

fn suffix_scale(suffix: &str) -> Option<(Dimension, f64)> {
    let table: &[(&str, Dimension, f64)] = &[
        ("b", Dimension::Bits, 1.0),
        ("bit", Dimension::Bits, 1.0),
        ("bits", Dimension::Bits, 1.0),
        ("kb", Dimension::Bits, KILO),
        ("Kb", Dimension::Bits, KILO),
        ("Mb", Dimension::Bits, MEGA),
        ("Gb", Dimension::Bits, GIGA),
        ("Tb", Dimension::Bits, TERA),
        ("bps", Dimension::BitRate, 1.0),
        ("kbps", Dimension::BitRate, KILO),
        ("Kbps", Dimension::BitRate, KILO),
        ("Mbps", Dimension::BitRate, MEGA),
        ("Gbps", Dimension::BitRate, GIGA),
        ("Tbps", Dimension::BitRate, TERA),
    ];
    table
        .iter()
        .find(|(s, _, _)| *s == suffix)
        .map(|&(_, d, f)| (d, f))
}

/// Parses `"<number> [suffix]"` into canonical units for `expected`.
///
/// A bare number is returned unchanged. A suffix of the wrong dimension
/// (for instance `"200 Gbps"` where a cache size is expected) is an error.
pub fn parse_quantity(text: &str, expected: Dimension) -> Result<f64> {
    let trimmed = text.trim();
    let split = trimmed
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .unwrap_or(trimmed.len());
    // "1e9" contains an 'e' that belongs to the number, "5 Gb" does not start
    // its suffix with 'e', so only the first non-exponent letter splits.
    let (number, suffix) = trimmed.split_at(split);
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| Error::invalid("quantity", format!("cannot parse number in {text:?}")))?;
    let suffix = suffix.trim();
    if suffix.is_empty() {
        return Ok(value);
    }
    match suffix_scale(suffix) {
        Some((dim, scale)) if dim == expected => Ok(value * scale),
        Some((dim, _)) => Err(Error::invalid(
            "quantity",
            format!(
                "{text:?} is a {} but a {} is expected",
                dim.name(),
                expected.name()
            ),
        )),
        None => Err(Error::invalid(
            "quantity",
            format!("unknown unit suffix {suffix:?} in {text:?}"),
        )),
    }
}

macro_rules! quantity_newtype {
    ($name:ident, $dim:expr, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
        pub struct $name(pub f64);

        impl $name {
            pub fn get(self) -> f64 {
                self.0
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_f64(self.0)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                d.deserialize_any(QuantityVisitor($dim)).map($name)
            }
        }
    };
}

quantity_newtype!(Bits, Dimension::Bits, "A size in bits; accepts `b`, `kb`, `Mb`, `Gb`, `Tb` suffixes.");
quantity_newtype!(
    BitRate,
    Dimension::BitRate,
    "A rate in bits/second; accepts `bps`, `kbps`, `Mbps`, `Gbps` suffixes."
);

struct QuantityVisitor(Dimension);

impl<'de> Visitor<'de> for QuantityVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a number or a string with a unit suffix ({})", self.0.name())
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
        parse_quantity(v, self.0).map_err(E::custom)
    }
}

/// Deserializes a count that may be written as an integer or an integral float.
pub(crate) fn de_count<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u32, D::Error> {
    struct CountVisitor;
    impl<'de> Visitor<'de> for CountVisitor {
        type Value = u32;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a non-negative integer")
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<u32, E> {
            u32::try_from(v).map_err(|_| E::custom("count out of range"))
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<u32, E> {
            u32::try_from(v).map_err(|_| E::custom("count must be a non-negative integer"))
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<u32, E> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(E::custom(format!("{v} is not a non-negative integer")))
            }
        }
        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<u32, E> {
            v.trim()
                .parse()
                .map_err(|_| E::custom(format!("{v:?} is not a non-negative integer")))
        }
    }
    d.deserialize_any(CountVisitor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes_scale_exactly() {
        assert_eq!(parse_quantity("5 Gb", Dimension::Bits).unwrap(), 5e9);
        assert_eq!(parse_quantity("5Gb", Dimension::Bits).unwrap(), 5_000_000_000.0);
        assert_eq!(parse_quantity("20 Mbps", Dimension::BitRate).unwrap(), 20e6);
        assert_eq!(parse_quantity("10 Gbps", Dimension::BitRate).unwrap(), 1e10);
        assert_eq!(parse_quantity("1 Mbps", Dimension::BitRate).unwrap(), 1_000_000.0);
        assert_eq!(parse_quantity("1e9", Dimension::Bits).unwrap(), 1e9);
        assert_eq!(parse_quantity("2.5e3 kb", Dimension::Bits).unwrap(), 2.5e6);
        assert_eq!(parse_quantity("0.5", Dimension::Dimensionless).unwrap(), 0.5);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = parse_quantity("200 Gbps", Dimension::Bits).unwrap_err();
        assert!(err.to_string().contains("rate"), "{err}");
        assert!(parse_quantity("3 furlongs", Dimension::Bits).is_err());
        assert!(parse_quantity("Gb", Dimension::Bits).is_err());
    }

    #[test]
    fn integer_inputs_convert_exactly() {
        for n in [1u64, 7, 13, 200, 999, 123_456] {
            let bits = parse_quantity(&format!("{n} Gb"), Dimension::Bits).unwrap();
            assert_eq!(bits, (n * 1_000_000_000) as f64);
            let rate = parse_quantity(&format!("{n} Mbps"), Dimension::BitRate).unwrap();
            assert_eq!(rate, (n * 1_000_000) as f64);
        }
    }
}
