//! Exact rational helpers shared by every layer.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number used for every coefficient in the library.
pub type Q = BigRational;

/// Builds `n/1`.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Builds `n/d`; panics on a zero denominator.
pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-1.25"`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{}{}", if int_digits.is_empty() { "0" } else { int_digits }, frac);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let v = Q::new(n, d);
        return Some(if neg { -v } else { v });
    }
    s.parse::<BigInt>().ok().map(Q::from_integer)
}

/// Renders `p/q`, or `p` for integers.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Lossy conversion used only for numeric evaluation.
pub fn to_f64(x: &Q) -> f64 {
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale both parts down before dividing.
            let shift = x.numer().bits().max(x.denom().bits()).saturating_sub(1000);
            let n = (x.numer() >> shift as usize).to_f64().unwrap_or(0.0);
            let d = (x.denom() >> shift as usize).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// Absolute value helper kept here so callers need not import `Signed`.
pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

/// Formats a float with `sig` significant digits, switching to scientific
/// notation outside `1e-5 ..= 1e15`.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        let s = format!("{:.*e}", sig.saturating_sub(1), x);
        return trim_sci(&s);
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    trim_fixed(&s)
}

fn trim_fixed(s: &str) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" {
            "0".to_string()
        } else {
            t.to_string()
        }
    } else {
        s.to_string()
    }
}

fn trim_sci(s: &str) -> String {
    match s.split_once('e') {
        Some((m, e)) => format!("{}e{}", trim_fixed(m), e),
        None => s.to_string(),
    }
}

/// Serde adapter reading a rational from `"p/q"`, a decimal string or a
/// number, and writing it as `"p/q"`.
pub mod qser {
    use super::{fmt_q, parse_q, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Float(f64),
        Str(String),
    }

    fn to_q<E: Error>(raw: Raw) -> Result<Q, E> {
        match raw {
            Raw::Int(i) => Ok(super::q(i)),
            Raw::Str(s) => parse_q(&s).ok_or_else(|| E::custom(format!("bad rational {s:?}"))),
            Raw::Float(f) => parse_q(&format!("{f}")).ok_or_else(|| E::custom(format!("bad rational {f}"))),
        }
    }

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        to_q(Raw::deserialize(d)?)
    }

    /// Same conventions for vectors and matrices.
    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(x: &[Q], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(x.len()))?;
            for v in x {
                seq.serialize_element(&fmt_q(v))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
            Vec::<Raw>::deserialize(d)?.into_iter().map(to_q).collect()
        }
    }

    pub mod mat {
        use super::*;

        pub fn serialize<S: Serializer>(x: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
            let rows: Vec<Vec<String>> = x.iter().map(|r| r.iter().map(fmt_q).collect()).collect();
            serde::Serialize::serialize(&rows, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Q>>, D::Error> {
            Vec::<Vec<Raw>>::deserialize(d)?
                .into_iter()
                .map(|r| r.into_iter().map(to_q).collect())
                .collect()
        }
    }

    pub mod mats {
        use super::*;

        pub fn serialize<S: Serializer>(x: &[Vec<Vec<Q>>], s: S) -> Result<S::Ok, S::Error> {
            let all: Vec<Vec<Vec<String>>> =
                x.iter().map(|m| m.iter().map(|r| r.iter().map(fmt_q).collect()).collect()).collect();
            serde::Serialize::serialize(&all, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Vec<Q>>>, D::Error> {
            Vec::<Vec<Vec<Raw>>>::deserialize(d)?
                .into_iter()
                .map(|m| m.into_iter().map(|r| r.into_iter().map(to_q).collect()).collect())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_q("3/6"), Some(qf(1, 2)));
        assert_eq!(parse_q("-7"), Some(q(-7)));
        assert_eq!(parse_q("-1.25"), Some(qf(-5, 4)));
        assert_eq!(parse_q("0.5"), Some(qf(1, 2)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(parse_q("x"), None);
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(9.869604401089358, 12), "9.86960440109");
        assert_eq!(fmt_sig(-19.739208802178716, 12), "-19.7392088022");
        assert_eq!(fmt_sig(0.5, 12), "0.5");
        assert_eq!(fmt_sig(1.0e-9, 12), "1e-9");
        assert_eq!(fmt_sig(0.0, 12), "0");
    }
}
