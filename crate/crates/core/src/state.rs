//! State identifiers and exact rational helpers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Identifier of a game state.
///
/// Integer pairs are kept structured so that generated games such as the
/// climbing example can address states by coordinates. Ordering puts all
/// pairs before all names, which keeps iteration deterministic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateId {
    Pair(i64, i64),
    Name(String),
}

impl StateId {
    pub fn name(s: impl Into<String>) -> Self {
        StateId::Name(s.into())
    }

    pub fn pair(x: i64, y: i64) -> Self {
        StateId::Pair(x, y)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateId::Pair(x, y) => write!(f, "({x},{y})"),
            StateId::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid state label `{0}`")]
pub struct StateParseError(pub String);

impl FromStr for StateId {
    type Err = StateParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(StateParseError(s.to_string()));
        }
        if let Some(inner) = s.strip_prefix('(') {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| StateParseError(s.to_string()))?;
            let mut parts = inner.split(',');
            let x = parts.next().and_then(|p| p.trim().parse().ok());
            let y = parts.next().and_then(|p| p.trim().parse().ok());
            return match (x, y, parts.next()) {
                (Some(x), Some(y), None) => Ok(StateId::Pair(x, y)),
                _ => Err(StateParseError(s.to_string())),
            };
        }
        let ok = s
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '*' | '\''));
        if ok {
            Ok(StateId::Name(s.to_string()))
        } else {
            Err(StateParseError(s.to_string()))
        }
    }
}

/// Parses `p`, `-p`, `p/q` or a finite decimal such as `0.25` exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
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
        return Some(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let int_part: BigInt = match int.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            digits => digits.parse().ok()?,
        };
        let frac_part: BigInt = frac.parse().ok()?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Rational::new(int_part * &scale + frac_part, scale);
        return Some(if neg { -mag } else { mag });
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rational::from_integer(n))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fallback for huge numerators/denominators.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact rational with the same value as the given float (floats are dyadic).
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

/// Canonical text for a rational: `p` or `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_abs_le(r: &Rational, bound: &Rational) -> bool {
    r.abs() <= *bound
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_and_name_parse() {
        assert_eq!("(3,-1)".parse::<StateId>().unwrap(), StateId::Pair(3, -1));
        assert_eq!("( 0 , 0 )".parse::<StateId>().unwrap(), StateId::Pair(0, 0));
        assert_eq!("win".parse::<StateId>().unwrap(), StateId::name("win"));
        assert!("(1,2,3)".parse::<StateId>().is_err());
        assert!("a b".parse::<StateId>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["(12,-1)", "s", "k_2"] {
            assert_eq!(s.parse::<StateId>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn ordering_is_pairs_then_names() {
        let mut v = vec![StateId::name("a"), StateId::pair(1, 0), StateId::pair(0, 5)];
        v.sort();
        assert_eq!(
            v,
            vec![StateId::pair(0, 5), StateId::pair(1, 0), StateId::name("a")]
        );
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-3").unwrap(), rat(-3, 1));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
        assert_eq!(format_rational(&rat(6, 4)), "3/2");
        assert_eq!(format_rational(&rat(-2, 1)), "-2");
        assert_eq!(rational_to_f64(&rat(1, 8)), 0.125);
        assert_eq!(rational_from_f64(0.375), rat(3, 8));
    }
}
