//! Exact rationals in problem files: a JSON integer or a `"p/q"` string.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalSpec {
    Int(i64),
    Text(String),
}

impl Default for RationalSpec {
    fn default() -> Self {
        RationalSpec::Int(0)
    }
}

impl RationalSpec {
    pub fn parse(&self) -> Result<Ratio<i64>> {
        match self {
            RationalSpec::Int(i) => Ok(Ratio::from_integer(*i)),
            RationalSpec::Text(t) => parse_rational(t),
        }
    }
}

impl From<Ratio<i64>> for RationalSpec {
    fn from(r: Ratio<i64>) -> Self {
        if *r.denom() == 1 {
            RationalSpec::Int(*r.numer())
        } else {
            RationalSpec::Text(r.to_string())
        }
    }
}

pub fn parse_rational(t: &str) -> Result<Ratio<i64>> {
    let bad = || Error::InvalidProblem(format!("{t:?} is not a rational number"));
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t.trim(), "1"),
    };
    let num: i64 = num.parse().map_err(|_| bad())?;
    let den: i64 = den.parse().map_err(|_| bad())?;
    if den == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(num, den))
}

pub fn to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing() {
        assert_eq!(parse_rational("-1/2").unwrap(), Ratio::new(-1, 2));
        assert_eq!(parse_rational(" 4/2 ").unwrap(), Ratio::from_integer(2));
        assert_eq!(parse_rational("7").unwrap(), Ratio::from_integer(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
        let s: RationalSpec = serde_json::from_str("\"3/4\"").unwrap();
        assert_eq!(s.parse().unwrap(), Ratio::new(3, 4));
        assert_eq!(
            serde_json::to_string(&RationalSpec::from(Ratio::from_integer(5))).unwrap(),
            "5"
        );
    }
}
