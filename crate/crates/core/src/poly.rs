//! Polynomials in the formal variable `b` with nonnegative integer coefficients.
//!
//! Morse, Poincaré and error polynomials all live here. The representation is
//! sparse: a degree is present in the map only when its coefficient is
//! strictly positive, so the zero polynomial is the empty map.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("degree {degree} exceeds reversal dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("{poly} is not (1+b) times a polynomial with nonnegative coefficients")]
    NotDivisible { poly: GradedPoly },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "BTreeMap<usize, u64>", into = "BTreeMap<usize, u64>")]
pub struct GradedPoly {
    coeffs: BTreeMap<usize, u64>,
}

impl From<BTreeMap<usize, u64>> for GradedPoly {
    fn from(mut coeffs: BTreeMap<usize, u64>) -> Self {
        coeffs.retain(|_, c| *c != 0);
        GradedPoly { coeffs }
    }
}

impl From<GradedPoly> for BTreeMap<usize, u64> {
    fn from(p: GradedPoly) -> Self {
        p.coeffs
    }
}

fn checked_add(a: u64, b: u64) -> u64 {
    a.checked_add(b)
        .unwrap_or_else(|| panic!("polynomial coefficient overflow: {a} + {b}"))
}

fn checked_mul(a: u64, b: u64) -> u64 {
    a.checked_mul(b)
        .unwrap_or_else(|| panic!("polynomial coefficient overflow: {a} * {b}"))
}

impl GradedPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 1)
    }

    /// `coeff * b^degree`.
    pub fn monomial(degree: usize, coeff: u64) -> Self {
        let mut coeffs = BTreeMap::new();
        if coeff != 0 {
            coeffs.insert(degree, coeff);
        }
        GradedPoly { coeffs }
    }

    /// `1 + b`, the factor of the strong Morse inequalities.
    pub fn one_plus_b() -> Self {
        Self::from_dense(&[1, 1])
    }

    /// Builds a polynomial from dense coefficients, lowest degree first.
    pub fn from_dense(coeffs: &[u64]) -> Self {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| (k, c))
            .collect::<BTreeMap<_, _>>()
            .into()
    }

    /// Dense coefficients `[c_0, .., c_len-1]`, zero padded.
    pub fn to_dense(&self, len: usize) -> Vec<u64> {
        (0..len).map(|k| self.coeff(k)).collect()
    }

    pub fn coeff(&self, degree: usize) -> u64 {
        self.coeffs.get(&degree).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest degree with a nonzero coefficient, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    /// Iterates `(degree, coefficient)` pairs in increasing degree.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    /// Value at `b = 1`, the total dimension.
    pub fn total(&self) -> u64 {
        self.coeffs.values().fold(0, |acc, &c| checked_add(acc, c))
    }

    pub fn add(&self, other: &GradedPoly) -> GradedPoly {
        let mut coeffs = self.coeffs.clone();
        for (&k, &c) in &other.coeffs {
            let e = coeffs.entry(k).or_insert(0);
            *e = checked_add(*e, c);
        }
        GradedPoly { coeffs }
    }

    pub fn mul(&self, other: &GradedPoly) -> GradedPoly {
        let mut coeffs = BTreeMap::new();
        for (&i, &a) in &self.coeffs {
            for (&j, &b) in &other.coeffs {
                let e = coeffs.entry(i + j).or_insert(0);
                *e = checked_add(*e, checked_mul(a, b));
            }
        }
        GradedPoly { coeffs }
    }

    /// Coefficientwise difference, `None` if any coefficient would go negative.
    pub fn checked_sub(&self, other: &GradedPoly) -> Option<GradedPoly> {
        let mut coeffs = self.coeffs.clone();
        for (&k, &c) in &other.coeffs {
            let e = coeffs.entry(k).or_insert(0);
            *e = e.checked_sub(c)?;
        }
        Some(GradedPoly::from(coeffs))
    }

    /// Signed coefficientwise difference `self - other` as dense vector of length `len`.
    pub fn signed_diff(&self, other: &GradedPoly, len: usize) -> Vec<i64> {
        (0..len)
            .map(|k| self.coeff(k) as i64 - other.coeff(k) as i64)
            .collect()
    }

    /// `b^n p(1/b)`: the coefficient of degree `k` moves to degree `n - k`.
    pub fn reverse(&self, n: usize) -> Result<GradedPoly, PolyError> {
        if let Some(d) = self.degree().filter(|&d| d > n) {
            return Err(PolyError::DegreeOverflow { degree: d, dim: n });
        }
        Ok(GradedPoly {
            coeffs: self.coeffs.iter().map(|(&k, &c)| (n - k, c)).collect(),
        })
    }

    pub fn is_palindromic(&self, n: usize) -> bool {
        self.reverse(n).map(|r| &r == self).unwrap_or(false)
    }

    /// Exact division by `1 + b` with a nonnegative quotient.
    ///
    /// Long division from the constant term: `q_0 = p_0`, `q_k = p_k - q_{k-1}`,
    /// and the top coefficient must match the last quotient coefficient.
    pub fn divide_one_plus_b(&self) -> Result<GradedPoly, PolyError> {
        let Some(top) = self.degree() else {
            return Ok(GradedPoly::zero());
        };
        let fail = || PolyError::NotDivisible { poly: self.clone() };
        let mut quotient = Vec::with_capacity(top);
        let mut prev = 0u64;
        for k in 0..top {
            let q = self.coeff(k).checked_sub(prev).ok_or_else(fail)?;
            quotient.push(q);
            prev = q;
        }
        if self.coeff(top) != prev {
            return Err(fail());
        }
        Ok(GradedPoly::from_dense(&quotient))
    }

    /// Alternating sum of coefficients, i.e. the value at `b = -1`.
    pub fn eval_minus_one(&self) -> i64 {
        self.coeffs.iter().fold(0i64, |acc, (&k, &c)| {
            let c = i64::try_from(c).expect("coefficient exceeds i64 range");
            let term = if k % 2 == 0 { c } else { -c };
            acc.checked_add(term).expect("alternating sum overflow")
        })
    }

    /// Degreewise minimum.
    pub fn coeff_min(&self, other: &GradedPoly) -> GradedPoly {
        let coeffs = self
            .coeffs
            .iter()
            .filter_map(|(&k, &c)| {
                let d = other.coeff(k);
                (d > 0).then_some((k, c.min(d)))
            })
            .collect();
        GradedPoly { coeffs }
    }

    /// `p^k`.
    pub fn pow(&self, k: u32) -> GradedPoly {
        (0..k).fold(GradedPoly::one(), |acc, _| acc.mul(self))
    }
}

impl Add for &GradedPoly {
    type Output = GradedPoly;
    fn add(self, rhs: &GradedPoly) -> GradedPoly {
        GradedPoly::add(self, rhs)
    }
}

impl Mul for &GradedPoly {
    type Output = GradedPoly;
    fn mul(self, rhs: &GradedPoly) -> GradedPoly {
        GradedPoly::mul(self, rhs)
    }
}

impl std::iter::Sum for GradedPoly {
    fn sum<I: Iterator<Item = GradedPoly>>(iter: I) -> Self {
        iter.fold(GradedPoly::zero(), |acc, p| acc.add(&p))
    }
}

impl std::iter::Product for GradedPoly {
    fn product<I: Iterator<Item = GradedPoly>>(iter: I) -> Self {
        iter.fold(GradedPoly::one(), |acc, p| acc.mul(&p))
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (&k, &c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match (k, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "b")?,
                (1, c) => write!(f, "{c}b")?,
                (k, 1) => write!(f, "b^{k}")?,
                (k, c) => write!(f, "{c}b^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[u64]) -> GradedPoly {
        GradedPoly::from_dense(c)
    }

    /// Independent convolution on dense vectors.
    fn convolve(a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out = vec![0; a.len() + b.len()];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn add_examples() {
        assert_eq!(p(&[1, 1]).add(&p(&[0, 1, 1])), p(&[1, 2, 1]));
        assert_eq!(p(&[1]).add(&GradedPoly::zero()), p(&[1]));
        let cube = p(&[1, 1, 1, 1]);
        assert_eq!(cube.add(&cube), p(&[2, 2, 2, 2]));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(p(&[1, 1]).mul(&p(&[1, 1])), p(&[1, 2, 1]));
        let expected = convolve(&[1, 1, 1, 1], &[1, 1]);
        assert_eq!(expected, vec![1, 2, 2, 2, 1, 0]);
        assert_eq!(p(&[1, 1, 1, 1]).mul(&p(&[1, 1])), p(&expected));
        let q = p(&[3, 0, 2]);
        assert_eq!(q.mul(&GradedPoly::one()), q);
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(p(&[1, 3, 2]).reverse(2).unwrap(), p(&[2, 3, 1]));
        assert_eq!(p(&[1, 1, 1, 1]).reverse(3).unwrap(), p(&[1, 1, 1, 1]));
        assert_eq!(p(&[1, 2, 0, 1]).reverse(3).unwrap(), p(&[1, 0, 2, 1]));
        assert_eq!(
            p(&[1, 0, 0, 1]).reverse(2),
            Err(PolyError::DegreeOverflow { degree: 3, dim: 2 })
        );
    }

    #[test]
    fn divide_examples() {
        assert_eq!(p(&[0, 1, 1]).divide_one_plus_b().unwrap(), p(&[0, 1]));
        assert_eq!(
            GradedPoly::zero().divide_one_plus_b().unwrap(),
            GradedPoly::zero()
        );
        assert!(matches!(
            p(&[1, 0, 1]).divide_one_plus_b(),
            Err(PolyError::NotDivisible { .. })
        ));
        // remainder without negative coefficients
        assert!(p(&[1, 1, 1]).divide_one_plus_b().is_err());
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p(&[1, 3, 2]).eval_minus_one(), 0);
        assert_eq!(p(&[1, 0, 1, 0, 1]).eval_minus_one(), 3);
        assert_eq!(GradedPoly::one().eval_minus_one(), 1);
    }

    #[test]
    fn min_examples() {
        assert_eq!(p(&[1, 3, 2]).coeff_min(&p(&[2, 3, 1])), p(&[1, 3, 1]));
        let q = p(&[4, 0, 1]);
        assert_eq!(q.coeff_min(&q), q);
        assert!(q.coeff_min(&GradedPoly::zero()).is_zero());
    }

    #[test]
    fn zero_coefficients_are_never_stored() {
        let q = p(&[0, 0, 3, 0]);
        assert_eq!(q.iter().collect::<Vec<_>>(), vec![(2, 3)]);
        assert_eq!(p(&[0, 0]), GradedPoly::zero());
        assert_eq!(
            p(&[1, 2]).checked_sub(&p(&[1, 2])),
            Some(GradedPoly::zero())
        );
        assert_eq!(p(&[1]).checked_sub(&p(&[0, 1])), None);
    }

    #[test]
    fn json_shape() {
        let q = p(&[1, 3, 2]);
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, r#"{"0":1,"1":3,"2":2}"#);
        let back: GradedPoly = serde_json::from_str(r#"{"2":2,"0":1,"1":3,"5":0}"#).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn display() {
        assert_eq!(p(&[1, 3, 2]).to_string(), "1 + 3b + 2b^2");
        assert_eq!(p(&[0, 1, 0, 1]).to_string(), "b + b^3");
        assert_eq!(GradedPoly::zero().to_string(), "0");
    }

    #[test]
    #[should_panic(expected = "overflow")]
    fn overflow_aborts() {
        let big = GradedPoly::monomial(0, u64::MAX);
        let _ = big.add(&GradedPoly::one());
    }

    fn arb_poly() -> impl Strategy<Value = GradedPoly> {
        proptest::collection::vec(0u64..20, 0..7).prop_map(|v| GradedPoly::from_dense(&v))
    }

    proptest! {
        #[test]
        fn ring_laws(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn mul_matches_convolution(a in proptest::collection::vec(0u64..20, 0..7),
                                   b in proptest::collection::vec(0u64..20, 0..7)) {
            let got = GradedPoly::from_dense(&a).mul(&GradedPoly::from_dense(&b));
            prop_assert_eq!(got, GradedPoly::from_dense(&convolve(&a, &b)));
        }

        #[test]
        fn reverse_involution(a in arb_poly(), extra in 0usize..3) {
            let n = a.degree().unwrap_or(0) + extra;
            prop_assert_eq!(a.reverse(n).unwrap().reverse(n).unwrap(), a);
        }

        #[test]
        fn division_roundtrip(q in arb_poly()) {
            let m = GradedPoly::one_plus_b().mul(&q);
            prop_assert_eq!(m.eval_minus_one(), 0);
            prop_assert_eq!(m.divide_one_plus_b().unwrap(), q);
        }
    }
}
