//! Exact arithmetic over polynomials in one positive infinitesimal `e`.
//!
//! A [`Hyperreal`] is `c0 + c1*e + c2*e^2 + ...` with rational coefficients.
//! Values carry a degree bound `D`; a product whose degree would exceed the
//! bound is reported as [`HyperrealError::DegreeOverflow`] instead of being
//! truncated, because dropping high-order terms can flip a comparison.
//!
//! There is deliberately no division. Ratios of non-negative values are only
//! ever needed through their standard part being zero, which
//! [`ratio_st_is_zero`] decides from leading degrees.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational in canonical form.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HyperrealError {
    #[error("product of degree {degree} exceeds degree bound {bound}")]
    DegreeOverflow { degree: usize, bound: usize },
    #[error("negative input to a predicate defined on non-negative values")]
    NegativeInput,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse hyperreal {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// Leading (lowest) ε-degree of a value, or `Zero` for the zero value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LeadingDegree {
    Degree(usize),
    Zero,
}

#[derive(Clone, Debug, Default)]
pub struct Hyperreal {
    /// `coeffs[k]` is the coefficient of `e^k`; no trailing zeros.
    coeffs: Vec<Rational>,
    bound: usize,
}

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

impl Hyperreal {
    pub fn zero() -> Self {
        Hyperreal::default()
    }

    pub fn one() -> Self {
        Hyperreal::from_rational(Rational::one())
    }

    /// A standard value; its degree bound is 0 so it never widens the bound
    /// of values it is combined with.
    pub fn from_rational(value: Rational) -> Self {
        Hyperreal::from_coefficients(vec![value], 0).expect("constant fits any bound")
    }

    /// `e^k` under degree bound `bound`.
    pub fn epsilon_pow(k: usize, bound: usize) -> Result<Self, HyperrealError> {
        let mut coeffs = vec![Rational::zero(); k];
        coeffs.push(Rational::one());
        Hyperreal::from_coefficients(coeffs, bound)
    }

    /// Builds a value from ascending coefficients. Trailing zeros are stripped
    /// before the degree is checked against `bound`.
    pub fn from_coefficients(mut coeffs: Vec<Rational>, bound: usize) -> Result<Self, HyperrealError> {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.len() > bound + 1 {
            return Err(HyperrealError::DegreeOverflow { degree: coeffs.len() - 1, bound });
        }
        Ok(Hyperreal { coeffs, bound })
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn degree_bound(&self) -> usize {
        self.bound
    }

    /// Returns the same value under a different degree bound.
    pub fn with_bound(&self, bound: usize) -> Result<Self, HyperrealError> {
        Hyperreal::from_coefficients(self.coeffs.clone(), bound)
    }

    /// Highest ε-degree with a nonzero coefficient (0 for the zero value).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sign of the value: the sign of its lowest-degree nonzero coefficient.
    pub fn signum(&self) -> Ordering {
        match self.coeffs.iter().find(|c| !c.is_zero()) {
            None => Ordering::Equal,
            Some(c) if c.is_positive() => Ordering::Greater,
            Some(_) => Ordering::Less,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn leading_degree(&self) -> LeadingDegree {
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            Some(k) => LeadingDegree::Degree(k),
            None => LeadingDegree::Zero,
        }
    }

    pub fn standard_part(&self) -> Rational {
        self.coeffs.first().cloned().unwrap_or_else(Rational::zero)
    }

    /// Exact product. Fails if the result's degree exceeds the larger of the
    /// two operands' bounds.
    pub fn checked_mul(&self, other: &Hyperreal) -> Result<Hyperreal, HyperrealError> {
        let bound = self.bound.max(other.bound);
        if self.is_zero() || other.is_zero() {
            return Ok(Hyperreal { coeffs: Vec::new(), bound });
        }
        let degree = self.degree() + other.degree();
        if degree > bound {
            return Err(HyperrealError::DegreeOverflow { degree, bound });
        }
        let mut coeffs = vec![Rational::zero(); degree + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Hyperreal::from_coefficients(coeffs, bound)
    }

    /// Multiplication by a standard scalar; never raises the degree.
    pub fn scale(&self, factor: &Rational) -> Hyperreal {
        if factor.is_zero() {
            return Hyperreal { coeffs: Vec::new(), bound: self.bound };
        }
        Hyperreal { coeffs: self.coeffs.iter().map(|c| c * factor).collect(), bound: self.bound }
    }

    /// `self += factor * other` without intermediate allocation.
    pub fn add_scaled(&mut self, other: &Hyperreal, factor: &Rational) {
        if factor.is_zero() || other.is_zero() {
            return;
        }
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), Rational::zero());
        }
        for (dst, src) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *dst += src * factor;
        }
        self.bound = self.bound.max(other.bound);
        self.normalize();
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    fn combine(&self, other: &Hyperreal, negate_other: bool) -> Hyperreal {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(len);
        for k in 0..len {
            let a = self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero);
            let b = other.coeffs.get(k);
            coeffs.push(match (b, negate_other) {
                (None, _) => a,
                (Some(b), false) => a + b,
                (Some(b), true) => a - b,
            });
        }
        let mut out = Hyperreal { coeffs, bound: self.bound.max(other.bound) };
        out.normalize();
        out
    }
}

impl PartialEq for Hyperreal {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for Hyperreal {}

impl Ord for Hyperreal {
    /// Lexicographic by ascending ε-degree: the constant term decides first,
    /// then the coefficient of `e`, and so on.
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = Rational::zero();
        for k in 0..len {
            let a = self.coeffs.get(k).unwrap_or(&zero);
            let b = other.coeffs.get(k).unwrap_or(&zero);
            match a.cmp(b) {
                Ordering::Equal => continue,
                unequal => return unequal,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Hyperreal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::hash::Hash for Hyperreal {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl Add for &Hyperreal {
    type Output = Hyperreal;
    fn add(self, rhs: &Hyperreal) -> Hyperreal {
        self.combine(rhs, false)
    }
}

impl Add for Hyperreal {
    type Output = Hyperreal;
    fn add(self, rhs: Hyperreal) -> Hyperreal {
        self.combine(&rhs, false)
    }
}

impl Sub for &Hyperreal {
    type Output = Hyperreal;
    fn sub(self, rhs: &Hyperreal) -> Hyperreal {
        self.combine(rhs, true)
    }
}

impl Sub for Hyperreal {
    type Output = Hyperreal;
    fn sub(self, rhs: Hyperreal) -> Hyperreal {
        self.combine(&rhs, true)
    }
}

impl Neg for &Hyperreal {
    type Output = Hyperreal;
    fn neg(self) -> Hyperreal {
        Hyperreal { coeffs: self.coeffs.iter().map(|c| -c).collect(), bound: self.bound }
    }
}

impl Neg for Hyperreal {
    type Output = Hyperreal;
    fn neg(self) -> Hyperreal {
        -&self
    }
}

impl<'a> std::iter::Sum<&'a Hyperreal> for Hyperreal {
    fn sum<I: Iterator<Item = &'a Hyperreal>>(iter: I) -> Hyperreal {
        let mut acc = Hyperreal::zero();
        for x in iter {
            acc.add_scaled(x, &Rational::one());
        }
        acc
    }
}

/// Three-way comparison under the unique order with `0 < e < r` for every
/// positive rational `r`.
pub fn compare(a: &Hyperreal, b: &Hyperreal) -> Ordering {
    a.cmp(b)
}

/// `x` is infinitely greater than `y` (both non-negative): `x > n*y` for
/// every natural `n`. Equivalent to `st(y/x) = 0`.
pub fn infinitely_greater(x: &Hyperreal, y: &Hyperreal) -> Result<bool, HyperrealError> {
    if x.is_negative() || y.is_negative() {
        return Err(HyperrealError::NegativeInput);
    }
    Ok(match (x.leading_degree(), y.leading_degree()) {
        (LeadingDegree::Zero, _) => false,
        (LeadingDegree::Degree(_), LeadingDegree::Zero) => true,
        (LeadingDegree::Degree(dx), LeadingDegree::Degree(dy)) => dx < dy,
    })
}

/// Decides `st(numerator / denominator) = 0` without forming the quotient.
pub fn ratio_st_is_zero(numerator: &Hyperreal, denominator: &Hyperreal) -> Result<bool, HyperrealError> {
    if denominator.is_zero() {
        return Err(HyperrealError::ZeroDenominator);
    }
    if numerator.is_negative() || denominator.is_negative() {
        return Err(HyperrealError::NegativeInput);
    }
    Ok(match (numerator.leading_degree(), denominator.leading_degree()) {
        (LeadingDegree::Zero, _) => true,
        (LeadingDegree::Degree(n), LeadingDegree::Degree(d)) => n > d,
        (LeadingDegree::Degree(_), LeadingDegree::Zero) => unreachable!("denominator checked nonzero"),
    })
}

impl fmt::Display for Hyperreal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let magnitude = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{magnitude}")?,
                _ => {
                    if !magnitude.is_one() {
                        write!(f, "{magnitude}*")?;
                    }
                    if k == 1 {
                        f.write_str("e")?;
                    } else {
                        write!(f, "e^{k}")?;
                    }
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl FromStr for Hyperreal {
    type Err = HyperrealError;

    /// Parses `c0 + c1*e + c2*e^2` style sums. Terms may appear in any order
    /// and repeat; coefficients are integers or `p/q`. The resulting degree
    /// bound is the value's own degree.
    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| HyperrealError::Parse { input: input.to_string(), reason: reason.to_string() };
        let compact: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty input"));
        }
        // Split into signed terms.
        let mut terms: Vec<(bool, &str)> = Vec::new();
        let bytes = compact.as_bytes();
        let mut start = 0;
        let mut negative = false;
        let mut i = 0;
        if bytes[0] == b'+' || bytes[0] == b'-' {
            negative = bytes[0] == b'-';
            start = 1;
            i = 1;
        }
        while i < bytes.len() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && i > start {
                terms.push((negative, &compact[start..i]));
                negative = bytes[i] == b'-';
                start = i + 1;
            }
            i += 1;
        }
        terms.push((negative, &compact[start..]));

        let mut coeffs: Vec<Rational> = Vec::new();
        for (negative, term) in terms {
            if term.is_empty() {
                return Err(err("empty term"));
            }
            let (coef_text, power) = match term.find('e') {
                None => (term, 0usize),
                Some(pos) => {
                    let power = match &term[pos + 1..] {
                        "" => 1,
                        rest => rest
                            .strip_prefix('^')
                            .and_then(|p| p.parse::<usize>().ok())
                            .ok_or_else(|| err("bad exponent"))?,
                    };
                    let coef = &term[..pos];
                    let coef = if coef.is_empty() {
                        "1"
                    } else {
                        coef.strip_suffix('*').ok_or_else(|| err("expected '*' before e"))?
                    };
                    (coef, power)
                }
            };
            let mut value = parse_rational(coef_text).ok_or_else(|| err("bad coefficient"))?;
            if negative {
                value = -value;
            }
            if coeffs.len() <= power {
                coeffs.resize(power + 1, Rational::zero());
            }
            coeffs[power] += value;
        }
        let bound = coeffs.len().saturating_sub(1);
        Hyperreal::from_coefficients(coeffs, bound)
    }
}

/// Parses an unsigned-or-signed integer or `p/q` with a nonzero denominator.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let (numer, denom) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let valid_digits = |s: &str, signed: bool| {
        let digits = if signed { s.strip_prefix('-').unwrap_or(s) } else { s };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid_digits(numer, true) || !valid_digits(denom, false) {
        return None;
    }
    let numer: BigInt = numer.parse().ok()?;
    let denom: BigInt = denom.parse().ok()?;
    if denom.is_zero() {
        return None;
    }
    Some(Rational::new(numer, denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(s: &str) -> Hyperreal {
        s.parse().unwrap()
    }

    #[test]
    fn addition_examples() {
        assert_eq!(h("1 - e") + h("e"), h("1"));
        assert_eq!(Hyperreal::zero() + h("3/2*e^2"), h("3/2*e^2"));
        assert_eq!(h("1/2 + e") + h("1/2 + e"), h("1 + 2*e"));
    }

    #[test]
    fn multiplication_examples() {
        let e = Hyperreal::epsilon_pow(1, 2).unwrap();
        assert_eq!(e.checked_mul(&e).unwrap(), h("e^2"));
        let a = h("1 - e").with_bound(2).unwrap();
        assert_eq!(a.checked_mul(&h("1 + e")).unwrap(), h("1 - e^2"));
        assert_eq!(Hyperreal::from_rational(integer(2)).checked_mul(&h("1/2 + e")).unwrap(), h("1 + 2*e"));
    }

    #[test]
    fn multiplication_overflow_is_an_error() {
        let e = Hyperreal::epsilon_pow(1, 1).unwrap();
        assert_eq!(e.checked_mul(&e), Err(HyperrealError::DegreeOverflow { degree: 2, bound: 1 }));
        assert!(Hyperreal::epsilon_pow(3, 2).is_err());
    }

    #[test]
    fn comparison_examples() {
        assert_eq!(compare(&h("1/2 - e"), &h("1/2")), Ordering::Less);
        assert_eq!(compare(&h("e"), &h("e^2")), Ordering::Greater);
        assert_eq!(compare(&h("2*e"), &h("e")), Ordering::Greater);
        assert_eq!(compare(&h("-e"), &Hyperreal::zero()), Ordering::Less);
        assert_eq!(compare(&h("1/1000000"), &h("1000000*e")), Ordering::Greater);
    }

    #[test]
    fn standard_part_examples() {
        assert_eq!(h("1/2 + 3*e").standard_part(), rational(1, 2));
        assert_eq!(h("e").standard_part(), integer(0));
        assert_eq!(h("7/3").standard_part(), rational(7, 3));
    }

    #[test]
    fn leading_degree_examples() {
        assert_eq!(h("e^2 + e^3").leading_degree(), LeadingDegree::Degree(2));
        assert_eq!(h("1 - e").leading_degree(), LeadingDegree::Degree(0));
        assert_eq!(Hyperreal::zero().leading_degree(), LeadingDegree::Zero);
    }

    #[test]
    fn infinitely_greater_examples() {
        assert!(infinitely_greater(&h("e"), &h("e^2")).unwrap());
        assert!(!infinitely_greater(&h("2*e"), &h("e")).unwrap());
        assert!(!infinitely_greater(&Hyperreal::zero(), &Hyperreal::zero()).unwrap());
        assert!(infinitely_greater(&h("e^5"), &Hyperreal::zero()).unwrap());
        assert_eq!(infinitely_greater(&h("-e"), &h("e")), Err(HyperrealError::NegativeInput));
    }

    #[test]
    fn ratio_examples() {
        assert!(ratio_st_is_zero(&h("e^2"), &h("e")).unwrap());
        assert!(!ratio_st_is_zero(&h("e"), &h("e")).unwrap());
        assert!(ratio_st_is_zero(&Hyperreal::zero(), &h("1 - e")).unwrap());
        assert_eq!(ratio_st_is_zero(&h("1"), &Hyperreal::zero()), Err(HyperrealError::ZeroDenominator));
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(h("1/2 - 3*e + e^2").to_string(), "1/2 - 3*e + e^2");
        assert_eq!(h("-e").to_string(), "-e");
        assert_eq!(Hyperreal::zero().to_string(), "0");
        assert_eq!(h("e^2 + 1"), h("1 + e^2"));
        assert_eq!(h("2*e - e"), h("e"));
        assert!("1.5".parse::<Hyperreal>().is_err());
        assert!("1/0".parse::<Hyperreal>().is_err());
        assert!("e^".parse::<Hyperreal>().is_err());
        assert!("".parse::<Hyperreal>().is_err());
    }

    #[test]
    fn parse_rational_rejects_junk() {
        assert_eq!(parse_rational("-3/4"), Some(rational(-3, 4)));
        assert_eq!(parse_rational("6/4"), Some(rational(3, 2)));
        assert_eq!(parse_rational("3/-4"), None);
        assert_eq!(parse_rational("--1"), None);
        assert_eq!(parse_rational("1.0"), None);
    }
}
