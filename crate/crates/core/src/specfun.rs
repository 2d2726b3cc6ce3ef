//! Angular-momentum and oscillator special functions.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer or half-integer, stored as twice its value so that arithmetic
/// stays exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// All projections `-j, -j+1, ..., j` for an angular momentum `j`.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let j = self.0;
        (-j..=j).step_by(2).map(HalfInt)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    /// Accepts `"3/2"`, `"-1/2"`, `"+1/2"` or plain integers.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::arg(format!("cannot parse {s:?} as a half-integer"));
        match s.split_once('/') {
            Some((num, "2")) => {
                let num = num.trim_start_matches('+');
                num.parse::<i32>().map(HalfInt).map_err(|_| bad())
            }
            Some(_) => Err(bad()),
            None => s
                .trim_start_matches('+')
                .parse::<i32>()
                .map(HalfInt::from_int)
                .map_err(|_| bad()),
        }
    }
}

/// Dimensionless displacement amplitude ξ of one oscillator mode.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Xi(f64);

impl Xi {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Xi(value))
        } else {
            Err(Error::arg(format!("ξ must be finite, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn factorial(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn check_jm(j: HalfInt, m: HalfInt, name: &str) -> Result<()> {
    if j.twice() < 0 {
        return Err(Error::arg(format!("{name}: negative angular momentum {j}")));
    }
    if (j.twice() - m.twice()).rem_euclid(2) != 0 {
        return Err(Error::arg(format!(
            "{name}: projection {m} is not congruent with j = {j}"
        )));
    }
    Ok(())
}

/// Wigner 3j symbol
///
/// ```text
/// ( j1 j2 j3 )
/// ( m1 m2 m3 )
/// ```
///
/// evaluated with the Racah sum in exact rational arithmetic. Selection-rule
/// violations (|m| > j, m1+m2+m3 ≠ 0, triangle) give exactly zero; a
/// projection with the wrong parity for its j is an argument error.
pub fn wigner3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> Result<f64> {
    check_jm(j1, m1, "(j1, m1)")?;
    check_jm(j2, m2, "(j2, m2)")?;
    check_jm(j3, m3, "(j3, m3)")?;

    let [j1, j2, j3, m1, m2, m3] = [j1, j2, j3, m1, m2, m3].map(|h| i64::from(h.twice()));
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return Ok(0.0);
    }
    if m1 + m2 + m3 != 0 {
        return Ok(0.0);
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 || (j1 + j2 + j3) % 2 != 0 {
        return Ok(0.0);
    }

    // Everything below is in ordinary (not doubled) units; all combinations
    // used are integers once the checks above pass.
    let h = |x: i64| x / 2;
    let (a, b, c) = (h(j1 + j2 - j3), h(j1 - j2 + j3), h(-j1 + j2 + j3));
    let total = h(j1 + j2 + j3);

    let triangle = BigRational::new(factorial(a) * factorial(b) * factorial(c), factorial(total + 1));
    let projections = factorial(h(j1 + m1))
        * factorial(h(j1 - m1))
        * factorial(h(j2 + m2))
        * factorial(h(j2 - m2))
        * factorial(h(j3 + m3))
        * factorial(h(j3 - m3));

    let k_min = 0.max(h(j2 - j3 - m1)).max(h(j1 - j3 + m2));
    let k_max = a.min(h(j1 - m1)).min(h(j2 + m2));
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(h(j3 - j2 + m1) + k)
            * factorial(h(j3 - j1 - m2) + k)
            * factorial(a - k)
            * factorial(h(j1 - m1) - k)
            * factorial(h(j2 + m2) - k);
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Ok(0.0);
    }

    let squared = triangle * BigRational::from_integer(projections) * &sum * &sum;
    let magnitude = squared
        .to_f64()
        .ok_or_else(|| Error::Numerical("3j magnitude out of f64 range".into()))?
        .sqrt();
    let phase_odd = h(j1 - j2 - m3).rem_euclid(2) == 1;
    let negative = sum.is_negative() ^ phase_odd;
    Ok(if negative { -magnitude } else { magnitude })
}

/// Associated Laguerre polynomial L^a_n(x) by the upward three-term
/// recurrence.
pub fn laguerre(a: u32, n: u32, x: f64) -> f64 {
    let a = f64::from(a);
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let k = f64::from(k);
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// ⟨m| exp[iξ(a† + a)] |n⟩ in closed form.
///
/// The Gaussian factor is exp(−ξ²/2); the phase is i^q with
/// q = 2n + 2 min(m,n) + sgn(ξ)(m − n), taking sgn(0) = +1. This reproduces
/// (iξ)^|m−n| times the real Laguerre envelope.
pub fn displacement_element(m: u32, n: u32, xi: Xi) -> C64 {
    let xi = xi.value();
    let lo = m.min(n);
    let hi = m.max(n);
    let x = xi * xi;

    // √(lo!/hi!) |ξ|^(hi−lo), accumulated factor by factor to stay in range.
    let mut envelope = 1.0;
    for k in (lo + 1)..=hi {
        envelope *= xi.abs() / f64::from(k).sqrt();
    }
    let value = envelope * laguerre(hi - lo, lo, x) * (-x / 2.0).exp();

    let sgn: i64 = if xi < 0.0 { -1 } else { 1 };
    let q = 2 * i64::from(n) + 2 * i64::from(lo) + sgn * (i64::from(m) - i64::from(n));
    quarter_turn(q.rem_euclid(4)) * value
}

fn quarter_turn(q: i64) -> C64 {
    match q {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hi(twice: i32) -> HalfInt {
        HalfInt::from_twice(twice)
    }

    fn w3j(t: [i32; 6]) -> f64 {
        wigner3j(hi(t[0]), hi(t[1]), hi(t[2]), hi(t[3]), hi(t[4]), hi(t[5])).unwrap()
    }

    #[test]
    fn halfint_parse_and_display() {
        assert_eq!("3/2".parse::<HalfInt>().unwrap(), hi(3));
        assert_eq!("-1/2".parse::<HalfInt>().unwrap(), hi(-1));
        assert_eq!("+1/2".parse::<HalfInt>().unwrap(), hi(1));
        assert_eq!("2".parse::<HalfInt>().unwrap(), hi(4));
        assert!("1/3".parse::<HalfInt>().is_err());
        assert_eq!(hi(5).to_string(), "5/2");
        assert_eq!(hi(-4).to_string(), "-2");
        assert_eq!(hi(3).projections().count(), 4);
    }

    #[test]
    fn xi_rejects_non_finite() {
        assert!(Xi::new(f64::NAN).is_err());
        assert!(Xi::new(f64::INFINITY).is_err());
        assert_eq!(Xi::new(-0.2).unwrap().value(), -0.2);
    }

    #[test]
    fn wigner3j_examples() {
        assert_abs_diff_eq!(w3j([2, 2, 0, 2, -2, 0]), 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(w3j([1, 2, 1, -1, 0, 1]), 1.0 / 6f64.sqrt(), epsilon = 1e-15);
        assert_eq!(w3j([2, 2, 2, 2, 2, 2]), 0.0);
    }

    #[test]
    fn wigner3j_selection_rules_and_errors() {
        // triangle violated
        assert_eq!(w3j([2, 2, 6, 0, 0, 0]), 0.0);
        // |m| > j
        assert_eq!(w3j([2, 2, 2, 4, -2, -2]), 0.0);
        // 2m parity mismatch
        assert!(wigner3j(hi(2), hi(2), hi(2), hi(1), hi(-1), hi(0)).is_err());
        assert!(wigner3j(hi(-2), hi(2), hi(0), hi(0), hi(0), hi(0)).is_err());
    }

    #[test]
    fn wigner3j_matches_symbolic_reference_values() {
        // Frozen from an independent symbolic evaluation.
        let cases = [
            ([5, 3, 4, 1, -3, 2], 0.25354627641855497),
            ([6, 5, 3, -4, 1, 3], 0.26726124191242438),
            ([8, 6, 4, 2, -4, 2], -0.19720265943665387),
            ([1, 2, 1, 1, -2, 1], -0.57735026918962576),
            ([20, 20, 40, 0, 0, 0], 0.077715689698223155),
        ];
        for (args, expected) in cases {
            assert_abs_diff_eq!(w3j(args), expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn wigner3j_large_j_stays_finite() {
        let v = w3j([80, 80, 160, 0, 0, 0]);
        assert!(v.is_finite() && v != 0.0 && v.abs() < 1.0);
    }

    #[test]
    fn laguerre_low_orders() {
        for a in 0..4 {
            assert_eq!(laguerre(a, 0, 3.7), 1.0);
        }
        assert_eq!(laguerre(0, 1, 2.0), -1.0);
        // L^1_2(x) = (x² − 6x + 6)/2
        assert_abs_diff_eq!(laguerre(1, 2, 0.5), (0.25 - 3.0 + 6.0) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn displacement_identity_at_zero() {
        let zero = Xi::new(0.0).unwrap();
        for m in 0..6 {
            for n in 0..6 {
                let expected = if m == n { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(displacement_element(m, n, zero).re, expected);
                assert_abs_diff_eq!(displacement_element(m, n, zero).im, 0.0);
            }
        }
    }

    #[test]
    fn displacement_first_elements() {
        let v = displacement_element(0, 0, Xi::new(0.3).unwrap());
        assert_abs_diff_eq!(v.norm(), (-0.045f64).exp(), epsilon = 1e-15);
        let v = displacement_element(0, 1, Xi::new(0.1).unwrap());
        assert_abs_diff_eq!(v.norm(), 0.1 * (-0.005f64).exp(), epsilon = 1e-15);
        // ⟨0|D|1⟩ = iξ e^{−ξ²/2}
        assert_abs_diff_eq!(v.im, 0.1 * (-0.005f64).exp(), epsilon = 1e-15);
    }
}
