//! Exact univariate polynomials over the rationals.
//!
//! Used wherever an integral of a polynomial in θ against the uniform prior
//! is needed without quadrature error.

use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Shorthand for an exact rational `num/den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Nearest double to an exact rational.
pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Coefficients in ascending powers: `coeffs[j]` multiplies θʲ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        Self { coeffs }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// The monomial θᵏ.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![BigRational::zero(); k + 1];
        c[k] = BigRational::one();
        Self::new(c)
    }

    /// `(num, den)` pairs in ascending powers.
    pub fn from_ratios(pairs: &[(i64, i64)]) -> Self {
        Self::new(pairs.iter().map(|&(n, d)| ratio(n, d)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn pow(&self, mut e: usize) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + to_f64(c))
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(to_f64).collect()
    }

    /// Exact ∫_lo^hi p(θ) dθ.
    pub fn integrate(&self, lo: &BigRational, hi: &BigRational) -> BigRational {
        let mut hi_pow = hi.clone();
        let mut lo_pow = lo.clone();
        let mut total = BigRational::zero();
        for (j, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                total += c * (&hi_pow - &lo_pow) / BigRational::from_integer(BigInt::from(j + 1));
            }
            hi_pow *= hi;
            lo_pow *= lo;
        }
        total
    }

    /// Least common multiple of the coefficient denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Integer coefficients of `den · p` where `den` is the common denominator.
    pub fn integer_coeffs(&self) -> (Vec<BigInt>, BigInt) {
        let den = self.common_denominator();
        let ints = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
            .collect();
        (ints, den)
    }
}

impl Add for &RatPoly {
    type Output = RatPoly;

    fn add(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = BigRational::zero();
        RatPoly::new(
            (0..n)
                .map(|j| self.coeffs.get(j).unwrap_or(&zero) + rhs.coeffs.get(j).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Sub for &RatPoly {
    type Output = RatPoly;

    fn sub(self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = BigRational::zero();
        RatPoly::new(
            (0..n)
                .map(|j| self.coeffs.get(j).unwrap_or(&zero) - rhs.coeffs.get(j).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Mul for &RatPoly {
    type Output = RatPoly;

    fn mul(self, rhs: &RatPoly) -> RatPoly {
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly::new(out)
    }
}

/// Product of integer polynomials (ascending coefficients).
pub(crate) fn int_poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Integer-scaled power integrals over `[lo, hi]`.
///
/// Returns `(scaled, q)` with `scaled[n] = q · ∫_lo^hi θⁿ dθ` an exact
/// integer for every `n ≤ max_power`.
pub(crate) fn scaled_power_integrals(
    lo: &BigRational,
    hi: &BigRational,
    max_power: usize,
) -> (Vec<BigInt>, BigInt) {
    let (ln, ld) = (lo.numer(), lo.denom());
    let (hn, hd) = (hi.numer(), hi.denom());
    let base = ld * hd;
    let lcm = (1..=max_power + 1).fold(BigInt::one(), |acc, k| acc.lcm(&BigInt::from(k)));

    // ∫θⁿ = (hn^{n+1} ld^{n+1} − ln^{n+1} hd^{n+1}) / (base^{n+1} (n+1))
    let mut scaled = Vec::with_capacity(max_power + 1);
    let mut hi_term = BigInt::one();
    let mut lo_term = BigInt::one();
    let mut base_pows = Vec::with_capacity(max_power + 1);
    let mut bp = BigInt::one();
    for _ in 0..=max_power {
        base_pows.push(bp.clone());
        bp *= &base;
    }
    for n in 0..=max_power {
        hi_term *= hn * ld;
        lo_term *= ln * hd;
        let diff = &hi_term - &lo_term;
        let factor = &lcm / BigInt::from(n + 1);
        scaled.push(diff * &base_pows[max_power - n] * factor);
    }
    let q = &base_pows[max_power] * &base * lcm;
    (scaled, q)
}

/// `true` when the rational is strictly positive.
pub(crate) fn is_positive(q: &BigRational) -> bool {
    q.is_positive()
}
