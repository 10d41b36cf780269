//! Multi-pair strategies whose outputs commute for every θ.
//!
//! The `N`-copy output decomposes as `Σ_m f₀^{N−m} f₁^m A_m` with
//! orthogonal projectors `A_m` of rank `C(N,m)·kᵐ`, so the optimal
//! estimator reads `m` and the Bayes problem reduces to scalar moments
//! `ω_m⁽ᵏ⁾ = z ∫ θᵏ f₀^{N−m} f₁^m dθ`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::bayes::Prior;
use crate::channel::{output_family_ddim, FamilyPolys, MixtureKind};
use crate::error::{Error, Result};
use crate::poly::{scaled_power_integrals, to_f64, RatPoly};

/// Scalar description of an `N`-copy commuting strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureStrategy {
    f0: RatPoly,
    f1: RatPoly,
    copies: usize,
    weight_base: u64,
    d: usize,
}

impl MixtureStrategy {
    /// Built-in strategy using `pairs` maximally entangled pairs, or `2·pairs`
    /// single systems for [`MixtureKind::Sep`].
    pub fn new(kind: MixtureKind, d: usize, pairs: usize) -> Result<Self> {
        if pairs == 0 {
            return Err(Error::InvalidStrategy("need at least one pair".into()));
        }
        let FamilyPolys {
            f0,
            f1,
            copy_multiplier,
            weight_base,
        } = output_family_ddim(kind, d)?;
        Self::from_polys(f0, f1, pairs * copy_multiplier, weight_base, d)
    }

    pub fn from_polys(f0: RatPoly, f1: RatPoly, copies: usize, weight_base: u64, d: usize) -> Result<Self> {
        if copies == 0 || weight_base == 0 {
            return Err(Error::InvalidStrategy(format!(
                "copies = {copies}, weight base = {weight_base}"
            )));
        }
        let k = BigRational::from_integer(BigInt::from(weight_base));
        if &f0 + &f1.scale(&k) != RatPoly::one() {
            return Err(Error::InvalidStrategy(
                "f0 + k f1 is not identically 1".into(),
            ));
        }
        Ok(Self {
            f0,
            f1,
            copies,
            weight_base,
            d,
        })
    }

    pub fn f0(&self) -> &RatPoly {
        &self.f0
    }

    pub fn f1(&self) -> &RatPoly {
        &self.f1
    }

    /// `N`, the number of channel uses.
    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn weight_base(&self) -> u64 {
        self.weight_base
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `C(N, m)·kᵐ` for `m = 0..=N`.
    pub fn weights(&self) -> Vec<BigInt> {
        let n = self.copies;
        let k = BigInt::from(self.weight_base);
        let mut out = Vec::with_capacity(n + 1);
        let mut w = BigInt::one();
        for m in 0..=n {
            out.push(w.clone());
            w = w * BigInt::from(n - m) * &k / BigInt::from(m + 1);
        }
        out
    }
}

/// `ω_m⁽ᵏ⁾` by direct expansion of `θᵏ f₀^{N−m} f₁^m` and term-wise integration.
pub fn mixture_moments(s: &MixtureStrategy, m: usize, k: usize, prior: &Prior) -> Result<BigRational> {
    if m > s.copies || k > 2 {
        return Err(Error::DomainError(format!(
            "moment (m = {m}, k = {k}) with N = {}",
            s.copies
        )));
    }
    let integrand = &(&RatPoly::monomial(k) * &s.f0.pow(s.copies - m)) * &s.f1.pow(m);
    Ok(integrand.integrate(prior.lower(), prior.upper()) * prior.density())
}

/// All `ω_m⁽ᵏ⁾`, `k = 0, 1, 2`, `m = 0..=N`, over one common denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    /// `numer[k][m] / denom = ω_m⁽ᵏ⁾`
    pub numer: [Vec<BigInt>; 3],
    pub denom: BigInt,
}

impl MomentTable {
    pub fn omega(&self, k: usize, m: usize) -> BigRational {
        BigRational::new(self.numer[k][m].clone(), self.denom.clone())
    }
}

/// Exact moment table in O(N²) big-integer operations.
///
/// With `T(n, m) = ∫θᵏ f₀ⁿ f₁ᵐ`, the identity `f₀ = 1 − k f₁` gives
/// `T(n+1, m) = T(n, m) − k·T(n, m+1)`. Row `n = 0` only needs powers of `f₁`.
/// Everything is scaled to integers so no gcd is taken inside the loop.
pub fn moment_table(s: &MixtureStrategy, prior: &Prior) -> MomentTable {
    let n = s.copies;
    let (g1, d1) = s.f1.integer_coeffs();
    let deg = g1.len() - 1;
    let (ints, q) = scaled_power_integrals(prior.lower(), prior.upper(), deg * n + 2);

    // g1^m as integer polynomials
    let mut powers: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    powers.push(vec![BigInt::one()]);
    for m in 1..=n {
        let next = crate::poly::int_poly_mul(&powers[m - 1], &g1);
        powers.push(next);
    }

    let kb = BigInt::from(s.weight_base);
    let z = prior.density();

    let columns: Vec<Vec<BigInt>> = (0..3usize)
        .into_par_iter()
        .map(|kappa| {
            let mut row: Vec<BigInt> = powers
                .iter()
                .map(|p| {
                    p.iter()
                        .enumerate()
                        .map(|(j, c)| c * &ints[j + kappa])
                        .sum()
                })
                .collect();
            let mut scaled = vec![BigInt::zero(); n + 1];
            scaled[n] = row[n].clone();
            for step in 1..=n {
                let len = n - step + 1;
                let next: Vec<BigInt> = (0..len).map(|m| &d1 * &row[m] - &kb * &row[m + 1]).collect();
                row = next;
                scaled[n - step] = row[n - step].clone();
            }
            scaled.into_iter().map(|u| u * z.numer()).collect()
        })
        .collect();

    let mut it = columns.into_iter();
    MomentTable {
        numer: [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()],
        denom: num_traits::pow(d1, n) * q * z.denom(),
    }
}

/// Minimum Bayes cost of a commuting strategy and its estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCost {
    /// Sum of the exactly computed per-outcome terms, each rounded once.
    pub cost: f64,
    /// `θ_m = ω_m⁽¹⁾/ω_m⁽⁰⁾`; the prior mean where `ω_m⁽⁰⁾ = 0`.
    pub guesses: Vec<f64>,
    /// Per-outcome contributions as unreduced `(numerator, denominator)`.
    terms: Vec<(BigInt, BigInt)>,
}

impl SeriesCost {
    /// The cost as one reduced rational. The common denominator can run to
    /// millions of bits for large `N`, so this is only computed on request.
    pub fn exact(&self) -> BigRational {
        sum_fractions(self.terms.clone())
    }
}

/// Sum of fractions without intermediate reduction, pairwise so operand
/// sizes stay balanced. One gcd at the end.
fn sum_fractions(mut terms: Vec<(BigInt, BigInt)>) -> BigRational {
    if terms.is_empty() {
        return BigRational::zero();
    }
    while terms.len() > 1 {
        terms = terms
            .chunks(2)
            .map(|pair| match pair {
                [(a, b), (c, d)] => (a * d + c * b, b * d),
                [(a, b)] => (a.clone(), b.clone()),
                _ => unreachable!(),
            })
            .collect();
    }
    let (n, d) = terms.pop().unwrap();
    BigRational::new(n, d)
}

/// Neumaier-compensated sum.
fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Nearest double to `n/d` without reducing the fraction first.
fn ratio_f64(n: &BigInt, d: &BigInt) -> f64 {
    to_f64(&BigRational::new_raw(n.clone(), d.clone()))
}

pub fn cost_series(s: &MixtureStrategy, prior: &Prior) -> SeriesCost {
    let t = moment_table(s, prior);
    let [u0, u1, u2] = &t.numer;
    let mean = to_f64(&prior.mean());
    let mut guesses = Vec::with_capacity(s.copies + 1);
    let mut terms = Vec::with_capacity(s.copies + 1);
    // ω₂ − ω₁²/ω₀ = (u₂u₀ − u₁²)/(u₀Δ), non-negative by Cauchy–Schwarz,
    // so rounding term by term loses nothing to cancellation.
    for (m, w) in s.weights().into_iter().enumerate() {
        if u0[m].is_zero() {
            guesses.push(mean);
            continue;
        }
        guesses.push(ratio_f64(&u1[m], &u0[m]));
        terms.push((w * (&u2[m] * &u0[m] - &u1[m] * &u1[m]), &u0[m] * &t.denom));
    }
    SeriesCost {
        cost: compensated_sum(terms.iter().map(|(n, d)| ratio_f64(n, d))),
        guesses,
        terms,
    }
}

/// Guesses of the maximum-likelihood rule for `N` separable uses:
/// outcome `m` estimates the depolarized fraction `(d−1)(1−θ)/d` by `m/N`.
pub fn ml_guesses(copies: usize, d: usize) -> Vec<BigRational> {
    let nd = BigInt::from(copies * (d - 1));
    (0..=copies)
        .map(|m| BigRational::one() - BigRational::new(BigInt::from(m * d), nd.clone()))
        .collect()
}

/// Closed-form maximum-likelihood cost `(1/2M)·d⁵(d+3)/(6(d²−1)³)`.
pub fn cost_ml_formula(pairs: usize, d: usize) -> BigRational {
    let d = BigInt::from(d);
    let d2m1 = &d * &d - 1;
    let num = num_traits::pow(d.clone(), 5) * (&d + 3);
    let den = BigInt::from(12 * pairs) * num_traits::pow(d2m1, 3);
    BigRational::new(num, den)
}

/// Maximum-likelihood cost, closed form next to the exact average.
#[derive(Debug, Clone, PartialEq)]
pub struct MlCost {
    pub formula: f64,
    pub exact: f64,
    pub formula_exact: BigRational,
    pub exact_rational: BigRational,
    /// `exact / formula`
    pub ratio: f64,
}

pub fn cost_ml(pairs: usize, d: usize) -> Result<MlCost> {
    cost_ml_with_prior(pairs, d, &Prior::full(d)?)
}

/// `Σ_m C(2M,m)(d−1)ᵐ ∫ z (θ_m − θ)² f₀^{2M−m} f₁^m` with the fixed ML guesses.
pub fn cost_ml_with_prior(pairs: usize, d: usize, prior: &Prior) -> Result<MlCost> {
    if pairs == 0 {
        return Err(Error::DomainError("M must be positive".into()));
    }
    let s = MixtureStrategy::new(MixtureKind::Sep, d, pairs)?;
    let t = moment_table(&s, prior);
    let [u0, u1, u2] = &t.numer;
    // θ_m = (Q − m d)/Q with Q = N(d−1); clear Q² and Δ so the sum stays integral.
    let q = BigInt::from(s.copies * (d - 1));
    let q2 = &q * &q;
    let mut acc = BigInt::zero();
    for (m, w) in s.weights().into_iter().enumerate() {
        let p = &q - BigInt::from(m * d);
        acc += w * (&p * &p * &u0[m] - BigInt::from(2) * &p * &q * &u1[m] + &q2 * &u2[m]);
    }
    let total = BigRational::new(acc, q2 * &t.denom);
    let formula = cost_ml_formula(pairs, d);
    Ok(MlCost {
        formula: to_f64(&formula),
        exact: to_f64(&total),
        ratio: to_f64(&(&total / &formula)),
        formula_exact: formula,
        exact_rational: total,
    })
}
