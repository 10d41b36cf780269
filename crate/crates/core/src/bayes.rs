//! Bayes machinery for a single estimated parameter under quadratic cost.
//!
//! Given an output family `Ψ(θ)` and a uniform prior, the risk operator is
//! `W(θ) = W⁽²⁾ − 2θW⁽¹⁾ + θ²W⁽⁰⁾` with `W⁽ᵏ⁾ = ∫ z θᵏ Ψ(θ) dθ`. The optimal
//! measurement is the spectral measure of the minimizing operator Θ,
//! the Hermitian solution of `ΘW⁽⁰⁾ + W⁽⁰⁾Θ = 2W⁽¹⁾`, and the eigenvalues
//! of Θ are the estimates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::channel::MatrixPolynomial;
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, ComplexMatrix};
use crate::poly::{is_positive, ratio, to_f64, RatPoly};

/// Eigenvalue sums at or below this are treated as zero in the Sylvester solve.
pub const SINGULAR_PAIR_TOL: f64 = 1e-12;
/// Default relative tolerance for merging degenerate Θ eigenvalues.
pub const DEFAULT_MERGE_TOL: f64 = 1e-9;
/// Tolerance for the Holevo conditions.
pub const OPTIMALITY_TOL: f64 = 1e-9;
/// Default θ-grid size for checking condition (ii).
pub const DEFAULT_VERIFY_GRID: usize = 1001;
/// POM completeness / idempotence tolerance.
pub const POM_TOL: f64 = 1e-10;

/// Uniform prior on `[lower, upper]`, held exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    lower: BigRational,
    upper: BigRational,
}

impl Prior {
    pub fn new(lower: BigRational, upper: BigRational) -> Result<Self> {
        if !is_positive(&(&upper - &lower)) {
            return Err(Error::InvalidPrior(format!(
                "empty support [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The completely positive range `[−1/(d²−1), 1]`, density `(d²−1)/d²`.
    pub fn full(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidPrior(format!("dimension d = {d} < 2")));
        }
        let d2 = (d * d) as i64;
        Self::new(ratio(-1, d2 - 1), BigRational::one())
    }

    /// `[0, 1]` with unit density.
    pub fn narrow() -> Self {
        Self {
            lower: BigRational::zero(),
            upper: BigRational::one(),
        }
    }

    /// Support `[lower, 1]` from a double (converted exactly).
    pub fn with_lower_f64(lower: f64) -> Result<Self> {
        let lo = BigRational::from_float(lower)
            .ok_or_else(|| Error::InvalidPrior(format!("lower bound {lower} not finite")))?;
        Self::new(lo, BigRational::one())
    }

    pub fn lower(&self) -> &BigRational {
        &self.lower
    }

    pub fn upper(&self) -> &BigRational {
        &self.upper
    }

    pub fn lower_f64(&self) -> f64 {
        to_f64(&self.lower)
    }

    pub fn upper_f64(&self) -> f64 {
        to_f64(&self.upper)
    }

    /// Constant density `z = 1/(upper − lower)`.
    pub fn density(&self) -> BigRational {
        (&self.upper - &self.lower).recip()
    }

    pub fn density_f64(&self) -> f64 {
        to_f64(&self.density())
    }

    /// Exact `z ∫ θⁿ dθ`.
    pub fn moment(&self, n: usize) -> BigRational {
        RatPoly::monomial(n).integrate(&self.lower, &self.upper) * self.density()
    }

    pub fn mean(&self) -> BigRational {
        (&self.lower + &self.upper) / BigRational::from_integer(BigInt::from(2))
    }

    /// `(upper − lower)²/12`, the cost of always guessing the prior mean.
    pub fn variance(&self) -> BigRational {
        let w = &self.upper - &self.lower;
        &w * &w / BigRational::from_integer(BigInt::from(12))
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.lower_f64() && theta <= self.upper_f64()
    }
}

/// The three moments defining the risk operator.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskMoments {
    pub w0: ComplexMatrix,
    pub w1: ComplexMatrix,
    pub w2: ComplexMatrix,
}

impl RiskMoments {
    pub fn dim(&self) -> usize {
        self.w0.rows()
    }

    /// `W(θ) = W⁽²⁾ − 2θW⁽¹⁾ + θ²W⁽⁰⁾`
    pub fn risk_at(&self, theta: f64) -> ComplexMatrix {
        &(&self.w2 - &self.w1.scale(2.0 * theta)) + &self.w0.scale(theta * theta)
    }

    pub fn with_w1(&self, w1: ComplexMatrix) -> Self {
        Self {
            w0: self.w0.clone(),
            w1,
            w2: self.w2.clone(),
        }
    }
}

/// One outcome of the estimating measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct PomElement {
    pub projector: ComplexMatrix,
    pub guess: f64,
    pub rank: usize,
}

/// Projective measurement with an estimate attached to each outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorPom {
    elements: Vec<PomElement>,
}

impl EstimatorPom {
    /// Validates completeness, hermiticity and idempotence.
    pub fn new(elements: Vec<PomElement>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPom("no elements".into()))?;
        let dim = first.projector.rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (i, e) in elements.iter().enumerate() {
            let p = &e.projector;
            if !p.is_square() || p.rows() != dim {
                return Err(Error::InvalidPom(format!("element {i} has wrong shape")));
            }
            if p.hermitian_residual() > POM_TOL {
                return Err(Error::InvalidPom(format!("element {i} not Hermitian")));
            }
            if p.matmul(p).max_abs_diff(p) > POM_TOL {
                return Err(Error::InvalidPom(format!("element {i} not idempotent")));
            }
            if !e.guess.is_finite() {
                return Err(Error::InvalidPom(format!("element {i} has non-finite guess")));
            }
            sum = &sum + p;
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > POM_TOL {
            return Err(Error::InvalidPom(format!(
                "projectors do not resolve the identity (defect {defect:.3e})"
            )));
        }
        Ok(Self { elements })
    }

    /// The trivial measurement: always answer `guess`.
    pub fn constant(dim: usize, guess: f64) -> Self {
        Self {
            elements: vec![PomElement {
                projector: ComplexMatrix::identity(dim),
                guess,
                rank: dim,
            }],
        }
    }

    pub fn elements(&self) -> &[PomElement] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].projector.rows()
    }

    pub fn guesses(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.guess).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.elements.iter().map(|e| e.rank).collect()
    }

    /// Same projectors, new estimates.
    pub fn with_guesses(&self, guesses: &[f64]) -> Result<Self> {
        if guesses.len() != self.elements.len() {
            return Err(Error::InvalidPom(format!(
                "{} guesses for {} elements",
                guesses.len(),
                self.elements.len()
            )));
        }
        Ok(Self {
            elements: self
                .elements
                .iter()
                .zip(guesses)
                .map(|(e, &g)| PomElement {
                    guess: g,
                    ..e.clone()
                })
                .collect(),
        })
    }
}

/// `W⁽ᵏ⁾ = Σⱼ Cⱼ · z∫θ^{k+j}`, with the scalar moments computed exactly.
pub fn risk_moments(family: &MatrixPolynomial, prior: &Prior) -> RiskMoments {
    let deg = family.degree();
    let moments: Vec<f64> = (0..=deg + 2).map(|n| to_f64(&prior.moment(n))).collect();
    let dim = family.dim();
    let w = |k: usize| {
        family
            .coeffs()
            .iter()
            .enumerate()
            .fold(ComplexMatrix::zeros(dim, dim), |acc, (j, c)| {
                &acc + &c.scale(moments[k + j])
            })
    };
    RiskMoments {
        w0: w(0),
        w1: w(1),
        w2: w(2),
    }
}

/// Solve `ΘW⁽⁰⁾ + W⁽⁰⁾Θ = 2W⁽¹⁾` in the eigenbasis of `W⁽⁰⁾`:
/// `Θ = Σᵢⱼ 2/(ωᵢ+ωⱼ) |ωᵢ⟩⟨ωᵢ|W⁽¹⁾|ωⱼ⟩⟨ωⱼ|`.
///
/// Pairs with `ωᵢ+ωⱼ ≤ 1e−12` are left at zero when the coupling
/// `⟨ωᵢ|W⁽¹⁾|ωⱼ⟩` also vanishes, and rejected otherwise.
pub fn minimizing_operator(m: &RiskMoments) -> Result<ComplexMatrix> {
    let eig = herm_eig(&m.w0)?;
    let v = &eig.eigenvectors;
    let w1_rot = v.adjoint().matmul(&m.w1).matmul(v);
    let n = eig.dim();
    let mut theta_rot = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let denom = eig.eigenvalues[i] + eig.eigenvalues[j];
            let coupling = w1_rot[(i, j)];
            if denom <= SINGULAR_PAIR_TOL {
                if coupling.norm() > SINGULAR_PAIR_TOL {
                    return Err(Error::SingularMomentPair {
                        i,
                        j,
                        denominator: denom,
                        coupling: coupling.norm(),
                    });
                }
                continue;
            }
            theta_rot[(i, j)] = coupling * (2.0 / denom);
        }
    }
    Ok(theta_rot.conjugate_by(v).hermitian_part())
}

/// Spectral measure of Θ with near-equal eigenvalues merged.
///
/// Eigenvalues within `merge_tol · max(1, max|λ|)` of the first member of
/// a group share one projector; the group's guess is their mean. Elements
/// are returned in descending order of guess.
pub fn optimal_pom(theta_op: &ComplexMatrix, merge_tol: f64) -> Result<EstimatorPom> {
    let eig = herm_eig(theta_op)?;
    let scale = eig
        .eigenvalues
        .iter()
        .fold(1.0f64, |acc, l| acc.max(l.abs()));
    let tol = merge_tol * scale;

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (lambda - eig.eigenvalues[g[0]]).abs() <= tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }

    let n = eig.dim();
    let mut elements: Vec<PomElement> = groups
        .into_iter()
        .rev()
        .map(|g| {
            let mut projector = ComplexMatrix::zeros(n, n);
            for &k in &g {
                projector = &projector + &ComplexMatrix::outer(&eig.eigenvectors.column(k));
            }
            let guess = g.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / g.len() as f64;
            PomElement {
                projector,
                guess,
                rank: g.len(),
            }
        })
        .collect();
    elements.sort_by(|a, b| b.guess.total_cmp(&a.guess));
    Ok(EstimatorPom { elements })
}

/// `Tr(W⁽²⁾ − ΘW⁽⁰⁾Θ)`
pub fn bayes_cost(m: &RiskMoments, theta_op: &ComplexMatrix) -> f64 {
    let gamma = &m.w2 - &theta_op.matmul(&m.w0).matmul(theta_op);
    gamma.trace().re
}

/// Cost of an arbitrary estimating POM: `Tr Σᵢ Πᵢ W(θᵢ)`.
pub fn pom_cost(m: &RiskMoments, pom: &EstimatorPom) -> f64 {
    pom.elements()
        .iter()
        .map(|e| e.projector.matmul(&m.risk_at(e.guess)).trace().re)
        .sum()
}

/// Worst-case margins of the Holevo optimality conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityReport {
    /// `‖Γ − Γ†‖_max` before symmetrization.
    pub gamma_hermitian_residual: f64,
    /// `maxᵢ ‖[W(θᵢ) − Γ]Πᵢ‖_max`.
    pub condition_i_residual: f64,
    /// Smallest eigenvalue of `W(θ) − Γ` over the grid.
    pub condition_ii_min_eigenvalue: f64,
    /// Where that minimum occurred.
    pub condition_ii_argmin: f64,
    pub condition_i_pass: bool,
    pub condition_ii_pass: bool,
}

impl OptimalityReport {
    pub fn passed(&self) -> bool {
        self.condition_i_pass && self.condition_ii_pass
    }
}

/// Check conditions (i) and (ii) for `pom` on a uniform grid of `grid` θ
/// values over the prior support.
pub fn verify_optimality(
    family: &MatrixPolynomial,
    prior: &Prior,
    pom: &EstimatorPom,
    grid: usize,
) -> Result<OptimalityReport> {
    if grid < 2 {
        return Err(Error::DomainError(format!("grid = {grid} < 2")));
    }
    if pom.dim() != family.dim() {
        return Err(Error::DimMismatch(pom.dim(), family.dim()));
    }
    let m = risk_moments(family, prior);
    let dim = family.dim();
    let raw_gamma = pom
        .elements()
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, e| {
            &acc + &e.projector.matmul(&m.risk_at(e.guess))
        });
    let gamma_hermitian_residual = raw_gamma.hermitian_residual();
    let gamma = raw_gamma.hermitian_part();

    let condition_i_residual = pom
        .elements()
        .iter()
        .map(|e| (&m.risk_at(e.guess) - &gamma).matmul(&e.projector).max_norm())
        .fold(0.0, f64::max);

    let (lo, hi) = (prior.lower_f64(), prior.upper_f64());
    let mut min_eig = f64::INFINITY;
    let mut argmin = lo;
    for k in 0..grid {
        let theta = lo + (hi - lo) * k as f64 / (grid - 1) as f64;
        let lam = herm_eig(&(&m.risk_at(theta) - &gamma).hermitian_part())?.eigenvalues[0];
        if lam < min_eig {
            min_eig = lam;
            argmin = theta;
        }
    }

    Ok(OptimalityReport {
        gamma_hermitian_residual,
        condition_i_residual,
        condition_ii_min_eigenvalue: min_eig,
        condition_ii_argmin: argmin,
        condition_i_pass: gamma_hermitian_residual <= OPTIMALITY_TOL
            && condition_i_residual <= OPTIMALITY_TOL,
        condition_ii_pass: min_eig >= -OPTIMALITY_TOL,
    })
}

/// Everything the numerical pipeline produces for one family.
#[derive(Debug, Clone)]
pub struct BayesSolution {
    pub moments: RiskMoments,
    pub theta_op: ComplexMatrix,
    pub pom: EstimatorPom,
    pub cost: f64,
}

/// Moments → Θ → POM → cost.
pub fn solve(family: &MatrixPolynomial, prior: &Prior) -> Result<BayesSolution> {
    let moments = risk_moments(family, prior);
    let theta_op = minimizing_operator(&moments)?;
    let pom = optimal_pom(&theta_op, DEFAULT_MERGE_TOL)?;
    let cost = bayes_cost(&moments, &theta_op);
    Ok(BayesSolution {
        moments,
        theta_op,
        pom,
        cost,
    })
}
