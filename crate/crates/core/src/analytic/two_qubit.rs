//! Closed forms for the two-qubit Schmidt probe under the default qubit prior.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::probe::check_unit_interval;

/// Which qubits of the pair pass through the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TwoQubitCase {
    /// One qubit through the channel, the other kept.
    A,
    /// Both qubits through the channel.
    B,
}

/// Optimal strategy for case (a) at Schmidt weight `x`.
#[derive(Debug, Clone)]
pub struct CaseAResult {
    pub x: f64,
    pub theta_matrix: ComplexMatrix,
    /// `θ₁ = (3+r)/9, θ₂ = (3−r)/9, θ₃ = θ₄ = 1/9`.
    pub guesses: [f64; 4],
    /// Rotation angle γ of the `{μ₁, μ₂}` eigenbasis.
    pub gamma_angle: f64,
    /// `r = √(1 + 12x(1−x))`, between 1 and 2.
    pub r: f64,
    /// `(8/81)[1 + (x − ½)²]`.
    pub cost: f64,
}

impl CaseAResult {
    /// Eigenvectors `|θ₁⟩..|θ₄⟩` in the canonical basis, matching `guesses`.
    pub fn eigenvectors(&self) -> [Vec<Complex64>; 4] {
        eigenbasis(self.gamma_angle)
    }
}

/// Optimal strategy for case (b) at Schmidt weight `x`.
#[derive(Debug, Clone)]
pub struct CaseBResult {
    pub x: f64,
    pub theta_matrix: ComplexMatrix,
    /// `a = 7x(35 − 20x + 2x²)`
    pub a_coef: f64,
    /// `b = 7(1−x)(17 + 16x + 2x²)`, the mirror image of `a` under x ↔ 1−x.
    pub b_coef: f64,
    /// `c = 9[9 − 2x(1−x)]√(x(1−x))`
    pub c_coef: f64,
    /// `r = √((a−b)² + 4c²)`
    pub r: f64,
    pub theta_plus: f64,
    pub theta_minus: f64,
    pub gamma_angle: f64,
    pub cost: f64,
}

impl CaseBResult {
    /// `[θ₊, θ₋, 1/5, 1/5]`
    pub fn guesses(&self) -> [f64; 4] {
        [self.theta_plus, self.theta_minus, 0.2, 0.2]
    }

    pub fn eigenvectors(&self) -> [Vec<Complex64>; 4] {
        eigenbasis(self.gamma_angle)
    }
}

fn eigenbasis(gamma: f64) -> [Vec<Complex64>; 4] {
    let (s, c) = gamma.sin_cos();
    let re = |v: [f64; 4]| v.iter().map(|&a| Complex64::new(a, 0.0)).collect::<Vec<_>>();
    [
        re([c, s, 0.0, 0.0]),
        re([-s, c, 0.0, 0.0]),
        re([0.0, 0.0, 1.0, 0.0]),
        re([0.0, 0.0, 0.0, 1.0]),
    ]
}

fn psi_block(a: f64, c: f64, b: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[a, c], &[c, b]])
}

/// `(8/81)[1 + (x − ½)²]`
pub fn cost_case_a(x: f64) -> f64 {
    8.0 / 81.0 * (1.0 + (x - 0.5) * (x - 0.5))
}

/// `8[391 + 606x(1−x) − 10x²(1−x)²] / (2295[13 + 8x(1−x)])`
pub fn cost_case_b(x: f64) -> f64 {
    let p = x * (1.0 - x);
    8.0 * (391.0 + 606.0 * p - 10.0 * p * p) / (2295.0 * (13.0 + 8.0 * p))
}

pub fn case_a(x: f64) -> Result<CaseAResult> {
    check_unit_interval(x)?;
    let p = x * (1.0 - x);
    let s = p.sqrt();
    let theta_matrix = ComplexMatrix::direct_sum(
        &psi_block(1.0 + x, 2.0 * s, 2.0 - x).scale(2.0 / 9.0),
        &ComplexMatrix::identity(2).scale(1.0 / 9.0),
    );
    let r = (1.0 + 12.0 * p).sqrt();
    let cos_g = ((r - 1.0 + 2.0 * x) / (2.0 * r)).max(0.0).sqrt();
    let sin_g = ((r + 1.0 - 2.0 * x) / (2.0 * r)).max(0.0).sqrt();
    Ok(CaseAResult {
        x,
        theta_matrix,
        guesses: [(3.0 + r) / 9.0, (3.0 - r) / 9.0, 1.0 / 9.0, 1.0 / 9.0],
        gamma_angle: sin_g.atan2(cos_g),
        r,
        cost: cost_case_a(x),
    })
}

pub fn case_b(x: f64) -> Result<CaseBResult> {
    check_unit_interval(x)?;
    let p = x * (1.0 - x);
    let s = p.sqrt();
    let a = 7.0 * x * (35.0 - 20.0 * x + 2.0 * x * x);
    let b = 7.0 * (1.0 - x) * (17.0 + 16.0 * x + 2.0 * x * x);
    let c = 9.0 * (9.0 - 2.0 * p) * s;
    let denom = 17.0 * (13.0 + 8.0 * p);
    let theta_matrix = ComplexMatrix::direct_sum(
        &psi_block(a, c, b).scale(1.0 / denom),
        &ComplexMatrix::identity(2).scale(0.2),
    );
    let r = ((a - b) * (a - b) + 4.0 * c * c).sqrt();
    let centre = 119.0 * (1.0 + 2.0 * p);
    let scale = 34.0 * (13.0 + 8.0 * p);
    let (cos_g, sin_g) = if r > 0.0 {
        (
            ((r + a - b) / (2.0 * r)).max(0.0).sqrt(),
            ((r - a + b) / (2.0 * r)).max(0.0).sqrt(),
        )
    } else {
        (1.0, 0.0)
    };
    Ok(CaseBResult {
        x,
        theta_matrix,
        a_coef: a,
        b_coef: b,
        c_coef: c,
        r,
        theta_plus: (centre + r) / scale,
        theta_minus: (centre - r) / scale,
        gamma_angle: sin_g.atan2(cos_g),
        cost: cost_case_b(x),
    })
}

/// Intermediate quantities of the two-step diagonalization: rotate into
/// the eigenbasis of `W⁽⁰⁾`, solve there, rotate back.
#[derive(Debug, Clone)]
pub struct AppendixIntermediates {
    pub case: TwoQubitCase,
    pub x: f64,
    pub r0: f64,
    pub cos_g0: f64,
    pub sin_g0: f64,
    /// Eigenvalues of `W⁽⁰⁾` in the order `ω₁..ω₄` (not sorted).
    pub w0_eigs: [f64; 4],
    /// Θ expressed in the `W⁽⁰⁾` eigenbasis.
    pub theta_tilde: ComplexMatrix,
}

impl AppendixIntermediates {
    /// `U₀ = u₀ ⊕ I` with `u₀ = [[cos γ₀, −sin γ₀], [sin γ₀, cos γ₀]]`.
    pub fn rotation(&self) -> ComplexMatrix {
        ComplexMatrix::direct_sum(
            &psi_block_general(self.cos_g0, -self.sin_g0, self.sin_g0, self.cos_g0),
            &ComplexMatrix::identity(2),
        )
    }

    /// `U₀ Θ̃ U₀†`
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.theta_tilde.conjugate_by(&self.rotation())
    }
}

fn psi_block_general(a: f64, b: f64, c: f64, d: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[a, b], &[c, d]])
}

/// Rotation-based intermediates for `0 < x < 1`. At the endpoints the Θ̃
/// entries degenerate to 0/0; use [`case_a`]/[`case_b`] there.
pub fn appendix_intermediates(case: TwoQubitCase, x: f64) -> Result<AppendixIntermediates> {
    check_unit_interval(x)?;
    if x == 0.0 || x == 1.0 {
        return Err(Error::DegenerateRotation(x));
    }
    let p = x * (1.0 - x);
    let s = p.sqrt();
    let out = match case {
        TwoQubitCase::A => {
            let r0 = (1.0 - 3.0 * p).sqrt();
            let cos_g0 = ((r0 - 1.0 + 2.0 * x) / (2.0 * r0)).max(0.0).sqrt();
            let sin_g0 = ((r0 + 1.0 - 2.0 * x) / (2.0 * r0)).max(0.0).sqrt();
            let t11 = (4.0 * r0 * (1.0 + r0) + 3.0 * p) / (r0 * (1.0 + r0));
            let t22 = (4.0 * r0 * (1.0 - r0) - 3.0 * p) / (r0 * (1.0 - r0));
            let t12 = -3.0 * (1.0 - 2.0 * x) * s / r0;
            AppendixIntermediates {
                case,
                x,
                r0,
                cos_g0,
                sin_g0,
                w0_eigs: [(1.0 + r0) / 3.0, (1.0 - r0) / 3.0, (1.0 - x) / 3.0, x / 3.0],
                theta_tilde: ComplexMatrix::direct_sum(
                    &psi_block(t11, t12, t22).scale(1.0 / 9.0),
                    &ComplexMatrix::identity(2).scale(1.0 / 9.0),
                ),
            }
        }
        TwoQubitCase::B => {
            let r0 = (81.0 - 128.0 * p).sqrt();
            let cos_g0 = ((r0 - 9.0 * (1.0 - 2.0 * x)) / (2.0 * r0)).max(0.0).sqrt();
            let sin_g0 = ((r0 + 9.0 * (1.0 - 2.0 * x)) / (2.0 * r0)).max(0.0).sqrt();
            let t11 = 7.0 * (r0 + 9.0 - 16.0 * p) / (r0 * (17.0 + r0));
            let t22 = 7.0 * (r0 - 9.0 + 16.0 * p) / (r0 * (17.0 - r0));
            let t12 = 8.0 * (1.0 - 2.0 * x) * s / (17.0 * r0);
            AppendixIntermediates {
                case,
                x,
                r0,
                cos_g0,
                sin_g0,
                w0_eigs: [(17.0 + r0) / 54.0, (17.0 - r0) / 54.0, 5.0 / 27.0, 5.0 / 27.0],
                theta_tilde: ComplexMatrix::direct_sum(
                    &psi_block(t11, t12, t22),
                    &ComplexMatrix::identity(2).scale(0.2),
                ),
            }
        }
    };
    Ok(out)
}
