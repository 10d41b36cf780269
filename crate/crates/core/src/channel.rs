//! The depolarizing channel and the output-state families it produces.
//!
//! Two representations are exposed: concrete two-qubit output states as
//! matrix polynomials in θ (canonical `(μ₁, μ₂, ν₁, ν₂)` ordering, see
//! [`crate::probe`]), and, for the multi-pair analysis, the scalar
//! polynomials `f₀(θ), f₁(θ)` of the commuting two-outcome decomposition
//! `Ψ(θ) = f₀ a₀ + f₁ a₁`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, ComplexMatrix};
use crate::poly::{ratio, RatPoly};
use crate::probe::check_unit_interval;

/// Hermiticity / trace tolerance for states and polynomial coefficients.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue tolerated in a density matrix.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare(mat.rows(), mat.cols()));
        }
        let asym = mat.hermitian_residual();
        if asym > STATE_TOL {
            return Err(Error::NotHermitian(asym));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = herm_eig(&mat)?.eigenvalues[0];
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { mat })
    }

    pub fn pure(v: &[Complex64]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(v))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(d).scale(1.0 / d as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }
}

/// Channel parameter θ on a d-dimensional system, restricted to the
/// completely positive range `−1/(d²−1) ≤ θ ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParam {
    theta: f64,
    dim: usize,
}

impl ChannelParam {
    pub fn new(theta: f64, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DomainError(format!("dimension d = {dim} < 2")));
        }
        let lower = cp_lower_bound(dim);
        if !(lower..=1.0).contains(&theta) {
            return Err(Error::DomainError(format!(
                "theta = {theta} outside [{lower}, 1] for d = {dim}"
            )));
        }
        Ok(Self { theta, dim })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `−1/(d²−1)`
pub fn cp_lower_bound(d: usize) -> f64 {
    -1.0 / ((d * d - 1) as f64)
}

/// `θρ + (1−θ) I/d`
pub fn depolarize(rho: &DensityMatrix, p: ChannelParam) -> Result<DensityMatrix> {
    if rho.dim() != p.dim {
        return Err(Error::DimMismatch(rho.dim(), p.dim));
    }
    let d = p.dim as f64;
    let mixed = ComplexMatrix::identity(p.dim).scale((1.0 - p.theta) / d);
    Ok(DensityMatrix {
        mat: &rho.mat.scale(p.theta) + &mixed,
    })
}

/// Matrix-valued polynomial `Ψ(θ) = Σⱼ θʲ Cⱼ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    coeffs: Vec<ComplexMatrix>,
}

impl MatrixPolynomial {
    pub fn new(coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidPolynomial("no coefficients".into()))?;
        if !first.is_square() {
            return Err(Error::NotSquare(first.rows(), first.cols()));
        }
        let dim = first.rows();
        let mut total_trace = Complex64::new(0.0, 0.0);
        for (j, c) in coeffs.iter().enumerate() {
            if c.rows() != dim || c.cols() != dim {
                return Err(Error::DimMismatch(c.rows(), dim));
            }
            let asym = c.hermitian_residual();
            if asym > STATE_TOL {
                return Err(Error::InvalidPolynomial(format!(
                    "coefficient {j} not Hermitian ({asym:.3e})"
                )));
            }
            total_trace += c.trace();
        }
        let t0 = first.trace();
        if (t0 - 1.0).norm() > STATE_TOL || (total_trace - 1.0).norm() > STATE_TOL {
            return Err(Error::InvalidPolynomial(format!(
                "unit trace violated: tr C0 = {t0}, Σ tr Cj = {total_trace}"
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].rows()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    pub fn evaluate(&self, theta: f64) -> ComplexMatrix {
        let mut acc = self.coeffs[self.coeffs.len() - 1].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = &acc.scale(theta) + c;
        }
        acc
    }
}

/// Case (a): one qubit of the Schmidt pair goes through the channel.
///
/// `ψ₁(θ) = ½[[(1+θ)x, 2θ√(x(1−x))], [·, (1+θ)(1−x)]]`,
/// `φ₁(θ) = ((1−θ)/2)[(1−x)|ν₁⟩⟨ν₁| + x|ν₂⟩⟨ν₂|]`.
pub fn output_case_a(x: f64) -> Result<MatrixPolynomial> {
    check_unit_interval(x)?;
    let s = (x * (1.0 - x)).sqrt();
    let c0 = ComplexMatrix::diag_real(&[x / 2.0, (1.0 - x) / 2.0, (1.0 - x) / 2.0, x / 2.0]);
    let c1 = ComplexMatrix::direct_sum(
        &ComplexMatrix::from_real_rows(&[&[x / 2.0, s], &[s, (1.0 - x) / 2.0]]),
        &ComplexMatrix::diag_real(&[-(1.0 - x) / 2.0, -x / 2.0]),
    );
    MatrixPolynomial::new(vec![c0, c1])
}

/// Case (b): both qubits go through the channel.
///
/// `ψ₂(θ) = [[¼ − (½−x)θ + θ²/4, θ²√(x(1−x))], [·, ¼ + (½−x)θ + θ²/4]]`,
/// `φ₂(θ) = ((1−θ²)/4) I`.
pub fn output_case_b(x: f64) -> Result<MatrixPolynomial> {
    check_unit_interval(x)?;
    let s = (x * (1.0 - x)).sqrt();
    let c0 = ComplexMatrix::identity(4).scale(0.25);
    let c1 = ComplexMatrix::diag_real(&[x - 0.5, 0.5 - x, 0.0, 0.0]);
    let c2 = ComplexMatrix::direct_sum(
        &ComplexMatrix::from_real_rows(&[&[0.25, s], &[s, 0.25]]),
        &ComplexMatrix::diag_real(&[-0.25, -0.25]),
    );
    MatrixPolynomial::new(vec![c0, c1, c2])
}

/// Which multi-copy strategy a commuting family describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixtureKind {
    /// Maximally entangled pairs, one half through the channel.
    EntOne,
    /// Maximally entangled pairs, both halves through the channel.
    EntBoth,
    /// Separable: `2M` single systems through the channel.
    Sep,
}

/// Scalar description of a commuting output family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPolys {
    pub f0: RatPoly,
    pub f1: RatPoly,
    /// Channel uses per pair: 1 for pair strategies, 2 for separable.
    pub copy_multiplier: usize,
    /// Multiplicity base `k`: `Tr a₁ = k`, so `f₀ + k f₁ = 1`.
    pub weight_base: u64,
}

pub fn output_family_ddim(kind: MixtureKind, d: usize) -> Result<FamilyPolys> {
    if d < 2 {
        return Err(Error::DomainError(format!("dimension d = {d} < 2")));
    }
    let di = d as i64;
    let d2 = di * di;
    let fam = match kind {
        // f₀ = θ + (1−θ)/d², f₁ = (1−θ)/d²
        MixtureKind::EntOne => FamilyPolys {
            f0: RatPoly::new(vec![ratio(1, d2), ratio(d2 - 1, d2)]),
            f1: RatPoly::new(vec![ratio(1, d2), ratio(-1, d2)]),
            copy_multiplier: 1,
            weight_base: (d2 - 1) as u64,
        },
        // f₀ = θ² + (1−θ²)/d², f₁ = (1−θ²)/d²
        MixtureKind::EntBoth => FamilyPolys {
            f0: RatPoly::new(vec![ratio(1, d2), ratio(0, 1), ratio(d2 - 1, d2)]),
            f1: RatPoly::new(vec![ratio(1, d2), ratio(0, 1), ratio(-1, d2)]),
            copy_multiplier: 1,
            weight_base: (d2 - 1) as u64,
        },
        // f₀ = θ + (1−θ)/d, f₁ = (1−θ)/d
        MixtureKind::Sep => FamilyPolys {
            f0: RatPoly::new(vec![ratio(1, di), ratio(di - 1, di)]),
            f1: RatPoly::new(vec![ratio(1, di), ratio(-1, di)]),
            copy_multiplier: 2,
            weight_base: (di - 1) as u64,
        },
    };
    Ok(fam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;
    use crate::poly::to_f64;
    use crate::probe::{canonical_to_computational, schmidt_state, CANONICAL_TO_COMPUTATIONAL};

    /// Partial trace over the first qubit of a 4×4 computational-basis matrix.
    fn trace_first(m: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |b, bb| m[(b, bb)] + m[(2 + b, 2 + bb)])
    }

    fn trace_second(m: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |a, aa| m[(2 * a, 2 * aa)] + m[(2 * a + 1, 2 * aa + 1)])
    }

    fn to_canonical(m: &ComplexMatrix) -> ComplexMatrix {
        let p = CANONICAL_TO_COMPUTATIONAL;
        ComplexMatrix::from_fn(4, 4, |i, j| m[(p[i], p[j])])
    }

    /// (L_θ⊗I)ρ built from the channel definition, independent of the printed blocks.
    fn one_sided(rho: &ComplexMatrix, theta: f64) -> ComplexMatrix {
        let half_id = ComplexMatrix::identity(2).scale(0.5);
        &rho.scale(theta) + &kron(&half_id, &trace_first(rho)).scale(1.0 - theta)
    }

    fn two_sided(rho: &ComplexMatrix, theta: f64) -> ComplexMatrix {
        let half_id = ComplexMatrix::identity(2).scale(0.5);
        let first = &rho.scale(theta) + &kron(&half_id, &trace_first(rho)).scale(1.0 - theta);
        &first.scale(theta) + &kron(&trace_second(&first), &half_id).scale(1.0 - theta)
    }

    fn probe_projector(x: f64) -> ComplexMatrix {
        ComplexMatrix::outer(&canonical_to_computational(&schmidt_state(x).unwrap()))
    }

    #[test]
    fn depolarize_examples() {
        let rho = DensityMatrix::new(ComplexMatrix::diag_real(&[1.0, 0.0])).unwrap();
        let id = depolarize(&rho, ChannelParam::new(1.0, 2).unwrap()).unwrap();
        assert_eq!(id.matrix(), rho.matrix());

        let full = depolarize(&rho, ChannelParam::new(0.0, 2).unwrap()).unwrap();
        assert!(full.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-16);

        let neg = depolarize(&rho, ChannelParam::new(-1.0 / 3.0, 2).unwrap()).unwrap();
        let want = ComplexMatrix::diag_real(&[1.0 / 3.0, 2.0 / 3.0]);
        assert!(neg.matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn depolarize_errors() {
        let rho = DensityMatrix::maximally_mixed(3);
        let p = ChannelParam::new(0.5, 2).unwrap();
        assert_eq!(depolarize(&rho, p), Err(Error::DimMismatch(3, 2)));
        assert!(ChannelParam::new(-0.34, 2).is_err());
        assert!(ChannelParam::new(-0.13, 3).is_err());
        assert!(ChannelParam::new(-0.125, 3).is_ok());
        assert!(ChannelParam::new(1.01, 2).is_err());
    }

    #[test]
    fn depolarize_preserves_trace_and_hermiticity() {
        let v = [
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.48),
            Complex64::new(0.64, 0.0),
        ];
        let rho = DensityMatrix::pure(&v).unwrap();
        for &theta in &[-0.125, 0.0, 0.3, 1.0] {
            let out = depolarize(&rho, ChannelParam::new(theta, 3).unwrap()).unwrap();
            assert!((out.matrix().trace() - 1.0).norm() <= 1e-14);
            assert!(out.matrix().hermitian_residual() <= 1e-14);
        }
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::diag_real(&[0.5, 0.4])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diag_real(&[1.5, -0.5])).is_err());
        let nh = ComplexMatrix::from_real_rows(&[&[0.5, 0.1], &[0.0, 0.5]]);
        assert!(matches!(DensityMatrix::new(nh), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn case_a_matches_channel_definition() {
        for &x in &[0.0, 0.1, 0.3, 0.5, 0.9, 1.0] {
            let fam = output_case_a(x).unwrap();
            let rho = probe_projector(x);
            for &theta in &[-1.0 / 3.0, -0.1, 0.0, 0.5, 1.0] {
                let direct = to_canonical(&one_sided(&rho, theta));
                assert!(fam.evaluate(theta).max_abs_diff(&direct) < 1e-15, "x={x} θ={theta}");
            }
        }
    }

    #[test]
    fn case_b_matches_channel_definition() {
        for &x in &[0.0, 0.2, 0.5, 0.8, 1.0] {
            let fam = output_case_b(x).unwrap();
            let rho = probe_projector(x);
            for &theta in &[-1.0 / 3.0, -0.2, 0.0, 0.6, 1.0] {
                let direct = to_canonical(&two_sided(&rho, theta));
                assert!(fam.evaluate(theta).max_abs_diff(&direct) < 1e-15, "x={x} θ={theta}");
            }
        }
    }

    #[test]
    fn case_a_examples() {
        let fam = output_case_a(0.5).unwrap();
        let psi = ComplexMatrix::outer(&schmidt_state(0.5).unwrap());
        assert!(fam.evaluate(1.0).max_abs_diff(&psi) < 1e-15);
        assert!(fam.evaluate(0.0).max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) < 1e-16);

        let fam = output_case_a(0.3).unwrap();
        let m = fam.evaluate(0.5);
        assert!((m[(0, 0)].re - 0.45 / 2.0).abs() < 1e-15);
        assert!((m[(1, 1)].re - 1.05 / 2.0).abs() < 1e-15);
        assert!((m[(0, 1)].re - 0.5 * 0.21f64.sqrt()).abs() < 1e-15);
        assert!((m[(2, 2)].re - 0.25 * 0.7).abs() < 1e-15);
        assert!((m[(3, 3)].re - 0.25 * 0.3).abs() < 1e-15);

        assert!(output_case_a(1.2).is_err());
    }

    #[test]
    fn case_a_maximally_entangled_is_depolarized_projector() {
        let fam = output_case_a(0.5).unwrap();
        let psi = ComplexMatrix::outer(&schmidt_state(0.5).unwrap());
        for k in 0..=20 {
            let theta = -1.0 / 3.0 + k as f64 * (4.0 / 3.0) / 20.0;
            let want = &psi.scale(theta) + &ComplexMatrix::identity(4).scale((1.0 - theta) / 4.0);
            assert!(fam.evaluate(theta).max_abs_diff(&want) <= 1e-14);
        }
    }

    #[test]
    fn case_b_examples() {
        assert!(output_case_b(1.0)
            .unwrap()
            .evaluate(1.0)
            .max_abs_diff(&ComplexMatrix::diag_real(&[1.0, 0.0, 0.0, 0.0]))
            < 1e-16);
        assert!(output_case_b(0.0)
            .unwrap()
            .evaluate(1.0)
            .max_abs_diff(&ComplexMatrix::diag_real(&[0.0, 1.0, 0.0, 0.0]))
            < 1e-16);
        for &x in &[0.0, 0.37, 1.0] {
            let m = output_case_b(x).unwrap().evaluate(0.0);
            assert!(m.max_abs_diff(&ComplexMatrix::identity(4).scale(0.25)) < 1e-16);
        }
        let psi = ComplexMatrix::outer(&schmidt_state(0.5).unwrap());
        assert!(output_case_b(0.5).unwrap().evaluate(1.0).max_abs_diff(&psi) < 1e-15);
    }

    #[test]
    fn output_states_are_valid_over_the_support() {
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            for fam in [output_case_a(x).unwrap(), output_case_b(x).unwrap()] {
                for k in 0..=24 {
                    let theta = -1.0 / 3.0 + k as f64 / 18.0;
                    let m = fam.evaluate(theta);
                    assert!((m.trace() - 1.0).norm() <= 1e-12);
                    assert!(herm_eig(&m).unwrap().eigenvalues[0] >= -1e-10);
                }
            }
        }
    }

    #[test]
    fn matrix_polynomial_rejects_bad_traces() {
        let c0 = ComplexMatrix::identity(2).scale(0.5);
        let c1 = ComplexMatrix::diag_real(&[0.5, 0.0]);
        assert!(MatrixPolynomial::new(vec![c0.clone(), c1]).is_err());
        assert!(MatrixPolynomial::new(vec![]).is_err());
        let bad = ComplexMatrix::from_real_rows(&[&[0.5, 1.0], &[0.0, 0.5]]);
        assert!(MatrixPolynomial::new(vec![bad]).is_err());
        assert!(MatrixPolynomial::new(vec![c0]).is_ok());
    }

    #[test]
    fn family_examples() {
        let f = output_family_ddim(MixtureKind::EntOne, 2).unwrap();
        assert_eq!(f.f0, RatPoly::from_ratios(&[(1, 4), (3, 4)]));
        assert_eq!(f.f1, RatPoly::from_ratios(&[(1, 4), (-1, 4)]));
        assert_eq!((f.weight_base, f.copy_multiplier), (3, 1));

        let f = output_family_ddim(MixtureKind::EntBoth, 2).unwrap();
        assert_eq!(f.f0, RatPoly::from_ratios(&[(1, 4), (0, 1), (3, 4)]));
        assert_eq!(f.f1, RatPoly::from_ratios(&[(1, 4), (0, 1), (-1, 4)]));
        assert_eq!(f.weight_base, 3);

        let f = output_family_ddim(MixtureKind::Sep, 3).unwrap();
        assert_eq!(f.f0, RatPoly::from_ratios(&[(1, 3), (2, 3)]));
        assert_eq!(f.f1, RatPoly::from_ratios(&[(1, 3), (-1, 3)]));
        assert_eq!((f.weight_base, f.copy_multiplier), (2, 2));

        assert!(output_family_ddim(MixtureKind::Sep, 1).is_err());
    }

    #[test]
    fn family_partition_of_unity() {
        for d in 2..=12 {
            for kind in [MixtureKind::EntOne, MixtureKind::EntBoth, MixtureKind::Sep] {
                let f = output_family_ddim(kind, d).unwrap();
                let k = RatPoly::constant(ratio(f.weight_base as i64, 1));
                let sum = &f.f0 + &(&k * &f.f1);
                assert_eq!(sum, RatPoly::one(), "{kind:?} d={d}");
            }
        }
    }

    #[test]
    fn ent_one_family_matches_matrix_form_for_qubits() {
        // ⟨Ψ|Ψ₁(θ)|Ψ⟩ = f₀(θ) and every orthogonal direction carries f₁(θ).
        let f = output_family_ddim(MixtureKind::EntOne, 2).unwrap();
        let fam = output_case_a(0.5).unwrap();
        for &theta in &[-1.0 / 3.0, 0.0, 0.25, 1.0] {
            let eig = herm_eig(&fam.evaluate(theta)).unwrap();
            let f1 = f.f1.eval_f64(theta);
            let f0 = f.f0.eval_f64(theta);
            let mut want = vec![f1, f1, f1, f0];
            want.sort_by(f64::total_cmp);
            for (a, b) in eig.eigenvalues.iter().zip(&want) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        assert_eq!(to_f64(&f.f0.coeffs()[1]), 0.75);
    }
}
