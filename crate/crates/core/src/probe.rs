//! Pure probe states.
//!
//! Two-qubit vectors use the canonical ordering `(μ₁, μ₂, ν₁, ν₂)` =
//! `(|0 f₀⟩, |1 f₁⟩, |0 f₁⟩, |1 f₀⟩)`, which puts the entangled
//! subspace in the leading 2×2 block.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// For canonical index `k`, the computational index `2a + b` of `|a⟩⊗|f_b⟩`.
pub const CANONICAL_TO_COMPUTATIONAL: [usize; 4] = [0, 3, 1, 2];

/// Schmidt-decomposed two-qubit probe `√x|0 f₀⟩ + √(1−x)|1 f₁⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtProbe {
    x: f64,
}

impl SchmidtProbe {
    pub fn new(x: f64) -> Result<Self> {
        check_unit_interval(x)?;
        Ok(Self { x })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn state(&self) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        vec![
            Complex64::new(self.x.sqrt(), 0.0),
            Complex64::new((1.0 - self.x).sqrt(), 0.0),
            zero,
            zero,
        ]
    }
}

pub(crate) fn check_unit_interval(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::DomainError(format!("x = {x} outside [0, 1]")))
    }
}

/// Schmidt probe vector in the canonical two-qubit ordering.
pub fn schmidt_state(x: f64) -> Result<Vec<Complex64>> {
    Ok(SchmidtProbe::new(x)?.state())
}

/// `(1/√d) Σᵢ |i⟩⊗|i⟩` in the computational basis (index `i·d + j`).
pub fn max_entangled(d: usize) -> Result<Vec<Complex64>> {
    if d < 2 {
        return Err(Error::DomainError(format!("dimension d = {d} < 2")));
    }
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = amp;
    }
    Ok(v)
}

/// Reorder a canonical two-qubit vector into the computational basis.
pub fn canonical_to_computational(v: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(v.len(), 4);
    let mut out = vec![Complex64::new(0.0, 0.0); 4];
    for (k, &idx) in CANONICAL_TO_COMPUTATIONAL.iter().enumerate() {
        out[idx] = v[k];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Reduced state on the first factor of a `d_a × d_b` pure state.
    fn reduce_first(v: &[Complex64], d_a: usize, d_b: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(d_a, d_a, |i, k| {
            (0..d_b).map(|j| v[i * d_b + j] * v[k * d_b + j].conj()).sum()
        })
    }

    #[test]
    fn schmidt_examples() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(schmidt_state(1.0).unwrap(), vec![one, zero, zero, zero]);

        let h = schmidt_state(0.5).unwrap();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h[0].re - a).abs() < 1e-16 && (h[1].re - a).abs() < 1e-16);
        assert_eq!(&h[2..], &[zero, zero]);

        assert!((norm(&schmidt_state(0.3).unwrap()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn schmidt_domain() {
        assert!(schmidt_state(-0.01).is_err());
        assert!(schmidt_state(1.5).is_err());
        assert!(schmidt_state(f64::NAN).is_err());
    }

    #[test]
    fn schmidt_reduced_state_is_diag_x() {
        for &x in &[0.0, 0.1, 0.3, 0.5, 0.77, 1.0] {
            let v = canonical_to_computational(&schmidt_state(x).unwrap());
            let r = reduce_first(&v, 2, 2);
            assert!(r.max_abs_diff(&ComplexMatrix::diag_real(&[x, 1.0 - x])) < 1e-14);
        }
    }

    #[test]
    fn max_entangled_examples() {
        let d2 = max_entangled(2).unwrap();
        let s = canonical_to_computational(&schmidt_state(0.5).unwrap());
        for (a, b) in d2.iter().zip(&s) {
            assert!((a - b).norm() < 1e-15);
        }

        let d3 = max_entangled(3).unwrap();
        assert!((norm(&d3) - 1.0).abs() < 1e-15);
        let r = reduce_first(&d3, 3, 3);
        assert!(r.max_abs_diff(&ComplexMatrix::identity(3).scale(1.0 / 3.0)) < 1e-15);

        assert!(max_entangled(1).is_err());
    }

    #[test]
    fn max_entangled_fidelity_after_one_sided_channel() {
        // ⟨Ψ|(L_θ⊗I)(|Ψ⟩⟨Ψ|)|Ψ⟩ = θ + (1−θ)/d²
        for d in 2..=4usize {
            let psi = max_entangled(d).unwrap();
            let proj = ComplexMatrix::outer(&psi);
            let dd = (d * d) as f64;
            for &theta in &[-0.05, 0.0, 0.4, 1.0] {
                let reduced_b = ComplexMatrix::identity(d).scale(1.0 / d as f64);
                let mixed = crate::linalg::kron(&ComplexMatrix::identity(d).scale(1.0 / d as f64), &reduced_b);
                let out = &proj.scale(theta) + &mixed.scale(1.0 - theta);
                let f: Complex64 = (0..d * d)
                    .map(|i| (0..d * d).map(|j| psi[i].conj() * out[(i, j)] * psi[j]).sum::<Complex64>())
                    .sum();
                assert!((f.re - (theta + (1.0 - theta) / dd)).abs() < 1e-14);
            }
        }
    }
}
