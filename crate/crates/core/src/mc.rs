//! Monte-Carlo replay of the estimation experiments, plus a Simpson-rule
//! oracle for the Bayes cost of an arbitrary measurement.
//!
//! Each trial owns a ChaCha stream selected by its index, so a report
//! depends only on `(seed, trials, inputs)` and not on how rayon splits
//! the work.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{MixtureStrategy, TwoQubitCase};
use crate::bayes::{EstimatorPom, Prior};
use crate::channel::{output_case_a, output_case_b, MatrixPolynomial};
use crate::error::{Error, Result};

/// Trials per batch. Batches are the unit of parallel work and are merged
/// in index order.
pub const BATCH_SIZE: u64 = 1 << 14;
/// Outcome probabilities may leave `[0, 1]` by this much before the POM is rejected.
pub const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimReport {
    pub trials: u64,
    pub empirical_cost: f64,
    pub std_error: f64,
    pub seed: u64,
}

pub fn sample_prior<R: Rng + ?Sized>(prior: &Prior, rng: &mut R) -> f64 {
    let (lo, hi) = (prior.lower_f64(), prior.upper_f64());
    lo + (hi - lo) * rng.gen::<f64>()
}

/// `P(m|θ) = C(N,m) kᵐ f₀^{N−m} f₁ᵐ`, a binomial law with success
/// probability `k f₁(θ)`; evaluated in the log domain.
pub fn outcome_dist_mixture(s: &MixtureStrategy, theta: f64) -> Vec<f64> {
    let n = s.copies();
    let k = s.weight_base() as f64;
    let p = (k * s.f1().eval_f64(theta)).clamp(0.0, 1.0);
    let q = s.f0().eval_f64(theta).clamp(0.0, 1.0);
    let (lp, lq) = (p.ln(), q.ln());
    let mut out = Vec::with_capacity(n + 1);
    let mut log_binom = 0.0;
    for m in 0..=n {
        if m > 0 {
            log_binom += ((n - m + 1) as f64).ln() - (m as f64).ln();
        }
        let a = if m == 0 { 0.0 } else { m as f64 * lp };
        let b = if m == n { 0.0 } else { (n - m) as f64 * lq };
        out.push((log_binom + a + b).exp());
    }
    out
}

/// Inverse-CDF draw, accumulating from the most likely outcome down.
fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    let total: f64 = probs.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for &i in &order {
        acc += probs[i];
        if u < acc {
            return i;
        }
    }
    order[0]
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (a, b) = (self.n as f64, other.n as f64);
        Self {
            n,
            mean: self.mean + delta * b / n as f64,
            m2: self.m2 + other.m2 + delta * delta * a * b / n as f64,
        }
    }
}

/// Run `trials` independent trials; `trial(rng)` returns one squared error.
fn run_trials<F>(trials: u64, seed: u64, trial: F) -> Result<SimReport>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    if trials < 2 {
        return Err(Error::DomainError(format!("trials = {trials} < 2")));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let batches = trials.div_ceil(BATCH_SIZE);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut acc = Moments::default();
            let end = ((b + 1) * BATCH_SIZE).min(trials);
            for t in b * BATCH_SIZE..end {
                let mut rng = base.clone();
                rng.set_stream(t);
                acc.push(trial(&mut rng)?);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = total.m2 / (total.n - 1) as f64;
    Ok(SimReport {
        trials,
        empirical_cost: total.mean,
        std_error: (var / total.n as f64).sqrt(),
        seed,
    })
}

/// Replay a commuting multi-copy strategy; `guesses[m]` answers outcome `m`.
pub fn simulate_mixture(
    s: &MixtureStrategy,
    guesses: &[f64],
    prior: &Prior,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    if guesses.len() != s.copies() + 1 {
        return Err(Error::InvalidStrategy(format!(
            "{} guesses for {} outcomes",
            guesses.len(),
            s.copies() + 1
        )));
    }
    run_trials(trials, seed, |rng| {
        let theta = sample_prior(prior, rng);
        let m = sample_index(&outcome_dist_mixture(s, theta), rng);
        let e = guesses[m] - theta;
        Ok(e * e)
    })
}

/// `table[j][i] = Re Tr[Πⱼ Cᵢ]`, so `Tr[Πⱼ Ψ(θ)] = Σᵢ table[j][i] θⁱ`.
fn outcome_polys(family: &MatrixPolynomial, pom: &EstimatorPom) -> Vec<Vec<f64>> {
    pom.elements()
        .iter()
        .map(|e| {
            family
                .coeffs()
                .iter()
                .map(|c| e.projector.matmul(c).trace().re)
                .collect()
        })
        .collect()
}

/// Replay a single-copy measurement on an arbitrary output family.
pub fn simulate_family(
    family: &MatrixPolynomial,
    pom: &EstimatorPom,
    prior: &Prior,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    if pom.dim() != family.dim() {
        return Err(Error::DimMismatch(pom.dim(), family.dim()));
    }
    let table = outcome_polys(family, pom);
    let guesses = pom.guesses();
    run_trials(trials, seed, |rng| {
        let theta = sample_prior(prior, rng);
        let mut probs = Vec::with_capacity(table.len());
        for row in &table {
            let p = row.iter().rev().fold(0.0, |acc, c| acc * theta + c);
            if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) {
                return Err(Error::InvalidPom(format!(
                    "outcome probability {p:.3e} at θ = {theta}"
                )));
            }
            probs.push(p.clamp(0.0, 1.0));
        }
        let j = sample_index(&probs, rng);
        let e = guesses[j] - theta;
        Ok(e * e)
    })
}

pub fn simulate_two_qubit(
    case: TwoQubitCase,
    x: f64,
    pom: &EstimatorPom,
    prior: &Prior,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    let family = match case {
        TwoQubitCase::A => output_case_a(x)?,
        TwoQubitCase::B => output_case_b(x)?,
    };
    simulate_family(&family, pom, prior, trials, seed)
}

/// Composite Simpson rule for `∫ z Σⱼ (guessⱼ − θ)² Tr[Πⱼ Ψ(θ)] dθ`,
/// evaluating the output matrix at every node.
pub fn grid_oracle(
    family: &MatrixPolynomial,
    pom: &EstimatorPom,
    prior: &Prior,
    gridpts: usize,
) -> Result<f64> {
    if gridpts < 3 || gridpts.is_multiple_of(2) {
        return Err(Error::DomainError(format!(
            "Simpson grid needs an odd number ≥ 3 of points, got {gridpts}"
        )));
    }
    if pom.dim() != family.dim() {
        return Err(Error::DimMismatch(pom.dim(), family.dim()));
    }
    let (lo, hi) = (prior.lower_f64(), prior.upper_f64());
    let h = (hi - lo) / (gridpts - 1) as f64;
    let integrand = |theta: f64| {
        let out = family.evaluate(theta);
        pom.elements()
            .iter()
            .map(|e| {
                let err = e.guess - theta;
                err * err * e.projector.matmul(&out).trace().re
            })
            .sum::<f64>()
    };
    let sum: f64 = (0..gridpts)
        .map(|i| {
            let w = if i == 0 || i == gridpts - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * integrand(lo + h * i as f64)
        })
        .sum();
    Ok(sum * h / 3.0 * prior.density_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{case_a, cost_ml, cost_series, ml_guesses, mixture_moments};
    use crate::bayes::{solve, PomElement};
    use crate::channel::MixtureKind;
    use crate::linalg::{herm_eig, ComplexMatrix};
    use crate::poly::to_f64;
    use num_complex::Complex64;
    use num_traits::ToPrimitive;

    fn full() -> Prior {
        Prior::full(2).unwrap()
    }

    fn optimal_pom(case: TwoQubitCase, x: f64) -> EstimatorPom {
        let fam = match case {
            TwoQubitCase::A => output_case_a(x),
            TwoQubitCase::B => output_case_b(x),
        };
        solve(&fam.unwrap(), &full()).unwrap().pom
    }

    fn within_sigma(r: &SimReport, target: f64, k: f64) -> bool {
        (r.empirical_cost - target).abs() <= k * r.std_error
    }

    #[test]
    fn prior_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = full();
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_prior(&p, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 1.0 / 3.0).abs() < 0.002);
        assert!(xs.iter().all(|&t| (-1.0 / 3.0..=1.0).contains(&t)));

        let n = Prior::narrow();
        let mean: f64 = (0..100_000).map(|_| sample_prior(&n, &mut rng)).sum::<f64>() / 1e5;
        assert!((mean - 0.5).abs() < 0.005);
    }

    #[test]
    fn outcome_dist_examples() {
        let s = MixtureStrategy::new(MixtureKind::EntOne, 2, 1).unwrap();
        assert_eq!(outcome_dist_mixture(&s, 1.0), vec![1.0, 0.0]);
        let p = outcome_dist_mixture(&s, 0.0);
        assert!((p[0] - 0.25).abs() < 1e-15 && (p[1] - 0.75).abs() < 1e-15);

        let s = MixtureStrategy::new(MixtureKind::EntBoth, 2, 2).unwrap();
        for theta in [-1.0 / 3.0, 0.1, 0.9] {
            let p = outcome_dist_mixture(&s, theta);
            assert_eq!(p.len(), 3);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn outcome_dist_large_n_is_normalized() {
        let s = MixtureStrategy::new(MixtureKind::Sep, 3, 100).unwrap();
        for theta in [-0.125, 0.0, 0.5, 0.999, 1.0] {
            let p = outcome_dist_mixture(&s, theta);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn marginal_outcome_law_matches_exact_moments() {
        let p = full();
        for kind in [MixtureKind::EntOne, MixtureKind::EntBoth, MixtureKind::Sep] {
            let s = MixtureStrategy::new(kind, 2, 2).unwrap();
            let n = 4001;
            let h = (p.upper_f64() - p.lower_f64()) / (n - 1) as f64;
            let mut marg = vec![0.0; s.copies() + 1];
            for i in 0..n {
                let w = if i == 0 || i == n - 1 { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                let theta = p.lower_f64() + h * i as f64;
                for (acc, q) in marg.iter_mut().zip(outcome_dist_mixture(&s, theta)) {
                    *acc += w * q;
                }
            }
            for (m, (acc, w)) in marg.iter().zip(s.weights()).enumerate() {
                let got = acc * h / 3.0 * p.density_f64();
                let want = to_f64(&mixture_moments(&s, m, 0, &p).unwrap()) * w.to_f64().unwrap();
                assert!((got - want).abs() < 1e-9, "{kind:?} m={m}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn simulation_is_deterministic_across_thread_counts() {
        let s = MixtureStrategy::new(MixtureKind::EntOne, 2, 3).unwrap();
        let g = cost_series(&s, &full()).guesses;
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_mixture(&s, &g, &full(), 100_003, 11).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(3));
        assert_ne!(one, simulate_mixture(&s, &g, &full(), 100_003, 12).unwrap());
    }

    #[test]
    fn mixture_hits_optimal_cost() {
        let s = MixtureStrategy::new(MixtureKind::EntOne, 2, 1).unwrap();
        let g = cost_series(&s, &full()).guesses;
        let r = simulate_mixture(&s, &g, &full(), 1_000_000, 42).unwrap();
        assert!(within_sigma(&r, 8.0 / 81.0, 4.0), "{r:?}");
    }

    #[test]
    fn ml_guesses_hit_exact_ml_cost() {
        let s = MixtureStrategy::new(MixtureKind::Sep, 2, 1).unwrap();
        let g: Vec<f64> = ml_guesses(2, 2).iter().map(to_f64).collect();
        let r = simulate_mixture(&s, &g, &full(), 1_000_000, 42).unwrap();
        assert!(within_sigma(&r, cost_ml(1, 2).unwrap().exact, 4.0), "{r:?}");
    }

    #[test]
    fn constant_guess_gives_prior_variance() {
        let s = MixtureStrategy::new(MixtureKind::Sep, 2, 1).unwrap();
        let r = simulate_mixture(&s, &[1.0 / 3.0; 3], &full(), 1_000_000, 5).unwrap();
        assert!(within_sigma(&r, 4.0 / 27.0, 4.0), "{r:?}");
        assert!(simulate_mixture(&s, &[0.0; 2], &full(), 100, 5).is_err());
    }

    #[test]
    fn two_qubit_simulations() {
        let p = full();
        let a = optimal_pom(TwoQubitCase::A, 0.5);
        let r = simulate_two_qubit(TwoQubitCase::A, 0.5, &a, &p, 1_000_000, 42).unwrap();
        assert!(within_sigma(&r, 8.0 / 81.0, 4.0), "{r:?}");

        // Exchange the two distinct estimates.
        let g = a.guesses();
        let swapped: Vec<f64> = g
            .iter()
            .map(|&t| if (t - g[0]).abs() < 1e-12 { g[1] } else if (t - g[1]).abs() < 1e-12 { g[0] } else { t })
            .collect();
        let bad = a.with_guesses(&swapped).unwrap();
        let rb = simulate_two_qubit(TwoQubitCase::A, 0.5, &bad, &p, 1_000_000, 42).unwrap();
        let oracle = grid_oracle(&output_case_a(0.5).unwrap(), &bad, &p, 20001).unwrap();
        assert!(within_sigma(&rb, oracle, 4.0));
        assert!(rb.empirical_cost - 8.0 / 81.0 >= 10.0 * rb.std_error);

        let b = optimal_pom(TwoQubitCase::B, 0.0);
        let r = simulate_two_qubit(TwoQubitCase::B, 0.0, &b, &p, 1_000_000, 42).unwrap();
        assert!(within_sigma(&r, 184.0 / 1755.0, 4.0), "{r:?}");
    }

    #[test]
    fn rejects_pom_with_wrong_dimension() {
        let pom = EstimatorPom::constant(2, 0.0);
        assert!(matches!(
            simulate_two_qubit(TwoQubitCase::A, 0.5, &pom, &full(), 10, 0),
            Err(Error::DimMismatch(2, 4))
        ));
    }

    #[test]
    fn oracle_examples() {
        let p = full();
        let fam = output_case_a(0.5).unwrap();
        let c = grid_oracle(&fam, &optimal_pom(TwoQubitCase::A, 0.5), &p, 20001).unwrap();
        assert!((c - 8.0 / 81.0).abs() < 1e-8);

        let flat = grid_oracle(&fam, &EstimatorPom::constant(4, 1.0 / 3.0), &p, 20001).unwrap();
        assert!((flat - 4.0 / 27.0).abs() < 1e-8);

        let fb = output_case_b(0.5).unwrap();
        let cb = grid_oracle(&fb, &optimal_pom(TwoQubitCase::B, 0.5), &p, 20001).unwrap();
        assert!((cb - crate::analytic::case_b(0.5).unwrap().cost).abs() < 1e-8);

        assert!(grid_oracle(&fam, &EstimatorPom::constant(4, 0.0), &p, 4).is_err());
        assert!(grid_oracle(&fam, &EstimatorPom::constant(4, 0.0), &p, 1).is_err());
    }

    #[test]
    fn oracle_agrees_with_closed_form_on_grid() {
        for i in 1..10 {
            let x = i as f64 / 10.0;
            let c = grid_oracle(&output_case_a(x).unwrap(), &optimal_pom(TwoQubitCase::A, x), &full(), 2001).unwrap();
            assert!((c - case_a(x).unwrap().cost).abs() < 1e-10);
        }
    }

    /// Rank-one projectors onto the eigenbasis of a random Hermitian matrix.
    fn random_pom(rng: &mut ChaCha8Rng, prior: &Prior) -> EstimatorPom {
        let h = ComplexMatrix::from_fn(4, 4, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .hermitian_part();
        let eig = herm_eig(&h).unwrap();
        let elements = (0..4)
            .map(|k| PomElement {
                projector: ComplexMatrix::outer(&eig.eigenvectors.column(k)),
                guess: sample_prior(prior, rng),
                rank: 1,
            })
            .collect();
        EstimatorPom::new(elements).unwrap()
    }

    #[test]
    fn random_poms_agree_with_oracle() {
        let p = full();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut hits = 0;
        for i in 0..30 {
            let case = if i % 2 == 0 { TwoQubitCase::A } else { TwoQubitCase::B };
            let x = rng.gen_range(0.0..=1.0);
            let pom = random_pom(&mut rng, &p);
            let fam = match case {
                TwoQubitCase::A => output_case_a(x).unwrap(),
                TwoQubitCase::B => output_case_b(x).unwrap(),
            };
            let oracle = grid_oracle(&fam, &pom, &p, 2001).unwrap();
            let r = simulate_two_qubit(case, x, &pom, &p, 200_000, i).unwrap();
            if within_sigma(&r, oracle, 4.0) {
                hits += 1;
            }
        }
        assert!(hits >= 28, "{hits}/30 within 4σ");
    }
}
