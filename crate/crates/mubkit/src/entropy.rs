//! Entropies of measurement outcome distributions and the closed-form
//! lower bounds they obey.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{adjoint_product, StateVector};
use crate::mubs::{Basis, MubSet};
use crate::tol::{PROB_ZERO, TOL_NORM};

/// Outcome probabilities of a projective measurement.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeDistribution {
    probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities
            .iter()
            .any(|&p| !p.is_finite() || p < -TOL_NORM || p > 1.0 + TOL_NORM)
        {
            return Err(Error::Malformed("probability out of [0, 1]".into()));
        }
        let sum: f64 = probabilities.iter().sum();
        let drift = (sum - 1.0).abs();
        if drift > TOL_NORM {
            return Err(Error::NormalizationDrift { drift });
        }
        Ok(Self { probabilities })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

/// Shannon entropy in bits of a probability slice, `0 log 0 = 0`,
/// probabilities below `PROB_ZERO` treated as exact zeros.
pub fn shannon_bits(probabilities: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in probabilities {
        if p > PROB_ZERO {
            h -= p * p.log2();
        }
    }
    h
}

/// Collision (Renyi-2) entropy in bits: `-log2 sum p^2`.
pub fn renyi2_bits(probabilities: &[f64]) -> f64 {
    let s: f64 = probabilities
        .iter()
        .map(|&p| if p > PROB_ZERO { p * p } else { 0.0 })
        .sum();
    -s.log2()
}

/// `p_k = |<b_k|psi>|^2`, renormalized when the drift is within
/// `TOL_NORM` and rejected otherwise.
pub fn measure_distribution(basis: &Basis, psi: &StateVector) -> Result<OutcomeDistribution> {
    if basis.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: psi.dim(),
        });
    }
    let amps = nalgebra::DVector::from_column_slice(psi.amplitudes());
    let overlaps = basis.matrix().ad_mul(&amps);
    let mut probs: Vec<f64> = overlaps.iter().map(|z| z.norm_sqr()).collect();
    let sum: f64 = probs.iter().sum();
    let drift = (sum - 1.0).abs();
    if drift > TOL_NORM {
        return Err(Error::NormalizationDrift { drift });
    }
    for p in &mut probs {
        *p /= sum;
    }
    OutcomeDistribution::new(probs)
}

/// Outcome distributions of one basis over many states at once, through
/// a single matrix product.
pub fn measure_distribution_batch(
    basis: &Basis,
    states: &[StateVector],
) -> Result<Vec<OutcomeDistribution>> {
    let d = basis.dim();
    if states.iter().any(|s| s.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: states.iter().map(|s| s.dim()).find(|&x| x != d).unwrap_or(d),
        });
    }
    let cols = nalgebra::DMatrix::from_fn(d, states.len(), |i, k| states[k].amplitudes()[i]);
    let overlaps = adjoint_product(basis.matrix(), &cols);
    let mut out = Vec::with_capacity(states.len());
    for k in 0..states.len() {
        let mut probs: Vec<f64> = (0..d).map(|i| overlaps[(i, k)].norm_sqr()).collect();
        let sum: f64 = probs.iter().sum();
        let drift = (sum - 1.0).abs();
        if drift > TOL_NORM {
            return Err(Error::NormalizationDrift { drift });
        }
        for p in &mut probs {
            *p /= sum;
        }
        out.push(OutcomeDistribution::new(probs)?);
    }
    Ok(out)
}

/// Shannon entropy in bits of measuring `psi` in `basis`.
pub fn shannon_entropy(basis: &Basis, psi: &StateVector) -> Result<f64> {
    Ok(shannon_bits(
        measure_distribution(basis, psi)?.probabilities(),
    ))
}

/// Collision entropy in bits of measuring `psi` in `basis`.
pub fn renyi2_entropy(basis: &Basis, psi: &StateVector) -> Result<f64> {
    Ok(renyi2_bits(
        measure_distribution(basis, psi)?.probabilities(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyKind {
    Shannon,
    Renyi2,
}

/// Mean entropy over the bases of the set.
pub fn avg_entropy(set: &MubSet, psi: &StateVector, kind: EntropyKind) -> Result<f64> {
    let mut total = 0.0;
    for basis in set.bases() {
        let dist = measure_distribution(basis, psi)?;
        total += match kind {
            EntropyKind::Shannon => shannon_bits(dist.probabilities()),
            EntropyKind::Renyi2 => renyi2_bits(dist.probabilities()),
        };
    }
    Ok(total / set.len() as f64)
}

/// The Maassen-Uffink lower bound on the mean of two measurement
/// entropies: `-log2 c` with `c` the largest cross-overlap modulus.
pub fn maassen_uffink_bound(b1: &Basis, b2: &Basis) -> Result<f64> {
    if b1.dim() != b2.dim() {
        return Err(Error::DimensionMismatch {
            expected: b1.dim(),
            found: b2.dim(),
        });
    }
    let overlaps = adjoint_product(b1.matrix(), b2.matrix());
    let c = overlaps.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(-c.log2())
}

/// The full-set bound `log2((d + 1) / 2)` valid for `d + 1` mutually
/// unbiased measurements.
pub fn full_set_bound(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { min: 2, found: d });
    }
    Ok(((d + 1) as f64 / 2.0).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_state, C64, C_ONE, C_ZERO};
    use crate::mubs::{latin_square_mubs, prime_mubs, product_mubs, qubit_triple};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    const LOG2_3: f64 = 1.584962500721156;

    #[test]
    fn deterministic_outcome() {
        let set = prime_mubs(3).unwrap();
        let psi = StateVector::basis_state(3, 0);
        let dist = measure_distribution(set.basis(0), &psi).unwrap();
        assert!((dist.probabilities()[0] - 1.0).abs() < 1e-15);
        assert!(dist.probabilities()[1].abs() < 1e-15);
        assert!(shannon_entropy(set.basis(0), &psi).unwrap().abs() < 1e-12);
    }

    #[test]
    fn unbiased_outcome_is_uniform() {
        let set = qubit_triple(1).unwrap();
        let psi = StateVector::basis_state(2, 0);
        let dist = measure_distribution(set.basis(1), &psi).unwrap();
        for &p in dist.probabilities() {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn latin_square_basis_on_corner_state() {
        let set = latin_square_mubs(3).unwrap();
        let psi = StateVector::basis_state(9, 0); // |1,1>
        for basis in set.bases() {
            let dist = measure_distribution(basis, &psi).unwrap();
            let mut third = 0;
            let mut zero = 0;
            for &p in dist.probabilities() {
                if (p - 1.0 / 3.0).abs() < 1e-12 {
                    third += 1;
                } else if p.abs() < 1e-12 {
                    zero += 1;
                }
            }
            assert_eq!(third, 3);
            assert_eq!(zero, 6);
            assert!((shannon_bits(dist.probabilities()) - LOG2_3).abs() < 1e-12);
        }
    }

    #[test]
    fn renyi_cases() {
        assert!((renyi2_bits(&[0.25; 4]) - 2.0).abs() < 1e-12);
        assert!(renyi2_bits(&[1.0, 0.0]).abs() < 1e-12);
        assert!((renyi2_bits(&[0.5, 0.5, 0.0, 0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn avg_entropy_qubit_triple_on_zero() {
        let set = qubit_triple(1).unwrap();
        let psi = StateVector::basis_state(2, 0);
        let avg = avg_entropy(&set, &psi, EntropyKind::Shannon).unwrap();
        assert!((avg - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn avg_entropy_product_on_entangled() {
        let set = product_mubs(&qubit_triple(1).unwrap()).unwrap();
        let h = 0.7071067811865475;
        let me = StateVector::new(vec![
            C64::new(h, 0.0),
            C_ZERO,
            C_ZERO,
            C64::new(h, 0.0),
        ])
        .unwrap();
        let avg = avg_entropy(&set, &me, EntropyKind::Shannon).unwrap();
        assert!((avg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maassen_uffink_cases() {
        let set = prime_mubs(5).unwrap();
        // identical bases: c = 1
        assert!(maassen_uffink_bound(set.basis(0), set.basis(0))
            .unwrap()
            .abs()
            < 1e-12);
        // MUB pair: (log2 d)/2
        let expect = (5.0f64).log2() / 2.0;
        assert!(
            (maassen_uffink_bound(set.basis(0), set.basis(1)).unwrap() - expect).abs() < 1e-12
        );
        // slightly rotated copy of the computational basis: bound near 0
        let eps = 1e-3f64;
        let rotated = Basis::new(
            vec![
                StateVector::new(vec![
                    C64::new(eps.cos(), 0.0),
                    C64::new(eps.sin(), 0.0),
                ])
                .unwrap(),
                StateVector::new(vec![
                    C64::new(-eps.sin(), 0.0),
                    C64::new(eps.cos(), 0.0),
                ])
                .unwrap(),
            ],
            "rotated",
        )
        .unwrap();
        let comp = qubit_triple(1).unwrap().basis(0).clone();
        let bound = maassen_uffink_bound(&comp, &rotated).unwrap();
        assert!(bound >= 0.0 && bound < 1e-5);
    }

    #[test]
    fn full_set_bound_values() {
        assert!((full_set_bound(3).unwrap() - 1.0).abs() < 1e-15);
        assert!((full_set_bound(7).unwrap() - 2.0).abs() < 1e-15);
        assert!(full_set_bound(1).is_err());
    }

    #[test]
    fn shannon_dominates_renyi_on_random_states() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let set = prime_mubs(5).unwrap();
        for _ in 0..50 {
            let psi = random_state(5, &mut rng);
            for basis in set.bases() {
                let d = measure_distribution(basis, &psi).unwrap();
                assert!(
                    shannon_bits(d.probabilities()) >= renyi2_bits(d.probabilities()) - 1e-12
                );
            }
        }
    }

    #[test]
    fn basis_permutation_leaves_entropy_unchanged() {
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        let set = prime_mubs(3).unwrap();
        let psi = random_state(3, &mut rng);
        let h = shannon_entropy(set.basis(1), &psi).unwrap();
        let permuted = set.basis(1).permuted(&[2, 0, 1]).unwrap();
        let hp = shannon_entropy(&permuted, &psi).unwrap();
        assert!((h - hp).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let set = prime_mubs(3).unwrap();
        let psi = StateVector::basis_state(2, 0);
        assert!(matches!(
            measure_distribution(set.basis(0), &psi),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distribution_validation() {
        assert!(OutcomeDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(OutcomeDistribution::new(vec![0.5, -0.5, 1.0]).is_err());
        assert!(OutcomeDistribution::new(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn batch_matches_single() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let set = latin_square_mubs(3).unwrap();
        let states: Vec<StateVector> = (0..7).map(|_| random_state(9, &mut rng)).collect();
        let batch = measure_distribution_batch(set.basis(2), &states).unwrap();
        for (psi, dist) in states.iter().zip(&batch) {
            let single = measure_distribution(set.basis(2), psi).unwrap();
            for (a, b) in single.probabilities().iter().zip(dist.probabilities()) {
                assert!((a - b).abs() < 1e-13);
            }
        }
        let _ = C_ONE;
    }
}
