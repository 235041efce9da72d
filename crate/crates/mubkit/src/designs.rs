//! Spherical 2-design checks: the second-moment operator of a vector
//! family against the normalized symmetric-subspace projector, and the
//! fourth-moment scalar that drives the full-set collision bound.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{sym_projector, StateVector, C_ZERO};
use crate::mubs::MubSet;

/// Max-modulus entry of
/// `(1/(m d)) sum_{t,k} (|b^t_k><b^t_k|)^(x)2  -  P_sym / (d (d+1) / 2)`.
///
/// Zero (up to rounding) exactly when the family of all `m d` vectors is
/// a spherical 2-design. Accumulation runs in a fixed (t, k) order so the
/// result is bit-reproducible.
pub fn two_design_defect(set: &MubSet) -> f64 {
    let d = set.dim();
    let dd = d * d;
    let count = (set.len() * d) as f64;
    let mut acc = DMatrix::from_element(dd, dd, C_ZERO);
    for basis in set.bases() {
        for k in 0..d {
            let b = basis.vector(k);
            let w = b.tensor(&b);
            let amps = w.amplitudes();
            for i in 0..dd {
                let wi = amps[i];
                for j in 0..dd {
                    acc[(i, j)] += wi * amps[j].conj();
                }
            }
        }
    }
    let scale = 1.0 / count;
    let target = sym_projector(d);
    let target_scale = 2.0 / (d * (d + 1)) as f64;
    let mut defect = 0.0f64;
    for i in 0..dd {
        for j in 0..dd {
            let diff = acc[(i, j)] * scale - target.entry(i, j) * target_scale;
            defect = defect.max(diff.norm());
        }
    }
    defect
}

/// `sum_{t,k} |<b^t_k|psi>|^4`. For a full set of `d + 1` mutually
/// unbiased bases this equals 2 for every pure state.
pub fn fourth_moment(set: &MubSet, psi: &StateVector) -> Result<f64> {
    if psi.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: psi.dim(),
        });
    }
    let amps = nalgebra::DVector::from_column_slice(psi.amplitudes());
    let mut total = 0.0;
    for basis in set.bases() {
        let overlaps = basis.matrix().ad_mul(&amps);
        for z in overlaps.iter() {
            let p = z.norm_sqr();
            total += p * p;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_state;
    use crate::mubs::{prime_mubs, qubit_triple, Basis, Family, MubSet};
    use crate::linalg::Operator;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn full_prime_sets_are_two_designs() {
        for d in [2usize, 3, 5] {
            let set = prime_mubs(d).unwrap();
            let defect = two_design_defect(&set);
            assert!(defect <= 1e-10, "d={d} defect={defect:.3e}");
        }
    }

    #[test]
    fn incomplete_set_is_not_a_two_design() {
        let set = qubit_triple(2).unwrap(); // 3 of 5 bases in d=4
        assert!(two_design_defect(&set) > 0.01);
    }

    #[test]
    fn fourth_moment_on_full_sets_is_two() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let set = prime_mubs(3).unwrap();
        for _ in 0..50 {
            let psi = random_state(3, &mut rng);
            let m = fourth_moment(&set, &psi).unwrap();
            assert!((m - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fourth_moment_hand_case_d2() {
        let set = prime_mubs(2).unwrap();
        let psi = crate::linalg::StateVector::basis_state(2, 0);
        // 1 from the computational basis, 1/2 each from the other two
        let m = fourth_moment(&set, &psi).unwrap();
        assert!((m - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fourth_moment_single_basis() {
        let comp = Basis::from_unitary(Operator::identity(4), "I").unwrap();
        let set = MubSet::new(vec![comp], Family::Custom, "single").unwrap();
        let psi = crate::linalg::StateVector::basis_state(4, 0);
        assert!((fourth_moment(&set, &psi).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn defect_invariant_under_relabeling() {
        let set = prime_mubs(3).unwrap();
        let base = two_design_defect(&set);
        // permute bases and vectors within a basis
        let reordered = MubSet::new_unchecked(
            vec![
                set.basis(2).clone(),
                set.basis(0).permuted(&[2, 0, 1]).unwrap(),
                set.basis(1).clone(),
                set.basis(3).clone(),
            ],
            Family::Custom,
            "relabeled",
        )
        .unwrap();
        let perm = two_design_defect(&reordered);
        assert!((base - perm).abs() <= 1e-12);
    }
}
