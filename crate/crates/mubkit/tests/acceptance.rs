//! End-to-end verification of every headline quantity the library is
//! supposed to reproduce, one test per claim. Each test prints its
//! pass/fail line with the measured numbers.

use mubkit::reproduce;

fn run(outcome: reproduce::CriterionOutcome) {
    println!(
        "[{}] {} - {}",
        if outcome.pass { "PASS" } else { "FAIL" },
        outcome.id,
        outcome.details
    );
    outcome.expect_pass();
}

#[test]
fn construction_validity_all_families() {
    run(reproduce::construction_validity());
}

#[test]
fn latin_square_worked_example_vectors() {
    run(reproduce::worked_example_match());
}

#[test]
fn full_prime_sets_are_two_designs() {
    run(reproduce::two_design_checks());
}

#[test]
fn entropic_lower_bounds_hold_on_random_states() {
    run(reproduce::entropic_bounds());
}

#[test]
fn square_dimension_minima_are_tight() {
    run(reproduce::tightness_square_dimensions());
}

#[test]
fn latin_square_minima_are_tight() {
    run(reproduce::tightness_latin_squares());
}

#[test]
fn three_mub_locking_is_one_bit() {
    run(reproduce::locking_three_mubs());
}

#[test]
fn nonuniform_prior_gap_bounds_hold() {
    run(reproduce::locking_nonuniform_priors());
}

#[test]
fn locking_is_constant_across_basis_counts() {
    run(reproduce::locking_latin_and_product());
}

#[test]
fn pauli_strings_permute_bases_and_give_complete_povms() {
    run(reproduce::pauli_covariance());
}

#[test]
fn gradients_and_invariances_are_clean() {
    run(reproduce::numerical_hygiene());
}
