//! Locking ensembles over MUB families: mutual information of explicit
//! measurements, exact accessible information in the covariant cases, a
//! heuristic measurement search, and the classical-information gap chain.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::shannon_bits;
use crate::error::{Error, Result};
use crate::linalg::{
    adjoint_product, random_unitary, DensityOperator, StateVector, C64, C_ZERO,
};
use crate::mubs::{pauli_string_operator, Basis, Family, MubSet, PauliString};
use crate::tol::{TOL_NORM, TOL_POVM};
use crate::uncertainty::{minimize_avg_entropy, MinimizationResult, DEFAULT_TOL};

/// A prior over (basis, element) labels: an `m x d` array of weights.
#[derive(Debug, Clone, Serialize)]
pub struct Prior {
    weights: Vec<Vec<f64>>,
}

impl Prior {
    pub fn new(weights: Vec<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() || weights[0].is_empty() {
            return Err(Error::InvalidPrior {
                reason: "empty weight array".into(),
            });
        }
        let cols = weights[0].len();
        if weights.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidPrior {
                reason: "ragged weight array".into(),
            });
        }
        if weights.iter().flatten().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::InvalidPrior {
                reason: "weights must be finite and nonnegative".into(),
            });
        }
        let sum: f64 = weights.iter().flatten().sum();
        if (sum - 1.0).abs() > TOL_NORM {
            return Err(Error::InvalidPrior {
                reason: format!("weights sum to {sum}, expected 1"),
            });
        }
        Ok(Self { weights })
    }

    /// `p_{t,k} = 1 / (m d)`.
    pub fn uniform(m: usize, d: usize) -> Self {
        let w = 1.0 / (m * d) as f64;
        Self {
            weights: vec![vec![w; d]; m],
        }
    }

    /// Per-basis weights `p_t`, each split uniformly over the d elements.
    pub fn from_basis_weights(basis_weights: &[f64], d: usize) -> Result<Self> {
        let weights = basis_weights
            .iter()
            .map(|&p| vec![p / d as f64; d])
            .collect();
        Self::new(weights)
    }

    pub fn num_bases(&self) -> usize {
        self.weights.len()
    }

    pub fn num_elements(&self) -> usize {
        self.weights[0].len()
    }

    pub fn weight(&self, t: usize, k: usize) -> f64 {
        self.weights[t][k]
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// `H(p_{t,k})` in bits.
    pub fn entropy_bits(&self) -> f64 {
        let flat: Vec<f64> = self.weights.iter().flatten().cloned().collect();
        shannon_bits(&flat)
    }

    /// Marginal `p_t = sum_k p_{t,k}`.
    pub fn basis_marginals(&self) -> Vec<f64> {
        self.weights.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn is_uniform(&self, tol: f64) -> bool {
        let target = 1.0 / (self.num_bases() * self.num_elements()) as f64;
        self.weights
            .iter()
            .flatten()
            .all(|&w| (w - target).abs() <= tol)
    }
}

/// The ensemble `{p_{t,k}, |b^t_k>}` a MUB set and a prior define.
#[derive(Debug, Clone)]
pub struct Ensemble {
    set: MubSet,
    prior: Prior,
}

impl Ensemble {
    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn num_bases(&self) -> usize {
        self.set.len()
    }

    pub fn set(&self) -> &MubSet {
        &self.set
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn state(&self, t: usize, k: usize) -> StateVector {
        self.set.basis(t).vector(k)
    }

    /// The average state `mu = sum p_{t,k} |b^t_k><b^t_k|`.
    pub fn average_state(&self) -> Result<DensityOperator> {
        let mut states = Vec::with_capacity(self.num_bases() * self.dim());
        let mut weights = Vec::with_capacity(states.capacity());
        for t in 0..self.num_bases() {
            for k in 0..self.dim() {
                states.push(self.state(t, k));
                weights.push(self.prior.weight(t, k));
            }
        }
        DensityOperator::mixture(&states, &weights)
    }

    pub fn to_json_string(&self) -> String {
        #[derive(Serialize)]
        struct Wire<'a> {
            dim: usize,
            family: &'a str,
            metadata: &'a str,
            prior: &'a [Vec<f64>],
            bases: Vec<Vec<Vec<[f64; 2]>>>,
        }
        crate::jsonio::to_json_string(&Wire {
            dim: self.dim(),
            family: self.set.family().as_str(),
            metadata: self.set.metadata(),
            prior: self.prior.weights(),
            bases: self
                .set
                .bases()
                .iter()
                .map(|b| (0..b.dim()).map(|k| b.vector(k).to_wire()).collect())
                .collect(),
        })
    }
}

/// Builds the ensemble, checking the prior shape against the set.
pub fn build_locking_ensemble(set: &MubSet, prior: Prior) -> Result<Ensemble> {
    if prior.num_bases() != set.len() || prior.num_elements() != set.dim() {
        return Err(Error::PriorShapeMismatch {
            rows: prior.num_bases(),
            cols: prior.num_elements(),
            m: set.len(),
            d: set.dim(),
        });
    }
    Ok(Ensemble {
        set: set.clone(),
        prior,
    })
}

/// A POVM with weighted rank-one elements `{alpha_i, |phi_i>}`.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<(f64, StateVector)>,
}

impl Povm {
    /// Validates completeness (`sum alpha |phi><phi| = I` within
    /// `TOL_POVM`) and the weight sum `sum alpha = d`.
    pub fn new(elements: Vec<(f64, StateVector)>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Malformed("POVM needs at least one element".into()));
        }
        if elements.iter().any(|(a, _)| !a.is_finite() || *a < 0.0) {
            return Err(Error::Malformed("POVM weights must be nonnegative".into()));
        }
        let d = elements[0].1.dim();
        if elements.iter().any(|(_, v)| v.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: elements.iter().map(|(_, v)| v.dim()).find(|&x| x != d).unwrap_or(d),
            });
        }
        let povm = Self { elements };
        let defect = povm.completeness_defect();
        if defect > TOL_POVM {
            return Err(Error::PovmIncomplete { defect });
        }
        let wsum = povm.weight_sum();
        if (wsum - d as f64).abs() > TOL_POVM * d as f64 {
            return Err(Error::PovmIncomplete {
                defect: (wsum - d as f64).abs(),
            });
        }
        Ok(povm)
    }

    /// The projective measurement a basis defines: weights 1.
    pub fn from_basis(basis: &Basis) -> Result<Self> {
        Self::new((0..basis.dim()).map(|k| (1.0, basis.vector(k))).collect())
    }

    pub fn dim(&self) -> usize {
        self.elements[0].1.dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[(f64, StateVector)] {
        &self.elements
    }

    pub fn weight_sum(&self) -> f64 {
        self.elements.iter().map(|(a, _)| a).sum()
    }

    /// `max | (sum_i alpha_i |phi_i><phi_i| - I)_{jk} |`.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim();
        let mut acc = DMatrix::from_element(d, d, C_ZERO);
        for (alpha, phi) in &self.elements {
            let v = phi.amplitudes();
            for i in 0..d {
                for j in 0..d {
                    acc[(i, j)] += v[i] * v[j].conj() * *alpha;
                }
            }
        }
        let mut defect = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((acc[(i, j)] - C64::new(expect, 0.0)).norm());
            }
        }
        defect
    }
}

/// Mutual information (bits) between the source label `(t, k)` and the
/// measurement outcome: `I = H(outcomes) + H(source) - H(joint)` with
/// `q(i; t,k) = p_{t,k} alpha_i |<phi_i|b^t_k>|^2`.
pub fn mutual_info_for_measurement(e: &Ensemble, m: &Povm) -> Result<f64> {
    if m.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: m.dim(),
        });
    }
    let d = e.dim();
    let n_src = e.num_bases() * d;
    // overlap matrix: POVM vectors as columns, source states as columns
    let src = source_matrix(e);
    let povm_mat = DMatrix::from_fn(d, m.len(), |i, j| m.elements()[j].1.amplitudes()[i]);
    let overlaps = adjoint_product(&povm_mat, &src);
    let mut joint = vec![0.0f64; m.len() * n_src];
    for (i, (alpha, _)) in m.elements().iter().enumerate() {
        for s in 0..n_src {
            let (t, k) = (s / d, s % d);
            joint[i * n_src + s] =
                e.prior().weight(t, k) * alpha * overlaps[(i, s)].norm_sqr();
        }
    }
    Ok(mutual_information_from_joint(&joint, m.len(), n_src))
}

fn source_matrix(e: &Ensemble) -> DMatrix<C64> {
    let d = e.dim();
    let n_src = e.num_bases() * d;
    DMatrix::from_fn(d, n_src, |i, s| {
        let (t, k) = (s / d, s % d);
        e.set().basis(t).matrix()[(i, k)]
    })
}

fn mutual_information_from_joint(joint: &[f64], n_out: usize, n_src: usize) -> f64 {
    let mut h_joint = 0.0;
    let mut out_marginals = vec![0.0f64; n_out];
    let mut src_marginals = vec![0.0f64; n_src];
    for i in 0..n_out {
        for s in 0..n_src {
            let q = joint[i * n_src + s];
            if q > 1e-300 {
                h_joint -= q * q.log2();
            }
            out_marginals[i] += q;
            src_marginals[s] += q;
        }
    }
    let h_out = shannon_bits(&out_marginals);
    let h_src = shannon_bits(&src_marginals);
    (h_out + h_src - h_joint).max(0.0)
}

/// The Bell basis of `n` qubits (`n` even): tensor products of the four
/// two-qubit Bell vectors, indexed by the binary expansion of `i`.
pub fn bell_basis(n: usize) -> Result<Basis> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::OddQubitCount { n });
    }
    let h = 1.0 / 2f64.sqrt();
    let cell = |entries: [(usize, f64); 2]| {
        let mut v = vec![C_ZERO; 4];
        for (idx, re) in entries {
            v[idx] = C64::new(re, 0.0);
        }
        StateVector::new(v).expect("Bell cells are normalized")
    };
    // Gamma_00, Gamma_01, Gamma_10, Gamma_11
    let two_qubit = [
        cell([(0, h), (3, h)]),
        cell([(0, h), (3, -h)]),
        cell([(1, h), (2, h)]),
        cell([(1, h), (2, -h)]),
    ];
    let dim = 1usize << n;
    let pairs = n / 2;
    let mut vectors = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut v = StateVector::new(vec![C64::new(1.0, 0.0)]).expect("scalar one");
        for pair in 0..pairs {
            // bits (i_{2j+1}, i_{2j+2}) reading the expansion MSB first
            let shift = n - 2 * (pair + 1);
            let idx = (i >> shift) & 0b11;
            v = v.tensor(&two_qubit[idx]);
        }
        vectors.push(v);
    }
    Basis::new(vectors, format!("bell_{n}"))
}

/// The covariant POVM `{(1/d) |phi_ab><phi_ab|}` with
/// `|phi_ab> = (X^{a_1} Z^{b_1} (x) ... (x) X^{a_N} Z^{b_N})^dagger |psi>`
/// over all exponent strings.
pub fn covariant_povm_from_state(psi: &StateVector, p: usize, n: usize) -> Result<Povm> {
    let d = p.pow(n as u32);
    if psi.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: psi.dim(),
        });
    }
    let alpha = 1.0 / d as f64;
    let mut elements = Vec::with_capacity(d * d);
    for ps in PauliString::enumerate(p, n)? {
        let op = pauli_string_operator(&ps).adjoint();
        elements.push((alpha, op.apply(psi)?));
    }
    Povm::new(elements)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessibleInfoKind {
    ExactCovariant,
    LowerBoundMeasurement,
    HeuristicSearch,
}

/// Accessible information of an ensemble, with the provenance of the
/// number: exact through a covariance argument, a lower bound from an
/// explicit measurement, or a heuristic search value.
#[derive(Debug, Clone, Serialize)]
pub struct AccessibleInfoResult {
    pub value: f64,
    pub kind: AccessibleInfoKind,
    pub certificate: String,
}

/// Exact accessible information of the uniform ensemble over a
/// Pauli-derived set: `log2 d - min_psi avg H`. The minimization result
/// must belong to the set.
pub fn iacc_covariant(set: &MubSet, min_result: &MinimizationResult) -> Result<AccessibleInfoResult> {
    if !set.pauli_covariant() {
        return Err(Error::FamilyMismatch {
            expected: "prime_pauli, qubit_triple, or a product over one of them".into(),
            found: set.family().as_str().into(),
        });
    }
    if min_result.best_state.dim() != set.dim() {
        return Err(Error::ResultMismatch {
            reason: format!(
                "state dimension {} vs set dimension {}",
                min_result.best_state.dim(),
                set.dim()
            ),
        });
    }
    let recomputed = crate::entropy::avg_entropy(
        set,
        &min_result.best_state,
        crate::entropy::EntropyKind::Shannon,
    )?;
    if (recomputed - min_result.best_value).abs() > 1e-6 {
        return Err(Error::ResultMismatch {
            reason: format!(
                "objective at the reported state is {recomputed}, result claims {}",
                min_result.best_value
            ),
        });
    }
    let d = set.dim();
    let value = (d as f64).log2() - min_result.best_value;
    let (p, n) = set.pauli_shape().expect("pauli_covariant implies a shape");
    let mut certificate = format!(
        "covariant POVM: {} weighted translates of the minimizing state under \
         X^a Z^b strings (p={p}, N={n}), each with weight 1/{d}",
        d * d
    );
    if let Ok(bell) = bell_basis(d.trailing_zeros() as usize) {
        let best_fid = (0..d)
            .map(|i| {
                bell.vector(i)
                    .inner(&min_result.best_state)
                    .map(|z| z.norm_sqr())
                    .unwrap_or(0.0)
            })
            .fold(0.0, f64::max);
        if best_fid >= 1.0 - 1e-6 {
            certificate.push_str(
                "; the minimizer is a Bell vector, so the Bell-basis measurement attains the optimum",
            );
        }
    }
    Ok(AccessibleInfoResult {
        value,
        kind: AccessibleInfoKind::ExactCovariant,
        certificate,
    })
}

/// Exact accessible information of the uniform ensemble over a
/// Latin-square set with at least two bases: `(log2 d) / 2`.
pub fn iacc_latin(set: &MubSet) -> Result<AccessibleInfoResult> {
    if set.family() != Family::LatinSquare {
        return Err(Error::FamilyMismatch {
            expected: "latin_square".into(),
            found: set.family().as_str().into(),
        });
    }
    if set.len() < 2 {
        return Err(Error::TooFewBases {
            min: 2,
            found: set.len(),
        });
    }
    let d = set.dim();
    let value = (d as f64).log2() / 2.0;
    Ok(AccessibleInfoResult {
        value,
        kind: AccessibleInfoKind::ExactCovariant,
        certificate: format!(
            "attained by the computational-basis measurement of C^{d}; matching upper bound \
             log2({d}) - min avg entropy with the minimum {value} at |1,1>"
        ),
    })
}

/// Packages the mutual information of an explicit measurement as a lower
/// bound on the accessible information.
pub fn iacc_from_measurement(e: &Ensemble, m: &Povm, label: &str) -> Result<AccessibleInfoResult> {
    let value = mutual_info_for_measurement(e, m)?;
    Ok(AccessibleInfoResult {
        value,
        kind: AccessibleInfoKind::LowerBoundMeasurement,
        certificate: format!("mutual information of the {label} measurement"),
    })
}

/// Gradient-free ascent over projective rank-one measurements:
/// random-unitary starts (seeded per restart) plus the ensemble's own
/// bases, local Givens rotations with a decaying step schedule.
pub fn iacc_lower_search(e: &Ensemble, restarts: usize, seed: u64) -> AccessibleInfoResult {
    let restarts = restarts.max(1);
    let d = e.dim();
    let src = source_matrix(e);
    let priors: Vec<f64> = (0..e.num_bases() * d)
        .map(|s| e.prior().weight(s / d, s % d))
        .collect();

    let results: Vec<f64> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let start = if i < e.num_bases() {
                e.set().basis(i).matrix().clone()
            } else {
                random_unitary(d, &mut rng).into_matrix()
            };
            climb(&start, &src, &priors, &mut rng)
        })
        .collect();

    let mut best = f64::NEG_INFINITY;
    let mut best_idx = 0;
    for (i, &v) in results.iter().enumerate() {
        if v > best {
            best = v;
            best_idx = i;
        }
    }
    AccessibleInfoResult {
        value: best,
        kind: AccessibleInfoKind::HeuristicSearch,
        certificate: format!(
            "best of {restarts} projective-measurement ascents (seed {seed}, best restart {best_idx})"
        ),
    }
}

fn mutual_info_from_overlaps(overlaps: &DMatrix<C64>, priors: &[f64]) -> f64 {
    let (n_out, n_src) = overlaps.shape();
    let mut joint = vec![0.0f64; n_out * n_src];
    for i in 0..n_out {
        for s in 0..n_src {
            joint[i * n_src + s] = priors[s] * overlaps[(i, s)].norm_sqr();
        }
    }
    mutual_information_from_joint(&joint, n_out, n_src)
}

fn climb(
    start: &DMatrix<C64>,
    src: &DMatrix<C64>,
    priors: &[f64],
    rng: &mut ChaCha12Rng,
) -> f64 {
    let d = start.nrows();
    // rows of `overlaps` track the current measurement vectors
    let mut overlaps = adjoint_product(start, src);
    let mut value = mutual_info_from_overlaps(&overlaps, priors);
    let mut step = 0.5f64;
    let proposals_per_sweep = (4 * d * d).max(48);
    for _sweep in 0..400 {
        if step < 1e-6 {
            break;
        }
        let mut improved = false;
        for _ in 0..proposals_per_sweep {
            let i = rng.gen_range(0..d);
            let mut j = rng.gen_range(0..d - 1);
            if j >= i {
                j += 1;
            }
            let theta: f64 = step * rng.sample::<f64, _>(StandardNormal);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let (c, s) = (theta.cos(), theta.sin());
            let e_phi = C64::new(phi.cos(), phi.sin());
            // G^dagger acting on rows i, j of the overlap matrix
            let gi_i = C64::new(c, 0.0);
            let gi_j = e_phi * s;
            let gj_i = -e_phi.conj() * s;
            let gj_j = C64::new(c, 0.0);
            let mut cand = overlaps.clone();
            for col in 0..cand.ncols() {
                let oi = overlaps[(i, col)];
                let oj = overlaps[(j, col)];
                cand[(i, col)] = gi_i * oi + gi_j * oj;
                cand[(j, col)] = gj_i * oi + gj_j * oj;
            }
            let cand_value = mutual_info_from_overlaps(&cand, priors);
            if cand_value > value {
                overlaps = cand;
                value = cand_value;
                improved = true;
            }
        }
        if !improved {
            step *= 0.7;
        }
    }
    value
}

/// The auditable gap chain for a qubit-triple ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub n: usize,
    /// `H(p_{t,k})`
    pub prior_entropy: f64,
    /// `H(p_t)`
    pub basis_marginal_entropy: f64,
    /// `S(nu)` for the state dephased in the measurement basis
    pub post_measurement_entropy: f64,
    /// mutual information of the measurement itself
    pub measurement_mutual_info: f64,
    /// `Delta = H(p) - I_acc - H(p_t)`, exact; only for the uniform prior
    pub delta_exact: Option<f64>,
    /// `H(p) - S(nu) + n/2 - H(p_t)`
    pub delta_upper_entropy_chain: f64,
    /// `H(p) - I(measurement) - H(p_t)`
    pub delta_upper_via_measurement: f64,
    /// `n / 2`
    pub final_bound: f64,
}

/// Evaluates the gap chain for an ensemble built on `qubit_triple(n)`,
/// measuring in the Bell basis unless another POVM is supplied. For the
/// uniform prior the exact accessible information enters the report; for
/// any other prior only upper bounds on the gap are reported.
pub fn locking_gap(e: &Ensemble, measurement: Option<&Povm>) -> Result<GapReport> {
    if e.set().family() != Family::QubitTriple {
        return Err(Error::FamilyMismatch {
            expected: "qubit_triple".into(),
            found: e.set().family().as_str().into(),
        });
    }
    let d = e.dim();
    let n = d.trailing_zeros() as usize;
    let default_povm;
    let povm = match measurement {
        Some(p) => p,
        None => {
            default_povm = Povm::from_basis(&bell_basis(n)?)?;
            &default_povm
        }
    };
    let prior_entropy = e.prior().entropy_bits();
    let basis_marginal_entropy = shannon_bits(&e.prior().basis_marginals());
    let mu = e.average_state()?;
    let nu_probs: Vec<f64> = povm
        .elements()
        .iter()
        .map(|(alpha, phi)| Ok(alpha * mu.expectation(phi)?))
        .collect::<Result<_>>()?;
    let post_measurement_entropy = shannon_bits(&nu_probs);
    let measurement_mutual_info = mutual_info_for_measurement(e, povm)?;
    let half_n = n as f64 / 2.0;
    let delta_exact = if e.prior().is_uniform(1e-12) {
        let min_result = minimize_avg_entropy(e.set(), 32, 0xB411, DEFAULT_TOL);
        let iacc = iacc_covariant(e.set(), &min_result)?;
        Some(prior_entropy - iacc.value - basis_marginal_entropy)
    } else {
        None
    };
    Ok(GapReport {
        n,
        prior_entropy,
        basis_marginal_entropy,
        post_measurement_entropy,
        measurement_mutual_info,
        delta_exact,
        delta_upper_entropy_chain: prior_entropy - post_measurement_entropy + half_n
            - basis_marginal_entropy,
        delta_upper_via_measurement: prior_entropy - measurement_mutual_info
            - basis_marginal_entropy,
        final_bound: half_n,
    })
}

/// Correlation after the basis announcement: `log2 d + log2 m` for the
/// uniform prior. For other priors the error carries `H(p_{t,k})`.
pub fn unlocked_info(e: &Ensemble) -> Result<f64> {
    if !e.prior().is_uniform(1e-12) {
        return Err(Error::NonUniformPrior {
            prior_entropy: e.prior().entropy_bits(),
        });
    }
    Ok((e.dim() as f64).log2() + (e.num_bases() as f64).log2())
}

/// Draws a random prior with `Exp(1)` weights, retrying until every basis
/// marginal is at most `max_marginal`.
pub fn random_prior_with_marginal_cap(
    m: usize,
    d: usize,
    max_marginal: f64,
    rng: &mut ChaCha12Rng,
) -> Prior {
    loop {
        let mut weights = vec![vec![0.0f64; d]; m];
        let mut total = 0.0;
        for row in &mut weights {
            for w in row.iter_mut() {
                let u: f64 = rng.gen_range(1e-12..1.0);
                *w = -u.ln();
                total += *w;
            }
        }
        for row in &mut weights {
            for w in row.iter_mut() {
                *w /= total;
            }
        }
        let prior = Prior::new(weights).expect("normalized by construction");
        if prior
            .basis_marginals()
            .iter()
            .all(|&p| p <= max_marginal)
        {
            return prior;
        }
    }
}
