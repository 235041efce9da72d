//! Constructions of mutually unbiased bases: the prime-dimension Pauli
//! family, the qubit triple, Latin-square bases, and product bases in
//! square dimensions, together with the certification and Pauli
//! permutation checks.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    adjoint_product, hermitian_eigen, phase_normalize_dvector, Operator, StateVector, C64, C_ONE,
    C_ZERO,
};
use crate::squares::{extra_squares, is_prime, mols_prime, LatinSquare};
use crate::tol::{TOL_MUB, TOL_NORM, TOL_PERM};

/// An ordered orthonormal basis of `C^d`, stored as the unitary whose
/// columns are the basis vectors.
#[derive(Debug, Clone)]
pub struct Basis {
    label: String,
    matrix: DMatrix<C64>,
}

impl Basis {
    /// Validates pairwise orthonormality within `TOL_NORM`.
    pub fn new(vectors: Vec<StateVector>, label: impl Into<String>) -> Result<Self> {
        let basis = Self::from_vectors_unchecked(vectors, label)?;
        let defect = basis.orthonormality_defect();
        if defect > TOL_NORM {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(basis)
    }

    /// Builds the basis from a unitary's columns, validating unitarity.
    pub fn from_unitary(op: Operator, label: impl Into<String>) -> Result<Self> {
        if op.dim_out() != op.dim_in() {
            return Err(Error::NotSquare {
                rows: op.dim_out(),
                cols: op.dim_in(),
            });
        }
        let basis = Self {
            label: label.into(),
            matrix: op.into_matrix(),
        };
        let defect = basis.orthonormality_defect();
        if defect > TOL_NORM {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(basis)
    }

    /// Structural construction without the orthonormality check; used when
    /// loading external data that a later `check_mub` call will certify.
    pub fn from_vectors_unchecked(
        vectors: Vec<StateVector>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::DimensionTooSmall { min: 1, found: 0 });
        }
        let d = vectors[0].dim();
        if vectors.len() != d || vectors.iter().any(|v| v.dim() != d) {
            return Err(Error::Malformed(format!(
                "basis needs exactly {d} vectors of dimension {d}"
            )));
        }
        let matrix = DMatrix::from_fn(d, d, |i, k| vectors[k].amplitudes()[i]);
        Ok(Self {
            label: label.into(),
            matrix,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The unitary whose k-th column is `|b_k>`.
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn as_operator(&self) -> Operator {
        Operator::from_matrix(self.matrix.clone()).expect("basis entries are finite")
    }

    pub fn vector(&self, k: usize) -> StateVector {
        let col: Vec<C64> = self.matrix.column(k).iter().cloned().collect();
        StateVector::new(col).expect("basis columns are normalized")
    }

    pub fn vectors(&self) -> Vec<StateVector> {
        (0..self.dim()).map(|k| self.vector(k)).collect()
    }

    /// `max |(B^dagger B - I)_{kl}|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = adjoint_product(&self.matrix, &self.matrix);
        let d = self.dim();
        let mut defect = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { C_ONE } else { C_ZERO };
                defect = defect.max((gram[(i, j)] - expect).norm());
            }
        }
        defect
    }

    /// Permutes the vector order; the label is kept.
    pub fn permuted(&self, order: &[usize]) -> Result<Basis> {
        let d = self.dim();
        if order.len() != d {
            return Err(Error::Malformed("permutation length mismatch".into()));
        }
        let matrix = DMatrix::from_fn(d, d, |i, k| self.matrix[(i, order[k])]);
        Ok(Basis {
            label: self.label.clone(),
            matrix,
        })
    }
}

/// Which construction a set of bases came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    PrimePauli,
    QubitTriple,
    LatinSquare,
    Product,
    Custom,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::PrimePauli => "prime_pauli",
            Family::QubitTriple => "qubit_triple",
            Family::LatinSquare => "latin_square",
            Family::Product => "product",
            Family::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "prime_pauli" => Ok(Family::PrimePauli),
            "qubit_triple" => Ok(Family::QubitTriple),
            "latin_square" => Ok(Family::LatinSquare),
            "product" => Ok(Family::Product),
            "custom" => Ok(Family::Custom),
            other => Err(Error::Malformed(format!("unknown family '{other}'"))),
        }
    }
}

/// A labeled family of pairwise mutually unbiased bases.
#[derive(Debug, Clone)]
pub struct MubSet {
    dim: usize,
    bases: Vec<Basis>,
    family: Family,
    metadata: String,
}

impl MubSet {
    /// Validates the mutual-unbiasedness invariant at `TOL_MUB`.
    pub fn new(bases: Vec<Basis>, family: Family, metadata: impl Into<String>) -> Result<Self> {
        let set = Self::new_unchecked(bases, family, metadata)?;
        let pairs: Vec<(usize, usize)> = (0..set.bases.len())
            .flat_map(|t1| ((t1 + 1)..set.bases.len()).map(move |t2| (t1, t2)))
            .collect();
        let deviations: Vec<(usize, usize, f64)> = pairs
            .par_iter()
            .map(|&(t1, t2)| (t1, t2, set.pair_deviation(t1, t2)))
            .collect();
        for (t1, t2, dev) in deviations {
            if dev > TOL_MUB {
                return Err(Error::NotUnbiased {
                    t1,
                    t2,
                    deviation: dev,
                });
            }
        }
        Ok(set)
    }

    /// Structural construction: consistent dimensions only. `check_mub`
    /// certifies (or rejects) sets built this way.
    pub fn new_unchecked(
        bases: Vec<Basis>,
        family: Family,
        metadata: impl Into<String>,
    ) -> Result<Self> {
        if bases.is_empty() {
            return Err(Error::TooFewBases { min: 1, found: 0 });
        }
        let dim = bases[0].dim();
        if let Some(b) = bases.iter().find(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: b.dim(),
            });
        }
        Ok(Self {
            dim,
            bases,
            family,
            metadata: metadata.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn basis(&self, t: usize) -> &Basis {
        &self.bases[t]
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn metadata(&self) -> &str {
        &self.metadata
    }

    pub fn metadata_field(&self, key: &str) -> Option<&str> {
        self.metadata.split(';').find_map(|kv| {
            let (k, v) = kv.split_once('=')?;
            (k == key).then_some(v)
        })
    }

    /// Whether the accessible-information covariance argument applies:
    /// the bases come from generalized Pauli matrices, directly or as a
    /// product construction over such a set.
    pub fn pauli_covariant(&self) -> bool {
        match self.family {
            Family::PrimePauli | Family::QubitTriple => true,
            Family::Product => matches!(
                self.metadata_field("base_family"),
                Some("prime_pauli") | Some("qubit_triple")
            ),
            _ => false,
        }
    }

    /// For Pauli-derived sets, the (p, N) with `dim = p^N` that the
    /// covariant POVM construction uses.
    pub fn pauli_shape(&self) -> Option<(usize, usize)> {
        match self.family {
            Family::PrimePauli => Some((self.dim, 1)),
            Family::QubitTriple => Some((2, self.dim.trailing_zeros() as usize)),
            Family::Product if self.pauli_covariant() => {
                let s = (self.dim as f64).sqrt().round() as usize;
                match self.metadata_field("base_family") {
                    Some("prime_pauli") => Some((s, 2)),
                    Some("qubit_triple") => Some((2, 2 * s.trailing_zeros() as usize)),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    /// Max deviation of `|<b^t1_k|b^t2_l>|^2` from `1/d` over all k, l.
    pub fn pair_deviation(&self, t1: usize, t2: usize) -> f64 {
        let overlap = adjoint_product(self.bases[t1].matrix(), self.bases[t2].matrix());
        let target = 1.0 / self.dim as f64;
        overlap
            .iter()
            .map(|z| (z.norm_sqr() - target).abs())
            .fold(0.0, f64::max)
    }

    /// The sub-family with the given basis indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<MubSet> {
        if indices.iter().any(|&t| t >= self.bases.len()) {
            return Err(Error::Malformed("subset index out of range".into()));
        }
        let bases = indices.iter().map(|&t| self.bases[t].clone()).collect();
        let idx_list: Vec<String> = indices.iter().map(|t| t.to_string()).collect();
        MubSet::new_unchecked(
            bases,
            self.family,
            format!("{};subset={}", self.metadata, idx_list.join(",")),
        )
    }

    pub fn to_json_string(&self) -> String {
        crate::jsonio::to_json_string(&self.to_wire())
    }

    fn to_wire(&self) -> MubSetWire {
        MubSetWire {
            dim: self.dim,
            family: self.family.as_str().to_string(),
            metadata: self.metadata.clone(),
            bases: self
                .bases
                .iter()
                .map(|b| (0..b.dim()).map(|k| b.vector(k).to_wire()).collect())
                .collect(),
        }
    }

    /// Parses the JSON wire form with structural validation only;
    /// run `check_mub` to certify the result.
    pub fn from_json_str(s: &str) -> Result<MubSet> {
        let wire: MubSetWire = serde_json::from_str(s)?;
        let family = Family::parse(&wire.family)?;
        if wire.bases.is_empty() {
            return Err(Error::TooFewBases { min: 1, found: 0 });
        }
        let mut bases = Vec::with_capacity(wire.bases.len());
        for (t, vecs) in wire.bases.iter().enumerate() {
            if vecs.len() != wire.dim {
                return Err(Error::Malformed(format!(
                    "basis {t} has {} vectors, expected {}",
                    vecs.len(),
                    wire.dim
                )));
            }
            let mut states = Vec::with_capacity(vecs.len());
            for amps in vecs {
                if amps.len() != wire.dim {
                    return Err(Error::Malformed(format!(
                        "vector length {} in basis {t}, expected {}",
                        amps.len(),
                        wire.dim
                    )));
                }
                if amps.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite {
                        context: format!("basis {t}"),
                    });
                }
                let v: Vec<C64> = amps.iter().map(|p| C64::new(p[0], p[1])).collect();
                let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-12 {
                    return Err(Error::Malformed(format!("zero vector in basis {t}")));
                }
                states.push(StateVector::normalized(v)?);
            }
            bases.push(Basis::from_vectors_unchecked(states, format!("B{}", t + 1))?);
        }
        MubSet::new_unchecked(bases, family, wire.metadata)
    }
}

#[derive(Serialize, Deserialize)]
struct MubSetWire {
    dim: usize,
    family: String,
    metadata: String,
    bases: Vec<Vec<Vec<[f64; 2]>>>,
}

/// Generalized shift: `X_d |k> = |k+1 mod d>`.
pub fn pauli_x(d: usize) -> Operator {
    assert!(d >= 2);
    Operator::from_fn(d, d, |i, j| if i == (j + 1) % d { C_ONE } else { C_ZERO })
}

/// Generalized clock with the 1-based label convention:
/// `Z_d = diag(omega^1, ..., omega^d)`, `omega = exp(2 pi i / d)`.
pub fn pauli_z(d: usize) -> Operator {
    assert!(d >= 2);
    Operator::from_fn(d, d, |i, j| {
        if i == j {
            let theta = 2.0 * PI * (i + 1) as f64 / d as f64;
            C64::new(theta.cos(), theta.sin())
        } else {
            C_ZERO
        }
    })
}

/// A string of generalized Pauli factors
/// `X^{a_1} Z^{b_1} (x) ... (x) X^{a_N} Z^{b_N}` on `(C^p)^{(x) N}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PauliString {
    p: usize,
    n: usize,
    a: Vec<u32>,
    b: Vec<u32>,
}

impl PauliString {
    pub fn new(p: usize, a: Vec<u32>, b: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime { value: p });
        }
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::Malformed(
                "exponent vectors must be nonempty and of equal length".into(),
            ));
        }
        if let Some(&v) = a.iter().chain(&b).find(|&&v| v as usize >= p) {
            return Err(Error::ExponentOutOfRange { value: v, p });
        }
        let n = a.len();
        Ok(Self { p, n, a, b })
    }

    pub fn identity(p: usize, n: usize) -> Result<Self> {
        Self::new(p, vec![0; n], vec![0; n])
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &[u32] {
        &self.a
    }

    pub fn b(&self) -> &[u32] {
        &self.b
    }

    pub fn dimension(&self) -> usize {
        self.p.pow(self.n as u32)
    }

    pub fn is_identity(&self) -> bool {
        self.a.iter().chain(&self.b).all(|&v| v == 0)
    }

    /// All `p^(2N)` strings in lexicographic `(a, b)` order.
    pub fn enumerate(p: usize, n: usize) -> Result<Vec<PauliString>> {
        if !is_prime(p) {
            return Err(Error::NotPrime { value: p });
        }
        let count = p.pow(2 * n as u32);
        let mut out = Vec::with_capacity(count);
        for idx in 0..count {
            let mut digits = Vec::with_capacity(2 * n);
            let mut rest = idx;
            for _ in 0..2 * n {
                digits.push((rest % p) as u32);
                rest /= p;
            }
            digits.reverse();
            let a = digits[..n].to_vec();
            let b = digits[n..].to_vec();
            out.push(PauliString::new(p, a, b)?);
        }
        Ok(out)
    }
}

fn operator_pow(op: &Operator, e: u32) -> Operator {
    let mut out = Operator::identity(op.dim_out());
    for _ in 0..e {
        out = out.mul(op).expect("square dims");
    }
    out
}

/// The unitary the string denotes.
pub fn pauli_string_operator(ps: &PauliString) -> Operator {
    let x = pauli_x(ps.p);
    let z = pauli_z(ps.p);
    let mut out = Operator::identity(1);
    for k in 0..ps.n {
        let factor = operator_pow(&x, ps.a[k])
            .mul(&operator_pow(&z, ps.b[k]))
            .expect("square dims");
        out = out.tensor(&factor);
    }
    out
}

/// Eigenbasis of a unitary via the Hermitian pair `A = M + M^dagger`,
/// `B = i (M^dagger - M)`: eigenvectors of M group by `Re` of the unit
/// eigenvalue under A, and one refinement pass with B separates complex
/// conjugate pairs. Vectors come out sorted by `(Re, Im)` and
/// phase-normalized.
fn unitary_eigenbasis(m: &Operator) -> Result<Vec<StateVector>> {
    let d = m.dim_out();
    let a = m.add(&m.adjoint());
    let b = m
        .adjoint()
        .sub(m)
        .scale(C64::new(0.0, 1.0));
    let eig = hermitian_eigen(&a)?;
    // group nearly equal eigenvalues of A
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..d {
        match groups.last_mut() {
            Some(g) if (eig.eigenvalues[k] - eig.eigenvalues[g[0]]).abs() <= 1e-6 => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    let mut labeled: Vec<(f64, f64, DVector<C64>)> = Vec::with_capacity(d);
    for g in groups {
        let alpha = eig.eigenvalues[g[0]];
        if g.len() == 1 {
            let v = eig.eigenvectors[g[0]].clone();
            let beta = expectation(&b, v.as_dvector());
            labeled.push((alpha, beta, v.as_dvector().clone()));
            continue;
        }
        // restrict B to the degenerate eigenspace and rediagonalize
        let span: Vec<&DVector<C64>> = g.iter().map(|&k| eig.eigenvectors[k].as_dvector()).collect();
        let g_len = span.len();
        let mut small = DMatrix::from_element(g_len, g_len, C_ZERO);
        for (r, vr) in span.iter().enumerate() {
            let bvr = b.matrix() * *vr;
            for (c, vc) in span.iter().enumerate() {
                small[(c, r)] = vc.dotc(&bvr);
            }
        }
        let small_op = Operator::from_matrix(small)?;
        let sub = hermitian_eigen(&small_op)?;
        for (idx, w) in sub.eigenvectors.iter().enumerate() {
            let mut v = DVector::from_element(d, C_ZERO);
            for (r, vr) in span.iter().enumerate() {
                let coeff = w.amplitudes()[r];
                v += *vr * coeff;
            }
            labeled.push((alpha, sub.eigenvalues[idx], v));
        }
    }
    labeled.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .unwrap()
            .then(x.1.partial_cmp(&y.1).unwrap())
    });
    labeled
        .into_iter()
        .map(|(_, _, mut v)| {
            phase_normalize_dvector(&mut v);
            StateVector::new(v.iter().cloned().collect())
        })
        .collect()
}

fn expectation(op: &Operator, v: &DVector<C64>) -> f64 {
    v.dotc(&(op.matrix() * v)).re
}

/// The `d + 1` bases of prime dimension `d`: the computational basis
/// (clock eigenbasis) plus the eigenbases of `X Z^b` for `b = 0..d-1`.
pub fn prime_mubs(d: usize) -> Result<MubSet> {
    if !is_prime(d) {
        return Err(Error::NotPrime { value: d });
    }
    let mut bases = Vec::with_capacity(d + 1);
    bases.push(Basis::from_unitary(Operator::identity(d), "Z")?);
    let x = pauli_x(d);
    let z = pauli_z(d);
    for b in 0..d {
        let m = x.mul(&operator_pow(&z, b as u32))?;
        let vectors = unitary_eigenbasis(&m)?;
        let label = match b {
            0 => "X".to_string(),
            1 => "XZ".to_string(),
            _ => format!("XZ^{b}"),
        };
        bases.push(Basis::new(vectors, label)?);
    }
    MubSet::new(bases, Family::PrimePauli, format!("d={d};z_phase=one_based"))
}

fn hadamard_2() -> Operator {
    let h = 1.0 / 2f64.sqrt();
    Operator::from_fn(2, 2, |i, j| {
        if i == 1 && j == 1 {
            C64::new(-h, 0.0)
        } else {
            C64::new(h, 0.0)
        }
    })
}

fn k_matrix() -> Operator {
    // (I + i sigma_x) / sqrt(2)
    let h = 1.0 / 2f64.sqrt();
    Operator::from_fn(2, 2, |i, j| {
        if i == j {
            C64::new(h, 0.0)
        } else {
            C64::new(0.0, h)
        }
    })
}

fn tensor_power(op: &Operator, n: usize) -> Operator {
    let mut out = Operator::identity(1);
    for _ in 0..n {
        out = out.tensor(op);
    }
    out
}

/// The three bases of `C^(2^n)` given by `I^(x)n`, `H^(x)n`, `K^(x)n`
/// applied to the computational basis, `K = (I + i sigma_x)/sqrt(2)`.
pub fn qubit_triple(n: usize) -> Result<MubSet> {
    if n < 1 {
        return Err(Error::DimensionTooSmall { min: 1, found: n });
    }
    let bases = vec![
        Basis::from_unitary(tensor_power(&Operator::identity(2), n), "I")?,
        Basis::from_unitary(tensor_power(&hadamard_2(), n), "H")?,
        Basis::from_unitary(tensor_power(&k_matrix(), n), "K")?,
    ];
    MubSet::new(bases, Family::QubitTriple, format!("n={n}"))
}

/// Builds the basis a square yields: for symbol `l` take the cells
/// carrying `l` in row-major order and attach the `t`-th row of the
/// Fourier-Hadamard matrix as phases.
fn basis_from_square(square: &LatinSquare, label: &str) -> Result<Basis> {
    let s = square.side();
    let d = s * s;
    let amp = 1.0 / (s as f64).sqrt();
    let omega = 2.0 * PI / s as f64;
    let mut vectors = Vec::with_capacity(d);
    for t in 0..s {
        for symbol in 1..=s as u32 {
            let cells = square.symbol_cells(symbol);
            let mut v = vec![C_ZERO; d];
            for (m_idx, &(i, j)) in cells.iter().enumerate() {
                let theta = omega * (t * m_idx) as f64;
                v[i * s + j] = C64::new(amp * theta.cos(), amp * theta.sin());
            }
            vectors.push(StateVector::new(v)?);
        }
    }
    Basis::new(vectors, label)
}

/// The `s + 1` Latin-square bases of dimension `d = s^2` for prime `s`:
/// one basis per affine square plus the row and column squares.
pub fn latin_square_mubs(s: usize) -> Result<MubSet> {
    if !is_prime(s) {
        return Err(Error::NotPrime { value: s });
    }
    let mut bases = Vec::with_capacity(s + 1);
    for (k, square) in mols_prime(s)?.iter().enumerate() {
        bases.push(basis_from_square(square, &format!("L{}", k + 1))?);
    }
    let (row, col) = extra_squares(s)?;
    bases.push(basis_from_square(&row, "row")?);
    bases.push(basis_from_square(&col, "column")?);
    MubSet::new(
        bases,
        Family::LatinSquare,
        format!("s={s};mols=affine;cell_order=row_major"),
    )
}

/// Lifts a set in dimension `s` to the product set in `s^2`: basis `t`
/// becomes the columns of `U_t (x) U_t^*`, ordered by `(k, l)`.
pub fn product_mubs(base: &MubSet) -> Result<MubSet> {
    let bases: Vec<Basis> = base
        .bases()
        .par_iter()
        .map(|b| {
            let u = b.as_operator();
            let lifted = u.tensor(&u.conjugate());
            Basis::from_unitary(lifted, format!("{}(x){}*", b.label(), b.label()))
        })
        .collect::<Result<_>>()?;
    MubSet::new(
        bases,
        Family::Product,
        format!("base_family={};base_dim={}", base.family().as_str(), base.dim()),
    )
}

/// Per-pair unbiasedness deviation, for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct PairDeviation {
    pub t1: usize,
    pub t2: usize,
    pub deviation: f64,
}

/// Certification report for a claimed MUB set.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub dim: usize,
    pub num_bases: usize,
    pub tol: f64,
    pub basis_orthonormality_defects: Vec<f64>,
    pub pair_deviations: Vec<PairDeviation>,
    pub max_orthonormality_defect: f64,
    pub max_pair_deviation: f64,
    pub offending_bases: Vec<usize>,
    pub offending_pairs: Vec<[usize; 2]>,
    pub pass: bool,
}

/// Checks orthonormality of every basis and unbiasedness of every pair
/// against `tol`.
pub fn check_mub(set: &MubSet, tol: f64) -> CertificateReport {
    let basis_defects: Vec<f64> = set
        .bases()
        .par_iter()
        .map(|b| b.orthonormality_defect())
        .collect();
    let pairs: Vec<(usize, usize)> = (0..set.len())
        .flat_map(|t1| ((t1 + 1)..set.len()).map(move |t2| (t1, t2)))
        .collect();
    let pair_deviations: Vec<PairDeviation> = pairs
        .par_iter()
        .map(|&(t1, t2)| PairDeviation {
            t1,
            t2,
            deviation: set.pair_deviation(t1, t2),
        })
        .collect();
    let max_basis = basis_defects.iter().cloned().fold(0.0, f64::max);
    let max_pair = pair_deviations
        .iter()
        .map(|p| p.deviation)
        .fold(0.0, f64::max);
    let offending_bases: Vec<usize> = basis_defects
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > tol)
        .map(|(i, _)| i)
        .collect();
    let offending_pairs: Vec<[usize; 2]> = pair_deviations
        .iter()
        .filter(|p| p.deviation > tol)
        .map(|p| [p.t1, p.t2])
        .collect();
    let pass = offending_bases.is_empty() && offending_pairs.is_empty();
    CertificateReport {
        dim: set.dim(),
        num_bases: set.len(),
        tol,
        basis_orthonormality_defects: basis_defects,
        pair_deviations,
        max_orthonormality_defect: max_basis,
        max_pair_deviation: max_pair,
        offending_bases,
        offending_pairs,
        pass,
    }
}

/// How a Pauli string permutes each basis of a Pauli-derived set.
#[derive(Debug, Clone, Serialize)]
pub struct PermutationReport {
    pub pauli: PauliString,
    /// `permutations[t][k]` is the index the k-th vector of basis t maps to.
    pub permutations: Vec<Vec<usize>>,
    /// Max deviation of the matched fidelity from 1 over all (t, k).
    pub max_defect: f64,
}

/// Verifies that applying the Pauli string to each basis vector lands on
/// another vector of the same basis (up to phase), and reports the
/// permutations.
pub fn permutation_witness(set: &MubSet, ps: &PauliString) -> Result<PermutationReport> {
    if !matches!(set.family(), Family::PrimePauli | Family::QubitTriple) {
        return Err(Error::FamilyMismatch {
            expected: "prime_pauli or qubit_triple".into(),
            found: set.family().as_str().into(),
        });
    }
    if ps.dimension() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: ps.dimension(),
        });
    }
    let op = pauli_string_operator(ps);
    let d = set.dim();
    let mut permutations = Vec::with_capacity(set.len());
    let mut max_defect = 0.0f64;
    for (t, basis) in set.bases().iter().enumerate() {
        let images = op.matrix() * basis.matrix();
        let fid = adjoint_product(basis.matrix(), &images);
        let mut perm = vec![usize::MAX; d];
        let mut hit = vec![false; d];
        for k in 0..d {
            let mut best = 0.0f64;
            let mut best_row = 0usize;
            for row in 0..d {
                let f = fid[(row, k)].norm_sqr();
                if f > best {
                    best = f;
                    best_row = row;
                }
            }
            if (best - 1.0).abs() > TOL_PERM || hit[best_row] {
                return Err(Error::NoPermutationMatch { t, k, best });
            }
            perm[k] = best_row;
            hit[best_row] = true;
            max_defect = max_defect.max((best - 1.0).abs());
        }
        permutations.push(perm);
    }
    Ok(PermutationReport {
        pauli: ps.clone(),
        permutations,
        max_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_unitary;

    const INV_SQRT3: f64 = 0.5773502691896258;

    #[test]
    fn pauli_matrices_d2() {
        let x = pauli_x(2);
        assert!((x.entry(0, 1) - C_ONE).norm() < 1e-15);
        assert!((x.entry(1, 0) - C_ONE).norm() < 1e-15);
        let z = pauli_z(2);
        assert!((z.entry(0, 0) - C64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((z.entry(1, 1) - C_ONE).norm() < 1e-12);
    }

    #[test]
    fn pauli_cyclic_wrap_and_orders() {
        let x = pauli_x(3);
        // X |3> = |1> in 1-based labels, i.e. X e_2 = e_0
        let out = x.apply(&StateVector::basis_state(3, 2)).unwrap();
        assert!((out.amplitudes()[0] - C_ONE).norm() < 1e-15);
        let x3 = x.mul(&x).unwrap().mul(&x).unwrap();
        assert!(x3.sub(&Operator::identity(3)).max_abs() < 1e-12);
        let z = pauli_z(3);
        let z3 = z.mul(&z).unwrap().mul(&z).unwrap();
        assert!(z3.sub(&Operator::identity(3)).max_abs() < 1e-12);
    }

    #[test]
    fn clock_shift_commutation() {
        for d in [2usize, 3, 5] {
            let x = pauli_x(d);
            let z = pauli_z(d);
            let zx = z.mul(&x).unwrap();
            let theta = 2.0 * PI / d as f64;
            let omega = C64::new(theta.cos(), theta.sin());
            let wxz = x.mul(&z).unwrap().scale(omega);
            assert!(zx.sub(&wxz).max_abs() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn prime_mubs_d2_overlaps() {
        let set = prime_mubs(2).unwrap();
        assert_eq!(set.len(), 3);
        for t1 in 0..3 {
            for t2 in (t1 + 1)..3 {
                assert!(set.pair_deviation(t1, t2) < 1e-12);
            }
        }
    }

    #[test]
    fn prime_mubs_d5_all_pairs() {
        let set = prime_mubs(5).unwrap();
        assert_eq!(set.len(), 6);
        let report = check_mub(&set, 1e-9);
        assert!(report.pass);
        assert!(report.max_pair_deviation < 1e-9);
    }

    #[test]
    fn prime_mubs_rejects_composites() {
        assert!(matches!(prime_mubs(4), Err(Error::NotPrime { .. })));
        assert!(matches!(prime_mubs(6), Err(Error::NotPrime { .. })));
    }

    #[test]
    fn qubit_triple_n1() {
        let set = qubit_triple(1).unwrap();
        assert_eq!(set.len(), 3);
        for t1 in 0..3 {
            for t2 in (t1 + 1)..3 {
                assert!(set.pair_deviation(t1, t2) < 1e-12);
            }
        }
        // K is unitary and its columns are sigma_y eigenvectors up to phase
        let k = k_matrix();
        assert!(is_unitary(&k, 1e-12));
        let sy = Operator::from_fn(2, 2, |i, j| {
            if i == 0 && j == 1 {
                C64::new(0.0, -1.0)
            } else if i == 1 && j == 0 {
                C64::new(0.0, 1.0)
            } else {
                C_ZERO
            }
        });
        let eig = hermitian_eigen(&sy).unwrap();
        let kb = set.basis(2);
        for k_idx in 0..2 {
            let col = kb.vector(k_idx);
            let matched = eig
                .eigenvectors
                .iter()
                .any(|v| (v.inner(&col).unwrap().norm() - 1.0).abs() < 1e-12);
            assert!(matched);
        }
    }

    #[test]
    fn qubit_triple_n2_overlaps() {
        let set = qubit_triple(2).unwrap();
        assert_eq!(set.dim(), 4);
        let report = check_mub(&set, 1e-9);
        assert!(report.pass);
    }

    #[test]
    fn latin_square_worked_example_vectors() {
        let set = latin_square_mubs(3).unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(set.dim(), 9);
        let b = set.basis(0); // affine square k=1: the worked 3x3 table
        let w = C64::new((2.0 * PI / 3.0).cos(), (2.0 * PI / 3.0).sin());
        let w2 = w * w;
        let mk = |entries: &[(usize, C64)]| {
            let mut v = vec![C_ZERO; 9];
            for &(i, z) in entries {
                v[i] = z * INV_SQRT3;
            }
            StateVector::new(v).unwrap()
        };
        // |1,1> -> 0, |2,3> -> 5, |3,2> -> 7, |1,2> -> 1, |2,1> -> 3,
        // |3,3> -> 8, |1,3> -> 2, |2,2> -> 4, |3,1> -> 6
        let expected = [
            mk(&[(0, C_ONE), (5, C_ONE), (7, C_ONE)]),
            mk(&[(1, C_ONE), (3, C_ONE), (8, C_ONE)]),
            mk(&[(2, C_ONE), (4, C_ONE), (6, C_ONE)]),
            mk(&[(0, C_ONE), (5, w), (7, w2)]),
            mk(&[(0, C_ONE), (5, w2), (7, w)]),
        ];
        for want in &expected {
            let found = (0..9).any(|k| {
                (b.vector(k).inner(want).unwrap().norm() - 1.0).abs() < 1e-10
            });
            assert!(found, "printed vector not found in basis");
        }
        let report = check_mub(&set, 1e-9);
        assert!(report.pass);
    }

    #[test]
    fn latin_square_rejects_non_prime() {
        assert!(matches!(latin_square_mubs(4), Err(Error::NotPrime { .. })));
    }

    #[test]
    fn product_of_qubit_triple() {
        let base = qubit_triple(1).unwrap();
        let set = product_mubs(&base).unwrap();
        assert_eq!(set.dim(), 4);
        assert_eq!(set.len(), 3);
        // V_1 from the computational base is the computational basis of C^4
        let first = set.basis(0);
        assert!(first
            .as_operator()
            .sub(&Operator::identity(4))
            .max_abs()
            < 1e-12);
        let report = check_mub(&set, 1e-9);
        assert!(report.pass);
        assert!(set.pauli_covariant());
        assert_eq!(set.pauli_shape(), Some((2, 2)));
    }

    #[test]
    fn product_of_prime3_overlaps() {
        let set = product_mubs(&prime_mubs(3).unwrap()).unwrap();
        assert_eq!(set.dim(), 9);
        let report = check_mub(&set, 1e-9);
        assert!(report.pass);
        assert_eq!(set.pauli_shape(), Some((3, 2)));
    }

    #[test]
    fn check_mub_flags_duplicate_basis() {
        let set = prime_mubs(3).unwrap();
        let dup = MubSet::new_unchecked(
            vec![set.basis(0).clone(), set.basis(0).clone(), set.basis(1).clone()],
            Family::Custom,
            "corrupted",
        )
        .unwrap();
        let report = check_mub(&dup, 1e-9);
        assert!(!report.pass);
        assert!(report.offending_pairs.contains(&[0, 1]));
    }

    #[test]
    fn pauli_string_operators() {
        let id = PauliString::identity(2, 1).unwrap();
        assert!(pauli_string_operator(&id)
            .sub(&Operator::identity(2))
            .max_abs()
            < 1e-15);
        let x = PauliString::new(2, vec![1], vec![0]).unwrap();
        assert!(pauli_string_operator(&x).sub(&pauli_x(2)).max_abs() < 1e-15);
        let xz = PauliString::new(2, vec![1, 0], vec![0, 1]).unwrap();
        let op = pauli_string_operator(&xz);
        let expect = pauli_x(2).tensor(&pauli_z(2));
        assert!(op.sub(&expect).max_abs() < 1e-12);
        assert!(is_unitary(&op, 1e-12));
    }

    #[test]
    fn pauli_string_validation() {
        assert!(matches!(
            PauliString::new(4, vec![0], vec![0]),
            Err(Error::NotPrime { .. })
        ));
        assert!(matches!(
            PauliString::new(3, vec![3], vec![0]),
            Err(Error::ExponentOutOfRange { .. })
        ));
        assert_eq!(PauliString::enumerate(2, 2).unwrap().len(), 16);
    }

    #[test]
    fn permutation_witness_identity_string() {
        let set = prime_mubs(3).unwrap();
        let id = PauliString::identity(3, 1).unwrap();
        let report = permutation_witness(&set, &id).unwrap();
        for perm in &report.permutations {
            for (k, &img) in perm.iter().enumerate() {
                assert_eq!(k, img);
            }
        }
        assert!(report.max_defect < 1e-12);
    }

    #[test]
    fn permutation_witness_x_fixes_x_eigenbasis() {
        let set = prime_mubs(2).unwrap();
        let xs = PauliString::new(2, vec![1], vec![0]).unwrap();
        let report = permutation_witness(&set, &xs).unwrap();
        // basis 1 is the X eigenbasis: X acts by phases only
        assert_eq!(report.permutations[1], vec![0, 1]);
        // basis 0 is computational: X swaps the two vectors
        assert_eq!(report.permutations[0], vec![1, 0]);
    }

    #[test]
    fn permutation_witness_rejects_wrong_family() {
        let set = latin_square_mubs(3).unwrap();
        let ps = PauliString::new(3, vec![1, 0], vec![0, 0]).unwrap();
        assert!(matches!(
            permutation_witness(&set, &ps),
            Err(Error::FamilyMismatch { .. })
        ));
    }

    #[test]
    fn json_round_trip_preserves_amplitudes() {
        let set = qubit_triple(1).unwrap();
        let s = set.to_json_string();
        let back = MubSet::from_json_str(&s).unwrap();
        assert_eq!(back.dim(), set.dim());
        assert_eq!(back.len(), set.len());
        assert_eq!(back.family(), Family::QubitTriple);
        for t in 0..set.len() {
            for k in 0..set.dim() {
                let a = set.basis(t).vector(k);
                let b = back.basis(t).vector(k);
                for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                    assert!((x - y).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn subset_keeps_family_and_records_indices() {
        let set = latin_square_mubs(3).unwrap();
        let sub = set.subset(&[0, 2]).unwrap();
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.family(), Family::LatinSquare);
        assert_eq!(sub.metadata_field("subset"), Some("0,2"));
    }
}
