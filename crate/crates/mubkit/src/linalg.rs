//! Dense complex linear algebra kernel.
//!
//! Wraps `nalgebra` storage with the domain types the rest of the crate
//! works in: normalized state vectors, general operators, and density
//! operators. Hermitian eigendecomposition is done by cyclic Jacobi
//! sweeps, which keeps eigenvector orthonormality and the reconstruction
//! residual at machine-precision level for the dimensions we care about
//! (d <= 64 for eigenproblems).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tol::{PROB_ZERO, TOL_HERM, TOL_NORM, TOL_PHASE, TOL_PSD};

pub type C64 = Complex64;

pub const C_ZERO: C64 = C64::new(0.0, 0.0);
pub const C_ONE: C64 = C64::new(1.0, 0.0);

/// A normalized pure state in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Builds a state from amplitudes, checking finiteness and that the
    /// norm is within `TOL_NORM` of one.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        if v.is_empty() {
            return Err(Error::DimensionTooSmall { min: 1, found: 0 });
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                context: "state amplitudes".into(),
            });
        }
        let norm = v.norm();
        let drift = (norm - 1.0).abs();
        if drift > TOL_NORM {
            return Err(Error::NormalizationDrift { drift });
        }
        Ok(Self { amplitudes: v })
    }

    /// Builds a state by rescaling an arbitrary nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        if v.is_empty() {
            return Err(Error::DimensionTooSmall { min: 1, found: 0 });
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                context: "state amplitudes".into(),
            });
        }
        let norm = v.norm();
        if norm < PROB_ZERO {
            return Err(Error::NormalizationDrift { drift: 1.0 });
        }
        Ok(Self {
            amplitudes: v / C64::new(norm, 0.0),
        })
    }

    pub(crate) fn from_dvector(v: DVector<C64>) -> Result<Self> {
        Self::new(v.iter().cloned().collect())
    }

    /// Computational basis state `|k>` (0-based index).
    pub fn basis_state(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dim {dim}");
        let mut v = DVector::from_element(dim, C_ZERO);
        v[k] = C_ONE;
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub(crate) fn as_dvector(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// `<self|other>`: conjugate-linear in `self`, linear in `other`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|self> (x) |other>`.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let (a, b) = (&self.amplitudes, &other.amplitudes);
        let mut out = Vec::with_capacity(a.len() * b.len());
        for x in a.iter() {
            for y in b.iter() {
                out.push(x * y);
            }
        }
        StateVector {
            amplitudes: DVector::from_vec(out),
        }
    }

    /// Multiplies by the global phase that makes the first component of
    /// modulus above `TOL_PHASE` real and positive.
    pub fn phase_normalize(&mut self) {
        phase_normalize_dvector(&mut self.amplitudes);
    }

    pub fn phase_normalized(&self) -> StateVector {
        let mut s = self.clone();
        s.phase_normalize();
        s
    }

    /// Projector `|self><self|`.
    pub fn projector(&self) -> Operator {
        let d = self.dim();
        let v = &self.amplitudes;
        Operator {
            mat: DMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj()),
        }
    }

    /// Amplitude pairs `[re, im]` for serialization.
    pub fn to_wire(&self) -> Vec<[f64; 2]> {
        self.amplitudes.iter().map(|z| [z.re, z.im]).collect()
    }

    pub fn from_wire(pairs: &[[f64; 2]]) -> Result<Self> {
        Self::new(pairs.iter().map(|p| C64::new(p[0], p[1])).collect())
    }
}

pub(crate) fn phase_normalize_dvector(v: &mut DVector<C64>) {
    if let Some(anchor) = v.iter().find(|z| z.norm() > TOL_PHASE) {
        let phase = anchor.conj() / anchor.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// A dense complex matrix, `dim_out x dim_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                context: "operator entries".into(),
            });
        }
        Ok(Self { mat })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        Self {
            mat: DMatrix::from_fn(rows, cols, f),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            mat: DMatrix::identity(d, d),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            mat: DMatrix::from_element(rows, cols, C_ZERO),
        }
    }

    pub fn dim_out(&self) -> usize {
        self.mat.nrows()
    }

    pub fn dim_in(&self) -> usize {
        self.mat.ncols()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub(crate) fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    /// Kronecker product; dimensions multiply.
    pub fn tensor(&self, other: &Operator) -> Operator {
        Operator {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            mat: self.mat.adjoint(),
        }
    }

    /// Entrywise complex conjugate (no transpose).
    pub fn conjugate(&self) -> Operator {
        Operator {
            mat: self.mat.map(|z| z.conj()),
        }
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        if self.dim_in() != other.dim_out() {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in(),
                found: other.dim_out(),
            });
        }
        Ok(Operator {
            mat: &self.mat * &other.mat,
        })
    }

    /// Applies the operator to a state. The result must again be
    /// normalized (the usual case: unitaries and permutations).
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if self.dim_in() != psi.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in(),
                found: psi.dim(),
            });
        }
        StateVector::from_dvector(&self.mat * psi.as_dvector())
    }

    /// Applies the operator without normalization checks.
    pub fn apply_raw(&self, psi: &StateVector) -> Result<DVector<C64>> {
        if self.dim_in() != psi.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in(),
                found: psi.dim(),
            });
        }
        Ok(&self.mat * psi.as_dvector())
    }

    pub fn trace(&self) -> C64 {
        self.mat.diagonal().sum()
    }

    /// Max-modulus entry.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C64) -> Operator {
        Operator {
            mat: &self.mat * s,
        }
    }

    pub fn add(&self, other: &Operator) -> Operator {
        Operator {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Operator) -> Operator {
        Operator {
            mat: &self.mat - &other.mat,
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        if self.dim_out() != self.dim_in() {
            return f64::INFINITY;
        }
        (&self.mat - self.mat.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Kronecker product of two operators.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    a.tensor(b)
}

/// `<u|v>` as a free function.
pub fn inner(u: &StateVector, v: &StateVector) -> Result<C64> {
    u.inner(v)
}

/// `true` iff `||A^dagger A - I||_max <= tol`.
pub fn is_unitary(a: &Operator, tol: f64) -> bool {
    if a.dim_out() != a.dim_in() {
        return false;
    }
    let d = a.dim_out();
    let gram = adjoint_product(a.matrix(), a.matrix());
    let mut defect = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let expect = if i == j { C_ONE } else { C_ZERO };
            defect = defect.max((gram[(i, j)] - expect).norm());
        }
    }
    defect <= tol
}

/// `A^dagger B` computed through four real GEMMs, which is considerably
/// faster than the generic complex path for the larger products this
/// crate runs (d up to ~1000).
pub(crate) fn adjoint_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let ar = a.map(|z| z.re);
    let ai = a.map(|z| z.im);
    let br = b.map(|z| z.re);
    let bi = b.map(|z| z.im);
    // (Ar - i Ai)^T (Br + i Bi) = (Ar^T Br + Ai^T Bi) + i (Ar^T Bi - Ai^T Br)
    let re = ar.tr_mul(&br) + ai.tr_mul(&bi);
    let im = ar.tr_mul(&bi) - ai.tr_mul(&br);
    DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| C64::new(re[(i, j)], im[(i, j)]))
}

/// Result of a Hermitian eigendecomposition: eigenvalues ascending,
/// eigenvectors orthonormal, each phase-normalized, ties in the
/// eigenvalues broken by lexicographic order of the (re, im) sequence.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
pub fn hermitian_eigen(a: &Operator) -> Result<HermitianEigen> {
    if a.dim_out() != a.dim_in() {
        return Err(Error::NotSquare {
            rows: a.dim_out(),
            cols: a.dim_in(),
        });
    }
    let defect = a.hermitian_defect();
    if defect > TOL_HERM {
        return Err(Error::NotHermitian { defect });
    }
    let (evs, vecs) = jacobi_hermitian(a.matrix());
    let d = a.dim_out();
    let mut items: Vec<(f64, StateVector)> = (0..d)
        .map(|k| {
            let mut col = DVector::from_fn(d, |i, _| vecs[(i, k)]);
            phase_normalize_dvector(&mut col);
            let sv = StateVector {
                amplitudes: col,
            };
            (evs[k], sv)
        })
        .collect();
    items.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .unwrap()
            .then_with(|| lex_cmp(&x.1, &y.1))
    });
    Ok(HermitianEigen {
        eigenvalues: items.iter().map(|it| it.0).collect(),
        eigenvectors: items.into_iter().map(|it| it.1).collect(),
    })
}

fn lex_cmp(a: &StateVector, b: &StateVector) -> std::cmp::Ordering {
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        match x.re.partial_cmp(&y.re).unwrap() {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
        match x.im.partial_cmp(&y.im).unwrap() {
            std::cmp::Ordering::Equal => {}
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Cyclic Jacobi for Hermitian matrices. Returns unsorted eigenvalues and
/// the unitary of eigenvectors by columns.
pub(crate) fn jacobi_hermitian(a: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let d = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<C64>::identity(d, d);
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-15 * scale;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(m[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let b = m[(p, q)];
                if b.norm() <= tol * 1e-2 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = b / b.norm();
                let tau = (aqq - app) / (2.0 * b.norm());
                // small-magnitude root of t^2 - 2 tau t - 1 = 0
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let gpp = C64::new(c, 0.0);
                let gpq = -phase * s;
                let gqp = phase.conj() * s;
                let gqq = C64::new(c, 0.0);
                // M <- G^dagger M G
                for i in 0..d {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * gpp + miq * gqp;
                    m[(i, q)] = mip * gpq + miq * gqq;
                }
                for j in 0..d {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = gpp.conj() * mpj + gqp.conj() * mqj;
                    m[(q, j)] = gpq.conj() * mpj + gqq.conj() * mqj;
                }
                for i in 0..d {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * gpp + viq * gqp;
                    v[(i, q)] = vip * gpq + viq * gqq;
                }
            }
        }
    }
    let evs: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
    (evs, v)
}

/// Projector onto the symmetric subspace of `C^d (x) C^d`:
/// `(I + SWAP) / 2`, with trace `d (d + 1) / 2`.
pub fn sym_projector(d: usize) -> Operator {
    assert!(d >= 1, "dimension must be positive");
    let dd = d * d;
    let mut mat = DMatrix::from_element(dd, dd, C_ZERO);
    let half = C64::new(0.5, 0.0);
    for i in 0..d {
        for j in 0..d {
            let col = i * d + j;
            let swapped = j * d + i;
            mat[(col, col)] += half;
            mat[(swapped, col)] += half;
        }
    }
    Operator { mat }
}

/// A density operator: Hermitian, unit trace, positive semidefinite
/// within tolerance.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    mat: DMatrix<C64>,
    eigenvalues: Vec<f64>,
}

impl DensityOperator {
    pub fn new(op: Operator) -> Result<Self> {
        if op.dim_out() != op.dim_in() {
            return Err(Error::NotSquare {
                rows: op.dim_out(),
                cols: op.dim_in(),
            });
        }
        let herm = op.hermitian_defect();
        if herm > TOL_HERM {
            return Err(Error::InvalidDensity {
                reason: format!("Hermitian defect {herm:.3e}"),
            });
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TOL_NORM || tr.im.abs() > TOL_NORM {
            return Err(Error::InvalidDensity {
                reason: format!("trace {tr}"),
            });
        }
        let (evs, _) = jacobi_hermitian(op.matrix());
        if let Some(min) = evs.iter().cloned().reduce(f64::min) {
            if min < -TOL_PSD {
                return Err(Error::InvalidDensity {
                    reason: format!("eigenvalue {min:.3e} below -{TOL_PSD:.0e}"),
                });
            }
        }
        Ok(Self {
            mat: op.into_matrix(),
            eigenvalues: evs,
        })
    }

    /// Mixes rank-one projectors `|psi_i><psi_i|` with the given weights.
    pub fn mixture(states: &[StateVector], weights: &[f64]) -> Result<Self> {
        if states.is_empty() || states.len() != weights.len() {
            return Err(Error::Malformed(
                "mixture needs matching nonempty states and weights".into(),
            ));
        }
        let d = states[0].dim();
        let mut mat = DMatrix::from_element(d, d, C_ZERO);
        for (psi, &w) in states.iter().zip(weights) {
            if psi.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: psi.dim(),
                });
            }
            let v = psi.as_dvector();
            for i in 0..d {
                for j in 0..d {
                    mat[(i, j)] += v[i] * v[j].conj() * w;
                }
            }
        }
        Self::new(Operator { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `<phi| rho |phi>`, real up to rounding.
    pub fn expectation(&self, phi: &StateVector) -> Result<f64> {
        if phi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: phi.dim(),
            });
        }
        let v = phi.as_dvector();
        Ok(v.dotc(&(&self.mat * v)).re)
    }
}

/// Von Neumann entropy in bits: `-sum lambda log2 lambda` with
/// `0 log 0 = 0`; eigenvalues in `[-TOL_PSD, 0)` are clamped to zero.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    let mut h = 0.0;
    for &lam in rho.eigenvalues() {
        let lam = if lam < 0.0 { 0.0 } else { lam };
        if lam > PROB_ZERO {
            h -= lam * lam.log2();
        }
    }
    h
}

/// Random state: complex standard normal amplitudes, normalized.
pub fn random_state(dim: usize, rng: &mut impl Rng) -> StateVector {
    loop {
        let amps: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(sv) = StateVector::normalized(amps) {
            return sv;
        }
    }
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> Operator {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    Operator {
        mat: (&g + g.adjoint()).scale(0.5),
    }
}

/// Haar-ish random unitary via QR of a Ginibre matrix with the R diagonal
/// phase fixed, which is all the uses in this crate need.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> Operator {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let rkk = r[(k, k)];
        if rkk.norm() > 0.0 {
            let phase = rkk / rkk.norm();
            for i in 0..dim {
                q[(i, k)] *= phase;
            }
        }
    }
    Operator { mat: q }
}
