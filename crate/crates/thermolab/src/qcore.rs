//! Finite-dimensional states, observables, partial traces, entropies and distances.
//!
//! Subsystem ordering follows the Kronecker convention: subsystem 0 is the most
//! significant digit of the basis index. Entropies are in nats.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::{cmatmul, hermiticity_defect, herm_eig, herm_eigvals, kron, max_abs};
use crate::scalar::{cx, lit, tol, CMatrix, CVector, KahanSum, Real};

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T: Real> {
    amps: CVector<T>,
}

impl<T: Real> PureState<T> {
    /// Wraps amplitudes whose squared norm is one within `1e-12`.
    pub fn new(amps: CVector<T>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidState("empty amplitude vector".into()));
        }
        let n2 = amps.norm_squared();
        if (n2 - T::one()).abs() > tol(1e-12) {
            return Err(Error::InvalidState(format!("squared norm {n2} differs from 1")));
        }
        Ok(Self { amps })
    }

    /// Rescales nonzero amplitudes to unit norm.
    pub fn normalized(amps: CVector<T>) -> Result<Self> {
        let n = amps.norm();
        if amps.is_empty() || n <= T::zero() {
            return Err(Error::InvalidState("zero vector cannot be normalized".into()));
        }
        Ok(Self { amps: amps.unscale(n) })
    }

    /// Computational basis vector `|index⟩` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Dimension(format!("basis index {index} outside dimension {dim}")));
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = cx(T::one());
        Ok(Self { amps })
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Amplitudes in the computational basis.
    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amps
    }

    /// Consumes the state, returning its amplitudes.
    pub fn into_amplitudes(self) -> CVector<T> {
        self.amps
    }

    /// Projector `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DensityMatrix<T> {
        DensityMatrix { m: &self.amps * self.amps.adjoint() }
    }

    /// `⟨ψ|A|ψ⟩` for Hermitian `A` (real part).
    pub fn expectation(&self, op: &CMatrix<T>) -> Result<T> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::Dimension(format!("operator {}x{} vs state {}", op.nrows(), op.ncols(), self.dim())));
        }
        Ok(self.amps.dotc(&(op * &self.amps)).re)
    }

    /// Inner product `⟨self|other⟩`.
    pub fn overlap(&self, other: &Self) -> Result<Complex<T>> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("{} vs {}", self.dim(), other.dim())));
        }
        Ok(self.amps.dotc(&other.amps))
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    m: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates hermiticity and trace within `1e-12` and eigenvalues above `-1e-10`.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!("density matrix must be square, got {}x{}", m.nrows(), m.ncols())));
        }
        let h = hermiticity_defect(&m);
        if h > tol(1e-12) {
            return Err(Error::InvalidState(format!("hermiticity defect {h}")));
        }
        let tr = m.trace();
        if (tr.re - T::one()).abs() > tol(1e-12) || tr.im.abs() > tol(1e-12) {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let lowest = herm_eigvals(&m).first().copied().unwrap_or_else(T::zero);
        if lowest < -tol::<T>(1e-10) {
            return Err(Error::InvalidState(format!("negative eigenvalue {lowest}")));
        }
        Ok(Self { m })
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn from_trusted(m: CMatrix<T>) -> Self {
        Self { m }
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim).unscale(lit(dim as f64)) }
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// Matrix entries.
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<T> {
        herm_eigvals(&self.m)
    }

    /// `Tr(ρ A)` (real part).
    pub fn expectation(&self, op: &CMatrix<T>) -> Result<T> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::Dimension(format!("operator {}x{} vs state {}", op.nrows(), op.ncols(), self.dim())));
        }
        let mut acc = KahanSum::default();
        for i in 0..self.dim() {
            for k in 0..self.dim() {
                acc.add((self.m[(i, k)] * op[(k, i)]).re);
            }
        }
        Ok(acc.total())
    }

    /// Purity `Tr ρ²`.
    pub fn purity(&self) -> T {
        self.m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }
}

/// Kronecker composition of two systems.
pub trait Tensor: Sized {
    /// `self ⊗ other`.
    fn tensor(&self, other: &Self) -> Self;
}

impl<T: Real> Tensor for PureState<T> {
    fn tensor(&self, other: &Self) -> Self {
        Self { amps: self.amps.kronecker(&other.amps) }
    }
}

impl<T: Real> Tensor for DensityMatrix<T> {
    fn tensor(&self, other: &Self) -> Self {
        Self { m: kron(&self.m, &other.m) }
    }
}

/// Tensor product of two states of the same kind.
pub fn tensor_product<S: Tensor>(a: &S, b: &S) -> S {
    a.tensor(b)
}

/// Index bookkeeping for a split into kept and traced subsystems.
struct Split {
    kept_dim: usize,
    traced_dim: usize,
    /// `full[k * traced_dim + t]` is the full index of kept index `k` and traced index `t`.
    full: Vec<usize>,
}

fn split_indices(dims: &[usize], keep: &[usize], total: usize) -> Result<Split> {
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::Dimension("subsystem dimensions must be positive".into()));
    }
    let product: usize = dims.iter().product();
    if product != total {
        return Err(Error::Dimension(format!("subsystem dimensions multiply to {product}, state has {total}")));
    }
    if keep.is_empty() {
        return Err(Error::Dimension("kept subsystem set is empty".into()));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() || kept[k] {
            return Err(Error::Dimension(format!("invalid or repeated kept index {k}")));
        }
        kept[k] = true;
    }
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let kept_sys: Vec<usize> = (0..dims.len()).filter(|&i| kept[i]).collect();
    let traced_sys: Vec<usize> = (0..dims.len()).filter(|&i| !kept[i]).collect();
    let kept_dim: usize = kept_sys.iter().map(|&i| dims[i]).product();
    let traced_dim: usize = traced_sys.iter().map(|&i| dims[i]).product();
    let offsets = |systems: &[usize], count: usize| -> Vec<usize> {
        (0..count)
            .map(|mut idx| {
                let mut off = 0;
                for &s in systems.iter().rev() {
                    off += (idx % dims[s]) * strides[s];
                    idx /= dims[s];
                }
                off
            })
            .collect()
    };
    let ko = offsets(&kept_sys, kept_dim);
    let to = offsets(&traced_sys, traced_dim);
    let mut full = Vec::with_capacity(total);
    for &a in &ko {
        for &b in &to {
            full.push(a + b);
        }
    }
    Ok(Split { kept_dim, traced_dim, full })
}

/// Reduced state on the subsystems listed in `keep`, in ascending subsystem order.
pub fn partial_trace<T: Real>(rho: &DensityMatrix<T>, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix<T>> {
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let s = split_indices(dims, &keep_sorted, rho.dim())?;
    let out = CMatrix::from_fn(s.kept_dim, s.kept_dim, |a, b| {
        let mut acc = Complex::new(T::zero(), T::zero());
        for t in 0..s.traced_dim {
            acc += rho.m[(s.full[a * s.traced_dim + t], s.full[b * s.traced_dim + t])];
        }
        acc
    });
    Ok(DensityMatrix { m: out })
}

/// Reduced state of a pure state, computed as `M M†` with `M` the reshaped amplitudes.
pub fn reduced_state<T: Real>(psi: &PureState<T>, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix<T>> {
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let s = split_indices(dims, &keep_sorted, psi.dim())?;
    let m = CMatrix::from_fn(s.kept_dim, s.traced_dim, |a, t| psi.amps[s.full[a * s.traced_dim + t]]);
    Ok(DensityMatrix { m: cmatmul(&m, &m.adjoint()) })
}

/// Entropy of a probability spectrum in nats, with `0 ln 0 = 0`.
///
/// Values within `1e-10` of the interval `[0, 1]` are clipped onto it; values
/// below `1e-14` contribute nothing.
pub fn spectrum_entropy<T: Real>(eigs: &[T]) -> Result<T> {
    let mut acc = KahanSum::default();
    for &l in eigs {
        if l < -tol::<T>(1e-10) {
            return Err(Error::InvalidState(format!("negative eigenvalue {l}")));
        }
        let p = l.max(T::zero()).min(T::one());
        if p > lit(1e-14) {
            acc.add(-p * p.ln());
        }
    }
    Ok(acc.total().max(T::zero()))
}

/// Von Neumann entropy `-Tr ρ ln ρ` in nats.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    spectrum_entropy(&rho.eigenvalues())
}

/// Rényi entropy of order `alpha > 0`, `alpha ≠ 1`, in nats.
pub fn renyi_entropy<T: Real>(rho: &DensityMatrix<T>, alpha: T) -> Result<T> {
    if alpha <= T::zero() || (alpha - T::one()).abs() < tol(1e-12) {
        return Err(Error::Config(format!("Rényi order must be positive and different from 1, got {alpha}")));
    }
    let mut acc = KahanSum::default();
    for l in rho.eigenvalues() {
        if l < -tol::<T>(1e-10) {
            return Err(Error::InvalidState(format!("negative eigenvalue {l}")));
        }
        let p = l.max(T::zero()).min(T::one());
        if p > lit(1e-14) {
            acc.add(p.powf(alpha));
        }
    }
    Ok(acc.total().ln() / (T::one() - alpha))
}

/// Columns of the observable eigenbasis.
#[derive(Clone, Debug, PartialEq)]
pub enum Eigenbasis<T: Real> {
    /// Column `c` is the computational basis vector with index `order[c]`.
    Computational(Vec<usize>),
    /// Dense unitary whose columns are eigenvectors.
    Dense(CMatrix<T>),
}

/// Spectral decomposition of an observable into distinct eigenvalues and eigenspaces.
///
/// Eigenvectors are stored as columns grouped by eigenvalue in ascending order, so
/// eigenspace `j` occupies columns `offsets[j]..offsets[j] + degeneracies[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSpectral<T: Real> {
    values: Vec<T>,
    degeneracies: Vec<usize>,
    offsets: Vec<usize>,
    basis: Eigenbasis<T>,
    dim: usize,
}

/// Relative tolerance used to merge nearly equal eigenvalues.
pub const DEGENERACY_RTOL: f64 = 1e-9;

fn group_sorted<T: Real>(sorted: &[T]) -> (Vec<T>, Vec<usize>) {
    let mut values: Vec<T> = Vec::new();
    let mut degs: Vec<usize> = Vec::new();
    for &v in sorted {
        if let Some(last) = values.last() {
            let scale = last.abs().max(v.abs()).max(T::one());
            if (v - *last).abs() <= lit::<T>(DEGENERACY_RTOL) * scale {
                *degs.last_mut().unwrap() += 1;
                continue;
            }
        }
        values.push(v);
        degs.push(1);
    }
    (values, degs)
}

fn offsets_of(degs: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    degs.iter()
        .map(|&d| {
            let o = acc;
            acc += d;
            o
        })
        .collect()
}

impl<T: Real> ObservableSpectral<T> {
    /// Diagonalizes a Hermitian operator and groups equal eigenvalues.
    pub fn from_hermitian(op: &CMatrix<T>) -> Result<Self> {
        if op.nrows() == 0 || op.nrows() != op.ncols() {
            return Err(Error::Dimension("observable must be a nonempty square matrix".into()));
        }
        let scale = max_abs(op).max(T::one());
        if hermiticity_defect(op) > tol::<T>(1e-10) * scale {
            return Err(Error::InvalidOperator("observable is not Hermitian".into()));
        }
        let (vals, vecs) = herm_eig(op);
        let (values, degeneracies) = group_sorted(&vals);
        let offsets = offsets_of(&degeneracies);
        Ok(Self { values, degeneracies, offsets, basis: Eigenbasis::Dense(vecs), dim: op.nrows() })
    }

    /// Observable diagonal in the computational basis.
    pub fn from_diagonal(diag: &[T]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Dimension("empty diagonal".into()));
        }
        let mut order: Vec<usize> = (0..diag.len()).collect();
        order.sort_by(|&a, &b| diag[a].partial_cmp(&diag[b]).unwrap_or(std::cmp::Ordering::Equal));
        let sorted: Vec<T> = order.iter().map(|&i| diag[i]).collect();
        let (values, degeneracies) = group_sorted(&sorted);
        let offsets = offsets_of(&degeneracies);
        Ok(Self { values, degeneracies, offsets, basis: Eigenbasis::Computational(order), dim: diag.len() })
    }

    /// Observable with eigenvalue `eigenvalues[c]` on column `c` of the unitary `basis`.
    pub fn from_eigenbasis(eigenvalues: &[T], basis: &CMatrix<T>) -> Result<Self> {
        let d = basis.nrows();
        if d == 0 || basis.ncols() != d || eigenvalues.len() != d {
            return Err(Error::Dimension(format!("basis {}x{} with {} eigenvalues", basis.nrows(), basis.ncols(), eigenvalues.len())));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eigenvalues[a].partial_cmp(&eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));
        let sorted: Vec<T> = order.iter().map(|&i| eigenvalues[i]).collect();
        let (values, degeneracies) = group_sorted(&sorted);
        let offsets = offsets_of(&degeneracies);
        let vecs = CMatrix::from_fn(d, d, |r, c| basis[(r, order[c])]);
        Ok(Self { values, degeneracies, offsets, basis: Eigenbasis::Dense(vecs), dim: d })
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Distinct eigenvalues, strictly increasing.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Degeneracy of each distinct eigenvalue.
    pub fn degeneracies(&self) -> &[usize] {
        &self.degeneracies
    }

    /// Number of distinct outcomes.
    pub fn outcomes(&self) -> usize {
        self.values.len()
    }

    /// Eigenbasis storage.
    pub fn basis(&self) -> &Eigenbasis<T> {
        &self.basis
    }

    /// Eigenvalue attached to each eigenbasis column.
    pub fn column_values(&self) -> Vec<T> {
        self.values.iter().zip(&self.degeneracies).flat_map(|(&v, &d)| std::iter::repeat(v).take(d)).collect()
    }

    /// Eigenspace index of each eigenbasis column.
    pub fn column_groups(&self) -> Vec<usize> {
        self.degeneracies.iter().enumerate().flat_map(|(j, &d)| std::iter::repeat(j).take(d)).collect()
    }

    /// Eigenbasis as a dense unitary (columns grouped by eigenvalue).
    pub fn unitary(&self) -> CMatrix<T> {
        match &self.basis {
            Eigenbasis::Dense(m) => m.clone(),
            Eigenbasis::Computational(order) => {
                let mut m = CMatrix::zeros(self.dim, self.dim);
                for (c, &r) in order.iter().enumerate() {
                    m[(r, c)] = cx(T::one());
                }
                m
            }
        }
    }

    /// Orthonormal basis of eigenspace `j` as a `D × d_j` matrix.
    pub fn eigenvectors(&self, j: usize) -> CMatrix<T> {
        let (o, d) = (self.offsets[j], self.degeneracies[j]);
        match &self.basis {
            Eigenbasis::Dense(m) => m.columns(o, d).into_owned(),
            Eigenbasis::Computational(order) => {
                let mut m = CMatrix::zeros(self.dim, d);
                for c in 0..d {
                    m[(order[o + c], c)] = cx(T::one());
                }
                m
            }
        }
    }

    /// Projector onto eigenspace `j`.
    pub fn projector(&self, j: usize) -> CMatrix<T> {
        let v = self.eigenvectors(j);
        cmatmul(&v, &v.adjoint())
    }

    /// Operator `Σ_j a_j A_j`.
    pub fn operator(&self) -> CMatrix<T> {
        let u = self.unitary();
        let vals = self.column_values();
        let scaled = CMatrix::from_fn(self.dim, self.dim, |r, c| u[(r, c)] * vals[c]);
        cmatmul(&scaled, &u.adjoint())
    }

    /// Largest violation of `A_i A_j = δ_ij A_j` and `Σ_j A_j = 1`.
    pub fn projector_defect(&self) -> T {
        let projs: Vec<CMatrix<T>> = (0..self.outcomes()).map(|j| self.projector(j)).collect();
        let mut worst = T::zero();
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        for (i, a) in projs.iter().enumerate() {
            sum += a;
            for (j, b) in projs.iter().enumerate() {
                let prod = cmatmul(a, b);
                let target = if i == j { b.clone() } else { CMatrix::zeros(self.dim, self.dim) };
                worst = worst.max(max_abs(&(prod - target)));
            }
        }
        worst.max(max_abs(&(sum - CMatrix::identity(self.dim, self.dim))))
    }
}

/// Probabilities `p(a_j)` of the distinct outcomes of an observable.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenvalueDistribution<T: Real> {
    /// Distinct eigenvalues `a_j`.
    pub outcomes: Vec<T>,
    /// Probabilities `p(a_j)`.
    pub probs: Vec<T>,
}

impl<T: Real> EigenvalueDistribution<T> {
    /// Validates nonnegativity (to `-1e-12`) and normalization (to `1e-10`).
    pub fn new(outcomes: Vec<T>, probs: Vec<T>) -> Result<Self> {
        if outcomes.len() != probs.len() || probs.is_empty() {
            return Err(Error::Dimension("outcomes and probabilities differ in length".into()));
        }
        if probs.iter().any(|&p| p < -tol::<T>(1e-12)) {
            return Err(Error::InvalidState("negative probability".into()));
        }
        let total: T = crate::scalar::compensated_sum(probs.iter().copied());
        if (total - T::one()).abs() > tol(1e-10) {
            return Err(Error::InvalidState(format!("probabilities sum to {total}")));
        }
        Ok(Self { outcomes, probs })
    }

    /// Mean outcome.
    pub fn mean(&self) -> T {
        crate::scalar::compensated_sum(self.outcomes.iter().zip(&self.probs).map(|(&a, &p)| a * p))
    }
}

/// Outcome distribution `p(a_j) = Tr(ρ A_j)`.
pub fn eigenvalue_distribution<T: Real>(rho: &DensityMatrix<T>, obs: &ObservableSpectral<T>) -> Result<EigenvalueDistribution<T>> {
    if rho.dim() != obs.dim() {
        return Err(Error::Dimension(format!("state {} vs observable {}", rho.dim(), obs.dim())));
    }
    let per_column: Vec<T> = match &obs.basis {
        Eigenbasis::Computational(order) => order.iter().map(|&i| rho.m[(i, i)].re).collect(),
        Eigenbasis::Dense(u) => {
            let rv = cmatmul(&rho.m, u);
            (0..obs.dim).map(|c| u.column(c).dotc(&rv.column(c)).re).collect()
        }
    };
    Ok(EigenvalueDistribution { outcomes: obs.values.clone(), probs: group_sum(obs, &per_column) })
}

/// Outcome distribution for a pure state, `p(a_j) = ⟨ψ|A_j|ψ⟩`.
pub fn pure_eigenvalue_distribution<T: Real>(psi: &PureState<T>, obs: &ObservableSpectral<T>) -> Result<EigenvalueDistribution<T>> {
    if psi.dim() != obs.dim() {
        return Err(Error::Dimension(format!("state {} vs observable {}", psi.dim(), obs.dim())));
    }
    let per_column: Vec<T> = match &obs.basis {
        Eigenbasis::Computational(order) => order.iter().map(|&i| psi.amps[i].norm_sqr()).collect(),
        Eigenbasis::Dense(u) => (u.adjoint() * &psi.amps).iter().map(|z| z.norm_sqr()).collect(),
    };
    Ok(EigenvalueDistribution { outcomes: obs.values.clone(), probs: group_sum(obs, &per_column) })
}

fn group_sum<T: Real>(obs: &ObservableSpectral<T>, per_column: &[T]) -> Vec<T> {
    obs.offsets
        .iter()
        .zip(&obs.degeneracies)
        .map(|(&o, &d)| crate::scalar::compensated_sum(per_column[o..o + d].iter().copied()))
        .collect()
}

/// Shannon entropy of an outcome distribution in nats.
pub fn shannon_entropy<T: Real>(dist: &EigenvalueDistribution<T>) -> T {
    let mut acc = KahanSum::default();
    for &p in &dist.probs {
        if p > T::zero() {
            acc.add(-p * p.ln());
        }
    }
    acc.total().max(T::zero())
}

/// Trace distance `½ Σ |λ(ρ − σ)|`.
pub fn trace_distance<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    let diff = &rho.m - &sigma.m;
    let sum = crate::scalar::compensated_sum(herm_eigvals(&diff).into_iter().map(|l| l.abs()));
    Ok((sum * lit(0.5)).min(T::one()))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!("{} vs {}", rho.dim(), sigma.dim())));
    }
    let (vals, vecs) = herm_eig(&rho.m);
    let d = rho.dim();
    let scaled = CMatrix::from_fn(d, d, |r, c| vecs[(r, c)] * vals[c].max(T::zero()).sqrt());
    let sqrt_rho = cmatmul(&scaled, &vecs.adjoint());
    let inner = cmatmul(&cmatmul(&sqrt_rho, &sigma.m), &sqrt_rho);
    let inner = (&inner + inner.adjoint()).unscale(lit(2.0));
    let root: T = crate::scalar::compensated_sum(herm_eigvals(&inner).into_iter().map(|l| l.max(T::zero()).sqrt()));
    Ok((root * root).min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> PureState<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(CVector::from_vec(vec![cx(s), cx(0.0), cx(0.0), cx(s)])).unwrap()
    }

    #[test]
    fn bell_reduced_state_is_maximally_mixed() {
        let rho = bell().density();
        let red = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        let target = DensityMatrix::<f64>::maximally_mixed(2);
        assert!(max_abs(&(red.matrix() - target.matrix())) < 1e-14);
        assert!((von_neumann_entropy(&red).unwrap() - 2f64.ln()).abs() < 1e-12);
        let fast = reduced_state(&bell(), &[2, 2], &[1]).unwrap();
        assert!(max_abs(&(fast.matrix() - target.matrix())) < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let rho = bell().density();
        assert!(matches!(partial_trace(&rho, &[2, 3], &[0]), Err(Error::Dimension(_))));
        assert!(matches!(partial_trace(&rho, &[2, 2], &[]), Err(Error::Dimension(_))));
        assert!(matches!(partial_trace(&rho, &[2, 2], &[2]), Err(Error::Dimension(_))));
    }

    #[test]
    fn density_validation() {
        let bad = CMatrix::<f64>::from_diagonal_element(2, 2, cx(0.7));
        assert!(DensityMatrix::new(bad).is_err());
        let neg = CMatrix::<f64>::from_diagonal(&CVector::from_vec(vec![cx(1.5), cx(-0.5)]));
        assert!(matches!(DensityMatrix::new(neg), Err(Error::InvalidState(_))));
    }

    #[test]
    fn renyi_of_uniform_is_log_dimension() {
        let rho = DensityMatrix::<f64>::maximally_mixed(8);
        assert!((renyi_entropy(&rho, 2.0).unwrap() - 8f64.ln()).abs() < 1e-12);
        assert!(renyi_entropy(&rho, 1.0).is_err());
    }
}
