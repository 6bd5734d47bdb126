//! Hermitian eigendecomposition, unitary evolution, ensembles and level statistics.
//!
//! A decomposition is stored block-diagonally: `diagonalize` splits the operator
//! into the connected components of its sparsity pattern, which for the XXZ chain
//! are the fixed-magnetization sectors. Global eigenvalue order is ascending.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::linalg::{cmatmul, hermiticity_defect, herm_eig, max_abs, sym_eig};
use crate::models::Sector;
use crate::qcore::{DensityMatrix, PureState};
use crate::scalar::{cx, lit, tol, CMatrix, CVector, KahanSum, Real};

/// Eigenvectors of one block, real when the block is real symmetric.
#[derive(Clone, Debug)]
pub enum BlockVectors<T: Real> {
    /// Orthogonal matrix.
    Real(DMatrix<T>),
    /// Unitary matrix.
    Complex(CMatrix<T>),
}

/// Eigenpairs supported on a subset of basis states.
#[derive(Clone, Debug)]
pub struct EigenBlock<T: Real> {
    /// Basis states spanned by the block, ascending.
    pub support: Vec<usize>,
    /// Ascending block eigenvalues.
    pub energies: Vec<T>,
    /// Block eigenvectors as columns.
    pub vectors: BlockVectors<T>,
    /// Magnetization label when the block is an `M_z` sector.
    pub label: Option<i32>,
}

impl<T: Real> EigenBlock<T> {
    fn size(&self) -> usize {
        self.support.len()
    }

    fn entry(&self, r: usize, c: usize) -> Complex<T> {
        match &self.vectors {
            BlockVectors::Real(v) => cx(v[(r, c)]),
            BlockVectors::Complex(v) => v[(r, c)],
        }
    }

    /// `V† x` for `x` restricted to the support.
    fn project(&self, x: &CVector<T>) -> CVector<T> {
        let local = CVector::from_iterator(self.size(), self.support.iter().map(|&s| x[s]));
        match &self.vectors {
            BlockVectors::Real(v) => {
                let re = v.tr_mul(&local.map(|z| z.re));
                let im = v.tr_mul(&local.map(|z| z.im));
                re.zip_map(&im, Complex::new)
            }
            BlockVectors::Complex(v) => v.ad_mul(&local),
        }
    }

    /// `V c` scattered onto the support of `out`.
    fn lift_into(&self, c: &CVector<T>, out: &mut CVector<T>) {
        let local = match &self.vectors {
            BlockVectors::Real(v) => {
                let re = v * c.map(|z| z.re);
                let im = v * c.map(|z| z.im);
                re.zip_map(&im, Complex::new)
            }
            BlockVectors::Complex(v) => v * c,
        };
        for (k, &s) in self.support.iter().enumerate() {
            out[s] = local[k];
        }
    }

    /// `V diag(w) V†` as a dense block.
    fn weighted(&self, w: &[T]) -> CMatrix<T> {
        match &self.vectors {
            BlockVectors::Real(v) => {
                let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * w[c]);
                (scaled * v.transpose()).map(cx)
            }
            BlockVectors::Complex(v) => {
                let scaled = CMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * w[c]);
                cmatmul(&scaled, &v.adjoint())
            }
        }
    }
}

/// Eigendecomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<T: Real> {
    dim: usize,
    blocks: Vec<EigenBlock<T>>,
    energies: Vec<T>,
    order: Vec<(usize, usize)>,
    degenerate: bool,
}

/// Relative gap below which the spectrum is flagged degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

impl<T: Real> SpectralDecomposition<T> {
    /// Assembles a decomposition from blocks covering every basis state once.
    pub fn from_blocks(dim: usize, blocks: Vec<EigenBlock<T>>) -> Result<Self> {
        let mut seen = vec![false; dim];
        for b in &blocks {
            if b.energies.len() != b.size() {
                return Err(Error::Dimension("block eigenvalue count differs from support".into()));
            }
            for &s in &b.support {
                if s >= dim || seen[s] {
                    return Err(Error::Dimension(format!("basis state {s} missing or covered twice")));
                }
                seen[s] = true;
            }
        }
        if seen.iter().any(|&x| !x) {
            return Err(Error::Dimension("blocks do not cover the space".into()));
        }
        let mut order: Vec<(usize, usize)> =
            blocks.iter().enumerate().flat_map(|(b, blk)| (0..blk.size()).map(move |k| (b, k))).collect();
        order.sort_by(|&(a, i), &(b, j)| {
            blocks[a].energies[i].partial_cmp(&blocks[b].energies[j]).unwrap_or(std::cmp::Ordering::Equal).then((a, i).cmp(&(b, j)))
        });
        let energies: Vec<T> = order.iter().map(|&(b, k)| blocks[b].energies[k]).collect();
        let range = energies.last().copied().unwrap_or_else(T::zero) - energies.first().copied().unwrap_or_else(T::zero);
        let degenerate = energies.windows(2).any(|w| w[1] - w[0] < lit::<T>(DEGENERACY_GAP) * range) || (dim > 1 && range == T::zero());
        Ok(Self { dim, blocks, energies, order, degenerate })
    }

    /// Decomposition from explicit eigenpairs; columns must be normalized.
    pub fn from_eigenpairs(energies: Vec<T>, vectors: CMatrix<T>) -> Result<Self> {
        let d = vectors.nrows();
        if vectors.ncols() != d || energies.len() != d {
            return Err(Error::Dimension("eigenpair shapes disagree".into()));
        }
        for c in 0..d {
            if (vectors.column(c).norm_squared() - T::one()).abs() > tol(1e-10) {
                return Err(Error::InvalidOperator(format!("eigenvector {c} is not normalized")));
            }
        }
        let block = EigenBlock { support: (0..d).collect(), energies, vectors: BlockVectors::Complex(vectors), label: None };
        Self::from_blocks(d, vec![block])
    }

    /// Diagonalizes each magnetization sector.
    pub fn from_sectors(sectors: &[Sector<T>]) -> Result<Self> {
        let dim = sectors.iter().map(|s| s.states.len()).sum();
        let blocks = sectors
            .iter()
            .map(|s| {
                let (energies, v) = sym_eig(s.h.clone());
                EigenBlock { support: s.states.clone(), energies, vectors: BlockVectors::Real(v), label: Some(s.mz) }
            })
            .collect();
        Self::from_blocks(dim, blocks)
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Ascending eigenvalues.
    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    /// Whether some gap is below `1e-10` of the spectral range.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Blocks of the decomposition.
    pub fn blocks(&self) -> &[EigenBlock<T>] {
        &self.blocks
    }

    /// Global indices of the eigenvectors belonging to block `b`, ascending in energy.
    pub fn block_indices(&self, b: usize) -> Vec<usize> {
        self.order.iter().enumerate().filter(|(_, &(bb, _))| bb == b).map(|(n, _)| n).collect()
    }

    /// Eigenvector `|E_n⟩`.
    pub fn vector(&self, n: usize) -> CVector<T> {
        let (b, k) = self.order[n];
        let blk = &self.blocks[b];
        let mut v = CVector::zeros(self.dim);
        for (r, &s) in blk.support.iter().enumerate() {
            v[s] = blk.entry(r, k);
        }
        v
    }

    /// Dense unitary whose column `n` is `|E_n⟩`.
    pub fn unitary(&self) -> CMatrix<T> {
        let mut u = CMatrix::zeros(self.dim, self.dim);
        for (n, &(b, k)) in self.order.iter().enumerate() {
            let blk = &self.blocks[b];
            for (r, &s) in blk.support.iter().enumerate() {
                u[(s, n)] = blk.entry(r, k);
            }
        }
        u
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::Dimension(format!("vector of dimension {d} vs operator {}", self.dim)));
        }
        Ok(())
    }

    /// Coefficients `c_n = ⟨E_n|x⟩` in global order.
    pub fn coefficients(&self, x: &CVector<T>) -> Result<CVector<T>> {
        self.check_dim(x.len())?;
        let per_block: Vec<CVector<T>> = self.blocks.iter().map(|b| b.project(x)).collect();
        Ok(CVector::from_iterator(self.dim, self.order.iter().map(|&(b, k)| per_block[b][k])))
    }

    fn per_block(&self, c: &CVector<T>) -> Vec<CVector<T>> {
        let mut out: Vec<CVector<T>> = self.blocks.iter().map(|b| CVector::zeros(b.size())).collect();
        for (n, &(b, k)) in self.order.iter().enumerate() {
            out[b][k] = c[n];
        }
        out
    }

    /// `Σ_n c_n |E_n⟩`.
    pub fn synthesize(&self, c: &CVector<T>) -> Result<CVector<T>> {
        self.check_dim(c.len())?;
        let mut out = CVector::zeros(self.dim);
        for (blk, cb) in self.blocks.iter().zip(self.per_block(c)) {
            blk.lift_into(&cb, &mut out);
        }
        Ok(out)
    }

    /// `H x`.
    pub fn apply(&self, x: &CVector<T>) -> Result<CVector<T>> {
        let mut c = self.coefficients(x)?;
        for (n, z) in c.iter_mut().enumerate() {
            *z *= self.energies[n];
        }
        self.synthesize(&c)
    }

    /// Dense reconstruction `U diag(E) U†`.
    pub fn operator(&self) -> CMatrix<T> {
        self.weighted_sum(&self.energies)
    }

    /// `Σ_n w_n |E_n⟩⟨E_n|` for weights in global order.
    pub fn weighted_sum(&self, w: &[T]) -> CMatrix<T> {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        let mut local: Vec<Vec<T>> = self.blocks.iter().map(|b| vec![T::zero(); b.size()]).collect();
        for (n, &(b, k)) in self.order.iter().enumerate() {
            local[b][k] = w[n];
        }
        for (blk, lw) in self.blocks.iter().zip(local) {
            if lw.iter().all(|&x| x == T::zero()) {
                continue;
            }
            let m = blk.weighted(&lw);
            for (r, &sr) in blk.support.iter().enumerate() {
                for (c, &sc) in blk.support.iter().enumerate() {
                    out[(sr, sc)] = m[(r, c)];
                }
            }
        }
        out
    }

    /// Energy distribution `|c_n|²` of a state.
    pub fn energy_probabilities(&self, psi: &PureState<T>) -> Result<Vec<T>> {
        Ok(self.coefficients(psi.amplitudes())?.iter().map(|z| z.norm_sqr()).collect())
    }

    /// Mean and standard deviation of the energy in a state.
    pub fn energy_moments(&self, psi: &PureState<T>) -> Result<(T, T)> {
        let p = self.energy_probabilities(psi)?;
        let mut m1 = KahanSum::default();
        let mut m2 = KahanSum::default();
        for (n, &pn) in p.iter().enumerate() {
            m1.add(pn * self.energies[n]);
            m2.add(pn * self.energies[n] * self.energies[n]);
        }
        let mean = m1.total();
        Ok((mean, (m2.total() - mean * mean).max(T::zero()).sqrt()))
    }

    /// Precomputes the energy-basis coefficients of `psi0` for repeated evolution.
    pub fn evolver(&self, psi0: &PureState<T>) -> Result<Evolver<'_, T>> {
        self.check_dim(psi0.dim())?;
        let coeffs = self.blocks.iter().map(|b| b.project(psi0.amplitudes())).collect();
        Ok(Evolver { sd: self, coeffs })
    }
}

/// Time evolution of a fixed initial state.
pub struct Evolver<'a, T: Real> {
    sd: &'a SpectralDecomposition<T>,
    coeffs: Vec<CVector<T>>,
}

impl<T: Real> Evolver<'_, T> {
    /// Amplitudes of `e^{-iHt}|ψ0⟩`.
    pub fn amplitudes(&self, t: T) -> CVector<T> {
        let mut out = CVector::zeros(self.sd.dim);
        for (blk, c) in self.sd.blocks.iter().zip(&self.coeffs) {
            let phased = CVector::from_iterator(c.len(), c.iter().zip(&blk.energies).map(|(z, &e)| {
                let ph = -e * t;
                z * Complex::new(ph.cos(), ph.sin())
            }));
            blk.lift_into(&phased, &mut out);
        }
        out
    }

    /// State at time `t`.
    pub fn state(&self, t: T) -> PureState<T> {
        PureState::normalized(self.amplitudes(t)).expect("unitary evolution preserves the norm")
    }

    /// Amplitudes at many times, one column per time, using matrix products per block.
    pub fn trajectory(&self, times: &[T]) -> CMatrix<T> {
        let nt = times.len();
        let mut out = CMatrix::zeros(self.sd.dim, nt);
        for (blk, c) in self.sd.blocks.iter().zip(&self.coeffs) {
            let d = c.len();
            let mut pre = DMatrix::zeros(d, nt);
            let mut pim = DMatrix::zeros(d, nt);
            for (k, &e) in blk.energies.iter().enumerate() {
                for (ti, &t) in times.iter().enumerate() {
                    let ph = -e * t;
                    let z = c[k] * Complex::new(ph.cos(), ph.sin());
                    pre[(k, ti)] = z.re;
                    pim[(k, ti)] = z.im;
                }
            }
            let (re, im) = match &blk.vectors {
                BlockVectors::Real(v) => (v * &pre, v * &pim),
                BlockVectors::Complex(v) => {
                    let (vr, vi) = crate::linalg::split(v);
                    (&vr * &pre - &vi * &pim, &vr * &pim + &vi * &pre)
                }
            };
            for (r, &s) in blk.support.iter().enumerate() {
                for ti in 0..nt {
                    out[(s, ti)] = Complex::new(re[(r, ti)], im[(r, ti)]);
                }
            }
        }
        out
    }
}

/// Union-find over the nonzero pattern; returns components with ascending members.
fn components<T: Real>(h: &CMatrix<T>) -> Vec<Vec<usize>> {
    let n = h.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for c in 0..n {
        for r in 0..n {
            if r != c && h[(r, c)] != Complex::new(T::zero(), T::zero()) {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Eigendecomposition of a Hermitian operator.
pub fn diagonalize<T: Real>(h: &CMatrix<T>) -> Result<SpectralDecomposition<T>> {
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(Error::InvalidOperator("operator must be a nonempty square matrix".into()));
    }
    let scale = max_abs(h).max(T::one());
    if hermiticity_defect(h) > tol::<T>(1e-10) * scale {
        return Err(Error::InvalidOperator("operator is not Hermitian".into()));
    }
    let blocks = components(h)
        .into_iter()
        .map(|support| {
            let d = support.len();
            let sub = CMatrix::from_fn(d, d, |r, c| h[(support[r], support[c])]);
            let sub = (&sub + sub.adjoint()).unscale(lit(2.0));
            if sub.iter().all(|z| z.im == T::zero()) {
                let (energies, v) = sym_eig(sub.map(|z| z.re));
                EigenBlock { support, energies, vectors: BlockVectors::Real(v), label: None }
            } else {
                let (energies, v) = herm_eig(&sub);
                EigenBlock { support, energies, vectors: BlockVectors::Complex(v), label: None }
            }
        })
        .collect();
    SpectralDecomposition::from_blocks(n, blocks)
}

/// `e^{-iHt}|ψ0⟩`; `t = 0` returns the input unchanged.
pub fn evolve<T: Real>(sd: &SpectralDecomposition<T>, psi0: &PureState<T>, t: T) -> Result<PureState<T>> {
    let ev = sd.evolver(psi0)?;
    if t == T::zero() {
        return Ok(psi0.clone());
    }
    Ok(ev.state(t))
}

/// Dephased state `Σ_n |c_n|² |E_n⟩⟨E_n|`.
///
/// For degenerate spectra the dephasing is done in the computed eigenbasis without
/// block projection; callers should consult [`SpectralDecomposition::is_degenerate`].
pub fn diagonal_ensemble<T: Real>(sd: &SpectralDecomposition<T>, psi0: &PureState<T>) -> Result<DensityMatrix<T>> {
    let p = sd.energy_probabilities(psi0)?;
    Ok(DensityMatrix::from_trusted(sd.weighted_sum(&p)))
}

/// Energy interval `[center - width/2, center + width/2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyWindow<T: Real> {
    /// Center `E_0`.
    pub center: T,
    /// Width `δE`.
    pub width: T,
}

impl<T: Real> EnergyWindow<T> {
    /// Window with positive width.
    pub fn new(center: T, width: T) -> Result<Self> {
        if !(width > T::zero()) {
            return Err(Error::Config(format!("window width must be positive, got {width}")));
        }
        Ok(Self { center, width })
    }

    /// Default window: centered on `⟨H⟩_ψ` with width twice the energy spread.
    pub fn around(sd: &SpectralDecomposition<T>, psi: &PureState<T>) -> Result<Self> {
        let (mean, std) = sd.energy_moments(psi)?;
        let range = sd.energies().last().copied().unwrap_or_else(T::zero) - sd.energies()[0];
        let floor = lit::<T>(1e-9) * range.max(T::one());
        Self::new(mean, (std * lit(2.0)).max(floor))
    }

    /// Whether `e` lies in the closed window.
    pub fn contains(&self, e: T) -> bool {
        (e - self.center).abs() <= self.width * lit(0.5)
    }

    /// Global indices of the eigenvalues inside the window.
    pub fn members(&self, sd: &SpectralDecomposition<T>) -> Vec<usize> {
        sd.energies().iter().enumerate().filter(|(_, &e)| self.contains(e)).map(|(n, _)| n).collect()
    }
}

/// Uniform mixture of the eigenstates inside the window.
pub fn microcanonical_state<T: Real>(sd: &SpectralDecomposition<T>, window: &EnergyWindow<T>) -> Result<DensityMatrix<T>> {
    let members = window.members(sd);
    if members.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let w = T::one() / lit(members.len() as f64);
    let mut weights = vec![T::zero(); sd.dim()];
    for n in members {
        weights[n] = w;
    }
    Ok(DensityMatrix::from_trusted(sd.weighted_sum(&weights)))
}

/// Boltzmann weights `e^{-βE_n}/Z`, shifted for stability.
pub fn gibbs_weights<T: Real>(sd: &SpectralDecomposition<T>, beta: T) -> Vec<T> {
    let e = sd.energies();
    let shift = if beta >= T::zero() { e[0] } else { e[e.len() - 1] };
    let raw: Vec<T> = e.iter().map(|&x| (-beta * (x - shift)).exp()).collect();
    let z = crate::scalar::compensated_sum(raw.iter().copied());
    raw.into_iter().map(|x| x / z).collect()
}

/// `ln Z(β)`.
pub fn log_partition<T: Real>(sd: &SpectralDecomposition<T>, beta: T) -> T {
    let e = sd.energies();
    let shift = if beta >= T::zero() { e[0] } else { e[e.len() - 1] };
    let z = crate::scalar::compensated_sum(e.iter().map(|&x| (-beta * (x - shift)).exp()));
    z.ln() - beta * shift
}

/// Gibbs state `e^{-βH}/Z` built in the eigenbasis.
pub fn gibbs_state<T: Real>(sd: &SpectralDecomposition<T>, beta: T) -> Result<DensityMatrix<T>> {
    if !beta.is_finite() {
        return Err(Error::Config("inverse temperature must be finite".into()));
    }
    Ok(DensityMatrix::from_trusted(sd.weighted_sum(&gibbs_weights(sd, beta))))
}

/// Nearest-neighbor spacing statistics of one symmetry sector.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacingStats<T: Real> {
    /// Bulk spacings `E_{n+1} - E_n`.
    pub spacings: Vec<T>,
    /// Mean of `min(s_n, s_{n+1}) / max(s_n, s_{n+1})`.
    pub mean_ratio: T,
    /// Histogram of `s / ⟨s⟩` on `[0, 4)` as `(bin center, density)`.
    pub histogram: Vec<(T, T)>,
    /// Number of bulk levels used.
    pub bulk_levels: usize,
}

/// Minimum number of bulk levels for spacing statistics.
pub const MIN_BULK_LEVELS: usize = 50;

/// Spacing statistics within the largest block of a decomposition.
///
/// For XXZ sectors the largest block is the `M_z = 0` sector (or `M_z = ±1`
/// for odd chains, taking the first).
pub fn level_spacing_stats<T: Real>(sd: &SpectralDecomposition<T>, bulk_fraction: f64) -> Result<SpacingStats<T>> {
    let block = sd
        .blocks()
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.energies.len().cmp(&b.energies.len()).then(j.cmp(i)))
        .map(|(_, b)| b)
        .ok_or(Error::InsufficientSpectrum { have: 0, need: MIN_BULK_LEVELS })?;
    spacing_stats(&block.energies, bulk_fraction)
}

/// Spacing statistics on the central `bulk_fraction` of one sector's levels.
pub fn spacing_stats<T: Real>(levels: &[T], bulk_fraction: f64) -> Result<SpacingStats<T>> {
    if !(bulk_fraction > 0.0 && bulk_fraction <= 1.0) {
        return Err(Error::Config(format!("bulk fraction must lie in (0, 1], got {bulk_fraction}")));
    }
    let mut e = levels.to_vec();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n_bulk = ((e.len() as f64) * bulk_fraction).round() as usize;
    if n_bulk < MIN_BULK_LEVELS {
        return Err(Error::InsufficientSpectrum { have: n_bulk, need: MIN_BULK_LEVELS });
    }
    let start = (e.len() - n_bulk) / 2;
    let bulk = &e[start..start + n_bulk];
    let spacings: Vec<T> = bulk.windows(2).map(|w| w[1] - w[0]).collect();
    let mut ratios = KahanSum::default();
    let mut count = 0usize;
    for w in spacings.windows(2) {
        let (lo, hi) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
        if hi > T::zero() {
            ratios.add(lo / hi);
            count += 1;
        }
    }
    let mean_ratio = if count > 0 { ratios.total() / lit(count as f64) } else { T::zero() };
    let mean_s = crate::scalar::compensated_sum(spacings.iter().copied()) / lit(spacings.len() as f64);
    let bins = 40usize;
    let width = 4.0 / bins as f64;
    let mut counts = vec![0usize; bins];
    if mean_s > T::zero() {
        for &s in &spacings {
            let x = crate::scalar::to_f64(s / mean_s);
            let b = (x / width) as usize;
            if b < bins {
                counts[b] += 1;
            }
        }
    }
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(b, &c)| (lit((b as f64 + 0.5) * width), lit(c as f64 / (spacings.len() as f64 * width))))
        .collect();
    Ok(SpacingStats { spacings, mean_ratio, histogram, bulk_levels: n_bulk })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;

    #[test]
    fn block_detection_and_reconstruction() {
        let mut h = CMatrix::<f64>::zeros(4, 4);
        h[(0, 0)] = cx(1.0);
        h[(1, 2)] = Complex::new(0.0, 1.0);
        h[(2, 1)] = Complex::new(0.0, -1.0);
        h[(3, 3)] = cx(-2.0);
        let sd = diagonalize(&h).unwrap();
        assert_eq!(sd.blocks().len(), 3);
        assert!(max_abs(&(sd.operator() - &h)) < 1e-12);
        assert!(unitarity_defect(&sd.unitary()) < 1e-12);
    }

    #[test]
    fn trajectory_matches_single_time_evolution() {
        let a = CMatrix::<f64>::from_fn(5, 5, |r, c| Complex::new((r + 2 * c) as f64 * 0.3, (r as f64 - c as f64) * 0.1));
        let h = &a + a.adjoint();
        let sd = diagonalize(&h).unwrap();
        let psi = PureState::basis(5, 2).unwrap();
        let ev = sd.evolver(&psi).unwrap();
        let traj = ev.trajectory(&[0.0, 0.7, 3.1]);
        for (k, &t) in [0.0, 0.7, 3.1].iter().enumerate() {
            let direct = ev.amplitudes(t);
            assert!((traj.column(k) - direct).norm() < 1e-12);
        }
    }
}
