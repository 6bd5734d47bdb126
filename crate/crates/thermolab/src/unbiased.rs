//! Mutually unbiased bases, Hamiltonian unbiased bases and observables, and the
//! simplex construction of bases unbiased to a set of states inside eigenspaces.

use nalgebra::{Complex, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{cmatmul, cmatmul_adj, expi_hermitian, unitarity_defect};
use crate::qcore::{DensityMatrix, ObservableSpectral, PureState};
use crate::scalar::{cx, lit, tol, to_f64, CMatrix, CVector, Real};
use crate::spectral::SpectralDecomposition;

/// Orthonormal bases stored as unitaries whose columns are the basis vectors.
#[derive(Clone, Debug)]
pub struct BasisFamily<T: Real> {
    bases: Vec<CMatrix<T>>,
    labels: Vec<String>,
}

impl<T: Real> BasisFamily<T> {
    /// Family from labelled unitaries of a common dimension.
    pub fn new(bases: Vec<CMatrix<T>>, labels: Vec<String>) -> Result<Self> {
        if bases.is_empty() || bases.len() != labels.len() {
            return Err(Error::Dimension("need one label per basis and at least one basis".into()));
        }
        let d = bases[0].nrows();
        for (b, label) in bases.iter().zip(&labels) {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::Dimension(format!("basis {label} is not {d}x{d}")));
            }
            if unitarity_defect(b) > tol::<T>(1e-10) {
                return Err(Error::InvalidOperator(format!("basis {label} is not orthonormal")));
            }
        }
        Ok(Self { bases, labels })
    }

    /// Member bases.
    pub fn bases(&self) -> &[CMatrix<T>] {
        &self.bases
    }

    /// Labels of the member bases.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.bases[0].nrows()
    }

    /// Worst unbiasedness score over all pairs of distinct members.
    pub fn max_pairwise_score(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.bases.len() {
            for j in i + 1..self.bases.len() {
                worst = worst.max(unbiasedness_score(&self.bases[i], &self.bases[j]).expect("members share a dimension"));
            }
        }
        worst
    }

    /// Worst orthonormality defect over the members.
    pub fn max_orthonormality_defect(&self) -> T {
        self.bases.iter().fold(T::zero(), |acc, b| acc.max(unitarity_defect(b)))
    }
}

/// Trial-division primality test.
pub fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Largest prime accepted by [`mub_family_prime`].
pub const MAX_MUB_PRIME: usize = 31;

/// The `p + 1` mutually unbiased bases of a prime dimension.
///
/// Members are the computational basis and the eigenbases of the Weyl
/// operators `X Z^a`, whose vectors have quadratic phases `ω^{a k² + b k}`
/// (for `p = 2` the phases are `i^{a k} (-1)^{b k}`).
pub fn mub_family_prime<T: Real>(p: usize) -> Result<BasisFamily<T>> {
    if !is_prime(p) || p > MAX_MUB_PRIME {
        return Err(Error::Config(format!("dimension {p} is not a prime in [2, {MAX_MUB_PRIME}]")));
    }
    let norm = T::one() / lit::<T>(p as f64).sqrt();
    let root = |num: usize, den: usize| {
        let ang = lit::<T>(2.0 * std::f64::consts::PI * (num % den) as f64 / den as f64);
        Complex::new(ang.cos(), ang.sin()) * norm
    };
    let mut bases = vec![CMatrix::identity(p, p)];
    let mut labels = vec!["computational".to_string()];
    for a in 0..p {
        let basis = CMatrix::from_fn(p, p, |k, b| {
            if p == 2 {
                root(a * k + 2 * b * k, 4)
            } else {
                root(a * k * k + b * k, p)
            }
        });
        bases.push(basis);
        labels.push(format!("weyl-{a}"));
    }
    BasisFamily::new(bases, labels)
}

/// `max_{j,k} |D |⟨a_j|b_k⟩|² - 1|`.
pub fn unbiasedness_score<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<T> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("bases of shapes {:?} and {:?}", a.shape(), b.shape())));
    }
    let d = lit::<T>(a.nrows() as f64);
    let g = cmatmul_adj(a, b);
    Ok(g.iter().fold(T::zero(), |acc, z| acc.max((z.norm_sqr() * d - T::one()).abs())))
}

/// Applies the unitary discrete-Fourier rotation `F_{nk} = ω^{nk}/√D` from the right.
pub fn fourier_rotate<T: Real>(u: &CMatrix<T>) -> CMatrix<T> {
    let d = u.ncols();
    let fft = FftPlanner::<T>::new().plan_fft_inverse(d);
    let scale = T::one() / lit::<T>(d as f64).sqrt();
    let mut t = u.transpose();
    for mut col in t.column_iter_mut() {
        fft.process(col.as_mut_slice());
    }
    t.transpose() * cx(scale)
}

/// Hamiltonian unbiased basis `U F`: every vector has overlap `1/√D` with every eigenvector.
pub fn hub_from_spectrum<T: Real>(sd: &SpectralDecomposition<T>) -> CMatrix<T> {
    fourier_rotate(&sd.unitary())
}

/// Basis together with the eigenvalue assigned to each of its vectors.
#[derive(Clone, Debug)]
pub struct HUOSpec<T: Real> {
    basis: CMatrix<T>,
    eigenvalues: Vec<T>,
}

impl<T: Real> HUOSpec<T> {
    /// Specification from an orthonormal basis and one eigenvalue per vector.
    pub fn new(basis: CMatrix<T>, eigenvalues: Vec<T>) -> Result<Self> {
        if basis.nrows() != basis.ncols() || eigenvalues.len() != basis.ncols() {
            return Err(Error::Dimension("basis and eigenvalue counts disagree".into()));
        }
        if unitarity_defect(&basis) > tol::<T>(1e-10) {
            return Err(Error::InvalidOperator("basis is not orthonormal".into()));
        }
        Ok(Self { basis, eigenvalues })
    }

    /// Specification on the Fourier HUB of a spectrum.
    pub fn from_spectrum(sd: &SpectralDecomposition<T>, eigenvalues: Vec<T>) -> Result<Self> {
        Self::new(hub_from_spectrum(sd), eigenvalues)
    }

    /// Basis vectors as columns.
    pub fn basis(&self) -> &CMatrix<T> {
        &self.basis
    }

    /// Assigned eigenvalues.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }
}

/// `D` eigenvalues split evenly between `+1` and `-1` in a seeded random order
/// (the extra value is `+1` for odd `D`).
pub fn balanced_eigenvalues<T: Real>(d: usize, seed: u64) -> Vec<T> {
    let mut v: Vec<T> = (0..d).map(|k| if k < d.div_ceil(2) { T::one() } else { -T::one() }).collect();
    v.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    v
}

/// Observable `Σ_k a_k |k⟩⟨k|` diagonal in the specified basis.
pub fn build_huo<T: Real>(spec: &HUOSpec<T>) -> Result<ObservableSpectral<T>> {
    ObservableSpectral::from_eigenbasis(&spec.eigenvalues, &spec.basis)
}

/// Energy-basis matrix of the observable with eigenvalues `a` on the Fourier HUB.
///
/// This is the circulant `A_mn = (1/D) Σ_k a_k ω^{(m-n)k}`, computed by one FFT.
pub fn fourier_huo_energy_matrix<T: Real>(a: &[T]) -> CMatrix<T> {
    let d = a.len();
    let mut c: Vec<Complex<T>> = a.iter().map(|&x| cx(x)).collect();
    FftPlanner::<T>::new().plan_fft_inverse(d).process(&mut c);
    let inv = T::one() / lit::<T>(d as f64);
    CMatrix::from_fn(d, d, |m, n| c[(m + d - n) % d] * inv)
}

/// Generalized Gell-Mann generators of `su(n)`, ordered symmetric, antisymmetric, diagonal,
/// normalized to `Tr(γ_a γ_b) = 2 δ_ab`.
pub fn bloch_generators<T: Real>(n: usize) -> Vec<CMatrix<T>> {
    let zero = CMatrix::<T>::zeros(n, n);
    let mut out = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for j in i + 1..n {
            let mut m = zero.clone();
            m[(i, j)] = cx(T::one());
            m[(j, i)] = cx(T::one());
            out.push(m);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut m = zero.clone();
            m[(i, j)] = Complex::new(T::zero(), -T::one());
            m[(j, i)] = Complex::new(T::zero(), T::one());
            out.push(m);
        }
    }
    for l in 1..n {
        let mut m = zero.clone();
        let s = lit::<T>((2.0 / (l * (l + 1)) as f64).sqrt());
        for i in 0..l {
            m[(i, i)] = cx(s);
        }
        m[(l, l)] = cx(-s * lit(l as f64));
        out.push(m);
    }
    out
}

/// Generalized Bloch vector, of unit length for pure states.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochVector<T: Real> {
    /// Coordinates along the generators of [`bloch_generators`].
    pub coords: DVector<T>,
}

impl<T: Real> BlochVector<T> {
    /// Bloch vector of a density matrix: `b_a = √(D/(2(D-1))) Tr(ρ γ_a)`.
    pub fn of_state(rho: &DensityMatrix<T>) -> Self {
        let d = rho.dim();
        let gens = bloch_generators::<T>(d);
        let scale = if d > 1 { lit::<T>((d as f64 / (2.0 * (d as f64 - 1.0))).sqrt()) } else { T::zero() };
        Self { coords: DVector::from_iterator(gens.len(), gens.iter().map(|g| trace_product(rho.matrix(), g).re * scale)) }
    }

    /// Bloch vector of a pure state.
    pub fn of_pure(psi: &PureState<T>) -> Self {
        Self::of_state(&psi.density())
    }

    /// Operator `I/D + √((D-1)/(2D)) b·γ`.
    pub fn operator(&self, d: usize) -> CMatrix<T> {
        let gens = bloch_generators::<T>(d);
        let scale = lit::<T>(((d as f64 - 1.0) / (2.0 * d as f64)).sqrt());
        let mut m = CMatrix::identity(d, d) * cx(T::one() / lit(d as f64));
        for (g, &b) in gens.iter().zip(self.coords.iter()) {
            m += g * cx(b * scale);
        }
        m
    }
}

fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

/// Vertices of a regular simplex: `n` unit columns in `R^{n-1}` summing to zero,
/// with pairwise cosine `-1/(n-1)`.
pub fn regular_simplex<T: Real>(n: usize) -> DMatrix<T> {
    let norm = ((n as f64 - 1.0) / n as f64).sqrt();
    DMatrix::from_fn(n.saturating_sub(1), n, |l, k| {
        let l = l + 1;
        let h = if k < l {
            1.0
        } else if k == l {
            -(l as f64)
        } else {
            0.0
        };
        lit(h / ((l * (l + 1)) as f64).sqrt() / norm)
    })
}

/// Options for [`simplex_unbiased_basis`].
#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    /// Seed of the frame placement.
    pub seed: u64,
    /// Number of seeded placements tried per subspace.
    pub restarts: usize,
    /// Iteration cap of each refinement.
    pub max_iterations: usize,
    /// Required residual of `|⟨ψ|j,k⟩|² - ⟨ψ|Π_j|ψ⟩/D_j`.
    pub tolerance: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { seed: 0, restarts: 24, max_iterations: 300, tolerance: 1e-10 }
    }
}

/// Bases of the eigenspaces, each unbiased to the projections of the given states.
#[derive(Clone, Debug)]
pub struct SimplexBasis<T: Real> {
    /// One `D × D_j` matrix of orthonormal columns per subspace.
    pub bases: Vec<CMatrix<T>>,
    /// Attained residual per subspace.
    pub residuals: Vec<T>,
}

impl<T: Real> SimplexBasis<T> {
    /// All basis vectors side by side as a `D × D` matrix.
    pub fn unitary(&self) -> CMatrix<T> {
        let d = self.bases.iter().map(|b| b.ncols()).sum();
        let mut u = CMatrix::zeros(self.bases.first().map_or(0, |b| b.nrows()), d);
        let mut c0 = 0;
        for b in &self.bases {
            u.columns_mut(c0, b.ncols()).copy_from(b);
            c0 += b.ncols();
        }
        u
    }
}

/// Whether `n(n-1) ≥ M + 1`; one-dimensional subspaces are unbiased trivially.
pub fn simplex_condition(n: usize, m: usize) -> bool {
    n == 1 || n * (n - 1) > m
}

/// Residual `max_{m,k} | |⟨ψ_m|e_k⟩|² - ⟨ψ_m|Π|ψ_m⟩/n |` for orthonormal columns `e_k` spanning `Π`.
pub fn theorem_residual<T: Real>(states: &[PureState<T>], basis: &CMatrix<T>) -> T {
    let n = lit::<T>(basis.ncols() as f64);
    let mut worst = T::zero();
    for psi in states {
        let overlaps = basis.ad_mul(psi.amplitudes());
        let weight = overlaps.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        for z in overlaps.iter() {
            worst = worst.max((z.norm_sqr() - weight / n).abs());
        }
    }
    worst
}

/// Orthonormal bases of consecutive coordinate blocks of sizes `subspace_dims`, each
/// satisfying `|⟨ψ_m|j,k⟩|² = ⟨ψ_m|Π_j|ψ_m⟩/D_j` for every input state.
///
/// Each block starts from regular-simplex Bloch vectors placed in the orthogonal
/// complement of the projected states' Bloch vectors, snapped to the nearest
/// orthonormal basis, then refined by Levenberg-Marquardt over unitary rotations.
pub fn simplex_unbiased_basis<T: Real>(
    states: &[PureState<T>],
    subspace_dims: &[usize],
    opts: &SimplexOptions,
) -> Result<SimplexBasis<T>> {
    let d: usize = subspace_dims.iter().sum();
    if subspace_dims.iter().any(|&n| n == 0) {
        return Err(Error::Dimension("subspace dimensions must be positive".into()));
    }
    if states.iter().any(|s| s.dim() != d) {
        return Err(Error::Dimension(format!("states must have dimension {d}")));
    }
    let m = states.len();
    let bad: Vec<usize> = subspace_dims.iter().enumerate().filter(|(_, &n)| !simplex_condition(n, m)).map(|(j, _)| j).collect();
    if !bad.is_empty() {
        return Err(Error::InfeasibleSubspace(bad));
    }
    let mut bases = Vec::with_capacity(subspace_dims.len());
    let mut residuals = Vec::with_capacity(subspace_dims.len());
    let mut offset = 0;
    for (j, &n) in subspace_dims.iter().enumerate() {
        let projected: Vec<CVector<T>> = states
            .iter()
            .map(|s| s.amplitudes().rows(offset, n).into_owned())
            .filter(|v| v.norm_squared() > lit(1e-14))
            .map(|v| v.normalize())
            .collect();
        let local = subspace_basis(&projected, n, opts, j)?;
        let mut embedded = CMatrix::zeros(d, n);
        embedded.rows_mut(offset, n).copy_from(&local);
        let res = theorem_residual(states, &embedded);
        if to_f64(res) > opts.tolerance.max(to_f64(tol::<T>(0.0))) * 100.0 {
            return Err(Error::Unattained { subspace: j, residual: to_f64(res) });
        }
        bases.push(embedded);
        residuals.push(res);
        offset += n;
    }
    Ok(SimplexBasis { bases, residuals })
}

/// Unbiased basis of `C^n` for unit vectors `phis`.
fn subspace_basis<T: Real>(phis: &[CVector<T>], n: usize, opts: &SimplexOptions, j: usize) -> Result<CMatrix<T>> {
    if n == 1 || phis.is_empty() {
        return Ok(CMatrix::identity(n, n));
    }
    let gens = bloch_generators::<T>(n);
    let complement = bloch_complement(phis, n);
    let simplex = regular_simplex::<T>(n);
    let targets: Vec<CMatrix<T>> = phis
        .iter()
        .map(|p| p * p.adjoint() - CMatrix::identity(n, n) * cx(T::one() / lit(n as f64)))
        .collect();
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    rng.set_stream(j as u64);
    let mut best: Option<(T, CMatrix<T>)> = None;
    for _ in 0..opts.restarts.max(1) {
        let frame = random_frame(&complement, n - 1, &mut rng);
        let facets = &frame * &simplex;
        let mut w = CMatrix::zeros(n, n);
        for k in 0..n {
            let b = BlochVector { coords: facets.column(k).into_owned() };
            let (_, vecs) = crate::linalg::herm_eig(&b.operator(n));
            w.set_column(k, &vecs.column(n - 1));
        }
        let w = lowdin(&w);
        let (res, w) = refine(w, &targets, &gens, opts);
        if best.as_ref().map_or(true, |(r, _)| res < *r) {
            best = Some((res, w));
        }
        if to_f64(best.as_ref().unwrap().0) <= opts.tolerance {
            break;
        }
    }
    Ok(best.expect("at least one restart").1)
}

/// Orthonormal basis of the complement of the Bloch vectors of `phis`.
fn bloch_complement<T: Real>(phis: &[CVector<T>], n: usize) -> DMatrix<T> {
    let ng = n * n - 1;
    let mut b = DMatrix::<T>::zeros(ng, ng);
    for (c, p) in phis.iter().enumerate().take(ng) {
        let psi = PureState::new(p.clone()).expect("unit vector");
        b.set_column(c, &BlochVector::of_pure(&psi).coords);
    }
    let svd = b.svd(true, false);
    let u = svd.u.expect("left singular vectors");
    let smax = svd.singular_values.iter().fold(T::zero(), |a, &s| a.max(s));
    let cut = lit::<T>(1e-10) * smax;
    let keep: Vec<usize> = (0..ng).filter(|&i| svd.singular_values[i] <= cut).collect();
    DMatrix::from_fn(ng, keep.len(), |r, c| u[(r, keep[c])])
}

/// `k` orthonormal columns drawn uniformly inside the span of `basis`.
fn random_frame<T: Real>(basis: &DMatrix<T>, k: usize, rng: &mut ChaCha20Rng) -> DMatrix<T> {
    let c = basis.ncols();
    let g = DMatrix::<T>::from_fn(c, k.min(c), |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        lit(x)
    });
    let q = g.qr().q();
    let mut frame = basis * q;
    if frame.ncols() < k {
        frame = frame.resize_horizontally(k, T::zero());
    }
    frame
}

/// Nearest unitary `W (W†W)^{-1/2}`.
fn lowdin<T: Real>(w: &CMatrix<T>) -> CMatrix<T> {
    let svd = w.clone().svd(true, true);
    cmatmul(&svd.u.expect("u"), &svd.v_t.expect("v_t"))
}

fn residual_vector<T: Real>(w: &CMatrix<T>, targets: &[CMatrix<T>]) -> (DVector<T>, Vec<CMatrix<T>>) {
    let n = w.ncols();
    let ys: Vec<CMatrix<T>> = targets.iter().map(|x| cmatmul(&w.adjoint(), &cmatmul(x, w))).collect();
    let r = DVector::from_iterator(n * targets.len(), ys.iter().flat_map(|y| (0..n).map(move |k| y[(k, k)].re)));
    (r, ys)
}

/// Levenberg-Marquardt on `diag(W† X_m W) = 0` over `W → W exp(i Σ δ_a γ_a)`.
fn refine<T: Real>(mut w: CMatrix<T>, targets: &[CMatrix<T>], gens: &[CMatrix<T>], opts: &SimplexOptions) -> (T, CMatrix<T>) {
    let n = w.ncols();
    let (mut r, mut ys) = residual_vector(&w, targets);
    let mut cost = r.norm_squared();
    let mut mu = lit::<T>(1e-3);
    let stop = lit::<T>(opts.tolerance * 1e-2);
    for _ in 0..opts.max_iterations {
        if r.amax() <= stop {
            break;
        }
        let mut jac = DMatrix::<T>::zeros(r.len(), gens.len());
        for (a, g) in gens.iter().enumerate() {
            for (mi, y) in ys.iter().enumerate() {
                let gy = cmatmul(g, y);
                let yg = cmatmul(y, g);
                for k in 0..n {
                    let comm = gy[(k, k)] - yg[(k, k)];
                    jac[(mi * n + k, a)] = comm.im;
                }
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &r;
        let mut improved = false;
        for _ in 0..12 {
            let mut lhs = jtj.clone();
            for i in 0..lhs.nrows() {
                lhs[(i, i)] += mu * (T::one() + jtj[(i, i)]);
            }
            let Some(step) = lhs.cholesky().map(|c| c.solve(&(-&grad))) else {
                mu *= lit(10.0);
                continue;
            };
            let mut h = CMatrix::zeros(n, n);
            for (g, &s) in gens.iter().zip(step.iter()) {
                h += g * cx(s);
            }
            let trial = lowdin(&cmatmul(&w, &expi_hermitian(&h)));
            let (tr, tys) = residual_vector(&trial, targets);
            let tc = tr.norm_squared();
            if tc < cost {
                w = trial;
                r = tr;
                ys = tys;
                cost = tc;
                mu = (mu * lit(0.3)).max(lit(1e-12));
                improved = true;
                break;
            }
            mu *= lit(10.0);
        }
        if !improved {
            break;
        }
    }
    (r.amax(), w)
}

/// One row of the global-magnetization theorem scan.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremScanRow {
    /// Chain length `N`.
    pub n: usize,
    /// Number of admissible eigenvalues `q(N) = 2 j_max + 1`.
    pub q: usize,
    /// Largest magnetization eigenvalue `j` with `D_j(D_j - 1) ≥ 2^N + 1`.
    pub j_star: usize,
}

/// Exact degeneracy against its relative-entropy estimate at one `(N, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LargeDeviationRow {
    /// Chain length.
    pub n: usize,
    /// Magnetization eigenvalue.
    pub j: usize,
    /// `ln(D_j / 2^N)`.
    pub ln_ratio: f64,
    /// `-N H₂(p(j) ‖ 1/2) ln 2` with `p(j) = (N + j) / 2N`.
    pub ln_estimate: f64,
    /// `|ln_ratio - ln_estimate| / N`.
    pub deviation: f64,
}

/// Output of [`magnetization_theorem_scan`].
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremScan {
    /// Per-size admissibility counts.
    pub rows: Vec<TheoremScanRow>,
    /// Least-squares slope of `q(N)` against `N`.
    pub slope: f64,
    /// Least-squares intercept.
    pub intercept: f64,
    /// Large-deviation comparison for every admissible `(N, j ≥ 0)`.
    pub large_deviation: Vec<LargeDeviationRow>,
}

/// Largest chain length supported by [`magnetization_theorem_scan`].
pub const MAX_SCAN_N: usize = 24;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Degeneracy `D_j = C(N, (N - j)/2)` of the global magnetization eigenvalue `j`.
pub fn magnetization_degeneracy(n: usize, j: usize) -> u128 {
    if j > n || (n - j) % 2 != 0 {
        return 0;
    }
    binomial(n, (n - j) / 2)
}

/// Scan of the dimension condition `D_j(D_j - 1) ≥ 2^N + 1` for the global magnetization.
pub fn magnetization_theorem_scan(ns: &[usize]) -> Result<TheoremScan> {
    if let Some(&bad) = ns.iter().find(|&&n| n == 0 || n > MAX_SCAN_N) {
        return Err(Error::Config(format!("chain length {bad} outside [1, {MAX_SCAN_N}]")));
    }
    let mut rows = Vec::new();
    let mut large_deviation = Vec::new();
    for &n in ns {
        let bound = (1u128 << n) + 1;
        let admissible: Vec<usize> = (0..=n).filter(|&j| {
            let d = magnetization_degeneracy(n, j);
            d > 0 && d * (d - 1) >= bound
        }).collect();
        let j_star = admissible.iter().copied().max().unwrap_or(0);
        let q = if admissible.is_empty() { 0 } else { 2 * j_star + 1 };
        rows.push(TheoremScanRow { n, q, j_star });
        for j in (0..=n).filter(|&j| (n - j) % 2 == 0) {
            let ln_ratio = (magnetization_degeneracy(n, j) as f64).ln() - n as f64 * std::f64::consts::LN_2;
            let p = (n + j) as f64 / (2.0 * n as f64);
            let ln_estimate = -(n as f64) * relative_entropy_bits(p) * std::f64::consts::LN_2;
            large_deviation.push(LargeDeviationRow { n, j, ln_ratio, ln_estimate, deviation: (ln_ratio - ln_estimate).abs() / n as f64 });
        }
    }
    let (slope, intercept) = linear_fit(&rows.iter().map(|r| (r.n as f64, r.q as f64)).collect::<Vec<_>>());
    Ok(TheoremScan { rows, slope, intercept, large_deviation })
}

/// `H₂(p ‖ 1/2)` in bits.
fn relative_entropy_bits(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { x * (2.0 * x).log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    if points.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn generators_are_orthonormal() {
        let g = bloch_generators::<f64>(3);
        assert_eq!(g.len(), 8);
        for (a, ga) in g.iter().enumerate() {
            for (b, gb) in g.iter().enumerate() {
                let t = trace_product(ga, gb);
                assert!((t.re - if a == b { 2.0 } else { 0.0 }).abs() < 1e-12 && t.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bloch_roundtrip_of_pure_state() {
        let psi = PureState::<f64>::normalized(CVector::from_vec(vec![Complex::new(0.3, 0.1), Complex::new(-0.5, 0.2), cx(0.7)])).unwrap();
        let b = BlochVector::of_pure(&psi);
        assert!((b.coords.norm() - 1.0).abs() < 1e-12);
        assert!(max_abs(&(b.operator(3) - psi.density().matrix())) < 1e-12);
    }
}
