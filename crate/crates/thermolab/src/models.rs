//! Hamiltonians, observables, disorder realizations and initial states.
//!
//! Basis conventions: `|0⟩ = |↑_z⟩`, site 0 is the most significant bit of the
//! basis index, `σ_y = [[0, -i], [i, 0]]`, `ħ = 1`.

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{ObservableSpectral, PureState};
use crate::scalar::{cx, lit, CMatrix, CVector, Real};

/// Default ceiling for dense allocations, in bytes.
pub const DEFAULT_MEMORY_BUDGET: usize = 3 << 30;

/// Chain boundary condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Bonds `(i, i+1)` for `i < L-1`.
    #[default]
    Open,
    /// Adds the bond `(L-1, 0)`.
    Periodic,
}

/// Pauli axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// All three axes.
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// Lowercase label.
    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::Config(format!("unknown axis {other:?}"))),
        }
    }
}

/// Parameters of the disordered XXZ chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XXZParams {
    /// Number of sites.
    pub l: usize,
    /// Exchange coupling.
    #[serde(default = "one")]
    pub j: f64,
    /// Anisotropy.
    #[serde(default = "one")]
    pub delta: f64,
    /// Disorder strength; fields are uniform on `[-w, w]`.
    #[serde(default)]
    pub w: f64,
    /// Boundary condition.
    #[serde(default)]
    pub boundary: Boundary,
    /// Master seed of the disorder stream.
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

impl XXZParams {
    /// Isotropic open chain with unit coupling.
    pub fn new(l: usize, w: f64, seed: u64) -> Self {
        Self { l, j: 1.0, delta: 1.0, w, boundary: Boundary::Open, seed }
    }

    /// Checks `L ≥ 2`, `W ≥ 0` and finite couplings.
    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::Config(format!("L must be at least 2, got {}", self.l)));
        }
        if self.l > 30 {
            return Err(Error::Config(format!("L = {} exceeds the supported range", self.l)));
        }
        if !(self.w >= 0.0) || !self.w.is_finite() {
            return Err(Error::Config(format!("W must be a finite nonnegative number, got {}", self.w)));
        }
        if !self.j.is_finite() || !self.delta.is_finite() {
            return Err(Error::Config("J and Delta must be finite".into()));
        }
        Ok(())
    }

    /// Hilbert-space dimension `2^L`.
    pub fn dim(&self) -> usize {
        1usize << self.l
    }

    fn bonds(&self) -> Vec<(usize, usize)> {
        let mut b: Vec<(usize, usize)> = (0..self.l - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic {
            b.push((self.l - 1, 0));
        }
        b
    }
}

/// On-site fields of one disorder realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization<T: Real> {
    /// Fields `B_z^i`.
    pub fields: Vec<T>,
    /// Master seed.
    pub seed: u64,
    /// Realization index.
    pub index: u64,
}

/// Name of the disorder generator recorded in manifests.
pub const DISORDER_RNG: &str = "ChaCha20 keyed by seed, stream = realization index";

/// Draws `L` fields uniform on `[-W, W]`, determined by `(seed, index)` alone.
pub fn draw_disorder<T: Real>(w: f64, l: usize, seed: u64, index: u64) -> Result<DisorderRealization<T>> {
    if !(w >= 0.0) || !w.is_finite() {
        return Err(Error::Config(format!("W must be a finite nonnegative number, got {w}")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let fields = (0..l)
        .map(|_| {
            let u: f64 = rng.random();
            lit(w * (2.0 * u - 1.0))
        })
        .collect();
    Ok(DisorderRealization { fields, seed, index })
}

/// Value of `σ^z` on `site` in basis state `state` (`+1` for bit 0).
#[inline]
pub fn spin_z(state: usize, site: usize, l: usize) -> i32 {
    if (state >> (l - 1 - site)) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Guards a dense `dim × dim` complex allocation against the budget.
pub fn check_dense<T: Real>(dim: usize, count: usize, budget: usize) -> Result<()> {
    let bytes = (dim as u128) * (dim as u128) * (count as u128) * (2 * std::mem::size_of::<T>()) as u128;
    if bytes > budget as u128 {
        return Err(Error::Resource(format!("{count} dense {dim}x{dim} complex matrices need {bytes} bytes, budget {budget}")));
    }
    Ok(())
}

fn diagonal_energy<T: Real>(p: &XXZParams, dis: &DisorderRealization<T>, state: usize, bonds: &[(usize, usize)]) -> T {
    let mut e = T::zero();
    for &(a, b) in bonds {
        e += lit::<T>(p.delta * (spin_z(state, a, p.l) * spin_z(state, b, p.l)) as f64);
    }
    for (i, &bz) in dis.fields.iter().enumerate() {
        e += bz * lit::<T>(spin_z(state, i, p.l) as f64);
    }
    e
}

fn check_fields<T: Real>(p: &XXZParams, dis: &DisorderRealization<T>) -> Result<()> {
    p.validate()?;
    if dis.fields.len() != p.l {
        return Err(Error::Config(format!("{} fields for {} sites", dis.fields.len(), p.l)));
    }
    Ok(())
}

/// Dense XXZ Hamiltonian `Σ J(σxσx + σyσy) + Δ σzσz + Σ B_i σz_i`.
pub fn build_xxz<T: Real>(p: &XXZParams, dis: &DisorderRealization<T>) -> Result<CMatrix<T>> {
    check_fields(p, dis)?;
    let d = p.dim();
    check_dense::<T>(d, 1, DEFAULT_MEMORY_BUDGET)?;
    let bonds = p.bonds();
    let mut h = CMatrix::zeros(d, d);
    let flip = lit::<T>(2.0 * p.j);
    for s in 0..d {
        h[(s, s)] = cx(diagonal_energy(p, dis, s, &bonds));
        for &(a, b) in &bonds {
            if spin_z(s, a, p.l) != spin_z(s, b, p.l) {
                let t = s ^ (1 << (p.l - 1 - a)) ^ (1 << (p.l - 1 - b));
                h[(t, s)] += cx(flip);
            }
        }
    }
    Ok(h)
}

/// XX chain in random fields; rejects `Δ ≠ 0`.
pub fn build_xx_anderson<T: Real>(p: &XXZParams, dis: &DisorderRealization<T>) -> Result<CMatrix<T>> {
    if p.delta != 0.0 {
        return Err(Error::Config(format!("the XX chain requires Delta = 0, got {}", p.delta)));
    }
    build_xxz(p, dis)
}

/// Fixed-magnetization block of the XXZ Hamiltonian (real symmetric).
#[derive(Clone, Debug)]
pub struct Sector<T: Real> {
    /// Eigenvalue of `M_z = Σ σz_i`.
    pub mz: i32,
    /// Basis states of the block, ascending.
    pub states: Vec<usize>,
    /// Block matrix in the order of `states`.
    pub h: DMatrix<T>,
}

/// Number of up spins for a given `M_z`.
fn ups_for(l: usize, mz: i32) -> Option<usize> {
    let twice = l as i32 + mz;
    if twice < 0 || twice % 2 != 0 || twice > 2 * l as i32 {
        None
    } else {
        Some(twice as usize / 2)
    }
}

/// One `M_z` block of the XXZ Hamiltonian.
pub fn xxz_sector<T: Real>(p: &XXZParams, dis: &DisorderRealization<T>, mz: i32) -> Result<Sector<T>> {
    check_fields(p, dis)?;
    let ups = ups_for(p.l, mz).ok_or_else(|| Error::Config(format!("M_z = {mz} impossible for L = {}", p.l)))?;
    let states: Vec<usize> = (0..p.dim()).filter(|s| (p.l - s.count_ones() as usize) == ups).collect();
    let bonds = p.bonds();
    let n = states.len();
    let mut h = DMatrix::zeros(n, n);
    let flip = lit::<T>(2.0 * p.j);
    for (c, &s) in states.iter().enumerate() {
        h[(c, c)] = diagonal_energy(p, dis, s, &bonds);
        for &(a, b) in &bonds {
            if spin_z(s, a, p.l) != spin_z(s, b, p.l) {
                let t = s ^ (1 << (p.l - 1 - a)) ^ (1 << (p.l - 1 - b));
                let r = states.binary_search(&t).expect("flip preserves magnetization");
                h[(r, c)] += flip;
            }
        }
    }
    Ok(Sector { mz, states, h })
}

/// All `M_z` blocks, ordered by increasing `M_z`.
pub fn xxz_sectors<T: Real>(p: &XXZParams, dis: &DisorderRealization<T>) -> Result<Vec<Sector<T>>> {
    (0..=p.l).map(|ups| xxz_sector(p, dis, 2 * ups as i32 - p.l as i32)).collect()
}

/// Single-site Pauli matrix.
pub fn pauli<T: Real>(axis: Axis) -> CMatrix<T> {
    let (o, z) = (T::one(), T::zero());
    let e = |re: T, im: T| Complex::new(re, im);
    match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[e(z, z), e(o, z), e(o, z), e(z, z)]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[e(z, z), e(z, -o), e(z, o), e(z, z)]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[e(o, z), e(z, z), e(z, z), e(-o, z)]),
    }
}

/// Single-site eigenvector of `σ^axis` with eigenvalue `sign`.
pub fn pauli_eigenvector<T: Real>(axis: Axis, up: bool) -> CVector<T> {
    let s: T = lit(std::f64::consts::FRAC_1_SQRT_2);
    let sign = if up { T::one() } else { -T::one() };
    match axis {
        Axis::Z => {
            if up {
                CVector::from_vec(vec![cx(T::one()), cx(T::zero())])
            } else {
                CVector::from_vec(vec![cx(T::zero()), cx(T::one())])
            }
        }
        Axis::X => CVector::from_vec(vec![cx(s), cx(sign * s)]),
        Axis::Y => CVector::from_vec(vec![cx(s), Complex::new(T::zero(), sign * s)]),
    }
}

fn check_site(l: usize, site: usize) -> Result<()> {
    if l == 0 || site >= l {
        return Err(Error::Config(format!("site {site} outside chain of length {l}")));
    }
    Ok(())
}

/// Dense `σ^axis_site ⊗ 1`.
pub fn pauli_operator<T: Real>(l: usize, site: usize, axis: Axis) -> Result<CMatrix<T>> {
    check_site(l, site)?;
    check_dense::<T>(1 << l, 1, DEFAULT_MEMORY_BUDGET)?;
    let left = CMatrix::<T>::identity(1 << site, 1 << site);
    let right = CMatrix::<T>::identity(1 << (l - 1 - site), 1 << (l - 1 - site));
    Ok(left.kronecker(&pauli::<T>(axis)).kronecker(&right))
}

/// Spectral form of `σ^axis_site`.
pub fn local_pauli<T: Real>(l: usize, site: usize, axis: Axis) -> Result<ObservableSpectral<T>> {
    check_site(l, site)?;
    let d = 1usize << l;
    if axis == Axis::Z {
        let diag: Vec<T> = (0..d).map(|s| lit(spin_z(s, site, l) as f64)).collect();
        return ObservableSpectral::from_diagonal(&diag);
    }
    check_dense::<T>(d, 1, DEFAULT_MEMORY_BUDGET)?;
    let dn = pauli_eigenvector::<T>(axis, false);
    let up = pauli_eigenvector::<T>(axis, true);
    let mut basis = CMatrix::zeros(d, d);
    let mut values = vec![T::zero(); d];
    for s in 0..d {
        let bit = (s >> (l - 1 - site)) & 1;
        let local = if bit == 0 { &up } else { &dn };
        values[s] = if bit == 0 { T::one() } else { -T::one() };
        let base = s & !(1 << (l - 1 - site));
        basis[(base, s)] = local[0];
        basis[(base | (1 << (l - 1 - site)), s)] = local[1];
    }
    ObservableSpectral::from_eigenbasis(&values, &basis)
}

/// `M_z = Σ_i σz_i` with eigenvalues `-L, -L+2, …, L`.
pub fn global_magnetization<T: Real>(l: usize) -> Result<ObservableSpectral<T>> {
    if l == 0 || l > 30 {
        return Err(Error::Config(format!("unsupported chain length {l}")));
    }
    let diag: Vec<T> = (0..1usize << l).map(|s| lit((l as i64 - 2 * s.count_ones() as i64) as f64)).collect();
    ObservableSpectral::from_diagonal(&diag)
}

/// Product state from single-site vectors, site 0 first.
pub fn product_state<T: Real>(sites: &[CVector<T>]) -> Result<PureState<T>> {
    let mut amps = CVector::from_vec(vec![cx(T::one())]);
    for v in sites {
        amps = amps.kronecker(v);
    }
    PureState::normalized(amps)
}

/// Néel state with `⟨σ^axis_i⟩ = (-1)^i`.
pub fn neel_state<T: Real>(l: usize, axis: Axis) -> Result<PureState<T>> {
    if l == 0 || l > 30 {
        return Err(Error::Config(format!("unsupported chain length {l}")));
    }
    let sites: Vec<CVector<T>> = (0..l).map(|i| pauli_eigenvector(axis, i % 2 == 0)).collect();
    product_state(&sites)
}

/// `σ^axis_site` applied to every column of `v` without forming the operator.
pub fn apply_pauli<T: Real>(l: usize, site: usize, axis: Axis, v: &CMatrix<T>) -> Result<CMatrix<T>> {
    if site >= l || v.nrows() != 1 << l {
        return Err(Error::Config(format!("site {site} or row count {} incompatible with L = {l}", v.nrows())));
    }
    let bit = 1usize << (l - 1 - site);
    let i = Complex::new(T::zero(), T::one());
    Ok(CMatrix::from_fn(v.nrows(), v.ncols(), |r, c| {
        let up = r & bit == 0;
        match axis {
            Axis::Z => {
                if up {
                    v[(r, c)]
                } else {
                    -v[(r, c)]
                }
            }
            Axis::X => v[(r ^ bit, c)],
            Axis::Y => {
                if up {
                    -i * v[(r ^ bit, c)]
                } else {
                    i * v[(r ^ bit, c)]
                }
            }
        }
    }))
}
