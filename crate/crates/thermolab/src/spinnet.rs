//! Exact SU(2) intertwiner combinatorics and typicality estimates for spin networks.
//!
//! Spins are stored as twice-spin integers. Multiplicities, dimensions and weights
//! are exact big integers or rationals; logarithms are taken from the exact values
//! and accumulated in `f64` with compensated summation.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::KahanSum;

/// A spin `j` stored as the integer `2j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TwiceSpin(pub u32);

impl TwiceSpin {
    /// Spin `twice / 2`.
    pub const fn new(twice: u32) -> Self {
        Self(twice)
    }

    /// Spin value as a float.
    pub fn spin(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// Representation dimension `2j + 1`.
    pub fn dim(self) -> u64 {
        u64::from(self.0) + 1
    }

    /// Whether the spin is an integer.
    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl fmt::Display for TwiceSpin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Natural logarithm of a positive big integer.
pub fn big_ln(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    let shift = bits.saturating_sub(64);
    let top = (n >> shift).to_u64().expect("fits in 64 bits") as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Binomial `C(n, m)` with `C(n, 0) = 1` for every `n` and `C(n, m) = 0` for `0 ≤ n < m`.
pub fn binomial(n: i64, m: i64) -> Result<BigUint> {
    if m < 0 {
        return Ok(BigUint::zero());
    }
    if m == 0 {
        return Ok(BigUint::one());
    }
    if n < 0 {
        return Err(Error::Config(format!("binomial C({n}, {m}) with negative upper index")));
    }
    if n < m {
        return Ok(BigUint::zero());
    }
    let m = m.min(n - m) as u64;
    let n = n as u64;
    let mut acc = BigUint::one();
    for i in 0..m {
        acc *= n - i;
        acc /= i + 1;
    }
    Ok(acc)
}

/// Exact multiplicities `^j d_k^n` of spin `k` in the `n`-fold tensor power of spin `j`.
#[derive(Clone, Debug)]
pub struct FusionTable {
    j: TwiceSpin,
    kmax: TwiceSpin,
    rows: Vec<Vec<BigUint>>,
}

impl FusionTable {
    /// Table for powers `0..=n_max`, keeping every reachable `k`.
    pub fn new(j: TwiceSpin, n_max: usize) -> Self {
        let tj = j.0 as usize;
        let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
        for n in 1..=n_max {
            let prev = &rows[n - 1];
            let mut next = vec![BigUint::zero(); n * tj + 1];
            for (k, c) in prev.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mut k2 = k.abs_diff(tj);
                while k2 <= k + tj {
                    next[k2] += c;
                    k2 += 2;
                }
            }
            rows.push(next);
        }
        Self { j, kmax: TwiceSpin((n_max * tj) as u32), rows }
    }

    /// Table for powers `0..=n`, truncated to `k ≤ kmax` after exact construction.
    pub fn truncated(j: TwiceSpin, n: usize, kmax: TwiceSpin) -> Self {
        let mut t = Self::new(j, n);
        for row in &mut t.rows {
            row.truncate(kmax.0 as usize + 1);
        }
        t.kmax = kmax;
        t
    }

    /// Spin being fused.
    pub fn j(&self) -> TwiceSpin {
        self.j
    }

    /// Largest stored power.
    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// Largest stored `k`.
    pub fn kmax(&self) -> TwiceSpin {
        self.kmax
    }

    /// `^j d_k^n`, zero outside the table.
    pub fn get(&self, n: usize, k: TwiceSpin) -> BigUint {
        self.rows.get(n).and_then(|r| r.get(k.0 as usize)).cloned().unwrap_or_default()
    }

    /// Row `n`, indexed by twice-spin `k`.
    pub fn row(&self, n: usize) -> &[BigUint] {
        &self.rows[n]
    }

    /// `Σ_k (2k + 1) ^j d_k^n`.
    pub fn dimension_sum(&self, n: usize) -> BigUint {
        self.rows[n].iter().enumerate().map(|(k, c)| c * (k as u64 + 1)).sum()
    }
}

/// Exact multiplicity table for powers up to `n` and spins up to `kmax`.
pub fn fusion_multiplicities(j: TwiceSpin, n: usize, kmax: TwiceSpin) -> Result<FusionTable> {
    if n == 0 {
        return Err(Error::Config("tensor power must be at least 1".into()));
    }
    Ok(FusionTable::truncated(j, n, kmax))
}

/// `(2/π) ∫_0^π sin θ sin((2k+1)θ) (sin((2j+1)θ)/sin θ)^n dθ` by the trapezoid rule,
/// which is exact for the trigonometric polynomial integrand.
pub fn character_integral(j: TwiceSpin, n: usize, k: TwiceSpin) -> f64 {
    let degree = 2 + k.0 as usize + n * j.0 as usize;
    let steps = degree + 2;
    let h = std::f64::consts::PI / steps as f64;
    let mut acc = KahanSum::default();
    for i in 1..steps {
        let th = i as f64 * h;
        let chi = (f64::from(j.0 + 1) * th).sin() / th.sin();
        acc.add(th.sin() * (f64::from(k.0 + 1) * th).sin() * chi.powi(n as i32));
    }
    2.0 / std::f64::consts::PI * acc.total() * h
}

/// `ln` of `(2j+1)^n (k+1) / [j(j+1) n]^{3/2}`, with `j` and `k` in spin units.
pub fn asymptotic_multiplicity(j: TwiceSpin, n: usize, k: TwiceSpin) -> Result<f64> {
    if j.0 == 0 || n == 0 {
        return Err(Error::Config("asymptotic multiplicity needs j > 0 and n ≥ 1".into()));
    }
    let js = j.spin();
    Ok(n as f64 * (2.0 * js + 1.0).ln() + (k.spin() + 1.0).ln() - 1.5 * (js * (js + 1.0) * n as f64).ln())
}

/// `d_R = C(N+J0-1, J0) C(N+J0-2, J0) / (J0+1)` for integer total area `J0`.
pub fn intertwiner_dim(n: u64, j0: u64) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::Config("need at least one leg".into()));
    }
    let (n, j) = (n as i64, j0 as i64);
    let num = binomial(n + j - 1, j)? * binomial(n + j - 2, j)?;
    let (q, r) = num.div_rem(&BigUint::from(j0 + 1));
    debug_assert!(r.is_zero());
    Ok(q)
}

/// Invariant-subspace dimension summed over all spin assignments with `Σ j_i = J0`,
/// enumerated by fusion; accepts half-integer areas.
pub fn intertwiner_dim_enumerated(n: usize, twice_j0: u32) -> BigUint {
    // Recursion over legs on (remaining twice-area, current twice-spin) with multiplicities.
    let a = twice_j0 as usize;
    let mut layer: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); a + 1]; a + 1];
    layer[0][0] = BigUint::one();
    for _ in 0..n {
        let mut next = vec![vec![BigUint::zero(); a + 1]; a + 1];
        for used in 0..=a {
            for k in 0..=used {
                let c = &layer[used][k];
                if c.is_zero() {
                    continue;
                }
                for tj in 0..=(a - used) {
                    let mut k2 = k.abs_diff(tj);
                    while k2 <= (k + tj).min(a) {
                        next[used + tj][k2] += c;
                        k2 += 2;
                    }
                }
            }
        }
        layer = next;
    }
    layer[a][0].clone()
}

/// `D_(Q)(x, y) = (2x+1)/(x+y+1) C(Q+y+x-1, x+y) C(Q+y-x-2, y-x)`: the number of `Q`-leg
/// spin-`x` multiplets with total area `y`.
pub fn dfunction(q: u64, x: TwiceSpin, y: TwiceSpin) -> Result<BigUint> {
    if (x.0 + y.0) % 2 != 0 || y.0 < x.0 {
        return Err(Error::Config(format!("D-function needs y ≥ x with x + y integral, got x = {x}, y = {y}")));
    }
    let s = i64::from((x.0 + y.0) / 2);
    let d = i64::from((y.0 - x.0) / 2);
    let q = q as i64;
    let num = binomial(q + s - 1, s)? * binomial(q + d - 2, d)? * u64::from(x.0 + 1);
    let (quot, rem) = num.div_rem(&BigUint::from((s + 1) as u64));
    if !rem.is_zero() {
        return Err(Error::Config(format!("D-function not integral at Q = {q}, x = {x}, y = {y}")));
    }
    Ok(quot)
}

/// Cosmological representation cutoff `J_max ≈ 3 × 10^124`.
pub const COSMOLOGICAL_JMAX: f64 = 3e124;

/// `N` legs of total integer area `J0`, of which `k` form the system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntertwinerSpec {
    /// Leg count `N`.
    pub n: u64,
    /// System legs `k`.
    pub k: u64,
    /// Total area `J0`.
    pub j0: u64,
    /// Representation cutoff `J_max`.
    #[serde(default = "default_jmax")]
    pub jmax: f64,
}

fn default_jmax() -> f64 {
    COSMOLOGICAL_JMAX
}

impl IntertwinerSpec {
    /// Specification with the cosmological cutoff.
    pub fn new(n: u64, k: u64, j0: u64) -> Self {
        Self { n, k, j0, jmax: COSMOLOGICAL_JMAX }
    }

    /// Checks `1 ≤ k < N` and `J_max ≥ J0`.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k >= self.n {
            return Err(Error::Config(format!("need 1 ≤ k < N, got k = {}, N = {}", self.k, self.n)));
        }
        if !(self.jmax >= self.j0 as f64) {
            return Err(Error::Config(format!("cutoff {} below total area {}", self.jmax, self.j0)));
        }
        Ok(())
    }

    /// Mean spin per leg `j0 = J0 / N`.
    pub fn mean_spin(&self) -> f64 {
        self.j0 as f64 / self.n as f64
    }
}

/// One `(J_S, |J_S|)` sector of the reduced surface state.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceRow {
    /// System area `J_S`.
    pub area: TwiceSpin,
    /// Closure defect `|J_S|`.
    pub defect: TwiceSpin,
    /// Eigenvalue `W_E / (d_{|J_S|} d_R)`.
    pub weight: BigRational,
    /// Degeneracy `W_S d_{|J_S|}`.
    pub multiplicity: BigUint,
}

/// Reduced state of `k` legs of a random intertwiner.
#[derive(Clone, Debug)]
pub struct CanonicalSurfaceState {
    /// Specification.
    pub spec: IntertwinerSpec,
    /// Intertwiner-space dimension `d_R`.
    pub d_r: BigUint,
    /// Sectors with nonzero weight.
    pub rows: Vec<SurfaceRow>,
    /// Von Neumann entropy in nats.
    pub entropy: f64,
}

impl CanonicalSurfaceState {
    /// `Σ multiplicity · weight` in exact arithmetic.
    pub fn total_probability(&self) -> BigRational {
        self.rows.iter().fold(BigRational::zero(), |acc, r| acc + &r.weight * BigRational::from_integer(BigInt::from(r.multiplicity.clone())))
    }

    /// `-Σ p ln p` recomputed from the exact weights.
    pub fn entropy_from_rows(&self) -> f64 {
        let mut acc = KahanSum::default();
        for r in &self.rows {
            let ln_w = big_ln(r.weight.numer().magnitude()) - big_ln(r.weight.denom().magnitude());
            let ln_m = big_ln(&r.multiplicity);
            acc.add(-(ln_m + ln_w).exp() * ln_w);
        }
        acc.total()
    }

    /// `⟨2 J_S⟩`.
    pub fn mean_twice_area(&self) -> f64 {
        let mut acc = KahanSum::default();
        for r in &self.rows {
            let ln_p = big_ln(&r.multiplicity) + big_ln(r.weight.numer().magnitude()) - big_ln(r.weight.denom().magnitude());
            acc.add(ln_p.exp() * f64::from(r.area.0));
        }
        acc.total()
    }
}

/// Sector data `(J_S, |J_S|, W_S, W_E)` with `W_S W_E ≠ 0`, in ascending `(J_S, |J_S|)`.
fn surface_sectors(spec: &IntertwinerSpec, area: u32) -> Result<Vec<(TwiceSpin, BigUint, BigUint)>> {
    let total = 2 * spec.j0 as u32;
    let env = total - area;
    let mut out = Vec::new();
    let mut x = area % 2;
    while x <= area.min(env) {
        let ws = dfunction(spec.k, TwiceSpin(x), TwiceSpin(area))?;
        if !ws.is_zero() {
            let we = dfunction(spec.n - spec.k, TwiceSpin(x), TwiceSpin(env))?;
            if !we.is_zero() {
                out.push((TwiceSpin(x), ws, we));
            }
        }
        x += 2;
    }
    Ok(out)
}

/// Exact reduced state over all `0 ≤ J_S ≤ J0` and admissible `|J_S| ≤ min(J_S, J0 - J_S)`.
pub fn canonical_surface_state(spec: &IntertwinerSpec) -> Result<CanonicalSurfaceState> {
    spec.validate()?;
    let d_r = intertwiner_dim(spec.n, spec.j0)?;
    let ln_dr = big_ln(&d_r);
    let d_r_int = BigInt::from(d_r.clone());
    let mut rows = Vec::new();
    let mut entropy = KahanSum::default();
    for area in 0..=(2 * spec.j0 as u32) {
        for (x, ws, we) in surface_sectors(spec, area)? {
            let dx = BigUint::from(x.dim());
            let weight = BigRational::new(BigInt::from(we.clone()), BigInt::from(dx.clone()) * &d_r_int);
            let ln_w = big_ln(&we) - (x.dim() as f64).ln() - ln_dr;
            entropy.add(-(big_ln(&ws) + big_ln(&we) - ln_dr).exp() * ln_w);
            rows.push(SurfaceRow { area: TwiceSpin(area), defect: x, weight, multiplicity: ws * dx });
        }
    }
    Ok(CanonicalSurfaceState { spec: *spec, d_r, rows, entropy: entropy.total() })
}

/// Entropy and moments of the surface state without storing its rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceSummary {
    /// `ln d_R`.
    pub ln_dr: f64,
    /// Von Neumann entropy in nats.
    pub entropy: f64,
    /// `⟨2 J_S⟩`.
    pub mean_twice_area: f64,
    /// Whether `Σ W_S W_E = d_R` holds exactly.
    pub normalized: bool,
    /// Number of sectors with nonzero weight.
    pub sectors: usize,
}

/// Streams [`canonical_surface_state`], in parallel over `J_S` with exact integer normalization.
pub fn canonical_surface_summary(spec: &IntertwinerSpec) -> Result<SurfaceSummary> {
    spec.validate()?;
    let d_r = intertwiner_dim(spec.n, spec.j0)?;
    let ln_dr = big_ln(&d_r);
    let parts: Vec<Result<(BigUint, f64, f64, usize)>> = (0..=(2 * spec.j0 as u32))
        .into_par_iter()
        .map(|area| {
            let mut norm = BigUint::zero();
            let mut s = KahanSum::default();
            let mut m = KahanSum::default();
            let sectors = surface_sectors(spec, area)?;
            for (x, ws, we) in &sectors {
                norm += ws * we;
                let p = (big_ln(ws) + big_ln(we) - ln_dr).exp();
                s.add(-p * (big_ln(we) - (x.dim() as f64).ln() - ln_dr));
                m.add(p * f64::from(area));
            }
            Ok((norm, s.total(), m.total(), sectors.len()))
        })
        .collect();
    let mut norm = BigUint::zero();
    let mut entropy = KahanSum::default();
    let mut mean = KahanSum::default();
    let mut sectors = 0;
    for part in parts {
        let (n, s, m, c) = part?;
        norm += n;
        entropy.add(s);
        mean.add(m);
        sectors += c;
    }
    Ok(SurfaceSummary { ln_dr, entropy: entropy.total(), mean_twice_area: mean.total(), normalized: norm == d_r, sectors })
}

/// Log-domain typicality report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalityReport {
    /// `ln d_S` with `d_S = (2J_max+1)^k (J_max+1)^k`.
    pub ln_ds: f64,
    /// `ln d_R`.
    pub ln_dr: f64,
    /// `ln(d_S / √d_R)`.
    pub ln_ratio: f64,
    /// `ln J_max`, the threshold of `J0/k`.
    pub area_threshold: f64,
    /// `J0/k > ln J_max`.
    pub area_cut: bool,
    /// `2 ln J_max`, the threshold of `(N/k) ln j0`.
    pub spin_threshold: f64,
    /// `(N/k) ln j0 > 2 ln J_max`.
    pub spin_cut: bool,
    /// Accuracy `ε` of the concentration bound.
    pub epsilon: f64,
    /// `log10` of the exponent `(2/(9π³)) d_R ε²`.
    pub log10_levy_exponent: f64,
    /// `ln B_ε = ln 4 - (2/(9π³)) d_R ε²`, `-∞` when it underflows.
    pub ln_levy: f64,
    /// Whether the bound `d_S/√d_R` is below one.
    pub typical: bool,
}

/// Prefactor `2/(9π³)` of the concentration exponent.
pub fn levy_prefactor() -> f64 {
    2.0 / (9.0 * std::f64::consts::PI.powi(3))
}

/// Bound on the distance of the reduced state from the canonical state and its concentration.
pub fn typicality_bound(spec: &IntertwinerSpec, epsilon: f64) -> Result<TypicalityReport> {
    spec.validate()?;
    if !(epsilon > 0.0) {
        return Err(Error::Config("ε must be positive".into()));
    }
    let ln_dr = big_ln(&intertwiner_dim(spec.n, spec.j0)?);
    let k = spec.k as f64;
    let ln_ds = k * ((2.0 * spec.jmax + 1.0).ln() + (spec.jmax + 1.0).ln());
    let ln_ratio = ln_ds - 0.5 * ln_dr;
    let ln_jmax = spec.jmax.ln();
    let ln10 = std::f64::consts::LN_10;
    let log10_exp = levy_prefactor().log10() + ln_dr / ln10 + 2.0 * epsilon.log10();
    let exponent = 10f64.powf(log10_exp);
    Ok(TypicalityReport {
        ln_ds,
        ln_dr,
        ln_ratio,
        area_threshold: ln_jmax,
        area_cut: spec.j0 as f64 / k > ln_jmax,
        spin_threshold: 2.0 * ln_jmax,
        spin_cut: spec.n as f64 / k * spec.mean_spin().ln() > 2.0 * ln_jmax,
        epsilon,
        log10_levy_exponent: log10_exp,
        ln_levy: if exponent.is_finite() { 4f64.ln() - exponent } else { f64::NEG_INFINITY },
        typical: ln_ratio < 0.0,
    })
}

/// Label of the mean-spin regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `j0 ≤ 0.2`.
    Small,
    /// `0.2 < j0 < 5`.
    OrderOne,
    /// `j0 ≥ 5`.
    Large,
}

impl Regime {
    /// Regime of a mean spin.
    pub fn of(j0: f64) -> Self {
        if j0 <= 0.2 {
            Self::Small
        } else if j0 >= 5.0 {
            Self::Large
        } else {
            Self::OrderOne
        }
    }
}

/// Largest number of `(J_S, |J_S|)` sectors enumerated exactly.
pub const MAX_SURFACE_SECTORS: u64 = 50_000_000;

/// Exact entropy next to the asymptotic formulas of each regime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// Regime label, advisory.
    pub regime: Regime,
    /// Exact entropy, when enumerable.
    pub exact: Option<f64>,
    /// `β ⟨2J_S⟩` with `β = 1 + ln((N-k)/J0)`.
    pub area_law: f64,
    /// `2k(1 + ln(J0/N))`.
    pub large_spin: f64,
    /// `2k - 3`.
    pub order_one: f64,
    /// Relative deviation of the exact value from the regime's formula.
    pub relative_deviation: Option<f64>,
    /// `α` solving `S = k ln(2 α² j0²)` for the exact entropy.
    pub alpha: Option<f64>,
    /// Whether the exact enumeration was skipped.
    pub asymptotic_only: bool,
}

/// Exact surface entropy paired with the asymptotic formulas.
pub fn surface_entropy_regimes(spec: &IntertwinerSpec) -> Result<RegimeReport> {
    spec.validate()?;
    let j0 = spec.mean_spin();
    let k = spec.k as f64;
    let regime = Regime::of(j0);
    let sectors = (2 * spec.j0 + 1) * (spec.j0 + 1);
    let summary = if sectors <= MAX_SURFACE_SECTORS { Some(canonical_surface_summary(spec)?) } else { None };
    let mean_area = summary.as_ref().map_or(2.0 * k * j0, |s| s.mean_twice_area);
    let beta = 1.0 + ((spec.n - spec.k) as f64 / spec.j0 as f64).ln();
    let area_law = beta * mean_area;
    let large_spin = 2.0 * k * (1.0 + j0.ln());
    let order_one = 2.0 * k - 3.0;
    let exact = summary.as_ref().map(|s| s.entropy);
    let reference = match regime {
        Regime::Small => area_law,
        Regime::OrderOne => order_one,
        Regime::Large => large_spin,
    };
    Ok(RegimeReport {
        regime,
        exact,
        area_law,
        large_spin,
        order_one,
        relative_deviation: exact.map(|s| (s - reference).abs() / s.abs()),
        alpha: exact.map(|s| ((s / k).exp() / (2.0 * j0 * j0)).sqrt()),
        asymptotic_only: summary.is_none(),
    })
}

/// Flower graph with `E` boundary edges and `L` loops of spin `j0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowerGraphSpec {
    /// Boundary edges `E`.
    pub e: usize,
    /// Independent loops `L`.
    pub l: usize,
    /// Edge spin.
    pub j0: TwiceSpin,
}

impl FlowerGraphSpec {
    /// Checks `E ≥ 1`.
    pub fn validate(&self) -> Result<()> {
        if self.e == 0 {
            return Err(Error::Config("need at least one boundary edge".into()));
        }
        Ok(())
    }

    /// Total legs `E + 2L` at the vertex.
    pub fn legs(&self) -> usize {
        self.e + 2 * self.l
    }
}

/// One spin sector of the boundary state.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryRow {
    /// Total boundary spin `k`.
    pub k: TwiceSpin,
    /// Eigenvalue `W_k = ^{j0}d_k^{2L} / (d_FR (2k+1))`.
    pub weight: BigRational,
    /// Degeneracy `(2k+1) ^{j0}d_k^E`.
    pub multiplicity: BigUint,
}

/// Exact reduced state of the boundary of a flower graph.
#[derive(Clone, Debug)]
pub struct BoundaryCanonicalState {
    /// Specification.
    pub spec: FlowerGraphSpec,
    /// `d_FR = ^{j0}d_0^{E+2L}`.
    pub d_fr: BigUint,
    /// Sectors with nonzero weight.
    pub rows: Vec<BoundaryRow>,
}

impl BoundaryCanonicalState {
    /// `Σ multiplicity · weight` in exact arithmetic.
    pub fn total_probability(&self) -> BigRational {
        self.rows.iter().fold(BigRational::zero(), |acc, r| acc + &r.weight * BigRational::from_integer(BigInt::from(r.multiplicity.clone())))
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> f64 {
        let mut acc = KahanSum::default();
        for r in &self.rows {
            let ln_w = big_ln(r.weight.numer().magnitude()) - big_ln(r.weight.denom().magnitude());
            acc.add(-(big_ln(&r.multiplicity) + ln_w).exp() * ln_w);
        }
        acc.total()
    }

    /// `W_k` as a float, zero when `k` carries no weight.
    pub fn weight_f64(&self, k: TwiceSpin) -> f64 {
        self.rows.iter().find(|r| r.k == k).map_or(0.0, |r| {
            (big_ln(r.weight.numer().magnitude()) - big_ln(r.weight.denom().magnitude())).exp()
        })
    }
}

/// Largest `(E + 2L) log2(2j0 + 1)` handled exactly.
pub const MAX_BOUNDARY_BITS: f64 = 2.0e5;

/// Exact boundary state, entropy and the leading-order bound.
#[derive(Clone, Debug)]
pub struct BoundaryReport {
    /// Exact state, absent when over budget.
    pub state: Option<BoundaryCanonicalState>,
    /// Exact entropy.
    pub exact_entropy: Option<f64>,
    /// `E ln(2j0+1) - (3/2) ln(1 + E/(2L))`.
    pub asymptotic_entropy: f64,
    /// Exact `ln(d_∂R / √d_FR)` with `d_∂R = (2j0+1)^E`.
    pub exact_ln_bound: Option<f64>,
    /// `(E/2 - L) ln(2j0+1) + (3/4) ln(j0(j0+1)(E+2L))`.
    pub asymptotic_ln_bound: f64,
    /// `2L > E`.
    pub below_threshold: bool,
}

/// Exact boundary state from fusion multiplicities.
pub fn boundary_state(spec: &FlowerGraphSpec) -> Result<BoundaryCanonicalState> {
    spec.validate()?;
    let table = FusionTable::new(spec.j0, spec.legs().max(2 * spec.l).max(spec.e));
    let d_fr = table.get(spec.legs(), TwiceSpin(0));
    if d_fr.is_zero() {
        return Err(Error::Config(format!("no invariant subspace for E = {}, L = {}, j0 = {}", spec.e, spec.l, spec.j0)));
    }
    let d_fr_int = BigInt::from(d_fr.clone());
    let rows = table
        .row(spec.e)
        .iter()
        .enumerate()
        .filter_map(|(k, de)| {
            let dl = table.get(2 * spec.l, TwiceSpin(k as u32));
            if de.is_zero() || dl.is_zero() {
                return None;
            }
            let dk = k as u64 + 1;
            Some(BoundaryRow {
                k: TwiceSpin(k as u32),
                weight: BigRational::new(BigInt::from(dl), &d_fr_int * BigInt::from(dk)),
                multiplicity: de * dk,
            })
        })
        .collect();
    Ok(BoundaryCanonicalState { spec: *spec, d_fr, rows })
}

/// Leading-order `ln(d_∂R / √d_FR)`.
pub fn asymptotic_boundary_bound(spec: &FlowerGraphSpec) -> f64 {
    let j = spec.j0.spin();
    (spec.e as f64 / 2.0 - spec.l as f64) * (2.0 * j + 1.0).ln() + 0.75 * (j * (j + 1.0) * spec.legs() as f64).ln()
}

/// Leading-order boundary entropy.
pub fn asymptotic_boundary_entropy(spec: &FlowerGraphSpec) -> f64 {
    let j = spec.j0.spin();
    spec.e as f64 * (2.0 * j + 1.0).ln() - 1.5 * (1.0 + spec.e as f64 / (2.0 * spec.l as f64)).ln()
}

/// Leading-order `W_k` up to the `k`-independent prefactor `(2j0+1)^{-E} ((E+2L)/2L)^{3/2}`:
/// the factor `(k+1)/(2k+1)` with `k` in spin units.
pub fn asymptotic_weight_factor(k: TwiceSpin) -> f64 {
    (k.spin() + 1.0) / (2.0 * k.spin() + 1.0)
}

/// Boundary state, entropy and bound, falling back to asymptotics over budget.
pub fn boundary_canonical_state(spec: &FlowerGraphSpec) -> Result<BoundaryReport> {
    spec.validate()?;
    let bits = spec.legs() as f64 * (spec.j0.dim() as f64).log2();
    let state = if bits <= MAX_BOUNDARY_BITS { Some(boundary_state(spec)?) } else { None };
    let ln_dim = spec.e as f64 * (spec.j0.dim() as f64).ln();
    Ok(BoundaryReport {
        exact_entropy: state.as_ref().map(|s| s.entropy()),
        exact_ln_bound: state.as_ref().map(|s| ln_dim - 0.5 * big_ln(&s.d_fr)),
        state,
        asymptotic_entropy: asymptotic_boundary_entropy(spec),
        asymptotic_ln_bound: asymptotic_boundary_bound(spec),
        below_threshold: 2 * spec.l > spec.e,
    })
}

/// Decimal scientific notation of a nonnegative rational with `digits` significant digits.
pub fn ratio_decimal(r: &BigRational, digits: usize) -> String {
    let digits = digits.max(1);
    let num = r.numer().magnitude().clone();
    let den = r.denom().magnitude().clone();
    if num.is_zero() {
        return "0".into();
    }
    let mut exp = ((big_ln(&num) - big_ln(&den)) / std::f64::consts::LN_10).floor() as i64;
    let ten = BigUint::from(10u32);
    loop {
        let shift = digits as i64 - 1 - exp;
        let (n, d) = if shift >= 0 { (&num * ten.pow(shift as u32), den.clone()) } else { (num.clone(), &den * ten.pow((-shift) as u32)) };
        let (q, rem) = n.div_rem(&d);
        let q = if rem.clone() * 2u32 >= d { q + 1u32 } else { q };
        let s = q.to_str_radix(10);
        if s.len() > digits {
            exp += 1;
            continue;
        }
        if s.len() < digits {
            exp -= 1;
            continue;
        }
        let (head, tail) = s.split_at(1);
        return if tail.is_empty() { format!("{head}e{exp}") } else { format!("{head}.{tail}e{exp}") };
    }
}
