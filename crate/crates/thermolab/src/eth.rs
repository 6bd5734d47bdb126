//! Energy-basis matrix elements, ETH scaling diagnostics and equilibrium-equation checks.

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cmatmul, hermiticity_defect, max_abs};
use crate::models::{apply_pauli, draw_disorder, xxz_sectors, Axis, XXZParams};
use crate::qcore::{DensityMatrix, ObservableSpectral, PureState};
use crate::scalar::{cx, lit, to_f64, tol, CMatrix, KahanSum, Real};
use crate::spectral::{diagonal_ensemble, microcanonical_state, EnergyWindow, SpectralDecomposition};
use crate::unbiased::{balanced_eigenvalues, fourier_huo_energy_matrix, linear_fit};

/// Matrix elements `A_mn = ⟨E_m|A|E_n⟩` with their reference energies.
#[derive(Clone, Debug)]
pub struct MatrixElementTable<T: Real> {
    /// Energy-basis matrix.
    pub elements: CMatrix<T>,
    /// Energies labelling rows and columns.
    pub energies: Vec<T>,
}

impl<T: Real> MatrixElementTable<T> {
    /// Table of an operator in the full eigenbasis.
    pub fn new(op: &CMatrix<T>, sd: &SpectralDecomposition<T>) -> Result<Self> {
        matrix_elements(op, sd)
    }

    /// Largest `|A_mn - conj(A_nm)|`.
    pub fn hermiticity_defect(&self) -> T {
        hermiticity_defect(&self.elements)
    }

    /// Moving average of the diagonal over `2⌈0.01 D⌉` neighbouring levels.
    pub fn smoothness_proxy(&self) -> Vec<T> {
        let d = self.energies.len();
        let half = d.div_ceil(100).max(1);
        (0..d)
            .map(|n| {
                let lo = n.saturating_sub(half);
                let hi = (n + half).min(d - 1);
                let mut acc = KahanSum::default();
                for m in lo..=hi {
                    acc.add(self.elements[(m, m)].re);
                }
                acc.total() / lit((hi - lo + 1) as f64)
            })
            .collect()
    }

    /// Histogram of off-diagonal phases on `[-π, π)`, normalized to unit area.
    pub fn phase_histogram(&self, bins: usize) -> Vec<(T, T)> {
        let d = self.energies.len();
        let bins = bins.max(1);
        let mut counts = vec![0usize; bins];
        let mut total = 0usize;
        let pi = std::f64::consts::PI;
        for m in 0..d {
            for n in 0..d {
                let z = self.elements[(m, n)];
                if m != n && z.norm_sqr() > T::zero() {
                    let ph = to_f64(z.im.atan2(z.re));
                    let b = (((ph + pi) / (2.0 * pi)) * bins as f64) as usize;
                    counts[b.min(bins - 1)] += 1;
                    total += 1;
                }
            }
        }
        let width = 2.0 * pi / bins as f64;
        counts
            .iter()
            .enumerate()
            .map(|(b, &c)| (lit(-pi + (b as f64 + 0.5) * width), lit(c as f64 / (total.max(1) as f64 * width))))
            .collect()
    }
}

/// `A_mn = ⟨E_m|A|E_n⟩` in ascending energy order.
pub fn matrix_elements<T: Real>(op: &CMatrix<T>, sd: &SpectralDecomposition<T>) -> Result<MatrixElementTable<T>> {
    if op.nrows() != sd.dim() || op.ncols() != sd.dim() {
        return Err(Error::Dimension(format!("operator {}x{} vs spectrum of dimension {}", op.nrows(), op.ncols(), sd.dim())));
    }
    let u = sd.unitary();
    let elements = cmatmul(&u.adjoint(), &cmatmul(op, &u));
    Ok(MatrixElementTable { elements, energies: sd.energies().to_vec() })
}

/// Matrix elements of an observable given by its spectral data.
pub fn observable_matrix_elements<T: Real>(obs: &ObservableSpectral<T>, sd: &SpectralDecomposition<T>) -> Result<MatrixElementTable<T>> {
    matrix_elements(&obs.operator(), sd)
}

/// Observable used in an ETH scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EthObservable {
    /// Balanced `±1` observable on the Fourier HUB, eigenvalues shuffled by the realization seed.
    Huo,
    /// Single-site Pauli operator.
    Pauli {
        /// Site index.
        site: usize,
        /// Spin axis.
        axis: Axis,
    },
}

impl EthObservable {
    /// Short identifier used in tables.
    pub fn id(&self) -> String {
        match self {
            Self::Huo => "huo".into(),
            Self::Pauli { site, axis } => format!("sigma{}_{site}", axis.label()),
        }
    }
}

/// Bulk statistics of one realization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkStats {
    /// Median of `|A_{m+1,m+1} - A_mm|` over consecutive bulk levels.
    pub diag_step_median: f64,
    /// Mean of `|A_mn|` off the diagonal.
    pub offdiag_mean: f64,
    /// Standard deviation of the complex off-diagonal elements.
    pub offdiag_std: f64,
    /// Largest `|A_mn|` off the diagonal.
    pub offdiag_max: f64,
    /// Median of `|A_mn|` off the diagonal.
    pub offdiag_median: f64,
}

/// Bulk statistics of an energy-basis submatrix whose rows follow ascending energy.
pub fn bulk_stats<T: Real>(a: &CMatrix<T>) -> BulkStats {
    let b = a.nrows();
    let mut steps: Vec<f64> = (1..b).map(|m| to_f64((a[(m, m)] - a[(m - 1, m - 1)]).norm_sqr().sqrt())).collect();
    let mut mags = Vec::with_capacity(b * b.saturating_sub(1));
    let mut sum = Complex::new(0.0, 0.0);
    let mut mag_sum = KahanSum::default();
    for m in 0..b {
        for n in 0..b {
            if m != n {
                let z = Complex::new(to_f64(a[(m, n)].re), to_f64(a[(m, n)].im));
                sum += z;
                mag_sum.add(z.norm());
                mags.push(z.norm());
            }
        }
    }
    let k = mags.len().max(1) as f64;
    let mean = sum / k;
    let mut var = KahanSum::default();
    for m in 0..b {
        for n in 0..b {
            if m != n {
                let z = Complex::new(to_f64(a[(m, n)].re), to_f64(a[(m, n)].im));
                var.add((z - mean).norm_sqr());
            }
        }
    }
    let offdiag_std = if mags.len() > 1 { (var.total() / (k - 1.0)).sqrt() } else { 0.0 };
    let offdiag_max = mags.iter().copied().fold(0.0, f64::max);
    BulkStats {
        diag_step_median: median(&mut steps),
        offdiag_mean: mag_sum.total() / k,
        offdiag_std,
        offdiag_max,
        offdiag_median: median(&mut mags),
    }
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Global eigen-indices of the central `fraction` of the largest block, ascending in energy.
pub fn bulk_indices<T: Real>(sd: &SpectralDecomposition<T>, fraction: f64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("bulk fraction must lie in (0, 1], got {fraction}")));
    }
    let b = (0..sd.blocks().len())
        .max_by(|&i, &j| sd.blocks()[i].energies.len().cmp(&sd.blocks()[j].energies.len()).then(j.cmp(&i)))
        .ok_or_else(|| Error::Dimension("empty decomposition".into()))?;
    let idx = sd.block_indices(b);
    let keep = ((idx.len() as f64 * fraction).round() as usize).max(2).min(idx.len());
    let start = (idx.len() - keep) / 2;
    Ok(idx[start..start + keep].to_vec())
}

/// Energy-basis submatrix of an observable restricted to the given eigen-indices.
pub fn bulk_matrix<T: Real>(sd: &SpectralDecomposition<T>, obs: &EthObservable, l: usize, seed: u64, idx: &[usize]) -> Result<CMatrix<T>> {
    match *obs {
        EthObservable::Huo => {
            let full = fourier_huo_energy_matrix(&balanced_eigenvalues::<T>(sd.dim(), seed));
            Ok(CMatrix::from_fn(idx.len(), idx.len(), |r, c| full[(idx[r], idx[c])]))
        }
        EthObservable::Pauli { site, axis } => {
            let mut v = CMatrix::zeros(sd.dim(), idx.len());
            for (c, &n) in idx.iter().enumerate() {
                v.set_column(c, &sd.vector(n));
            }
            let av = apply_pauli(l, site, axis, &v)?;
            Ok(cmatmul(&v.adjoint(), &av))
        }
    }
}

/// Statistics for one chain length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EthReport {
    /// Chain length.
    pub l: usize,
    /// Disorder strength.
    pub w: f64,
    /// Master seed.
    pub seed: u64,
    /// Observable identifier.
    pub obs_id: String,
    /// Number of bulk levels per realization.
    pub bulk_levels: usize,
    /// Realization-averaged statistics.
    pub mean: BulkStats,
    /// Per-realization statistics in index order.
    pub realizations: Vec<BulkStats>,
}

/// Linear fit with a normal-approximation 95% interval on the slope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Fitted slope.
    pub slope: f64,
    /// Fitted intercept.
    pub intercept: f64,
    /// Lower end of the 95% interval.
    pub ci_low: f64,
    /// Upper end of the 95% interval.
    pub ci_high: f64,
}

impl SlopeFit {
    /// Least squares on `(x, y)` points.
    pub fn fit(points: &[(f64, f64)]) -> Self {
        let (slope, intercept) = linear_fit(points);
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        let se = if points.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
        Self { slope, intercept, ci_low: slope - 1.96 * se, ci_high: slope + 1.96 * se }
    }
}

/// Per-size reports and fits of `-ln(statistic)` against `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EthScaling {
    /// One report per chain length.
    pub reports: Vec<EthReport>,
    /// Fit of `-ln(offdiag std)`.
    pub offdiag_std_fit: SlopeFit,
    /// Fit of `-ln(median |A_mn|)`.
    pub offdiag_median_fit: SlopeFit,
    /// Fit of `-ln(median diagonal step)`.
    pub diag_step_fit: SlopeFit,
}

/// ETH statistics over chain lengths and disorder realizations.
///
/// Realization `r` at length `L` uses disorder stream `r` of `base.seed`; the
/// work is split over `(L, r)` pairs and merged in index order.
pub fn eth_scaling(base: &XXZParams, ls: &[usize], n_dis: usize, obs: &EthObservable, bulk_fraction: f64) -> Result<EthScaling> {
    if n_dis == 0 || ls.is_empty() {
        return Err(Error::Config("need at least one length and one realization".into()));
    }
    if let Some(&bad) = ls.iter().find(|&&l| !(2..=14).contains(&l)) {
        return Err(Error::Config(format!("chain length {bad} outside [2, 14]")));
    }
    if let EthObservable::Pauli { site, .. } = obs {
        if let Some(&bad) = ls.iter().find(|&&l| *site >= l) {
            return Err(Error::Config(format!("site {site} outside a chain of length {bad}")));
        }
    }
    let tasks: Vec<(usize, usize)> = ls.iter().flat_map(|&l| (0..n_dis).map(move |r| (l, r))).collect();
    let stats: Vec<Result<(usize, BulkStats)>> = tasks
        .par_iter()
        .map(|&(l, r)| {
            let p = XXZParams { l, ..base.clone() };
            p.validate()?;
            let dis = draw_disorder::<f64>(p.w, l, p.seed, r as u64)?;
            let sd = SpectralDecomposition::from_sectors(&xxz_sectors(&p, &dis)?)?;
            let idx = bulk_indices(&sd, bulk_fraction)?;
            let a = bulk_matrix(&sd, obs, l, p.seed ^ ((r as u64) << 32 | l as u64), &idx)?;
            Ok((idx.len(), bulk_stats(&a)))
        })
        .collect();
    let mut reports = Vec::with_capacity(ls.len());
    let mut pts = (Vec::new(), Vec::new(), Vec::new());
    for (li, &l) in ls.iter().enumerate() {
        let mut realizations = Vec::with_capacity(n_dis);
        let mut bulk_levels = 0;
        for s in &stats[li * n_dis..(li + 1) * n_dis] {
            let (b, st) = s.clone()?;
            bulk_levels = b;
            pts.0.push((l as f64, -st.offdiag_std.ln()));
            pts.1.push((l as f64, -st.offdiag_median.ln()));
            pts.2.push((l as f64, -st.diag_step_median.ln()));
            realizations.push(st);
        }
        let avg = |f: fn(&BulkStats) -> f64| crate::scalar::compensated_sum(realizations.iter().map(f)) / n_dis as f64;
        let mean = BulkStats {
            diag_step_median: avg(|s| s.diag_step_median),
            offdiag_mean: avg(|s| s.offdiag_mean),
            offdiag_std: avg(|s| s.offdiag_std),
            offdiag_max: avg(|s| s.offdiag_max),
            offdiag_median: avg(|s| s.offdiag_median),
        };
        reports.push(EthReport { l, w: base.w, seed: base.seed, obs_id: obs.id(), bulk_levels, mean, realizations });
    }
    Ok(EthScaling {
        reports,
        offdiag_std_fit: SlopeFit::fit(&pts.0),
        offdiag_median_fit: SlopeFit::fit(&pts.1),
        diag_step_fit: SlopeFit::fit(&pts.2),
    })
}

/// Dephased versus microcanonical expectation values of an observable.
#[derive(Clone, Debug, PartialEq)]
pub struct ThermalizationGap<T: Real> {
    /// `|⟨A⟩_DE - ⟨A⟩_mc|`.
    pub gap: T,
    /// Diagonal-ensemble value.
    pub diagonal: T,
    /// Microcanonical value.
    pub microcanonical: T,
    /// `(t, ⟨A⟩(t))` on the requested times.
    pub series: Vec<(T, T)>,
}

/// Compares the time-averaged and microcanonical expectation values of `op`.
pub fn thermalization_gap<T: Real>(
    op: &CMatrix<T>,
    sd: &SpectralDecomposition<T>,
    psi0: &PureState<T>,
    window: &EnergyWindow<T>,
    times: &[T],
) -> Result<ThermalizationGap<T>> {
    let microcanonical = microcanonical_state(sd, window)?.expectation(op)?;
    let diagonal = diagonal_ensemble(sd, psi0)?.expectation(op)?;
    let ev = sd.evolver(psi0)?;
    let traj = ev.trajectory(times);
    let series = times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let v = traj.column(k).into_owned();
            (t, v.dotc(&(op * &v)).re)
        })
        .collect();
    Ok(ThermalizationGap { gap: (diagonal - microcanonical).abs(), diagonal, microcanonical, series })
}

/// Residuals of the stationarity and maximum-entropy equilibrium equations.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumResiduals<T: Real> {
    /// `max |conj(E_n(j,s)) - E_n(j,s)|` over weighted components.
    pub r1: T,
    /// Largest residual of `-|D_js|² ln p(a_j) = (1 - λ_N)|D_js|² - λ_E E_n(j,s)`.
    pub r2: T,
    /// Multiplier `λ_N` used for `r2`.
    pub lambda_n: T,
    /// Multiplier `λ_E` used for `r2`.
    pub lambda_e: T,
    /// `dp(a_j)/dt = 2 Σ_n q_n Σ_s Im E_n(j,s)`.
    pub dp_dt: Vec<T>,
    /// Observable entropy `H_A`.
    pub observable_entropy: T,
    /// `(1 - λ_N) - λ_E ⟨H⟩`, equal to `H_A` at equilibrium.
    pub linear_prediction: T,
}

/// Weight below which a component of `ρ` is ignored.
pub const WEIGHT_CUTOFF: f64 = 1e-12;

/// Evaluates the equilibrium equations for `rho` and the refinement `|j,s⟩` given by
/// the eigenbasis columns of `obs`.
///
/// `ρ = Σ_n q_n |ψ_n⟩⟨ψ_n|` is taken in the energy eigenbasis when `ρ` commutes with
/// `H`, otherwise in its own eigenbasis. Without `lambdas`, `(λ_N, λ_E)` are fitted by
/// least squares.
pub fn equilibrium_residuals<T: Real>(
    rho: &DensityMatrix<T>,
    obs: &ObservableSpectral<T>,
    sd: &SpectralDecomposition<T>,
    lambdas: Option<(T, T)>,
) -> Result<EquilibriumResiduals<T>> {
    let d = sd.dim();
    if rho.dim() != d || obs.dim() != d {
        return Err(Error::Dimension(format!("state {}, observable {}, spectrum {}", rho.dim(), obs.dim(), d)));
    }
    let u = sd.unitary();
    let rho_e = cmatmul(&u.adjoint(), &cmatmul(rho.matrix(), &u));
    let mut off = T::zero();
    for r in 0..d {
        for c in 0..d {
            if r != c {
                off = off.max(rho_e[(r, c)].norm_sqr().sqrt());
            }
        }
    }
    let (q, psis): (Vec<T>, CMatrix<T>) = if off <= tol(1e-10) {
        ((0..d).map(|n| rho_e[(n, n)].re).collect(), u.clone())
    } else {
        crate::linalg::herm_eig(rho.matrix())
    };
    let basis = obs.unitary();
    let groups = obs.column_groups();
    let h = sd.operator();
    // D[(c, n)] = ⟨j,s|ψ_n⟩ and G[(c, n)] = ⟨j,s|H|ψ_n⟩.
    let dmat = cmatmul(&basis.adjoint(), &psis);
    let gmat = cmatmul(&basis.adjoint(), &cmatmul(&h, &psis));
    let mut p = vec![KahanSum::default(); obs.outcomes()];
    let mut dp = vec![KahanSum::default(); obs.outcomes()];
    let mut r1 = T::zero();
    let mut energy = KahanSum::default();
    let mut rows: Vec<(T, T, T)> = Vec::new();
    for n in 0..d {
        if q[n] <= lit(WEIGHT_CUTOFF) {
            continue;
        }
        for c in 0..d {
            let e = dmat[(c, n)].conj() * gmat[(c, n)];
            let e = Complex::new(e.re, e.im);
            r1 = r1.max((e.conj() - e).norm_sqr().sqrt());
            p[groups[c]].add(q[n] * dmat[(c, n)].norm_sqr());
            dp[groups[c]].add(lit::<T>(2.0) * q[n] * e.im);
            energy.add(q[n] * e.re);
        }
    }
    let p: Vec<T> = p.iter().map(|s| s.total().max(T::zero())).collect();
    for n in 0..d {
        if q[n] <= lit(WEIGHT_CUTOFF) {
            continue;
        }
        for c in 0..d {
            let w = dmat[(c, n)].norm_sqr();
            let e = (dmat[(c, n)].conj() * gmat[(c, n)]).re;
            let pj = p[groups[c]];
            let lhs = if w > T::zero() && pj > T::zero() { -w * pj.ln() } else { T::zero() };
            rows.push((w, e, lhs));
        }
    }
    let (a, b) = match lambdas {
        Some((ln, le)) => (T::one() - ln, le),
        None => fit_multipliers(&rows),
    };
    let r2 = rows.iter().fold(T::zero(), |acc, &(w, e, lhs)| acc.max((lhs - (a * w - b * e)).abs()));
    let observable_entropy = p.iter().fold(T::zero(), |acc, &x| if x > T::zero() { acc - x * x.ln() } else { acc });
    Ok(EquilibriumResiduals {
        r1,
        r2,
        lambda_n: T::one() - a,
        lambda_e: b,
        dp_dt: dp.iter().map(|s| s.total()).collect(),
        observable_entropy,
        linear_prediction: a - b * energy.total(),
    })
}

/// Minimum-norm least squares for `lhs ≈ a w - b e`.
fn fit_multipliers<T: Real>(rows: &[(T, T, T)]) -> (T, T) {
    if rows.is_empty() {
        return (T::zero(), T::zero());
    }
    let x = DMatrix::from_fn(rows.len(), 2, |r, c| if c == 0 { rows[r].0 } else { -rows[r].1 });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.2));
    let scale = max_abs(&x.map(cx)).max(T::one());
    let sol = x.svd(true, true).solve(&y, lit::<T>(1e-12) * scale).unwrap_or_else(|_| DVector::zeros(2));
    (sol[0], sol[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn slope_fit_exact_line() {
        let f = SlopeFit::fit(&[(1.0, 3.0), (2.0, 5.0), (3.0, 7.0)]);
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!(f.ci_high - f.ci_low < 1e-6);
    }
}
