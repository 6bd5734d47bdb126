//! Disorder-averaged dynamics of the XXZ chain: local magnetizations, local and
//! half-chain entanglement entropies, and logarithmic-modulation fits.

use nalgebra::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cmatmul, herm_eigvals};
use crate::models::{draw_disorder, neel_state, xxz_sectors, Axis, XXZParams, DEFAULT_MEMORY_BUDGET};
use crate::qcore::{spectrum_entropy, PureState};
use crate::scalar::{lit, to_f64, CMatrix, CVector, KahanSum, Real};
use crate::spectral::SpectralDecomposition;
use crate::unbiased::fourier_rotate;

/// Spacing of a time grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    /// Uniform steps.
    Linear,
    /// Uniform steps in `ln t`.
    Log,
}

/// Strictly increasing nonnegative sample times in units of `1/J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
    spacing: Spacing,
}

impl TimeGrid {
    /// Grid from explicit points.
    pub fn new(points: Vec<f64>, spacing: Spacing) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Config("time grid needs at least two points".into()));
        }
        if points[0] < 0.0 || !points.iter().all(|t| t.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("time grid must be nonnegative, finite and strictly increasing".into()));
        }
        Ok(Self { points, spacing })
    }

    /// `n` points evenly spaced in `ln t` on `[t0, t1]`.
    pub fn log(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if !(t0 > 0.0 && t1 > t0) || n < 2 {
            return Err(Error::Config(format!("invalid log grid [{t0}, {t1}] with {n} points")));
        }
        let (a, b) = (t0.ln(), t1.ln());
        let pts = (0..n).map(|k| if k + 1 == n { t1 } else { (a + (b - a) * k as f64 / (n - 1) as f64).exp() }).collect();
        Self::new(pts, Spacing::Log)
    }

    /// `n` evenly spaced points on `[t0, t1]`.
    pub fn linear(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if !(t0 >= 0.0 && t1 > t0) || n < 2 {
            return Err(Error::Config(format!("invalid linear grid [{t0}, {t1}] with {n} points")));
        }
        Self::new((0..n).map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64).collect(), Spacing::Linear)
    }

    /// Sample times.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Declared spacing.
    pub fn spacing(&self) -> Spacing {
        self.spacing
    }
}

impl Default for TimeGrid {
    /// 200 log-spaced points on `[0.1, 1000]`.
    fn default() -> Self {
        Self::log(0.1, 1000.0, 200).expect("valid default grid")
    }
}

/// Initial state of a dynamics run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialState {
    /// Néel state along an axis.
    Neel {
        /// Spin axis.
        axis: Axis,
    },
    /// Column `index` of the Fourier HUB of each realization's Hamiltonian.
    Hub {
        /// Basis vector index.
        index: usize,
    },
    /// `(|0…0⟩ + |1…1⟩)/√2`.
    Ghz,
}

impl InitialState {
    /// State for one realization.
    pub fn prepare<T: Real>(&self, l: usize, sd: &SpectralDecomposition<T>) -> Result<PureState<T>> {
        match *self {
            Self::Neel { axis } => neel_state(l, axis),
            Self::Hub { index } => {
                if index >= sd.dim() {
                    return Err(Error::Config(format!("HUB index {index} outside dimension {}", sd.dim())));
                }
                let mut e = CMatrix::zeros(1, sd.dim());
                e[(0, index)] = Complex::new(T::one(), T::zero());
                let column = fourier_rotate(&e).transpose();
                PureState::normalized(sd.synthesize(&CVector::from_column_slice(column.as_slice()))?)
            }
            Self::Ghz => {
                let d = 1usize << l;
                let mut v = CVector::zeros(d);
                v[0] = Complex::new(T::one(), T::zero());
                v[d - 1] = Complex::new(T::one(), T::zero());
                PureState::normalized(v)
            }
        }
    }
}

/// Complete description of a disorder-averaged dynamics run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MblRun {
    /// Chain parameters; `seed` keys the disorder streams.
    pub params: XXZParams,
    /// Sample times.
    pub grid: TimeGrid,
    /// Number of disorder realizations `N_dis`.
    pub n_dis: usize,
    /// Initial state.
    pub initial: InitialState,
    /// Memory budget in bytes.
    pub memory_budget: usize,
}

impl MblRun {
    /// Run with the default grid and memory budget.
    pub fn new(params: XXZParams, n_dis: usize, initial: InitialState) -> Self {
        Self { params, grid: TimeGrid::default(), n_dis, initial, memory_budget: DEFAULT_MEMORY_BUDGET }
    }

    fn validate<T: Real>(&self) -> Result<()> {
        self.params.validate()?;
        if self.params.l > 14 {
            return Err(Error::Config(format!("chain length {} above 14", self.params.l)));
        }
        if self.n_dis == 0 {
            return Err(Error::Config("need at least one realization".into()));
        }
        let need = self.estimated_bytes::<T>();
        if need > self.memory_budget as u128 {
            return Err(Error::Resource(format!("run needs about {need} bytes, budget {}", self.memory_budget)));
        }
        Ok(())
    }

    /// Peak memory estimate with one realization in flight per worker.
    pub fn estimated_bytes<T: Real>(&self) -> u128 {
        let l = self.params.l;
        let d = 1u128 << l;
        let real = std::mem::size_of::<T>() as u128;
        let sector_sq: u128 = (0..=l).map(|k| binomial(l, k).pow(2)).sum();
        let per = 3 * sector_sq * real + 4 * d * self.grid.points.len() as u128 * real;
        per * rayon::current_num_threads().min(self.n_dis) as u128
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Disorder-averaged time series, one row per label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderAveragedSeries {
    /// Sample times.
    pub times: Vec<f64>,
    /// Series labels.
    pub labels: Vec<String>,
    /// Realization means, `mean[label][t]`.
    pub mean: Vec<Vec<f64>>,
    /// Standard errors `std / √N_dis`.
    pub stderr: Vec<Vec<f64>>,
    /// Number of realizations.
    pub n_dis: usize,
    /// Master seed.
    pub seed: u64,
}

impl DisorderAveragedSeries {
    /// Means of the series with the given label.
    pub fn series(&self, label: &str) -> Option<&[f64]> {
        self.labels.iter().position(|l| l == label).map(|i| self.mean[i].as_slice())
    }

    /// Averages per-realization tables `values[r][label][t]` in realization order.
    pub fn from_realizations(times: Vec<f64>, labels: Vec<String>, values: &[Vec<Vec<f64>>], seed: u64) -> Self {
        let n = values.len();
        let nt = times.len();
        let mut mean = vec![vec![0.0; nt]; labels.len()];
        let mut stderr = vec![vec![0.0; nt]; labels.len()];
        for k in 0..labels.len() {
            for t in 0..nt {
                let m = crate::scalar::compensated_sum(values.iter().map(|r| r[k][t])) / n as f64;
                let var = if n > 1 {
                    crate::scalar::compensated_sum(values.iter().map(|r| (r[k][t] - m).powi(2))) / (n - 1) as f64
                } else {
                    0.0
                };
                mean[k][t] = m;
                stderr[k][t] = (var / n as f64).sqrt();
            }
        }
        Self { times, labels, mean, stderr, n_dis: n, seed }
    }
}

/// Single-site reduced matrices `(ρ_00, ρ_11, ρ_01)` of a chain state.
pub fn single_site_rdms<T: Real>(psi: &[Complex<T>], l: usize) -> Vec<(T, T, Complex<T>)> {
    (0..l)
        .map(|site| {
            let bit = 1usize << (l - 1 - site);
            let (mut a, mut c) = (KahanSum::default(), KahanSum::default());
            let mut b = Complex::new(T::zero(), T::zero());
            for (s, z) in psi.iter().enumerate() {
                if s & bit == 0 {
                    a.add(z.norm_sqr());
                    b += z * psi[s | bit].conj();
                } else {
                    c.add(z.norm_sqr());
                }
            }
            (a.total(), c.total(), b)
        })
        .collect()
}

/// `⟨σ^axis⟩` from a single-site reduced matrix.
pub fn pauli_expectation<T: Real>(rdm: &(T, T, Complex<T>), axis: Axis) -> T {
    let (a, c, b) = *rdm;
    match axis {
        Axis::Z => a - c,
        Axis::X => b.re * lit(2.0),
        Axis::Y => -b.im * lit(2.0),
    }
}

/// Von Neumann entropy of a single-site reduced matrix.
pub fn qubit_entropy<T: Real>(rdm: &(T, T, Complex<T>)) -> T {
    let (a, c, b) = *rdm;
    let r = ((a - c) * (a - c) + b.norm_sqr() * lit(4.0)).sqrt();
    let half = lit::<T>(0.5);
    spectrum_entropy(&[half * (T::one() + r), half * (T::one() - r)]).unwrap_or_else(|_| T::zero())
}

/// Entropy of the left `l/2` sites.
pub fn halfchain_entropy<T: Real>(psi: &[Complex<T>], l: usize) -> T {
    let left = 1usize << (l / 2);
    let right = 1usize << (l - l / 2);
    let m = CMatrix::from_fn(left, right, |r, c| psi[r * right + c]);
    let rho = cmatmul(&m, &m.adjoint());
    spectrum_entropy(&herm_eigvals(&rho)).unwrap_or_else(|_| T::zero())
}

fn run_realizations<T: Real, F>(run: &MblRun, per_state: F) -> Result<Vec<Vec<Vec<f64>>>>
where
    F: Fn(&[Complex<T>]) -> Vec<f64> + Sync,
{
    run.validate::<T>()?;
    let times: Vec<T> = run.grid.points.iter().map(|&t| lit(t)).collect();
    let results: Vec<Result<Vec<Vec<f64>>>> = (0..run.n_dis)
        .into_par_iter()
        .map(|r| {
            let p = &run.params;
            let dis = draw_disorder::<T>(p.w, p.l, p.seed, r as u64)?;
            let sd = SpectralDecomposition::from_sectors(&xxz_sectors(p, &dis)?)?;
            let psi0 = run.initial.prepare(p.l, &sd)?;
            let traj = sd.evolver(&psi0)?.trajectory(&times);
            let per_time: Vec<Vec<f64>> = (0..times.len()).map(|k| per_state(traj.column(k).as_slice())).collect();
            let labels = per_time.first().map_or(0, |v| v.len());
            Ok((0..labels).map(|i| per_time.iter().map(|v| v[i]).collect()).collect())
        })
        .collect();
    results.into_iter().collect()
}

/// `⟨σ^axis_i⟩(t)` for every site, starting from the run's initial state.
pub fn local_magnetization_run<T: Real>(run: &MblRun, axis: Axis) -> Result<DisorderAveragedSeries> {
    let l = run.params.l;
    let values = run_realizations::<T, _>(run, |psi| single_site_rdms(psi, l).iter().map(|r| to_f64(pauli_expectation(r, axis))).collect())?;
    let labels = (0..l).map(|i| format!("site{i}")).collect();
    Ok(DisorderAveragedSeries::from_realizations(run.grid.points.clone(), labels, &values, run.params.seed))
}

/// Staggered magnetization `(1/L) Σ_i (-1)^i ⟨σ_i⟩(t)` from per-site series.
pub fn staggered_magnetization(series: &DisorderAveragedSeries) -> Vec<f64> {
    let l = series.mean.len();
    (0..series.times.len())
        .map(|t| crate::scalar::compensated_sum((0..l).map(|i| if i % 2 == 0 { series.mean[i][t] } else { -series.mean[i][t] })) / l as f64)
        .collect()
}

/// Mean of `values` over samples with `t_lo ≤ t ≤ t_hi`.
pub fn window_average(times: &[f64], values: &[f64], t_lo: f64, t_hi: f64) -> Result<f64> {
    let sel: Vec<f64> = times.iter().zip(values).filter(|(&t, _)| t >= t_lo && t <= t_hi).map(|(_, &v)| v).collect();
    if sel.is_empty() {
        return Err(Error::Config(format!("no samples in [{t_lo}, {t_hi}]")));
    }
    Ok(crate::scalar::compensated_sum(sel.iter().copied()) / sel.len() as f64)
}

/// `S_n(t)` per site (labels `S0…`), their mean `S` and the total correlation `T = Σ_n S_n`.
pub fn local_entropies_run<T: Real>(run: &MblRun) -> Result<DisorderAveragedSeries> {
    let l = run.params.l;
    let values = run_realizations::<T, _>(run, |psi| {
        let mut out: Vec<f64> = single_site_rdms(psi, l).iter().map(|r| to_f64(qubit_entropy(r))).collect();
        let total = crate::scalar::compensated_sum(out.iter().copied());
        out.push(total / l as f64);
        out.push(total);
        out
    })?;
    let mut labels: Vec<String> = (0..l).map(|i| format!("S{i}")).collect();
    labels.push("S".into());
    labels.push("T".into());
    Ok(DisorderAveragedSeries::from_realizations(run.grid.points.clone(), labels, &values, run.params.seed))
}

/// Entropy of the left half of the chain.
pub fn halfchain_entropy_run<T: Real>(run: &MblRun) -> Result<DisorderAveragedSeries> {
    let l = run.params.l;
    if l % 2 != 0 {
        return Err(Error::Config(format!("half-chain entropy needs an even chain, got L = {l}")));
    }
    let values = run_realizations::<T, _>(run, |psi| vec![to_f64(halfchain_entropy(psi, l))])?;
    Ok(DisorderAveragedSeries::from_realizations(run.grid.points.clone(), vec!["S_half".into()], &values, run.params.seed))
}

/// Line `a + b ln t` through the local minima of a smoothed series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFitResult {
    /// Intercept `a`.
    pub intercept: f64,
    /// Slope `b`.
    pub slope: f64,
    /// Coefficient of determination.
    pub r_squared: f64,
    /// `(t, smoothed value)` of each minimum.
    pub minima: Vec<(f64, f64)>,
}

/// Width of the centered box filter applied before minima detection.
pub const SMOOTHING_WIDTH: usize = 5;
/// Minimum number of local minima for a fit.
pub const MIN_MINIMA: usize = 4;

/// Centered moving average of odd width, truncated at the ends.
pub fn box_smooth(values: &[f64], width: usize) -> Vec<f64> {
    let h = width / 2;
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(h);
            let hi = (i + h + 1).min(values.len());
            crate::scalar::compensated_sum(values[lo..hi].iter().copied()) / (hi - lo) as f64
        })
        .collect()
}

/// Fits the local minima of `values` on `[t_lo, t_hi]` against `ln t`.
pub fn log_modulation_fit(times: &[f64], values: &[f64], t_lo: f64, t_hi: f64) -> Result<LogFitResult> {
    if times.len() != values.len() {
        return Err(Error::Dimension("times and values differ in length".into()));
    }
    let idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= t_lo && times[i] <= t_hi).collect();
    let (Some(&first), Some(&last)) = (idx.first(), idx.last()) else {
        return Err(Error::InsufficientStructure(0));
    };
    if times[last] / times[first] < 100.0 {
        return Err(Error::Config(format!("fit window [{}, {}] spans less than two decades", times[first], times[last])));
    }
    let t: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
    let s = box_smooth(&idx.iter().map(|&i| values[i]).collect::<Vec<_>>(), SMOOTHING_WIDTH);
    let minima: Vec<(f64, f64)> = (1..s.len().saturating_sub(1)).filter(|&i| s[i] < s[i - 1] && s[i] < s[i + 1]).map(|i| (t[i], s[i])).collect();
    if minima.len() < MIN_MINIMA {
        return Err(Error::InsufficientStructure(minima.len()));
    }
    let pts: Vec<(f64, f64)> = minima.iter().map(|&(t, v)| (t.ln(), v)).collect();
    let (slope, intercept) = crate::unbiased::linear_fit(&pts);
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LogFitResult { intercept, slope, r_squared, minima })
}

/// Largest over sites of the time-averaged `|S_n(t) - S(t)|`.
pub fn synchronization_metric(series: &DisorderAveragedSeries, l: usize) -> Option<f64> {
    let s = series.series("S")?;
    let nt = s.len() as f64;
    (0..l)
        .map(|n| series.series(&format!("S{n}")).map(|sn| sn.iter().zip(s).map(|(a, b)| (a - b).abs()).sum::<f64>() / nt))
        .try_fold(0.0f64, |acc, x| x.map(|x| acc.max(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_entropy_of_mixed_and_pure() {
        assert!(qubit_entropy(&(0.5f64, 0.5, Complex::new(0.0, 0.0))) - std::f64::consts::LN_2 < 1e-15);
        assert!(qubit_entropy(&(0.5f64, 0.5, Complex::new(0.5, 0.0))).abs() < 1e-15);
    }

    #[test]
    fn box_smooth_preserves_constants() {
        assert!(box_smooth(&[2.0; 9], 5).iter().all(|&x| (x - 2.0).abs() < 1e-15));
    }
}
