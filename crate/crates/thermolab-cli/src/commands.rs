//! Subcommand implementations on top of the library.

use serde::Serialize;
use serde_json::{json, Value};
use thermolab::eth::{eth_scaling, observable_matrix_elements, EthObservable, SlopeFit};
use thermolab::mbl::{
    halfchain_entropy_run, local_entropies_run, local_magnetization_run, log_modulation_fit, staggered_magnetization, synchronization_metric,
    window_average, DisorderAveragedSeries, InitialState, MblRun, Spacing, TimeGrid,
};
use thermolab::models::{draw_disorder, xxz_sectors};
use thermolab::scalar::Real;
use thermolab::spectral::{level_spacing_stats, SpectralDecomposition};
use thermolab::spinnet::{
    boundary_canonical_state, canonical_surface_state, canonical_surface_summary, ratio_decimal, surface_entropy_regimes, typicality_bound,
    FlowerGraphSpec, IntertwinerSpec, TwiceSpin,
};
use thermolab::unbiased::{
    balanced_eigenvalues, build_huo, fourier_huo_energy_matrix, hub_from_spectrum, magnetization_theorem_scan, mub_family_prime, unbiasedness_score,
    HUOSpec,
};

use crate::config::{
    parse, BoundaryParams, EthScanParams, HuoParams, InitialKind, LevelsParams, MblParams, MubParams, ObservableKind, Precision, SurfaceParams,
    TheoremParams,
};
use crate::error::{CliError, CliResult};
use crate::output::{num, OutputSet};

/// Tolerance of the mutual-unbiasedness and orthonormality checks.
pub const MUB_TOL: f64 = 1e-10;
/// Largest surface weight table written in full.
pub const MAX_TABLE_ROWS: u64 = 1_000_000;

/// Typed parameter block of a subcommand.
#[derive(Clone, Debug)]
pub enum Params {
    /// `eth-scan`.
    EthScan(EthScanParams),
    /// `mbl-dynamics`.
    Mbl(MblParams),
    /// `mub-build`.
    Mub(MubParams),
    /// `huo-check`.
    Huo(HuoParams),
    /// `levels`.
    Levels(LevelsParams),
    /// `spinnet-surface`.
    Surface(SurfaceParams),
    /// `spinnet-boundary`.
    Boundary(BoundaryParams),
    /// `theorem-scan`.
    Theorem(TheoremParams),
}

impl Params {
    /// Validates a JSON parameter block against the subcommand schema.
    pub fn parse(subcommand: &str, v: Value) -> CliResult<Self> {
        const P: &str = "params";
        Ok(match subcommand {
            "eth-scan" => Self::EthScan(parse(v, P)?),
            "mbl-dynamics" => Self::Mbl(parse(v, P)?),
            "mub-build" => Self::Mub(parse(v, P)?),
            "huo-check" => Self::Huo(parse(v, P)?),
            "levels" => Self::Levels(parse(v, P)?),
            "spinnet-surface" => Self::Surface(parse(v, P)?),
            "spinnet-boundary" => Self::Boundary(parse(v, P)?),
            "theorem-scan" => Self::Theorem(parse(v, P)?),
            other => return Err(CliError::Schema(format!("subcommand: unknown subcommand {other:?}"))),
        })
    }

    /// Fully defaulted parameters as JSON.
    pub fn to_value(&self) -> Value {
        let v = match self {
            Self::EthScan(p) => serde_json::to_value(p),
            Self::Mbl(p) => serde_json::to_value(p),
            Self::Mub(p) => serde_json::to_value(p),
            Self::Huo(p) => serde_json::to_value(p),
            Self::Levels(p) => serde_json::to_value(p),
            Self::Surface(p) => serde_json::to_value(p),
            Self::Boundary(p) => serde_json::to_value(p),
            Self::Theorem(p) => serde_json::to_value(p),
        };
        v.expect("parameters serialize")
    }

    /// Runs the subcommand, writing into `out`.
    pub fn execute(&self, seed: u64, out: &mut OutputSet) -> CliResult<()> {
        match self {
            Self::EthScan(p) => eth_scan(p, seed, out),
            Self::Mbl(p) => match p.precision {
                Precision::F64 => mbl_dynamics::<f64>(p, seed, out),
                Precision::F32 => mbl_dynamics::<f32>(p, seed, out),
            },
            Self::Mub(p) => mub_build(p, out),
            Self::Huo(p) => huo_check(p, seed, out),
            Self::Levels(p) => levels(p, seed, out),
            Self::Surface(p) => spinnet_surface(p, out),
            Self::Boundary(p) => spinnet_boundary(p, out),
            Self::Theorem(p) => theorem_scan(p, out),
        }
    }
}

fn schema(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Schema(format!("params.{field}: {msg}"))
}

fn fit_json(f: &SlopeFit) -> Value {
    json!({ "slope": f.slope, "intercept": f.intercept, "ci_low": f.ci_low, "ci_high": f.ci_high })
}

fn eth_scan(p: &EthScanParams, seed: u64, out: &mut OutputSet) -> CliResult<()> {
    let obs = match p.observable {
        ObservableKind::Huo => EthObservable::Huo,
        ObservableKind::Pauli => EthObservable::Pauli { site: p.site, axis: p.axis },
    };
    let base = p.chain(p.l.first().copied().unwrap_or(2), seed);
    let s = eth_scaling(&base, &p.l, p.ndis, &obs, p.bulk_fraction)?;
    let header: Vec<String> =
        ["L", "realization", "bulk_levels", "diag_step_median", "offdiag_mean", "offdiag_std", "offdiag_max", "offdiag_median"].map(String::from).to_vec();
    let mut rows = Vec::new();
    let mut means = Vec::new();
    for r in &s.reports {
        for (i, st) in r.realizations.iter().enumerate() {
            rows.push(vec![
                r.l.to_string(),
                i.to_string(),
                r.bulk_levels.to_string(),
                num(st.diag_step_median),
                num(st.offdiag_mean),
                num(st.offdiag_std),
                num(st.offdiag_max),
                num(st.offdiag_median),
            ]);
        }
        let m = &r.mean;
        means.push(vec![
            r.l.to_string(),
            "mean".into(),
            r.bulk_levels.to_string(),
            num(m.diag_step_median),
            num(m.offdiag_mean),
            num(m.offdiag_std),
            num(m.offdiag_max),
            num(m.offdiag_median),
        ]);
    }
    out.write_csv("realizations.csv", &header, &rows)?;
    out.write_csv("means.csv", &header, &means)?;
    out.write_json(
        "fits.json",
        &json!({
            "observable": obs.id(),
            "W": p.w,
            "L": p.l,
            "ndis": p.ndis,
            "offdiag_std": fit_json(&s.offdiag_std_fit),
            "offdiag_median": fit_json(&s.offdiag_median_fit),
            "diag_step_median": fit_json(&s.diag_step_fit),
        }),
    )
}

fn series_csv(out: &mut OutputSet, name: &str, s: &DisorderAveragedSeries, extra: &[(&str, &[f64])]) -> CliResult<()> {
    let mut header = vec!["t".to_string()];
    for l in &s.labels {
        header.push(l.clone());
        header.push(format!("{l}_stderr"));
    }
    header.extend(extra.iter().map(|(n, _)| n.to_string()));
    let rows: Vec<Vec<String>> = (0..s.times.len())
        .map(|t| {
            let mut r = vec![num(s.times[t])];
            for k in 0..s.labels.len() {
                r.push(num(s.mean[k][t]));
                r.push(num(s.stderr[k][t]));
            }
            r.extend(extra.iter().map(|(_, v)| num(v[t])));
            r
        })
        .collect();
    out.write_csv(name, &header, &rows)
}

fn mbl_dynamics<T: Real>(p: &MblParams, seed: u64, out: &mut OutputSet) -> CliResult<()> {
    let grid = match p.spacing {
        Spacing::Log => TimeGrid::log(p.t_min, p.t_max, p.n_times),
        Spacing::Linear => TimeGrid::linear(p.t_min, p.t_max, p.n_times),
    }
    .map_err(|e| schema("t_min", e))?;
    let initial = match p.initial {
        InitialKind::Neel => InitialState::Neel { axis: p.axis },
        InitialKind::Hub => InitialState::Hub { index: p.hub_index },
        InitialKind::Ghz => InitialState::Ghz,
    };
    let run = MblRun { params: p.chain(p.l, seed), grid, n_dis: p.ndis, initial, memory_budget: p.memory_budget };
    let mag = local_magnetization_run::<T>(&run, p.axis)?;
    let stag = staggered_magnetization(&mag);
    series_csv(out, "magnetization.csv", &mag, &[("staggered", &stag)])?;
    let ent = local_entropies_run::<T>(&run)?;
    series_csv(out, "entropies.csv", &ent, &[])?;
    if p.l % 2 == 0 {
        series_csv(out, "halfchain.csv", &halfchain_entropy_run::<T>(&run)?, &[])?;
    }
    let times = &mag.times;
    let abs_stag: Vec<f64> = stag.iter().map(|x| x.abs()).collect();
    let late = window_average(times, &abs_stag, p.late_t_min, p.t_max).ok();
    let s = ent.series("S").expect("mean entropy series");
    let t_series = ent.series("T").expect("total correlation series");
    let t_defect = t_series.iter().zip(s).map(|(t, m)| (t - p.l as f64 * m).abs()).fold(0.0, f64::max);
    let fit = match log_modulation_fit(times, s, p.fit_t_min, p.fit_t_max) {
        Ok(f) => json!({
            "intercept": f.intercept,
            "slope": f.slope,
            "r_squared": f.r_squared,
            "minima": f.minima.iter().map(|m| [m.0, m.1]).collect::<Vec<_>>(),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let saturation = window_average(times, s, p.late_t_min, p.t_max).ok();
    out.write_json(
        "summary.json",
        &json!({
            "L": p.l,
            "W": p.w,
            "ndis": p.ndis,
            "axis": p.axis,
            "late_abs_staggered": late,
            "late_entropy": saturation,
            "total_correlation_defect": t_defect,
            "synchronization": synchronization_metric(&ent, p.l),
            "log_fit": fit,
        }),
    )
}

fn mub_build(p: &MubParams, out: &mut OutputSet) -> CliResult<()> {
    let fam = mub_family_prime::<f64>(p.dim).map_err(|e| schema("dim", e))?;
    let mut rows = Vec::new();
    for (b, m) in fam.bases().iter().enumerate() {
        for v in 0..p.dim {
            for c in 0..p.dim {
                let z = m[(c, v)];
                rows.push(vec![b.to_string(), fam.labels()[b].clone(), v.to_string(), c.to_string(), num(z.re), num(z.im)]);
            }
        }
    }
    let header = ["basis", "label", "vector", "component", "re", "im"].map(String::from).to_vec();
    out.write_csv("bases.csv", &header, &rows)?;
    let mut pairs = Vec::new();
    let mut all_pass = true;
    let n = fam.bases().len();
    for i in 0..n {
        for j in i + 1..n {
            let s = unbiasedness_score(&fam.bases()[i], &fam.bases()[j])?;
            let pass = s <= MUB_TOL;
            all_pass &= pass;
            pairs.push(json!({ "a": fam.labels()[i], "b": fam.labels()[j], "score": s, "pass": pass }));
        }
    }
    let ortho = fam.max_orthonormality_defect();
    all_pass &= ortho <= MUB_TOL;
    out.write_json(
        "report.json",
        &json!({
            "dim": p.dim,
            "bases": n,
            "tolerance": MUB_TOL,
            "max_orthonormality_defect": ortho,
            "max_pairwise_score": fam.max_pairwise_score(),
            "pairs": pairs,
            "all_pass": all_pass,
        }),
    )
}

fn chain_spectrum(p: &thermolab::models::XXZParams, index: u64) -> CliResult<SpectralDecomposition<f64>> {
    let dis = draw_disorder::<f64>(p.w, p.l, p.seed, index)?;
    Ok(SpectralDecomposition::from_sectors(&xxz_sectors(p, &dis)?)?)
}

fn huo_check(p: &HuoParams, seed: u64, out: &mut OutputSet) -> CliResult<()> {
    let chain = p.chain(p.l, seed);
    chain.validate()?;
    if p.l > 12 {
        return Err(schema("L", format!("chain length {} above 12", p.l)));
    }
    let sd = chain_spectrum(&chain, p.realization)?;
    let d = sd.dim();
    let hub = hub_from_spectrum(&sd);
    let score = unbiasedness_score(&sd.unitary(), &hub)?;
    let a = balanced_eigenvalues::<f64>(d, seed ^ p.realization);
    let obs = build_huo(&HUOSpec::from_spectrum(&sd, a.clone())?)?;
    let table = observable_matrix_elements(&obs, &sd)?;
    let circ = fourier_huo_energy_matrix(&a);
    let circulant_defect = (&table.elements - &circ).iter().fold(0.0f64, |m, z| m.max(z.norm_sqr().sqrt()));
    let mean = a.iter().sum::<f64>() / d as f64;
    let diag_defect = (0..d).fold(0.0f64, |m, i| m.max((table.elements[(i, i)].re - mean).abs()));
    let rows: Vec<Vec<String>> = (0..d)
        .map(|k| {
            let z = circ[(k, 0)];
            vec![k.to_string(), num(a[k]), num(z.re), num(z.im)]
        })
        .collect();
    out.write_csv("circulant.csv", &["k", "eigenvalue", "first_column_re", "first_column_im"].map(String::from), &rows)?;
    out.write_json(
        "report.json",
        &json!({
            "L": p.l,
            "dim": d,
            "realization": p.realization,
            "unbiasedness_score": score,
            "hermiticity_defect": table.hermiticity_defect(),
            "diagonal_mean": mean,
            "diagonal_defect": diag_defect,
            "circulant_defect": circulant_defect,
            "pass": score <= 1e-8 && diag_defect <= 1e-8 && circulant_defect <= 1e-8,
        }),
    )
}

fn levels(p: &LevelsParams, seed: u64, out: &mut OutputSet) -> CliResult<()> {
    use rayon::prelude::*;
    let chain = p.chain(p.l, seed);
    chain.validate()?;
    if p.l > 14 || p.ndis == 0 {
        return Err(schema("L", "need L ≤ 14 and at least one realization"));
    }
    let stats: Vec<CliResult<(f64, usize, Vec<(f64, f64)>)>> = (0..p.ndis as u64)
        .into_par_iter()
        .map(|r| {
            let sd = chain_spectrum(&chain, r)?;
            let s = level_spacing_stats(&sd, p.bulk_fraction)?;
            Ok((s.mean_ratio, s.bulk_levels, s.histogram))
        })
        .collect();
    let stats: Vec<_> = stats.into_iter().collect::<CliResult<_>>()?;
    let rows: Vec<Vec<String>> = stats.iter().enumerate().map(|(i, s)| vec![i.to_string(), s.1.to_string(), num(s.0)]).collect();
    out.write_csv("ratios.csv", &["realization", "bulk_levels", "mean_ratio"].map(String::from), &rows)?;
    let bins = stats[0].2.len();
    let hist: Vec<Vec<String>> = (0..bins)
        .map(|b| {
            let density = stats.iter().map(|s| s.2[b].1).sum::<f64>() / stats.len() as f64;
            vec![num(stats[0].2[b].0), num(density)]
        })
        .collect();
    out.write_csv("histogram.csv", &["s", "density"].map(String::from), &hist)?;
    let mean = stats.iter().map(|s| s.0).sum::<f64>() / stats.len() as f64;
    let var = if stats.len() > 1 { stats.iter().map(|s| (s.0 - mean).powi(2)).sum::<f64>() / (stats.len() - 1) as f64 } else { 0.0 };
    out.write_json(
        "summary.json",
        &json!({
            "L": p.l,
            "W": p.w,
            "ndis": p.ndis,
            "mean_ratio": mean,
            "stderr": (var / stats.len() as f64).sqrt(),
            "poisson": 2.0 * std::f64::consts::LN_2 - 1.0,
        }),
    )
}

fn spinnet_surface(p: &SurfaceParams, out: &mut OutputSet) -> CliResult<()> {
    let spec = IntertwinerSpec { n: p.n, k: p.k, j0: p.j0, jmax: p.jmax };
    spec.validate().map_err(|e| schema("k", e))?;
    if !(p.epsilon > 0.0) {
        return Err(schema("epsilon", "must be positive"));
    }
    let bound = typicality_bound(&spec, p.epsilon)?;
    let regimes = surface_entropy_regimes(&spec)?;
    let rows_est = (2 * p.j0 + 1).saturating_mul(2 * p.j0 + 1);
    let mut header = json!({
        "N": p.n,
        "k": p.k,
        "J0": p.j0,
        "jmax": p.jmax,
        "ln_dS": bound.ln_ds,
        "ln_dR": bound.ln_dr,
        "ln_ratio": bound.ln_ratio,
        "thresholds": {
            "area": bound.area_threshold,
            "area_cut": bound.area_cut,
            "spin": bound.spin_threshold,
            "spin_cut": bound.spin_cut,
        },
        "epsilon": bound.epsilon,
        "ln_levy": bound.ln_levy,
        "log10_levy_exponent": bound.log10_levy_exponent,
        "typical": bound.typical,
        "regimes": regimes,
    });
    if rows_est <= MAX_TABLE_ROWS {
        let st = canonical_surface_state(&spec)?;
        let rows: Vec<Vec<String>> = st
            .rows
            .iter()
            .map(|r| vec![r.area.to_string(), r.defect.to_string(), ratio_decimal(&r.weight, p.digits), r.multiplicity.to_string()])
            .collect();
        out.write_csv("weights.csv", &["J_S", "defect", "weight", "multiplicity"].map(String::from), &rows)?;
        header["d_R"] = Value::String(st.d_r.to_string());
        header["entropy"] = json!(st.entropy);
        header["mean_twice_area"] = json!(st.mean_twice_area());
        header["table"] = json!(true);
    } else {
        let s = canonical_surface_summary(&spec)?;
        header["entropy"] = json!(s.entropy);
        header["mean_twice_area"] = json!(s.mean_twice_area);
        header["normalized"] = json!(s.normalized);
        header["table"] = json!(false);
    }
    out.write_json("summary.json", &header)
}

fn twice_spin(j0: f64) -> CliResult<TwiceSpin> {
    let t = 2.0 * j0;
    if !(t >= 1.0) || t.fract() != 0.0 || t > u32::MAX as f64 {
        return Err(schema("j0", format!("{j0} is not a positive multiple of 1/2")));
    }
    Ok(TwiceSpin(t as u32))
}

#[derive(Serialize)]
struct ScanRow {
    j0: f64,
    e: usize,
    l: usize,
    ln_bound: f64,
    below_threshold: bool,
}

fn spinnet_boundary(p: &BoundaryParams, out: &mut OutputSet) -> CliResult<()> {
    let spec = FlowerGraphSpec { e: p.e, l: p.l, j0: twice_spin(p.j0)? };
    spec.validate().map_err(|e| schema("E", e))?;
    let rep = boundary_canonical_state(&spec)?;
    if let Some(st) = &rep.state {
        let rows: Vec<Vec<String>> =
            st.rows.iter().map(|r| vec![r.k.to_string(), ratio_decimal(&r.weight, p.digits), r.multiplicity.to_string()]).collect();
        out.write_csv("weights.csv", &["k", "weight", "multiplicity"].map(String::from), &rows)?;
    }
    out.write_json(
        "summary.json",
        &json!({
            "E": p.e,
            "L": p.l,
            "j0": p.j0,
            "d_FR": rep.state.as_ref().map(|s| s.d_fr.to_string()),
            "exact_entropy": rep.exact_entropy,
            "asymptotic_entropy": rep.asymptotic_entropy,
            "exact_ln_bound": rep.exact_ln_bound,
            "asymptotic_ln_bound": rep.asymptotic_ln_bound,
            "below_threshold": rep.below_threshold,
        }),
    )?;
    if p.scan {
        let mut rows = Vec::new();
        for j in [0.5, 1.0, 5.0] {
            for e in 1..=20 {
                for l in 0..=20 {
                    let s = FlowerGraphSpec { e, l, j0: twice_spin(j)? };
                    let r = boundary_canonical_state(&s);
                    let ln_bound = match r {
                        Ok(r) => r.exact_ln_bound.unwrap_or(r.asymptotic_ln_bound),
                        Err(_) => f64::NAN,
                    };
                    rows.push(ScanRow { j0: j, e, l, ln_bound, below_threshold: 2 * l > e });
                }
            }
        }
        let csv: Vec<Vec<String>> =
            rows.iter().map(|r| vec![num(r.j0), r.e.to_string(), r.l.to_string(), num(r.ln_bound), r.below_threshold.to_string()]).collect();
        out.write_csv("scan.csv", &["j0", "E", "L", "ln_bound", "below_threshold"].map(String::from), &csv)?;
    }
    Ok(())
}

fn theorem_scan(p: &TheoremParams, out: &mut OutputSet) -> CliResult<()> {
    if p.n_min == 0 || p.n_min > p.n_max {
        return Err(schema("n_min", format!("need 1 ≤ n_min ≤ n_max, got {} and {}", p.n_min, p.n_max)));
    }
    let ns: Vec<usize> = (p.n_min..=p.n_max).collect();
    let s = magnetization_theorem_scan(&ns).map_err(|e| schema("n_max", e))?;
    let rows: Vec<Vec<String>> = s.rows.iter().map(|r| vec![r.n.to_string(), r.q.to_string(), r.j_star.to_string()]).collect();
    out.write_csv("scan.csv", &["N", "q", "j_star"].map(String::from), &rows)?;
    let ld: Vec<Vec<String>> = s
        .large_deviation
        .iter()
        .map(|r| vec![r.n.to_string(), r.j.to_string(), num(r.ln_ratio), num(r.ln_estimate), num(r.deviation)])
        .collect();
    out.write_csv("large_deviation.csv", &["N", "j", "ln_ratio", "ln_estimate", "deviation"].map(String::from), &ld)?;
    let max_dev = s.large_deviation.iter().map(|r| r.deviation).fold(0.0, f64::max);
    out.write_json("fit.json", &json!({ "slope": s.slope, "intercept": s.intercept, "max_deviation": max_dev }))
}
