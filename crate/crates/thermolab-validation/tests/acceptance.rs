//! Acceptance criteria, one PASS/FAIL line each, followed by example-level checks.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigUint;
use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermolab::eth::{eth_scaling, equilibrium_residuals, observable_matrix_elements, EthObservable};
use thermolab::linalg::unitarity_defect;
use thermolab::mbl::{
    local_entropies_run, local_magnetization_run, log_modulation_fit, staggered_magnetization, window_average, InitialState, MblRun,
};
use thermolab::models::{draw_disorder, local_pauli, neel_state, xxz_sectors, Axis, XXZParams};
use thermolab::qcore::von_neumann_entropy;
use thermolab::spectral::{diagonalize, evolve, gibbs_state, log_partition, SpectralDecomposition};
use thermolab::spinnet::{
    asymptotic_boundary_bound, asymptotic_weight_factor, boundary_canonical_state, character_integral, intertwiner_dim, levy_prefactor,
    surface_entropy_regimes, typicality_bound, FlowerGraphSpec, FusionTable, IntertwinerSpec, TwiceSpin,
};
use thermolab::unbiased::{
    balanced_eigenvalues, build_huo, hub_from_spectrum, magnetization_theorem_scan, mub_family_prime, simplex_unbiased_basis, theorem_residual,
    unbiasedness_score, HUOSpec, SimplexOptions,
};
use thermolab::{CMatrix, CVector, PureState};

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { pass: true, lines: Vec::new() }
    }

    fn part(&mut self, ok: bool, text: impl Into<String>) {
        self.pass &= ok;
        self.lines.push(format!("{} {}", if ok { "ok  " } else { "MISS" }, text.into()));
    }
}

fn report(label: &str, budget_s: Option<f64>, f: impl FnOnce(&mut Outcome)) -> bool {
    let start = Instant::now();
    let mut o = Outcome::new();
    f(&mut o);
    let secs = start.elapsed().as_secs_f64();
    if let Some(b) = budget_s {
        o.part(secs < b, format!("runtime {secs:.1} s (budget {b} s)"));
    }
    println!("{} {label} [{secs:.1} s]", if o.pass { "PASS" } else { "FAIL" });
    for l in &o.lines {
        println!("       {l}");
    }
    o.pass
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    &a + a.adjoint()
}

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> PureState {
    PureState::normalized(CVector::from_fn(d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))).unwrap()
}

fn chain(l: usize, w: f64, seed: u64, index: u64) -> SpectralDecomposition<f64> {
    let p = XXZParams::new(l, w, seed);
    let dis = draw_disorder::<f64>(w, l, seed, index).unwrap();
    SpectralDecomposition::from_sectors(&xxz_sectors(&p, &dis).unwrap()).unwrap()
}

/// Product-state counts of the given twice-spins by twice-magnetization.
fn weight_counts(spins: &[u32]) -> BTreeMap<i64, u128> {
    let mut counts = BTreeMap::from([(0i64, 1u128)]);
    for &tj in spins {
        let mut next = BTreeMap::new();
        for (&m, &n) in &counts {
            for step in 0..=tj as i64 {
                *next.entry(m - tj as i64 + 2 * step).or_insert(0) += n;
            }
        }
        counts = next;
    }
    counts
}

/// Invariant subspace dimension of a tensor product, by weight counting.
fn invariants(spins: &[u32]) -> u128 {
    let c = weight_counts(spins);
    c.get(&0).copied().unwrap_or(0) - c.get(&2).copied().unwrap_or(0)
}

fn oracle_intertwiners(n: usize, twice_total: u32, prefix: &mut Vec<u32>) -> u128 {
    if prefix.len() == n {
        return if twice_total == 0 { invariants(prefix) } else { 0 };
    }
    (0..=twice_total)
        .map(|t| {
            prefix.push(t);
            let v = oracle_intertwiners(n, twice_total - t, prefix);
            prefix.pop();
            v
        })
        .sum()
}

fn criterion_1(o: &mut Outcome) {
    let mut cases = 0;
    let mut bad = Vec::new();
    for n in 1..=6u64 {
        for j0 in 0..=4u64 {
            let exact = intertwiner_dim(n, j0).unwrap();
            let oracle = BigUint::from(oracle_intertwiners(n as usize, 2 * j0 as u32, &mut Vec::new()));
            cases += 1;
            if exact != oracle {
                bad.push(format!("(N={n}, J0={j0}): {exact} vs {oracle}"));
            }
        }
    }
    o.part(bad.is_empty() && cases >= 20, format!("intertwiner_dim vs enumeration: {cases} cases, mismatches {bad:?}"));
    let mut sum_bad = Vec::new();
    for tj in 1..=3u32 {
        let t = FusionTable::new(TwiceSpin(tj), 20);
        for n in 1..=20usize {
            let total: BigUint = (0..=n as u32 * tj).map(|k| t.get(n, TwiceSpin(k)) * BigUint::from(k + 1)).sum();
            if total != BigUint::from(tj + 1).pow(n as u32) {
                sum_bad.push((tj, n));
            }
        }
    }
    o.part(sum_bad.is_empty(), format!("dimension sum rule j ≤ 3/2, n ≤ 20: failures {sum_bad:?}"));
    let mut worst: f64 = 0.0;
    for tj in 1..=3u32 {
        let t = FusionTable::new(TwiceSpin(tj), 12);
        for n in 1..=12usize {
            for k in (0..=n as u32 * tj).filter(|k| (n as u32 * tj - k) % 2 == 0) {
                let exact: f64 = t.get(n, TwiceSpin(k)).to_string().parse().unwrap();
                let q = character_integral(TwiceSpin(tj), n, TwiceSpin(k));
                let err = if exact == 0.0 { q.abs() } else { rel(q, exact) };
                worst = worst.max(err);
            }
        }
    }
    o.part(worst <= 1e-6, format!("quadrature cross-check n ≤ 12: worst relative error {worst:.2e} (tol 1e-6)"));
}

fn criterion_2(o: &mut Outcome) {
    let pre = levy_prefactor();
    o.part(rel(pre, 7e-3) <= 0.05, format!("prefactor 2/(9π³) = {pre:.4e} vs ≈ 7e-3"));
    let target = 5.6f64.log10() + 5992.0;
    for k in [1u64, 2] {
        let r = typicality_bound(&IntertwinerSpec::new(10_000, k, 10_000), 1e-10).unwrap();
        let diff = r.log10_levy_exponent - target;
        o.part(diff.abs() <= 1.0, format!("k={k}: log10 Levy exponent {:.3} vs {target:.3} (factor 10 = ±1)", r.log10_levy_exponent));
    }
    let r = typicality_bound(&IntertwinerSpec::new(10_000, 2, 10_000), 1e-10).unwrap();
    o.part(rel(r.area_threshold, 3e2) <= 0.2, format!("area threshold {:.1} vs 3e2 (20%)", r.area_threshold));
    o.part(rel(r.spin_threshold, 6e2) <= 0.2, format!("spin threshold {:.1} vs 6e2 (20%)", r.spin_threshold));
}

fn criterion_3(o: &mut Outcome) {
    let a = surface_entropy_regimes(&IntertwinerSpec::new(200, 2, 10)).unwrap();
    let s = a.exact.unwrap();
    o.part(rel(s, a.area_law) <= 0.2, format!("(200, 2, 10): exact {s:.4} vs area law {:.4}, rel {:.3} (tol 0.2)", a.area_law, rel(s, a.area_law)));
    let b = surface_entropy_regimes(&IntertwinerSpec::new(20, 2, 2000)).unwrap();
    let s = b.exact.unwrap();
    o.part(rel(s, b.large_spin) <= 0.1, format!("(20, 2, 2000): exact {s:.4} vs large spin {:.4}, rel {:.3} (tol 0.1)", b.large_spin, rel(s, b.large_spin)));
    let target = std::f64::consts::E / 2f64.sqrt();
    let alpha = b.alpha.unwrap();
    o.part(rel(alpha, target) <= 0.15, format!("(20, 2, 2000): α {alpha:.4} vs e/√2 = {target:.4}, rel {:.3} (tol 0.15)", rel(alpha, target)));
    let r = boundary_canonical_state(&FlowerGraphSpec { e: 8, l: 16, j0: TwiceSpin(1) }).unwrap();
    let s = r.exact_entropy.unwrap();
    o.part(
        rel(s, r.asymptotic_entropy) <= 0.05,
        format!("boundary (8, 16, 1/2): exact {s:.4} vs asymptotic {:.4}, rel {:.3} (tol 0.05)", r.asymptotic_entropy, rel(s, r.asymptotic_entropy)),
    );
}

fn criterion_4(o: &mut Outcome) {
    for tj in [1u32, 2, 10] {
        let mut flips = Vec::new();
        let mut disagreements = Vec::new();
        let mut compared = 0;
        for e in 1..=20usize {
            for l in 0..=20usize {
                let spec = FlowerGraphSpec { e, l, j0: TwiceSpin(tj) };
                let asym = asymptotic_boundary_bound(&spec);
                if 2 * l != e && (asym < 0.0) != (2 * l > e) {
                    flips.push((e, l));
                }
                if let Ok(r) = boundary_canonical_state(&spec) {
                    if let Some(x) = r.exact_ln_bound {
                        compared += 1;
                        if x.signum() != asym.signum() {
                            disagreements.push((e, l));
                        }
                    }
                }
            }
        }
        o.part(flips.is_empty(), format!("j0={}: asymptotic sign flips at E = 2L, off-threshold points {:?}", TwiceSpin(tj), flips));
        let shown: Vec<_> = disagreements.iter().take(6).collect();
        o.part(
            disagreements.is_empty(),
            format!("j0={}: exact vs asymptotic sign at {compared} points, {} disagreements, first {:?}", TwiceSpin(tj), disagreements.len(), shown),
        );
    }
}

fn criterion_5(o: &mut Outcome) {
    for p in [2usize, 3, 5, 7] {
        let f = mub_family_prime::<f64>(p).unwrap();
        let dev = f.max_pairwise_score().max(f.max_orthonormality_defect());
        o.part(f.bases().len() == p + 1 && dev <= 1e-10, format!("p={p}: {} bases, max deviation {dev:.2e}", f.bases().len()));
    }
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for d in [2usize, 3, 7, 16, 64] {
        let sd = diagonalize(&random_hermitian(&mut rng, d)).unwrap();
        worst = worst.max(unbiasedness_score(&sd.unitary(), &hub_from_spectrum(&sd)).unwrap());
    }
    for l in [2usize, 4, 6, 8, 10, 12] {
        let sd = chain(l, 1.0, 5, 0);
        worst = worst.max(unbiasedness_score(&sd.unitary(), &hub_from_spectrum(&sd)).unwrap());
    }
    o.part(worst <= 1e-10, format!("Fourier HUB, random D ≤ 64 and chains D = 2^2..2^12: max score {worst:.2e}"));
}

fn criterion_6(o: &mut Outcome) {
    let sd = chain(10, 1.0, 6, 0);
    let d = sd.dim();
    let obs = build_huo(&HUOSpec::from_spectrum(&sd, balanced_eigenvalues(d, 6)).unwrap()).unwrap();
    let a = observable_matrix_elements(&obs, &sd).unwrap().elements;
    let diag = (0..d).map(|i| a[(i, i)].norm_sqr().sqrt()).fold(0.0, f64::max);
    o.part(diag <= 1e-10, format!("D = {d}: max |A_nn| = {diag:.2e}"));
    let off: Vec<_> = (0..d).flat_map(|m| (0..d).filter(move |&n| n != m).map(move |n| (m, n))).map(|(m, n)| a[(m, n)]).collect();
    let mean = off.iter().fold(c(0.0, 0.0), |s, z| s + z) / c(off.len() as f64, 0.0);
    let std = (off.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (off.len() - 1) as f64).sqrt();
    let target = (1.0f64 / d as f64).sqrt();
    o.part(rel(std, target) <= 0.15, format!("off-diagonal std {std:.4e} vs 1/√D = {target:.4e}, rel {:.3} (tol 0.15)", rel(std, target)));
    let s = eth_scaling(&XXZParams::new(6, 1.0, 7), &[6, 8, 10], 5, &EthObservable::Huo, 0.5).unwrap();
    let slope = s.offdiag_std_fit.slope;
    let t = 0.5 * std::f64::consts::LN_2;
    o.part(rel(slope, t) <= 0.1, format!("slope of -ln(std) vs L: {slope:.4} vs {t:.4}, rel {:.3} (tol 0.1)", rel(slope, t)));
}

fn criterion_7(o: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let mut ok = 0;
    let mut failures = Vec::new();
    let mut worst_ortho: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    let mut square = (0, 0);
    for inst in 0..50 {
        let m = rng.random_range(1..=6usize);
        let min_dim = (2..=8usize).find(|&n| n * (n - 1) > m).unwrap();
        let blocks = rng.random_range(1..=3usize);
        let dims: Vec<usize> = (0..blocks).map(|_| rng.random_range(min_dim..=8)).collect();
        let d: usize = dims.iter().sum();
        let states: Vec<PureState> = (0..m).map(|_| random_state(&mut rng, d)).collect();
        let opts = SimplexOptions { seed: inst, ..SimplexOptions::default() };
        let wide = dims.iter().all(|&n| n >= m);
        square.0 += wide as usize;
        match simplex_unbiased_basis(&states, &dims, &opts) {
            Ok(b) => {
                let u = b.unitary();
                let ortho = unitarity_defect(&u);
                let res = b.bases.iter().map(|e| theorem_residual(&states, e)).fold(0.0, f64::max);
                worst_ortho = worst_ortho.max(ortho);
                worst_res = worst_res.max(res);
                if ortho <= 1e-10 && res <= 1e-8 {
                    ok += 1;
                    square.1 += wide as usize;
                } else {
                    failures.push(format!("#{inst} M={m} dims={dims:?}: defect {ortho:.1e}, residual {res:.1e}"));
                }
            }
            Err(e) => failures.push(format!("#{inst} M={m} dims={dims:?}: {e}")),
        }
    }
    o.part(failures.is_empty(), format!("{ok}/50 feasible instances constructed (max defect {worst_ortho:.1e}, max residual {worst_res:.1e})"));
    o.lines.push(format!("       instances with every D_j ≥ M: {} of {} constructed", square.1, square.0));
    for f in failures.iter().take(8) {
        o.lines.push(format!("       {f}"));
    }
    let mut wrong = Vec::new();
    for inst in 0..20 {
        let m = rng.random_range(2..=6usize);
        let dims: Vec<usize> = (0..rng.random_range(2..=4usize)).map(|_| rng.random_range(1..=8usize)).collect();
        let d: usize = dims.iter().sum();
        let expect: Vec<usize> = dims.iter().enumerate().filter(|(_, &n)| n > 1 && n * (n - 1) <= m).map(|(j, _)| j).collect();
        let states: Vec<PureState> = (0..m).map(|_| random_state(&mut rng, d)).collect();
        if expect.is_empty() {
            continue;
        }
        match simplex_unbiased_basis(&states, &dims, &SimplexOptions::default()) {
            Err(thermolab::Error::InfeasibleSubspace(got)) if got == expect => {}
            other => wrong.push(format!("#{inst} dims={dims:?} M={m}: {:?}", other.err())),
        }
    }
    o.part(wrong.is_empty(), format!("infeasible instances reject the violating subspaces: {wrong:?}"));
}

fn criterion_8(o: &mut Outcome) {
    let s = magnetization_theorem_scan(&(14..=24).collect::<Vec<_>>()).unwrap();
    o.part((s.slope - 1.56).abs() <= 0.1, format!("q(N) slope over N ∈ [14, 24]: {:.4} vs 1.56 ± 0.1", s.slope));
}

fn criterion_9(o: &mut Outcome) {
    let grid_run = |w: f64, axis: Axis| MblRun::new(XXZParams::new(10, w, 9), 50, InitialState::Neel { axis });
    for (w, limits) in [(1.0, [(Axis::X, false), (Axis::Y, false), (Axis::Z, false)]), (10.0, [(Axis::X, false), (Axis::Y, false), (Axis::Z, true)])] {
        for (axis, frozen) in limits {
            let run = grid_run(w, axis);
            let mag = local_magnetization_run::<f64>(&run, axis).unwrap();
            let stag: Vec<f64> = staggered_magnetization(&mag).iter().map(|x| x.abs()).collect();
            let late = window_average(&mag.times, &stag, 100.0, 1000.0).unwrap();
            let ok = if frozen { late >= 0.5 } else { late <= 0.1 };
            o.part(ok, format!("W={w}, axis {}: late |m_s| = {late:.4} ({})", axis.label(), if frozen { "≥ 0.5" } else { "≤ 0.1" }));
        }
    }
    for w in [1.0, 10.0] {
        let run = grid_run(w, Axis::X);
        let ent = local_entropies_run::<f64>(&run).unwrap();
        let s = ent.series("S").unwrap();
        let t = ent.series("T").unwrap();
        let defect = t.iter().zip(s).map(|(t, s)| (t - 10.0 * s).abs()).fold(0.0, f64::max);
        o.part(defect <= 1e-12, format!("W={w}: max |T - L S| = {defect:.2e}"));
        if w == 10.0 {
            match log_modulation_fit(&ent.times, s, 1.0, 1000.0) {
                Ok(f) => o.part(
                    f.slope > 0.0 && f.r_squared >= 0.8,
                    format!("W=10 log fit: slope {:.4}, R² {:.3} over {} minima (need slope > 0, R² ≥ 0.8)", f.slope, f.r_squared, f.minima.len()),
                ),
                Err(e) => o.part(false, format!("W=10 log fit: {e}")),
            }
        } else {
            let sat = window_average(&ent.times, s, 100.0, 1000.0).unwrap();
            let at = ent.times.iter().position(|&x| x >= 100.0).unwrap();
            o.part(s[at] >= 0.9 * sat, format!("W=1: S(t={:.1}) = {:.4} vs 0.9 × saturation {sat:.4}", ent.times[at], s[at]));
        }
    }
}

fn criterion_10(o: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let (mut unit, mut cons, mut gibbs) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let d = rng.random_range(1..=12usize);
        let sd = diagonalize(&random_hermitian(&mut rng, d)).unwrap();
        unit = unit.max(unitarity_defect(&sd.unitary()));
        let psi = random_state(&mut rng, d);
        let t = rng.random_range(-50.0..50.0);
        let p0 = sd.energy_probabilities(&psi).unwrap();
        let pt = sd.energy_probabilities(&evolve(&sd, &psi, t).unwrap()).unwrap();
        cons = cons.max(p0.iter().zip(&pt).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let beta = rng.random_range(0.0..10.0);
        let g = gibbs_state(&sd, beta).unwrap();
        let lhs = von_neumann_entropy(&g).unwrap();
        let rhs = log_partition(&sd, beta) + beta * g.expectation(&sd.operator()).unwrap();
        gibbs = gibbs.max((lhs - rhs).abs());
    }
    o.part(unit <= 1e-12, format!("1000 eigenbases: max unitarity defect {unit:.2e} (tol 1e-12)"));
    o.part(cons <= 1e-12, format!("1000 evolutions: max energy-distribution drift {cons:.2e} (tol 1e-12)"));
    o.part(gibbs <= 1e-8, format!("1000 Gibbs states, β ∈ [0, 10]: max |S - ln Z - β⟨H⟩| {gibbs:.2e} (tol 1e-8)"));
}

fn example_residual_at_start(o: &mut Outcome) {
    let l = 8;
    let sd = chain(l, 1.0, 8, 0);
    let neel = neel_state::<f64>(l, Axis::X).unwrap();
    let obs = local_pauli::<f64>(l, 0, Axis::X).unwrap();
    let r = equilibrium_residuals(&neel.density(), &obs, &sd, None).unwrap();
    o.part(r.r1 > 0.0, format!("Néel-x, σx on site 0, t = 0: R1 = {:.2e} (need > 0)", r.r1));
}

fn example_two_leg_boundary(o: &mut Outcome) {
    let r = boundary_canonical_state(&FlowerGraphSpec { e: 2, l: 0, j0: TwiceSpin(1) }).unwrap();
    let s = r.exact_entropy.unwrap();
    let d = r.state.as_ref().map(|s| s.d_fr.to_string()).unwrap_or_default();
    o.part((s - std::f64::consts::LN_2).abs() <= 1e-12, format!("E=2, L=0, j0=1/2: d_FR = {d}, exact entropy {s:.6} vs ln 2"));
}

fn example_weight_ratio(o: &mut Outcome) {
    let r = boundary_canonical_state(&FlowerGraphSpec { e: 8, l: 32, j0: TwiceSpin(1) }).unwrap();
    let st = r.state.unwrap();
    let exact = st.weight_f64(TwiceSpin(2)) / st.weight_f64(TwiceSpin(0));
    let asym = asymptotic_weight_factor(TwiceSpin(2)) / asymptotic_weight_factor(TwiceSpin(0));
    o.part(rel(exact, asym) <= 0.1, format!("E=8, L=32, j0=1/2: W_1/W_0 exact {exact:.4} vs asymptotic {asym:.4}, rel {:.3} (tol 0.1)", rel(exact, asym)));
}

fn main() {
    println!("thermolab acceptance");
    let criteria: [(&str, Option<f64>, fn(&mut Outcome)); 10] = [
        ("1 exact combinatorics", Some(10.0), criterion_1),
        ("2 typicality numerics", None, criterion_2),
        ("3 entropy asymptotics", Some(120.0), criterion_3),
        ("4 boundary threshold", None, criterion_4),
        ("5 unbiased bases", Some(30.0), criterion_5),
        ("6 unbiased observable and ETH", None, criterion_6),
        ("7 unbiased construction", None, criterion_7),
        ("8 magnetization scan", None, criterion_8),
        ("9 disordered chain dynamics", Some(1800.0), criterion_9),
        ("10 spectral invariants", Some(60.0), criterion_10),
    ];
    let mut failed = Vec::new();
    for (label, budget, f) in criteria {
        if !report(label, budget, f) {
            failed.push(label);
        }
    }
    println!("examples");
    let examples: [(&str, fn(&mut Outcome)); 3] = [
        ("E1 residual at t = 0", example_residual_at_start),
        ("E2 two-leg boundary entropy", example_two_leg_boundary),
        ("E3 boundary weight ratio", example_weight_ratio),
    ];
    for (label, f) in examples {
        if !report(label, None, f) {
            failed.push(label);
        }
    }
    println!("{} of {} checks failed: {failed:?}", failed.len(), criteria.len() + examples.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
