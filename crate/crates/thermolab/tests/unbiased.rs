use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermolab::qcore::{pure_eigenvalue_distribution, shannon_entropy, ObservableSpectral, PureState};
use thermolab::scalar::CVector;
use thermolab::spectral::{diagonal_ensemble, diagonalize, microcanonical_state, EnergyWindow};
use thermolab::unbiased::*;
use thermolab::{CMatrix, Error};

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> PureState<f64> {
    let v = CVector::from_fn(d, |_, _| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    PureState::normalized(v).unwrap()
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    &a + a.adjoint()
}

#[test]
fn qubit_family_is_pauli_eigenbases() {
    let fam = mub_family_prime::<f64>(2).unwrap();
    assert_eq!(fam.bases().len(), 3);
    for b in fam.bases() {
        for other in fam.bases() {
            if !std::ptr::eq(b, other) {
                for j in 0..2 {
                    for k in 0..2 {
                        let o = b.column(j).dotc(&other.column(k)).norm_sqr();
                        assert!((o - 0.5).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn prime_families_are_unbiased_and_orthonormal() {
    for p in [3usize, 5, 7, 11] {
        let fam = mub_family_prime::<f64>(p).unwrap();
        assert_eq!(fam.bases().len(), p + 1);
        assert!(fam.max_pairwise_score() < 1e-10, "p={p}");
        assert!(fam.max_orthonormality_defect() < 1e-10);
    }
}

#[test]
fn p3_overlaps_by_direct_enumeration() {
    let fam = mub_family_prime::<f64>(3).unwrap();
    let mut checks = 0;
    for a in 0..4 {
        for b in a + 1..4 {
            for j in 0..3 {
                for k in 0..3 {
                    let o = fam.bases()[a].column(j).dotc(&fam.bases()[b].column(k)).norm_sqr();
                    assert!((o - 1.0 / 3.0).abs() < 1e-12);
                    checks += 1;
                }
            }
        }
    }
    assert_eq!(checks, 9 * 6);
}

#[test]
fn composite_dimension_rejected() {
    assert!(matches!(mub_family_prime::<f64>(4), Err(Error::Config(_))));
    assert!(matches!(mub_family_prime::<f64>(37), Err(Error::Config(_))));
}

#[test]
fn identical_bases_have_maximal_bias() {
    let id = CMatrix::identity(5, 5);
    assert!((unbiasedness_score(&id, &id).unwrap() - 4.0).abs() < 1e-12);
    assert!(matches!(unbiasedness_score(&id, &CMatrix::identity(4, 4)), Err(Error::Dimension(_))));
}

#[test]
fn fourier_hub_of_sigma_z_is_sigma_x_basis() {
    let mut h = CMatrix::zeros(2, 2);
    h[(0, 0)] = Complex::new(1.0, 0.0);
    h[(1, 1)] = Complex::new(-1.0, 0.0);
    let sd = diagonalize(&h).unwrap();
    let hub = hub_from_spectrum(&sd);
    for c in 0..2 {
        assert!((hub[(0, c)].norm_sqr() - 0.5).abs() < 1e-14);
        assert!((hub[(1, c)].norm_sqr() - 0.5).abs() < 1e-14);
    }
    let x = mub_family_prime::<f64>(2).unwrap().bases()[1].clone();
    assert!(unbiasedness_score(&hub, &CMatrix::identity(2, 2)).unwrap() < 1e-14);
    assert!((unbiasedness_score(&hub, &x).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn fourier_hub_random_hamiltonian() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sd = diagonalize(&random_hermitian(&mut rng, 16)).unwrap();
    let hub = hub_from_spectrum(&sd);
    assert!(unbiasedness_score(&sd.unitary(), &hub).unwrap() < 1e-10);
    let obs = ObservableSpectral::from_eigenbasis(&(0..16).map(|k| k as f64).collect::<Vec<_>>(), &hub).unwrap();
    for n in 0..16 {
        let psi = PureState::new(sd.vector(n)).unwrap();
        let h = shannon_entropy(&pure_eigenvalue_distribution(&psi, &obs).unwrap());
        assert!((h - 16f64.ln()).abs() < 1e-10);
    }
}

#[test]
fn entropic_uncertainty_energy_vs_hub() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in [8usize, 16, 64] {
        let sd = diagonalize(&random_hermitian(&mut rng, d)).unwrap();
        let labels: Vec<f64> = (0..d).map(|k| k as f64).collect();
        let energy_obs = ObservableSpectral::from_eigenbasis(&labels, &sd.unitary()).unwrap();
        let hub_obs = ObservableSpectral::from_eigenbasis(&labels, &hub_from_spectrum(&sd)).unwrap();
        for _ in 0..(if d == 64 { 100 } else { 400 }) {
            let psi = random_state(&mut rng, d);
            let he = shannon_entropy(&pure_eigenvalue_distribution(&psi, &energy_obs).unwrap());
            let hh = shannon_entropy(&pure_eigenvalue_distribution(&psi, &hub_obs).unwrap());
            assert!(he + hh >= (d as f64).ln() - 1e-8);
        }
    }
}

#[test]
fn huo_diagonals_equal_trace_over_dimension() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sd = diagonalize(&random_hermitian(&mut rng, 12)).unwrap();
    let a: Vec<f64> = (0..12).map(|_| rng.random::<f64>()).collect();
    let mean = a.iter().sum::<f64>() / 12.0;
    let obs = build_huo(&HUOSpec::from_spectrum(&sd, a).unwrap()).unwrap();
    let op = obs.operator();
    for n in 0..12 {
        let v = sd.vector(n);
        let d = v.dotc(&(&op * &v));
        assert!((d.re - mean).abs() < 1e-10);
    }
}

#[test]
fn balanced_huo_dephased_equals_microcanonical() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sd = diagonalize(&random_hermitian(&mut rng, 4)).unwrap();
    let obs = build_huo(&HUOSpec::from_spectrum(&sd, vec![1.0, 1.0, -1.0, -1.0]).unwrap()).unwrap();
    let op = obs.operator();
    let full = EnergyWindow::new(0.0, 1e6).unwrap();
    let mc = microcanonical_state(&sd, &full).unwrap().expectation(&op).unwrap();
    assert!(mc.abs() < 1e-10);
    for _ in 0..20 {
        let psi = random_state(&mut rng, 4);
        let de = diagonal_ensemble(&sd, &psi).unwrap().expectation(&op).unwrap();
        assert!((de - mc).abs() < 1e-10);
    }
}

#[test]
fn circulant_energy_matrix_matches_dense_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sd = diagonalize(&random_hermitian(&mut rng, 10)).unwrap();
    let a: Vec<f64> = (0..10).map(|_| rng.random::<f64>() - 0.5).collect();
    let op = build_huo(&HUOSpec::from_spectrum(&sd, a.clone()).unwrap()).unwrap().operator();
    let u = sd.unitary();
    let dense = u.adjoint() * op * u;
    assert!(thermolab::linalg::max_abs(&(dense - fourier_huo_energy_matrix(&a))) < 1e-12);
}

#[test]
fn simplex_vertices() {
    for n in 2..9 {
        let s = regular_simplex::<f64>(n);
        let sum = s.column_sum();
        assert!(sum.norm() < 1e-10);
        for i in 0..n {
            assert!((s.column(i).norm() - 1.0).abs() < 1e-12);
            for j in i + 1..n {
                assert!((s.column(i).dot(&s.column(j)) + 1.0 / (n as f64 - 1.0)).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn single_state_qubit_subspace() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let psi = random_state(&mut rng, 2);
    let out = simplex_unbiased_basis(&[psi.clone()], &[2], &SimplexOptions::default()).unwrap();
    let u = out.unitary();
    assert!(thermolab::linalg::unitarity_defect(&u) < 1e-10);
    for k in 0..2 {
        assert!((u.column(k).dotc(psi.amplitudes()).norm_sqr() - 0.5).abs() < 1e-10);
    }
}

#[test]
fn four_states_in_two_blocks_of_four() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let states: Vec<_> = (0..4).map(|_| random_state(&mut rng, 8)).collect();
    let out = simplex_unbiased_basis(&states, &[4, 4], &SimplexOptions::default()).unwrap();
    let u = out.unitary();
    assert!(thermolab::linalg::unitarity_defect(&u) < 1e-10);
    for b in &out.bases {
        assert!(theorem_residual(&states, b) < 1e-8);
    }
}

#[test]
fn dimension_condition_violation_lists_subspaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let states: Vec<_> = (0..2).map(|_| random_state(&mut rng, 5)).collect();
    match simplex_unbiased_basis(&states, &[2, 3], &SimplexOptions::default()) {
        Err(Error::InfeasibleSubspace(list)) => assert_eq!(list, vec![0]),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn magnetization_scan_shapes() {
    let scan = magnetization_theorem_scan(&[14, 16, 18, 20, 22, 24]).unwrap();
    for r in &scan.rows {
        assert_eq!(r.q, 2 * r.j_star + 1);
    }
    let zero = scan.large_deviation.iter().find(|r| r.n == 20 && r.j == 0).unwrap();
    assert!(zero.ln_estimate.abs() < 1e-12);
    let max_ratio = scan.large_deviation.iter().filter(|r| r.n == 20).map(|r| r.ln_ratio).fold(f64::MIN, f64::max);
    assert_eq!(max_ratio, zero.ln_ratio);
    assert!(matches!(magnetization_theorem_scan(&[25]), Err(Error::Config(_))));
}

#[test]
fn magnetization_degeneracies_sum_to_dimension() {
    for n in 1..=24usize {
        let total: u128 = (0..=n).map(|j| magnetization_degeneracy(n, j) * if j == 0 { 1 } else { 2 }).sum();
        assert_eq!(total, 1u128 << n);
    }
}
