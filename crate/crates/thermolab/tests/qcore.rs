use nalgebra::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermolab::linalg::{cmatmul, herm_eigvals, max_abs};
use thermolab::qcore::*;
use thermolab::{CMatrix, CVector, DensityMatrix, ObservableSpectral, PureState};

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn ket(v: &[f64]) -> PureState {
    PureState::normalized(CVector::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0)))).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, d: usize) -> PureState {
    PureState::normalized(CVector::from_fn(d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))).unwrap()
}

fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let m = cmatmul(&a, &a.adjoint());
    let tr = m.trace();
    DensityMatrix::new(m / tr).unwrap()
}

fn bell() -> PureState {
    ket(&[1.0, 0.0, 0.0, 1.0])
}

#[test]
fn state_validation() {
    assert!(PureState::new(CVector::from_element(2, c(1.0, 0.0))).is_err());
    assert!(PureState::normalized(CVector::zeros(3)).is_err());
    assert!(DensityMatrix::new(CMatrix::from_diagonal_element(2, 2, c(1.0, 0.0))).is_err());
    let neg = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
    assert!(DensityMatrix::new(neg).is_err());
    let nonherm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
    assert!(DensityMatrix::new(nonherm).is_err());
}

#[test]
fn tensor_examples() {
    let z = PureState::basis(2, 0).unwrap();
    let zz = tensor_product(&z, &z);
    assert_eq!(zz.amplitudes(), PureState::basis(4, 0).unwrap().amplitudes());
    let mixed = tensor_product(&DensityMatrix::maximally_mixed(2), &DensityMatrix::maximally_mixed(2));
    assert!(max_abs(&(mixed.matrix() - DensityMatrix::maximally_mixed(4).matrix())) < 1e-15);
    let plus = ket(&[1.0, 1.0]);
    let got = tensor_product(&plus, &z);
    assert!((got.amplitudes() - ket(&[1.0, 0.0, 1.0, 0.0]).amplitudes()).norm() < 1e-15);
}

#[test]
fn partial_trace_examples() {
    let r = reduced_state(&bell(), &[2, 2], &[0]).unwrap();
    assert!(max_abs(&(r.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sigma = random_density(&mut rng, 2);
    let prod = tensor_product(&PureState::basis(2, 0).unwrap().density(), &sigma);
    let r = partial_trace(&prod, &[2, 2], &[0]).unwrap();
    assert!(max_abs(&(r.matrix() - PureState::basis(2, 0).unwrap().density().matrix())) < 1e-14);
    let r = partial_trace(&prod, &[2, 2], &[1]).unwrap();
    assert!(max_abs(&(r.matrix() - sigma.matrix())) < 1e-14);
}

#[test]
fn ghz_single_site_marginals() {
    for l in 2..=6usize {
        let d = 1 << l;
        let mut v = vec![0.0; d];
        v[0] = 1.0;
        v[d - 1] = 1.0;
        let ghz = ket(&v);
        let rho = ghz.density();
        for site in 0..l {
            let r = partial_trace(&rho, &vec![2; l], &[site]).unwrap();
            // Direct oracle: sum of |ψ_{s}|² over basis states with the given bit.
            let bit = 1 << (l - 1 - site);
            let mut direct = CMatrix::zeros(2, 2);
            for a in 0..2 {
                for b in 0..2 {
                    for s in 0..d {
                        let sa = if a == 0 { s & !bit } else { s | bit };
                        let sb = if b == 0 { s & !bit } else { s | bit };
                        if s == sa && (s & !bit) == (sb & !bit) {
                            direct[(a, b)] += rho.matrix()[(sa, sb)];
                        }
                    }
                }
            }
            assert!(max_abs(&(r.matrix() - &direct)) < 1e-14);
            assert!(max_abs(&(r.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-14);
        }
    }
}

#[test]
fn partial_trace_rejects_bad_dims() {
    let rho = DensityMatrix::maximally_mixed(4);
    assert!(partial_trace(&rho, &[2, 3], &[0]).is_err());
    assert!(partial_trace(&rho, &[2, 2], &[2]).is_err());
    assert!(partial_trace(&rho, &[2, 2], &[]).is_err());
}

#[test]
fn entropy_examples() {
    assert!(von_neumann_entropy(&bell().density()).unwrap().abs() < 1e-12);
    for d in [2usize, 5, 16] {
        let s = von_neumann_entropy(&DensityMatrix::maximally_mixed(d)).unwrap();
        assert!((s - (d as f64).ln()).abs() < 1e-13);
        assert!((renyi_entropy(&DensityMatrix::maximally_mixed(d), 2.0).unwrap() - (d as f64).ln()).abs() < 1e-13);
    }
    let r = reduced_state(&bell(), &[2, 2], &[1]).unwrap();
    assert!((von_neumann_entropy(&r).unwrap() - 2f64.ln()).abs() < 1e-14);
}

#[test]
fn distribution_examples() {
    let sz = ObservableSpectral::from_diagonal(&[1.0, -1.0]).unwrap();
    let up_x = ket(&[1.0, 1.0]);
    let p = eigenvalue_distribution(&up_x.density(), &sz).unwrap();
    assert!(p.probs.iter().all(|&x| (x - 0.5).abs() < 1e-15));
    let p = pure_eigenvalue_distribution(&up_x, &sz).unwrap();
    assert!((shannon_entropy(&p) - 2f64.ln()).abs() < 1e-14);

    let obs = ObservableSpectral::from_diagonal(&[2.0, 1.0, 2.0, 3.0, 2.0, 1.0]).unwrap();
    assert_eq!(obs.values(), &[1.0, 2.0, 3.0]);
    assert_eq!(obs.degeneracies(), &[2, 3, 1]);
    let p = eigenvalue_distribution(&DensityMatrix::maximally_mixed(6), &obs).unwrap();
    for (pj, dj) in p.probs.iter().zip(obs.degeneracies()) {
        assert!((pj - *dj as f64 / 6.0).abs() < 1e-15);
    }
    let eig = PureState::basis(6, 3).unwrap();
    let p = eigenvalue_distribution(&eig.density(), &obs).unwrap();
    assert_eq!(p.probs, vec![0.0, 0.0, 1.0]);
    assert_eq!(shannon_entropy(&p), 0.0);
    let uniform = EigenvalueDistribution::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.25; 4]).unwrap();
    assert!((shannon_entropy(&uniform) - 4f64.ln()).abs() < 1e-15);
}

#[test]
fn distance_examples() {
    let zero = PureState::basis(2, 0).unwrap().density();
    let one = PureState::basis(2, 1).unwrap().density();
    assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-15);
    assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
    assert!((trace_distance(&zero, &DensityMatrix::maximally_mixed(2)).unwrap() - 0.5).abs() < 1e-15);
    assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
    assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
}

#[test]
fn observable_from_hermitian_reconstructs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = CMatrix::from_fn(6, 6, |_, _| c(rng.random::<f64>(), rng.random::<f64>()));
    let h = &a + a.adjoint();
    let obs = ObservableSpectral::from_hermitian(&h).unwrap();
    assert!(max_abs(&(obs.operator() - &h)) < 1e-12);
    assert!(obs.projector_defect() < 1e-12);
    let vals = herm_eigvals(&h);
    for (x, y) in obs.column_values().iter().zip(&vals) {
        assert!((x - y).abs() < 1e-12);
    }
    let sum: CMatrix = (0..obs.outcomes()).map(|j| obs.projector(j)).fold(CMatrix::zeros(6, 6), |acc, p| acc + p);
    assert!(max_abs(&(sum - CMatrix::identity(6, 6))) < 1e-12);
}

#[test]
fn observable_rejects_nonhermitian() {
    let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    assert!(ObservableSpectral::from_hermitian(&m).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_and_entropy_bounds(seed in any::<u64>(), na in 1usize..4, nb in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(&mut rng, na * nb);
        let ra = reduced_state(&psi, &[na, nb], &[0]).unwrap();
        let rb = reduced_state(&psi, &[na, nb], &[1]).unwrap();
        prop_assert!((ra.matrix().trace().re - 1.0).abs() < 1e-12);
        let sa = von_neumann_entropy(&ra).unwrap();
        let sb = von_neumann_entropy(&rb).unwrap();
        prop_assert!((sa - sb).abs() < 1e-9);
        prop_assert!(sa >= -1e-12 && sa <= (na.min(nb) as f64).ln() + 1e-12);
    }

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>(), d in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, x) = (random_density(&mut rng, d), random_density(&mut rng, d), random_density(&mut rng, d));
        let ab = trace_distance(&a, &b).unwrap();
        prop_assert!((ab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(ab <= trace_distance(&a, &x).unwrap() + trace_distance(&x, &b).unwrap() + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        let f = fidelity(&a, &b).unwrap();
        prop_assert!(1.0 - f.sqrt() <= ab + 1e-9 && ab <= (1.0 - f).sqrt() + 1e-9);
    }
}
