use ndarray::{array, Array2};
use proptest::prelude::*;

use super::pauli::*;
use super::*;
use crate::linalg::max_abs;

/// Deterministic pseudo-random complex matrix (SplitMix-style stream).
pub fn rand_matrix(n: usize, seed: u64) -> CMat {
    let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut next = move || {
        s ^= s >> 30;
        s = s.wrapping_mul(0xbf58476d1ce4e5b9);
        s ^= s >> 27;
        s = s.wrapping_mul(0x94d049bb133111eb);
        s ^= s >> 31;
        s = s.wrapping_add(0x9e3779b97f4a7c15);
        ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    };
    Array2::from_shape_fn((n, n), |_| C64::new(next(), next()))
}

/// Deterministic random density matrix on `n` qubits.
pub fn rand_density(n: usize, seed: u64) -> CMat {
    let d = 1usize << n;
    let g = rand_matrix(d, seed);
    let rho = g.dot(&g.t().mapv(|z| z.conj()));
    let tr: C64 = rho.diag().sum();
    rho.mapv(|z| z / tr.re)
}

pub fn rand_unitary(n_dim: usize, seed: u64) -> CMat {
    // QR-free: exponentiate a random skew-Hermitian matrix
    let g = rand_matrix(n_dim, seed);
    let sk = (&g - &g.t().mapv(|z: C64| z.conj())).mapv(|z| z * 0.5);
    matrix_exponential(&sk).unwrap()
}

fn cnot_matrix() -> CMat {
    let mut m = CMat::zeros((4, 4));
    m[[0, 0]] = ONE;
    m[[1, 1]] = ONE;
    m[[2, 3]] = ONE;
    m[[3, 2]] = ONE;
    m
}

#[test]
fn unitary_superoperator_identity() {
    let s = unitary_superoperator(&CMat::eye(2)).unwrap();
    assert!(max_abs(&(s.matrix() - &CMat::eye(4))) < 1e-15);
}

#[test]
fn unitary_superoperator_bit_flip() {
    let s = unitary_superoperator(&pauli_x()).unwrap();
    let up = DensityMatrix::all_up(1);
    let flipped = s.apply(up.matrix()).unwrap();
    let mut down = CMat::zeros((2, 2));
    down[[1, 1]] = ONE;
    assert!(max_abs(&(&flipped - &down)) < 1e-15);
}

#[test]
fn unitary_superoperator_cnot_matches_conjugation() {
    let u = cnot_matrix();
    let s = unitary_superoperator(&u).unwrap();
    let udag = u.t().mapv(|z| z.conj());
    for k in 0..20 {
        let rho = rand_density(2, 100 + k);
        let via_superop = s.apply(&rho).unwrap();
        let direct = u.dot(&rho).dot(&udag);
        assert!(max_abs(&(&via_superop - &direct)) < 1e-10);
    }
}

#[test]
fn unitary_superoperator_rejects_non_unitary() {
    let m = array![[ONE, ONE], [ZERO, ONE]];
    assert!(unitary_superoperator(&m).is_err());
}

#[test]
fn lindblad_pure_damping_steady_state() {
    let l = lindblad_superoperator(&CMat::zeros((2, 2)), &[(sigma_minus(), 0.8)]).unwrap();
    let channel = matrix_exponential(&l.matrix().mapv(|z| z * 80.0)).unwrap();
    let s = Superoperator::new(channel).unwrap();
    let rho = rand_density(1, 5);
    let out = s.apply(&rho).unwrap();
    let ground = DensityMatrix::all_up(1);
    assert!(max_abs(&(&out - ground.matrix())) < 1e-10);
}

#[test]
fn lindblad_pauli_noise_fixes_maximally_mixed() {
    let g = 0.3;
    let jumps = vec![(pauli_x(), g), (pauli_y(), g), (pauli_z(), g)];
    let l = lindblad_superoperator(&CMat::zeros((2, 2)), &jumps).unwrap();
    let mixed = DensityMatrix::maximally_mixed(1);
    let deriv = l.apply(mixed.matrix()).unwrap();
    assert!(max_abs(&deriv) < 1e-14);
}

#[test]
fn lindblad_damped_qubit_matches_rk4_oracle() {
    // H = -(eps/2) Z with sigma- damping: excited population decays e^{-gt}
    let eps = 1.3;
    let gamma = 0.45;
    let h = pauli_z().mapv(|z| z * (-eps / 2.0));
    let jumps = vec![(sigma_minus(), gamma)];
    let l = lindblad_superoperator(&h, &jumps).unwrap();

    // independent RK4 integrator on the matrix-valued RHS
    let rhs = |rho: &CMat| -> CMat {
        let commutator = rho.dot(&h) - h.dot(rho);
        let a = sigma_minus();
        let adag = a.t().mapv(|z: C64| z.conj());
        let ada = adag.dot(&a);
        let diss = a.dot(rho).dot(&adag) - (ada.dot(rho) + rho.dot(&ada)).mapv(|z| z * 0.5);
        commutator.mapv(|z| z * C64::new(0.0, 1.0)) + diss.mapv(|z| z * gamma)
    };
    let mut rho = rand_density(1, 21);
    let rho0 = rho.clone();
    let t_final = 2.0;
    let steps = 4000;
    let dt = t_final / steps as f64;
    for _ in 0..steps {
        let k1 = rhs(&rho);
        let k2 = rhs(&(&rho + &k1.mapv(|z| z * (dt / 2.0))));
        let k3 = rhs(&(&rho + &k2.mapv(|z| z * (dt / 2.0))));
        let k4 = rhs(&(&rho + &k3.mapv(|z| z * dt)));
        rho = &rho
            + &(k1 + k2.mapv(|z| z * 2.0) + k3.mapv(|z| z * 2.0) + k4)
                .mapv(|z| z * (dt / 6.0));
    }
    let channel = matrix_exponential(&l.matrix().mapv(|z| z * t_final)).unwrap();
    let exact = Superoperator::new(channel).unwrap().apply(&rho0).unwrap();
    assert!(max_abs(&(&exact - &rho)) < 1e-7);
    // analytic population decay
    let p1 = exact[[1, 1]].re;
    let expected = rho0[[1, 1]].re * (-gamma * t_final).exp();
    assert!((p1 - expected).abs() < 1e-10);
}

#[test]
fn lindblad_rejects_negative_rate() {
    let r = lindblad_superoperator(&CMat::zeros((2, 2)), &[(sigma_minus(), -0.1)]);
    assert!(r.is_err());
}

#[test]
fn partial_trace_product_state() {
    let a = rand_density(1, 31);
    let b = rand_density(2, 32);
    let rho = DensityMatrix::new_unchecked(kron(&a, &b)).unwrap();
    let ra = partial_trace(&rho, &[0]).unwrap();
    assert!(max_abs(&(ra.matrix() - &a)) < 1e-12);
    let rb = partial_trace(&rho, &[1, 2]).unwrap();
    assert!(max_abs(&(rb.matrix() - &b)) < 1e-12);
}

#[test]
fn partial_trace_bell_state() {
    let inv = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let psi = [inv, ZERO, ZERO, inv];
    let rho = DensityMatrix::from_state_vector(&psi).unwrap();
    for q in 0..2 {
        let r = partial_trace(&rho, &[q]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(1);
        assert!(max_abs(&(r.matrix() - mixed.matrix())) < 1e-12);
    }
}

#[test]
fn partial_trace_matches_summation_oracle() {
    // independent oracle: reduced[ab, a'b'] = sum_c rho[(a c b), (a' c b')]
    // for keep = {0, 2} of a 3-qubit state, written out with explicit index
    // arithmetic distinct from the implementation's.
    let rho = DensityMatrix::new_unchecked(rand_density(3, 77)).unwrap();
    let got = partial_trace(&rho, &[0, 2]).unwrap();
    let m = rho.matrix();
    let mut oracle = CMat::zeros((4, 4));
    for a in 0..2usize {
        for b in 0..2usize {
            for ap in 0..2usize {
                for bp in 0..2usize {
                    let mut s = ZERO;
                    for c in 0..2usize {
                        let row = a * 4 + c * 2 + b;
                        let col = ap * 4 + c * 2 + bp;
                        s += m[[row, col]];
                    }
                    oracle[[a * 2 + b, ap * 2 + bp]] = s;
                }
            }
        }
    }
    assert!(max_abs(&(got.matrix() - &oracle)) < 1e-12);
    assert!((got.trace().re - 1.0).abs() < 1e-12);
}

#[test]
fn partial_trace_rejects_bad_keep_sets() {
    let rho = DensityMatrix::maximally_mixed(2);
    assert!(partial_trace(&rho, &[]).is_err());
    assert!(partial_trace(&rho, &[2]).is_err());
    assert!(partial_trace(&rho, &[0, 0]).is_err());
}

#[test]
fn purity_values() {
    let pure = DensityMatrix::all_up(2);
    assert!((purity(&pure) - 1.0).abs() < 1e-14);
    let mixed2 = DensityMatrix::maximally_mixed(2);
    assert!((purity(&mixed2) - 0.25).abs() < 1e-14);
    let mixed3 = DensityMatrix::maximally_mixed(3);
    assert!((purity(&mixed3) - 0.125).abs() < 1e-14);
}

#[test]
fn expectation_values() {
    let up = DensityMatrix::all_up(1);
    assert!((expectation(&up, &PauliString::parse("Z").unwrap()).unwrap() - 1.0).abs() < 1e-14);
    let mixed = DensityMatrix::maximally_mixed(1);
    for s in ["X", "Y", "Z"] {
        assert!(expectation(&mixed, &PauliString::parse(s).unwrap()).unwrap().abs() < 1e-14);
    }
    let upup = DensityMatrix::all_up(2);
    assert!((expectation(&upup, &PauliString::parse("ZZ").unwrap()).unwrap() - 1.0).abs() < 1e-14);
    assert!(expectation(&upup, &PauliString::parse("Z").unwrap()).is_err());
}

#[test]
fn expectation_matches_dense_trace() {
    let rho = DensityMatrix::new_unchecked(rand_density(3, 8)).unwrap();
    for s in ["XYZ", "IZI", "Z-+", "+-I"] {
        let p = PauliString::parse(s).unwrap();
        let dense = p.matrix();
        let mut tr = ZERO;
        for i in 0..8 {
            for j in 0..8 {
                tr += rho.matrix()[[i, j]] * dense[[j, i]];
            }
        }
        let got = expectation(&rho, &p).unwrap();
        assert!((got - tr.re).abs() < 1e-12, "string {s}: {got} vs {}", tr.re);
    }
}

#[test]
fn channel_preserves_state_validity_over_long_evolution() {
    // 10^3 applications of a noisy channel keep trace/Hermiticity to 1e-8
    let h = kron(&pauli_z(), &pauli_i()).mapv(|z| z * 0.35)
        + kron(&pauli_x(), &pauli_x()).mapv(|z| z * 0.11);
    let jumps = vec![
        (kron(&sigma_minus(), &pauli_i()), 0.02),
        (kron(&pauli_i(), &pauli_z()), 0.015),
    ];
    let l = lindblad_superoperator(&h, &jumps).unwrap();
    let step = matrix_exponential(&l.matrix().mapv(|z| z * 0.05)).unwrap();
    let u = rand_unitary(4, 17);
    let us = unitary_superoperator(&u).unwrap();
    let combined = Superoperator::new(step).unwrap().compose(&us).unwrap();
    let mut rho = rand_density(2, 55);
    for _ in 0..1000 {
        rho = combined.apply(&rho).unwrap();
    }
    let dm = DensityMatrix::new_unchecked(rho).unwrap();
    assert!(dm.check_hermitian(1e-8).is_ok());
    assert!(dm.check_trace(1e-8).is_ok());
    dm.check_psd(-1e-8).unwrap();
}

#[test]
fn superoperator_trace_preservation_defect() {
    let u = rand_unitary(4, 3);
    let us = unitary_superoperator(&u).unwrap();
    assert!(us.trace_defect(false) < 1e-12);
    let l = lindblad_superoperator(&CMat::zeros((2, 2)), &[(sigma_minus(), 0.7)]).unwrap();
    assert!(l.trace_defect(true) < 1e-12);
}

#[test]
fn embed_operator_matches_kron() {
    let a = rand_matrix(2, 1);
    let b = rand_matrix(2, 2);
    // embed on qubits (0, 2) of 3: kron(a, I, b)
    let two = kron(&a, &b);
    let emb = embed_operator(&two, &[0, 2], 3).unwrap();
    let expect = kron(&kron(&a, &pauli_i()), &b);
    assert!(max_abs(&(&emb - &expect)) < 1e-13);
    // swapped qubit order (2, 0)
    let emb_swapped = embed_operator(&two, &[2, 0], 3).unwrap();
    let expect_swapped = kron(&kron(&b, &pauli_i()), &a);
    assert!(max_abs(&(&emb_swapped - &expect_swapped)) < 1e-13);
}

#[test]
fn vectorization_convention() {
    // vec(A rho B) = (B^T (x) A) vec(rho)
    let a = rand_matrix(2, 4);
    let b = rand_matrix(2, 5);
    let rho = rand_matrix(2, 6);
    let lhs = vectorize(&a.dot(&rho).dot(&b));
    let super_mat = kron(&b.t().to_owned(), &a);
    let rhs = super_mat.dot(&ndarray::Array1::from_vec(vectorize(&rho)));
    for (x, y) in lhs.iter().zip(rhs.iter()) {
        assert!((x - y).norm() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_expm_inverse(seed in 0u64..1000) {
        let g = rand_matrix(4, seed);
        // keep ||A|| <= 10
        let a = g.mapv(|z| z * 3.0);
        let e1 = matrix_exponential(&a).unwrap();
        let e2 = matrix_exponential(&a.mapv(|z| -z)).unwrap();
        let p = e1.dot(&e2);
        prop_assert!(max_abs(&(&p - &CMat::eye(4))) < 1e-8);
    }

    #[test]
    fn prop_purity_unitary_invariant(seed in 0u64..1000) {
        let rho = DensityMatrix::new_unchecked(rand_density(2, seed)).unwrap();
        let u = rand_unitary(4, seed.wrapping_add(7));
        let rotated = u.dot(rho.matrix()).dot(&u.t().mapv(|z| z.conj()));
        let r2 = DensityMatrix::new_unchecked(rotated).unwrap();
        prop_assert!((purity(&rho) - purity(&r2)).abs() < 1e-10);
    }

    #[test]
    fn prop_partial_trace_recovers_factors(sa in 0u64..500, sb in 0u64..500) {
        let a = rand_density(1, sa.wrapping_add(1000));
        let b = rand_density(1, sb.wrapping_add(2000));
        let rho = DensityMatrix::new_unchecked(kron(&a, &b)).unwrap();
        let ra = partial_trace(&rho, &[0]).unwrap();
        let rb = partial_trace(&rho, &[1]).unwrap();
        prop_assert!(max_abs(&(ra.matrix() - &a)) < 1e-12);
        prop_assert!(max_abs(&(rb.matrix() - &b)) < 1e-12);
    }

    #[test]
    fn prop_channel_cptp_preserves_density(seed in 0u64..200) {
        let h = hermitian(seed);
        let jumps = vec![(sigma_minus(), 0.1 + (seed % 5) as f64 * 0.05)];
        let l = lindblad_superoperator(&h, &jumps).unwrap();
        let ch = matrix_exponential(&l.matrix().mapv(|z| z * 0.3)).unwrap();
        let s = Superoperator::new(ch).unwrap();
        let rho = rand_density(1, seed);
        let out = s.apply(&rho).unwrap();
        let dm = DensityMatrix::new(out);
        prop_assert!(dm.is_ok());
    }
}

fn hermitian(seed: u64) -> CMat {
    let g = rand_matrix(2, seed);
    (&g + &g.t().mapv(|z: C64| z.conj())).mapv(|z| z * 0.5)
}
