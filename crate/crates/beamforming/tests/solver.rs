use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use num_complex::Complex64;
use omnisurf_beamforming::*;
use omnisurf_channel::{CMatrix, CVector};
use omnisurf_geometry::Side;
use omnisurf_surface::{AmplitudeSplit, PhaseMode, SurfaceConfiguration};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rm(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
    DMatrix::from_fn(r, c, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn rv(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    rm(rng, n, 1).column(0).into_owned()
}

fn surface(rng: &mut ChaCha8Rng, l: usize) -> SurfaceConfiguration {
    let ph: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    SurfaceConfiguration::from_phases(&ph, &AmplitudeSplit::equal(), 0.7, PhaseMode::Continuous).unwrap()
}

#[test]
fn residual_examples() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let h = rm(&mut r, 6, 2);
    let s = surface(&mut r, 6);
    let v = vec![rv(&mut r, 2), rv(&mut r, 2)];
    let exact: Vec<CVector> = v.iter().map(|x| s.psi_t().component_mul(&(&h * x))).collect();
    assert!(residual(&v, &s, &h, &exact).unwrap() < 1e-28);
    let q = vec![rv(&mut r, 6), rv(&mut r, 6)];
    let zero = vec![CVector::zeros(2), CVector::zeros(2)];
    let want: f64 = q.iter().map(|x| x.norm_squared()).sum();
    assert_abs_diff_eq!(residual(&zero, &s, &h, &q).unwrap(), want, epsilon = 1e-12);
    let mut brute = 0.0;
    for (vk, qk) in v.iter().zip(&q) {
        for l in 0..6 {
            let mut x = Complex64::from(0.0);
            for n in 0..2 {
                x += h[(l, n)] * vk[n];
            }
            brute += (qk[l] - s.elements[l].reflective() * x).norm_sqr();
        }
    }
    assert_abs_diff_eq!(residual(&v, &s, &h, &q).unwrap(), brute, epsilon = 1e-10);
}

#[test]
fn phase_rule_examples() {
    let h = CMatrix::from_element(1, 1, Complex64::from(1.0));
    let prev = SurfaceConfiguration::from_phases(&[1.0], &AmplitudeSplit::equal(), 0.0, PhaseMode::Continuous).unwrap();
    let v = vec![CVector::from_element(1, Complex64::from(1.0))];
    // b = conj(q) * 1
    let s = optimize_phases(&[CVector::from_element(1, Complex64::from(2.0))], &h, &v, &prev).unwrap();
    assert_abs_diff_eq!(s.elements[0].phi_t, 0.0, epsilon = 1e-15);
    let s = optimize_phases(&[CVector::from_element(1, Complex64::new(0.0, -1.0))], &h, &v, &prev).unwrap();
    assert_abs_diff_eq!(s.elements[0].phi_t, 1.5 * PI, epsilon = 1e-12);
    let s = optimize_phases(&[CVector::zeros(1)], &h, &v, &prev).unwrap();
    assert_abs_diff_eq!(s.elements[0].phi_t, 1.0, epsilon = 1e-15);
}

#[test]
fn phase_update_beats_grid_scan() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let h = rm(&mut r, 32, 4);
    let q: Vec<CVector> = (0..3).map(|_| rv(&mut r, 32)).collect();
    let v: Vec<CVector> = (0..3).map(|_| rv(&mut r, 4)).collect();
    let prev = surface(&mut r, 32);
    let s = optimize_phases(&q, &h, &v, &prev).unwrap();
    let b = phase_coefficients(&q, &h, &v);
    for (bl, e) in b.iter().zip(&s.elements) {
        let chosen = (bl * Complex64::from_polar(1.0, e.phi_t)).re;
        let grid = (0..4096)
            .map(|i| (bl * Complex64::from_polar(1.0, 2.0 * PI * i as f64 / 4096.0)).re)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(chosen >= grid - 1e-12);
    }
}

#[test]
fn precoder_is_least_squares() {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let h = rm(&mut r, 16, 3);
    let s = surface(&mut r, 16);
    let q = vec![rv(&mut r, 16)];
    let v = least_squares_precoders(&s, &h, &q).unwrap();
    let a = CMatrix::from_diagonal(&s.psi_t()) * &h;
    let direct = a.clone().svd(true, true).solve(&q[0], 1e-14).unwrap();
    assert!((&v[0] - direct).norm() < 1e-10);
    // q in the column space is reproduced exactly
    let x = rv(&mut r, 3);
    let inside = vec![&a * &x];
    assert!(residual(&least_squares_precoders(&s, &h, &inside).unwrap(), &s, &h, &inside).unwrap() < 1e-20);
    let unit = digital_precoder(&s, &h, &q).unwrap();
    let scaled = digital_precoder(&s, &h, &[&q[0] * Complex64::from(10.0)]).unwrap();
    assert_abs_diff_eq!(unit[0].norm(), 1.0, epsilon = 1e-12);
    assert!((&unit[0] - &scaled[0]).norm() < 1e-12);
}

#[test]
fn single_antenna_precoder_is_unit() {
    let h = CMatrix::from_element(3, 1, Complex64::new(0.2, 0.1));
    let s = SurfaceConfiguration::from_phases(&[0.0; 3], &AmplitudeSplit::equal(), 0.0, PhaseMode::Continuous).unwrap();
    let v = digital_precoder(&s, &h, &[CVector::from_element(3, Complex64::new(1.0, -2.0))]).unwrap();
    assert_abs_diff_eq!(v[0][0].norm(), 1.0, epsilon = 1e-14);
}

#[test]
fn rank_deficiency_is_reported() {
    let h = CMatrix::from_fn(4, 2, |_, _| Complex64::from(1.0));
    let s = SurfaceConfiguration::from_phases(&[0.0; 4], &AmplitudeSplit::equal(), 0.0, PhaseMode::Continuous).unwrap();
    let r = least_squares_precoders(&s, &h, &[CVector::zeros(4)]);
    assert!(matches!(r, Err(BeamformingError::RankDeficient { .. })));
}

#[test]
fn scalar_factorization_converges() {
    let h = CMatrix::from_element(1, 1, Complex64::from_polar(0.3, 0.4));
    let q = [CVector::from_element(1, Complex64::from_polar(2.0, -1.1))];
    let sol = alternating_factorization(&q, &h, &FactorizationConfig::default(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert!(sol.residual_trace.len() <= 2);
    assert!(sol.final_residual() < 1e-24);
    assert!(sol.converged);
}

#[test]
fn residual_trace_is_monotone() {
    for seed in 0..50 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let h = rm(&mut r, 64, 8);
        let q: Vec<CVector> = (0..4).map(|_| rv(&mut r, 64)).collect();
        let sol = alternating_factorization(&q, &h, &FactorizationConfig::default(), &mut r).unwrap();
        for w in sol.residual_trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "seed {seed}: {} -> {}", w[0], w[1]);
        }
        for v in &sol.precoders {
            assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
        }
        let a_minus = sol.a - 2.0 * sol.b.iter().zip(sol.surface.psi_t().iter()).map(|(b, p)| (b * p).re).sum::<f64>();
        assert!(a_minus >= -1e-9);
    }
}

#[test]
fn factorization_is_deterministic() {
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let h = rm(&mut r, 16, 4);
    let q: Vec<CVector> = (0..2).map(|_| rv(&mut r, 16)).collect();
    let cfg = FactorizationConfig::default();
    let a = alternating_factorization(&q, &h, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let b = alternating_factorization(&q, &h, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(a, b);
}

fn links(r: &mut ChaCha8Rng, k: usize, l: usize) -> Vec<UserLink> {
    (0..k)
        .map(|i| {
            let w = rv(r, 2);
            UserLink {
                channel: rm(r, 2, l),
                combiner: &w / Complex64::from(w.norm()),
                side: if i % 2 == 0 { Side::Reflective } else { Side::Refractive },
            }
        })
        .collect()
}

#[test]
fn effective_channel_matches_triple_product() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let h = rm(&mut r, 8, 3);
    let s = surface(&mut r, 8);
    let users = links(&mut r, 3, 8);
    let v: Vec<CVector> = (0..3).map(|_| rv(&mut r, 3)).collect();
    let e = effective_channel(&users, &s, &h, &v).unwrap();
    for (k, u) in users.iter().enumerate() {
        let psi = CMatrix::from_diagonal(&s.psi(u.side));
        for j in 0..3 {
            let want = (u.combiner.adjoint() * &u.channel * &psi * &h * &v[j])[(0, 0)];
            assert!((e.matrix[(k, j)] - want).norm() < 1e-12);
        }
    }
    let gram = e.matrix.adjoint() * &e.matrix;
    for j in 0..3 {
        assert_abs_diff_eq!(e.gains[j], gram[(j, j)].re, epsilon = 1e-12);
    }
    // single user: the entry is the measured amplitude
    let one = effective_channel(&users[..1], &s, &h, &v[..1]).unwrap();
    let beam = s.psi_t().component_mul(&(&h * &v[0]));
    let amp = (users[0].combiner.adjoint() * &users[0].channel * beam)[(0, 0)];
    assert!((one.matrix[(0, 0)] - amp).norm() < 1e-12);
}

#[test]
fn rate_examples() {
    let h = CMatrix::from_element(1, 1, Complex64::from(2.0));
    assert_eq!(sum_rate(&h, &[0.0], 1.0), 0.0);
    assert_abs_diff_eq!(sum_rate(&h, &[0.25], 1.0), 1.0, epsilon = 1e-15);
    let d = CMatrix::from_diagonal(&CVector::from_vec(vec![Complex64::from(1.0), Complex64::from(3.0)]));
    let want = (1.0f64 + 2.0 * 1.0 / 0.5).log2() + (1.0f64 + 0.5 * 9.0 / 0.5).log2();
    assert_abs_diff_eq!(sum_rate(&d, &[2.0, 0.5], 0.5), want, epsilon = 1e-12);
    assert_abs_diff_eq!(throughput(5.0, 0, 1000).unwrap(), 5.0);
    assert_abs_diff_eq!(throughput(5.0, 500, 1000).unwrap(), 2.5);
    assert!(throughput(5.0, 1000, 1000).is_err());
}

#[test]
fn sum_rate_grows_with_budget() {
    let mut r = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let m = rm(&mut r, 4, 4);
        let e: Vec<f64> = (0..4).map(|j| m.column(j).norm_squared()).collect();
        let mut last = 0.0;
        for snr in [0.0, 5.0, 10.0, 20.0, 30.0] {
            let p = allocate_power(&e, 1.0, 10f64.powf(snr / 10.0)).unwrap();
            let rate = sum_rate(&m, &p, 1.0);
            assert!(rate >= last - 1e-12);
            last = rate;
        }
    }
}

#[test]
fn solution_power_budget() {
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let h = rm(&mut r, 8, 2);
    let q = vec![rv(&mut r, 8)];
    let mut sol = alternating_factorization(&q, &h, &FactorizationConfig::default(), &mut r).unwrap();
    assert!(sol.set_powers(vec![2.0], 1.0).is_err());
    sol.set_powers(vec![1.0], 1.0).unwrap();
    assert_eq!(sol.powers, vec![1.0]);
}
