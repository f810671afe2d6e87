use flexbound::signal::{self, FeatureDomain, TransformParams};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn fft_matches_brute_force_on_1024() {
    let mut rng = ChaCha8Rng::seed_from_u64(1024);
    let x = random_signal(&mut rng, 1024);
    let fast = signal::fft(&x).unwrap();
    let slow = signal::dft_brute(&x).unwrap();
    assert!(max_diff(&fast.coefficients, &slow.coefficients) < 1e-9);
}

#[test]
fn spectrum_is_conjugate_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_signal(&mut rng, 64);
    let s = signal::fft(&x).unwrap().coefficients;
    for k in 1..64 {
        assert!((s[k] - s[64 - k].conj()).norm() < 1e-12);
    }
}

#[test]
fn fft_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (a, b) = (2.5, -0.75);
    let x = random_signal(&mut rng, 256);
    let y = random_signal(&mut rng, 256);
    let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
    let fx = signal::fft(&x).unwrap().coefficients;
    let fy = signal::fft(&y).unwrap().coefficients;
    let fm = signal::fft(&mix).unwrap().coefficients;
    let expected: Vec<Complex64> = fx.iter().zip(&fy).map(|(p, q)| p * a + q * b).collect();
    assert!(max_diff(&fm, &expected) < 1e-9);
}

#[test]
fn time_frequency_feature_length() {
    let x: Vec<f64> = (0..16).map(|i| i as f64 * 0.1).collect();
    let p = TransformParams { window_size: 8, hop: 4 };
    let f = signal::extract_features(&x, FeatureDomain::TimeFrequency, &p).unwrap();
    assert_eq!(f.len(), 3 * 5);
    assert_eq!(signal::feature_len(16, FeatureDomain::TimeFrequency, &p).unwrap(), 15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval_holds(seed in any::<u64>(), log_n in 0u32..=10) {
        let n = 1usize << log_n;
        let x = random_signal(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let energy: f64 = x.iter().map(|v| v * v).sum();
        let spec: f64 = signal::fft(&x).unwrap().coefficients.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((energy - spec / n as f64).abs() < 1e-9);
    }

    #[test]
    fn haar_round_trip_and_energy(seed in any::<u64>(), log_n in 1u32..=8, depth in 1usize..=8) {
        let n = 1usize << log_n;
        let levels = depth.min(log_n as usize);
        let x = random_signal(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let w = signal::haar_forward(&x, levels).unwrap();
        prop_assert_eq!(w.coefficient_count(), n);
        let energy: f64 = x.iter().map(|v| v * v).sum();
        prop_assert!((w.energy() - energy).abs() < 1e-9);
        let back = signal::haar_inverse(&w).unwrap();
        prop_assert!(x.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn feature_length_is_a_function_of_shape(seed in any::<u64>(), n in 8usize..40) {
        let x = random_signal(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let p = TransformParams { window_size: 8, hop: 3 };
        for d in [FeatureDomain::Time, FeatureDomain::Frequency, FeatureDomain::TimeFrequency] {
            let f = signal::extract_features(&x, d, &p).unwrap();
            prop_assert_eq!(f.len(), signal::feature_len(n, d, &p).unwrap());
        }
    }
}
