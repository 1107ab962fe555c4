use farmctl::fatigue::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sorted(mut c: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    c.sort_by(|a, b| a.partial_cmp(b).unwrap());
    c
}

fn ranges(cycles: &[Cycle]) -> Vec<(f64, f64)> {
    sorted(cycles.iter().map(|c| (c.range, c.count)).collect())
}

#[test]
fn astm_worked_example() {
    // Four-point rule applied by hand to the standard sequence: one full
    // cycle of range 4, half cycles of 3, 4, 6, 8, 8, 9.
    let s = [-2.0, 1.0, -3.0, 5.0, -1.0, 3.0, -4.0, 4.0, -2.0];
    let got = ranges(&rainflow(&s));
    let want = sorted(vec![
        (3.0, 0.5),
        (4.0, 0.5),
        (4.0, 1.0),
        (6.0, 0.5),
        (8.0, 0.5),
        (8.0, 0.5),
        (9.0, 0.5),
    ]);
    assert_eq!(got, want);
    let total: f64 = rainflow(&s).iter().map(|c| 2.0 * c.count).sum();
    assert_eq!(total, (reversals(&s).len() - 1) as f64);
}

#[test]
fn sine_cycles() {
    let amp = 3.0;
    let periods = 20;
    let s: Vec<f64> = (0..=periods * 40)
        .map(|k| amp * (std::f64::consts::TAU * k as f64 / 40.0).sin())
        .collect();
    let c = rainflow(&s);
    // Constant-amplitude reversals are counted as half cycles from the
    // moving start point; the equivalent count is what matters.
    let big: f64 = c
        .iter()
        .filter(|c| (c.range - 2.0 * amp).abs() < 1e-9)
        .map(|c| c.count)
        .sum();
    assert!((big - periods as f64).abs() <= 1.0);
    let rest: f64 = c.iter().filter(|c| (c.range - 2.0 * amp).abs() >= 1e-9).map(|c| c.count).sum();
    assert!(rest <= 1.0);
}

#[test]
fn offset_shifts_means_only() {
    let s = [-2.0, 1.0, -3.0, 5.0, -1.0, 3.0, -4.0, 4.0, -2.0];
    let shifted: Vec<f64> = s.iter().map(|v| v + 10.0).collect();
    let (a, b) = (rainflow(&s), rainflow(&shifted));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.range, y.range);
        assert_eq!(x.count, y.count);
        assert!((y.mean - x.mean - 10.0).abs() < 1e-12);
    }
}

#[test]
fn del_identities() {
    let one = |r: f64, n: f64| Cycle { range: r, mean: 0.0, count: n };
    // n = N_eq at a single range gives the range back.
    assert!((damage_equivalent_load(&[one(5.0, 600.0)], 4.0, 600.0, 1.0) - 5.0).abs() < 1e-12);
    // Two entries of range R equal one entry with doubled count.
    let split = damage_equivalent_load(&[one(3.0, 1.0), one(3.0, 1.0)], 10.0, 600.0, 1.0);
    let merged = damage_equivalent_load(&[one(3.0, 2.0)], 10.0, 600.0, 1.0);
    assert!((split - merged).abs() < 1e-12 * merged);
    // Homogeneity of degree one.
    let c = vec![one(2.0, 1.0), one(7.0, 0.5), one(4.5, 1.0)];
    let c2: Vec<Cycle> = c.iter().map(|x| Cycle { range: 2.0 * x.range, ..*x }).collect();
    for m in [1.0, 4.0, 10.0] {
        let a = damage_equivalent_load(&c, m, 600.0, 1.0);
        let b = damage_equivalent_load(&c2, m, 600.0, 1.0);
        assert!((b - 2.0 * a).abs() < 1e-12 * b);
    }
    assert_eq!(damage_equivalent_load(&[], 4.0, 600.0, 1.0), 0.0);
    assert!(rainflow(&[1.5; 30]).is_empty());
}

fn random_series(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(2..400);
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            x = 0.8 * x + rng.random_range(-1.0..1.0);
            x
        })
        .collect()
}

#[test]
fn time_reversal_on_100_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..100 {
        let s = random_series(&mut rng);
        let mut r = s.clone();
        r.reverse();
        for m in [4.0, 10.0] {
            let a = damage_equivalent_load(&rainflow(&s), m, 600.0, 1.0);
            let b = damage_equivalent_load(&rainflow(&r), m, 600.0, 1.0);
            assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{a} vs {b}");
        }
    }
}

proptest! {
    #[test]
    fn half_cycle_count_matches_reversals(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_series(&mut rng);
        let c = rainflow(&s);
        prop_assert!(c.iter().all(|c| c.count == 0.5 || c.count == 1.0));
        let halves: f64 = c.iter().map(|c| 2.0 * c.count).sum();
        prop_assert_eq!(halves as usize, reversals(&s).len().saturating_sub(1));
    }

    #[test]
    fn del_scales_with_series(seed in 0u64..10_000, k in 0.1..10.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_series(&mut rng);
        let scaled: Vec<f64> = s.iter().map(|v| k * v).collect();
        let a = damage_equivalent_load(&rainflow(&s), 4.0, 600.0, 1.0);
        let b = damage_equivalent_load(&rainflow(&scaled), 4.0, 600.0, 1.0);
        prop_assert!((b - k * a).abs() <= 1e-10 * b.max(1e-12));
    }
}
