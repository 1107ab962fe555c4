use farmctl::farm::TurbineSpec;
use farmctl::fatigue::*;
use farmctl::flow::InflowWake;

fn small_grid() -> LutGrid {
    LutGrid {
        wind_speed: vec![8.0, 11.0],
        ti: vec![0.03, 0.10],
        yaw: vec![-20.0, 0.0, 20.0],
        pitch: vec![0.0],
        wake_depth: vec![0.0, 0.3],
        wake_width: vec![0.65, 1.2],
        wake_center: vec![-0.6, 0.0, 0.6],
    }
}

fn small_lut() -> FatigueLut {
    let mut cfg = SurrogateConfig::for_turbine(&TurbineSpec::reference_10mw());
    cfg.duration = 120.0;
    let opts = BuildOptions {
        seeds: SeedSchedule::Fixed(1),
        ..BuildOptions::new(10.0, 4.0)
    };
    FatigueLut::build(small_grid(), cfg, &opts).unwrap()
}

fn node_point(grid: &LutGrid, idx: [usize; 7]) -> [f64; 7] {
    let axes = grid.axes();
    std::array::from_fn(|k| axes[k][idx[k]])
}

#[test]
fn default_grid_combinatorics() {
    let g = LutGrid::default();
    assert_eq!(g.shape(), [12, 3, 7, 7, 3, 3, 5]);
    assert_eq!(g.node_count(), 79_380);
    assert_eq!(g.wake_free_node_count(), 12 * 3 * 7 * 7);
    assert_eq!(g.distinct_node_count(), 12 * 3 * 7 * 7 * (1 + 2 * 3 * 5));
    // Seed-weighted case count under the 3/6/12 schedule.
    assert_eq!(g.case_count(&SeedSchedule::default()), 382_788);
}

#[test]
fn seed_schedule() {
    assert_eq!(seed_count(0.03, 0.01, 8.5), 3);
    assert_eq!(seed_count(0.10, 0.01, 8.5), 6);
    assert_eq!(seed_count(0.20, 0.01, 8.5), 12);
    // I² law once the ceiling granularity is negligible.
    let a = seed_count(0.5, 0.001, 8.5) as f64;
    let b = seed_count(1.0, 0.001, 8.5) as f64;
    assert!((b / a - 4.0).abs() < 1e-3);
}

#[test]
fn inflow_wake_examples() {
    let d = 178.3;
    let flat = inflow_wake_field(9.0, InflowWake { depth: 0.0, width: 1.0, center: 0.3 }, d, 119.0);
    assert_eq!(flat(37.0, 80.0), 9.0);
    let w = InflowWake { depth: 0.4, width: 1.2, center: 0.5 };
    let f = inflow_wake_field(9.0, w, d, 119.0);
    assert!((f(0.5 * d, 119.0) - 9.0 * 0.6).abs() < 1e-12);
    let y = 0.5 * d + d * 1.2 / 2f64.sqrt();
    assert!((f(y, 119.0) - 9.0 * (1.0 - 0.4 * (-1f64).exp())).abs() < 1e-12);
}

#[test]
fn surrogate_is_deterministic_and_validated() {
    let mut cfg = SurrogateConfig::for_turbine(&TurbineSpec::reference_10mw());
    cfg.duration = 60.0;
    let case = LoadCase::from_array([9.0, 0.1, 10.0, 0.0, 0.3, 1.2, 0.6]);
    let a = surrogate_load_case(&case, 3, &cfg).unwrap();
    let b = surrogate_load_case(&case, 3, &cfg).unwrap();
    assert_eq!(a[0].samples, b[0].samples);
    assert_eq!(a[0].samples.len(), 240);
    assert_eq!(a[2].duration(), 60.0);
    let c = surrogate_load_case(&case, 4, &cfg).unwrap();
    assert_ne!(a[0].samples, c[0].samples);
    let bad = LoadCase::from_array([30.0, 0.1, 0.0, 0.0, 0.0, 1.2, 0.0]);
    assert!(surrogate_load_case(&bad, 0, &cfg).is_err());
}

#[test]
fn lut_behaviour() {
    let lut = small_lut();
    let g = &lut.grid;
    let shape = g.shape();

    // Node exactness.
    for f in 0..g.node_count() {
        let mut rest = f;
        let mut idx = [0usize; 7];
        for k in (0..7).rev() {
            idx[k] = rest % shape[k];
            rest /= shape[k];
        }
        let q = lut.interpolate(node_point(g, idx));
        assert!(!q.clamped);
        assert_eq!(&q.del[..], &lut.node(idx)[..4]);
        assert_eq!(&q.mean[..], &lut.node(idx)[4..]);
    }

    // Affine along each axis between neighbouring nodes.
    let base = [0usize, 1, 1, 0, 1, 0, 1];
    for k in 0..7 {
        if shape[k] < 2 {
            continue;
        }
        let mut lo = base;
        lo[k] = 0;
        let mut hi = lo;
        hi[k] = 1;
        let (a, b) = (node_point(g, lo), node_point(g, hi));
        for t in [0.25, 0.5, 0.8] {
            let mut p = a;
            p[k] = a[k] + t * (b[k] - a[k]);
            let q = lut.interpolate(p);
            for c in 0..4 {
                let want = (1.0 - t) * lut.node(lo)[c] + t * lut.node(hi)[c];
                assert!((q.del[c] - want).abs() <= 1e-9 * want.abs().max(1.0));
            }
        }
    }

    // Zero-depth slice ignores width and centre.
    let at = |w: f64, c: f64| lut.interpolate([9.3, 0.05, 7.0, 0.0, 0.0, w, c]).del;
    let reference = at(0.65, -0.6);
    for (w, c) in [(1.2, 0.6), (0.9, 0.1), (0.7, -0.4)] {
        let v = at(w, c);
        for ch in 0..4 {
            assert!((v[ch] - reference[ch]).abs() <= 1e-12 * reference[ch]);
        }
    }

    // Clamping returns the edge value and flags it.
    let edge = lut.interpolate([11.0, 0.03, 0.0, 0.0, 0.3, 1.2, 0.0]);
    let out = lut.interpolate([30.0, 0.03, 0.0, 0.0, 0.3, 1.2, 0.0]);
    assert!(out.clamped && !edge.clamped);
    assert_eq!(out.del, edge.del);
}

#[test]
fn lut_persistence_round_trip() {
    let lut = small_lut();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.flut");
    lut.save(&path).unwrap();
    let back = FatigueLut::load(&path).unwrap();
    assert_eq!(back.values, lut.values);
    assert_eq!(back.grid, lut.grid);
    assert_eq!(back.digest(), lut.digest());
    let mut csv = Vec::new();
    lut.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), lut.grid.node_count() + 1);
    // Rebuilding gives the same table.
    assert_eq!(small_lut().digest(), lut.digest());
}
