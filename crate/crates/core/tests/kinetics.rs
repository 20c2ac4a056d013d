use proptest::prelude::*;
use surfspin::kinetics::*;

const KB: f64 = 8.617333262e-5;

fn model(e: f64) -> DesorptionModel {
    DesorptionModel::first_order(e, 1e15).unwrap()
}

fn oracle_rate(e: f64, t: f64) -> f64 {
    1e15 * (-e / (KB * t)).exp()
}

#[test]
fn rate_examples() {
    let k = rate_constant(&model(1.12), 873.15).unwrap();
    assert!((k - oracle_rate(1.12, 873.15)).abs() / k < 1e-12);
    assert!((k - 3.43096e8).abs() / k < 1e-5, "{k}");
    assert_eq!(rate_constant(&model(0.0), 500.0).unwrap(), 1e15);
    let ratio = rate_constant(&model(1.12), 873.15).unwrap() / rate_constant(&model(1.12), 738.15).unwrap();
    assert!((ratio - 15.2).abs() < 0.05);
}

#[test]
fn marker_ratios() {
    for (e, want) in PAPER_BARRIERS_EV.iter().zip([8.70, 10.31, 15.22]) {
        let got = rate_constant(&model(*e), 873.15).unwrap() / rate_constant(&model(*e), 738.15).unwrap();
        let oracle = (e / KB * (1.0 / 738.15 - 1.0 / 873.15)).exp();
        assert!((got - oracle).abs() / oracle < 1e-12);
        assert!((got - want).abs() / want < 0.005, "{e}: {got}");
    }
    assert_eq!(MARKER_TEMPERATURES_K, [465.0 + 273.15, 600.0 + 273.15]);
}

#[test]
fn clamped_rates_are_flagged() {
    let (r, f) = rate_with_flag(&model(100.0), 10.0).unwrap();
    assert_eq!((r, f), (0.0, RateFlag::Underflow));
    assert!(DesorptionModel::first_order(-0.5, 1e15).is_err());
    assert_eq!(rate_with_flag(&model(1.12), 800.0).unwrap().1, RateFlag::Ok);
    assert!(rate_constant(&model(1.12), 0.0).is_err());
    assert!(rate_constant(&model(1.12), -5.0).is_err());
}

#[test]
fn first_order_closed_form() {
    let m = model(1.12);
    let k = rate_constant(&m, 700.0).unwrap();
    let grid: Vec<f64> = (0..60).map(|i| i as f64 * 0.1 / k).collect();
    let traj = integrate_coverage(&m, 700.0, 1.0, &grid).unwrap();
    for (t, y) in traj.samples {
        assert!((y - (-k * t).exp()).abs() < 1e-8);
    }
    let exact = coverage_trajectory(&m, 700.0, 0.8, &[0.0, 1.0 / k]).unwrap().samples;
    assert_eq!(exact[0].1, 0.8);
    assert!((exact[1].1 - 0.8 / std::f64::consts::E).abs() < 1e-15);
}

#[test]
fn second_order_closed_form() {
    let m = DesorptionModel::new(0.96, 1e15, 2.0).unwrap();
    let k = rate_constant(&m, 750.0).unwrap();
    let grid: Vec<f64> = (0..80).map(|i| i as f64 * 0.25 / k).collect();
    for (t, y) in coverage_trajectory(&m, 750.0, 1.0, &grid).unwrap().samples {
        assert!((y - 1.0 / (1.0 + k * t)).abs() < 1e-8, "{t} {y}");
    }
}

#[test]
fn time_to_fraction_examples() {
    let m = model(1.12);
    let k = rate_constant(&m, 738.15).unwrap();
    assert!((time_to_fraction(&m, 738.15, (-1.0f64).exp()).unwrap() - 1.0 / k).abs() * k < 1e-14);
    let t = time_to_fraction(&m, 738.15, 1e-13).unwrap();
    assert!((t - -(1e-13f64).ln() / k).abs() / t < 1e-14);
    let m2 = DesorptionModel::new(1.12, 1e15, 2.0).unwrap();
    let t2 = time_to_fraction(&m2, 738.15, 0.25).unwrap();
    assert!((t2 * k - 3.0).abs() < 1e-8);
    assert!(time_to_fraction(&m, 738.15, 1.0).is_err());
    assert!(time_to_fraction(&model(500.0), 300.0, 0.5).is_err());
}

#[test]
fn sweep_examples() {
    let rows: Vec<_> = PAPER_BARRIERS_EV
        .iter()
        .map(|&e| temperature_sweep(&model(e), 573.15, 973.15, 41).unwrap())
        .collect();
    // 873.15 K is already a grid point; 738.15 K is added.
    assert_eq!(rows[0].len(), 42);
    for i in 0..rows[0].len() {
        assert!(rows[0][i].rate > rows[1][i].rate && rows[1][i].rate > rows[2][i].rate);
    }
    for marker in MARKER_TEMPERATURES_K {
        assert!(rows[0].iter().any(|r| r.t_k == marker));
    }
    assert_eq!(temperature_sweep(&model(1.12), 800.0, 800.0, 41).unwrap().len(), 1);
    assert!(temperature_sweep(&model(1.12), 900.0, 800.0, 41).is_err());
}

#[test]
fn desorption_examples() {
    let m = model(1.12);
    assert_eq!(desorbed_after(&m, 873.15, 0.0, 4.4e13).unwrap(), (0.0, 4.4e13));
    let (_, left) = desorbed_after(&m, 873.15, 3600.0, 4.4e13).unwrap();
    assert!(left < 1.0);
    assert_eq!(left, 0.0);
    let k = rate_constant(&m, 738.15).unwrap();
    let (_, left) = desorbed_after(&m, 738.15, 40.0 / k, 1e13).unwrap();
    assert!(left < 1.0);
}

#[test]
fn model_validation() {
    assert!(DesorptionModel::new(1.0, 0.0, 1.0).is_err());
    assert!(DesorptionModel::new(1.0, 1e15, 0.0).is_err());
    assert!(DesorptionModel::new(f64::NAN, 1e15, 1.0).is_err());
}

proptest! {
    #[test]
    fn arrhenius_is_affine_in_inverse_temperature(e in 0.2f64..2.0, t1 in 300.0f64..1500.0, t2 in 300.0f64..1500.0) {
        prop_assume!((t1 - t2).abs() > 1.0);
        let m = model(e);
        let slope = (rate_constant(&m, t1).unwrap().ln() - rate_constant(&m, t2).unwrap().ln()) / (1.0 / t1 - 1.0 / t2);
        prop_assert!((slope + e / KB).abs() <= 1e-9 * e / KB);
    }

    #[test]
    fn desorbed_plus_remaining_is_n0(e in 0.5f64..1.5, t in 500.0f64..900.0, d in 0.0f64..1e4, n0 in 1e10f64..1e16) {
        let (x, y) = desorbed_after(&model(e), t, d, n0).unwrap();
        prop_assert_eq!(x + y, n0);
        prop_assert!(x >= 0.0 && y >= 0.0);
    }

    #[test]
    fn lower_barrier_is_always_faster(t in 300.0f64..1500.0, e in 0.3f64..1.5, de in 0.01f64..0.5) {
        prop_assert!(rate_constant(&model(e), t).unwrap() > rate_constant(&model(e + de), t).unwrap());
    }
}
