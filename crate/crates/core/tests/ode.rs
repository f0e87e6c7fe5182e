use homeodyn::analysis::{period_estimate, time_average};
use homeodyn::{integrate, FhnParams, IntegratorConfig, Method, ModelKind, ModelSystem};
use proptest::prelude::*;

fn fhn(alpha: f64, j: f64) -> ModelSystem {
    ModelSystem::Fhn(FhnParams { mu: 30.0, alpha, j })
}

#[test]
fn equilibrium_start_stays_put() {
    for dt in [1e-2, 1e-3] {
        let cfg = IntegratorConfig::new(Method::Rk4, dt, 10.0);
        let tr = integrate(&fhn(2.0, 0.0), &[0.0, 0.0], &cfg, None).unwrap();
        assert!(tr.states().all(|s| s == [0.0, 0.0]));
    }
}

#[test]
fn euler_approaches_rk4_as_dt_shrinks() {
    let sys = fhn(2.0, 0.0);
    let x0 = [1.0, 0.3];
    let sup = |dt: f64| {
        let e = integrate(&sys, &x0, &IntegratorConfig::new(Method::ForwardEuler, dt, 27.0), None).unwrap();
        let r = integrate(&sys, &x0, &IntegratorConfig::new(Method::Rk4, dt, 27.0), None).unwrap();
        e.states()
            .zip(r.states())
            .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [1e-3, 5e-4, 2.5e-4].iter().map(|&dt| sup(dt)).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn later_discard_barely_moves_the_average() {
    let cfg = IntegratorConfig::new(Method::Rk4, 1e-3, 40_000.0).with_stride(10);
    let tr = integrate(&fhn(2.0, -1.2), &[0.1, 0.0], &cfg, None).unwrap();
    let quarter = time_average(&tr, "y", 10_000.0).unwrap();
    let half = time_average(&tr, "y", 20_000.0).unwrap();
    assert!((quarter - half).abs() < 1e-3, "{quarter} vs {half}");
    let w = tr.resample_window(20_000.0, 40_000.0).unwrap();
    assert_eq!(w.dt(), tr.dt());
    assert!((time_average(&w, "y", 0.0).unwrap() - half).abs() < 1e-12);
}

#[test]
fn ck_burst_period_agrees_across_methods() {
    let sys = ModelSystem::default_for(ModelKind::ChayKeizer);
    let x0 = [-60.0, 0.0, 0.2];
    let period = |method, dt: f64, stride| {
        let cfg = IntegratorConfig::new(method, dt, 60_000.0)
            .with_stride(stride)
            .with_record_start(10_000.0);
        let tr = integrate(&sys, &x0, &cfg, None).unwrap();
        period_estimate(&tr, "c").unwrap().mean
    };
    let euler = period(Method::ForwardEuler, 0.01, 10);
    let rk4 = period(Method::Rk4, 0.1, 1);
    assert!((euler - rk4).abs() / rk4 < 0.02, "euler {euler} rk4 {rk4}");
    // bursts every several seconds
    assert!(rk4 > 3_000.0 && rk4 < 20_000.0, "{rk4}");
}

#[test]
fn blow_up_reports_time() {
    let sys = fhn(2.0, 0.0);
    let cfg = IntegratorConfig::new(Method::ForwardEuler, 0.5, 100.0);
    match integrate(&sys, &[3.0, 0.0], &cfg, None) {
        Err(homeodyn::Error::BlowUp { time }) => assert!(time > 0.0 && time <= 100.0),
        other => panic!("expected blow-up, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stride_gives_exact_subsamples(stride in 1usize..9, steps in 10usize..400, j in -2.0..2.0f64) {
        let sys = fhn(2.0, j);
        let full = IntegratorConfig::new(Method::Rk4, 1e-2, steps as f64 * 1e-2);
        let a = integrate(&sys, &[0.5, 0.1], &full, None).unwrap();
        let b = integrate(&sys, &[0.5, 0.1], &full.clone().with_stride(stride), None).unwrap();
        prop_assert_eq!(b.len(), (a.len() - 1) / stride + 1);
        for i in 0..b.len() {
            prop_assert_eq!(b.state(i), a.state(i * stride));
            prop_assert!((b.time(i) - a.time(i * stride)).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_count_matches_floor(dt in 1e-3..1e-2f64, t_end in 0.5..5.0f64) {
        let cfg = IntegratorConfig::new(Method::ForwardEuler, dt, t_end);
        let tr = integrate(&fhn(2.0, 0.0), &[0.1, 0.0], &cfg, None).unwrap();
        prop_assert_eq!(tr.len(), cfg.steps() + 1);
    }
}
