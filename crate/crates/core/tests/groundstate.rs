use std::sync::OnceLock;

use proptest::prelude::*;
use sbp_core::groundstate::*;
use sbp_core::SbpError;

/// U(0) for p = 3 from an independent SciPy shooting run (RK45, rtol 1e-13, 80 bisections).
const U0_P3_SCIPY: f64 = 4.337387679976845;

fn profile(p: f64) -> &'static RadialProfile<f64> {
    static P2: OnceLock<RadialProfile<f64>> = OnceLock::new();
    static P3: OnceLock<RadialProfile<f64>> = OnceLock::new();
    let cell = if p == 2.0 { &P2 } else { &P3 };
    cell.get_or_init(|| solve_ground_state(p, 25.0, 1e-10).unwrap())
}

/// Classic RK4 shooting for `u'' = -2u'/r + u - u^p`; returns `U(0)`.
fn rk4_u0(p: f64, h: f64) -> f64 {
    let rhs = |r: f64, u: f64, v: f64| -2.0 * v / r + u - u.abs().powf(p);
    // 1 = overshoot (u crosses zero), -1 = undershoot (u turns up)
    let fate = |u0: f64| -> i32 {
        let r0 = 1e-3;
        let c = (u0 - u0.powf(p)) / 6.0;
        let (mut r, mut u, mut v) = (r0, u0 + c * r0 * r0, 2.0 * c * r0);
        while r < 40.0 {
            let k1 = (v, rhs(r, u, v));
            let k2 = (v + 0.5 * h * k1.1, rhs(r + 0.5 * h, u + 0.5 * h * k1.0, v + 0.5 * h * k1.1));
            let k3 = (v + 0.5 * h * k2.1, rhs(r + 0.5 * h, u + 0.5 * h * k2.0, v + 0.5 * h * k2.1));
            let k4 = (v + h * k3.1, rhs(r + h, u + h * k3.0, v + h * k3.1));
            u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            r += h;
            if u < 0.0 {
                return 1;
            }
            if v > 0.0 {
                return -1;
            }
        }
        0
    };
    let (mut lo, mut hi) = (1.0, 8.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fate(mid) == 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn u0_matches_independent_shooting() {
    let u0 = profile(3.0).u0();
    assert!((u0 - U0_P3_SCIPY).abs() < 1e-9, "u0 = {u0}");
    let coarse = rk4_u0(3.0, 4e-3);
    let fine = rk4_u0(3.0, 2e-3);
    let rich = (16.0 * fine - coarse) / 15.0;
    assert!((rich - U0_P3_SCIPY).abs() < 1e-7, "rk4 oracle {rich}");
}

#[test]
fn identities_hold_for_all_test_exponents() {
    for p in [2.0, 2.5, 3.0, 4.0] {
        let prof = solve_ground_state(p, 25.0, 1e-10).unwrap();
        let c = constants(&prof, 2).unwrap();
        assert!(c.nehari_residual() < 1e-6, "p = {p}: nehari {}", c.nehari_residual());
        assert!(c.pohozaev_residual() < 1e-6, "p = {p}: pohozaev {}", c.pohozaev_residual());
        prof.check_invariants().unwrap();
    }
}

#[test]
fn p2_norms_are_frozen() {
    let c = constants(profile(2.0), 2).unwrap();
    assert!((c.norm_l2_sq - 130.98071014874).abs() < 1e-6);
    assert!((c.norm_grad_sq - c.norm_l2_sq).abs() < 1e-6);
    assert!((c.norm_lp1 - 2.0 * c.norm_l2_sq).abs() < 1e-6);
    assert!((c.c1 - 0.5 * c.norm_l2_sq).abs() < 1e-12);
    assert!((c.c0 + 21.8301).abs() < 1e-3);
    assert!((c.gamma - 2.0).abs() < 1e-15);
}

#[test]
fn ode_residual_on_interpolant() {
    let prof = profile(3.0);
    let res = prof.ode_residual_sup(7);
    assert!(res < 1e-9, "residual {res}");
}

#[test]
fn decay_rate_fit() {
    let eta = profile(3.0).eta_fit;
    assert!(eta > 0.95 && eta <= 1.0, "eta {eta}");
}

#[test]
fn rejects_bad_inputs() {
    assert_eq!(solve_ground_state(5.0, 25.0, 1e-10).unwrap_err(), SbpError::InvalidExponent(5.0));
    assert_eq!(solve_ground_state(1.0, 25.0, 1e-10).unwrap_err(), SbpError::InvalidExponent(1.0));
    assert!(matches!(
        solve_ground_state(3.0, 10.0, 1e-10),
        Err(SbpError::InvalidParameter { .. })
    ));
    assert!(matches!(
        solve_ground_state(3.0, 25.0, 1e-3),
        Err(SbpError::InvalidParameter { .. })
    ));
}

#[test]
fn cache_round_trip_is_exact_to_print_precision() {
    let prof = profile(3.0);
    let mut buf = Vec::new();
    prof.write_cache(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("SBPC1 p=3 rmax=25 eta="));
    let back = RadialProfile::<f64>::read_cache(&buf[..]).unwrap();
    assert_eq!(back.nodes.len(), prof.nodes.len());
    for i in (0..prof.u.len()).step_by(97) {
        assert!((back.u[i] - prof.u[i]).abs() <= 1e-15 * prof.u[i].abs().max(1e-300));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p3.sbpc");
    prof.save(&path).unwrap();
    let loaded = RadialProfile::<f64>::load(&path).unwrap();
    assert_eq!(loaded.p, 3.0);
}

#[test]
fn corrupted_cache_is_rejected() {
    assert!(matches!(
        RadialProfile::<f64>::read_cache(&b"SBPX p=3 rmax=25 eta=1\n"[..]),
        Err(SbpError::Format(_))
    ));
    let rising = "SBPC1 p=3 rmax=25 eta=1\n0 1 0\n0.01 2 0.1\n0.02 3 0.1\n";
    assert!(RadialProfile::<f64>::read_cache(rising.as_bytes()).is_err());
}

#[test]
fn truncated_profile_underflows() {
    let full = profile(3.0);
    let keep = 501;
    let short = RadialProfile {
        r_max: full.nodes[keep - 1],
        nodes: full.nodes[..keep].to_vec(),
        u: full.u[..keep].to_vec(),
        du: full.du[..keep].to_vec(),
        ..full.clone()
    };
    assert_eq!(
        constants(&short, 2).unwrap_err(),
        SbpError::QuadratureUnderflow { r_max: short.r_max }
    );
}

#[test]
fn chord_lengths() {
    assert!((chord::<f64>(2, 2, 1) - 2.0).abs() < 1e-15);
    assert!((chord::<f64>(3, 2, 1) - 3f64.sqrt()).abs() < 1e-14);
    assert!((chord::<f64>(4, 3, 1) - 2.0).abs() < 1e-14);
}

#[test]
fn single_precision_profile() {
    let prof = solve_ground_state(3.0f32, 25.0, 1e-5).unwrap();
    assert!((prof.u0() as f64 - U0_P3_SCIPY).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profile_is_positive_decreasing(s in 0.0f64..25.0, ds in 1e-3f64..1.0) {
        let prof = profile(3.0);
        let (u1, d1) = prof.evaluate(s);
        let (u2, _) = prof.evaluate(s + ds);
        prop_assert!(u1 > 0.0 && u2 > 0.0);
        prop_assert!(u2 < u1);
        prop_assert!(d1 <= 0.0);
    }

    #[test]
    fn evaluate_satisfies_the_ode(s in 0.05f64..20.0) {
        let prof = profile(2.0);
        let (u, du, d2u) = prof.evaluate2(s);
        let res = d2u + 2.0 * du / s - u + u * u;
        prop_assert!(res.abs() < 1e-8 * (1.0 + u), "s = {}: {}", s, res);
    }

    #[test]
    fn beyond_r_max_decays_like_the_tail(s in 25.0f64..40.0) {
        let prof = profile(3.0);
        let (u, du) = prof.evaluate(s);
        prop_assert!(u > 0.0);
        // U ~ A e^{-r}/r so U'/U -> -(1 + 1/r)
        let ratio = du / u;
        prop_assert!((ratio + 1.0 + 1.0 / s).abs() < 0.05);
    }
}
