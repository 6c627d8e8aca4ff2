use std::sync::OnceLock;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbp_core::ansatz::{PotentialSpec, ReductionParams};
use sbp_core::energy::*;
use sbp_core::fields::{inner_l2, ScalarField3D, UniformGrid};
use sbp_core::groundstate::{constants, solve_ground_state, RadialProfile};

const OFF: EnergyOptions = EnergyOptions {
    bp_coupling: false,
    potential: false,
};

fn profile(p: f64) -> &'static RadialProfile<f64> {
    static P2: OnceLock<RadialProfile<f64>> = OnceLock::new();
    static P3: OnceLock<RadialProfile<f64>> = OnceLock::new();
    let cell = if p == 2.0 { &P2 } else { &P3 };
    cell.get_or_init(|| solve_ground_state(p, 25.0, 1e-10).unwrap())
}

fn context(p: f64, eps: f64, grid: UniformGrid<f64>, options: EnergyOptions) -> EnergyContext<f64> {
    let params = ReductionParams::with_auto_exponents(eps, 1.0, p, 6.0).unwrap();
    let pot = PotentialSpec::radial(6.0).unwrap();
    EnergyContext::new(params, Some(&pot), grid, options).unwrap()
}

fn smooth_field(grid: UniformGrid<f64>, seed: u64, amp: f64) -> ScalarField3D<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = grid.half_width;
    let bumps: Vec<([f64; 3], f64, f64)> = (0..4)
        .map(|_| {
            let c = [0; 3].map(|_: i32| rng.gen_range(-half / 3.0..half / 3.0));
            (c, rng.gen_range(1.0..2.0), rng.gen_range(-amp..amp))
        })
        .collect();
    ScalarField3D::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|(c, w, a)| {
                let r2: f64 = (0..3).map(|i| (x[i] - c[i]).powi(2)).sum();
                a * (-r2 / (w * w)).exp()
            })
            .sum()
    })
}

fn sampled_u(p: f64, grid: UniformGrid<f64>) -> ScalarField3D<f64> {
    let prof = profile(p);
    ScalarField3D::from_fn(grid, |x| prof.value((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()))
}

fn partial_u(p: f64, grid: UniformGrid<f64>, axis: usize) -> ScalarField3D<f64> {
    let prof = profile(p);
    ScalarField3D::from_fn(grid, |x| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r == 0.0 {
            0.0
        } else {
            prof.evaluate(r).1 * x[axis] / r
        }
    })
}

#[test]
fn directional_derivative_matches_gradient() {
    let grid = UniformGrid::new(8.0, 32).unwrap();
    let ctx = context(3.0, 0.2, grid, EnergyOptions::default());
    for seed in 0..3 {
        let u = smooth_field(grid, seed, 1.0);
        let w = smooth_field(grid, 100 + seed, 1.0);
        let g = ctx.gradient(&u);
        let d = 1e-4;
        let fd = (ctx.energy(&u.add(&w.scale(d))) - ctx.energy(&u.sub(&w.scale(d)))) / (2.0 * d);
        let exact = ctx.inner_h1(&g, &w);
        assert!((fd - exact).abs() < 1e-4 * exact.abs(), "{fd} vs {exact}");
    }
}

#[test]
fn gradient_of_zero_vanishes() {
    let grid = UniformGrid::new(8.0, 32).unwrap();
    let ctx = context(3.0, 0.2, grid, EnergyOptions::default());
    let g = ctx.gradient(&ScalarField3D::zeros(grid));
    assert_eq!(g.max_abs(), 0.0);
    assert_eq!(ctx.energy(&ScalarField3D::zeros(grid)), 0.0);
}

#[test]
fn ground_state_is_critical_for_the_limit_functional() {
    let grid = UniformGrid::new(12.8, 64).unwrap();
    let ctx = context(2.0, 0.1, grid, OFF);
    let u = sampled_u(2.0, grid);
    let norm = ctx.gradient_eval(&u).norm();
    assert!(norm < 1e-3, "gradient norm {norm}");
    let c = constants(profile(2.0), 2).unwrap();
    let e = ctx.energy(&u);
    assert!((e - (c.c0 + c.c1)).abs() < 1e-6 * e.abs(), "{e} vs {}", c.c0 + c.c1);
}

#[test]
fn hessian_symmetry_and_consistency() {
    let grid = UniformGrid::new(8.0, 32).unwrap();
    let ctx = context(3.0, 0.2, grid, EnergyOptions::default());
    let u = smooth_field(grid, 7, 1.0);
    let w1 = smooth_field(grid, 8, 1.0);
    let w2 = smooth_field(grid, 9, 1.0);
    let h1 = ctx.hessian_apply(&u, &w1);
    let h2 = ctx.hessian_apply(&u, &w2);
    let a = ctx.inner_h1(&h1, &w2);
    let b = ctx.inner_h1(&h2, &w1);
    assert!((a - b).abs() < 1e-10 * a.abs().max(b.abs()));
    let d = 1e-5;
    let fd = ctx.gradient(&u.add(&w1.scale(d))).sub(&ctx.gradient(&u)).scale(1.0 / d);
    let err = ctx.inner_h1(&fd.sub(&h1), &fd.sub(&h1)).sqrt() / ctx.inner_h1(&h1, &h1).sqrt();
    assert!(err < 1e-3, "relative error {err}");
}

#[test]
fn ground_state_negative_direction_and_kernel() {
    let grid = UniformGrid::new(12.8, 64).unwrap();
    let ctx = context(2.0, 0.1, grid, OFF);
    let u = sampled_u(2.0, grid);
    let hu = ctx.hessian_apply(&u, &u);
    let lhs = ctx.inner_h1(&hu, &u);
    let rhs = (1.0 - 2.0) * ctx.inner_h1(&u, &u);
    assert!((lhs - rhs).abs() < 1e-3 * rhs.abs(), "{lhs} vs {rhs}");
    for axis in 0..3 {
        let d = partial_u(2.0, grid, axis);
        let hd = ctx.hessian_apply(&u, &d);
        let ratio = (ctx.inner_h1(&hd, &hd) / ctx.inner_h1(&d, &d)).sqrt();
        assert!(ratio < 1e-2, "axis {axis}: {ratio}");
    }
}

#[test]
fn hessian_is_coercive_off_the_special_directions() {
    let grid = UniformGrid::new(12.8, 64).unwrap();
    let ctx = context(2.0, 0.1, grid, OFF);
    let u = sampled_u(2.0, grid);
    let hess = ctx.hessian_at(&u);
    let basis: Vec<ScalarField3D<f64>> = std::iter::once(u.clone()).chain((0..3).map(|a| partial_u(2.0, grid, a))).collect();
    let space = sbp_core::ansatz::TangentSpace::new(basis, &ctx.spectral).unwrap();
    for seed in 0..20 {
        let mut w = smooth_field(grid, 1000 + seed, 1.0);
        space.project(&mut w, None);
        let dw = DualField::new(w, &ctx.spectral);
        let q = hess.apply(&dw).inner(&dw);
        assert!(q > 0.0, "seed {seed}: {q}");
    }
}

#[test]
fn energy_parts_add_up() {
    let grid = UniformGrid::new(8.0, 32).unwrap();
    let ctx = context(3.0, 0.2, grid, EnergyOptions::default());
    let u = smooth_field(grid, 3, 1.0);
    let parts = ctx.energy_parts(&u);
    assert_eq!(parts.total(), ctx.energy(&u));
    assert!(parts.kinetic > 0.0 && parts.potential > 0.0 && parts.bp > 0.0 && parts.nonlinear < 0.0);
    assert!((parts.potential - 0.5 * inner_l2(&u, ctx.v_eps.as_ref().unwrap().mul(&u).as_ref_field())).abs() < 1e-12);
}

trait AsRefField {
    fn as_ref_field(&self) -> &ScalarField3D<f64>;
}

impl AsRefField for ScalarField3D<f64> {
    fn as_ref_field(&self) -> &ScalarField3D<f64> {
        self
    }
}

#[test]
fn single_precision_energy() {
    let grid = UniformGrid::<f32>::new(8.0, 32).unwrap();
    let params = ReductionParams::with_auto_exponents(0.2f32, 1.0, 3.0, 6.0).unwrap();
    let pot = PotentialSpec::radial(6.0f32).unwrap();
    let ctx = EnergyContext::new(params, Some(&pot), grid, EnergyOptions::default()).unwrap();
    let u = ScalarField3D::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0).exp());
    let e = ctx.energy(&u);
    let g = ctx.gradient_eval(&u);
    assert!(e.is_finite() && g.norm().is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn bp_term_is_small(seed in any::<u64>(), amp in 0.1f64..3.0, eps in 0.05f64..0.5) {
        let grid = UniformGrid::new(8.0, 32).unwrap();
        let on = context(3.0, eps, grid, EnergyOptions::default());
        let off = context(3.0, eps, grid, EnergyOptions { bp_coupling: false, potential: true });
        let u = smooth_field(grid, seed, amp);
        let diff = (on.energy(&u) - off.energy(&u)).abs();
        let m2 = inner_l2(&u, &u);
        let bound = eps.powi(3) * 0.25 * (4.0 * std::f64::consts::PI) * m2 * m2;
        prop_assert!(diff <= bound, "{} > {}", diff, bound);
    }

    #[test]
    fn hessian_is_symmetric_on_random_pairs(s in any::<u64>()) {
        let grid = UniformGrid::new(8.0, 32).unwrap();
        let ctx = context(2.5, 0.3, grid, EnergyOptions::default());
        let u = smooth_field(grid, s, 2.0);
        let w1 = smooth_field(grid, s.wrapping_add(1), 1.0);
        let w2 = smooth_field(grid, s.wrapping_add(2), 1.0);
        let a = ctx.inner_h1(&ctx.hessian_apply(&u, &w1), &w2);
        let b = ctx.inner_h1(&ctx.hessian_apply(&u, &w2), &w1);
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()));
    }
}
