//! Lyapunov–Schmidt reduction: auxiliary equation, reduced functional and its minimization.

use crate::ansatz::{
    admissible_interval, check_grid, chord, kgon_directions, peak_positions, superpose, translation_directions, GeneralConfig,
    PeakConfig, PotentialSpec, ReductionParams, TangentSpace,
};
use crate::bpfield::BPParams;
use crate::energy::{DualField, EnergyContext, EnergyOptions};
use crate::error::{Result, SbpError};
use crate::fields::{inner_l2, ScalarField3D};
use crate::groundstate::{GroundStateConstants, RadialProfile};
use crate::krylov::minres;
use crate::scalar::Real;

/// Ansatz `W` with the tangent space it is reduced against.
pub struct Cluster<T: Real> {
    pub centers: Vec<[T; 3]>,
    pub w: ScalarField3D<T>,
    pub tangent: TangentSpace<T>,
}

impl<T: Real> Cluster<T> {
    /// K-gon ansatz with the three-dimensional `(r, θ, φ)` tangent space.
    pub fn kgon(cfg: &PeakConfig<T>, profile: &RadialProfile<T>, ctx: &EnergyContext<T>) -> Result<Self> {
        let centers = peak_positions(cfg);
        Self::assemble(centers, &kgon_directions(cfg), profile, ctx)
    }

    /// Arbitrary centers with the `3K`-dimensional space of independent translations.
    pub fn general(gc: &GeneralConfig<T>, profile: &RadialProfile<T>, ctx: &EnergyContext<T>) -> Result<Self> {
        let dirs = translation_directions(gc.centers.len());
        Self::assemble(gc.centers.clone(), &dirs, profile, ctx)
    }

    fn assemble(
        centers: Vec<[T; 3]>,
        dirs: &[Vec<[T; 3]>],
        profile: &RadialProfile<T>,
        ctx: &EnergyContext<T>,
    ) -> Result<Self> {
        check_grid(&centers, profile, &ctx.grid)?;
        let s = superpose(&centers, dirs, profile, ctx.grid);
        let tangent = TangentSpace::new(s.tangents, &ctx.spectral)?;
        Ok(Cluster {
            centers,
            w: s.w,
            tangent,
        })
    }
}

#[derive(Clone, Debug)]
pub struct AuxiliarySolution<T: Real> {
    pub n: ScalarField3D<T>,
    pub n_norm: T,
    pub residual_norm: T,
    pub iterations: usize,
    pub krylov_iterations: usize,
    /// Tangent coefficients of the full gradient at `W + n`.
    pub multipliers: Vec<T>,
    /// Full (unprojected) gradient norm at `W + n`.
    pub full_gradient_norm: T,
    pub residual_history: Vec<T>,
    pub orthogonality: T,
}

/// `f - Π_T f`.
pub fn project_normal<T: Real>(f: &ScalarField3D<T>, cluster: &Cluster<T>) -> ScalarField3D<T> {
    let mut out = f.clone();
    cluster.tangent.project(&mut out, None);
    out
}

/// `‖∇I_ε(W)‖_{H¹}`.
pub fn pseudo_critical_residual<T: Real>(cluster: &Cluster<T>, ctx: &EnergyContext<T>) -> T {
    ctx.gradient_eval(&cluster.w).norm()
}

struct Linearization<'a, T: Real> {
    hess: crate::energy::HessianAt<'a, T>,
    tangent: &'a TangentSpace<T>,
}

impl<T: Real> Linearization<'_, T> {
    fn apply(&self, v: &DualField<T>) -> DualField<T> {
        let mut out = self.hess.apply(v);
        self.tangent.project(&mut out.v, Some(&mut out.bv));
        out
    }

    /// Solve `L δ = rhs` on the normal space.
    fn solve(&self, rhs: &DualField<T>, tol: T, max_iter: usize, restarts: usize) -> Result<(DualField<T>, usize)> {
        let out = minres(
            |v: &DualField<T>| self.apply(v),
            |a: &DualField<T>, b: &DualField<T>| a.inner(b),
            rhs,
            tol,
            max_iter,
            restarts,
        )?;
        let mut x = out.x;
        self.tangent.project(&mut x.v, Some(&mut x.bv));
        Ok((x, out.iterations))
    }
}

fn projected_gradient<T: Real>(
    ctx: &EnergyContext<T>,
    tangent: &TangentSpace<T>,
    u: &ScalarField3D<T>,
) -> (DualField<T>, Vec<T>, T) {
    let ge = ctx.gradient_eval(u);
    let full = ge.norm();
    let mut d = ge.into_dual();
    let c = tangent.project(&mut d.v, Some(&mut d.bv));
    (d, c, full)
}

/// Solve `Π ∇I_ε(W + n) = 0` for `n ⊥ T` by chord iteration with `L` frozen at `W`.
pub fn solve_auxiliary<T: Real>(cluster: &Cluster<T>, ctx: &EnergyContext<T>) -> Result<AuxiliarySolution<T>> {
    let tol = ctx.params.tol_aux();
    let tol_k = ctx.params.tol_krylov();
    let t = &ctx.params.tol;
    let lin = Linearization {
        hess: ctx.hessian_at(&cluster.w),
        tangent: &cluster.tangent,
    };
    let grid = ctx.grid;
    let mut n = DualField {
        v: ScalarField3D::zeros(grid),
        bv: ScalarField3D::zeros(grid),
    };
    let mut history = Vec::new();
    let mut krylov_total = 0usize;
    let mut iterations = 0usize;
    loop {
        let u = cluster.w.add(&n.v);
        let (pg, c, full) = projected_gradient(ctx, &cluster.tangent, &u);
        let r = pg.inner(&pg).max(T::zero()).sqrt();
        history.push(r);
        if r <= tol {
            n.bv = ctx.spectral.h1_operator(&n.v);
            let n_norm = n.inner(&n).max(T::zero()).sqrt();
            let orthogonality = if n_norm > T::zero() {
                cluster.tangent.orthogonality_residual(&n.v, n_norm)
            } else {
                T::zero()
            };
            return Ok(AuxiliarySolution {
                n: n.v,
                n_norm,
                residual_norm: r,
                iterations,
                krylov_iterations: krylov_total,
                multipliers: c,
                full_gradient_norm: full,
                residual_history: history,
                orthogonality,
            });
        }
        let diverging = r > history[0] * T::lit(1e6);
        if iterations >= t.max_outer || !r.is_finite() || diverging {
            return Err(SbpError::NoConvergence {
                iterations,
                residual: r.f64(),
            });
        }
        let mut rhs = pg;
        KrylovVectorExt::negate(&mut rhs);
        let (delta, its) = lin.solve(&rhs, tol_k, t.max_krylov, t.max_restarts)?;
        krylov_total += its;
        n.v.axpy(T::one(), &delta.v);
        n.bv.axpy(T::one(), &delta.bv);
        cluster.tangent.project(&mut n.v, Some(&mut n.bv));
        iterations += 1;
    }
}

trait KrylovVectorExt {
    fn negate(&mut self);
}

impl<T: Real> KrylovVectorExt for DualField<T> {
    fn negate(&mut self) {
        self.v.scale_mut(-T::one());
        self.bv.scale_mut(-T::one());
    }
}

/// `S(n) = n - L⁻¹ Π ∇I_ε(W + n)`, the map whose fixed point solves the auxiliary equation.
pub fn fixed_point_map<T: Real>(
    cluster: &Cluster<T>,
    ctx: &EnergyContext<T>,
    n: &ScalarField3D<T>,
) -> Result<ScalarField3D<T>> {
    let lin = Linearization {
        hess: ctx.hessian_at(&cluster.w),
        tangent: &cluster.tangent,
    };
    let (mut pg, _, _) = projected_gradient(ctx, &cluster.tangent, &cluster.w.add(n));
    pg.negate();
    let t = &ctx.params.tol;
    let tol = ctx.params.tol_krylov() * T::lit(1e-2);
    let (delta, _) = lin.solve(&pg, tol, t.max_krylov, t.max_restarts)?;
    Ok(n.add(&delta.v))
}

/// `Φ_ε = I_ε(W + n)` with the auxiliary solution used.
pub fn reduced_energy<T: Real>(cluster: &Cluster<T>, ctx: &EnergyContext<T>) -> Result<(T, AuxiliarySolution<T>)> {
    let aux = solve_auxiliary(cluster, ctx)?;
    let e = ctx.energy(&cluster.w.add(&aux.n));
    Ok((e, aux))
}

/// `K C₀ + C₁ Σ V_ε(P_j) + C₁² ε³ (K κ_ε(0) + 2 Σ_{j<k} κ_ε(r |d_{j,k}|))`.
///
/// `κ_ε(0) = 1/a`, so the self term is `K` exactly when `a = 1`.
pub fn asymptotic_formula<T: Real>(
    cfg: &PeakConfig<T>,
    consts: &GroundStateConstants<T>,
    pot: Option<&PotentialSpec<T>>,
    params: &ReductionParams<T>,
    options: EnergyOptions,
) -> T {
    let k = cfg.k;
    let eps = params.eps;
    let mut v_sum = T::zero();
    for pj in peak_positions(cfg) {
        v_sum += match (options.potential, pot) {
            (true, Some(pot)) => pot.value([eps * pj[0], eps * pj[1], eps * pj[2]]),
            _ => T::one(),
        };
    }
    let mut out = T::usize(k) * consts.c0 + consts.c1 * v_sum;
    if options.bp_coupling {
        let bp = BPParams { a: params.a, eps };
        let mut pair = T::zero();
        for j in 2..=k {
            for i in 1..j {
                pair += bp.kappa_eps(cfg.r * chord::<T>(k, j, i));
            }
        }
        let self_term = T::usize(k) * bp.kappa_eps(T::zero());
        out += consts.c1 * consts.c1 * eps * eps * eps * (self_term + T::lit(2.0) * pair);
    }
    out
}

/// Energy of a general configuration after the `3K`-dimensional auxiliary solve.
pub fn general_config_energy<T: Real>(
    gc: &GeneralConfig<T>,
    profile: &RadialProfile<T>,
    ctx: &EnergyContext<T>,
) -> Result<(T, AuxiliarySolution<T>)> {
    let cluster = Cluster::general(gc, profile, ctx)?;
    reduced_energy(&cluster, ctx)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport<T: Real> {
    pub full_gradient_norm: T,
    pub multipliers: Vec<T>,
    pub thresholds: Vec<T>,
    pub pass: bool,
}

/// Check that `W + n` is a critical point of `I_ε`, not merely of the projected problem.
pub fn verify_solution<T: Real>(cluster: &Cluster<T>, aux: &AuxiliarySolution<T>, ctx: &EnergyContext<T>) -> VerifyReport<T> {
    let tol = ctx.params.tol_aux();
    let ten = T::lit(10.0);
    let thresholds: Vec<T> = (0..cluster.tangent.dim())
        .map(|i| ten * tol / T::lit(cluster.tangent.gram[(i, i)].sqrt()))
        .collect();
    let pass = aux.full_gradient_norm <= ten * tol
        && aux
            .multipliers
            .iter()
            .zip(&thresholds)
            .all(|(c, th)| c.abs() <= *th);
    VerifyReport {
        full_gradient_norm: aux.full_gradient_norm,
        multipliers: aux.multipliers.clone(),
        thresholds,
        pass,
    }
}

/// `‖n‖_{H¹}` measured independently of the solver's running dual.
pub fn h1_norm<T: Real>(ctx: &EnergyContext<T>, f: &ScalarField3D<T>) -> T {
    let bf = ctx.spectral.h1_operator(f);
    inner_l2(f, &bf).max(T::zero()).sqrt()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionReport<T: Real> {
    pub eps: T,
    pub r: T,
    pub direct: T,
    pub formula: T,
    pub error: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionSeries<T: Real> {
    pub rows: Vec<ExpansionReport<T>>,
    /// Fitted slope of `error` against `ε`, minus 3.
    pub mu_slope: f64,
}

/// Direct reduced energy against the closed-form expansion along a path `ε ↦ cfg`.
pub fn expansion_report<T, F>(
    base: &ReductionParams<T>,
    pot: &PotentialSpec<T>,
    profile: &RadialProfile<T>,
    consts: &GroundStateConstants<T>,
    grid: crate::fields::UniformGrid<T>,
    eps_list: &[T],
    path: F,
    options: EnergyOptions,
) -> Result<ExpansionSeries<T>>
where
    T: Real,
    F: Fn(&ReductionParams<T>) -> Result<PeakConfig<T>>,
{
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let params = base.with_eps(eps)?;
        if admissible_interval(&params, pot).is_none() {
            return Err(SbpError::EmptyAdmissible);
        }
        let cfg = path(&params)?;
        let ctx = EnergyContext::new(params, Some(pot), grid, options)?;
        let cluster = Cluster::kgon(&cfg, profile, &ctx)?;
        let (direct, _) = reduced_energy(&cluster, &ctx)?;
        let formula = asymptotic_formula(&cfg, consts, Some(pot), &params, options);
        rows.push(ExpansionReport {
            eps,
            r: cfg.r,
            direct,
            formula,
            error: (direct - formula).abs(),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.eps.f64()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.error.f64()).collect();
    Ok(ExpansionSeries {
        mu_slope: loglog_slope(&xs, &ys) - 3.0,
        rows,
    })
}

/// Search settings for [`minimize_reduced`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    /// Log-spaced radii sampled before the golden-section refinement (radial potentials).
    pub scan: usize,
    /// Points per axis of the coarse `(r, θ, φ)` grid (anisotropic potentials).
    pub coarse: usize,
    /// Relative accuracy in `r`.
    pub rel_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            scan: 6,
            coarse: 8,
            rel_tol: 1e-4,
        }
    }
}

/// Polar angles searched for anisotropic potentials, away from the chart poles.
pub const PHI_RANGE: (f64, f64) = (std::f64::consts::FRAC_PI_6, 5.0 * std::f64::consts::FRAC_PI_6);

#[derive(Clone, Debug)]
pub struct ReducedMinimum<T: Real> {
    pub cfg: PeakConfig<T>,
    pub phi_eps: T,
    pub aux: AuxiliarySolution<T>,
    /// The minimizer sits on the end of the searched radius interval.
    pub boundary: bool,
    pub interval: (T, T),
    pub evaluations: usize,
}

/// Radii that are admissible and representable on `grid`.
pub fn search_interval<T: Real>(
    params: &ReductionParams<T>,
    pot: &PotentialSpec<T>,
    profile: &RadialProfile<T>,
    grid: &crate::fields::UniformGrid<T>,
    k: usize,
) -> Result<(T, T)> {
    let (lo, hi) = admissible_interval(params, pot).ok_or(SbpError::EmptyAdmissible)?;
    let reach = grid.half_width - T::lit(12.0) / profile.eta_fit;
    let resolve = T::lit(4.0) * grid.spacing() / chord::<T>(k, 2, 1);
    let lo = lo.max(resolve);
    let hi = hi.min(reach);
    if !(lo < hi) {
        return Err(SbpError::GridTooSmall {
            required: (lo + T::lit(12.0) / profile.eta_fit).f64(),
            actual: grid.half_width.f64(),
        });
    }
    Ok((lo, hi))
}

struct Landscape<'a, T: Real> {
    profile: &'a RadialProfile<T>,
    ctx: &'a EnergyContext<T>,
    k: usize,
    evaluations: usize,
    best: Option<(T, PeakConfig<T>, AuxiliarySolution<T>)>,
}

impl<T: Real> Landscape<'_, T> {
    fn eval(&mut self, r: T, theta: T, phi: T) -> Result<T> {
        let cfg = PeakConfig::new(r, theta, phi, self.k)?;
        let cluster = Cluster::kgon(&cfg, self.profile, self.ctx)?;
        let (e, aux) = reduced_energy(&cluster, self.ctx)?;
        self.evaluations += 1;
        if self.best.as_ref().map_or(true, |b| e < b.0) {
            self.best = Some((e, cfg, aux));
        }
        Ok(e)
    }
}

/// Minimize `Φ_ε` over the admissible set.
///
/// Radial potentials: `(θ, φ) = (0, π/2)`, a log-spaced scan followed by golden
/// section. Otherwise: a coarse `(r, θ, φ)` grid and coordinate descent.
pub fn minimize_reduced<T: Real>(
    ctx: &EnergyContext<T>,
    pot: &PotentialSpec<T>,
    profile: &RadialProfile<T>,
    k: usize,
    search: SearchOptions,
) -> Result<ReducedMinimum<T>> {
    let (lo, hi) = search_interval(&ctx.params, pot, profile, &ctx.grid, k)?;
    let mut land = Landscape {
        profile,
        ctx,
        k,
        evaluations: 0,
        best: None,
    };
    let tol = T::lit(search.rel_tol);
    let log_point = |i: usize, m: usize| lo * ((hi / lo).ln() * T::usize(i) / T::usize(m - 1)).exp();
    if pot.is_radial() {
        let theta = T::zero();
        let phi = T::FRAC_PI_2();
        let m = search.scan.max(3);
        let radii: Vec<T> = (0..m).map(|i| if i + 1 == m { hi } else { log_point(i, m) }).collect();
        let mut vals = Vec::with_capacity(m);
        for &r in &radii {
            vals.push(land.eval(r, theta, phi)?);
        }
        let i0 = argmin(&vals);
        let (mut a, mut b) = (radii[i0.saturating_sub(1)], radii[(i0 + 1).min(m - 1)]);
        let g = T::lit(0.5 * (5f64.sqrt() - 1.0));
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = land.eval(c, theta, phi)?;
        let mut fd = land.eval(d, theta, phi)?;
        while b - a > tol * (a + b) * T::lit(0.5) {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = land.eval(c, theta, phi)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = land.eval(d, theta, phi)?;
            }
        }
    } else {
        let m = search.coarse.max(2);
        let (plo, phi_hi) = (T::lit(PHI_RANGE.0), T::lit(PHI_RANGE.1));
        for i in 0..m {
            let r = log_point(i, m);
            for j in 0..m {
                let theta = T::PI() * T::usize(j) / T::usize(m);
                for l in 0..m {
                    let phi = plo + (phi_hi - plo) * T::usize(l) / T::usize(m - 1);
                    land.eval(r, theta, phi)?;
                }
            }
        }
        let start = land.best.as_ref().map(|b| b.1).expect("coarse grid evaluated");
        let mut x = [start.r, start.theta, start.phi];
        let mut fx = land.best.as_ref().map(|b| b.0).expect("coarse grid evaluated");
        let mut step = [
            x[0] * ((hi / lo).ln() / T::usize(m - 1)).exp_m1(),
            T::PI() / T::usize(m),
            (phi_hi - plo) / T::usize(m - 1),
        ];
        let bounds = [(lo, hi), (T::neg_infinity(), T::infinity()), (plo, phi_hi)];
        while step[0] > tol * x[0] {
            let mut improved = false;
            for c in 0..3 {
                for s in [T::one(), -T::one()] {
                    let mut y = x;
                    y[c] = (y[c] + s * step[c]).max(bounds[c].0).min(bounds[c].1);
                    if y[c] == x[c] {
                        continue;
                    }
                    let fy = land.eval(y[0], y[1], y[2])?;
                    if fy < fx {
                        x = y;
                        fx = fy;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                for s in step.iter_mut() {
                    *s = *s * T::lit(0.5);
                }
            }
        }
    }
    let evaluations = land.evaluations;
    let (phi_eps, cfg, aux) = land.best.expect("at least one evaluation");
    let edge = tol * (lo + hi);
    let boundary = cfg.r - lo <= edge || hi - cfg.r <= edge;
    Ok(ReducedMinimum {
        cfg,
        phi_eps,
        aux,
        boundary,
        interval: (lo, hi),
        evaluations,
    })
}

fn argmin<T: Real>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

/// Grid sizing for sweeps: the box covers the admissible radii plus the decay margin.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPolicy {
    /// Candidate points per axis, ascending.
    pub sizes: Vec<usize>,
    pub max_spacing: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy {
            sizes: vec![96, 128, 160],
            max_spacing: 0.4,
        }
    }
}

impl GridPolicy {
    /// Smallest grid covering `r_max`; `GridBudget` when none of the sizes is fine enough.
    pub fn grid_for<T: Real>(&self, r_max: T, profile: &RadialProfile<T>) -> Result<crate::fields::UniformGrid<T>> {
        let half = r_max + T::lit(12.0) / profile.eta_fit + T::lit(self.max_spacing);
        let need = (T::lit(2.0) * half / T::lit(self.max_spacing)).ceil().to_usize().unwrap_or(usize::MAX);
        let max = self.sizes.iter().copied().max().unwrap_or(0);
        match self.sizes.iter().copied().filter(|&n| n >= need).min() {
            Some(n) => crate::fields::UniformGrid::new(half, n),
            None => Err(SbpError::GridBudget {
                required: need + (need & 1),
                max,
            }),
        }
    }
}

/// Column names of a sweep result row.
pub const SWEEP_HEADER: [&str; 22] = [
    "eps",
    "K",
    "p",
    "a",
    "alpha",
    "lambda",
    "beta",
    "r_star",
    "theta_star",
    "phi_star",
    "phi_eps",
    "formula",
    "error",
    "n_norm",
    "grad_norm",
    "c_rad",
    "c_azi",
    "c_pol",
    "boundary_flag",
    "grid_n",
    "grid_L",
    "seconds",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<T: Real> {
    pub params: ReductionParams<T>,
    pub k: usize,
    pub minimum: (T, T, T),
    pub phi_eps: T,
    pub formula: T,
    pub n_norm: T,
    pub grad_norm: T,
    pub multipliers: [T; 3],
    pub boundary: bool,
    pub verified: bool,
    pub grid_n: usize,
    pub grid_l: T,
    pub seconds: f64,
}

impl<T: Real> SweepRow<T> {
    /// Text fields in [`SWEEP_HEADER`] order; floats use the shortest round-trip form.
    pub fn record(&self) -> Vec<String> {
        let f = |x: T| format!("{}", x.f64());
        let p = &self.params;
        vec![
            f(p.eps),
            self.k.to_string(),
            f(p.p),
            f(p.a),
            f(p.alpha),
            f(p.lambda),
            f(p.beta),
            f(self.minimum.0),
            f(self.minimum.1),
            f(self.minimum.2),
            f(self.phi_eps),
            f(self.formula),
            f((self.phi_eps - self.formula).abs()),
            f(self.n_norm),
            f(self.grad_norm),
            f(self.multipliers[0]),
            f(self.multipliers[1]),
            f(self.multipliers[2]),
            u8::from(self.boundary).to_string(),
            self.grid_n.to_string(),
            f(self.grid_l),
            format!("{:.3}", self.seconds),
        ]
    }
}

/// One sweep point: size the grid, minimize `Φ_ε`, verify the minimizer.
pub fn sweep_point<T: Real>(
    params: &ReductionParams<T>,
    pot: &PotentialSpec<T>,
    profile: &RadialProfile<T>,
    consts: &GroundStateConstants<T>,
    k: usize,
    policy: &GridPolicy,
    search: SearchOptions,
    options: EnergyOptions,
) -> Result<SweepRow<T>> {
    let (_, hi) = admissible_interval(params, pot).ok_or(SbpError::EmptyAdmissible)?;
    let grid = policy.grid_for(hi, profile)?;
    solve_point(params, pot, profile, consts, k, grid, search, options).map(|(row, _)| row)
}

/// Minimize `Φ_ε` on a given grid; also returns the solution `W + n`.
pub fn solve_point<T: Real>(
    params: &ReductionParams<T>,
    pot: &PotentialSpec<T>,
    profile: &RadialProfile<T>,
    consts: &GroundStateConstants<T>,
    k: usize,
    grid: crate::fields::UniformGrid<T>,
    search: SearchOptions,
    options: EnergyOptions,
) -> Result<(SweepRow<T>, ScalarField3D<T>)> {
    let start = std::time::Instant::now();
    let ctx = EnergyContext::new(*params, Some(pot), grid, options)?;
    let min = minimize_reduced(&ctx, pot, profile, k, search)?;
    let cluster = Cluster::kgon(&min.cfg, profile, &ctx)?;
    let report = verify_solution(&cluster, &min.aux, &ctx);
    let formula = asymptotic_formula(&min.cfg, consts, Some(pot), params, options);
    let m = &min.aux.multipliers;
    let row = SweepRow {
        params: *params,
        k,
        minimum: (min.cfg.r, min.cfg.theta, min.cfg.phi),
        phi_eps: min.phi_eps,
        formula,
        n_norm: min.aux.n_norm,
        grad_norm: min.aux.full_gradient_norm,
        multipliers: [m[0], m[1], m[2]],
        boundary: min.boundary,
        verified: report.pass,
        grid_n: grid.n,
        grid_l: grid.half_width,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((row, cluster.w.add(&min.aux.n)))
}
