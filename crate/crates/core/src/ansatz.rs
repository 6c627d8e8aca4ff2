//! K-gon geometry, the trapping potential, admissible radii and the multipeak ansatz.

use nalgebra::DMatrix;

use crate::error::{invalid, Result, SbpError};
use crate::fields::{inner_l2, ScalarField3D, Spectral, UniformGrid};
use crate::groundstate::RadialProfile;
use crate::scalar::Real;

pub use crate::groundstate::chord;

/// Regular K-gon on a great circle of the sphere of radius `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeakConfig<T: Real> {
    pub r: T,
    pub theta: T,
    pub phi: T,
    pub k: usize,
}

impl<T: Real> PeakConfig<T> {
    pub fn new(r: T, theta: T, phi: T, k: usize) -> Result<Self> {
        if !(r > T::zero()) {
            return Err(invalid("r", "> 0"));
        }
        if k < 2 {
            return Err(invalid("K", ">= 2"));
        }
        Ok(PeakConfig { r, theta, phi, k })
    }

    pub fn phi_j(&self, j: usize) -> T {
        self.phi + T::lit(2.0) * T::PI() * T::usize(j) / T::usize(self.k)
    }
}

/// `r (cos θ sin φ, sin θ sin φ, cos φ)`.
pub fn sphere_point<T: Real>(r: T, theta: T, phi: T) -> [T; 3] {
    [
        r * theta.cos() * phi.sin(),
        r * theta.sin() * phi.sin(),
        r * phi.cos(),
    ]
}

/// Peak centers `P(r, θ, φ_j)` for `j = 1..K`.
pub fn peak_positions<T: Real>(cfg: &PeakConfig<T>) -> Vec<[T; 3]> {
    (1..=cfg.k)
        .map(|j| sphere_point(cfg.r, cfg.theta, cfg.phi_j(j)))
        .collect()
}

/// Arbitrary K-tuple of distinct centers.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralConfig<T: Real> {
    pub centers: Vec<[T; 3]>,
}

impl<T: Real> GeneralConfig<T> {
    pub fn new(centers: Vec<[T; 3]>) -> Result<Self> {
        if centers.len() < 2 {
            return Err(invalid("K", ">= 2"));
        }
        for i in 0..centers.len() {
            for j in 0..i {
                if dist(centers[i], centers[j]) == T::zero() {
                    return Err(invalid("centers", "pairwise distinct"));
                }
            }
        }
        Ok(GeneralConfig { centers })
    }

    pub fn from_kgon(cfg: &PeakConfig<T>) -> Self {
        GeneralConfig {
            centers: peak_positions(cfg),
        }
    }
}

pub fn dist<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

fn smooth_step<T: Real>(t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    if t >= T::one() {
        return T::one();
    }
    let psi = |s: T| (-T::one() / s).exp();
    psi(t) / (psi(t) + psi(T::one() - t))
}

pub const CUTOFF_START: f64 = 0.75;
pub const CUTOFF_FLOOR: f64 = 0.999999;
pub const OUTER_VALUE: f64 = 2.0;

/// `V(x) = 1 + g(x)^α` on the unit ball with `g(x) = c·xᵀAx·s(|x|)`, blended to a
/// constant outside.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec<T: Real> {
    pub alpha: T,
    pub hess: [[T; 3]; 3],
    pub scale: T,
}

pub fn alpha_threshold<T: Real>() -> T {
    T::lit(3.0) + T::lit(7.0).sqrt()
}

impl<T: Real> PotentialSpec<T> {
    /// Potential with `c` fixed so that the sampled `C^{3,1}` norm of `g` equals one.
    pub fn normalized(alpha: T, hess: [[T; 3]; 3]) -> Result<Self> {
        let mut spec = PotentialSpec {
            alpha,
            hess,
            scale: T::one(),
        };
        spec.validate_shape()?;
        let norm = spec.c31_norm();
        spec.scale = T::one() / norm;
        spec.validate()?;
        Ok(spec)
    }

    pub fn radial(alpha: T) -> Result<Self> {
        let (o, z) = (T::one(), T::zero());
        Self::normalized(alpha, [[o, z, z], [z, o, z], [z, z, o]])
    }

    pub fn diagonal(alpha: T, d: [T; 3]) -> Result<Self> {
        let z = T::zero();
        Self::normalized(alpha, [[d[0], z, z], [z, d[1], z], [z, z, d[2]]])
    }

    /// Potential with an explicit scale `c`, bypassing the norm normalization.
    pub fn with_scale(alpha: T, hess: [[T; 3]; 3], scale: T) -> Result<Self> {
        let spec = PotentialSpec { alpha, hess, scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn is_radial(&self) -> bool {
        let h = &self.hess;
        h[0][1] == T::zero()
            && h[0][2] == T::zero()
            && h[1][2] == T::zero()
            && h[0][0] == h[1][1]
            && h[1][1] == h[2][2]
    }

    fn validate_shape(&self) -> Result<()> {
        if !(self.alpha > alpha_threshold::<T>()) {
            return Err(SbpError::AlphaTooSmall(self.alpha.f64()));
        }
        let h = &self.hess;
        for i in 0..3 {
            for j in 0..3 {
                if h[i][j] != h[j][i] || !h[i][j].is_finite() {
                    return Err(invalid("hess", "symmetric and finite"));
                }
            }
        }
        let m = DMatrix::from_fn(3, 3, |i, j| h[i][j].f64());
        let ev = m.symmetric_eigenvalues();
        if !(ev.min() > 0.0) {
            return Err(invalid("hess", "positive-definite"));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        if !(self.scale > T::zero()) {
            return Err(invalid("scale", "> 0"));
        }
        if self.value([T::zero(); 3]) != T::one() {
            return Err(invalid("potential", "V(0) = 1"));
        }
        let m = 10;
        let (mut vmin, mut vmax) = (T::infinity(), T::neg_infinity());
        for iz in -m..=m {
            for iy in -m..=m {
                for ix in -m..=m {
                    if ix == 0 && iy == 0 && iz == 0 {
                        continue;
                    }
                    let x = [ix, iy, iz].map(|c| T::lit(c as f64 / m as f64 * 2.5));
                    let v = self.value(x);
                    let rho = dist(x, [T::zero(); 3]);
                    // V - 1 = g^α can round to zero near the origin, so test g itself
                    if rho <= T::one() && !(self.g(x) > T::zero()) {
                        return Err(invalid("potential", "V > 1 on the punctured unit ball"));
                    }
                    vmin = vmin.min(v);
                    vmax = vmax.max(v);
                }
            }
        }
        if !(vmin > T::zero() && vmax.is_finite()) {
            return Err(invalid("potential", "0 < inf V <= sup V < inf"));
        }
        Ok(())
    }

    fn cutoff(rho: T) -> T {
        let floor = T::lit(CUTOFF_FLOOR);
        let start = T::lit(CUTOFF_START);
        T::one() - (T::one() - floor) * smooth_step((rho - start) / (T::one() - start))
    }

    pub fn g(&self, x: [T; 3]) -> T {
        let h = &self.hess;
        let mut q = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                q += x[i] * h[i][j] * x[j];
            }
        }
        let rho = dist(x, [T::zero(); 3]);
        self.scale * q * Self::cutoff(rho)
    }

    pub fn value(&self, x: [T; 3]) -> T {
        let rho = dist(x, [T::zero(); 3]);
        let outer = T::lit(OUTER_VALUE);
        if rho >= T::lit(2.0) {
            return outer;
        }
        let inner = T::one() + self.g(x).powf(self.alpha);
        if rho <= T::one() {
            inner
        } else {
            let b = smooth_step(rho - T::one());
            (T::one() - b) * inner + b * outer
        }
    }

    /// Sampled `C^{3,1}(B₁)` norm of `g`: largest partial derivative of order ≤ 4 in
    /// absolute value, by nested central differences on a lattice covering the ball.
    pub fn c31_norm(&self) -> T {
        let m = 8i32;
        let mut worst = T::zero();
        let mut idx: Vec<Vec<usize>> = vec![vec![]];
        for order in 1..=4usize {
            let mut next = Vec::new();
            for base in idx.iter().filter(|b| b.len() == order - 1) {
                let last = base.last().copied().unwrap_or(0);
                for d in last..3 {
                    let mut b = base.clone();
                    b.push(d);
                    next.push(b);
                }
            }
            idx.extend(next);
        }
        for iz in -m..=m {
            for iy in -m..=m {
                for ix in -m..=m {
                    let x = [ix, iy, iz].map(|c| T::lit(c as f64 / m as f64));
                    if dist(x, [T::zero(); 3]) > T::one() {
                        continue;
                    }
                    for mi in &idx {
                        let delta = if mi.len() == 4 { T::lit(2e-2) } else { T::lit(1e-2) };
                        worst = worst.max(self.partial(x, mi, delta).abs());
                    }
                }
            }
        }
        worst
    }

    fn partial(&self, x: [T; 3], dirs: &[usize], delta: T) -> T {
        match dirs.split_first() {
            None => self.g(x),
            Some((&d, rest)) => {
                let mut xp = x;
                let mut xm = x;
                xp[d] += delta;
                xm[d] -= delta;
                (self.partial(xp, rest, delta) - self.partial(xm, rest, delta)) / (T::lit(2.0) * delta)
            }
        }
    }
}

/// `(λ, β)` at the midpoints of their admissible windows.
pub fn choose_exponents<T: Real>(alpha: T) -> Result<(T, T)> {
    if !(alpha > alpha_threshold::<T>()) {
        return Err(SbpError::AlphaTooSmall(alpha.f64()));
    }
    let (lo, hi) = lambda_window(alpha);
    if !(lo < hi) {
        return Err(SbpError::AlphaTooSmall(alpha.f64()));
    }
    let lambda = (lo + hi) * T::lit(0.5);
    let beta = (alpha - lambda) / (alpha + T::one()) * T::lit(0.5);
    Ok((lambda, beta))
}

pub fn lambda_window<T: Real>(alpha: T) -> (T, T) {
    let lo = T::lit(2.0) * (alpha + T::lit(2.0)) / (alpha - T::one());
    let hi = (T::lit(2.0) * alpha - T::lit(8.0)).min(alpha);
    (lo, hi)
}

/// Solver settings attached to a reduction run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T: Real> {
    /// `tol_aux = aux_factor · ε²`.
    pub aux_factor: T,
    /// Krylov absolute tolerance `krylov_factor · ε²`.
    pub krylov_factor: T,
    pub max_outer: usize,
    pub max_krylov: usize,
    pub max_restarts: usize,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            aux_factor: T::lit(1e-2),
            krylov_factor: T::lit(1e-3),
            max_outer: 40,
            max_krylov: 300,
            max_restarts: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReductionParams<T: Real> {
    pub eps: T,
    pub a: T,
    pub p: T,
    pub alpha: T,
    pub lambda: T,
    pub beta: T,
    pub tol: Tolerances<T>,
}

impl<T: Real> ReductionParams<T> {
    pub fn new(eps: T, a: T, p: T, alpha: T, lambda: T, beta: T) -> Result<Self> {
        let rp = ReductionParams {
            eps,
            a,
            p,
            alpha,
            lambda,
            beta,
            tol: Tolerances::default(),
        };
        rp.validate()?;
        Ok(rp)
    }

    pub fn with_auto_exponents(eps: T, a: T, p: T, alpha: T) -> Result<Self> {
        let (lambda, beta) = choose_exponents(alpha)?;
        Self::new(eps, a, p, alpha, lambda, beta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > T::zero() && self.eps < T::one()) {
            return Err(invalid("eps", "in (0, 1)"));
        }
        if !(self.a > T::zero()) {
            return Err(invalid("a", "> 0"));
        }
        if !(self.p > T::one() && self.p < T::lit(5.0)) {
            return Err(SbpError::InvalidExponent(self.p.f64()));
        }
        if !(self.alpha > alpha_threshold::<T>()) {
            return Err(SbpError::AlphaTooSmall(self.alpha.f64()));
        }
        let (lo, hi) = lambda_window(self.alpha);
        if !(self.lambda > lo && self.lambda < hi) {
            return Err(invalid(
                "lambda",
                format!("in ({}, {})", lo.f64(), hi.f64()),
            ));
        }
        let bhi = (self.alpha - self.lambda) / (self.alpha + T::one());
        if !(self.beta > T::zero() && self.beta < bhi) {
            return Err(invalid("beta", format!("in (0, {})", bhi.f64())));
        }
        Ok(())
    }

    pub fn with_eps(&self, eps: T) -> Result<Self> {
        let mut rp = *self;
        rp.eps = eps;
        rp.validate()?;
        Ok(rp)
    }

    /// `ε^{-(α-λ)/(α+1)}`, the reference radius inside every admissible window.
    pub fn center_radius(&self) -> T {
        self.eps.powf(-(self.alpha - self.lambda) / (self.alpha + T::one()))
    }

    pub fn r_lo(&self) -> T {
        self.eps
            .powf(self.beta - (self.alpha - self.lambda) / (self.alpha + T::one()))
    }

    pub fn r_hi(&self) -> T {
        self.eps.powf(-self.alpha / (self.alpha + T::one()))
    }

    pub fn v_cap(&self) -> T {
        T::one() + self.eps.powf(T::lit(3.0) * self.alpha / (self.alpha + T::one()))
    }

    pub fn tol_aux(&self) -> T {
        self.tol.aux_factor * self.eps * self.eps
    }

    pub fn tol_krylov(&self) -> T {
        self.tol.krylov_factor * self.eps * self.eps
    }
}

/// `max_{|x|=1} V(ρx)`: 26 lattice directions followed by a shrinking pattern search.
pub fn sphere_max<T: Real>(pot: &PotentialSpec<T>, rho: T) -> T {
    let mut best = (T::neg_infinity(), T::zero(), T::zero());
    for dz in -1i32..=1 {
        for dy in -1i32..=1 {
            for dx in -1i32..=1 {
                if dx == 0 && dy == 0 && dz == 0 {
                    continue;
                }
                let (x, y, z) = (T::lit(dx as f64), T::lit(dy as f64), T::lit(dz as f64));
                let nrm = (x * x + y * y + z * z).sqrt();
                let theta = y.atan2(x);
                let phi = (z / nrm).acos();
                let v = pot.value(sphere_point(rho, theta, phi));
                if v > best.0 {
                    best = (v, theta, phi);
                }
            }
        }
    }
    let mut step = T::lit(0.4);
    while step > T::lit(1e-6) {
        let mut improved = false;
        for (dt, dp) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let t = best.1 + step * T::lit(dt as f64);
            let p = best.2 + step * T::lit(dp as f64);
            let v = pot.value(sphere_point(rho, t, p));
            if v > best.0 {
                best = (v, t, p);
                improved = true;
            }
        }
        if !improved {
            step = step * T::lit(0.5);
        }
    }
    best.0
}

/// Admissible radii `(r_lo, r_hi)` or `None` when the set is empty.
pub fn admissible_interval<T: Real>(params: &ReductionParams<T>, pot: &PotentialSpec<T>) -> Option<(T, T)> {
    let lo = params.r_lo();
    let hi = params.r_hi();
    let cap = params.v_cap();
    let ok = |r: T| sphere_max(pot, params.eps * r) < cap;
    if !(lo < hi) || !ok(lo) {
        return None;
    }
    let samples = 200;
    let ratio = (hi / lo).ln() / T::usize(samples);
    let mut good = lo;
    for i in 1..=samples {
        let r = lo * (ratio * T::usize(i)).exp();
        if ok(r) {
            good = r;
        } else {
            let mut bad = r;
            for _ in 0..60 {
                let mid = (good + bad) * T::lit(0.5);
                if ok(mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            return if good > lo { Some((lo, good)) } else { None };
        }
    }
    Some((lo, hi))
}

/// `V_ε(x) = V(εx)` on the grid.
pub fn potential_field<T: Real>(pot: &PotentialSpec<T>, eps: T, grid: UniformGrid<T>) -> ScalarField3D<T> {
    ScalarField3D::from_fn(grid, |x| pot.value([eps * x[0], eps * x[1], eps * x[2]]))
}

/// The ansatz `Σ_j U(·-ζ_j)` together with the translation-derivative fields
/// `Σ_j -∇U(·-ζ_j)·v_{j,d}` for each direction set `d`.
pub struct Superposition<T: Real> {
    pub w: ScalarField3D<T>,
    pub tangents: Vec<ScalarField3D<T>>,
}

/// Check the grid margin and peak separation preconditions.
pub fn check_grid<T: Real>(centers: &[[T; 3]], profile: &RadialProfile<T>, grid: &UniformGrid<T>) -> Result<()> {
    let reach = centers
        .iter()
        .map(|c| c[0].abs().max(c[1].abs()).max(c[2].abs()))
        .fold(T::zero(), |a, b| a.max(b));
    grid.require_margin(reach, T::lit(12.0) / profile.eta_fit)?;
    let h4 = T::lit(4.0) * grid.spacing();
    for i in 0..centers.len() {
        for j in 0..i {
            let d = dist(centers[i], centers[j]);
            if d < h4 {
                return Err(SbpError::PeaksUnresolved {
                    distance: d.f64(),
                    required: h4.f64(),
                });
            }
        }
    }
    Ok(())
}

/// Sample `W` and the tangent fields. `dirs[d][j]` is the velocity of center `j`
/// along tangent direction `d`.
pub fn superpose<T: Real>(
    centers: &[[T; 3]],
    dirs: &[Vec<[T; 3]>],
    profile: &RadialProfile<T>,
    grid: UniformGrid<T>,
) -> Superposition<T> {
    let n_pts = grid.len();
    let mut w = vec![T::zero(); n_pts];
    let mut tangents = vec![vec![T::zero(); n_pts]; dirs.len()];
    for idx in 0..n_pts {
        let x = grid.point(idx);
        for (j, c) in centers.iter().enumerate() {
            let d = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
            let rho = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let (u, du) = profile.evaluate(rho);
            w[idx] += u;
            if rho > T::zero() {
                let f = du / rho;
                for (t, dv) in tangents.iter_mut().zip(dirs) {
                    let v = dv[j];
                    t[idx] -= f * (d[0] * v[0] + d[1] * v[1] + d[2] * v[2]);
                }
            }
        }
    }
    Superposition {
        w: ScalarField3D { grid, values: w },
        tangents: tangents
            .into_iter()
            .map(|values| ScalarField3D { grid, values })
            .collect(),
    }
}

/// Velocities of the K-gon centers along `(r, θ, φ)`.
pub fn kgon_directions<T: Real>(cfg: &PeakConfig<T>) -> Vec<Vec<[T; 3]>> {
    let (st, ct) = (cfg.theta.sin(), cfg.theta.cos());
    let mut rad = Vec::new();
    let mut azi = Vec::new();
    let mut pol = Vec::new();
    for j in 1..=cfg.k {
        let pj = cfg.phi_j(j);
        let (sp, cp) = (pj.sin(), pj.cos());
        rad.push([ct * sp, st * sp, cp]);
        azi.push([-cfg.r * st * sp, cfg.r * ct * sp, T::zero()]);
        pol.push([cfg.r * ct * cp, cfg.r * st * cp, -cfg.r * sp]);
    }
    vec![rad, azi, pol]
}

/// Unit translations of each center separately, `3K` directions.
pub fn translation_directions<T: Real>(k: usize) -> Vec<Vec<[T; 3]>> {
    let mut out = Vec::new();
    for j in 0..k {
        for axis in 0..3 {
            let mut v = vec![[T::zero(); 3]; k];
            v[j][axis] = T::one();
            out.push(v);
        }
    }
    out
}

pub fn build_w<T: Real>(cfg: &PeakConfig<T>, profile: &RadialProfile<T>, grid: UniformGrid<T>) -> Result<ScalarField3D<T>> {
    let centers = peak_positions(cfg);
    check_grid(&centers, profile, &grid)?;
    Ok(superpose(&centers, &[], profile, grid).w)
}

pub fn tangent_basis<T: Real>(
    cfg: &PeakConfig<T>,
    profile: &RadialProfile<T>,
    grid: UniformGrid<T>,
) -> Result<[ScalarField3D<T>; 3]> {
    let centers = peak_positions(cfg);
    check_grid(&centers, profile, &grid)?;
    let s = superpose(&centers, &kgon_directions(cfg), profile, grid);
    let mut it = s.tangents.into_iter();
    Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
}

/// Tangent fields with their `(-Δ+1)` images and H¹ Gram matrix.
pub struct TangentSpace<T: Real> {
    pub fields: Vec<ScalarField3D<T>>,
    pub duals: Vec<ScalarField3D<T>>,
    pub gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
}

impl<T: Real> TangentSpace<T> {
    pub fn new(fields: Vec<ScalarField3D<T>>, spectral: &Spectral<T>) -> Result<Self> {
        let duals: Vec<_> = fields.iter().map(|f| spectral.h1_operator(f)).collect();
        let d = fields.len();
        let mut gram = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                gram[(i, j)] = inner_l2(&fields[i], &duals[j]).f64();
            }
        }
        let gram = (&gram + gram.transpose()) * 0.5;
        let ev = gram.clone().symmetric_eigenvalues();
        let (lo, hi) = (ev.min(), ev.max());
        let ratio = lo / hi;
        if !(hi > 0.0) || !(ratio >= 1e-10) {
            return Err(SbpError::SingularGram { ratio });
        }
        let gram_inv = gram
            .clone()
            .cholesky()
            .ok_or(SbpError::SingularGram { ratio })?
            .inverse();
        Ok(TangentSpace {
            fields,
            duals,
            gram,
            gram_inv,
        })
    }

    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    /// Tangent coefficients of `f` given its dual `(-Δ+1)f`.
    pub fn coefficients_from_dual(&self, f_dual: &ScalarField3D<T>) -> Vec<T> {
        let rhs: Vec<f64> = self.fields.iter().map(|t| inner_l2(t, f_dual).f64()).collect();
        self.solve(&rhs)
    }

    pub fn coefficients(&self, f: &ScalarField3D<T>) -> Vec<T> {
        let rhs: Vec<f64> = self.duals.iter().map(|t| inner_l2(f, t).f64()).collect();
        self.solve(&rhs)
    }

    fn solve(&self, rhs: &[f64]) -> Vec<T> {
        let b = nalgebra::DVector::from_column_slice(rhs);
        let c = &self.gram_inv * b;
        c.iter().map(|&v| T::lit(v)).collect()
    }

    /// Remove the tangent component from `f` and, when given, from its dual.
    pub fn project(&self, f: &mut ScalarField3D<T>, dual: Option<&mut ScalarField3D<T>>) -> Vec<T> {
        let c = match &dual {
            Some(d) => self.coefficients_from_dual(d),
            None => self.coefficients(f),
        };
        for (ci, t) in c.iter().zip(&self.fields) {
            f.axpy(-*ci, t);
        }
        if let Some(d) = dual {
            for (ci, t) in c.iter().zip(&self.duals) {
                d.axpy(-*ci, t);
            }
        }
        c
    }

    /// Largest `|⟨f, t_d⟩_{H¹}| / (‖f‖ ‖t_d‖)`.
    pub fn orthogonality_residual(&self, f: &ScalarField3D<T>, f_norm: T) -> T {
        let mut worst = T::zero();
        for (i, t) in self.duals.iter().enumerate() {
            let tn = T::lit(self.gram[(i, i)].sqrt());
            let v = inner_l2(f, t).abs() / (f_norm * tn);
            worst = worst.max(v);
        }
        worst
    }
}

pub fn gram_matrix<T: Real>(
    cfg: &PeakConfig<T>,
    profile: &RadialProfile<T>,
    grid: UniformGrid<T>,
    spectral: &Spectral<T>,
) -> Result<DMatrix<f64>> {
    let t = tangent_basis(cfg, profile, grid)?;
    Ok(TangentSpace::new(t.to_vec(), spectral)?.gram)
}

/// `⟨U_j, U_k⟩_{H¹}` for two peaks of the configuration (1-based labels).
pub fn overlap<T: Real>(
    cfg: &PeakConfig<T>,
    profile: &RadialProfile<T>,
    grid: UniformGrid<T>,
    spectral: &Spectral<T>,
    j: usize,
    k: usize,
) -> Result<T> {
    let centers = peak_positions(cfg);
    check_grid(&centers, profile, &grid)?;
    let uj = superpose(&centers[j - 1..j], &[], profile, grid).w;
    let uk = superpose(&centers[k - 1..k], &[], profile, grid).w;
    spectral.inner_h1(&uj, &uk, crate::fields::Mass::Unit)
}
