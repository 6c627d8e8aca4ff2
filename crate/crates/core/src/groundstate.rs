//! Positive radial ground state of `-Δu + u = u^p` in three dimensions.
//!
//! The profile is produced by Taylor-series shooting: every step expands the
//! radial ODE around the current node to order [`TAYLOR_ORDER`], so the same
//! local expansion doubles as the interpolant used by [`RadialProfile::evaluate`].

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{invalid, Result, SbpError};
use crate::scalar::Real;

pub const TAYLOR_ORDER: usize = 12;
pub const DEFAULT_STEP: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile<T: Real> {
    pub p: T,
    pub r_max: T,
    pub step: T,
    pub nodes: Vec<T>,
    pub u: Vec<T>,
    pub du: Vec<T>,
    pub eta_fit: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundStateConstants<T: Real> {
    pub p: T,
    pub c0: T,
    pub c1: T,
    pub norm_l2_sq: T,
    pub norm_grad_sq: T,
    pub norm_lp1: T,
    pub norm_d1u_h1_sq: T,
    pub sigma: T,
    pub gamma: T,
}

impl<T: Real> GroundStateConstants<T> {
    pub fn norm_h1_sq(&self) -> T {
        self.norm_l2_sq + self.norm_grad_sq
    }

    pub fn nehari_residual(&self) -> T {
        ((self.norm_grad_sq + self.norm_l2_sq - self.norm_lp1) / self.norm_lp1).abs()
    }

    pub fn pohozaev_residual(&self) -> T {
        let half = T::lit(0.5);
        let v = half * self.norm_grad_sq + T::lit(1.5) * self.norm_l2_sq
            - T::lit(3.0) * self.norm_lp1 / (self.p + T::one());
        (v / self.norm_lp1).abs()
    }
}

/// Taylor coefficients of the solution through `(r0, u, du)`.
///
/// Writes `a[k]` with `u(r0 + s) = Σ a[k] s^k`. Requires `u > 0`.
fn taylor_coeffs<T: Real>(p: T, r0: T, u: T, du: T, a: &mut [T; TAYLOR_ORDER + 1]) {
    let mut g = [T::zero(); TAYLOR_ORDER + 1];
    let mut f = [T::zero(); TAYLOR_ORDER + 1];
    a[0] = u;
    a[1] = du;
    g[0] = u.powf(p);
    f[0] = a[0] - g[0];
    let pp1 = p + T::one();
    let power_coeff = |k: usize, a: &[T; TAYLOR_ORDER + 1], g: &[T; TAYLOR_ORDER + 1]| {
        let kt = T::usize(k);
        let mut s = T::zero();
        for j in 1..=k {
            s += (pp1 * T::usize(j) - kt) * a[j] * g[k - j];
        }
        s / (kt * a[0])
    };
    if r0 == T::zero() {
        for k in 1..TAYLOR_ORDER {
            let kt = T::usize(k);
            a[k + 1] = f[k - 1] / ((kt + T::one()) * (kt + T::lit(2.0)));
            g[k] = power_coeff(k, a, &g);
            f[k] = a[k] - g[k];
        }
    } else {
        g[1] = power_coeff(1, a, &g);
        f[1] = a[1] - g[1];
        for k in 0..TAYLOR_ORDER - 1 {
            let kt = T::usize(k);
            let c = (kt + T::one()) * (kt + T::lit(2.0));
            let fkm1 = if k == 0 { T::zero() } else { f[k - 1] };
            a[k + 2] = (r0 * f[k] + fkm1 - c * a[k + 1]) / (r0 * c);
            if k + 2 <= TAYLOR_ORDER {
                g[k + 2] = power_coeff(k + 2, a, &g);
                f[k + 2] = a[k + 2] - g[k + 2];
            }
        }
    }
}

fn poly_eval<T: Real>(a: &[T; TAYLOR_ORDER + 1], s: T) -> (T, T, T) {
    let mut u = T::zero();
    let mut du = T::zero();
    let mut d2u = T::zero();
    for k in (0..=TAYLOR_ORDER).rev() {
        let kt = T::usize(k);
        u = u * s + a[k];
        if k >= 1 {
            du = du * s + kt * a[k];
        }
        if k >= 2 {
            d2u = d2u * s + kt * (kt - T::one()) * a[k];
        }
    }
    (u, du, d2u)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fate {
    Over,
    Under,
}

/// Integrate from node `i0` with state `(u, du)` for at most `steps` steps.
fn shoot<T: Real>(
    p: T,
    h: T,
    i0: usize,
    u: T,
    du: T,
    steps: usize,
    mut record: Option<&mut Vec<(T, T)>>,
) -> Fate {
    let mut a = [T::zero(); TAYLOR_ORDER + 1];
    let (mut u, mut du) = (u, du);
    for s in 0..steps {
        let r0 = T::usize(i0 + s) * h;
        taylor_coeffs(p, r0, u, du, &mut a);
        let (un, dun, _) = poly_eval(&a, h);
        u = un;
        du = dun;
        if !(u > T::zero()) {
            return Fate::Over;
        }
        if du > T::zero() {
            return Fate::Under;
        }
        if let Some(rec) = record.as_deref_mut() {
            rec.push((u, du));
        }
    }
    Fate::Under
}

/// Bisect a one-parameter family `(u, du) = state(t)`; `t_over` overshoots and `t_under` undershoots.
fn bisect<T: Real, F: Fn(T) -> (T, T)>(
    p: T,
    h: T,
    i0: usize,
    steps: usize,
    state: F,
    mut t_over: T,
    mut t_under: T,
) -> (T, T) {
    for _ in 0..400 {
        let mid = (t_over + t_under) * T::lit(0.5);
        if mid == t_over || mid == t_under {
            break;
        }
        let (u, du) = state(mid);
        match shoot(p, h, i0, u, du, steps, None) {
            Fate::Over => t_over = mid,
            Fate::Under => t_under = mid,
        }
    }
    (t_over, t_under)
}

/// Solve for the ground state by Taylor-series shooting with bisection on `u(0)`.
///
/// The exponentially growing mode limits how far a single shot can be trusted, so the
/// trajectory is built in segments: once the bracketing trajectories disagree the
/// integration restarts from the last agreeing node, bisecting on `u'` there.
pub fn solve_ground_state<T: Real>(p: T, r_max: T, tol: T) -> Result<RadialProfile<T>> {
    solve_ground_state_with_step(p, r_max, tol, T::lit(DEFAULT_STEP))
}

pub fn solve_ground_state_with_step<T: Real>(
    p: T,
    r_max: T,
    tol: T,
    h: T,
) -> Result<RadialProfile<T>> {
    if !(p > T::one() && p < T::lit(5.0)) {
        return Err(SbpError::InvalidExponent(p.f64()));
    }
    if !(r_max >= T::lit(20.0)) {
        return Err(invalid("r_max", ">= 20"));
    }
    if !(tol > T::lit(1e-14) && tol < T::lit(1e-4)) {
        return Err(invalid("tol", "in (1e-14, 1e-4)"));
    }
    let n_nodes = (r_max / h).round().to_usize().unwrap() + 1;
    let horizon = n_nodes - 1 + (T::lit(10.0) / h).to_usize().unwrap();
    let split_tol = T::lit(1e-10).max(T::epsilon() * T::lit(100.0));

    // first segment: bisect on u(0)
    let mut hi = T::lit(2.0);
    while shoot(p, h, 0, hi, T::zero(), horizon, None) != Fate::Over {
        hi = hi * T::lit(2.0);
        if hi > T::lit(1e8) {
            return Err(SbpError::NoConvergence {
                iterations: 0,
                residual: hi.f64(),
            });
        }
    }
    let (over, under) = bisect(p, h, 0, horizon, |t| (t, T::zero()), hi, T::one());
    let u0 = (over + under) * T::lit(0.5);
    if (over - under).abs() > tol * u0 {
        return Err(SbpError::NoConvergence {
            iterations: 400,
            residual: ((over - under) / u0).f64(),
        });
    }

    let mut u = vec![u0];
    let mut du = vec![T::zero()];
    let mut seg_states = ((over, T::zero()), (under, T::zero()));
    let mut start = 0usize;
    while u.len() < n_nodes {
        let remaining = horizon - start;
        let mut tr_o = Vec::new();
        let mut tr_u = Vec::new();
        shoot(p, h, start, seg_states.0 .0, seg_states.0 .1, remaining, Some(&mut tr_o));
        shoot(p, h, start, seg_states.1 .0, seg_states.1 .1, remaining, Some(&mut tr_u));
        let mut agreed = 0usize;
        for (&(uo, duo), &(uu, duu)) in tr_o.iter().zip(tr_u.iter()) {
            let um = (uo + uu) * T::lit(0.5);
            let ok = (uo - uu).abs() <= split_tol * um
                && (duo - duu).abs() <= split_tol * (duo.abs() + duu.abs())
                && duo < T::zero()
                && duu < T::zero();
            if !ok {
                break;
            }
            agreed += 1;
        }
        let need = n_nodes - u.len();
        if agreed >= need {
            for k in 0..need {
                u.push((tr_o[k].0 + tr_u[k].0) * T::lit(0.5));
                du.push((tr_o[k].1 + tr_u[k].1) * T::lit(0.5));
            }
            break;
        }
        if agreed < 2 {
            return Err(SbpError::NoConvergence {
                iterations: u.len(),
                residual: split_tol.f64(),
            });
        }
        for k in 0..agreed {
            u.push((tr_o[k].0 + tr_u[k].0) * T::lit(0.5));
            du.push((tr_o[k].1 + tr_u[k].1) * T::lit(0.5));
        }
        start = u.len() - 1;
        let us = u[start];
        let ds = du[start];
        let steps = horizon - start;
        let mut delta = ds.abs() * T::lit(1e-8);
        let (d_over, d_under) = loop {
            let lo = ds - delta;
            let hi = ds + delta;
            let f_lo = shoot(p, h, start, us, lo, steps, None);
            let f_hi = shoot(p, h, start, us, hi, steps, None);
            if f_lo == Fate::Over && f_hi == Fate::Under {
                break (lo, hi);
            }
            delta = delta * T::lit(10.0);
            if delta > ds.abs() {
                return Err(SbpError::NoConvergence {
                    iterations: start,
                    residual: delta.f64(),
                });
            }
        };
        let (d_over, d_under) = bisect(p, h, start, steps, |t| (us, t), d_over, d_under);
        seg_states = ((us, d_over), (us, d_under));
    }

    let nodes: Vec<T> = (0..n_nodes).map(|i| T::usize(i) * h).collect();
    let r_end = nodes[n_nodes - 1];
    let eta_fit = fit_eta(&nodes, &u, r_end);
    Ok(RadialProfile {
        p,
        r_max: r_end,
        step: h,
        nodes,
        u,
        du,
        eta_fit,
    })
}

/// Least-squares decay rate of `r·u(r)` on the outer half of the profile, capped at 1.
fn fit_eta<T: Real>(nodes: &[T], u: &[T], r_max: T) -> T {
    let (mut sx, mut sy, mut sxx, mut sxy, mut m) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for (&r, &v) in nodes.iter().zip(u) {
        if r >= r_max * T::lit(0.5) && r <= r_max * T::lit(0.9) && v > T::zero() {
            let y = (r * v).ln();
            sx += r;
            sy += y;
            sxx += r * r;
            sxy += r * y;
            m += T::one();
        }
    }
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    (-slope).min(T::one())
}

impl<T: Real> RadialProfile<T> {
    fn coeffs_at(&self, i: usize) -> [T; TAYLOR_ORDER + 1] {
        let mut a = [T::zero(); TAYLOR_ORDER + 1];
        taylor_coeffs(self.p, self.nodes[i], self.u[i], self.du[i], &mut a);
        a
    }

    /// `(U(s), U'(s), U''(s))`.
    pub fn evaluate2(&self, s: T) -> (T, T, T) {
        let s = s.abs();
        if s >= self.r_max {
            let um = *self.u.last().unwrap();
            let v = um * (self.r_max / s) * (-(s - self.r_max)).exp();
            let dv = -v * (T::one() + T::one() / s);
            let d2v = v * (T::one() + T::lit(2.0) / s + T::lit(2.0) / (s * s));
            return (v, dv, d2v);
        }
        let i = (s / self.step).round().to_usize().unwrap().min(self.nodes.len() - 1);
        let off = s - self.nodes[i];
        if off == T::zero() {
            let (u, du) = (self.u[i], self.du[i]);
            let d2u = if i == 0 {
                (u - u.powf(self.p)) / T::lit(3.0)
            } else {
                u - u.powf(self.p) - T::lit(2.0) * du / self.nodes[i]
            };
            return (u, du, d2u);
        }
        poly_eval(&self.coeffs_at(i), off)
    }

    /// `(U(s), U'(s))`.
    pub fn evaluate(&self, s: T) -> (T, T) {
        let (u, du, _) = self.evaluate2(s);
        (u, du)
    }

    pub fn value(&self, s: T) -> T {
        self.evaluate2(s).0
    }

    pub fn u0(&self) -> T {
        self.u[0]
    }

    /// Sup of `|u'' + 2u'/r - u + u^p|` over `refine` sub-points per node interval.
    pub fn ode_residual_sup(&self, refine: usize) -> T {
        let mut worst = T::zero();
        let n = self.nodes.len();
        for i in 0..n - 1 {
            for k in 0..refine {
                let r = self.nodes[i] + self.step * T::usize(k) / T::usize(refine);
                if r == T::zero() {
                    continue;
                }
                let (u, du, d2u) = self.evaluate2(r);
                let res = (d2u + T::lit(2.0) * du / r - u + u.powf(self.p)).abs();
                worst = worst.max(res);
            }
        }
        worst
    }

    /// `4π ∫ f(r, U, U') r² dr` by four-point Gauss–Legendre on every node interval.
    pub fn radial_integral<F: Fn(T, T, T) -> T>(&self, f: F) -> T {
        const X: [f64; 4] = [
            -0.861_136_311_594_052_6,
            -0.339_981_043_584_856_3,
            0.339_981_043_584_856_3,
            0.861_136_311_594_052_6,
        ];
        const W: [f64; 4] = [
            0.347_854_845_137_453_9,
            0.652_145_154_862_546_1,
            0.652_145_154_862_546_1,
            0.347_854_845_137_453_9,
        ];
        let half = self.step * T::lit(0.5);
        let mut parts = Vec::with_capacity(self.nodes.len());
        for i in 0..self.nodes.len() - 1 {
            let a = self.coeffs_at(i);
            let mut s = T::zero();
            for q in 0..4 {
                let off = half * (T::one() + T::lit(X[q]));
                let r = self.nodes[i] + off;
                let (u, du, _) = poly_eval(&a, off);
                s += T::lit(W[q]) * f(r, u, du) * r * r;
            }
            parts.push(s * half);
        }
        crate::scalar::pairwise_sum(&parts) * T::lit(4.0) * T::PI()
    }

    pub fn check_invariants(&self) -> Result<()> {
        let n = self.nodes.len();
        if n < 3 || self.u.len() != n || self.du.len() != n {
            return Err(SbpError::Format("node arrays inconsistent".into()));
        }
        if self.nodes[0] != T::zero() || self.du[0] != T::zero() {
            return Err(SbpError::Format("profile must start at r = 0 with du = 0".into()));
        }
        for i in 1..n {
            let dr = self.nodes[i] - self.nodes[i - 1];
            if !(dr > T::zero()) || (dr - self.step).abs() > self.step * T::lit(1e-6) {
                return Err(SbpError::Format("nodes not uniformly increasing".into()));
            }
            if !(self.u[i] > T::zero() && self.u[i] < self.u[i - 1]) {
                return Err(SbpError::Format("profile not positive decreasing".into()));
            }
        }
        if !(self.eta_fit > T::zero() && self.eta_fit <= T::one()) {
            return Err(SbpError::Format("eta_fit outside (0, 1]".into()));
        }
        Ok(())
    }

    /// Write the `SBPC1` text cache.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        let mut s = String::new();
        writeln!(
            s,
            "SBPC1 p={} rmax={} eta={}",
            self.p.f64(),
            self.r_max.f64(),
            self.eta_fit.f64()
        )
        .unwrap();
        for i in 0..self.nodes.len() {
            writeln!(
                s,
                "{:.16e} {:.16e} {:.16e}",
                self.nodes[i].f64(),
                self.u[i].f64(),
                self.du[i].f64()
            )
            .unwrap();
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_cache(std::io::BufWriter::new(f))
    }

    pub fn read_cache<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| SbpError::Format("empty profile cache".into()))??;
        let fields: Vec<&str> = header.split(' ').collect();
        if fields.len() != 4 || fields[0] != "SBPC1" {
            return Err(SbpError::Format(format!("bad header: {header}")));
        }
        let take = |f: &str, key: &str| -> Result<T> {
            let v = f
                .strip_prefix(key)
                .ok_or_else(|| SbpError::Format(format!("bad header field {f}")))?;
            let x: f64 = v
                .parse()
                .map_err(|_| SbpError::Format(format!("bad number {v}")))?;
            Ok(T::lit(x))
        };
        let p = take(fields[1], "p=")?;
        let r_max = take(fields[2], "rmax=")?;
        let eta_fit = take(fields[3], "eta=")?;
        let (mut nodes, mut u, mut du) = (Vec::new(), Vec::new(), Vec::new());
        for line in lines {
            let line = line?;
            let vals: Vec<f64> = line
                .split(' ')
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| SbpError::Format(format!("bad node line: {line}")))?;
            if vals.len() != 3 {
                return Err(SbpError::Format(format!("bad node line: {line}")));
            }
            nodes.push(T::lit(vals[0]));
            u.push(T::lit(vals[1]));
            du.push(T::lit(vals[2]));
        }
        if nodes.len() < 3 {
            return Err(SbpError::Format("too few nodes".into()));
        }
        let step = nodes[1] - nodes[0];
        let prof = RadialProfile {
            p,
            r_max,
            step,
            nodes,
            u,
            du,
            eta_fit,
        };
        prof.check_invariants()?;
        Ok(prof)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_cache(std::io::BufReader::new(f))
    }
}

/// Chord length `|d_{j,k}| = sqrt(2 - 2cos(2π(j-k)/K))` of the unit regular K-gon.
pub fn chord<T: Real>(k_peaks: usize, j: usize, k: usize) -> T {
    let ang = T::lit(2.0) * T::PI() * (T::usize(j) - T::usize(k)) / T::usize(k_peaks);
    (T::lit(2.0) - T::lit(2.0) * ang.cos()).max(T::zero()).sqrt()
}

/// Norms and expansion constants of `U` for a K-peak cluster.
pub fn constants<T: Real>(profile: &RadialProfile<T>, k_peaks: usize) -> Result<GroundStateConstants<T>> {
    let p = profile.p;
    let norm_l2_sq = profile.radial_integral(|_, u, _| u * u);
    let norm_grad_sq = profile.radial_integral(|_, _, du| du * du);
    let norm_lp1 = profile.radial_integral(|_, u, _| u.powf(p + T::one()));
    let lap_sq = profile.radial_integral(|_, u, _| {
        let l = u - u.powf(p);
        l * l
    });
    let um = *profile.u.last().unwrap();
    let tail = T::lit(2.0) * T::PI() * um * um * profile.r_max * profile.r_max;
    if tail > T::lit(1e-8) * norm_l2_sq {
        return Err(SbpError::QuadratureUnderflow {
            r_max: profile.r_max.f64(),
        });
    }
    let half = T::lit(0.5);
    Ok(GroundStateConstants {
        p,
        c0: half * norm_grad_sq - norm_lp1 / (p + T::one()),
        c1: half * norm_l2_sq,
        norm_l2_sq,
        norm_grad_sq,
        norm_lp1,
        norm_d1u_h1_sq: (norm_grad_sq + lap_sq) / T::lit(3.0),
        sigma: T::one().min(p - T::one()),
        gamma: chord(k_peaks.max(2), 2, 1),
    })
}
