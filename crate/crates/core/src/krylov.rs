//! MINRES for self-adjoint operators on a user-supplied inner-product space.

use crate::error::{Result, SbpError};
use crate::scalar::Real;

pub trait KrylovVector<T: Real>: Clone {
    fn axpy(&mut self, a: T, x: &Self);
    fn scale(&mut self, a: T);
    fn zeroed(&self) -> Self;
}

impl<T: Real> KrylovVector<T> for Vec<T> {
    fn axpy(&mut self, a: T, x: &Self) {
        for (s, &v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }
    fn scale(&mut self, a: T) {
        for s in self.iter_mut() {
            *s *= a;
        }
    }
    fn zeroed(&self) -> Self {
        vec![T::zero(); self.len()]
    }
}

#[derive(Clone, Debug)]
pub struct MinresOutcome<V> {
    pub x: V,
    pub residual: f64,
    pub iterations: usize,
    pub restarts: usize,
}

/// Solve `A x = b` for self-adjoint `A` to absolute residual `tol` in the norm of `inner`.
pub fn minres<T, V, A, I>(
    apply: A,
    inner: I,
    b: &V,
    tol: T,
    max_iter: usize,
    max_restarts: usize,
) -> Result<MinresOutcome<V>>
where
    T: Real,
    V: KrylovVector<T>,
    A: Fn(&V) -> V,
    I: Fn(&V, &V) -> T,
{
    let mut x = b.zeroed();
    let mut rhs = b.clone();
    let mut total = 0usize;
    for restart in 0..=max_restarts {
        let (dx, est, it) = minres_cycle(&apply, &inner, &rhs, tol, max_iter)?;
        x.axpy(T::one(), &dx);
        total += it;
        if est <= tol {
            // confirm with the true residual
            let mut r = b.clone();
            r.axpy(-T::one(), &apply(&x));
            let true_res = inner(&r, &r).max(T::zero()).sqrt();
            if true_res <= tol * T::lit(2.0) {
                return Ok(MinresOutcome {
                    x,
                    residual: true_res.f64(),
                    iterations: total,
                    restarts: restart,
                });
            }
            rhs = r;
        } else {
            rhs = b.clone();
            rhs.axpy(-T::one(), &apply(&x));
        }
    }
    let res = inner(&rhs, &rhs).max(T::zero()).sqrt();
    Err(SbpError::KrylovBreakdown(format!(
        "residual {:e} above {:e} after {} restarts",
        res.f64(),
        tol.f64(),
        max_restarts
    )))
}

fn minres_cycle<T, V, A, I>(apply: &A, inner: &I, b: &V, tol: T, max_iter: usize) -> Result<(V, T, usize)>
where
    T: Real,
    V: KrylovVector<T>,
    A: Fn(&V) -> V,
    I: Fn(&V, &V) -> T,
{
    let mut x = b.zeroed();
    let beta1 = inner(b, b).max(T::zero()).sqrt();
    if !beta1.is_finite() {
        return Err(SbpError::KrylovBreakdown("non-finite right-hand side".into()));
    }
    if beta1 <= tol {
        return Ok((x, beta1, 0));
    }
    let mut v_old: Option<V> = None;
    let mut v = b.clone();
    v.scale(T::one() / beta1);
    let mut beta = beta1;
    let mut phibar = beta1;
    let (mut cs, mut sn) = (-T::one(), T::zero());
    let (mut dbar, mut epsln) = (T::zero(), T::zero());
    let mut w1 = b.zeroed();
    let mut w2 = b.zeroed();
    for it in 1..=max_iter {
        let mut p = apply(&v);
        let alpha = inner(&v, &p);
        p.axpy(-alpha, &v);
        if let Some(vo) = &v_old {
            p.axpy(-beta, vo);
        }
        let beta_new = inner(&p, &p).max(T::zero()).sqrt();
        if !beta_new.is_finite() || !alpha.is_finite() {
            return Err(SbpError::KrylovBreakdown("non-finite Lanczos coefficient".into()));
        }
        let oldeps = epsln;
        let delta = cs * dbar + sn * alpha;
        let gbar = sn * dbar - cs * alpha;
        epsln = sn * beta_new;
        dbar = -cs * beta_new;
        let gamma = (gbar * gbar + beta_new * beta_new).sqrt().max(T::min_positive_value());
        cs = gbar / gamma;
        sn = beta_new / gamma;
        let phi = cs * phibar;
        phibar = sn * phibar;
        let mut w = v.clone();
        w.axpy(-oldeps, &w1);
        w.axpy(-delta, &w2);
        w.scale(T::one() / gamma);
        x.axpy(phi, &w);
        w1 = w2;
        w2 = w;
        if phibar.abs() <= tol || beta_new <= T::epsilon() * beta1 {
            return Ok((x, phibar.abs(), it));
        }
        p.scale(T::one() / beta_new);
        v_old = Some(std::mem::replace(&mut v, p));
        beta = beta_new;
    }
    Ok((x, phibar.abs(), max_iter))
}
