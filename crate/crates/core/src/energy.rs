//! The functional `I_ε`, its H¹-Riesz gradient and Hessian action on grid fields.

use num_complex::Complex;

use crate::ansatz::{potential_field, PotentialSpec, ReductionParams};
use crate::bpfield::{BPParams, BpSolver};
use crate::error::Result;
use crate::fields::{inner_l2, integrate, ScalarField3D, Spectral, UniformGrid};
use crate::krylov::KrylovVector;
use crate::scalar::{pairwise_sum_by, Real};

/// Switches for control experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnergyOptions {
    /// Include the `ε³` Bopp–Podolsky coupling.
    pub bp_coupling: bool,
    /// Use `V_ε`; otherwise `V ≡ 1`.
    pub potential: bool,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        EnergyOptions {
            bp_coupling: true,
            potential: true,
        }
    }
}

/// A field paired with its image under `-Δ + 1`.
#[derive(Clone, Debug)]
pub struct DualField<T: Real> {
    pub v: ScalarField3D<T>,
    pub bv: ScalarField3D<T>,
}

impl<T: Real> DualField<T> {
    pub fn new(v: ScalarField3D<T>, spectral: &Spectral<T>) -> Self {
        let bv = spectral.h1_operator(&v);
        DualField { v, bv }
    }

    /// `⟨self, other⟩_{H¹}`.
    pub fn inner(&self, other: &Self) -> T {
        inner_l2(&self.v, &other.bv)
    }
}

impl<T: Real> KrylovVector<T> for DualField<T> {
    fn axpy(&mut self, a: T, x: &Self) {
        self.v.axpy(a, &x.v);
        self.bv.axpy(a, &x.bv);
    }
    fn scale(&mut self, a: T) {
        self.v.scale_mut(a);
        self.bv.scale_mut(a);
    }
    fn zeroed(&self) -> Self {
        DualField {
            v: ScalarField3D::zeros(self.v.grid),
            bv: ScalarField3D::zeros(self.v.grid),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParts<T: Real> {
    pub kinetic: T,
    pub potential: T,
    pub bp: T,
    pub nonlinear: T,
}

impl<T: Real> EnergyParts<T> {
    pub fn total(&self) -> T {
        self.kinetic + self.potential + self.bp + self.nonlinear
    }
}

/// Gradient of `I_ε` at a point: Riesz representative `g` and residual functional `(-Δ+1)g`.
#[derive(Clone, Debug)]
pub struct GradientEval<T: Real> {
    pub g: ScalarField3D<T>,
    pub res: ScalarField3D<T>,
}

impl<T: Real> GradientEval<T> {
    pub fn norm(&self) -> T {
        inner_l2(&self.g, &self.res).max(T::zero()).sqrt()
    }

    pub fn into_dual(self) -> DualField<T> {
        DualField {
            v: self.g,
            bv: self.res,
        }
    }
}

#[inline]
fn abs_pow<T: Real>(x: T, p: T, p_int: Option<i32>) -> T {
    match p_int {
        Some(k) => x.abs().powi(k),
        None => x.abs().powf(p),
    }
}

pub struct EnergyContext<T: Real> {
    pub params: ReductionParams<T>,
    pub grid: UniformGrid<T>,
    pub spectral: Spectral<T>,
    pub bp: Option<BpSolver<T>>,
    pub v_eps: Option<ScalarField3D<T>>,
    pub options: EnergyOptions,
    p_int: Option<i32>,
    pm1_int: Option<i32>,
}

impl<T: Real> EnergyContext<T> {
    pub fn new(
        params: ReductionParams<T>,
        pot: Option<&PotentialSpec<T>>,
        grid: UniformGrid<T>,
        options: EnergyOptions,
    ) -> Result<Self> {
        params.validate()?;
        let bp = if options.bp_coupling {
            Some(BpSolver::new(grid, BPParams::new(params.a, params.eps)?))
        } else {
            None
        };
        let v_eps = match (options.potential, pot) {
            (true, Some(pot)) => Some(potential_field(pot, params.eps, grid)),
            _ => None,
        };
        let options = EnergyOptions {
            bp_coupling: options.bp_coupling,
            potential: v_eps.is_some(),
        };
        let as_int = |x: T| {
            let r = x.round();
            if (x - r).abs() == T::zero() {
                r.to_i32()
            } else {
                None
            }
        };
        Ok(EnergyContext {
            params,
            grid,
            spectral: Spectral::new(grid),
            bp,
            v_eps,
            options,
            p_int: as_int(params.p + T::one()),
            pm1_int: as_int(params.p - T::one()),
        })
    }

    pub fn eps3(&self) -> T {
        let e = self.params.eps;
        e * e * e
    }

    fn v_at(&self, i: usize) -> T {
        match &self.v_eps {
            Some(v) => v.values[i],
            None => T::one(),
        }
    }

    pub fn potential_of_square(&self, u: &ScalarField3D<T>) -> Option<ScalarField3D<T>> {
        self.bp.as_ref().map(|bp| bp.potential_of_product(u, u))
    }

    pub fn energy_parts(&self, u: &ScalarField3D<T>) -> EnergyParts<T> {
        let half = T::lit(0.5);
        let spec = self.spectral.forward(u);
        let kinetic = half * self.dirichlet_from_spectrum(&spec);
        let vals = &u.values;
        let vol = self.grid.cell_volume();
        let potential = half * pairwise_sum_by(0, vals.len(), |i| self.v_at(i) * vals[i] * vals[i]) * vol;
        let bp = match self.potential_of_square(u) {
            Some(phi) => {
                let f = &phi.values;
                self.eps3() / T::lit(4.0) * pairwise_sum_by(0, vals.len(), |i| f[i] * vals[i] * vals[i]) * vol
            }
            None => T::zero(),
        };
        let p = self.params.p;
        let pp1 = p + T::one();
        let nonlinear =
            -pairwise_sum_by(0, vals.len(), |i| abs_pow(vals[i], pp1, self.p_int)) * vol / pp1;
        EnergyParts {
            kinetic,
            potential,
            bp,
            nonlinear,
        }
    }

    fn dirichlet_from_spectrum(&self, spec: &[Complex<T>]) -> T {
        let n = self.grid.n;
        let nh = n / 2 + 1;
        let k2 = self.spectral.k2();
        let scale = self.grid.cell_volume() / T::usize(self.grid.len());
        pairwise_sum_by(0, spec.len(), |i| {
            let x = i % nh;
            let w = if x == 0 || x == n / 2 { T::one() } else { T::lit(2.0) };
            w * k2[i] * spec[i].norm_sqr()
        }) * scale
    }

    pub fn energy(&self, u: &ScalarField3D<T>) -> T {
        self.energy_parts(u).total()
    }

    /// Gradient of `I_ε` at `u` with its residual functional.
    pub fn gradient_eval(&self, u: &ScalarField3D<T>) -> GradientEval<T> {
        let eps3 = self.eps3();
        let phi = self.potential_of_square(u);
        let p = self.params.p;
        let vals = &u.values;
        let local: Vec<T> = (0..vals.len())
            .map(|i| {
                let x = vals[i];
                let bpv = match &phi {
                    Some(f) => eps3 * f.values[i] * x,
                    None => T::zero(),
                };
                self.v_at(i) * x + bpv - abs_pow(x, p - T::one(), self.pm1_int) * x
            })
            .collect();
        let local = ScalarField3D {
            grid: self.grid,
            values: local,
        };
        let us = self.spectral.forward(u);
        let cs = self.spectral.forward(&local);
        let k2 = self.spectral.k2();
        let mut gs = Vec::with_capacity(us.len());
        let mut lap = Vec::with_capacity(us.len());
        for i in 0..us.len() {
            let ku = us[i] * k2[i];
            gs.push((ku + cs[i]) / (k2[i] + T::one()));
            lap.push(ku);
        }
        let g = self.spectral.inverse(gs);
        let mut res = self.spectral.inverse(lap);
        res.axpy(T::one(), &local);
        GradientEval { g, res }
    }

    pub fn gradient(&self, u: &ScalarField3D<T>) -> ScalarField3D<T> {
        self.gradient_eval(u).g
    }

    pub fn hessian_at(&self, u: &ScalarField3D<T>) -> HessianAt<'_, T> {
        let eps3 = self.eps3();
        let phi = self.potential_of_square(u);
        let p = self.params.p;
        let diag: Vec<T> = (0..u.values.len())
            .map(|i| {
                let x = u.values[i];
                let bpv = match &phi {
                    Some(f) => eps3 * f.values[i],
                    None => T::zero(),
                };
                self.v_at(i) + bpv - p * abs_pow(x, p - T::one(), self.pm1_int)
            })
            .collect();
        HessianAt {
            ctx: self,
            u: u.clone(),
            diag: ScalarField3D {
                grid: self.grid,
                values: diag,
            },
        }
    }

    /// Riesz representative of `I_ε''(u)[w, ·]`.
    pub fn hessian_apply(&self, u: &ScalarField3D<T>, w: &ScalarField3D<T>) -> ScalarField3D<T> {
        let h = self.hessian_at(u);
        h.apply(&DualField::new(w.clone(), &self.spectral)).v
    }

    /// `⟨f, g⟩_{H¹}`.
    pub fn inner_h1(&self, f: &ScalarField3D<T>, g: &ScalarField3D<T>) -> T {
        self.spectral
            .inner_h1(f, g, crate::fields::Mass::Unit)
            .expect("fields on the context grid")
    }

    pub fn integrate(&self, f: &ScalarField3D<T>) -> T {
        integrate(f)
    }
}

/// Hessian of `I_ε` frozen at one point.
pub struct HessianAt<'a, T: Real> {
    ctx: &'a EnergyContext<T>,
    pub u: ScalarField3D<T>,
    diag: ScalarField3D<T>,
}

impl<T: Real> HessianAt<'_, T> {
    /// Apply to a dual pair; the result's dual costs no extra transform.
    pub fn apply(&self, w: &DualField<T>) -> DualField<T> {
        let ctx = self.ctx;
        let mut b = w.bv.sub(&w.v);
        for i in 0..b.values.len() {
            b.values[i] += self.diag.values[i] * w.v.values[i];
        }
        if let Some(bp) = &ctx.bp {
            let phi = bp.potential_of_product(&self.u, &w.v);
            let c = T::lit(2.0) * ctx.eps3();
            for i in 0..b.values.len() {
                b.values[i] += c * phi.values[i] * self.u.values[i];
            }
        }
        DualField {
            v: ctx.spectral.riesz(&b),
            bv: b,
        }
    }
}
