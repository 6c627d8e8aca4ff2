//! Bopp–Podolsky kernel `κ(x) = (1 - e^{-|x|/a})/|x|` and the potentials `κ_ε ∗ (uw)`.

use num_complex::Complex;

use crate::error::{invalid, Result, SbpError};
use crate::fft3::{signed_index, RealFft3};
use crate::fields::{inner_l2_weighted, ScalarField3D, UniformGrid};
use crate::scalar::Real;

pub const DIRECT_MAX_N: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BPParams<T: Real> {
    pub a: T,
    pub eps: T,
}

impl<T: Real> BPParams<T> {
    pub fn new(a: T, eps: T) -> Result<Self> {
        if !(a > T::zero()) {
            return Err(invalid("a", "> 0"));
        }
        if !(eps > T::zero() && eps < T::one()) {
            return Err(invalid("eps", "in (0, 1)"));
        }
        Ok(BPParams { a, eps })
    }

    /// `κ_ε(r) = κ(εr)`.
    pub fn kappa_eps(&self, r: T) -> T {
        kappa(r, self.a / self.eps) / self.eps
    }

    /// Fourier multiplier of `κ_ε` on ℝ³ for `|k| > 0`.
    pub fn multiplier(&self, k: T) -> T {
        let b = self.a / self.eps;
        let k2 = k * k;
        T::lit(4.0) * T::PI() / self.eps / (k2 * (T::one() + b * b * k2))
    }
}

/// `(1 - e^{-r/a})/r`, with a Taylor branch near the origin.
pub fn kappa<T: Real>(r: T, a: T) -> T {
    if r > a * T::lit(1e-6) {
        -(-r / a).exp_m1() / r
    } else {
        let x = r / a;
        (T::one() - x / T::lit(2.0) + x * x / T::lit(6.0)) / a
    }
}

/// `|κ'(r)|` sup over `r ≥ 0`, attained at the origin.
pub fn kappa_grad_sup<T: Real>(a: T) -> T {
    T::one() / (T::lit(2.0) * a * a)
}

/// Free-space convolution with `κ_ε` on a fixed grid via a zero-padded doubled box.
pub struct BpSolver<T: Real> {
    pub grid: UniformGrid<T>,
    pub params: BPParams<T>,
    fft: RealFft3<T>,
    kernel_hat: Vec<T>,
}

impl<T: Real> BpSolver<T> {
    pub fn new(grid: UniformGrid<T>, params: BPParams<T>) -> Self {
        let n = grid.n;
        let m = 2 * n;
        let h = grid.spacing();
        let fft = RealFft3::new(m);
        let offset = |i: usize| -> T {
            let s = signed_index(i, m).unsigned_abs() as usize;
            T::usize(s) * h
        };
        let mut table = vec![T::zero(); m * m * m];
        for z in 0..m {
            let dz = offset(z);
            for y in 0..m {
                let dy = offset(y);
                let row = m * (y + m * z);
                for x in 0..m {
                    let dx = offset(x);
                    table[row + x] = params.kappa_eps((dx * dx + dy * dy + dz * dz).sqrt());
                }
            }
        }
        let mut spec = vec![Complex::new(T::zero(), T::zero()); fft.half_len()];
        fft.forward(&mut table, &mut spec, m);
        let vol = grid.cell_volume();
        let kernel_hat = spec.iter().map(|c| c.re * vol).collect();
        BpSolver {
            grid,
            params,
            fft,
            kernel_hat,
        }
    }

    /// Discrete kernel spectrum on the doubled box, with its wavenumber magnitudes.
    pub fn kernel_spectrum(&self) -> Vec<(T, T)> {
        let m = 2 * self.grid.n;
        let mh = m / 2 + 1;
        let dk = T::lit(2.0) * T::PI() / (T::usize(m) * self.grid.spacing());
        let mut out = Vec::with_capacity(self.kernel_hat.len());
        for z in 0..m {
            let kz = T::lit(signed_index(z, m) as f64);
            for y in 0..m {
                let ky = T::lit(signed_index(y, m) as f64);
                for x in 0..mh {
                    let kx = T::usize(x);
                    let k = (kx * kx + ky * ky + kz * kz).sqrt() * dk;
                    out.push((k, self.kernel_hat[x + mh * (y + m * z)]));
                }
            }
        }
        out
    }

    /// `φ(x_i) = h³ Σ_j κ_ε(x_i - x_j) s(x_j)`.
    pub fn potential(&self, source: &ScalarField3D<T>) -> ScalarField3D<T> {
        assert_eq!(source.grid, self.grid, "grid mismatch");
        let n = self.grid.n;
        let m = 2 * n;
        let mut buf = vec![T::zero(); m * m * m];
        for z in 0..n {
            for y in 0..n {
                let src = n * (y + n * z);
                let dst = m * (y + m * z);
                buf[dst..dst + n].copy_from_slice(&source.values[src..src + n]);
            }
        }
        let mut spec = vec![Complex::new(T::zero(), T::zero()); self.fft.half_len()];
        self.fft.forward(&mut buf, &mut spec, n);
        for (c, &k) in spec.iter_mut().zip(&self.kernel_hat) {
            *c = *c * k;
        }
        self.fft.inverse(&mut spec, &mut buf, n);
        let norm = T::one() / T::usize(m * m * m);
        let mut values = vec![T::zero(); n * n * n];
        for z in 0..n {
            for y in 0..n {
                let dst = n * (y + n * z);
                let src = m * (y + m * z);
                for x in 0..n {
                    values[dst + x] = buf[src + x] * norm;
                }
            }
        }
        ScalarField3D {
            grid: self.grid,
            values,
        }
    }

    /// `φ_{ε,uw}`.
    pub fn potential_of_product(&self, u: &ScalarField3D<T>, w: &ScalarField3D<T>) -> ScalarField3D<T> {
        self.potential(&u.mul(w))
    }

    /// `∫ φ_{ε,u1u2} u3 u4`.
    pub fn quad_form(
        &self,
        u1: &ScalarField3D<T>,
        u2: &ScalarField3D<T>,
        u3: &ScalarField3D<T>,
        u4: &ScalarField3D<T>,
    ) -> Result<T> {
        u1.same_grid(u2)?;
        u1.same_grid(u3)?;
        u1.same_grid(u4)?;
        if u1.grid != self.grid {
            return Err(SbpError::GridMismatch);
        }
        let phi = self.potential_of_product(u1, u2);
        Ok(inner_l2_weighted(&phi, u3, u4))
    }
}

/// Spectral-path convolution, building a solver for one call.
pub fn solve_potential_spectral<T: Real>(source: &ScalarField3D<T>, params: BPParams<T>) -> ScalarField3D<T> {
    BpSolver::new(source.grid, params).potential(source)
}

/// Direct `O(n⁶)` summation; the oracle for the spectral path.
pub fn solve_potential_direct<T: Real>(source: &ScalarField3D<T>, params: BPParams<T>) -> Result<ScalarField3D<T>> {
    let grid = source.grid;
    let n = grid.n;
    if n > DIRECT_MAX_N {
        return Err(SbpError::GridTooLarge {
            n,
            max: DIRECT_MAX_N,
        });
    }
    let h = grid.spacing();
    let w = 2 * n - 1;
    let mut table = vec![T::zero(); w * w * w];
    for dz in 0..w {
        for dy in 0..w {
            for dx in 0..w {
                let fx = T::lit(dx as f64 - (n as f64 - 1.0)) * h;
                let fy = T::lit(dy as f64 - (n as f64 - 1.0)) * h;
                let fz = T::lit(dz as f64 - (n as f64 - 1.0)) * h;
                table[dx + w * (dy + w * dz)] = params.kappa_eps((fx * fx + fy * fy + fz * fz).sqrt());
            }
        }
    }
    let vol = grid.cell_volume();
    let src: Vec<(usize, usize, usize, T)> = (0..grid.len())
        .filter(|&j| source.values[j] != T::zero())
        .map(|j| (j % n, (j / n) % n, j / (n * n), source.values[j] * vol))
        .collect();
    let mut values = vec![T::zero(); grid.len()];
    for iz in 0..n {
        for iy in 0..n {
            for ix in 0..n {
                let mut acc = T::zero();
                for &(jx, jy, jz, s) in &src {
                    let dx = ix + n - 1 - jx;
                    let dy = iy + n - 1 - jy;
                    let dz = iz + n - 1 - jz;
                    acc += table[dx + w * (dy + w * dz)] * s;
                }
                values[grid.index(ix, iy, iz)] = acc;
            }
        }
    }
    Ok(ScalarField3D { grid, values })
}
