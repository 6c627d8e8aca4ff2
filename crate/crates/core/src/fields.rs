//! Uniform periodic grids, sampled fields, quadrature and spectral operators.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex;

use crate::error::{invalid, Result, SbpError};
use crate::fft3::{signed_index, RealFft3};
use crate::scalar::{pairwise_sum, pairwise_sum_by, Real};

/// Cube `[-L, L)³` sampled with `n` points per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformGrid<T: Real> {
    pub half_width: T,
    pub n: usize,
}

impl<T: Real> UniformGrid<T> {
    pub fn new(half_width: T, n: usize) -> Result<Self> {
        if n < 32 || n % 2 != 0 {
            return Err(invalid("grid_n", "even and >= 32"));
        }
        if !(half_width > T::zero()) {
            return Err(invalid("grid_L", "> 0"));
        }
        Ok(UniformGrid { half_width, n })
    }

    pub fn spacing(&self) -> T {
        T::lit(2.0) * self.half_width / T::usize(self.n)
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn coord(&self, i: usize) -> T {
        -self.half_width + T::usize(i) * self.spacing()
    }

    pub fn cell_volume(&self) -> T {
        let h = self.spacing();
        h * h * h
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.n * (iy + self.n * iz)
    }

    #[inline]
    pub fn point(&self, idx: usize) -> [T; 3] {
        let n = self.n;
        [
            self.coord(idx % n),
            self.coord((idx / n) % n),
            self.coord(idx / (n * n)),
        ]
    }

    /// Error unless every point within `radius` of the origin keeps a margin of `margin`.
    pub fn require_margin(&self, radius: T, margin: T) -> Result<()> {
        let need = radius + margin;
        if self.half_width < need {
            return Err(SbpError::GridTooSmall {
                required: need.f64(),
                actual: self.half_width.f64(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField3D<T: Real> {
    pub grid: UniformGrid<T>,
    pub values: Vec<T>,
}

impl<T: Real> ScalarField3D<T> {
    pub fn zeros(grid: UniformGrid<T>) -> Self {
        ScalarField3D {
            grid,
            values: vec![T::zero(); grid.len()],
        }
    }

    pub fn constant(grid: UniformGrid<T>, c: T) -> Self {
        ScalarField3D {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_fn<F: Fn([T; 3]) -> T>(grid: UniformGrid<T>, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        ScalarField3D { grid, values }
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(SbpError::GridMismatch)
        }
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> Self {
        ScalarField3D {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<F: Fn(T, T) -> T>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        ScalarField3D {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| c * v)
    }

    /// `self += a · x`.
    pub fn axpy(&mut self, a: T, x: &Self) {
        assert_eq!(self.grid, x.grid, "grid mismatch");
        for (s, &v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    pub fn scale_mut(&mut self, c: T) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Write the binary `SBPF1` dump.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"SBPF1")?;
        w.write_all(&(self.grid.n as u64).to_le_bytes())?;
        w.write_all(&self.grid.half_width.f64().to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            buf.extend_from_slice(&v.f64().to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != b"SBPF1" {
            return Err(SbpError::Format("bad field dump magic".into()));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let l = f64::from_le_bytes(b8);
        let grid = UniformGrid::new(T::lit(l), n)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut b8)?;
            values.push(T::lit(f64::from_le_bytes(b8)));
        }
        Ok(ScalarField3D { grid, values })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_dump(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_dump(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// `h³ Σ f` with pairwise summation.
pub fn integrate<T: Real>(f: &ScalarField3D<T>) -> T {
    pairwise_sum(&f.values) * f.grid.cell_volume()
}

/// `∫ f g`.
pub fn inner_l2<T: Real>(f: &ScalarField3D<T>, g: &ScalarField3D<T>) -> T {
    assert_eq!(f.grid, g.grid, "grid mismatch");
    let (a, b) = (&f.values, &g.values);
    pairwise_sum_by(0, a.len(), |i| a[i] * b[i]) * f.grid.cell_volume()
}

/// `∫ f g w`.
pub fn inner_l2_weighted<T: Real>(f: &ScalarField3D<T>, g: &ScalarField3D<T>, w: &ScalarField3D<T>) -> T {
    assert_eq!(f.grid, g.grid, "grid mismatch");
    assert_eq!(f.grid, w.grid, "grid mismatch");
    let (a, b, c) = (&f.values, &g.values, &w.values);
    pairwise_sum_by(0, a.len(), |i| a[i] * b[i] * c[i]) * f.grid.cell_volume()
}

pub fn norm_l2<T: Real>(f: &ScalarField3D<T>) -> T {
    inner_l2(f, f).sqrt()
}

/// Mass term of an H¹-type inner product.
#[derive(Clone, Copy, Debug)]
pub enum Mass<'a, T: Real> {
    Unit,
    Field(&'a ScalarField3D<T>),
}

/// A result carrying the aliasing diagnostic of a spectral operation.
#[derive(Clone, Debug)]
pub struct Checked<F> {
    pub value: F,
    pub alias_warning: bool,
}

/// Spectral operators on one grid; plans and wavenumbers are cached.
pub struct Spectral<T: Real> {
    pub grid: UniformGrid<T>,
    fft: RealFft3<T>,
    k2: Vec<T>,
    weight: Vec<T>,
    kmax_frac: Vec<T>,
}

impl<T: Real> Spectral<T> {
    pub fn new(grid: UniformGrid<T>) -> Self {
        let n = grid.n;
        let nh = n / 2 + 1;
        let dk = T::lit(2.0) * T::PI() / (T::usize(n) * grid.spacing());
        let mut k2 = Vec::with_capacity(nh * n * n);
        let mut weight = Vec::with_capacity(nh * n * n);
        let mut kmax_frac = Vec::with_capacity(nh * n * n);
        let half = T::usize(n / 2);
        for z in 0..n {
            let kz = T::lit(signed_index(z, n) as f64);
            for y in 0..n {
                let ky = T::lit(signed_index(y, n) as f64);
                for x in 0..nh {
                    let kx = T::usize(x);
                    k2.push((kx * kx + ky * ky + kz * kz) * dk * dk);
                    weight.push(if x == 0 || x == n / 2 { T::one() } else { T::lit(2.0) });
                    kmax_frac.push(kx.abs().max(ky.abs()).max(kz.abs()) / half);
                }
            }
        }
        Spectral {
            grid,
            fft: RealFft3::new(n),
            k2,
            weight,
            kmax_frac,
        }
    }

    pub fn k2(&self) -> &[T] {
        &self.k2
    }

    pub fn forward(&self, f: &ScalarField3D<T>) -> Vec<Complex<T>> {
        assert_eq!(f.grid, self.grid, "grid mismatch");
        let mut input = f.values.clone();
        let mut spec = vec![Complex::new(T::zero(), T::zero()); self.fft.half_len()];
        self.fft.forward(&mut input, &mut spec, self.grid.n);
        spec
    }

    /// Inverse transform including the `1/n³` normalization.
    pub fn inverse(&self, mut spec: Vec<Complex<T>>) -> ScalarField3D<T> {
        let mut out = vec![T::zero(); self.grid.len()];
        self.fft.inverse(&mut spec, &mut out, self.grid.n);
        let norm = T::one() / T::usize(self.grid.len());
        for v in &mut out {
            *v *= norm;
        }
        ScalarField3D {
            grid: self.grid,
            values: out,
        }
    }

    /// Multiply the spectrum of `f` by `mult(k²)` and transform back.
    pub fn apply_multiplier<F: Fn(T) -> T>(&self, f: &ScalarField3D<T>, mult: F) -> ScalarField3D<T> {
        let mut spec = self.forward(f);
        for (c, &k2) in spec.iter_mut().zip(&self.k2) {
            *c = *c * mult(k2);
        }
        self.inverse(spec)
    }

    /// `Σ_k w |k|² Re(F conj G)` scaled to approximate `∫ ∇f·∇g`.
    fn grad_pairing(&self, fs: &[Complex<T>], gs: &[Complex<T>]) -> T {
        let scale = self.grid.cell_volume() / T::usize(self.grid.len());
        pairwise_sum_by(0, fs.len(), |i| {
            self.weight[i] * self.k2[i] * (fs[i].re * gs[i].re + fs[i].im * gs[i].im)
        }) * scale
    }

    /// `∫ f²` evaluated in the spectral domain (Parseval).
    pub fn parseval_l2(&self, f: &ScalarField3D<T>) -> T {
        let s = self.forward(f);
        let scale = self.grid.cell_volume() / T::usize(self.grid.len());
        pairwise_sum_by(0, s.len(), |i| self.weight[i] * s[i].norm_sqr()) * scale
    }

    /// Fraction of spectral energy with a wavenumber component above 0.8·Nyquist.
    pub fn alias_fraction(&self, spec: &[Complex<T>]) -> T {
        let total = pairwise_sum_by(0, spec.len(), |i| self.weight[i] * spec[i].norm_sqr());
        let high = pairwise_sum_by(0, spec.len(), |i| {
            if self.kmax_frac[i] > T::lit(0.8) {
                self.weight[i] * spec[i].norm_sqr()
            } else {
                T::zero()
            }
        });
        if total > T::zero() {
            high / total
        } else {
            T::zero()
        }
    }

    pub fn laplacian(&self, f: &ScalarField3D<T>) -> Checked<ScalarField3D<T>> {
        let mut spec = self.forward(f);
        let alias_warning = self.alias_fraction(&spec) > T::lit(1e-6);
        for (c, &k2) in spec.iter_mut().zip(&self.k2) {
            *c = *c * (-k2);
        }
        Checked {
            value: self.inverse(spec),
            alias_warning,
        }
    }

    /// `(-Δ + 1) f`.
    pub fn h1_operator(&self, f: &ScalarField3D<T>) -> ScalarField3D<T> {
        self.apply_multiplier(f, |k2| k2 + T::one())
    }

    /// Solve `(-Δ + 1) g = f`.
    pub fn riesz(&self, f: &ScalarField3D<T>) -> ScalarField3D<T> {
        self.apply_multiplier(f, |k2| T::one() / (k2 + T::one()))
    }

    /// `∫ (∇f·∇g + mass f g)`, gradients taken spectrally.
    pub fn inner_h1(&self, f: &ScalarField3D<T>, g: &ScalarField3D<T>, mass: Mass<'_, T>) -> Result<T> {
        f.same_grid(g)?;
        if f.grid != self.grid {
            return Err(SbpError::GridMismatch);
        }
        let fs = self.forward(f);
        let gs = self.forward(g);
        let grad = self.grad_pairing(&fs, &gs);
        let m = match mass {
            Mass::Unit => inner_l2(f, g),
            Mass::Field(w) => {
                f.same_grid(w)?;
                inner_l2_weighted(f, g, w)
            }
        };
        Ok(grad + m)
    }

    pub fn norm_h1(&self, f: &ScalarField3D<T>) -> T {
        self.inner_h1(f, f, Mass::Unit).expect("own grid").max(T::zero()).sqrt()
    }
}
