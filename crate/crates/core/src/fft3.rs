use std::sync::Arc;

use num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

/// Real-to-complex 3-D transform on an `m³` cube, x fastest.
///
/// The half spectrum is stored as `(m/2+1) × m × m` with kx fastest. Both directions
/// accept an extent `e ≤ m`: forward assumes input vanishes outside `[0, e)³`,
/// inverse only produces output inside `[0, e)³`. Transforms are unnormalized.
pub struct RealFft3<T: Real> {
    m: usize,
    r2c: Arc<dyn RealToComplex<T>>,
    c2r: Arc<dyn ComplexToReal<T>>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> RealFft3<T> {
    pub fn new(m: usize) -> Self {
        assert!(m % 2 == 0 && m >= 2, "transform size must be even");
        let mut rp = RealFftPlanner::<T>::new();
        let mut cp = FftPlanner::<T>::new();
        RealFft3 {
            m,
            r2c: rp.plan_fft_forward(m),
            c2r: rp.plan_fft_inverse(m),
            fwd: cp.plan_fft_forward(m),
            inv: cp.plan_fft_inverse(m),
        }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn half_len(&self) -> usize {
        (self.m / 2 + 1) * self.m * self.m
    }

    fn axis_pass(&self, spec: &mut [Complex<T>], planes: usize, axis_y: bool, forward: bool) {
        let m = self.m;
        let mh = m / 2 + 1;
        let fft = if forward { &self.fwd } else { &self.inv };
        let mut buf = vec![Complex::new(T::zero(), T::zero()); mh * m];
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
        for q in 0..planes {
            // element (kx, t) lives at base + kx + stride * t
            let (base, stride) = if axis_y {
                (q * mh * m, mh)
            } else {
                (q * mh, mh * m)
            };
            for t in 0..m {
                let row = base + stride * t;
                for kx in 0..mh {
                    buf[kx * m + t] = spec[row + kx];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for t in 0..m {
                let row = base + stride * t;
                for kx in 0..mh {
                    spec[row + kx] = buf[kx * m + t];
                }
            }
        }
    }

    pub fn forward(&self, input: &mut [T], spec: &mut [Complex<T>], extent: usize) {
        let m = self.m;
        let mh = m / 2 + 1;
        assert_eq!(input.len(), m * m * m);
        assert_eq!(spec.len(), self.half_len());
        let zero = Complex::new(T::zero(), T::zero());
        let mut scratch = self.r2c.make_scratch_vec();
        for z in 0..m {
            for y in 0..m {
                let line = y + m * z;
                let out = &mut spec[line * mh..(line + 1) * mh];
                if y < extent && z < extent {
                    self.r2c
                        .process_with_scratch(&mut input[line * m..(line + 1) * m], out, &mut scratch)
                        .expect("r2c lengths");
                } else {
                    out.fill(zero);
                }
            }
        }
        self.axis_pass(spec, extent, true, true);
        self.axis_pass(spec, m, false, true);
    }

    pub fn inverse(&self, spec: &mut [Complex<T>], output: &mut [T], extent: usize) {
        let m = self.m;
        let mh = m / 2 + 1;
        assert_eq!(output.len(), m * m * m);
        assert_eq!(spec.len(), self.half_len());
        self.axis_pass(spec, m, false, false);
        self.axis_pass(spec, extent, true, false);
        let mut scratch = self.c2r.make_scratch_vec();
        for z in 0..extent {
            for y in 0..extent {
                let line = y + m * z;
                let inp = &mut spec[line * mh..(line + 1) * mh];
                inp[0].im = T::zero();
                inp[mh - 1].im = T::zero();
                self.c2r
                    .process_with_scratch(inp, &mut output[line * m..(line + 1) * m], &mut scratch)
                    .expect("c2r lengths");
            }
        }
    }
}

/// Signed frequency index of position `j` along a full axis of length `m`.
#[inline]
pub fn signed_index(j: usize, m: usize) -> i64 {
    if j <= m / 2 {
        j as i64
    } else {
        j as i64 - m as i64
    }
}
