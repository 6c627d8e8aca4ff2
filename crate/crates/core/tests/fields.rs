use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbp_core::fft3::{signed_index, RealFft3};
use sbp_core::fields::*;
use sbp_core::SbpError;

fn gaussian(grid: UniformGrid<f64>) -> ScalarField3D<f64> {
    ScalarField3D::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp())
}

fn naive_dft(input: &[f64], m: usize) -> Vec<Complex<f64>> {
    let mh = m / 2 + 1;
    let mut out = vec![Complex::new(0.0, 0.0); mh * m * m];
    let w = -2.0 * std::f64::consts::PI / m as f64;
    for kz in 0..m {
        for ky in 0..m {
            for kx in 0..mh {
                let mut acc = Complex::new(0.0, 0.0);
                for z in 0..m {
                    for y in 0..m {
                        for x in 0..m {
                            let ph = w * ((kx * x + ky * y + kz * z) % m) as f64;
                            acc += Complex::from_polar(input[x + m * (y + m * z)], ph);
                        }
                    }
                }
                out[kx + mh * (ky + m * kz)] = acc;
            }
        }
    }
    out
}

#[test]
fn grid_rules() {
    assert!(UniformGrid::<f64>::new(8.0, 31).is_err());
    assert!(UniformGrid::<f64>::new(8.0, 30).is_err());
    assert!(UniformGrid::<f64>::new(0.0, 32).is_err());
    let g = UniformGrid::<f64>::new(8.0, 32).unwrap();
    assert_eq!(g.spacing(), 0.5);
    assert_eq!(g.coord(0), -8.0);
    assert_eq!(g.coord(16), 0.0);
    assert_eq!(g.point(g.index(16, 0, 31)), [0.0, -8.0, 7.5]);
    assert!(g.require_margin(3.0, 5.0).is_ok());
    assert_eq!(
        g.require_margin(3.0, 5.5).unwrap_err(),
        SbpError::GridTooSmall { required: 8.5, actual: 8.0 }
    );
}

#[test]
fn fft_matches_naive_dft() {
    let m = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let input: Vec<f64> = (0..m * m * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let fft = RealFft3::<f64>::new(m);
    let mut spec = vec![Complex::new(0.0, 0.0); fft.half_len()];
    fft.forward(&mut input.clone(), &mut spec, m);
    let oracle = naive_dft(&input, m);
    for (a, b) in spec.iter().zip(&oracle) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn pruned_transform_agrees_with_full() {
    let m = 8;
    let e = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut input = vec![0.0; m * m * m];
    for z in 0..e {
        for y in 0..e {
            for x in 0..e {
                input[x + m * (y + m * z)] = rng.gen_range(-1.0..1.0);
            }
        }
    }
    let fft = RealFft3::<f64>::new(m);
    let mut full = vec![Complex::new(0.0, 0.0); fft.half_len()];
    let mut pruned = full.clone();
    fft.forward(&mut input.clone(), &mut full, m);
    fft.forward(&mut input.clone(), &mut pruned, e);
    for (a, b) in full.iter().zip(&pruned) {
        assert!((a - b).norm() < 1e-12);
    }
    let mut back = vec![0.0; m * m * m];
    fft.inverse(&mut pruned, &mut back, e);
    let scale = (m * m * m) as f64;
    for z in 0..e {
        for y in 0..e {
            for x in 0..m {
                let i = x + m * (y + m * z);
                assert!((back[i] / scale - input[i]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn signed_indices() {
    assert_eq!(signed_index(0, 8), 0);
    assert_eq!(signed_index(4, 8), 4);
    assert_eq!(signed_index(5, 8), -3);
    assert_eq!(signed_index(7, 8), -1);
}

#[test]
fn gaussian_laplacian_is_spectrally_exact() {
    let grid = UniformGrid::new(6.0, 32).unwrap();
    let sp = Spectral::new(grid);
    let lap = sp.laplacian(&gaussian(grid));
    assert!(!lap.alias_warning);
    let exact = ScalarField3D::from_fn(grid, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        (4.0 * r2 - 6.0) * (-r2).exp()
    });
    assert!(lap.value.sub(&exact).max_abs() < 1e-6);
}

#[test]
fn checkerboard_triggers_alias_warning() {
    let grid = UniformGrid::new(8.0, 32).unwrap();
    let sp = Spectral::new(grid);
    let f = ScalarField3D::from_fn(grid, |x| (x[0] * std::f64::consts::PI / grid.spacing()).cos());
    assert!(sp.laplacian(&f).alias_warning);
}

#[test]
fn gaussian_h1_norm_and_parseval() {
    let grid = UniformGrid::new(6.0, 32).unwrap();
    let sp = Spectral::new(grid);
    let f = gaussian(grid);
    let l2 = (std::f64::consts::PI / 2.0).powf(1.5);
    assert!((integrate(&f.mul(&f)) - l2).abs() < 1e-10);
    assert!((sp.parseval_l2(&f) - l2).abs() < 1e-10);
    assert!((sp.norm_h1(&f).powi(2) - 4.0 * l2).abs() < 1e-8);
}

#[test]
fn riesz_inverts_the_h1_operator() {
    let grid = UniformGrid::new(6.0, 32).unwrap();
    let sp = Spectral::new(grid);
    let f = gaussian(grid);
    let back = sp.riesz(&sp.h1_operator(&f));
    assert!(back.sub(&f).max_abs() < 1e-13);
}

#[test]
fn grid_mismatch_is_reported() {
    let g1 = UniformGrid::new(8.0, 32).unwrap();
    let g2 = UniformGrid::new(9.0, 32).unwrap();
    let sp = Spectral::new(g1);
    let a = gaussian(g1);
    let b = gaussian(g2);
    assert_eq!(sp.inner_h1(&a, &b, Mass::Unit).unwrap_err(), SbpError::GridMismatch);
    assert_eq!(sp.inner_h1(&b, &b, Mass::Unit).unwrap_err(), SbpError::GridMismatch);
    assert_eq!(a.same_grid(&b).unwrap_err(), SbpError::GridMismatch);
}

#[test]
fn weighted_mass_term() {
    let grid = UniformGrid::new(8.0, 32).unwrap();
    let sp = Spectral::new(grid);
    let f = gaussian(grid);
    let two = ScalarField3D::constant(grid, 2.0);
    let unit = sp.inner_h1(&f, &f, Mass::Unit).unwrap();
    let heavy = sp.inner_h1(&f, &f, Mass::Field(&two)).unwrap();
    assert!((heavy - unit - inner_l2(&f, &f)).abs() < 1e-12);
}

#[test]
fn dump_round_trip() {
    let grid = UniformGrid::new(4.0, 32).unwrap();
    let f = gaussian(grid);
    let mut buf = Vec::new();
    f.write_dump(&mut buf).unwrap();
    assert_eq!(&buf[..5], b"SBPF1");
    assert_eq!(buf.len(), 5 + 16 + 8 * grid.len());
    let back = ScalarField3D::<f64>::read_dump(&buf[..]).unwrap();
    assert_eq!(back, f);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.sbpf");
    f.save(&path).unwrap();
    assert_eq!(ScalarField3D::<f64>::load(&path).unwrap(), f);
    buf[0] = b'X';
    assert!(matches!(ScalarField3D::<f64>::read_dump(&buf[..]), Err(SbpError::Format(_))));
    assert!(matches!(ScalarField3D::<f64>::read_dump(&b"SBPF1"[..]), Err(SbpError::Io(_))));
}

#[test]
fn single_precision_spectral_ops() {
    let grid = UniformGrid::<f32>::new(6.0, 32).unwrap();
    let sp = Spectral::new(grid);
    let f = ScalarField3D::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp());
    let l2 = (std::f32::consts::PI / 2.0).powf(1.5);
    assert!((sp.norm_h1(&f).powi(2) - 4.0 * l2).abs() < 1e-4);
}

fn smooth_field(grid: UniformGrid<f64>, seed: u64) -> ScalarField3D<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<([f64; 3], f64)> = (0..3)
        .map(|_| ([0; 3].map(|_: i32| rng.gen_range(-3.0..3.0)), rng.gen_range(-1.0..1.0)))
        .collect();
    ScalarField3D::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|(c, a)| a * (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2))).exp())
            .sum()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn h1_inner_product_is_symmetric_and_positive(s1 in any::<u64>(), s2 in any::<u64>()) {
        let grid = UniformGrid::new(8.0, 32).unwrap();
        let sp = Spectral::new(grid);
        let f = smooth_field(grid, s1);
        let g = smooth_field(grid, s2);
        let fg = sp.inner_h1(&f, &g, Mass::Unit).unwrap();
        let gf = sp.inner_h1(&g, &f, Mass::Unit).unwrap();
        prop_assert_eq!(fg, gf);
        prop_assert!(sp.norm_h1(&f) >= 0.0);
        prop_assert!(fg.abs() <= sp.norm_h1(&f) * sp.norm_h1(&g) * (1.0 + 1e-12));
    }

    #[test]
    fn transform_round_trip(seed in any::<u64>()) {
        let grid = UniformGrid::new(8.0, 32).unwrap();
        let sp = Spectral::new(grid);
        let f = smooth_field(grid, seed);
        let back = sp.inverse(sp.forward(&f));
        prop_assert!(back.sub(&f).max_abs() < 1e-13);
    }
}
