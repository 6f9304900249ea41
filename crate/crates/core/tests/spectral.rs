use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavemap_core::norms::{lebesgue_norm, sobolev_norm};
use wavemap_core::spectral::{
    band_symbol, bump_symbol, leq_symbol, project_band, project_leq, project_range, smooth_step, spatial_gradient,
    Decomposition, Field, GridSpec,
};

fn random_field(grid: GridSpec, comps: usize, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len() * comps).map(|_| rng.random_range(-1.0..1.0)).collect();
    Field::new(grid, comps, values).unwrap()
}

/// `Σ_ξ symbol(|κ|) f̂(ξ) e^{iκ·x}` with `f̂` from a direct sum over points.
fn naive_multiplier(f: &Field, symbol: impl Fn(f64) -> f64) -> Field {
    let g = *f.grid();
    let len = g.len();
    let unit = g.wavenumber_unit();
    let coords: Vec<Vec<f64>> = (0..len).map(|p| g.coordinates(p)).collect();
    let freqs: Vec<Vec<f64>> = (0..len)
        .map(|k| g.lattice_frequency(k).iter().map(|&v| v as f64 * unit).collect())
        .collect();
    let phase = |k: usize, p: usize| freqs[k].iter().zip(&coords[p]).map(|(a, b)| a * b).sum::<f64>();
    let mut out = vec![0.0; f.values().len()];
    for c in 0..f.components() {
        let vals = f.component(c);
        let coeffs: Vec<(f64, f64)> = (0..len)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (p, v) in vals.iter().enumerate() {
                    let th = phase(k, p);
                    re += v * th.cos();
                    im -= v * th.sin();
                }
                let s = symbol(g.wavenumber_norm(k)) / len as f64;
                (re * s, im * s)
            })
            .collect();
        for p in 0..len {
            out[c * len + p] = coeffs
                .iter()
                .enumerate()
                .map(|(k, (re, im))| {
                    let th = phase(k, p);
                    re * th.cos() - im * th.sin()
                })
                .sum();
        }
    }
    Field::new(g, f.components(), out).unwrap()
}

#[test]
fn smooth_step_closed_form() {
    let g = |t: f64| (-1.0 / t).exp();
    let expected = g(0.5) / (g(0.5) + g(0.5));
    assert_abs_diff_eq!(bump_symbol(1.5), expected, epsilon = 1e-15);
    assert_abs_diff_eq!(expected, 0.5, epsilon = 1e-15);
    let t = 0.3;
    assert_abs_diff_eq!(smooth_step(t), g(t) / (g(t) + g(1.0 - t)), epsilon = 1e-15);
    assert_eq!(bump_symbol(0.5), 1.0);
    assert_eq!(bump_symbol(3.0), 0.0);
}

#[test]
fn projections_match_direct_fourier_sum() {
    for (dim, n) in [(1, 32), (2, 16)] {
        let g = GridSpec::torus(dim, n).unwrap();
        let f = random_field(g, 2, 7 + dim as u64);
        let leq = naive_multiplier(&f, |kappa| leq_symbol(1, kappa));
        assert!(project_leq(&f, 1).unwrap().max_abs_diff(&leq).unwrap() < 1e-12);
        let band = naive_multiplier(&f, |kappa| band_symbol(2, kappa));
        assert!(project_band(&f, 2).unwrap().max_abs_diff(&band).unwrap() < 1e-12);
    }
}

#[test]
fn single_mode_band_scaling() {
    let g = GridSpec::torus(1, 32).unwrap();
    let f = Field::from_fn(g, 1, |x, out| out[0] = (3.0 * x[0]).cos());
    assert!(project_leq(&f, 0).unwrap().max_abs() < 1e-15);
    let expected = f.scale(1.0 - bump_symbol(1.5));
    assert!(project_band(&f, 2).unwrap().max_abs_diff(&expected).unwrap() < 1e-14);
}

#[test]
fn constants_survive_low_pass_and_vanish_from_bands() {
    let g = GridSpec::torus(2, 16).unwrap();
    let f = Field::constant(g, &[1.5, -0.5]);
    assert!(project_leq(&f, 0).unwrap().max_abs_diff(&f).unwrap() < 1e-15);
    assert!(project_band(&f, 1).unwrap().max_abs() < 1e-15);
    assert!(spatial_gradient(&f).iter().all(|d| d.max_abs() < 1e-15));
}

#[test]
fn range_is_sum_of_bands() {
    let g = GridSpec::torus(2, 32).unwrap();
    let f = random_field(g, 3, 3);
    let mut acc = Field::zeros(g, 3);
    for k in 0..=2 {
        acc = acc.add(&project_band(&f, k).unwrap()).unwrap();
    }
    assert!(project_range(&f, 0, 2).unwrap().max_abs_diff(&acc).unwrap() < 1e-13);
    assert!(project_range(&f, 1, 1).unwrap().max_abs_diff(&project_band(&f, 1).unwrap()).unwrap() < 1e-15);
    assert!(project_range(&f, 2, 1).is_err());
}

#[test]
fn telescoping_reconstruction_on_both_acceptance_grids() {
    for (dim, n) in [(2, 32), (5, 16)] {
        let g = GridSpec::torus(dim, n).unwrap();
        let r = g.dyadic_range().unwrap();
        let f = random_field(g, 2, 11);
        let dec = Decomposition::new(&f);
        let mut acc = dec.leq(r.k_min).unwrap();
        for k in r.bands() {
            acc = acc.add(&dec.band(k).unwrap()).unwrap();
        }
        let err = acc.max_abs_diff(&dec.leq(r.k_max).unwrap()).unwrap();
        assert!(err < 1e-12, "{dim}D N={n}: {err}");
    }
}

#[test]
fn gradient_of_a_single_mode_is_exact() {
    let g = GridSpec::torus(2, 16).unwrap();
    let f = Field::from_fn(g, 1, |x, out| out[0] = (2.0 * x[0] + 3.0 * x[1]).sin());
    let grad = spatial_gradient(&f);
    for (axis, coeff) in [(0, 2.0), (1, 3.0)] {
        let exact = Field::from_fn(g, 1, |x, out| out[0] = coeff * (2.0 * x[0] + 3.0 * x[1]).cos());
        assert!(grad[axis].max_abs_diff(&exact).unwrap() < 1e-13);
    }
}

fn centred_difference_error(n: usize) -> f64 {
    let g = GridSpec::torus(1, n).unwrap();
    let f = Field::from_fn(g, 1, |x, out| out[0] = (x[0].sin()).exp());
    let h = g.spacing();
    let spectral = spatial_gradient(&f).remove(0);
    let v = f.component(0);
    (0..n)
        .map(|i| {
            let fd = (v[(i + 1) % n] - v[(i + n - 1) % n]) / (2.0 * h);
            (fd - spectral.at(0, i)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn gradient_agrees_with_centred_differences_at_second_order() {
    let coarse = centred_difference_error(32);
    let fine = centred_difference_error(64);
    let ratio = coarse / fine;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn parseval_with_volume_factor() {
    let g = GridSpec::new(2, 16, 3.0).unwrap();
    let f = random_field(g, 2, 5);
    let mean_free = f.sub(&project_leq(&f, g.dyadic_range().unwrap().k_min).unwrap()).unwrap();
    let l2 = lebesgue_norm(&mean_free, 2.0).unwrap();
    assert_abs_diff_eq!(sobolev_norm(&mean_free, 0.0), l2, epsilon = 1e-12 * l2);
}

#[test]
fn projection_of_a_mode_above_range_is_an_error() {
    let g = GridSpec::torus(1, 16).unwrap();
    let f = Field::zeros(g, 1);
    let k_max = g.dyadic_range().unwrap().k_max;
    assert!(project_leq(&f, k_max).is_ok());
    assert!(project_leq(&f, k_max + 1).is_err());
    assert_eq!(g.dyadic_range().unwrap().k_min, -1);
    assert!((2f64).powi(k_max + 1) <= 8.0 * 2.0 * PI / g.period());
}

fn field_strategy() -> impl Strategy<Value = Field> {
    prop::collection::vec(-1.0f64..1.0, 2 * 256)
        .prop_map(|v| Field::new(GridSpec::torus(2, 16).unwrap(), 2, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn idempotence_ladder(f in field_strategy(), k in -1i32..2) {
        let inner = project_leq(&f, k).unwrap();
        let outer = project_leq(&inner, k + 1).unwrap();
        prop_assert!(outer.max_abs_diff(&inner).unwrap() < 1e-12);
    }

    #[test]
    fn band_support(f in field_strategy(), k in 0i32..=2) {
        let s = Decomposition::new(&f).spectrum().band(k).unwrap();
        let g = *s.grid();
        let (lo, hi) = (2f64.powi(k - 1), 2f64.powi(k + 1));
        for c in 0..s.components() {
            for flat in 0..g.len() {
                let kappa = g.wavenumber_norm(flat);
                if kappa < lo || kappa > hi {
                    prop_assert_eq!(s.coefficient(c, flat).norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn projections_commute_with_gradient(f in field_strategy(), k in 0i32..=2) {
        let a = spatial_gradient(&project_band(&f, k).unwrap());
        let b: Vec<Field> = spatial_gradient(&f).iter().map(|d| project_band(d, k).unwrap()).collect();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(x.max_abs_diff(y).unwrap() < 1e-12);
        }
    }

    #[test]
    fn projections_of_real_fields_are_real(f in field_strategy(), k in 0i32..=2) {
        let spec = Decomposition::new(&f).spectrum().band(k).unwrap();
        prop_assert!(spec.conjugate_symmetry_defect() < 1e-14);
        let (_, residue) = spec.to_field_with_residue();
        prop_assert!(residue < 1e-12);
    }
}
