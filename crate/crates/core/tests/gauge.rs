use wavemap_core::evolution::{evolve, make_initial_data, InitialData, SolverConfig};
use wavemap_core::gauge::{build_gauge, transport_defect, ConnectionField, GaugeHistory, MatrixField};
use wavemap_core::spectral::GridSpec;

fn slice(dim: usize, n: usize, eps: f64, band: i32) -> SolverConfig {
    SolverConfig::new(GridSpec::torus(dim, n).unwrap(), 3, 0.2, InitialData::new(eps, band, 21))
}

#[test]
fn frame_telescoping_identity_on_acceptance_grids() {
    for (dim, n) in [(2, 32), (5, 16)] {
        let cfg = slice(dim, n, 0.3, 1);
        let s = make_initial_data(&cfg).unwrap();
        let r = cfg.grid.dyadic_range().unwrap();
        let frame = build_gauge(&s.phi, r.k_max, r.k_min).unwrap();
        let res = frame.telescoping_residual();
        assert!(res <= 1e-12, "{dim}D: {res}");
        let conn = ConnectionField::from_slice(&s.phi, &s.phidot, r.k_max).unwrap();
        assert!(conn.antisymmetry_defect() <= 1e-12);
    }
}

#[test]
fn frame_components_are_antisymmetric_rotations_of_partials() {
    let cfg = slice(2, 32, 0.3, 2);
    let s = make_initial_data(&cfg).unwrap();
    let frame = build_gauge(&s.phi, 3, 0).unwrap();
    for k in frame.levels() {
        let uk = frame.component(k).unwrap();
        let below = frame.partial_below(k).unwrap();
        // U_k U_{<k}^{-1} = B_k must be antisymmetric.
        let b = uk.mul(&below.inverse(1e-8).unwrap()).unwrap();
        assert!(b.antisymmetry_defect() < 1e-10, "level {k}");
    }
}

/// Cofactor determinant of a 3×3 matrix, row-major.
fn det3(a: &[f64]) -> f64 {
    a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) + a[2] * (a[3] * a[7] - a[4] * a[6])
}

#[test]
fn inverse_and_determinant_match_closed_forms() {
    let g = GridSpec::torus(1, 8).unwrap();
    let u = MatrixField::from_points(g, 3, |p, out| {
        let t = p as f64 * 0.37;
        let vals = [2.0 + t.sin(), 0.3, -0.1 * t, 0.2, 1.5, t.cos(), -0.4, 0.1 * t, 3.0];
        out.copy_from_slice(&vals);
    });
    let mut buf = [0.0; 9];
    let (p, det) = u.min_abs_det();
    u.matrix_at(p, &mut buf);
    assert!((det - det3(&buf)).abs() < 1e-12);
    for q in 0..g.len() {
        u.matrix_at(q, &mut buf);
        assert!(det3(&buf).abs() >= det.abs() - 1e-12);
    }
    let prod = u.mul(&u.inverse(1e-8).unwrap()).unwrap();
    assert!(prod.sub(&MatrixField::identity(g, 3)).unwrap().max_entry() < 1e-13);
    assert!(MatrixField::zeros(g, 3).inverse(1e-8).is_err());
}

fn orthogonality_at(eps: f64) -> f64 {
    let cfg = slice(2, 32, eps, 1);
    let s = make_initial_data(&cfg).unwrap();
    build_gauge(&s.phi, 2, -1).unwrap().orthogonality_defect()
}

#[test]
fn orthogonality_defect_is_quadratic_in_amplitude() {
    let slope = (orthogonality_at(0.2) / orthogonality_at(0.05)).ln() / 4f64.ln();
    assert!((1.7..=2.3).contains(&slope), "slope {slope}");
}

#[test]
fn transport_defect_is_smaller_than_connection_term() {
    let cfg = slice(2, 32, 0.05, 1);
    let tr = evolve(&cfg, 1).unwrap();
    let hist = GaugeHistory::build(&tr, 2, -1).unwrap();
    for a in transport_defect(&hist, &tr).unwrap() {
        assert!(a.defect_l1_linf < a.connection_l1_linf, "alpha {}: {a:?}", a.alpha);
    }
}
