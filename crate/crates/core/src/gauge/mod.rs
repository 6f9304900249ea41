//! Connection matrices and the dyadic approximate-parallel-transport frame.
//!
//! For a smoothed map `φ̃ = P_{<=k_top} φ` the connection is the
//! antisymmetric matrix `A_α = (∂_α φ̃) φ̃^† - φ̃ (∂_α φ̃)^†`. The frame is
//! built level by level,
//!
//! ```text
//! U_{<k_bot+1} = I
//! U_k          = (P_k φ P_{<k} φ^† - P_{<k} φ P_k φ^†) U_{<k}
//! U_{<k+1}     = U_{<k} + U_k
//! ```
//!
//! and satisfies `U_{<K}^† U_{<K} - I = Σ_{k<K} U_k^† U_k` exactly because
//! each bracket is antisymmetric.

mod matrix;

pub use matrix::MatrixField;

use crate::error::{arg, Error, Result};
use crate::norms::{lebesgue_of, time_norm, SpacetimeTrace};
use crate::par;
use crate::spectral::{Decomposition, Field};

/// `|det U|` below this at any point is treated as a singular frame.
pub const DET_FLOOR: f64 = 1e-8;

/// Antisymmetric `d φ̃^† - φ̃ d^†` for a field `φ̃` and one of its derivatives `d`.
pub fn connection(phi_low: &Field, d_phi_low: &Field) -> Result<MatrixField> {
    if phi_low.grid() != d_phi_low.grid() || phi_low.components() != d_phi_low.components() {
        return arg("connection needs a field and derivative of equal shape");
    }
    let m = phi_low.components();
    Ok(MatrixField::from_points(*phi_low.grid(), m, |p, out| {
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = d_phi_low.at(i, p) * phi_low.at(j, p) - phi_low.at(i, p) * d_phi_low.at(j, p);
            }
        }
    }))
}

/// `A_α` for `α = 0..=n`, index 0 being time.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionField {
    pub k_top: i32,
    pub alphas: Vec<MatrixField>,
}

impl ConnectionField {
    /// Connection of `φ̃ = P_{<=k_top} φ`; the time component uses `P_{<=k_top} ∂_t φ`.
    pub fn from_slice(phi: &Field, phidot: &Field, k_top: i32) -> Result<Self> {
        let low = Decomposition::new(phi).spectrum().leq(k_top)?;
        let phi_low = low.to_field();
        let dt_low = Decomposition::new(phidot).leq(k_top)?;
        let mut alphas = vec![connection(&phi_low, &dt_low)?];
        for axis in 0..phi.grid().dim() {
            alphas.push(connection(&phi_low, &low.derivative(axis).to_field())?);
        }
        Ok(Self { k_top, alphas })
    }

    pub fn alpha(&self, a: usize) -> &MatrixField {
        &self.alphas[a]
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        self.alphas.iter().map(MatrixField::antisymmetry_defect).fold(0.0, f64::max)
    }
}

/// One time slice of the dyadic frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeFrame {
    pub k_top: i32,
    pub k_bot: i32,
    /// `U_k` for `k = k_bot+1 ..= k_top`.
    pub components: Vec<MatrixField>,
    /// `U_{<k}` for `k = k_bot+1 ..= k_top+1`.
    pub partials: Vec<MatrixField>,
    /// Point and value of the smallest `|det U|`.
    pub min_det: (usize, f64),
}

impl GaugeFrame {
    pub fn levels(&self) -> std::ops::RangeInclusive<i32> {
        self.k_bot + 1..=self.k_top
    }

    pub fn component(&self, k: i32) -> Option<&MatrixField> {
        self.components.get(usize::try_from(k - self.k_bot - 1).ok()?)
    }

    /// `U_{<k}` for `k_bot < k <= k_top + 1`.
    pub fn partial_below(&self, k: i32) -> Option<&MatrixField> {
        self.partials.get(usize::try_from(k - self.k_bot - 1).ok()?)
    }

    /// `U = U_{<k_top+1}`
    pub fn total(&self) -> &MatrixField {
        self.partials.last().expect("at least the identity")
    }

    pub fn orthogonality_defect(&self) -> f64 {
        orthogonality_defect(self.total())
    }

    /// `max_K max_x |U_{<K}^† U_{<K} - I - Σ_{k<K} U_k^† U_k|`
    pub fn telescoping_residual(&self) -> f64 {
        let grid = *self.total().grid();
        let m = self.total().m();
        let mut acc = MatrixField::zeros(grid, m);
        let mut worst = self.partials[0].gram_defect().max_entry();
        for (uk, partial) in self.components.iter().zip(&self.partials[1..]) {
            acc = acc.add(&uk.transpose_mul(uk).expect("same grid")).expect("same grid");
            let r = partial.gram_defect().sub(&acc).expect("same grid").max_entry();
            worst = worst.max(r);
        }
        worst
    }

    /// Largest relative spectral mass of `U_{<k}` outside `|κ| <= 2^{k+5}`.
    pub fn support_leakage(&self) -> f64 {
        (self.k_bot + 1..=self.k_top + 1)
            .zip(&self.partials)
            .map(|(k, u)| {
                let s = u.field().spectrum();
                let total = s.weighted_energy(|_| 1.0);
                let radius = 2f64.powi(k + 5);
                let outside = s.weighted_energy(|kappa| if kappa > radius { 1.0 } else { 0.0 });
                if total > 0.0 {
                    (outside / total).sqrt()
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

fn check_levels(phi: &Field, k_top: i32, k_bot: i32) -> Result<()> {
    let range = phi.grid().dyadic_range()?;
    if k_bot >= k_top {
        return arg(format!("gauge floor {k_bot} must lie below threshold {k_top}"));
    }
    for k in [k_bot, k_top] {
        if !range.contains(k) {
            return Err(Error::Range { k, k_min: range.k_min, k_max: range.k_max });
        }
    }
    Ok(())
}

/// `(P_k φ P_{<k} φ^† - P_{<k} φ P_k φ^†) U_{<k}` pointwise.
fn level_component(band: &Field, below: &Field, partial: &MatrixField) -> MatrixField {
    let m = band.components();
    MatrixField::from_points(*band.grid(), m, |p, out| {
        let mut bracket = [0.0; 64];
        let bracket = &mut bracket[..m * m];
        for i in 0..m {
            for j in 0..m {
                bracket[i * m + j] = band.at(i, p) * below.at(j, p) - below.at(i, p) * band.at(j, p);
            }
        }
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = (0..m).map(|l| bracket[i * m + l] * partial.entry(l, j, p)).sum();
            }
        }
    })
}

fn run_recursion(phi: &Field, k_top: i32, k_bot: i32, keep: bool) -> Result<GaugeFrame> {
    check_levels(phi, k_top, k_bot)?;
    if phi.components() > 8 {
        return arg("gauge frames support target dimension m <= 8");
    }
    let dec = Decomposition::new(phi);
    let m = phi.components();
    let mut partial = MatrixField::identity(*phi.grid(), m);
    let mut components = Vec::new();
    let mut partials = Vec::new();
    for k in k_bot + 1..=k_top {
        let band = dec.band(k)?;
        let below = dec.leq(k - 1)?;
        let uk = level_component(&band, &below, &partial);
        let next = partial.add(&uk)?;
        if keep {
            components.push(uk);
            partials.push(partial);
        }
        partial = next;
    }
    let min_det = partial.min_abs_det();
    if min_det.1.abs() < DET_FLOOR {
        return Err(Error::DegenerateFrame { point: min_det.0, det: min_det.1 });
    }
    partials.push(partial);
    Ok(GaugeFrame { k_top, k_bot, components, partials, min_det })
}

/// Frame of one slice, keeping every `U_k` and `U_{<k}`.
pub fn build_gauge(phi: &Field, k_top: i32, k_bot: i32) -> Result<GaugeFrame> {
    run_recursion(phi, k_top, k_bot, true)
}

/// Total frame `U` only; `components` and all but the last partial are dropped.
pub fn build_gauge_total(phi: &Field, k_top: i32, k_bot: i32) -> Result<GaugeFrame> {
    run_recursion(phi, k_top, k_bot, false)
}

/// `max_x` of the entrywise max of `|U^† U - I|`.
pub fn orthogonality_defect(u: &MatrixField) -> f64 {
    u.gram_defect().max_entry()
}

/// Finite-difference stand-in for `max |∂_t (U^† U - I)|` from frames `dt` apart.
pub fn orthogonality_defect_rate(u0: &MatrixField, u1: &MatrixField, dt: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return arg("time separation must be positive");
    }
    Ok(u1.gram_defect().sub(&u0.gram_defect())?.max_entry() / dt)
}

/// Total frames `U(t_i)` along a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeHistory {
    pub k_top: i32,
    pub k_bot: i32,
    pub times: Vec<f64>,
    pub frames: Vec<MatrixField>,
    pub orthogonality_defects: Vec<f64>,
    /// Smallest `|det U|` over all slices.
    pub min_det: f64,
}

impl GaugeHistory {
    pub fn build(tr: &SpacetimeTrace, k_top: i32, k_bot: i32) -> Result<Self> {
        let mut frames = Vec::with_capacity(tr.len());
        let mut defects = Vec::with_capacity(tr.len());
        let mut min_det = f64::INFINITY;
        for phi in tr.positions() {
            let gf = build_gauge_total(phi, k_top, k_bot)?;
            min_det = min_det.min(gf.min_det.1.abs());
            defects.push(gf.orthogonality_defect());
            frames.push(gf.partials.into_iter().next_back().expect("total frame"));
        }
        Ok(Self { k_top, k_bot, times: tr.times().to_vec(), frames, orthogonality_defects: defects, min_det })
    }

    pub fn max_orthogonality_defect(&self) -> f64 {
        self.orthogonality_defects.iter().copied().fold(0.0, f64::max)
    }

    fn uniform_step(&self, min_samples: usize) -> Result<f64> {
        if self.times.len() < min_samples {
            return arg(format!("need at least {min_samples} time samples, got {}", self.times.len()));
        }
        let dt = (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64;
        let uniform = self
            .times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.max(1.0));
        if !uniform {
            return arg("frame history must be uniformly sampled");
        }
        Ok(dt)
    }

    /// `∂_t U` at every sample: centred differences inside, second-order
    /// one-sided differences at the ends.
    pub fn time_derivative(&self) -> Result<Vec<MatrixField>> {
        let dt = self.uniform_step(3)?;
        let u = &self.frames;
        let last = u.len() - 1;
        (0..=last)
            .map(|i| {
                let d = if i == 0 {
                    u[1].scale(4.0).sub(&u[0].scale(3.0))?.sub(&u[2])?
                } else if i == last {
                    u[last].scale(3.0).sub(&u[last - 1].scale(4.0))?.add(&u[last - 2])?
                } else {
                    u[i + 1].sub(&u[i - 1])?
                };
                Ok(d.scale(0.5 / dt))
            })
            .collect()
    }
}

/// Transport diagnostics for one index `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaTransport {
    pub alpha: usize,
    /// `‖∂_α U - A_α U‖_{L¹_t L^∞_x}`
    pub defect_l1_linf: f64,
    /// `‖A_α U‖_{L¹_t L^∞_x}`
    pub connection_l1_linf: f64,
    /// `‖∂_α U‖_{L²_t L^∞_x}`
    pub du_l2_linf: f64,
    /// `‖∂_α U‖_{L^∞_t L^∞_x}`
    pub du_linf_linf: f64,
}

fn sup_frobenius(u: &MatrixField) -> f64 {
    par::max(u.grid().len(), |p| u.frobenius_at(p))
}

/// Per-`α` size of `∂_α U - A_α U` along a trace; matrix magnitudes are
/// pointwise Frobenius norms.
pub fn transport_defect(hist: &GaugeHistory, tr: &SpacetimeTrace) -> Result<Vec<AlphaTransport>> {
    if hist.times != tr.times() {
        return arg("frame history and trace are sampled at different times");
    }
    let dudt = hist.time_derivative()?;
    let n = tr.grid().dim();
    let samples = tr.len();
    let mut defect = vec![vec![0.0; samples]; n + 1];
    let mut conn = vec![vec![0.0; samples]; n + 1];
    let mut du = vec![vec![0.0; samples]; n + 1];
    for i in 0..samples {
        let a = ConnectionField::from_slice(&tr.positions()[i], &tr.velocities()[i], hist.k_top)?;
        let u = &hist.frames[i];
        let mut derivs = vec![dudt[i].clone()];
        derivs.extend(u.gradient());
        for (alpha, d) in derivs.iter().enumerate() {
            let au = a.alpha(alpha).mul(u)?;
            defect[alpha][i] = sup_frobenius(&d.sub(&au)?);
            conn[alpha][i] = sup_frobenius(&au);
            du[alpha][i] = sup_frobenius(d);
        }
    }
    let t = tr.times();
    (0..=n)
        .map(|alpha| {
            Ok(AlphaTransport {
                alpha,
                defect_l1_linf: time_norm(t, &defect[alpha], 1.0)?,
                connection_l1_linf: time_norm(t, &conn[alpha], 1.0)?,
                du_l2_linf: time_norm(t, &du[alpha], 2.0)?,
                du_linf_linf: time_norm(t, &du[alpha], f64::INFINITY)?,
            })
        })
        .collect()
}

/// `□U = ΔU - ∂_t² U` at the interior samples of a history.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxTrace {
    pub times: Vec<f64>,
    pub values: Vec<MatrixField>,
}

impl BoxTrace {
    /// `‖□U‖_{L²_t L^{n-1}_x}`; needs `n >= 2`.
    pub fn l2_ln1(&self) -> Result<f64> {
        let grid = *self.values[0].grid();
        let r = grid.dim() as f64 - 1.0;
        let spatial = self
            .values
            .iter()
            .map(|b| lebesgue_of(&grid, r, |p| b.frobenius_at(p)))
            .collect::<Result<Vec<_>>>()?;
        time_norm(&self.times, &spatial, 2.0)
    }
}

/// Spectral Laplacian minus the second time difference.
pub fn box_matrix(hist: &GaugeHistory) -> Result<BoxTrace> {
    let dt = hist.uniform_step(3)?;
    let u = &hist.frames;
    let mut values = Vec::with_capacity(u.len() - 2);
    for i in 1..u.len() - 1 {
        let dtt = u[i + 1].sub(&u[i].scale(2.0))?.add(&u[i - 1])?.scale(1.0 / (dt * dt));
        values.push(u[i].laplacian().sub(&dtt)?);
    }
    Ok(BoxTrace { times: hist.times[1..u.len() - 1].to_vec(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    fn circle_map(g: GridSpec) -> (Field, Vec<f64>) {
        // θ(x) = 0.3 sin x + 0.2 cos 2x, φ = (cos θ, sin θ)
        let theta = |x: f64| 0.3 * x.sin() + 0.2 * (2.0 * x).cos();
        let dtheta = |x: f64| 0.3 * x.cos() - 0.4 * (2.0 * x).sin();
        let phi = Field::from_fn(g, 2, |x, out| {
            out[0] = theta(x[0]).cos();
            out[1] = theta(x[0]).sin();
        });
        let d = (0..g.len()).map(|p| dtheta(g.coordinates(p)[0])).collect();
        (phi, d)
    }

    #[test]
    fn circle_connection_is_rotation_generator() {
        let g = GridSpec::torus(1, 64).unwrap();
        let (phi, dtheta) = circle_map(g);
        let dphi = crate::spectral::spatial_gradient(&phi).remove(0);
        let a = connection(&phi, &dphi).unwrap();
        for (p, dt) in dtheta.iter().enumerate() {
            // φ is not band-limited; spectral accuracy only.
            assert!((a.entry(0, 1, p) + dt).abs() < 1e-10);
            assert!((a.entry(1, 0, p) - dt).abs() < 1e-10);
            assert_eq!(a.entry(0, 0, p), 0.0);
        }
        assert_eq!(a.antisymmetry_defect(), 0.0);
    }

    #[test]
    fn constant_map_gives_identity_frame() {
        let g = GridSpec::torus(2, 16).unwrap();
        let phi = Field::constant(g, &[0.6, 0.8, 0.0]);
        let gf = build_gauge(&phi, 2, -1).unwrap();
        assert_eq!(gf.components.len(), 3);
        assert!(gf.components.iter().all(|u| u.max_entry() < 1e-15));
        assert!(gf.total().sub(&MatrixField::identity(g, 3)).unwrap().max_entry() < 1e-15);
        assert!(gf.orthogonality_defect() < 1e-15);
    }

    #[test]
    fn level_bounds_checked() {
        let g = GridSpec::torus(1, 16).unwrap();
        let phi = Field::constant(g, &[1.0, 0.0]);
        assert!(build_gauge(&phi, 1, 1).is_err());
        assert!(matches!(build_gauge(&phi, 9, -1), Err(Error::Range { .. })));
        assert!(matches!(build_gauge(&phi, 1, -4), Err(Error::Range { .. })));
    }

    #[test]
    fn box_of_cosine_in_time() {
        let g = GridSpec::torus(2, 8).unwrap();
        let dt = 0.01;
        let times: Vec<f64> = (0..5).map(|i| i as f64 * dt).collect();
        let frames = times.iter().map(|t| MatrixField::identity(g, 2).scale(t.cos())).collect();
        let hist = GaugeHistory {
            k_top: 0,
            k_bot: -1,
            times: times.clone(),
            frames,
            orthogonality_defects: vec![0.0; 5],
            min_det: 1.0,
        };
        let b = box_matrix(&hist).unwrap();
        for (t, v) in b.times.iter().zip(&b.values) {
            // □(I cos t) = I cos t
            assert!((v.entry(0, 0, 3) - t.cos()).abs() < dt * dt);
            assert!(v.entry(0, 1, 3).abs() < 1e-12);
        }
        let short = GaugeHistory { times: times[..2].to_vec(), frames: hist.frames[..2].to_vec(), ..hist };
        assert!(box_matrix(&short).is_err());
    }
}
