use crate::error::{arg, Result};
use crate::norms::{lebesgue_norm, lebesgue_of};
use crate::spectral::{project_band, spatial_gradient, Field};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorOutcome {
    /// `‖P_k(fg) - f P_k g‖_r`
    pub numerator: f64,
    /// `‖∇f‖_p ‖g‖_q`
    pub denominator: f64,
    /// `numerator / denominator`; `None` when the denominator vanishes.
    pub ratio: Option<f64>,
}

impl CommutatorOutcome {
    pub fn is_degenerate(&self) -> bool {
        self.ratio.is_none()
    }
}

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// Realised constant of `‖P_k(fg) - f P_k g‖_r <= C ‖∇f‖_p ‖g‖_q` for a
/// scalar `f` and vector-valued `g`.
pub fn commutator_defect(f: &Field, g: &Field, k: i32, p: f64, q: f64, r: f64) -> Result<CommutatorOutcome> {
    if f.components() != 1 {
        return arg("commutator multiplier f must be scalar");
    }
    if f.grid() != g.grid() {
        return arg("f and g live on different grids");
    }
    if [p, q, r].iter().any(|e| e.is_nan() || *e < 1.0) {
        return arg(format!("exponents ({p}, {q}, {r}) must lie in [1, inf]"));
    }
    if (recip(p) + recip(q) - recip(r)).abs() > 1e-12 {
        return arg(format!("1/{p} + 1/{q} != 1/{r}"));
    }
    let fg = g.mul_scalar_field(f)?;
    let diff = project_band(&fg, k)?.sub(&project_band(g, k)?.mul_scalar_field(f)?)?;
    let numerator = lebesgue_norm(&diff, r)?;
    let grad = spatial_gradient(f);
    let grad_norm = lebesgue_of(f.grid(), p, |pt| grad.iter().map(|d| d.at(0, pt).powi(2)).sum::<f64>().sqrt())?;
    let denominator = grad_norm * lebesgue_norm(g, q)?;
    let ratio = (denominator > 0.0).then(|| numerator / denominator);
    Ok(CommutatorOutcome { numerator, denominator, ratio })
}
