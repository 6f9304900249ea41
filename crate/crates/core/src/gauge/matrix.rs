use crate::error::{arg, Error, Result};
use crate::par;
use crate::spectral::{laplacian, spatial_gradient, Field, GridSpec};

/// `m×m` real matrix at every grid point, stored row-major as the `m²`
/// components of a [`Field`].
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    m: usize,
    field: Field,
}

impl MatrixField {
    pub fn new(m: usize, field: Field) -> Result<Self> {
        if m == 0 || field.components() != m * m {
            return arg(format!("field with {} components is not {m}x{m}", field.components()));
        }
        Ok(Self { m, field })
    }

    pub fn zeros(grid: GridSpec, m: usize) -> Self {
        Self { m, field: Field::zeros(grid, m * m) }
    }

    pub fn identity(grid: GridSpec, m: usize) -> Self {
        let mut id = vec![0.0; m * m];
        (0..m).for_each(|i| id[i * m + i] = 1.0);
        Self { m, field: Field::constant(grid, &id) }
    }

    /// `f(p, out)` fills the row-major matrix at point `p`.
    pub fn from_points<F>(grid: GridSpec, m: usize, f: F) -> Self
    where
        F: Fn(usize, &mut [f64]) + Send + Sync,
    {
        Self { m, field: Field::from_points(grid, m * m, f) }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn grid(&self) -> &GridSpec {
        self.field.grid()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn into_field(self) -> Field {
        self.field
    }

    pub fn entry(&self, i: usize, j: usize, p: usize) -> f64 {
        self.field.at(i * self.m + j, p)
    }

    pub fn matrix_at(&self, p: usize, out: &mut [f64]) {
        self.field.point_into(p, out);
    }

    fn check(&self, other: &MatrixField) -> Result<()> {
        if self.m != other.m || self.grid() != other.grid() {
            return arg("matrix fields differ in size or grid");
        }
        Ok(())
    }

    pub fn add(&self, other: &MatrixField) -> Result<MatrixField> {
        self.check(other)?;
        Ok(Self { m: self.m, field: self.field.add(&other.field)? })
    }

    pub fn sub(&self, other: &MatrixField) -> Result<MatrixField> {
        self.check(other)?;
        Ok(Self { m: self.m, field: self.field.sub(&other.field)? })
    }

    pub fn scale(&self, s: f64) -> MatrixField {
        Self { m: self.m, field: self.field.scale(s) }
    }

    /// Pointwise product `self · other`.
    pub fn mul(&self, other: &MatrixField) -> Result<MatrixField> {
        self.check(other)?;
        let m = self.m;
        Ok(Self::from_points(*self.grid(), m, |p, out| {
            for i in 0..m {
                for j in 0..m {
                    out[i * m + j] = (0..m).map(|l| self.entry(i, l, p) * other.entry(l, j, p)).sum();
                }
            }
        }))
    }

    /// Pointwise `self^† · other`.
    pub fn transpose_mul(&self, other: &MatrixField) -> Result<MatrixField> {
        self.check(other)?;
        let m = self.m;
        Ok(Self::from_points(*self.grid(), m, |p, out| {
            for i in 0..m {
                for j in 0..m {
                    out[i * m + j] = (0..m).map(|l| self.entry(l, i, p) * other.entry(l, j, p)).sum();
                }
            }
        }))
    }

    pub fn transpose(&self) -> MatrixField {
        let m = self.m;
        Self::from_points(*self.grid(), m, |p, out| {
            for i in 0..m {
                for j in 0..m {
                    out[i * m + j] = self.entry(j, i, p);
                }
            }
        })
    }

    /// Pointwise matrix-vector product with an `m`-component field.
    pub fn apply(&self, v: &Field) -> Result<Field> {
        if v.components() != self.m || v.grid() != self.grid() {
            return arg("vector field does not match the matrix field");
        }
        let m = self.m;
        Ok(Field::from_points(*self.grid(), m, |p, out| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = (0..m).map(|j| self.entry(i, j, p) * v.at(j, p)).sum();
            }
        }))
    }

    /// `U^† U - I`
    pub fn gram_defect(&self) -> MatrixField {
        let m = self.m;
        let mut g = self.transpose_mul(self).expect("same field");
        for i in 0..m {
            g.field.component_mut(i * m + i).iter_mut().for_each(|x| *x -= 1.0);
        }
        g
    }

    /// Largest absolute entry over all points.
    pub fn max_entry(&self) -> f64 {
        self.field.max_abs()
    }

    /// `max |A + A^†|` entrywise.
    pub fn antisymmetry_defect(&self) -> f64 {
        let m = self.m;
        par::max(self.grid().len(), |p| {
            let mut worst = 0.0_f64;
            for i in 0..m {
                for j in 0..=i {
                    worst = worst.max((self.entry(i, j, p) + self.entry(j, i, p)).abs());
                }
            }
            worst
        })
    }

    /// Point and value of the smallest `|det|`.
    pub fn min_abs_det(&self) -> (usize, f64) {
        let m = self.m;
        let dets: Vec<f64> = par::map_indexed(self.grid().len(), |p| {
            let mut a = vec![0.0; m * m];
            self.matrix_at(p, &mut a);
            determinant(&mut a, m)
        });
        dets.iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (p, d)| if d.abs() < best.1.abs() { (p, *d) } else { best })
    }

    /// Pointwise inverse; fails at the first point with `|det| < det_floor`.
    pub fn inverse(&self, det_floor: f64) -> Result<MatrixField> {
        let (point, det) = self.min_abs_det();
        if det.abs() < det_floor {
            return Err(Error::DegenerateFrame { point, det });
        }
        let m = self.m;
        Ok(Self::from_points(*self.grid(), m, |p, out| {
            let mut a = vec![0.0; m * m];
            self.matrix_at(p, &mut a);
            invert(&mut a, out, m);
        }))
    }

    /// Spectral `∂_j` of every entry, `j = 1..n`.
    pub fn gradient(&self) -> Vec<MatrixField> {
        spatial_gradient(&self.field)
            .into_iter()
            .map(|f| Self { m: self.m, field: f })
            .collect()
    }

    pub fn laplacian(&self) -> MatrixField {
        Self { m: self.m, field: laplacian(&self.field) }
    }

    /// Pointwise Frobenius norm at `p`.
    pub fn frobenius_at(&self, p: usize) -> f64 {
        self.field.pointwise_norm(p)
    }
}

/// Determinant by Gaussian elimination with partial pivoting; destroys `a`.
pub(crate) fn determinant(a: &mut [f64], m: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&x, &y| a[x * m + col].abs().total_cmp(&a[y * m + col].abs()))
            .expect("non-empty column");
        if a[pivot * m + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..m {
                a.swap(pivot * m + j, col * m + j);
            }
            det = -det;
        }
        let d = a[col * m + col];
        det *= d;
        for row in col + 1..m {
            let f = a[row * m + col] / d;
            for j in col..m {
                a[row * m + j] -= f * a[col * m + j];
            }
        }
    }
    det
}

/// Gauss-Jordan inverse with partial pivoting; destroys `a`, writes `inv`.
pub(crate) fn invert(a: &mut [f64], inv: &mut [f64], m: usize) {
    inv.iter_mut().for_each(|x| *x = 0.0);
    (0..m).for_each(|i| inv[i * m + i] = 1.0);
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&x, &y| a[x * m + col].abs().total_cmp(&a[y * m + col].abs()))
            .expect("non-empty column");
        if pivot != col {
            for j in 0..m {
                a.swap(pivot * m + j, col * m + j);
                inv.swap(pivot * m + j, col * m + j);
            }
        }
        let d = a[col * m + col];
        for j in 0..m {
            a[col * m + j] /= d;
            inv[col * m + j] /= d;
        }
        for row in 0..m {
            if row == col {
                continue;
            }
            let f = a[row * m + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..m {
                a[row * m + j] -= f * a[col * m + j];
                inv[row * m + j] -= f * inv[col * m + j];
            }
        }
    }
}
