//! Staggered-grid fields and discrete calculus on the dimensionless unit square.
//!
//! Scalars (saturation, pressure) live at cell centers of an `nx x nz` grid;
//! velocities live on faces: the horizontal component on the `(nx+1) x nz`
//! vertical faces, the vertical component on the `nx x (nz+1)` horizontal
//! faces. Storage is row-major over z-rows, so row `j` covers the height
//! `(j + 1/2) * dz`.

pub mod kernels;
pub mod linop;
pub mod upwind;

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    nx: usize,
    nz: usize,
}

impl GridSpec {
    /// Grid over the unit square. Solvers expect at least 2 cells per
    /// direction; single-row grids are accepted for degenerate reductions.
    pub fn new(nx: usize, nz: usize) -> Result<Self> {
        if nx == 0 || nz == 0 {
            return Err(SimError::Parameter(format!(
                "grid must have at least one cell per direction, got {nx} x {nz}"
            )));
        }
        Ok(Self { nx, nz })
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn nz(&self) -> usize {
        self.nz
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        1.0 / self.nx as f64
    }

    #[inline]
    pub fn dz(&self) -> f64 {
        1.0 / self.nz as f64
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dx() * self.dz()
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.nx * self.nz
    }

    /// x coordinate of the center of cell column i.
    #[inline]
    pub fn cell_x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    /// z coordinate of the center of cell row j.
    #[inline]
    pub fn cell_z(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dz()
    }

    #[inline]
    pub(crate) fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

/// Cell-centered scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_cells()],
        }
    }

    /// Sample `f(x, z)` at cell centers.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_cells());
        for j in 0..grid.nz {
            let z = grid.cell_z(j);
            for i in 0..grid.nx {
                values.push(f(grid.cell_x(i), z));
            }
        }
        Self { grid, values }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(SimError::Contract(format!(
                "scalar field needs {} values for a {} x {} grid, got {}",
                grid.n_cells(),
                grid.nx,
                grid.nz,
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// L2 norm over the unit square, `sqrt(dx dz sum v^2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * kernels::norm_sq(&self.values)).sqrt()
    }

    /// L2 norms of the two gradient components.
    ///
    /// Gradients are sampled at faces from adjacent cell differences; boundary
    /// faces reuse the one-sided difference of the nearest interior face pair
    /// and carry half quadrature weight, which reproduces linear fields
    /// exactly.
    pub fn l2_grad_norms(&self) -> (f64, f64) {
        let (nx, nz) = (self.grid.nx, self.grid.nz);
        let (dx, dz) = (self.grid.dx(), self.grid.dz());
        let vol = self.grid.cell_volume();
        let mut gx2 = 0.0;
        if nx >= 2 {
            for j in 0..nz {
                let row = &self.values[j * nx..(j + 1) * nx];
                let mut acc = 0.0;
                for i in 1..nx {
                    let g = (row[i] - row[i - 1]) / dx;
                    acc += g * g;
                }
                let first = (row[1] - row[0]) / dx;
                let last = (row[nx - 1] - row[nx - 2]) / dx;
                acc += 0.5 * (first * first + last * last);
                gx2 += acc;
            }
        }
        let mut gz2 = 0.0;
        if nz >= 2 {
            for j in 1..nz {
                let lower = &self.values[(j - 1) * nx..j * nx];
                let upper = &self.values[j * nx..(j + 1) * nx];
                let weight = if j == 1 || j == nz - 1 { 1.5 } else { 1.0 };
                let mut acc = 0.0;
                for i in 0..nx {
                    let g = (upper[i] - lower[i]) / dz;
                    acc += g * g;
                }
                gz2 += weight * acc;
            }
            if nz == 2 {
                // the single interior face doubles as both one-sided boundary faces
                gz2 += gz2 / 3.0;
            }
        }
        ((vol * gx2).sqrt(), (vol * gz2).sqrt())
    }

    /// Vertical average per column, `sum_j dz * v_ij` (midpoint rule).
    pub fn vertical_average(&self) -> Vec<f64> {
        let (nx, nz) = (self.grid.nx, self.grid.nz);
        let dz = self.grid.dz();
        let mut out = vec![0.0; nx];
        for j in 0..nz {
            let row = &self.values[j * nx..(j + 1) * nx];
            for i in 0..nx {
                out[i] += dz * row[i];
            }
        }
        out
    }

    /// Running vertical integral sampled at horizontal faces: value at height
    /// `j * dz` is `sum_{k < j} dz * v_ik`; the bottom face is 0 and the top
    /// face equals the vertical average.
    pub fn cumulative_vertical_integral(&self) -> Vec<f64> {
        let (nx, nz) = (self.grid.nx, self.grid.nz);
        let dz = self.grid.dz();
        let mut out = vec![0.0; nx * (nz + 1)];
        for j in 0..nz {
            let row = &self.values[j * nx..(j + 1) * nx];
            for i in 0..nx {
                out[(j + 1) * nx + i] = out[j * nx + i] + dz * row[i];
            }
        }
        out
    }
}

/// Velocity field on the staggered faces.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    grid: GridSpec,
    /// Horizontal component on vertical faces, `(nx+1) x nz`.
    u: Vec<f64>,
    /// Vertical component on horizontal faces, `nx x (nz+1)`; the bottom and
    /// top rows are kept at exactly 0 (impermeable walls).
    q: Vec<f64>,
}

impl FaceField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            u: vec![0.0; (grid.nx + 1) * grid.nz],
            q: vec![0.0; grid.nx * (grid.nz + 1)],
        }
    }

    pub fn from_components(grid: GridSpec, u: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if u.len() != (grid.nx + 1) * grid.nz || q.len() != grid.nx * (grid.nz + 1) {
            return Err(SimError::Contract(format!(
                "face field components do not conform to a {} x {} grid",
                grid.nx, grid.nz
            )));
        }
        Ok(Self { grid, u, q })
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn u_at(&self, i: usize, j: usize) -> f64 {
        self.u[j * (self.grid.nx + 1) + i]
    }

    #[inline]
    pub fn q_at(&self, i: usize, j: usize) -> f64 {
        self.q[j * self.grid.nx + i]
    }

    #[inline]
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    #[inline]
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    #[inline]
    pub fn u_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    #[inline]
    pub fn q_mut(&mut self) -> &mut [f64] {
        &mut self.q
    }

    /// Velocity on the inflow boundary faces (x = 0), one value per row.
    pub fn inflow_column(&self) -> Vec<f64> {
        (0..self.grid.nz).map(|j| self.u_at(0, j)).collect()
    }

    pub fn max_abs_u(&self) -> f64 {
        kernels::max_abs(&self.u)
    }

    pub fn max_abs_q(&self) -> f64 {
        kernels::max_abs(&self.q)
    }

    /// Discrete divergence per cell: `(U_e - U_w)/dx + (Q_n - Q_s)/dz`.
    pub fn divergence(&self) -> ScalarField {
        let grid = self.grid;
        let (nx, nz) = (grid.nx, grid.nz);
        let (dx, dz) = (grid.dx(), grid.dz());
        let mut out = ScalarField::zeros(grid);
        let u = &self.u;
        let q = &self.q;
        kernels::for_each_row(out.values_mut(), nx, |j, row| {
            let urow = &u[j * (nx + 1)..(j + 1) * (nx + 1)];
            let qlo = &q[j * nx..(j + 1) * nx];
            let qhi = &q[(j + 1) * nx..(j + 2) * nx];
            for i in 0..nx {
                row[i] = (urow[i + 1] - urow[i]) / dx + (qhi[i] - qlo[i]) / dz;
            }
        });
        out
    }

    /// L2 norms of the two components over the unit square, with half
    /// quadrature weight on boundary faces.
    pub fn l2_norms(&self) -> (f64, f64) {
        let (nx, nz) = (self.grid.nx, self.grid.nz);
        let vol = self.grid.cell_volume();
        let mut u2 = 0.0;
        for j in 0..nz {
            let row = &self.u[j * (nx + 1)..(j + 1) * (nx + 1)];
            let mut acc = 0.5 * (row[0] * row[0] + row[nx] * row[nx]);
            for &v in &row[1..nx] {
                acc += v * v;
            }
            u2 += acc;
        }
        let mut q2 = 0.0;
        for j in 0..=nz {
            let row = &self.q[j * nx..(j + 1) * nx];
            let weight = if j == 0 || j == nz { 0.5 } else { 1.0 };
            let mut acc = 0.0;
            for &v in row {
                acc += v * v;
            }
            q2 += weight * acc;
        }
        ((vol * u2).sqrt(), (vol * q2).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, nz: usize) -> GridSpec {
        GridSpec::new(nx, nz).unwrap()
    }

    #[test]
    fn divergence_of_constant_field_vanishes() {
        let g = grid(5, 4);
        let mut v = FaceField::zeros(g);
        v.u_mut().fill(3.0);
        let div = v.divergence();
        assert!(div.values().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn divergence_of_linear_divergence_free_field() {
        // U = x, Q = -z is analytically divergence free and the discrete
        // differences reproduce it exactly
        let g = grid(6, 6);
        let mut v = FaceField::zeros(g);
        for j in 0..6 {
            for i in 0..=6 {
                v.u_mut()[j * 7 + i] = i as f64 * g.dx();
            }
        }
        for j in 1..6 {
            for i in 0..6 {
                v.q_mut()[j * 6 + i] = -(j as f64 * g.dz());
            }
        }
        // walls stay 0; interior rows carry -z; divergence of the interior
        // cells must cancel exactly
        let div = v.divergence();
        for j in 1..5 {
            for i in 0..6 {
                assert!(div.at(i, j).abs() < 1e-14, "div({i},{j}) = {}", div.at(i, j));
            }
        }
    }

    #[test]
    fn vertical_average_of_constant_and_single_row() {
        let g = grid(4, 8);
        let s = ScalarField::from_fn(g, |_, _| 2.5);
        for c in s.vertical_average() {
            assert!((c - 2.5).abs() < 1e-15);
        }
        let g1 = grid(3, 1);
        let s1 = ScalarField::from_fn(g1, |x, _| x);
        let cols = s1.vertical_average();
        for i in 0..3 {
            assert!((cols[i] - s1.at(i, 0)).abs() < 1e-16);
        }
    }

    #[test]
    fn vertical_average_of_height_field() {
        // midpoint rule on v = z: exact value 1/2 up to the dz^2/24 bound
        let g = grid(2, 10);
        let s = ScalarField::from_fn(g, |_, z| z);
        let bound = g.dz() * g.dz() / 24.0 + 1e-15;
        for c in s.vertical_average() {
            assert!((c - 0.5).abs() <= bound, "column average {c}");
        }
    }

    #[test]
    fn cumulative_integral_prefix_oracle() {
        let g = grid(5, 7);
        let s = ScalarField::from_fn(g, |x, z| (13.0 * x + 7.0 * z).sin());
        let faces = s.cumulative_vertical_integral();
        // independent prefix-sum loop
        for i in 0..5 {
            let mut acc = 0.0;
            assert_eq!(faces[i], 0.0);
            for j in 0..7 {
                acc += g.dz() * s.at(i, j);
                assert_eq!(faces[(j + 1) * 5 + i], acc);
            }
        }
    }

    #[test]
    fn cumulative_top_face_equals_vertical_average() {
        let g = grid(9, 6);
        let s = ScalarField::from_fn(g, |x, z| x * x - 3.0 * z);
        let faces = s.cumulative_vertical_integral();
        let avg = s.vertical_average();
        for i in 0..9 {
            assert_eq!(faces[6 * 9 + i], avg[i]);
        }
    }

    #[test]
    fn l2_norm_of_unit_field() {
        let g = grid(13, 5);
        let s = ScalarField::from_fn(g, |_, _| 1.0);
        assert!((s.l2_norm() - 1.0).abs() < 1e-14);
        let z = ScalarField::zeros(g);
        assert_eq!(z.l2_norm(), 0.0);
        assert_eq!(z.l2_grad_norms(), (0.0, 0.0));
    }

    #[test]
    fn grad_norm_of_linear_field() {
        let g = grid(16, 8);
        let s = ScalarField::from_fn(g, |x, _| x);
        let (gx, gz) = s.l2_grad_norms();
        assert!((gx - 1.0).abs() < 1e-13, "gx = {gx}");
        assert!(gz.abs() < 1e-14);
        let t = ScalarField::from_fn(g, |_, z| 2.0 * z);
        let (tx, tz) = t.l2_grad_norms();
        assert!(tx.abs() < 1e-14);
        assert!((tz - 2.0).abs() < 1e-13, "tz = {tz}");
    }

    #[test]
    fn grad_norm_hand_computed_small_grid() {
        // 4x1 row with values 0, 1, 3, 3: interior face slopes 4, 8, 0
        let g = grid(4, 1);
        let s = ScalarField::from_values(g, vec![0.0, 1.0, 3.0, 3.0]).unwrap();
        let (gx, _) = s.l2_grad_norms();
        // dx = 1/4, faces: half*16 + 16 + 64 + half*0 = 88 -> * dx*dz
        let expect = (0.25 * (0.5 * 16.0 + 16.0 + 64.0 + 0.0)).sqrt();
        assert!((gx - expect).abs() < 1e-13, "gx = {gx}, expect {expect}");
    }
}
