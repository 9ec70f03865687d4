//! Matrix-free pentadiagonal operator on cell-centered fields and the
//! conjugate-gradient solver shared by the pressure and regularization solves.

use super::kernels;
use super::{GridSpec, ScalarField};
use crate::error::{Result, SimError};

/// Boundary treatment of one domain side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    /// Fixed value on the boundary line, applied through a half-cell
    /// transmissibility.
    Dirichlet(f64),
    /// Homogeneous Neumann: no flux through the side.
    Neumann,
}

/// Symmetric positive definite operator
/// `y = shift * x + sum_faces T_f (x_cell - x_neighbor)`,
/// assembled from face transmissibilities. Dirichlet sides contribute their
/// half-cell transmissibility to the diagonal; the inhomogeneous part lives in
/// [`LinearOperatorSpec::boundary_rhs`].
#[derive(Debug, Clone)]
pub struct LinearOperatorSpec {
    grid: GridSpec,
    /// Transmissibilities on vertical faces, `(nx+1) x nz`; boundary columns
    /// hold the half-cell value for Dirichlet sides and 0 for Neumann sides.
    tx: Vec<f64>,
    /// Transmissibilities on horizontal faces, `nx x (nz+1)`.
    tz: Vec<f64>,
    /// Per-cell diagonal shift (identity part), added as is.
    diag_shift: f64,
    west: BoundaryKind,
    east: BoundaryKind,
    south: BoundaryKind,
    north: BoundaryKind,
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

impl LinearOperatorSpec {
    /// Two-point flux operator with per-cell coefficients and harmonic face
    /// averaging. `x_scale` and `z_scale` multiply the face transmissibilities
    /// of the respective direction.
    pub fn tpfa(
        grid: GridSpec,
        coeff: &ScalarField,
        x_scale: f64,
        z_scale: f64,
        west: BoundaryKind,
        east: BoundaryKind,
        south: BoundaryKind,
        north: BoundaryKind,
        diag_shift: f64,
    ) -> Result<Self> {
        if coeff.grid() != grid {
            return Err(SimError::Contract(
                "coefficient field does not conform to the operator grid".to_string(),
            ));
        }
        if coeff.values().iter().any(|&c| !c.is_finite() || c <= 0.0) {
            return Err(SimError::Contract(
                "tpfa coefficients must be finite and strictly positive".to_string(),
            ));
        }
        if diag_shift < 0.0 {
            return Err(SimError::Contract("diagonal shift must be nonnegative".to_string()));
        }
        let (nx, nz) = (grid.nx(), grid.nz());
        let (dx, dz) = (grid.dx(), grid.dz());
        let ax = x_scale * dz / dx;
        let az = z_scale * dx / dz;
        let mut tx = vec![0.0; (nx + 1) * nz];
        for j in 0..nz {
            for i in 1..nx {
                tx[j * (nx + 1) + i] = ax * harmonic(coeff.at(i - 1, j), coeff.at(i, j));
            }
            if matches!(west, BoundaryKind::Dirichlet(_)) {
                tx[j * (nx + 1)] = 2.0 * ax * coeff.at(0, j);
            }
            if matches!(east, BoundaryKind::Dirichlet(_)) {
                tx[j * (nx + 1) + nx] = 2.0 * ax * coeff.at(nx - 1, j);
            }
        }
        let mut tz = vec![0.0; nx * (nz + 1)];
        for j in 1..nz {
            for i in 0..nx {
                tz[j * nx + i] = az * harmonic(coeff.at(i, j - 1), coeff.at(i, j));
            }
        }
        if matches!(south, BoundaryKind::Dirichlet(_)) {
            for i in 0..nx {
                tz[i] = 2.0 * az * coeff.at(i, 0);
            }
        }
        if matches!(north, BoundaryKind::Dirichlet(_)) {
            for i in 0..nx {
                tz[nz * nx + i] = 2.0 * az * coeff.at(i, nz - 1);
            }
        }
        Ok(Self {
            grid,
            tx,
            tz,
            diag_shift,
            west,
            east,
            south,
            north,
        })
    }

    /// Constant-coefficient operator `shift * I + cx * D_xx + cz * D_zz` in
    /// transmissibility form; used for the regularization solve.
    pub fn constant_coefficients(
        grid: GridSpec,
        cx: f64,
        cz: f64,
        diag_shift: f64,
        west: BoundaryKind,
        east: BoundaryKind,
        south: BoundaryKind,
        north: BoundaryKind,
    ) -> Result<Self> {
        if cx < 0.0 || cz < 0.0 || diag_shift < 0.0 {
            return Err(SimError::Contract(
                "constant operator coefficients must be nonnegative".to_string(),
            ));
        }
        let (nx, nz) = (grid.nx(), grid.nz());
        let (dx, dz) = (grid.dx(), grid.dz());
        let ax = cx * dz / dx;
        let az = cz * dx / dz;
        let mut tx = vec![0.0; (nx + 1) * nz];
        for j in 0..nz {
            for i in 1..nx {
                tx[j * (nx + 1) + i] = ax;
            }
            if matches!(west, BoundaryKind::Dirichlet(_)) {
                tx[j * (nx + 1)] = 2.0 * ax;
            }
            if matches!(east, BoundaryKind::Dirichlet(_)) {
                tx[j * (nx + 1) + nx] = 2.0 * ax;
            }
        }
        let mut tz = vec![0.0; nx * (nz + 1)];
        for j in 1..nz {
            for i in 0..nx {
                tz[j * nx + i] = az;
            }
        }
        if matches!(south, BoundaryKind::Dirichlet(_)) {
            for i in 0..nx {
                tz[i] = 2.0 * az;
            }
        }
        if matches!(north, BoundaryKind::Dirichlet(_)) {
            for i in 0..nx {
                tz[nz * nx + i] = 2.0 * az;
            }
        }
        Ok(Self {
            grid,
            tx,
            tz,
            diag_shift,
            west,
            east,
            south,
            north,
        })
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn tx(&self) -> &[f64] {
        &self.tx
    }

    #[inline]
    pub fn tz(&self) -> &[f64] {
        &self.tz
    }

    /// True when no side pins the solution and the identity part vanishes:
    /// the operator is then singular on constants.
    pub fn is_pure_neumann(&self) -> bool {
        self.diag_shift == 0.0
            && [self.west, self.east, self.south, self.north]
                .iter()
                .all(|b| matches!(b, BoundaryKind::Neumann))
    }

    /// Right-hand-side contribution of the inhomogeneous Dirichlet values.
    pub fn boundary_rhs(&self) -> ScalarField {
        let (nx, nz) = (self.grid.nx(), self.grid.nz());
        let mut rhs = ScalarField::zeros(self.grid);
        if let BoundaryKind::Dirichlet(g) = self.west {
            for j in 0..nz {
                let k = self.grid.idx(0, j);
                rhs.values_mut()[k] += self.tx[j * (nx + 1)] * g;
            }
        }
        if let BoundaryKind::Dirichlet(g) = self.east {
            for j in 0..nz {
                let k = self.grid.idx(nx - 1, j);
                rhs.values_mut()[k] += self.tx[j * (nx + 1) + nx] * g;
            }
        }
        if let BoundaryKind::Dirichlet(g) = self.south {
            for i in 0..nx {
                rhs.values_mut()[i] += self.tz[i] * g;
            }
        }
        if let BoundaryKind::Dirichlet(g) = self.north {
            for i in 0..nx {
                let k = self.grid.idx(i, nz - 1);
                rhs.values_mut()[k] += self.tz[nz * nx + i] * g;
            }
        }
        rhs
    }

    /// Row range worker shared by the parallel and sequential matvec paths.
    ///
    /// The per-cell flux sums are grouped per direction so that mirror
    /// symmetry of the inputs survives bitwise (the two terms of a direction
    /// swap under reflection and addition commutes exactly).
    #[inline]
    fn apply_row(&self, j: usize, x: &[f64], row: &mut [f64]) {
        let nx = self.grid.nx();
        let nz = self.grid.nz();
        let txr = &self.tx[j * (nx + 1)..(j + 1) * (nx + 1)];
        let tzlo = &self.tz[j * nx..(j + 1) * nx];
        let tzhi = &self.tz[(j + 1) * nx..(j + 2) * nx];
        let xr = &x[j * nx..(j + 1) * nx];
        let xlo = if j > 0 { &x[(j - 1) * nx..j * nx] } else { &[] as &[f64] };
        let xhi = if j + 1 < nz { &x[(j + 1) * nx..(j + 2) * nx] } else { &[] as &[f64] };
        for i in 0..nx {
            let c = xr[i];
            let west = if i > 0 { txr[i] * (c - xr[i - 1]) } else { txr[0] * c };
            let east = if i + 1 < nx {
                txr[i + 1] * (c - xr[i + 1])
            } else {
                txr[nx] * c
            };
            let south = if j > 0 { tzlo[i] * (c - xlo[i]) } else { tzlo[i] * c };
            let north = if j + 1 < nz { tzhi[i] * (c - xhi[i]) } else { tzhi[i] * c };
            row[i] = self.diag_shift * c + (west + east) + (south + north);
        }
    }

    /// y = A x, dispatching to the parallel path when available.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.grid.n_cells());
        debug_assert_eq!(y.len(), self.grid.n_cells());
        let nx = self.grid.nx();
        kernels::for_each_row(y, nx, |j, row| self.apply_row(j, x, row));
    }

    /// Sequential matvec, kept for benchmarking against [`apply_into`].
    pub fn apply_into_seq(&self, x: &[f64], y: &mut [f64]) {
        let nx = self.grid.nx();
        kernels::for_each_row_seq(y, nx, |j, row| self.apply_row(j, x, row));
    }

    pub fn apply(&self, x: &ScalarField) -> Result<ScalarField> {
        if x.grid() != self.grid {
            return Err(SimError::Contract(
                "operand grid does not match the operator grid".to_string(),
            ));
        }
        let mut y = ScalarField::zeros(self.grid);
        self.apply_into(x.values(), y.values_mut());
        Ok(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn demean(v: &mut [f64]) {
    let mean = kernels::sum(v) / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

/// Conjugate gradients on the operator, from a zero initial guess, down to
/// `||A x - b|| <= tol * ||b||`.
///
/// All reductions run in a fixed chunk order, so repeated solves of the same
/// system give bitwise-identical results for any thread count. Pure-Neumann
/// systems require a mean-free right-hand side and return the mean-free
/// solution.
pub fn cg_solve(
    op: &LinearOperatorSpec,
    rhs: &ScalarField,
    tol: f64,
    max_iter: usize,
) -> Result<(ScalarField, CgStats)> {
    cg_solve_traced(op, rhs, tol, max_iter, |_| {})
}

/// [`cg_solve`] with a per-iteration observer over the current iterate.
pub fn cg_solve_traced(
    op: &LinearOperatorSpec,
    rhs: &ScalarField,
    tol: f64,
    max_iter: usize,
    mut on_iterate: impl FnMut(&[f64]),
) -> Result<(ScalarField, CgStats)> {
    if rhs.grid() != op.grid() {
        return Err(SimError::Contract(
            "right-hand side grid does not match the operator grid".to_string(),
        ));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(SimError::Parameter(format!("cg tolerance must be positive, got {tol}")));
    }
    let n = op.grid().n_cells();
    let mut b = rhs.values().to_vec();
    let pure_neumann = op.is_pure_neumann();
    if pure_neumann {
        let bnorm = kernels::norm_sq(&b).sqrt();
        let mean = kernels::sum(&b) / n as f64;
        if mean.abs() > tol.max(1e-12) * bnorm.max(1.0) {
            return Err(SimError::Contract(format!(
                "pure-Neumann system needs a mean-free right-hand side (mean {mean:e})"
            )));
        }
        demean(&mut b);
    }
    let b_norm = kernels::norm_sq(&b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((
            ScalarField::from_values(op.grid(), x)?,
            CgStats { iterations: 0, relative_residual: 0.0 },
        ));
    }
    let mut r = b;
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rs = kernels::norm_sq(&r);
    let mut iterations = 0;
    while rs.sqrt() > tol * b_norm {
        if iterations >= max_iter {
            return Err(SimError::Solver {
                message: format!("cg did not converge within {max_iter} iterations"),
                residual: rs.sqrt() / b_norm,
            });
        }
        op.apply_into(&p, &mut ap);
        let pap = kernels::dot(&p, &ap);
        if pap <= 0.0 {
            return Err(SimError::Contract(format!(
                "operator is not positive definite (curvature {pap:e})"
            )));
        }
        let alpha = rs / pap;
        kernels::axpy(&mut x, alpha, &p);
        kernels::axpy(&mut r, -alpha, &ap);
        if pure_neumann {
            demean(&mut r);
        }
        on_iterate(&x);
        let rs_new = kernels::norm_sq(&r);
        let beta = rs_new / rs;
        rs = rs_new;
        kernels::xpby(&mut p, &r, beta);
        iterations += 1;
    }
    if pure_neumann {
        demean(&mut x);
    }
    Ok((
        ScalarField::from_values(op.grid(), x)?,
        CgStats {
            iterations,
            relative_residual: rs.sqrt() / b_norm,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_operator_returns_rhs() {
        let grid = GridSpec::new(4, 3).unwrap();
        let op = LinearOperatorSpec::constant_coefficients(
            grid,
            0.0,
            0.0,
            1.0,
            BoundaryKind::Neumann,
            BoundaryKind::Neumann,
            BoundaryKind::Neumann,
            BoundaryKind::Neumann,
        )
        .unwrap();
        let rhs = ScalarField::from_fn(grid, |x, z| x - 2.0 * z);
        let (x, stats) = cg_solve(&op, &rhs, 1e-12, 100).unwrap();
        for (a, b) in x.values().iter().zip(rhs.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(stats.iterations <= 2);
    }

    #[test]
    fn zero_rhs_short_circuits() {
        let grid = GridSpec::new(4, 4).unwrap();
        let op = LinearOperatorSpec::constant_coefficients(
            grid,
            1.0,
            1.0,
            1.0,
            BoundaryKind::Neumann,
            BoundaryKind::Neumann,
            BoundaryKind::Neumann,
            BoundaryKind::Neumann,
        )
        .unwrap();
        let rhs = ScalarField::zeros(grid);
        let (x, stats) = cg_solve(&op, &rhs, 1e-12, 10).unwrap();
        assert!(x.values().iter().all(|&v| v == 0.0));
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn laplacian_eigenpair() {
        // shifted 1-row Neumann Laplacian: eigenvectors cos(k pi (i+1/2)/n)
        // with eigenvalue shift + 2 T (1 - cos(k pi / n)), T = dz/dx
        let n = 32;
        let grid = GridSpec::new(n, 1).unwrap();
        let shift = 0.7;
        let op = LinearOperatorSpec::constant_coefficients(
            grid,
            1.0,
            0.0,
            shift,
            BoundaryKind::Neumann,
            BoundaryKind::Neumann,
            BoundaryKind::Neumann,
            BoundaryKind::Neumann,
        )
        .unwrap();
        let k = 3.0;
        let t = grid.dz() / grid.dx();
        let eig = shift + 2.0 * t * (1.0 - (k * std::f64::consts::PI / n as f64).cos());
        let mode = ScalarField::from_fn(grid, |x, _| (k * std::f64::consts::PI * x).cos());
        let mut rhs = mode.clone();
        for v in rhs.values_mut() {
            *v *= eig;
        }
        let (x, _) = cg_solve(&op, &rhs, 1e-13, 10 * n).unwrap();
        for (got, want) in x.values().iter().zip(mode.values()) {
            assert!((got - want).abs() < 1e-10, "eigenvector mismatch: {got} vs {want}");
        }
    }

    #[test]
    fn pure_neumann_requires_compatible_rhs() {
        let grid = GridSpec::new(5, 5).unwrap();
        let op = LinearOperatorSpec::constant_coefficients(
            grid,
            1.0,
            1.0,
            0.0,
            BoundaryKind::Neumann,
            BoundaryKind::Neumann,
            BoundaryKind::Neumann,
            BoundaryKind::Neumann,
        )
        .unwrap();
        assert!(op.is_pure_neumann());
        let bad = ScalarField::from_fn(grid, |_, _| 1.0);
        assert!(matches!(cg_solve(&op, &bad, 1e-10, 500), Err(SimError::Contract(_))));
        // compatible rhs: solvable, mean-free solution
        let good = ScalarField::from_fn(grid, |x, _| (2.0 * std::f64::consts::PI * x).cos());
        let (x, _) = cg_solve(&op, &good, 1e-10, 500).unwrap();
        let mean = kernels::sum(x.values()) / x.values().len() as f64;
        assert!(mean.abs() < 1e-12);
        let back = op.apply(&x).unwrap();
        for (a, b) in back.values().iter().zip(good.values()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn non_convergence_reports_residual() {
        let grid = GridSpec::new(16, 16).unwrap();
        let op = LinearOperatorSpec::constant_coefficients(
            grid,
            1.0,
            1.0,
            1e-8,
            BoundaryKind::Dirichlet(0.0),
            BoundaryKind::Dirichlet(0.0),
            BoundaryKind::Neumann,
            BoundaryKind::Neumann,
        )
        .unwrap();
        let rhs = ScalarField::from_fn(grid, |x, z| (x * z).exp());
        match cg_solve(&op, &rhs, 1e-14, 2) {
            Err(SimError::Solver { residual, .. }) => assert!(residual > 0.0),
            other => panic!("expected solver error, got {other:?}"),
        }
    }
}
