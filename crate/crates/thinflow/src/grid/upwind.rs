//! First-order upwind evaluation of the fractional-flow flux on faces.

use super::{kernels, FaceField, ScalarField};
use crate::model::{frac_flow_unchecked, InflowProfile};

/// Flux `velocity * f(S_upwind)` per face, where the upwind saturation is the
/// cell on the side the velocity comes from.
///
/// Inflow faces (x = 0) use the prescribed boundary profile as their exterior
/// state, so incoming flow carries `f(S_inflow(z))`. Outflow faces (x = 1) use
/// the interior cell for outgoing flow and a dry exterior (zero flux) for
/// backflow. The wall rows of the vertical component stay exactly zero.
///
/// Panics if the saturation and velocity grids differ.
pub fn upwind_face_flux(
    s: &ScalarField,
    v: &FaceField,
    viscosity_ratio_m: f64,
    inflow: &InflowProfile,
) -> FaceField {
    assert_eq!(s.grid(), v.grid(), "saturation and velocity grids must conform");
    let grid = s.grid();
    let (nx, nz) = (grid.nx(), grid.nz());
    let m = viscosity_ratio_m;
    let mut flux = FaceField::zeros(grid);

    let sv = s.values();
    let uv = v.u();
    let (fu, fq) = {
        let mut fu = vec![0.0; (nx + 1) * nz];
        kernels::for_each_row(&mut fu, nx + 1, |j, row| {
            let srow = &sv[j * nx..(j + 1) * nx];
            let urow = &uv[j * (nx + 1)..(j + 1) * (nx + 1)];
            let s_in = inflow.eval(grid.cell_z(j));
            row[0] = if urow[0] >= 0.0 {
                urow[0] * frac_flow_unchecked(s_in, m)
            } else {
                urow[0] * frac_flow_unchecked(srow[0], m)
            };
            for i in 1..nx {
                let up = if urow[i] >= 0.0 { srow[i - 1] } else { srow[i] };
                row[i] = urow[i] * frac_flow_unchecked(up, m);
            }
            row[nx] = if urow[nx] >= 0.0 {
                urow[nx] * frac_flow_unchecked(srow[nx - 1], m)
            } else {
                0.0
            };
        });

        let qv = v.q();
        let mut fq = vec![0.0; nx * (nz + 1)];
        kernels::for_each_row(&mut fq[nx..nz * nx], nx, |j1, row| {
            // row j1 covers the interior face row j1 + 1
            let j = j1 + 1;
            let slo = &sv[(j - 1) * nx..j * nx];
            let shi = &sv[j * nx..(j + 1) * nx];
            let qrow = &qv[j * nx..(j + 1) * nx];
            for i in 0..nx {
                let up = if qrow[i] >= 0.0 { slo[i] } else { shi[i] };
                row[i] = qrow[i] * frac_flow_unchecked(up, m);
            }
        });
        (fu, fq)
    };
    flux.u_mut().copy_from_slice(&fu);
    flux.q_mut().copy_from_slice(&fq);
    flux
}
