//! Exact piecewise-constant flowfields and their projection onto a grid.

pub mod edney;
pub mod oblique;

use errest_core::{FieldSet, Grid2D, GridField, Quantity, VarTag};

use crate::error::{FlowError, Result};
use crate::gas::Primitive;

pub use edney::{build_edney1, build_edney6, build_region_map, Fan, Ray, RayKind, Region, RegionMap};
pub use oblique::{oblique_beta, shock_jump, ShockState, Turn};

/// Primitive fields (rho, U, V, P) from a point-wise state function.
pub fn primitive_fields(
    grid: Grid2D,
    label: &str,
    mut f: impl FnMut(f64, f64) -> Result<Primitive>,
) -> Result<FieldSet> {
    let mut states = Vec::with_capacity(grid.points());
    for my in 1..=grid.ny {
        for kx in 1..=grid.nx {
            let (x, y) = grid.center(kx, my);
            states.push(f(x, y)?);
        }
    }
    let pick = |q: Quantity| {
        let data = states
            .iter()
            .map(|s| match q {
                Quantity::Density => s.rho,
                Quantity::VelocityX => s.u,
                Quantity::VelocityY => s.v,
                _ => s.p,
            })
            .collect();
        GridField::new(grid, VarTag::value(q), data)
    };
    let fields = Quantity::PRIMITIVE.iter().map(|q| pick(*q)).collect::<errest_core::Result<Vec<_>>>()?;
    Ok(FieldSet::new(label, fields)?)
}

/// Point-sample the map at every cell center.
pub fn project_analytic(map: &RegionMap, grid: &Grid2D) -> Result<FieldSet> {
    primitive_fields(*grid, "analytic", |x, y| map.sample(x, y))
}

/// Numerical minus analytic, variable by variable.
pub fn true_error(numerical: &FieldSet, analytic: &FieldSet) -> Result<FieldSet> {
    if !numerical.grid().same_layout(analytic.grid()) || numerical.vars() != analytic.vars() {
        return Err(FlowError::Core(errest_core::Error::IncompatibleEnsemble(
            "numerical and analytic fields differ in grid or variables".into(),
        )));
    }
    let grid = *numerical.grid();
    let fields = numerical
        .fields()
        .iter()
        .zip(analytic.fields())
        .map(|(a, b)| {
            let d = a.raw().iter().zip(b.raw()).map(|(x, y)| x - y).collect();
            GridField::new(grid, a.var().as_error(), d)
        })
        .collect::<errest_core::Result<Vec<_>>>()?;
    Ok(FieldSet::new(numerical.label.clone(), fields)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::FlowCase;

    #[test]
    fn single_region_projects_to_constant() {
        let g = Grid2D::unit_square(7, 5).unwrap();
        let map = build_region_map(&FlowCase::free_stream(4.0, g)).unwrap();
        let f = project_analytic(&map, &g).unwrap();
        let p = f.field(VarTag::value(Quantity::Pressure)).unwrap();
        assert!(p.raw().iter().all(|v| *v == 1.0 / (1.4 * 16.0)));
    }

    #[test]
    fn projection_refinement_consistency() {
        // cell centers of the 50^2 grid coincide with every third center of 150^2
        let coarse = Grid2D::unit_square(50, 50).unwrap();
        let fine = Grid2D::unit_square(150, 150).unwrap();
        for case in [FlowCase::edney1(coarse), FlowCase::edney6(coarse)] {
            let map = build_region_map(&case).unwrap();
            let a = project_analytic(&map, &coarse).unwrap();
            let b = project_analytic(&map, &fine).unwrap();
            let rho = VarTag::value(Quantity::Density);
            let (fa, fb) = (a.field(rho).unwrap(), b.field(rho).unwrap());
            let mut mismatches = 0;
            for my in 1..=50 {
                for kx in 1..=50 {
                    let (xa, ya) = coarse.center(kx, my);
                    let (xb, yb) = fine.center(3 * kx - 1, 3 * my - 1);
                    assert!((xa - xb).abs() < 1e-14 && (ya - yb).abs() < 1e-14);
                    if fa.get(kx, my) != fb.get(3 * kx - 1, 3 * my - 1) {
                        mismatches += 1;
                    }
                }
            }
            // only floating rounding of a center exactly on a ray could differ
            assert!(mismatches <= 2, "{mismatches}");
        }
    }

    #[test]
    fn projection_across_grid_line_boundary() {
        // a shock along a grid line: exhaustive check of each side
        let g = Grid2D::unit_square(8, 8).unwrap();
        let up = Primitive::free_stream(4.0);
        let down = shock_jump(&up, std::f64::consts::FRAC_PI_2).unwrap();
        let f = primitive_fields(g, "t", |x, _| Ok(if x < 0.5 { up } else { down })).unwrap();
        let rho = f.field(VarTag::value(Quantity::Density)).unwrap();
        for my in 1..=8 {
            for kx in 1..=8 {
                let want = if kx <= 4 { up.rho } else { down.rho };
                assert_eq!(rho.get(kx, my), want);
            }
        }
    }

    #[test]
    fn true_error_sign_and_offset() {
        let g = Grid2D::unit_square(6, 4).unwrap();
        let map = build_region_map(&FlowCase::edney1(g)).unwrap();
        let a = project_analytic(&map, &g).unwrap();
        let zero = true_error(&a, &a).unwrap();
        assert!(zero.vectorize().iter().all(|v| *v == 0.0));
        let shifted = FieldSet::devectorize(
            &a.vectorize().iter().map(|v| v + 0.25).collect::<Vec<_>>(),
            g,
            &a.vars(),
            "num",
        )
        .unwrap();
        let e = true_error(&shifted, &a).unwrap();
        assert!(e.vectorize().iter().all(|v| (v - 0.25).abs() < 1e-15));
        assert_eq!(e.vars()[0].to_string(), "err:rho");
    }

    #[test]
    fn edney1_density_pattern() {
        let g = Grid2D::unit_square(100, 100).unwrap();
        let map = build_region_map(&FlowCase::edney1(g)).unwrap();
        let f = project_analytic(&map, &g).unwrap();
        let rho = f.field(VarTag::value(Quantity::Density)).unwrap();
        // free stream wedge on the left, compressed regions elsewhere
        assert_eq!(rho.get(1, 50), 1.0);
        assert!(rho.get(1, 1) > 2.0 && rho.get(1, 100) > 1.5);
        assert!(rho.get(100, 50) > rho.get(1, 1));
    }
}
