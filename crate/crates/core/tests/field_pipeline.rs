//! Files on disk through to point-wise estimates and metrics.

use errest_core::inverse::solve_field;
use errest_core::metrics::{effectivity_index, ErrorReport};
use errest_core::{io, FieldSet, Grid2D, GridField, IpConfig, Quantity, SolutionEnsemble, SolverKind, VarTag};

fn exact(x: f64, y: f64) -> [f64; 2] {
    [1.0 + 0.5 * (3.0 * x).sin() * y, 2.0 + x * y]
}

fn solution(grid: Grid2D, label: &str, scale: f64) -> FieldSet {
    let e = |x: f64, y: f64| scale * (x - 0.3 * y).cos();
    let rho = GridField::from_fn(grid, VarTag::value(Quantity::Density), |x, y| exact(x, y)[0] + e(x, y)).unwrap();
    let p = GridField::from_fn(grid, VarTag::value(Quantity::Pressure), |x, y| exact(x, y)[1] - 0.5 * e(x, y)).unwrap();
    FieldSet::new(label, vec![rho, p]).unwrap()
}

#[test]
fn solutions_survive_disk_and_give_the_closed_form_estimate() {
    let grid = Grid2D::unit_square(9, 7).unwrap();
    let scales = [0.02, -0.05, 0.01, 0.03];
    let dir = tempfile::tempdir().unwrap();
    let mut loaded = Vec::new();
    for (j, s) in scales.iter().enumerate() {
        let set = solution(grid, &format!("s{j}"), *s);
        let (bin, csv) = (dir.path().join(format!("s{j}.fld")), dir.path().join(format!("s{j}.csv")));
        io::save_binary(&bin, &set).unwrap();
        io::save_csv(&csv, &set).unwrap();
        let a = io::load_binary(&bin).unwrap();
        let b = io::load_csv(&csv).unwrap();
        assert_eq!(a.vectorize(), set.vectorize());
        assert_eq!(b.vectorize(), set.vectorize());
        assert_eq!(b.label, set.label);
        loaded.push(a);
    }
    let ens = SolutionEnsemble::from_fields(&loaded).unwrap();
    let alpha = 1e-3;
    let est = solve_field(&ens, &IpConfig::with_alpha(alpha), SolverKind::ClosedForm).unwrap();
    let n = scales.len() as f64;
    let k = n / (n + alpha);
    let truth: Vec<Vec<f64>> = scales
        .iter()
        .map(|s| {
            let e = |x: f64, y: f64| s * (x - 0.3 * y).cos();
            let mut v = Vec::new();
            for f in [1.0, -0.5] {
                for kx in 1..=grid.nx {
                    for my in 1..=grid.ny {
                        let (x, y) = grid.center(kx, my);
                        v.push(f * e(x, y));
                    }
                }
            }
            v
        })
        .collect();
    for m in 0..ens.m() {
        let mean = truth.iter().map(|t| t[m]).sum::<f64>() / n;
        for (j, t) in truth.iter().enumerate() {
            let expect = k * (t[m] - mean);
            assert!((est.estimates[j][m] - expect).abs() < 1e-12, "m={m} j={j}");
        }
    }
    // The estimate misses only the common mean, so I_eff stays within the
    // bounds set by the mean-error norm.
    let pairs: Vec<(&str, &[f64])> = est.labels.iter().zip(&est.estimates).map(|(l, e)| (l.as_str(), e.as_slice())).collect();
    let truths: Vec<&[f64]> = truth.iter().map(Vec::as_slice).collect();
    let report = ErrorReport::build("four", "rho,P", grid.cell_area(), &pairs, &truths).unwrap();
    assert_eq!(report.records.len(), 4);
    for (r, (e, t)) in report.records.iter().zip(est.estimates.iter().zip(&truth)) {
        assert_eq!(r.i_eff.unwrap(), effectivity_index(e, t).unwrap());
    }
}

#[test]
fn mismatched_solutions_are_rejected() {
    let a = solution(Grid2D::unit_square(5, 5).unwrap(), "a", 0.1);
    let b = solution(Grid2D::unit_square(5, 6).unwrap(), "b", 0.1);
    let c = solution(Grid2D::unit_square(5, 5).unwrap(), "c", 0.2);
    assert!(SolutionEnsemble::from_fields(&[a.clone(), b, c.clone()]).is_err());
    assert!(SolutionEnsemble::from_fields(&[a, c]).is_err());
}
