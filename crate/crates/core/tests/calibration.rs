//! Fits the `c₁` constants of the tolerance model. Run with
//! `cargo test --release -p ricci-core --test calibration -- --ignored --nocapture`
//! and freeze twice the printed values in `tolerance.rs`.

use ricci_core::connection::christoffel;
use ricci_core::difference::{adjointness_integrals, operator_l_forms_residual};
use ricci_core::verify::{fitted_c1, measure_sample_all, sample_pair, Identity};
use ricci_core::Chart;

const CALIBRATION_SEED: u64 = 1000;

#[test]
#[ignore]
fn calibrate_tolerances() {
    let mut table: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); Identity::ALL.len()];
    let (mut l_forms, mut adjoint) = (Vec::new(), Vec::new());
    for dim in [2, 3] {
        for points in [32, 64] {
            let dx = std::f64::consts::TAU / points as f64;
            let count = if dim == 3 && points == 64 { 3 } else { 8 };
            for id in 0..count {
                let ms = measure_sample_all(&Identity::ALL, dim, points, CALIBRATION_SEED, id, None).unwrap();
                for (row, m) in table.iter_mut().zip(ms) {
                    row.push((m.residual, m.scale, dx));
                }
                let chart = Chart::periodic(dim, points, std::f64::consts::TAU).unwrap();
                let pair = sample_pair(&chart, CALIBRATION_SEED, id).unwrap();
                let (r, s) = operator_l_forms_residual(&pair, pair.h());
                l_forms.push((r, s, dx));
                let gt = pair.g_tilde();
                let (l, r) =
                    adjointness_integrals(gt, &christoffel(gt), pair.h(), pair.b(), pair.points()).unwrap();
                adjoint.push(((l - r).abs(), l.abs().max(r.abs()), dx));
            }
        }
    }
    for (identity, row) in Identity::ALL.iter().zip(&table) {
        println!("{:24} c1 = {:.3e}", identity.id(), fitted_c1(row));
    }
    println!("{:24} c1 = {:.3e}", "operator-l-forms", fitted_c1(&l_forms));
    println!("{:24} c1 = {:.3e}", "adjointness", fitted_c1(&adjoint));
}
