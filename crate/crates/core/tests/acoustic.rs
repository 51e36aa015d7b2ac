use drp_core::acoustic1d::{run_with_errors, sweep, sweep_table, Acoustic1DConfig, Scheme};

fn final_error(n_cells: usize, courant: f64, scheme: Scheme) -> f64 {
    let cfg = Acoustic1DConfig { n_cells, courant, scheme, ..Default::default() };
    run_with_errors(&cfg).unwrap().final_error()
}

#[test]
fn optimized_wins_once_time_error_is_small() {
    // With a small Courant number the leapfrog phase error no longer masks
    // the spatial advantage of the optimized stencil.
    let opt = final_error(400, 0.05, Scheme::Optimized4);
    let conv = final_error(400, 0.05, Scheme::Conventional6);
    assert!(opt < conv, "optimized {opt} vs conventional {conv}");
}

#[test]
fn fine_three_point_run_stays_sane() {
    let e = final_error(1000, 0.2, Scheme::Conventional2);
    assert!(e < 0.15, "{e}");
}

#[test]
fn errors_grow_when_undersampled() {
    let template = Acoustic1DConfig::default();
    let entries = sweep(&template, &[250, 500]).unwrap();
    let (coarse, fine) = (&entries[0], &entries[1]);
    let coarse_min = coarse.optimized_final().min(coarse.conventional_final());
    let fine_max = fine.optimized_final().max(fine.conventional_final());
    assert!(coarse_min > fine_max, "{coarse_min} vs {fine_max}");
    assert_eq!(sweep_table(&entries).rows.len(), 4);
}

#[test]
fn higher_order_conventional_schemes_are_more_accurate() {
    let e2 = final_error(400, 0.2, Scheme::Conventional2);
    let e4 = final_error(400, 0.2, Scheme::Conventional4);
    let e6 = final_error(400, 0.2, Scheme::Conventional6);
    assert!(e2 > e4 && e4 > e6, "{e2} {e4} {e6}");
}

#[test]
fn sweep_is_deterministic() {
    let template = Acoustic1DConfig { t_end: 2.0, ..Default::default() };
    let a = sweep_table(&sweep(&template, &[300, 310, 320]).unwrap()).to_csv_string();
    let b = sweep_table(&sweep(&template, &[300, 310, 320]).unwrap()).to_csv_string();
    assert_eq!(a, b);
}
