//! Acceptance suite: the twelve exit criteria, each run at its stated
//! tolerance and trial count through the verification registry. One pass/fail
//! line is printed per criterion.

use regulus::verify::{run_suite, CheckReport};

const SEED: u64 = 42;

/// Runtime bounds are asserted strictly for optimized builds; debug builds
/// get a generous multiplier.
fn time_budget(seconds: f64) -> f64 {
    if cfg!(debug_assertions) {
        seconds * 40.0
    } else {
        seconds
    }
}

fn run(names: &[&str], trials: Option<u64>) -> Vec<CheckReport> {
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    run_suite(&names, SEED, trials).expect("suite runs")
}

fn report_criterion(n: usize, reports: &[CheckReport]) {
    let all_pass = reports.iter().all(|r| r.pass);
    let detail: Vec<String> = reports
        .iter()
        .map(|r| format!("{} {:.3e}≤{:.1e}", r.check, r.max_residual, r.tolerance))
        .collect();
    println!(
        "criterion {:>2}: {}  [{}]",
        n,
        if all_pass { "PASS" } else { "FAIL" },
        detail.join("; ")
    );
    for r in reports {
        assert!(
            r.pass,
            "criterion {n}: check '{}' residual {:.3e} exceeds {:.1e}",
            r.check, r.max_residual, r.tolerance
        );
    }
}

#[test]
fn criterion_01_hopf_fiber_invariance() {
    let reports = run(&["hopf_fiber"], Some(10_000));
    report_criterion(1, &reports);
}

#[test]
fn criterion_02_ks_form_pullbacks() {
    // finite-difference residual ≤ 1e-6 and exact-Jacobian residual ≤ 1e-10,
    // both folded into each check at its primary tolerance
    let reports = run(&["ks_one_form", "ks_two_form"], Some(1_000));
    report_criterion(2, &reports);
}

#[test]
fn criterion_03_orbit_correspondence() {
    let reports = run(&["prop_orbit_correspondence"], None);
    assert!(
        reports[0].wall_s <= time_budget(10.0),
        "orbit correspondence took {:.1}s",
        reports[0].wall_s
    );
    report_criterion(3, &reports);
}

#[test]
fn criterion_04_levi_civita_planes() {
    let reports = run(&["lc_plane_image", "lc_restriction_is_lc"], Some(100));
    report_criterion(4, &reports);
}

#[test]
fn criterion_05_quadric_image_classification() {
    // 100 quadrics of each of the four sign patterns
    let reports = run(&["quadric_image_classification"], Some(400));
    report_criterion(5, &reports);
}

#[test]
fn criterion_06_dual_collinearity() {
    let reports = run(&["dual_collinearity"], Some(100));
    report_criterion(6, &reports);
}

#[test]
fn criterion_07_kepler_hooke_billiard_correspondence() {
    // 20-reflection billiard; BL ≤ 1e-9 upstairs is folded into the check
    let reports = run(&["thm_kepler_hooke_billiard"], None);
    report_criterion(7, &reports);
}

#[test]
fn criterion_08_birkhoff_waldvogel_identities() {
    let reports = run(
        &[
            "bw_composition",
            "bw_planar_birkhoff",
            "bw_pullback_identities",
            "bw_symplectic",
            "lemma17_real_line",
        ],
        None,
    );
    report_criterion(8, &reports);
}

#[test]
fn criterion_09_ktilde_consistency_and_separation() {
    let reports = run(
        &["ktilde_spherical_consistency", "ktilde_separation", "reduced_conservation"],
        Some(1_000),
    );
    report_criterion(9, &reports);
}

#[test]
fn criterion_10_integrable_two_center_billiards() {
    let reports = run(&["billiard_spheres_cones_integrable", "thm22_equivalence"], None);
    let total: f64 = reports.iter().map(|r| r.wall_s).sum();
    assert!(total <= time_budget(60.0), "two-center billiards took {total:.1}s");
    report_criterion(10, &reports);
}

#[test]
fn criterion_11_collision_regularization() {
    // the transformed flow passes the collision while the physical flow
    // aborts; the check returns ∞ unless both halves hold
    let reports = run(&["collision_regularization"], None);
    report_criterion(11, &reports);
}

#[test]
fn criterion_12_lagrange_separation() {
    let reports = run(&["lagrange_separation"], Some(1_000));
    report_criterion(12, &reports);
}

#[test]
fn full_registry_passes() {
    // every registered check, including the ones beyond the numbered
    // criteria (confocal images, reflection correspondence, constraint-set
    // images, the deck-transformation probe)
    let reports = run(&[], None);
    assert_eq!(reports.len(), 25);
    for r in &reports {
        assert!(r.pass, "{} residual {:.3e} > {:.1e}", r.check, r.max_residual, r.tolerance);
    }
}
