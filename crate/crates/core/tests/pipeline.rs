//! Profile -> interpolant -> scenario, end to end at a small charge.

use quench_core::gravstates::GravitationalSpectrum;
use quench_core::potentials::PotentialModel;
use quench_core::quench::QuenchScenario;
use quench_core::reflection::{scan_profile, ProfileOptions, RhoProfile, SolverConfig, Surface};
use quench_core::units::Constants;

fn setup(q: f64) -> (RhoProfile, Constants) {
    let c = Constants::default();
    let s = Surface::from_constants(PotentialModel::default_two_scale(), &c);
    let p = scan_profile(&s, q, &ProfileOptions::for_charge(&s, q), &SolverConfig::default()).unwrap();
    (p, c)
}

fn scenario(p: &RhoProfile, c: &Constants, sigma: f64) -> QuenchScenario {
    let levels = GravitationalSpectrum::new(4, c).unwrap();
    QuenchScenario::new(p, levels, c.clone(), 1.0, sigma, 0.1).unwrap()
}

#[test]
fn q10_widths_are_consistent() {
    let (p, c) = setup(10.0);
    assert_eq!(p.unresolved_count(), 0);
    let s = scenario(&p, &c, 1e12);

    let sum = s.summary().unwrap();
    assert!(sum.d_in > 0.0 && sum.d_tr > 0.0);
    assert!(sum.d_tr < sum.d_in, "transitions should be rarer than absorption at Q = 10");
    assert!((sum.ratio - sum.d_tr / sum.d_in).abs() < 1e-6 * sum.ratio);
    assert!((sum.gamma_in - sum.gamma_d - sum.gamma_cp).abs() <= 1e-15 * sum.gamma_in);
    assert!((s.gamma_d_radial().unwrap() / sum.gamma_d - 1.0).abs() < 1e-9);
    assert!((s.gamma_t_radial().unwrap() / sum.gamma_t - 1.0).abs() < 1e-9);
    // Gamma_d equals Gamma_CP exactly at sigma_c
    let at_c = s.with_sigma(sum.sigma_c).unwrap();
    assert!((at_c.gamma_d().unwrap() / at_c.gamma_cp() - 1.0).abs() < 1e-12);
    // widths scale linearly with sigma, radii do not depend on it
    let half = s.with_sigma(5e11).unwrap();
    assert!((half.gamma_d().unwrap() * 2.0 / sum.gamma_d - 1.0).abs() < 1e-12);
    assert_eq!(half.d_in().unwrap(), sum.d_in);
    assert!(sum.r > 0.0 && sum.r < 1.0);
}

#[test]
fn csv_round_trip_reproduces_results() {
    let (p, c) = setup(10.0);
    let text = p.to_csv();
    let samples = RhoProfile::parse_samples(&format!("# header\n{text}")).unwrap();
    assert_eq!(samples.len(), p.samples.len());
    for (a, b) in samples.iter().zip(&p.samples) {
        assert_eq!(a.rho, b.rho);
        assert_eq!(a.a, b.a);
        assert_eq!(a.resolved, b.resolved);
    }
    let back = RhoProfile { samples, ..p.clone() };
    let (x, y) = (scenario(&p, &c, 1e12), scenario(&back, &c, 1e12));
    assert_eq!(x.d_in().unwrap(), y.d_in().unwrap());
    assert_eq!(x.d_tr().unwrap(), y.d_tr().unwrap());
}

#[test]
fn zero_charge_leaves_the_mirror_alone() {
    let (p, c) = setup(0.0);
    assert!(p.samples.iter().all(|s| s.a == p.a_cp));
    let s = scenario(&p, &c, 1e12);
    assert_eq!(s.d_in().unwrap(), 0.0);
    assert_eq!(s.d_tr().unwrap(), 0.0);
    let sum = s.summary().unwrap();
    assert_eq!(sum.gamma_in, sum.gamma_cp);
}

#[test]
fn malformed_csv_rows_are_rejected() {
    assert!(RhoProfile::parse_samples("1,2,3\n").is_err());
    assert!(RhoProfile::parse_samples("1,2,3,4,5,6,maybe\n").is_err());
}
