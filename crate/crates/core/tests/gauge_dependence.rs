use cliffgr::einstein;
use cliffgr::fixtures;
use cliffgr::geometry::Snapshot;

/// The same event in the standard and the quasi-Cartesian chart: the
/// curvature invariant agrees, the pseudo-current norm does not.
#[test]
fn pseudo_current_depends_on_the_chart() {
    let (r, th, ph) = (7.0f64, 1.1f64, 0.4f64);
    let polar = Snapshot::new(&fixtures::schwarzschild(), [0.5, r, th, ph], 3).unwrap();
    let cart = [0.5, r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()];
    let qc = Snapshot::new(&fixtures::schwarzschild_qc(), cart, 3).unwrap();

    assert!((polar.kretschmann() - qc.kretschmann()).abs() < 1e-12 * polar.kretschmann());
    let t_polar = einstein::pseudo_current_norm(&polar).unwrap();
    let t_qc = einstein::pseudo_current_norm(&qc).unwrap();
    println!("pseudo-current norm: standard {t_polar:e}, quasi-Cartesian {t_qc:e}");
    assert!(t_polar != 0.0 && t_qc != 0.0);
    assert!((t_polar - t_qc).abs() > 1e-6 * t_polar.abs().max(t_qc.abs()), "{t_polar} {t_qc}");
}
