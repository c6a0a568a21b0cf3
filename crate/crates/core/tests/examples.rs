mod reconstruct_disk {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/reconstruct_disk.rs"));
}
mod dn_to_theta {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/dn_to_theta.rs"));
}
mod form_values {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/form_values.rs"));
}
mod characterize_pole {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/characterize_pole.rs"));
}
mod affine_waves {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/affine_waves.rs"));
}
mod data_checks {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data_checks.rs"));
}

#[test]
fn reconstruct_disk_runs() {
    assert!(reconstruct_disk::run_example().unwrap() < 1e-6);
}

#[test]
fn dn_to_theta_runs() {
    assert!(dn_to_theta::run_example().unwrap() < 1e-10);
}

#[test]
fn form_values_runs() {
    assert!(form_values::run_example().unwrap() < 1e-6);
}

#[test]
fn characterize_pole_runs() {
    assert_eq!(characterize_pole::run_example().unwrap(), 1);
}

#[test]
fn affine_waves_runs() {
    assert!(affine_waves::run_example().unwrap() < 1e-10);
}

#[test]
fn data_checks_runs() {
    let (green, perm) = data_checks::run_example().unwrap();
    assert!(green < 1e-8);
    assert_eq!(perm, vec![1, 0]);
}
