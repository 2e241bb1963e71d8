use std::ptr;

use dense_bloch_ffi::*;

#[test]
fn groups_and_rates() {
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(db_groups_new(100.0, 0.01, &mut g), DbStatus::Ok);
        let (mut kappa, mut dd) = (0.0, 0.0);
        assert_eq!(db_groups_get(g, &mut kappa, &mut dd), DbStatus::Ok);
        assert!((kappa - 1.0).abs() < 1e-15);
        assert!((dd - 39.894228040143).abs() < 1e-9);
        let mut r = 0.0;
        assert_eq!(db_rate_spectral(g, 1.0, 0.0, &mut r), DbStatus::Ok);
        assert!((r - (std::f64::consts::E - 1.0)).abs() < 1e-12);
        assert_eq!(db_rate_averaged(g, 1.0, &mut r), DbStatus::Ok);
        assert!((r - 1.101755547733793).abs() < 1e-9);
        assert_eq!(db_rate_spectral(g, 1.5, 0.0, &mut r), DbStatus::InvalidArgument);
        db_groups_free(g);
    }
}

#[test]
fn decay_handle() {
    let mut g = ptr::null_mut();
    let mut d = ptr::null_mut();
    unsafe {
        assert_eq!(db_groups_new(0.0, 0.01, &mut g), DbStatus::Ok);
        assert_eq!(db_decay_run(g, 1.0, 5.0, 11, &mut d), DbStatus::Ok);
        let mut n = 0;
        assert_eq!(db_decay_len(d, &mut n), DbStatus::Ok);
        assert_eq!(n, 11);
        let mut s = DbDecaySample::default();
        assert_eq!(db_decay_get(d, 10, &mut s), DbStatus::Ok);
        assert!((s.rho_aa - (-5.0f64).exp()).abs() < 1e-8);
        assert_eq!(db_decay_get(d, 11, &mut s), DbStatus::OutOfRange);
        let mut flag = true;
        assert_eq!(db_decay_markov_violated(d, &mut flag), DbStatus::Ok);
        assert!(!flag);
        db_decay_free(d);
        db_groups_free(g);
    }
}

#[test]
fn holstein_rate() {
    let mut r = DbEscapeRate::default();
    unsafe {
        assert_eq!(db_holstein_escape_rate(10.0, 1.0, 64, &mut r), DbStatus::Ok);
        assert!(r.numeric > 0.0 && r.numeric < 1.0);
        assert!(r.asymptotic > 0.0);
        assert_eq!(db_holstein_escape_rate(10.0, 1.0, 4, &mut r), DbStatus::InvalidArgument);
    }
}

#[test]
fn branch_handle() {
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(
            db_bistability_branches(0.0, 0.0, 0.0, DbCollectiveMode::Off, 0.0, 2.0, 21, &mut b),
            DbStatus::Ok
        );
        let mut n = 0;
        db_branches_len(b, &mut n);
        assert_eq!(n, 21);
        let mut p = DbBranchPoint::default();
        assert_eq!(db_branches_get(b, 5, &mut p), DbStatus::Ok);
        assert!((p.rho_aa - 4.0 * 0.25 / (1.0 + 8.0 * 0.25)).abs() < 1e-12);
        assert!(p.stable);
        assert_eq!(db_branches_get(b, 21, &mut p), DbStatus::OutOfRange);
        db_branches_free(b);
        db_branches_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { std::ffi::CStr::from_ptr(db_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/dense_bloch.h")).unwrap();
    for name in [
        "db_groups_new",
        "db_groups_free",
        "db_decay_run",
        "db_branches_get",
        "db_holstein_escape_rate",
        "db_last_error_message",
        "typedef struct DbGroups DbGroups",
        "DB_STATUS_NUMERICAL",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("probe.c");
    std::fs::write(&src, "#include \"dense_bloch.h\"\nint main(void) { DbGroups *g = 0; (void)g; return DB_STATUS_OK; }\n").unwrap();
    let status = std::process::Command::new(cc).args(["-std=c99", "-fsyntax-only", "-I", dir]).arg(&src).status().unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
