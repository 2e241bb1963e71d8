use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dense-bloch"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn conf(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn decay_columns_and_header() {
    let tmp = tempfile::tempdir().unwrap();
    let c = conf(tmp.path(), "d.conf", "scenario = decay\n[medium]\neta = 100\ng = 0.01\n[decay]\nrho_aa0 = 1\nt_end = 20\n");
    let o = run(&["decay"], &c, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(tmp.path().join("out/decay.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(concat!("# version = ", env!("CARGO_PKG_VERSION"))));
    let header: Vec<&str> = text.lines().filter(|l| l.starts_with("# ")).collect();
    for key in ["scenario", "eta", "g", "kappa", "rho_aa0", "t_end", "ode_error_tol"] {
        assert!(header.iter().any(|l| l.starts_with(&format!("# {key} = "))), "{key}");
    }
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "t,rho_aa,Gamma_over_gamma,Gamma_eff_over_gamma");
    assert_eq!(data.len(), 202);
    assert!(!text.contains('\r'));
}

#[test]
fn markov_flag_exit_4_still_writes() {
    let tmp = tempfile::tempdir().unwrap();
    let c = conf(tmp.path(), "d.conf", "scenario = decay\n[medium]\neta = 500\ng = 0.01\n[decay]\nrho_aa0 = 1\nt_end = 5\n");
    let o = run(&["decay"], &c, tmp.path());
    assert_eq!(o.status.code(), Some(4));
    let text = std::fs::read_to_string(tmp.path().join("decay.csv")).unwrap();
    assert!(text.contains("# markov_violated = true"));
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = conf(tmp.path(), "m.conf", "scenario = decay\n[medium]\ng = 0.01\n[decay]\nrho_aa0 = 1\nt_end = 20\n");
    let o = run(&["decay", "--validate"], &missing, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("medium.eta"));

    let unknown = conf(tmp.path(), "u.conf", "scenario = holstein\n[medium]\nkappa = 10\nfoo = 1\n");
    assert_eq!(run(&["holstein"], &unknown, tmp.path()).status.code(), Some(2));

    let ok = conf(tmp.path(), "ok.conf", "scenario = holstein\n[medium]\nkappa = 10\n");
    assert_eq!(run(&["decay"], &ok, tmp.path()).status.code(), Some(2));
    assert_eq!(run(&["nonsense"], &ok, tmp.path()).status.code(), Some(2));
}

#[test]
fn validate_prints_groups_without_running() {
    let tmp = tempfile::tempdir().unwrap();
    let si = "atom_density = 1e17\ntransition_wavelength = 5e-7\nrest_frequency = 3.76991118431e15\nradiative_rate = 1e7\ndoppler_width = 3.98942280401e8\nsample_length = 2e-3\n";
    let consistent = conf(tmp.path(), "c.conf", &format!("scenario = rates\n[medium]\n{si}eta = 50\n[rates]\nrho_aa = 1\n"));
    let out_dir = tmp.path().join("never");
    let o = run(&["rates", "--validate"], &consistent, &out_dir);
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.contains("kappa = ") && s.contains("cooperativity = ") && s.contains("slab_parameter = "));
    assert!(!out_dir.exists());

    let clash = conf(tmp.path(), "x.conf", &format!("scenario = rates\n[medium]\n{si}eta = 51\n[rates]\nrho_aa = 1\n"));
    let o = run(&["rates", "--validate"], &clash, &out_dir);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("inconsistent"));
}

#[test]
fn bistability_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let c = conf(tmp.path(), "b.conf", "scenario = bistability\n[medium]\ncooperativity = 5\n[bistability]\ncollective = off\n");
    let o = run(&["bistability"], &c, tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(tmp.path().join("bistability.csv")).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "Omega_over_gamma,branch_id,rho_aa,stable");
    assert!(data.iter().any(|l| l.contains(",1,") && l.ends_with(",false")));
}

#[test]
fn light_shift_flag_adds_column() {
    let tmp = tempfile::tempdir().unwrap();
    let c = conf(tmp.path(), "r.conf", "scenario = rates\n[medium]\neta = 100\ng = 0.01\n[rates]\nrho_aa = 0.9\ndetuning_points = 5\n");
    let o = run(&["rates", "--light-shift"], &c, tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(tmp.path().join("rates.csv")).unwrap();
    assert!(text.contains("H_over_gamma"));
    assert_eq!(run(&["holstein", "--light-shift"], &c, tmp.path()).status.code(), Some(2));
}

#[test]
fn thread_cap_does_not_change_output() {
    let tmp = tempfile::tempdir().unwrap();
    let c = conf(tmp.path(), "h.conf", "scenario = holstein\n[medium]\nkappa = 30\n[holstein]\nnode_count = 128\n");
    let mut outs = Vec::new();
    for threads in ["1", "0", "3"] {
        let dir = tmp.path().join(format!("t{threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_dense-bloch"))
            .env("DENSE_BLOCH_THREADS", threads)
            .args(["holstein", "--config"])
            .arg(&c)
            .arg("--out")
            .arg(&dir)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        outs.push(std::fs::read(dir.join("holstein.csv")).unwrap());
    }
    assert!(outs.windows(2).all(|w| w[0] == w[1]));
}
