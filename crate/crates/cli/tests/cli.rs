use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use magnon_cli::RunConfig;

const BASE: &str = r#"
[cavity]
f_c = 10.632e9
kappa_e = 2.1e6
kappa_i = 0.6e6

[material]
diameter = 0.75e-3
"#;

const KITTEL: &str = r#"
[[modes]]
label = "K"
g = 67.3e6
gamma = 1.1e6
delta = 1.80e-3
field_map = { kind = "kittel" }
"#;

fn example_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/two_mode_075.toml")
}

fn magnon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magnon")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let h = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (h, rows)
}

fn col(h: &[String], name: &str) -> usize {
    h.iter().position(|x| x == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = RunConfig::load(&example_config()).unwrap();
    let text = cfg.to_toml().unwrap();
    assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    assert_eq!(cfg.modes.len(), 2);
    assert_eq!(cfg.fit.as_ref().unwrap().free.len(), 4);
}

#[test]
fn unknown_keys_and_bad_grids_are_rejected() {
    assert!(RunConfig::from_toml(&format!("{BASE}\nbogus = 1\n")).is_err());
    let bad = format!("{BASE}[sweep]\nfield = {{ start = 0.4, stop = 0.3, count = 3 }}\nfrequency = {{ start = 1e9, stop = 2e9, count = 3 }}\n");
    assert!(RunConfig::from_toml(&bad).is_err());
    let zero = format!("{BASE}[sweep]\nfield = {{ start = 0.4, stop = 0.4, count = 1 }}\nfrequency = {{ start = 1e9, stop = 2e9, count = 0 }}\n");
    assert!(RunConfig::from_toml(&zero).is_err());
}

#[test]
fn beta_db_sets_every_mode() {
    let mut cfg = RunConfig::load(&example_config()).unwrap();
    cfg.apply_beta_db(10.0).unwrap();
    assert!(cfg.modes.iter().all(|m| (m.beta - 10.0).abs() < 1e-12));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // unreadable config
    assert_eq!(magnon(&["derive", "/nonexistent.toml"]).status.code(), Some(2));
    // invalid config
    let bad = write(dir.path(), "bad.toml", "[cavity]\nf_c = 1.0\n");
    assert_eq!(magnon(&["derive", &bad]).status.code(), Some(2));
    // spectrum over several fields
    let ex = example_config();
    assert_eq!(magnon(&["spectrum", ex.to_str().unwrap()]).status.code(), Some(2));
    // numeric domain: two coefficients from one point
    let pts = write(dir.path(), "p.csv", "diameter_m,value\n1e-3,2.0\n");
    assert_eq!(magnon(&["scaling", &pts, "-m", "offset_plus_inverse"]).status.code(), Some(3));
}

fn single_field_config(dir: &Path, modes: &str, count: usize) -> String {
    let text = format!(
        "{BASE}{modes}\n[sweep]\nfield = {{ start = 0.3797, stop = 0.3797, count = 1 }}\n\
         frequency = {{ start = 10.5e9, stop = 10.76e9, count = {count} }}\nseed = 11\n"
    );
    write(dir, "cfg.toml", &text)
}

#[test]
fn spectrum_single_point_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = single_field_config(dir.path(), KITTEL, 1);
    let (h, rows) = csv_rows(&stdout(&magnon(&["spectrum", &cfg])));
    assert_eq!(rows.len(), 1);
    assert_eq!(h.len(), 1 + 3 * 4 + 1);
    assert_eq!(h.last().unwrap(), "eta");
    let r = &rows[0];
    let get = |n: &str| r[col(&h, n)].parse::<f64>().unwrap();
    // S11 = 1 + S21 and eta = |S31|^2 for one mode
    assert!((get("re_s11") - 1.0 - get("re_s21")).abs() < 1e-12);
    assert!((get("im_s11") - get("im_s21")).abs() < 1e-12);
    assert_eq!(get("eta"), get("abs2_s31_K"));
}

#[test]
fn bare_cavity_spectrum_and_dark_eta_map() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = single_field_config(dir.path(), "", 51);
    let (h, rows) = csv_rows(&stdout(&magnon(&["spectrum", &cfg])));
    assert_eq!(h.len(), 1 + 2 * 4 + 1);
    assert!(rows.iter().all(|r| r[col(&h, "eta")].parse::<f64>().unwrap() == 0.0));

    let sweep = "[sweep]\nfield = { start = 0.37, stop = 0.39, count = 4 }\n\
                 frequency = { start = 10.5e9, stop = 10.7e9, count = 9 }\nobservable = \"eta\"\n";
    // conversion needs at least one mode
    let bare = write(dir.path(), "bare.toml", &format!("{BASE}{sweep}"));
    assert_eq!(magnon(&["map", &bare]).status.code(), Some(3));

    let dark = KITTEL.replace("delta = 1.80e-3", "delta = 0.0");
    let map_cfg = write(dir.path(), "map.toml", &format!("{BASE}{dark}{sweep}"));
    let (h, rows) = csv_rows(&stdout(&magnon(&["map", &map_cfg])));
    assert_eq!(h, ["B_T", "f_hz", "value"]);
    assert_eq!(rows.len(), 36);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn noisy_spectrum_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = single_field_config(dir.path(), KITTEL, 41);
    let a = stdout(&magnon(&["spectrum", &cfg, "--noise", "0.01"]));
    let b = stdout(&magnon(&["spectrum", &cfg, "--noise", "0.01"]));
    let clean = stdout(&magnon(&["spectrum", &cfg]));
    assert_eq!(a, b);
    assert_ne!(a, clean);
}

#[test]
fn map_observable_override_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.csv");
    let ex = example_config();
    let o = magnon(&["map", ex.to_str().unwrap(), "--observable", "s31_power:M", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let (_, rows) = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 81 * 701);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() >= 0.0));
    let bad = magnon(&["map", ex.to_str().unwrap(), "--observable", "s31_power:Q"]);
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn modes_table_matches_closed_forms() {
    let ex = example_config();
    let (h, rows) = csv_rows(&stdout(&magnon(&["modes", ex.to_str().unwrap()])));
    assert_eq!(rows.len(), 5 * 5);
    let st = col(&h, "status");
    assert!(rows.iter().all(|r| r[st] == "match"), "{rows:?}");
}

#[test]
fn derive_reports_reference_deviations() {
    let ex = example_config();
    let (h, rows) = csv_rows(&stdout(&magnon(&["derive", ex.to_str().unwrap()])));
    assert_eq!(h, ["quantity", "mode", "derived", "reference", "rel_dev"]);
    let find = |q: &str, m: &str| rows.iter().find(|r| r[0] == q && r[1] == m).unwrap();
    let delta_m: f64 = find("delta", "msm")[4].parse().unwrap();
    assert!(delta_m.abs() < 0.05, "{delta_m}");
    let eta = find("eta", "");
    assert!(eta[4].parse::<f64>().unwrap().abs() < 0.05);
}

#[test]
fn derive_without_reference_leaves_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[cavity]\nf_c = 10.632e9\nkappa_e = 2.1e6\nkappa_i = 0.6e6\n[material]\ndiameter = 0.6e-3\n\
                [derive]\nkittel = { g = 50e6, gamma = 1e6 }\nmsm = { g = 3e6, gamma = 1e6 }\n";
    let cfg = write(dir.path(), "d.toml", text);
    let (_, rows) = csv_rows(&stdout(&magnon(&["derive", &cfg])));
    assert!(rows.iter().all(|r| r[3].is_empty() && r[4].is_empty()));
}

#[test]
fn scaling_fit_recovers_exact_law() {
    let dir = tempfile::tempdir().unwrap();
    // value = 2 / x^2 with x = sqrt(V / mm^3); last point excluded
    let mut csv = String::from("diameter_m,value,include\n");
    for (d, inc) in [(0.45e-3, true), (0.75e-3, true), (1.0e-3, true), (1.2e-3, false)] {
        let x = magnon_core::coupling::size_coordinate(d).unwrap();
        let v = if inc { 2.0 / (x * x) } else { 99.0 };
        csv.push_str(&format!("{d:e},{v:e},{inc}\n"));
    }
    let pts = write(dir.path(), "p.csv", &csv);
    let out: toml::Table = stdout(&magnon(&["scaling", &pts, "-m", "inverse_square"])).parse().unwrap();
    let a = out["coefficients"].as_array().unwrap()[0].as_float().unwrap();
    assert!((a - 2.0).abs() < 1e-12);
    assert!(out["rms_residual"].as_float().unwrap() < 1e-12);
    let pts = out["points"].as_array().unwrap();
    assert_eq!(pts[3]["included"].as_bool(), Some(false));
}

const FIT_FREE: &str = r#"
[fit]
[[fit.free]]
id = "f_c"
lower = 10.60e9
upper = 10.66e9
init = 10.6325e9

[[fit.free]]
id = "kappa_e"
lower = 0.5e6
upper = 10e6
init = 2.5e6

[[fit.free]]
id = "g:K"
lower = 1e6
upper = 100e6
init = 60e6

[[fit.free]]
id = "gamma:K"
lower = 0.1e6
upper = 10e6
init = 1.3e6
"#;

#[test]
fn fit_recovers_noiseless_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{BASE}{KITTEL}\n[sweep]\nfield = {{ start = 0.3797, stop = 0.3797, count = 1 }}\n\
         frequency = {{ start = 10.5e9, stop = 10.76e9, count = 601 }}\n{FIT_FREE}"
    );
    let cfg = write(dir.path(), "fit.toml", &text);
    let data = dir.path().join("s.csv");
    assert!(magnon(&["spectrum", &cfg, "--out", data.to_str().unwrap()]).status.success());
    let report = dir.path().join("r.toml");
    let o = magnon(&["fit", &cfg, "--data", data.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: toml::Table = std::fs::read_to_string(&report).unwrap().parse().unwrap();
    assert_eq!(r["converged"].as_bool(), Some(true));
    let est = r["estimates"].as_table().unwrap();
    for (k, truth) in [("f_c", 10.632e9), ("kappa_e", 2.1e6), ("g:K", 67.3e6), ("gamma:K", 1.1e6)] {
        let v = est[k].as_float().unwrap();
        assert!(((v - truth) / truth).abs() < 1e-6, "{k}: {v}");
    }
}

#[test]
fn fit_singular_problem_exits_4_with_report() {
    let dir = tempfile::tempdir().unwrap();
    // with g = 0 the linewidth has no effect on S21
    let modes = "[[modes]]\nlabel = \"K\"\ng = 0.0\ngamma = 1.1e6\nfield_map = { kind = \"kittel\" }\n";
    let text = format!(
        "{BASE}{modes}\n[sweep]\nfield = {{ start = 0.3797, stop = 0.3797, count = 1 }}\n\
         frequency = {{ start = 10.6e9, stop = 10.66e9, count = 201 }}\n\
         [fit]\n[[fit.free]]\nid = \"kappa_e\"\nlower = 0.5e6\nupper = 10e6\n\
         [[fit.free]]\nid = \"gamma:K\"\nlower = 0.1e6\nupper = 10e6\ninit = 2e6\n"
    );
    let cfg = write(dir.path(), "fit.toml", &text);
    let data = dir.path().join("s.csv");
    assert!(magnon(&["spectrum", &cfg, "--out", data.to_str().unwrap()]).status.success());
    let report = dir.path().join("r.toml");
    let o = magnon(&["fit", &cfg, "--data", data.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let r: toml::Table = std::fs::read_to_string(&report).unwrap().parse().unwrap();
    assert_eq!(r["converged"].as_bool(), Some(false));
}

#[test]
fn fit_rejects_malformed_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = single_field_config(dir.path(), KITTEL, 3);
    let text = std::fs::read_to_string(&cfg).unwrap() + FIT_FREE;
    let cfg = write(dir.path(), "f.toml", &text);
    let data = write(dir.path(), "d.csv", "f_hz,re_s11,im_s11\n1e9,1,0\n");
    assert_eq!(magnon(&["fit", &cfg, "--data", &data]).status.code(), Some(2));
    let data = write(dir.path(), "d2.csv", "f_hz,re_s21,im_s21\n1e9,x,0\n");
    assert_eq!(magnon(&["fit", &cfg, "--data", &data]).status.code(), Some(2));
}

#[test]
fn derive_all_reference_columns_via_output_key() {
    let dir = tempfile::tempdir().unwrap();
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["derive_045.toml", "derive_100.toml", "two_mode_075.toml"] {
        let out = dir.path().join(format!("{name}.csv"));
        let text = format!(
            "output = {:?}\n{}",
            out.to_str().unwrap(),
            std::fs::read_to_string(configs.join(name)).unwrap()
        );
        let cfg = write(dir.path(), name, &text);
        let o = magnon(&["derive", &cfg]);
        assert!(o.status.success() && o.stdout.is_empty());
        let (_, rows) = csv_rows(&std::fs::read_to_string(&out).unwrap());
        let eta = rows.iter().find(|r| r[0] == "eta").unwrap();
        assert!(eta[4].parse::<f64>().unwrap().abs() < 0.06, "{name}: {eta:?}");
    }
}
