use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dlo_cli::rundir::{RunManifest, RunStatus, RunSummary};
use dlo_core::topology::SortedPolyline;
use dlo_core::worldsim::Scenario;

fn dlo(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlo"))
        .args(args)
        .current_dir(dir)
        .env_remove("DLO_SEED")
        .output()
        .expect("spawn dlo")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scene(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let file = format!("{name}.toml");
    let o = dlo(&["gen-scene", name, "--seed", &seed.to_string(), "--out", &file], dir);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    dir.join(file)
}

fn count(svg: &str, class: &str) -> usize {
    svg.matches(&format!(r#"class="{class}""#)).count()
}

#[test]
fn gen_scene_is_deterministic_and_covers_the_crossing() {
    let tmp = tempfile::tempdir().unwrap();
    let a = scene(tmp.path(), "cs1_occluded", 7);
    let first = std::fs::read(&a).unwrap();
    let b = scene(tmp.path(), "cs1_occluded", 7);
    assert_eq!(first, std::fs::read(b).unwrap());
    let sc = Scenario::read(&a).unwrap();
    assert_eq!(sc.seed, 7);
    assert_eq!(sc.occluders.len(), 1);
}

#[test]
fn unknown_template_and_bad_config_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dlo(&["gen-scene", "nosuch"], tmp.path());
    assert_eq!(code(&o), 1);
    for name in ["cs1_plain", "cs1_occluded", "cs2_plain", "cs2_occluded"] {
        assert!(stderr(&o).contains(name));
    }
    let path = scene(tmp.path(), "cs2_plain", 1);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replace("schema_version = 1", "schema_version = 1\nbogus = 3")).unwrap();
    let o = dlo(&["gen-scene", path.to_str().unwrap(), "--seed", "2"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));
}

#[test]
fn cs2_plain_gives_two_single_segment_splines() {
    let tmp = tempfile::tempdir().unwrap();
    scene(tmp.path(), "cs2_plain", 3);
    let o = dlo(&["run", "cs2_plain.toml", "--out", "r"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let run = tmp.path().join("r");
    let summary = RunSummary::read(&run).unwrap();
    assert_eq!(summary.clusters.len(), 2);
    for c in &summary.clusters {
        let dir = run.join(format!("cluster_{:02}", c.index));
        assert!(dir.join("spline_00.toml").exists());
        assert!(!dir.join("spline_01.toml").exists());
        let sorted = SortedPolyline::parse_csv(&std::fs::read_to_string(dir.join("sorted_final.csv")).unwrap()).unwrap();
        assert_eq!(sorted.endpoint_count(), 2);
    }
}

#[test]
fn vision_only_is_partial_and_plots_an_empty_tactile_cloud() {
    let tmp = tempfile::tempdir().unwrap();
    scene(tmp.path(), "cs1_occluded", 42);
    let o = dlo(&["run", "cs1_occluded.toml", "--no-tactile", "--out", "v"], tmp.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let run = tmp.path().join("v");
    let m = RunManifest::read(&run).unwrap();
    assert_eq!(m.status, RunStatus::Partial);
    assert!(!m.tactile);
    assert!(RunSummary::read(&run).unwrap().clusters[0].segments > 1);

    let o = dlo(&["plot", "v"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let plots = run.join("plots");
    assert_eq!(std::fs::read_dir(&plots).unwrap().count(), 7);
    let tactile = std::fs::read_to_string(plots.join("cluster_00_P_tactile.svg")).unwrap();
    assert_eq!(count(&tactile, "axes"), 1);
    assert_eq!(count(&tactile, "point") + count(&tactile, "endpoint"), 0);
    let sorted_svg = std::fs::read_to_string(plots.join("cluster_00_P_sorted.svg")).unwrap();
    let csv = std::fs::read_to_string(run.join("cluster_00/P_sorted.csv")).unwrap();
    let sorted = SortedPolyline::parse_csv(&csv).unwrap();
    assert_eq!(count(&sorted_svg, "endpoint"), sorted.endpoint_count());
    assert!(sorted.endpoint_count() > 2);
}

#[test]
fn full_run_plots_endpoints_and_evaluates() {
    let tmp = tempfile::tempdir().unwrap();
    scene(tmp.path(), "cs1_occluded", 42);
    scene(tmp.path(), "cs1_plain", 42);
    assert_eq!(code(&dlo(&["run", "cs1_occluded.toml", "--out", "occ"], tmp.path())), 0);
    assert_eq!(code(&dlo(&["run", "cs1_plain.toml", "--out", "plain"], tmp.path())), 0);
    let o = dlo(&["plot", "occ", "--out", "svg"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let svg = |n: &str| std::fs::read_to_string(tmp.path().join(format!("svg/cluster_00_{n}.svg"))).unwrap();
    let interp = svg("P_interpolated");
    assert_eq!(count(&interp, "endpoint"), 2);
    assert_eq!(count(&interp, "segment"), 1);
    let line = interp.lines().find(|l| l.contains(r#"class="segment""#)).unwrap();
    assert_eq!(line.split("points=\"").nth(1).unwrap().split_whitespace().count(), 200);
    assert!(count(&svg("P_tactile"), "point") > 0);

    let o = dlo(&["eval", "occ", "plain"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: dlo_cli::EvalReport =
        toml::from_str(&std::fs::read_to_string(tmp.path().join("occ/eval.toml")).unwrap()).unwrap();
    assert_eq!(report.cables.len(), 1);
    assert!(report.cables[0].rmse < 0.005);
    assert!(report.runtime_s.is_some());

    // against itself the reconstruction is registered onto itself
    let o = dlo(&["eval", "occ", "occ", "--out", "self"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: dlo_cli::EvalReport =
        toml::from_str(&std::fs::read_to_string(tmp.path().join("self/eval.toml")).unwrap()).unwrap();
    assert!(report.cables[0].rmse < 1e-12);

    // a scenario file is run in memory as the unoccluded reference
    let o = dlo(&["eval", "occ", "cs1_occluded.toml", "--out", "scen"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let by_scenario: dlo_cli::EvalReport =
        toml::from_str(&std::fs::read_to_string(tmp.path().join("scen/eval.toml")).unwrap()).unwrap();
    assert!(by_scenario.cables[0].rmse < 0.005);

    std::fs::remove_file(tmp.path().join("occ/cluster_00/P_interpolated.ply")).unwrap();
    let o = dlo(&["eval", "occ", "plain"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("P_interpolated.ply"), "{}", stderr(&o));
}

#[test]
fn two_cable_eval_reports_both_cables() {
    let tmp = tempfile::tempdir().unwrap();
    scene(tmp.path(), "cs2_occluded", 5);
    scene(tmp.path(), "cs2_plain", 5);
    assert_eq!(code(&dlo(&["run", "cs2_occluded.toml", "--out", "occ"], tmp.path())), 0);
    assert_eq!(code(&dlo(&["run", "cs2_plain.toml", "--out", "plain"], tmp.path())), 0);
    let report = dlo_cli::cmd_eval(&tmp.path().join("occ"), &tmp.path().join("plain"), None).unwrap();
    assert_eq!(report.cables.len(), 2);
    assert_ne!(report.cables[0].truth_cable, report.cables[1].truth_cable);
    assert_ne!(report.cables[0].reference_cluster, report.cables[1].reference_cluster);
}

#[test]
fn probe_budget_exhaustion_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    scene(tmp.path(), "cs1_occluded", 42);
    std::fs::write(tmp.path().join("p.toml"), "[explore]\nprobe_budget = 20\n").unwrap();
    let o = dlo(&["run", "cs1_occluded.toml", "--params", "p.toml", "--out", "b"], tmp.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let m = RunManifest::read(&tmp.path().join("b")).unwrap();
    assert_eq!(m.status, RunStatus::BudgetExhausted);
    assert_eq!(m.params.as_deref(), Some("p.toml"));
    assert!(m.error.unwrap().contains("explore"));
}

#[test]
fn bad_params_are_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    scene(tmp.path(), "cs2_plain", 1);
    std::fs::write(tmp.path().join("p.toml"), "[recon]\nd_mm = 0.1\n").unwrap();
    let o = dlo(&["run", "cs2_plain.toml", "--params", "p.toml"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("p.toml"));
}

#[test]
fn seed_flag_overrides_environment() {
    let tmp = tempfile::tempdir().unwrap();
    scene(tmp.path(), "cs2_plain", 1);
    let run = |args: &[&str]| {
        let o = Command::new(env!("CARGO_BIN_EXE_dlo"))
            .args(args)
            .current_dir(tmp.path())
            .env("DLO_SEED", "5")
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    };
    run(&["run", "cs2_plain.toml", "--out", "env"]);
    run(&["run", "cs2_plain.toml", "--seed", "9", "--out", "flag"]);
    assert_eq!(RunManifest::read(&tmp.path().join("env")).unwrap().seed, 5);
    assert_eq!(RunManifest::read(&tmp.path().join("flag")).unwrap().seed, 9);
    let sc = std::fs::read_to_string(tmp.path().join("flag/scenario.toml")).unwrap();
    assert_eq!(Scenario::from_toml(&sc).unwrap().seed, 9);
}
