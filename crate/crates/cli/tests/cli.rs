use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use foamfab_core::geometry::primitives::{cuboid, cylinder};
use foamfab_core::geometry::stl::write_binary;
use foamfab_core::geometry::TriangleMesh;
use foamfab_core::job::{parse_report_files, plan_job, JobConfig};
use tempfile::TempDir;

// Rate proportional to speed: cell area 3 mm^2 at every speed.
const CALIBRATION: &str = "hydration_ratio,speed_mm_min,rate_mm3_min\n0.5,200,600\n0.5,1200,3600\n";

fn foamfab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foamfab"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Job directory with one body in a 40 x 30 x 20 block.
fn job(mesh: &TriangleMesh, capacity: f64) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cal.csv"), CALIBRATION).unwrap();
    fs::write(dir.path().join("body.stl"), write_binary(mesh)).unwrap();
    fs::write(
        dir.path().join("job.toml"),
        format!(
            "version = 1\noutput_dir = \"out\"\ncalibration = \"cal.csv\"\ninject_speed = 600\n\
             syringe_capacity = {capacity}\n[foam]\nwidth = 40\ndepth = 30\nheight = 20\n\
             [[body]]\nmesh = \"body.stl\"\ninfill_ratio = 1.0\nhydration_ratio = 0.5\n"
        ),
    )
    .unwrap();
    dir
}

fn slab() -> TriangleMesh {
    cuboid([12.0, 8.0, 0.0], [28.0, 22.0, 12.0])
}

fn injection_files(out: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            p.file_name()
                .unwrap()
                .to_string_lossy()
                .starts_with("inject_")
        })
        .collect();
    files.sort();
    files
}

#[test]
fn large_syringe_gives_one_file() {
    let dir = job(&slab(), 1e6);
    let o = foamfab(dir.path(), &["--config", "job.toml", "slice"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    assert_eq!(injection_files(&out).len(), 1);
    assert!(out.join("mark.gcode").exists() && out.join("report.txt").exists());
}

#[test]
fn small_syringe_matches_the_planned_division() {
    let dir = job(&slab(), 300.0);
    let o = foamfab(dir.path(), &["--config", "job.toml", "slice"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let plan = plan_job(&JobConfig::load(&dir.path().join("job.toml")).unwrap()).unwrap();
    let files = injection_files(&dir.path().join("out"));
    assert!(files.len() >= 3);
    assert_eq!(files.len(), plan.files.len());
    for (path, planned) in files.iter().zip(&plan.files) {
        assert_eq!(path.file_name().unwrap().to_string_lossy(), planned.name);
        let text = fs::read_to_string(path).unwrap();
        let columns = text.lines().filter(|l| l.starts_with("; column ")).count();
        assert_eq!(columns, planned.print.columns.len());
    }
}

#[test]
fn report_totals_match_the_linted_files() {
    let dir = job(&slab(), 500.0);
    assert!(foamfab(dir.path(), &["--config", "job.toml", "slice"])
        .status
        .success());
    let report = fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    let rows = parse_report_files(&report).unwrap();
    let mut linted = 0.0;
    for (row, path) in rows.iter().zip(injection_files(&dir.path().join("out"))) {
        let o = foamfab(
            dir.path(),
            &["--config", "job.toml", "lint", path.to_str().unwrap()],
        );
        assert!(o.status.success(), "{}", stdout(&o));
        let text = stdout(&o);
        let v: f64 = text
            .lines()
            .find_map(|l| l.strip_prefix("dispensed: ")?.strip_suffix(" mm^3"))
            .unwrap()
            .parse()
            .unwrap();
        assert!((v - row.volume).abs() <= 1e-3, "{v} vs {}", row.volume);
        linted += v;
    }
    let total: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("volume_mm3: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((linted - total).abs() <= 1e-3 * rows.len() as f64);
}

#[test]
fn missing_calibration_is_a_user_error() {
    let dir = job(&slab(), 1e6);
    fs::remove_file(dir.path().join("cal.csv")).unwrap();
    let o = foamfab(dir.path(), &["--config", "job.toml", "slice"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cal.csv"), "{}", stderr(&o));
}

#[test]
fn bad_ratio_and_missing_config_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = foamfab(
        dir.path(),
        &["analyze", "mix", "--spa-grams", "1", "--ratio", "-1"],
    );
    assert_eq!(o.status.code(), Some(2));
    let o = foamfab(dir.path(), &["--config", "nope.toml", "slice"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.toml"));
}

#[test]
fn lint_flags_a_broken_file() {
    let dir = job(&slab(), 1e6);
    assert!(foamfab(dir.path(), &["--config", "job.toml", "slice"])
        .status
        .success());
    let path = &injection_files(&dir.path().join("out"))[0];
    let text = fs::read_to_string(path).unwrap().replace("M5\n", "");
    fs::write(path, text).unwrap();
    let o = foamfab(
        dir.path(),
        &["--config", "job.toml", "lint", path.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("line "));
}

fn preview(mesh: &TriangleMesh, capacity: f64) -> String {
    let dir = job(mesh, capacity);
    let o = foamfab(dir.path(), &["--config", "job.toml", "preview"]);
    assert!(o.status.success(), "{}", stderr(&o));
    fs::read_to_string(dir.path().join("out/preview.svg")).unwrap()
}

#[test]
fn preview_of_a_rosette_shows_seven_cells_and_labels() {
    // cell area 3 mm^2: neighbors at 1.86 mm, next ring at 3.2 mm
    let svg = preview(&cylinder([20.0, 15.0], 2.6, 0.0, 10.0, 48), 1e6);
    assert_eq!(svg.matches(r#"class="cell""#).count(), 7);
    assert_eq!(svg.matches(r#"class="order""#).count(), 7);
    for n in 1..=7 {
        assert!(svg.contains(&format!(">{n}</text>")));
    }
}

#[test]
fn preview_of_an_empty_footprint_shows_only_the_foam() {
    let svg = preview(&cuboid([20.1, 15.1, 0.0], [20.3, 15.3, 5.0]), 1e6);
    assert!(svg.contains(r#"class="foam""#));
    assert_eq!(svg.matches(r#"class="cell""#).count(), 0);
}

#[test]
fn preview_colors_cells_by_file() {
    // 7 columns of 30 mm^3 with room for 4 per file
    let svg = preview(&cylinder([20.0, 15.0], 2.6, 0.0, 10.0, 48), 125.0);
    let fills: BTreeSet<&str> = svg
        .lines()
        .filter(|l| l.contains(r#"class="cell""#))
        .map(|l| {
            l.split("fill=\"")
                .nth(1)
                .unwrap()
                .split('"')
                .next()
                .unwrap()
        })
        .collect();
    assert_eq!(fills.len(), 2);
}

#[test]
fn analyze_calculators() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let o = foamfab(dir.path(), args);
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
    };
    assert!(
        run(&["analyze", "mix", "--spa-grams", "1", "--ratio", "0.5"]).contains("water: 106 g")
    );
    assert!(run(&["analyze", "swell", "--dry-volume", "1"]).contains("swelled volume: 262 mm^3"));
    assert!(run(&["analyze", "joint", "--l", "0", "--t", "2"]).contains("theta: 0 rad (0 deg)"));
    assert!(run(&["analyze", "joint", "--l", "4", "--t", "2"]).contains("(90 deg)"));
    assert!(
        run(&["analyze", "drying", "--volume", "125000"]).contains("drying time: 120 h (estimate)")
    );
    assert!(
        run(&["analyze", "drying", "--volume", "125000", "--method", "salt"]).contains("2.4 h")
    );

    fs::write(
        dir.path().join("r.csv"),
        "timestamp_s,resistance_kohm\n0,60.73\n1,60.70\n2,56.60\n3,60.10\n",
    )
    .unwrap();
    let bends = run(&["analyze", "bends", "--csv", "r.csv", "--threshold", "0.05"]);
    assert!(
        bends.contains("events: 1") && bends.contains("drop 6.8%"),
        "{bends}"
    );
}
