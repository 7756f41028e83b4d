use std::fs;
use std::path::Path;

use foamfab_core::gcode::{parse, simulate, SimConfig};
use foamfab_core::geometry::primitives::{cuboid, cylinder};
use foamfab_core::geometry::stl::write_binary;
use foamfab_core::geometry::{GeometryError, TriangleMesh};
use foamfab_core::job::{
    parse_report_files, plan_job, write_preview, write_slice, JobConfig, JobError,
};
use tempfile::TempDir;

// Rate proportional to speed: cell area 3 mm^2 at ratio 0.5, 4 mm^2 at 1.0.
const CALIBRATION: &str = "hydration_ratio,speed_mm_min,rate_mm3_min
0.5,200,600
0.5,1200,3600
1.0,200,800
1.0,1200,4800
";

struct Job {
    dir: TempDir,
    bodies: String,
    capacity: f64,
}

impl Job {
    fn new(capacity: f64) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("cal.csv"), CALIBRATION).unwrap();
        Self {
            dir,
            bodies: String::new(),
            capacity,
        }
    }

    fn body(mut self, name: &str, mesh: &TriangleMesh, infill: f64, hydration: f64) -> Self {
        fs::write(self.dir.path().join(name), write_binary(mesh)).unwrap();
        self.bodies += &format!(
            "\n[[body]]\nmesh = \"{name}\"\ninfill_ratio = {infill}\nhydration_ratio = {hydration}\n"
        );
        self
    }

    fn config(&self) -> JobConfig {
        let text = format!(
            "version = 1\noutput_dir = \"out\"\ncalibration = \"cal.csv\"\ninject_speed = 600\n\
             syringe_capacity = {}\n[foam]\nwidth = 40\ndepth = 30\nheight = 20\n{}",
            self.capacity, self.bodies
        );
        let path = self.dir.path().join("job.toml");
        fs::write(&path, text).unwrap();
        JobConfig::load(&path).unwrap()
    }

    fn out(&self) -> std::path::PathBuf {
        self.dir.path().join("out")
    }
}

fn simulated_volume(path: &Path) -> f64 {
    let cfg = JobConfig::load(&path.parent().unwrap().parent().unwrap().join("job.toml")).unwrap();
    let sim = simulate(
        &parse(&fs::read_to_string(path).unwrap()).unwrap(),
        &SimConfig::new(cfg.machine().unwrap()),
    );
    assert!(sim.is_clean(), "{:?}", sim.diagnostics);
    sim.trace.volume()
}

#[test]
fn small_syringe_splits_into_files_that_add_up() {
    let job = Job::new(400.0).body(
        "a.stl",
        &cuboid([12.0, 8.0, 0.0], [28.0, 22.0, 12.0]),
        1.0,
        0.5,
    );
    let plan = plan_job(&job.config()).unwrap();
    assert!(plan.files.len() > 3);
    let written = write_slice(&plan).unwrap();
    let report =
        parse_report_files(&fs::read_to_string(job.out().join("report.txt")).unwrap()).unwrap();
    assert_eq!(report.len(), plan.files.len());
    let mut total = 0.0;
    for (row, path) in report.iter().zip(&written) {
        let v = simulated_volume(path);
        assert!(v <= 400.0 + 1e-9);
        assert!((v - row.volume).abs() <= 1e-6 * v.max(1.0));
        total += v;
    }
    assert!((total - plan.total_volume()).abs() <= 1e-6 * total);
}

#[test]
fn bodies_with_different_attributes_get_separate_groups() {
    let job = Job::new(1e6)
        .body(
            "a.stl",
            &cuboid([2.0, 2.0, 0.0], [16.0, 26.0, 15.0]),
            1.0,
            0.5,
        )
        .body(
            "b.stl",
            &cylinder([30.0, 15.0], 6.0, 2.0, 18.0, 32),
            0.8,
            1.0,
        )
        .body(
            "c.stl",
            &cuboid([18.0, 24.0, 0.0], [24.0, 29.0, 10.0]),
            1.0,
            0.5,
        );
    let plan = plan_job(&job.config()).unwrap();
    assert_eq!(plan.groups.len(), 2);
    let mut members: Vec<Vec<usize>> = plan.groups.iter().map(|g| g.bodies.clone()).collect();
    members.sort();
    assert_eq!(members, vec![vec![0, 2], vec![1]]);
    // files never mix groups and follow the group order
    let groups: Vec<usize> = plan.files.iter().map(|f| f.group).collect();
    assert!(groups.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(plan.contours.len(), 3);
}

#[test]
fn overlapping_bodies_are_rejected() {
    let a = cuboid([5.0, 5.0, 0.0], [20.0, 20.0, 10.0]);
    let b = cuboid([15.0, 15.0, 5.0], [30.0, 25.0, 15.0]);
    for hydration in [0.5, 1.0] {
        let job = Job::new(1e6)
            .body("a.stl", &a, 1.0, 0.5)
            .body("b.stl", &b, 1.0, hydration);
        match plan_job(&job.config()) {
            Err(JobError::Geometry(GeometryError::Overlap { first, second, .. })) => {
                assert_eq!((first, second), (0, 1))
            }
            other => panic!("expected overlap, got {:?}", other.map(|p| p.files.len())),
        }
    }
}

#[test]
fn body_between_cell_centers_gives_no_injections() {
    let job = Job::new(1e6).body(
        "a.stl",
        &cuboid([20.1, 15.1, 0.0], [20.3, 15.3, 5.0]),
        1.0,
        0.5,
    );
    let plan = plan_job(&job.config()).unwrap();
    assert_eq!(plan.total_columns(), 0);
    let written = write_slice(&plan).unwrap();
    let names: Vec<_> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_owned())
        .collect();
    assert_eq!(names, ["mark.gcode", "report.txt"]);
    let svg = fs::read_to_string(write_preview(&plan).unwrap()).unwrap();
    assert!(svg.contains(r#"class="foam""#));
    assert!(!svg.contains(r#"class="cell""#));
}

#[test]
fn rerun_removes_stale_injection_files() {
    let mesh = cuboid([12.0, 8.0, 0.0], [28.0, 22.0, 12.0]);
    let small = Job::new(400.0).body("a.stl", &mesh, 1.0, 0.5);
    let many = write_slice(&plan_job(&small.config()).unwrap())
        .unwrap()
        .len();
    let large = Job {
        capacity: 1e6,
        ..small
    };
    write_slice(&plan_job(&large.config()).unwrap()).unwrap();
    let left: Vec<_> = fs::read_dir(large.out())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("inject_"))
        .collect();
    assert!(many > 3);
    assert_eq!(left, ["inject_001.gcode"]);
}

#[test]
fn missing_calibration_names_the_path() {
    let job = Job::new(1e6).body(
        "a.stl",
        &cuboid([5.0, 5.0, 0.0], [10.0, 10.0, 5.0]),
        1.0,
        0.5,
    );
    fs::remove_file(job.dir.path().join("cal.csv")).unwrap();
    let err = plan_job(&job.config()).unwrap_err();
    assert!(err.is_user_error());
    assert!(err.to_string().contains("cal.csv"), "{err}");
}
