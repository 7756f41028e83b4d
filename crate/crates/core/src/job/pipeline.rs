use std::fs;
use std::path::PathBuf;

use super::{render_preview, render_report, write_atomic, JobConfig, JobError};
use crate::calib::CalibrationTable;
use crate::gcode::{emit_injection, emit_marking, parse, simulate, InjectionHeader, SimConfig};
use crate::geometry::{
    load_mesh, merge_bodies, project_silhouette, rasterize, BodySpec, Column, Contour,
    GeometryError, HexGrid, RayCaster, StlFormat,
};
use crate::plan::{
    build_motion_sets, divide_jobs, estimate_job, order_columns, snap_columns, FileEstimate,
    MachineParams, MotionSet, PrintFile,
};

pub const REPORT_NAME: &str = "report.txt";
pub const MARK_NAME: &str = "mark.gcode";
pub const PREVIEW_NAME: &str = "preview.svg";

/// Overlaps shorter than this along a column are contact, not conflict.
const OVERLAP_TOLERANCE: f64 = 1e-6;

pub fn injection_file_name(index: usize) -> String {
    format!("inject_{index:03}.gcode")
}

/// Bodies that share one hex grid: same hydration ratio (hence cell area)
/// and infill ratio.
#[derive(Debug, Clone)]
pub struct Group {
    pub hydration_ratio: f64,
    pub infill_ratio: f64,
    /// Indices into the config's body list.
    pub bodies: Vec<usize>,
    pub grid: HexGrid,
    /// In injection order.
    pub columns: Vec<Column>,
}

#[derive(Debug, Clone)]
pub struct PlannedFile {
    pub name: String,
    pub group: usize,
    pub print: PrintFile,
    pub sets: Vec<MotionSet>,
    pub estimate: FileEstimate,
}

#[derive(Debug, Clone)]
pub struct JobPlan {
    pub config: JobConfig,
    pub machine: MachineParams,
    pub bodies: Vec<BodySpec>,
    pub groups: Vec<Group>,
    pub files: Vec<PlannedFile>,
    /// Top-face outlines, body by body.
    pub contours: Vec<Contour>,
}

impl JobPlan {
    pub fn total_columns(&self) -> usize {
        self.groups.iter().map(|g| g.columns.len()).sum()
    }

    pub fn total_volume(&self) -> f64 {
        self.files.iter().map(|f| f.print.volume).sum()
    }
}

fn load_bodies(cfg: &JobConfig, mp: &MachineParams) -> Result<Vec<BodySpec>, JobError> {
    cfg.bodies
        .iter()
        .enumerate()
        .map(|(index, b)| {
            let path = cfg.resolve(&b.mesh);
            let bytes = fs::read(&path).map_err(|source| JobError::Read {
                path: path.clone(),
                source,
            })?;
            let body_err = |source| JobError::Body {
                index,
                path: path.clone(),
                source,
            };
            let mesh = load_mesh(&bytes, StlFormat::detect(&bytes)).map_err(body_err)?;
            BodySpec::new(mesh, b.infill_ratio, b.hydration_ratio, &mp.foam).map_err(body_err)
        })
        .collect()
}

/// Returns an error when a column of one group runs through a body of
/// another group.
fn check_cross_group_overlap(groups: &[Group], bodies: &[BodySpec]) -> Result<(), JobError> {
    if groups.len() < 2 {
        return Ok(());
    }
    let casters: Vec<RayCaster> = bodies.iter().map(|b| RayCaster::new(&b.mesh)).collect();
    for (gi, g) in groups.iter().enumerate() {
        for col in &g.columns {
            let [x, y] = col.center;
            for (_, other) in groups.iter().enumerate().filter(|(hi, _)| *hi != gi) {
                for &b in &other.bodies {
                    // height inside both the column and body `b`, if any
                    let hit = match casters[b].crossings(x, y) {
                        Some((zs, _)) if zs.len() % 2 == 0 => zs.chunks_exact(2).find_map(|p| {
                            col.segments.iter().find_map(|s| {
                                let (lo, hi) = (s.0.max(p[0]), s.1.min(p[1]));
                                (hi - lo > OVERLAP_TOLERANCE).then_some((lo + hi) / 2.0)
                            })
                        }),
                        _ => col
                            .segments
                            .iter()
                            .map(|s| (s.0 + s.1) / 2.0)
                            .find(|&z| casters[b].contains([x, y, z])),
                    };
                    if let Some(z) = hit {
                        let own = g
                            .bodies
                            .iter()
                            .copied()
                            .find(|&a| casters[a].contains([x, y, z]))
                            .unwrap_or(g.bodies[0]);
                        let (first, second) = (own.min(b), own.max(b));
                        return Err(GeometryError::Overlap {
                            first,
                            second,
                            q: col.cell.q,
                            r: col.cell.r,
                        }
                        .into());
                    }
                }
            }
        }
    }
    Ok(())
}

/// Squared distance from the footprint center to the group's nearest
/// column; empty groups sort last.
fn root_distance(g: &Group) -> f64 {
    let [cx, cy] = g.grid.foam().footprint_center();
    g.columns
        .iter()
        .map(|c| (c.center[0] - cx).powi(2) + (c.center[1] - cy).powi(2))
        .fold(f64::INFINITY, f64::min)
}

/// Runs the whole pipeline in memory.
pub fn plan_job(cfg: &JobConfig) -> Result<JobPlan, JobError> {
    let mp = cfg.machine()?;
    let foam = mp.foam;
    let cal_path = cfg.resolve(&cfg.calibration);
    let cal_text = fs::read_to_string(&cal_path).map_err(|source| JobError::Read {
        path: cal_path.clone(),
        source,
    })?;
    let table = CalibrationTable::from_csv(&cal_text).map_err(|source| JobError::Calibration {
        path: cal_path.clone(),
        source,
    })?;
    let bodies = load_bodies(cfg, &mp)?;

    // bodies with identical attributes share a grid
    let mut members: Vec<(f64, f64, Vec<usize>)> = Vec::new();
    for (i, b) in bodies.iter().enumerate() {
        let same = |m: &&mut (f64, f64, Vec<usize>)| {
            !cfg.group_by_body && m.0 == b.hydration_ratio && m.1 == b.infill_ratio
        };
        match members.iter_mut().find(same) {
            Some(m) => m.2.push(i),
            None => members.push((b.hydration_ratio, b.infill_ratio, vec![i])),
        }
    }

    let mut groups = Vec::with_capacity(members.len());
    for (hydration_ratio, infill_ratio, idx) in members {
        let cell_area = table
            .cell_area(cfg.inject_speed, hydration_ratio)
            .map_err(|source| JobError::Calibration {
                path: cal_path.clone(),
                source,
            })?;
        let grid = HexGrid::new(foam, cell_area, infill_ratio)?;
        let per_body = idx
            .iter()
            .map(|&i| rasterize(&bodies[i], &grid, cfg.z_step))
            .collect::<Result<Vec<_>, _>>()?;
        let merged = merge_bodies(&per_body).map_err(|e| match e {
            GeometryError::Overlap {
                first,
                second,
                q,
                r,
            } => GeometryError::Overlap {
                first: idx[first],
                second: idx[second],
                q,
                r,
            },
            other => other,
        })?;
        let columns = order_columns(&snap_columns(&merged), &grid)?;
        groups.push(Group {
            hydration_ratio,
            infill_ratio,
            bodies: idx,
            grid,
            columns,
        });
    }
    check_cross_group_overlap(&groups, &bodies)?;
    groups.sort_by(|a, b| {
        root_distance(a)
            .total_cmp(&root_distance(b))
            .then(a.bodies[0].cmp(&b.bodies[0]))
    });

    let mut files = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        for print in divide_jobs(&g.columns, g.grid.cell_area(), cfg.syringe_capacity)? {
            let sets = build_motion_sets(&print.columns, &mp)?;
            let estimate = estimate_job(std::slice::from_ref(&print), &mp)?
                .files
                .remove(0);
            files.push(PlannedFile {
                name: injection_file_name(files.len() + 1),
                group: gi,
                print,
                sets,
                estimate,
            });
        }
    }

    let mut contours = Vec::new();
    for b in &bodies {
        contours.extend(project_silhouette(b, cfg.silhouette_resolution)?);
    }

    Ok(JobPlan {
        config: cfg.clone(),
        machine: mp,
        bodies,
        groups,
        files,
        contours,
    })
}

fn self_check(
    name: &str,
    text: &str,
    sim_cfg: &SimConfig,
    expected_volume: Option<f64>,
) -> Result<(), JobError> {
    let fail = |message: String| JobError::SelfCheck {
        file: name.to_string(),
        message,
    };
    let program = parse(text).map_err(|e| fail(e.to_string()))?;
    let sim = simulate(&program, sim_cfg);
    if let Some(d) = sim.diagnostics.first() {
        return Err(fail(d.to_string()));
    }
    if let Some(v) = expected_volume {
        let got = sim.trace.volume();
        if (got - v).abs() > 1e-6 * v.abs().max(1.0) {
            return Err(fail(format!(
                "simulated volume {got} mm^3, planned {v} mm^3"
            )));
        }
    }
    Ok(())
}

fn marking_text(plan: &JobPlan) -> Result<String, JobError> {
    let text = emit_marking(&plan.contours, &plan.machine)?;
    self_check(MARK_NAME, &text, &SimConfig::new(plan.machine), None)?;
    Ok(text)
}

/// Writes the injection files, the marking file and the report into the
/// output directory. Injection files left over from an earlier, larger
/// run are removed. Returns the written paths.
pub fn write_slice(plan: &JobPlan) -> Result<Vec<PathBuf>, JobError> {
    let out = plan.config.output_path();
    let mut written = Vec::new();
    let n = plan.files.len();
    for (i, f) in plan.files.iter().enumerate() {
        let header = InjectionHeader {
            file: i + 1,
            files: n,
            cell_area: f.print.cell_area,
            capacity: Some(plan.config.syringe_capacity),
        };
        let text = emit_injection(&f.sets, &plan.machine, &header)?;
        let sim_cfg = SimConfig {
            mp: plan.machine,
            cell_area: Some(f.print.cell_area),
            capacity: Some(plan.config.syringe_capacity),
        };
        self_check(&f.name, &text, &sim_cfg, Some(f.print.volume))?;
        let path = out.join(&f.name);
        write_atomic(&path, text.as_bytes())?;
        written.push(path);
    }
    remove_stale_injections(&out, n)?;

    let mark = out.join(MARK_NAME);
    write_atomic(&mark, marking_text(plan)?.as_bytes())?;
    written.push(mark);

    let report = out.join(REPORT_NAME);
    write_atomic(&report, render_report(plan).as_bytes())?;
    written.push(report);
    Ok(written)
}

fn remove_stale_injections(out: &std::path::Path, count: usize) -> Result<(), JobError> {
    let Ok(entries) = fs::read_dir(out) else {
        return Ok(());
    };
    for entry in entries.flatten() {
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        let index = name
            .strip_prefix("inject_")
            .and_then(|s| s.strip_suffix(".gcode"))
            .filter(|s| s.len() == 3 && s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse::<usize>().ok());
        if index.is_some_and(|i| i > count) {
            fs::remove_file(entry.path()).map_err(|source| JobError::Write {
                path: entry.path(),
                source,
            })?;
        }
    }
    Ok(())
}

pub fn write_marking(plan: &JobPlan) -> Result<PathBuf, JobError> {
    let path = plan.config.output_path().join(MARK_NAME);
    write_atomic(&path, marking_text(plan)?.as_bytes())?;
    Ok(path)
}

pub fn write_preview(plan: &JobPlan) -> Result<PathBuf, JobError> {
    let path = plan.config.output_path().join(PREVIEW_NAME);
    write_atomic(&path, render_preview(plan).as_bytes())?;
    Ok(path)
}
