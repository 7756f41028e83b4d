use super::JobPlan;
use crate::calib::hex_side;
use crate::material::{drying_time, hydrogel_components, DryingMethod};
use crate::plan::HYDROGEL_DENSITY;

const FILES_HEADER: &str =
    "file,group,first_column,columns,volume_mm3,mass_g,travel_min,insert_min,inject_min,retract_min,duration_min";

/// One row of the report's file table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFileRow {
    pub file: String,
    pub group: usize,
    pub first_column: usize,
    pub columns: usize,
    pub volume: f64,
    pub mass: f64,
    pub duration: f64,
}

/// Plain-text job report. Sections are `[name]` headed; tables are CSV.
pub fn render_report(plan: &JobPlan) -> String {
    let cfg = &plan.config;
    let mp = &plan.machine;
    let mut r = String::new();
    let mut line = |s: String| {
        r.push_str(&s);
        r.push('\n');
    };

    line("foamfab job report".into());
    line(String::new());
    line("[job]".into());
    line(format!(
        "foam_mm: {} x {} x {}",
        mp.foam.width, mp.foam.depth, mp.foam.height
    ));
    line(format!("bodies: {}", plan.bodies.len()));
    line(format!("inject_speed_mm_min: {}", cfg.inject_speed));
    line(format!("syringe_capacity_mm3: {}", cfg.syringe_capacity));
    line(format!("safe_height_mm: {}", mp.safe_height()));
    line(format!(
        "feeds_mm_min: travel {} insert {} mark {}",
        mp.travel_feed, mp.insert_feed, mp.mark_feed
    ));
    line(String::new());

    line("[groups]".into());
    line(
        "group,bodies,hydration_ratio,infill_ratio,cell_area_mm2,hex_side_mm,pitch_mm,columns"
            .into(),
    );
    for (i, g) in plan.groups.iter().enumerate() {
        let bodies: Vec<String> = g.bodies.iter().map(|b| b.to_string()).collect();
        line(format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{}",
            i + 1,
            bodies.join(" "),
            g.hydration_ratio,
            g.infill_ratio,
            g.grid.cell_area(),
            hex_side(g.grid.cell_area()).unwrap_or(f64::NAN),
            g.grid.pitch(),
            g.columns.len()
        ));
    }
    line(String::new());

    line("[files]".into());
    line(FILES_HEADER.into());
    let mut start = vec![0usize; plan.groups.len()];
    let mut offset = 0;
    for (gi, g) in plan.groups.iter().enumerate() {
        start[gi] = offset;
        offset += g.columns.len();
    }
    for f in &plan.files {
        let e = &f.estimate;
        line(format!(
            "{},{},{},{},{:.6},{:.6},{:.4},{:.4},{:.4},{:.4},{:.4}",
            f.name,
            f.group + 1,
            start[f.group] + f.print.start + 1,
            e.columns,
            e.volume,
            e.mass,
            e.travel_time,
            e.insert_time,
            e.inject_time,
            e.retract_time,
            e.duration()
        ));
    }
    line(String::new());

    let total_volume = plan.total_volume();
    let total_duration: f64 = plan.files.iter().map(|f| f.estimate.duration()).sum();
    line("[totals]".into());
    line(format!("files: {}", plan.files.len()));
    line(format!("columns: {}", plan.total_columns()));
    line(format!("volume_mm3: {total_volume:.6}"));
    line(format!("mass_g: {:.6}", total_volume * HYDROGEL_DENSITY));
    line(format!("duration_min: {total_duration:.4}"));
    line(String::new());

    line("[hydrogel]".into());
    line("# estimate: hydrogel taken at 1 g/cm^3".into());
    line("group,hydration_ratio,gel_g,spa_g,water_g".into());
    for (i, g) in plan.groups.iter().enumerate() {
        let gel: f64 = plan
            .files
            .iter()
            .filter(|f| f.group == i)
            .map(|f| f.estimate.mass)
            .sum();
        if let Ok((spa, water)) = hydrogel_components(gel, g.hydration_ratio) {
            line(format!(
                "{},{},{gel:.4},{spa:.4},{water:.4}",
                i + 1,
                g.hydration_ratio
            ));
        }
    }
    line(String::new());

    line("[drying]".into());
    line("# estimate: scaled linearly by volume from a 50 mm cube".into());
    let block = mp.foam.width * mp.foam.depth * mp.foam.height;
    for (label, method) in [
        ("room_air_h", DryingMethod::RoomAir),
        ("hot_air_h", DryingMethod::HotAir),
        ("salt_h", DryingMethod::Salt),
    ] {
        if let Ok(d) = drying_time(block, method) {
            let bound = if d.lower_bound { " (at least)" } else { "" };
            line(format!("{label}: {:.1}{bound}", d.hours));
        }
    }
    line(String::new());

    line("[operator checklist]".into());
    line("# generated guidance, adjust to your setup".into());
    let steps = [
        "Mix hydrogel for each group using the [hydrogel] masses.".to_string(),
        "Fix the foam block with its minimum x/y corner at the machine origin, top face at Z = foam height.".into(),
        format!(
            "Run the injection files in order ({}), refilling the syringe between files.",
            match plan.files.len() {
                0 => "none".to_string(),
                1 => plan.files[0].name.clone(),
                n => format!("{} .. {}", plan.files[0].name, plan.files[n - 1].name),
            }
        ),
        "Run mark.gcode to trace the body outlines on the top face.".into(),
        "Cut along the marked outlines, then dry or hydrate the parts as needed.".into(),
    ];
    for (i, s) in steps.iter().enumerate() {
        line(format!("{}. {s}", i + 1));
    }
    r
}

/// Reads the `[files]` table back from a report.
pub fn parse_report_files(text: &str) -> Result<Vec<ReportFileRow>, String> {
    let mut lines = text.lines().skip_while(|l| l.trim() != "[files]").skip(1);
    match lines.next() {
        Some(h) if h.trim() == FILES_HEADER => {}
        _ => return Err("report has no [files] table".into()),
    }
    let mut rows = Vec::new();
    for l in lines.take_while(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 11 {
            return Err(format!("malformed file row `{l}`"));
        }
        let num = |i: usize| {
            f[i].parse::<f64>()
                .map_err(|_| format!("bad number `{}` in `{l}`", f[i]))
        };
        let int = |i: usize| {
            f[i].parse::<usize>()
                .map_err(|_| format!("bad count `{}` in `{l}`", f[i]))
        };
        rows.push(ReportFileRow {
            file: f[0].to_string(),
            group: int(1)?,
            first_column: int(2)?,
            columns: int(3)?,
            volume: num(4)?,
            mass: num(5)?,
            duration: num(10)?,
        });
    }
    Ok(rows)
}
