use super::{build_motion_sets, MachineParams, Phase, PlanError, PrintFile};

/// Hydrogel density assumed for mass estimates, g/mm³ (that of water).
pub const HYDROGEL_DENSITY: f64 = 1e-3;

/// Time and material for one print file. Durations are minutes.
#[derive(Debug, Clone, PartialEq)]
pub struct FileEstimate {
    pub columns: usize,
    pub volume: f64,
    pub mass: f64,
    pub travel_time: f64,
    pub insert_time: f64,
    pub inject_time: f64,
    pub retract_time: f64,
}

impl FileEstimate {
    pub fn duration(&self) -> f64 {
        self.travel_time + self.insert_time + self.inject_time + self.retract_time
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct JobReport {
    pub files: Vec<FileEstimate>,
}

impl JobReport {
    pub fn total_columns(&self) -> usize {
        self.files.iter().map(|f| f.columns).sum()
    }

    pub fn total_volume(&self) -> f64 {
        self.files.iter().map(|f| f.volume).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.files.iter().map(|f| f.mass).sum()
    }

    pub fn total_duration(&self) -> f64 {
        self.files.iter().map(FileEstimate::duration).sum()
    }
}

/// Estimates each file by walking its motion sets. Every file is assumed to
/// start with the needle at `(0, 0)`, safe height.
pub fn estimate_job(files: &[PrintFile], mp: &MachineParams) -> Result<JobReport, PlanError> {
    let mut report = JobReport::default();
    for file in files {
        let sets = build_motion_sets(&file.columns, mp)?;
        let mut est = FileEstimate {
            columns: file.columns.len(),
            volume: file.volume,
            mass: file.volume * HYDROGEL_DENSITY,
            travel_time: 0.0,
            insert_time: 0.0,
            inject_time: 0.0,
            retract_time: 0.0,
        };
        let mut pos = [0.0, 0.0, mp.safe_height()];
        for m in sets.iter().flat_map(|s| &s.moves) {
            let d =
                m.to.iter()
                    .zip(pos)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
            let t = d / m.feed;
            match m.phase {
                Phase::Approach => est.travel_time += t,
                Phase::Insert => est.insert_time += t,
                Phase::Dispense | Phase::Gap => est.inject_time += t,
                Phase::Retract => est.retract_time += t,
            }
            pos = m.to;
        }
        report.files.push(est);
    }
    Ok(report)
}
