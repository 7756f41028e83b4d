use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};
use foamfab_core::material::{
    air_dry_retained_mass, drying_time, max_bend_angle, mixing_masses, swelled_volume,
    BendDetector, DryingMethod, MaterialError, ResistanceSeries, RetentionTable, StiffnessTable,
    DEFAULT_RELAXATION, DEFAULT_WINDOW,
};

use crate::{read, Failure};

#[derive(Subcommand)]
pub enum Analyze {
    /// Water to mix with dry polymer for a hydration ratio.
    Mix {
        #[arg(long)]
        spa_grams: f64,
        #[arg(long)]
        ratio: f64,
    },
    /// Fully swollen volume of dry polymer.
    Swell {
        /// mm^3
        #[arg(long)]
        dry_volume: f64,
    },
    /// Drying time estimate and weight retention.
    Drying {
        /// mm^3
        #[arg(long)]
        volume: f64,
        #[arg(long, value_enum, default_value_t = Method::RoomAir)]
        method: Method,
        /// Hydrated sample mass, g, for the retention estimate.
        #[arg(long)]
        hydrated_grams: Option<f64>,
        /// Retention table (cycle,retained_fraction) to use instead of the
        /// single-cycle constant.
        #[arg(long, requires = "cycle")]
        retention_csv: Option<PathBuf>,
        #[arg(long)]
        cycle: Option<u32>,
    },
    /// Maximum bend of a living hinge.
    Joint {
        /// Dehydrated gap length, mm.
        #[arg(long)]
        l: f64,
        /// Hydrated wall thickness, mm.
        #[arg(long)]
        t: f64,
    },
    /// Deformation under load from a stiffness table.
    Stiffness {
        #[arg(long)]
        csv: PathBuf,
        /// g
        #[arg(long)]
        load: f64,
        /// Hydration ratio to evaluate; all tabulated ratios when omitted.
        #[arg(long)]
        ratio: Option<f64>,
    },
    /// Bend events in a resistance recording.
    Bends {
        #[arg(long)]
        csv: PathBuf,
        /// Fractional drop that counts as a bend.
        #[arg(long)]
        threshold: f64,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = DEFAULT_RELAXATION)]
        relaxation: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Method {
    RoomAir,
    HotAir,
    Salt,
}

/// Up to six decimals, trailing zeros dropped.
fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn material(e: MaterialError) -> Failure {
    Failure::user(e.to_string())
}

pub fn run(what: &Analyze) -> Result<(), Failure> {
    match what {
        Analyze::Mix { spa_grams, ratio } => {
            let water = mixing_masses(*spa_grams, *ratio).map_err(material)?;
            println!("water: {} g", num(water));
            println!("hydrogel: {} g", num(water + spa_grams));
        }
        Analyze::Swell { dry_volume } => {
            println!(
                "swelled volume: {} mm^3",
                num(swelled_volume(*dry_volume).map_err(material)?)
            );
        }
        Analyze::Drying {
            volume,
            method,
            hydrated_grams,
            retention_csv,
            cycle,
        } => {
            let m = match method {
                Method::RoomAir => DryingMethod::RoomAir,
                Method::HotAir => DryingMethod::HotAir,
                Method::Salt => DryingMethod::Salt,
            };
            let d = drying_time(*volume, m).map_err(material)?;
            let bound = if d.lower_bound { "at least " } else { "" };
            println!("drying time: {bound}{} h (estimate)", num(d.hours));
            if let Some(mass) = hydrated_grams {
                let retained = match (retention_csv, cycle) {
                    (Some(path), Some(c)) => RetentionTable::from_csv(&read(path)?)
                        .and_then(|t| t.retained_mass(*mass, *c))
                        .map_err(|e| Failure::user(format!("{}: {e}", path.display())))?,
                    _ => air_dry_retained_mass(*mass).map_err(material)?,
                };
                println!("retained after rehydration: {} g", num(retained));
            }
        }
        Analyze::Joint { l, t } => {
            let theta = max_bend_angle(*l, *t).map_err(material)?;
            println!(
                "theta: {} rad ({} deg)",
                num(theta),
                num(theta.to_degrees())
            );
        }
        Analyze::Stiffness { csv, load, ratio } => {
            let table = StiffnessTable::from_csv(&read(csv)?)
                .map_err(|e| Failure::user(format!("{}: {e}", csv.display())))?;
            match ratio {
                Some(r) => {
                    let d = table.deformation_at(*r, *load).map_err(material)?;
                    println!(
                        "deformation: {} mm at {} g, hydration ratio {}",
                        num(d),
                        num(*load),
                        num(*r)
                    );
                }
                None => {
                    for r in table.ratios() {
                        let d = table.deformation_at(r, *load).map_err(material)?;
                        println!("ratio {}: {} mm", num(r), num(d));
                    }
                    println!(
                        "stiffest: {}",
                        num(table.stiffest_ratio(*load).map_err(material)?)
                    );
                }
            }
        }
        Analyze::Bends {
            csv,
            threshold,
            window,
            relaxation,
        } => {
            let series = ResistanceSeries::from_csv(&read(csv)?)
                .map_err(|e| Failure::user(format!("{}: {e}", csv.display())))?;
            let detector = BendDetector {
                threshold: *threshold,
                window: *window,
                relaxation: *relaxation,
            };
            let events = detector.detect(&series).map_err(material)?;
            println!("events: {}", events.len());
            for (i, e) in events.iter().enumerate() {
                let s = series.samples()[e.start];
                println!(
                    "event {}: sample {} at {} s, {} kOhm, drop {}%",
                    i + 1,
                    e.start,
                    num(s.time),
                    num(s.resistance),
                    num((e.magnitude * 1e4).round() / 100.0)
                );
            }
        }
    }
    Ok(())
}
