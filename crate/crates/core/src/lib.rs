//! Design-to-G-code toolkit for hydrogel-injected foam composites.
//!
//! A job starts from solid bodies placed in a rectangular foam block. Each
//! body is rasterized into vertical hexagonal injection columns
//! ([`geometry`]), sized from the injection-rate calibration ([`calib`]).
//! Columns are ordered center-outward by flood fill, turned into needle
//! motion sets and split into syringe-sized files ([`plan`]), then emitted
//! as G-code and checked by a small simulator ([`gcode`]). [`job`] wires the
//! pipeline to config files, previews and reports; [`material`] holds the
//! material-property calculators.

pub mod calib;
pub mod gcode;
pub mod geometry;
pub mod interp;
pub mod job;
pub mod material;
pub mod plan;
