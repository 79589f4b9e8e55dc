//! FBI-type transform with Gaussian phase, decay classification over a λ
//! ladder, and conormal scans along level sets of φ.

mod conormal;
mod fbi;

pub use conormal::{conormal_probe, ConormalPoint, ConormalReport, SAMPLE_OFFSETS, SMOOTHNESS_EXPONENT};
pub use fbi::{
    decay_scan, default_ladder, fbi, fbi_limit, DirectionFit, FbiScan, Verdict, DEGENERATE_FLOOR, MAGNITUDE_FLOOR,
};
