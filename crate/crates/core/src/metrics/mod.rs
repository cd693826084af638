//! Event counters, linear energy and area models, run reports and
//! comparison tables.

mod area;
mod counters;
mod energy;
mod report;

pub use area::{AreaBreakdown, AreaModel, HwShape};
pub use counters::EventCounters;
pub use energy::{energy, BufferSizes, EnergyBreakdown, EnergyCoeffs, SramTier};
pub use report::{
    compare, compare_datasets, geometric_mean, to_csv, ComparisonRow, SimReport, CSV_HEADER,
};
