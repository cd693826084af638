use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{AreaBreakdown, EnergyBreakdown, EventCounters};
use crate::error::{Error, Result};

/// Counters plus derived energy and area for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub machine: String,
    pub counters: EventCounters,
    pub energy: EnergyBreakdown,
    pub total_energy_pj: f64,
    pub area: AreaBreakdown,
    pub area_um2: f64,
    /// Short hash of the configuration that produced the report.
    pub config_hash: String,
}

impl SimReport {
    pub fn new(
        machine: impl Into<String>,
        counters: EventCounters,
        energy: EnergyBreakdown,
        area: AreaBreakdown,
        config_hash: impl Into<String>,
    ) -> Self {
        SimReport {
            machine: machine.into(),
            counters,
            total_energy_pj: energy.total(),
            energy,
            area_um2: area.total(),
            area,
            config_hash: config_hash.into(),
        }
    }

    pub fn cycles(&self) -> u64 {
        self.counters.cycles
    }
}

/// One line of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub cycles: f64,
    pub speedup: f64,
    pub dram_bits: f64,
    pub misses: f64,
    pub energy_pj: f64,
    pub area_um2: f64,
}

pub const CSV_HEADER: &str = "label,cycles,speedup,dram_bits,misses,energy_pj,area_um2";

fn row_of(label: &str, r: &SimReport, base: &SimReport) -> ComparisonRow {
    ComparisonRow {
        label: label.to_string(),
        cycles: r.cycles() as f64,
        speedup: ratio(base.cycles() as f64, r.cycles() as f64),
        dram_bits: r.counters.dram_bits() as f64,
        misses: r.counters.vrf_miss_count as f64,
        energy_pj: r.total_energy_pj,
        area_um2: r.area_um2,
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Raw metrics per report plus speedup against `baseline`.
pub fn compare(reports: &[(String, SimReport)], baseline: &str) -> Result<Vec<ComparisonRow>> {
    let base = reports
        .iter()
        .find(|(l, _)| l == baseline)
        .map(|(_, r)| r)
        .ok_or_else(|| Error::Lookup(format!("baseline {baseline:?} not among reports")))?;
    Ok(reports.iter().map(|(l, r)| row_of(l, r, base)).collect())
}

pub fn geometric_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    (values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp()
}

/// Compares the same set of labels across several datasets. Every metric is
/// normalised to the dataset's baseline (speedup = baseline cycles / cycles),
/// then averaged geometrically per label. Labels keep first-seen order.
pub fn compare_datasets(
    datasets: &[(String, Vec<(String, SimReport)>)],
    baseline: &str,
) -> Result<Vec<ComparisonRow>> {
    let mut order: Vec<String> = Vec::new();
    let mut ratios: BTreeMap<String, Vec<[f64; 6]>> = BTreeMap::new();
    for (name, reports) in datasets {
        let base = reports
            .iter()
            .find(|(l, _)| l == baseline)
            .map(|(_, r)| r)
            .ok_or_else(|| Error::Lookup(format!("baseline {baseline:?} missing for {name}")))?;
        for (label, r) in reports {
            if !order.contains(label) {
                order.push(label.clone());
            }
            let c = &r.counters;
            let b = &base.counters;
            ratios.entry(label.clone()).or_default().push([
                ratio(c.cycles as f64, b.cycles as f64),
                ratio(b.cycles as f64, c.cycles as f64),
                ratio(c.dram_bits() as f64, b.dram_bits() as f64),
                ratio(c.vrf_miss_count as f64, b.vrf_miss_count as f64),
                ratio(r.total_energy_pj, base.total_energy_pj),
                ratio(r.area_um2, base.area_um2),
            ]);
        }
    }
    Ok(order
        .into_iter()
        .map(|label| {
            let rs = &ratios[&label];
            let g = |i: usize| geometric_mean(&rs.iter().map(|r| r[i]).collect::<Vec<_>>());
            ComparisonRow {
                label: format!("geomean:{label}"),
                cycles: g(0),
                speedup: g(1),
                dram_bits: g(2),
                misses: g(3),
                energy_pj: g(4),
                area_um2: g(5),
            }
        })
        .collect())
}

fn fmt_num(v: f64) -> String {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.6}")
    }
}

/// CSV with a `# config_hash=` first line and a fixed header.
pub fn to_csv(config_hash: &str, rows: &[ComparisonRow]) -> String {
    let mut s = format!("# config_hash={config_hash}\n{CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.label,
            fmt_num(r.cycles),
            fmt_num(r.speedup),
            fmt_num(r.dram_bits),
            fmt_num(r.misses),
            fmt_num(r.energy_pj),
            fmt_num(r.area_um2)
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(cycles: u64, dram: u64) -> SimReport {
        let c = EventCounters {
            cycles,
            dram_read_bits: dram,
            ..Default::default()
        };
        SimReport::new(
            "t",
            c,
            EnergyBreakdown::default(),
            AreaBreakdown::default(),
            "h",
        )
    }

    #[test]
    fn self_comparison_is_unity() {
        let rows = compare(&[("a".into(), report(100, 8))], "a").unwrap();
        assert_eq!(rows[0].speedup, 1.0);
    }

    #[test]
    fn missing_baseline() {
        assert!(matches!(
            compare(&[("a".into(), report(1, 1))], "b"),
            Err(Error::Lookup(_))
        ));
    }

    #[test]
    fn geomean_of_two_and_eight() {
        assert!((geometric_mean(&[2.0, 8.0]) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn speedup_over_datasets() {
        let ds = vec![
            (
                "g1".to_string(),
                vec![
                    ("gl".to_string(), report(200, 1)),
                    ("fv".to_string(), report(100, 1)),
                ],
            ),
            (
                "g2".to_string(),
                vec![
                    ("gl".to_string(), report(800, 1)),
                    ("fv".to_string(), report(100, 1)),
                ],
            ),
        ];
        let rows = compare_datasets(&ds, "gl").unwrap();
        assert_eq!(rows[1].label, "geomean:fv");
        assert!((rows[1].speedup - 4.0).abs() < 1e-12);
        assert!((rows[0].speedup - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let rows = compare(&[("a".into(), report(100, 8))], "a").unwrap();
        let csv = to_csv("abc", &rows);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "# config_hash=abc");
        assert_eq!(lines[1], CSV_HEADER);
        assert_eq!(lines[2], "a,100,1,8,0,0,0");
    }
}
