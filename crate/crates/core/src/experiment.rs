//! End-to-end runs: workload construction, compile + simulate on both
//! machines with oracle checking, parameter sweeps and the staged ablation.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Config, GrowConfig, MachineConfig};
use crate::error::{Error, Result};
use crate::graph::{
    gen_power_law, normalize_adjacency, random_dense, spmm_reference, CsrMatrix, DenseMatrix,
    DEFAULT_FRAC_BITS,
};
use crate::grow::simulate_grow;
use crate::isa::{compile, Program};
use crate::machine::{execute_functional, simulate_timing};
use crate::metrics::{energy, SimReport};
use crate::preprocess::{
    edge_cut_partition, extract_tiles, prepare_tiles, KPolicy, Partition, VrfMode,
};

/// Sparse operand S, dense operand D (original row order) and the node
/// partition applied to S before tiling.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub name: String,
    pub a: CsrMatrix,
    pub dense: DenseMatrix,
    pub part: Partition,
}

impl Workload {
    /// Partitions `a` with the built-in edge-cut heuristic.
    pub fn new(
        name: impl Into<String>,
        a: CsrMatrix,
        dense: DenseMatrix,
        tile_rows: usize,
    ) -> Result<Self> {
        let part = edge_cut_partition(&a, tile_rows)?;
        Self::with_partition(name, a, dense, part)
    }

    pub fn with_partition(
        name: impl Into<String>,
        a: CsrMatrix,
        dense: DenseMatrix,
        part: Partition,
    ) -> Result<Self> {
        if !a.is_square() || a.n_cols() != dense.n_rows() || part.n_nodes() != a.n_rows() {
            return Err(Error::Shape(format!(
                "sparse {}x{}, dense {}x{}, partition of {} nodes",
                a.n_rows(),
                a.n_cols(),
                dense.n_rows(),
                dense.n_cols(),
                part.n_nodes()
            )));
        }
        Ok(Workload {
            name: name.into(),
            a,
            dense,
            part,
        })
    }

    /// Normalized power-law adjacency times a random `features`-wide dense matrix.
    pub fn power_law(
        name: impl Into<String>,
        n: usize,
        edges: usize,
        alpha: f64,
        features: usize,
        seed: u64,
        tile_rows: usize,
    ) -> Result<Self> {
        let adj = gen_power_law(n, edges, alpha, seed)?;
        let a = normalize_adjacency(&adj, DEFAULT_FRAC_BITS)?;
        let dense = random_dense(n, features, -8, 8, seed.wrapping_add(1))?;
        Self::new(name, a, dense, tile_rows)
    }

    pub fn reference(&self) -> Result<DenseMatrix> {
        spmm_reference(&self.a, &self.dense)
    }

    fn with_tile_rows(&self, tile_rows: usize) -> Result<Workload> {
        if self.part.tile_rows == tile_rows {
            return Ok(self.clone());
        }
        Workload::new(
            self.name.clone(),
            self.a.clone(),
            self.dense.clone(),
            tile_rows,
        )
    }
}

/// One simulated run with its functional output and oracle verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub report: SimReport,
    pub output: DenseMatrix,
    pub oracle_ok: bool,
}

/// Tiles, splits, plans and compiles the workload for `mc`.
pub fn build_program(w: &Workload, mc: &MachineConfig) -> Result<Program> {
    mc.validate()?;
    let w = w.with_tile_rows(mc.tile_rows)?;
    let tiles = extract_tiles(&w.a, &w.part)?;
    let tau = mc.vertex_cut.then_some(mc.tau);
    let plans = prepare_tiles(&tiles, tau, &mc.plan_params())?;
    compile(
        &plans,
        &w.dense,
        &w.part.perm,
        &w.part.perm,
        &mc.compile_params(),
    )
}

pub fn run_flexvector(w: &Workload, cfg: &Config) -> Result<Run> {
    cfg.validate()?;
    let prog = build_program(w, &cfg.machine)?;
    let output = execute_functional(&prog)?;
    let oracle_ok = output == w.reference()?;
    let (counters, _) = simulate_timing(&prog, &cfg.machine, &cfg.timing, false)?;
    let e = energy(&counters, &cfg.energy, cfg.machine.buffer_sizes());
    let area = cfg.area.breakdown(&cfg.machine.hw_shape());
    Ok(Run {
        report: SimReport::new("flexvector", counters, e, area, cfg.hash()),
        output,
        oracle_ok,
    })
}

/// Runs the cache-centric baseline with `cfg.grow`, sharing lane width,
/// element size, tile size and timing with `cfg.machine`.
pub fn run_grow(w: &Workload, cfg: &Config) -> Result<Run> {
    cfg.validate()?;
    let mc = &cfg.machine;
    let w = w.with_tile_rows(mc.tile_rows)?;
    let tiles = extract_tiles(&w.a, &w.part)?;
    let dense = w.dense.permute_rows(&w.part.perm)?;
    let run = simulate_grow(
        &tiles,
        &dense,
        w.a.n_rows(),
        mc.tile_rows,
        &cfg.grow,
        mc,
        &cfg.timing,
    )?;
    let output = run.output.unpermute_rows(&w.part.perm)?;
    let oracle_ok = output == w.reference()?;
    let e = energy(&run.counters, &cfg.energy, cfg.grow.buffer_sizes());
    let area = cfg.area.breakdown(&cfg.grow.hw_shape(mc.vlen_bits));
    Ok(Run {
        report: SimReport::new("grow", run.counters, e, area, cfg.hash()),
        output,
        oracle_ok,
    })
}

/// Machine parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Vector length; the dense buffer width scales with it.
    VlenBits,
    VrfDepth,
    /// Buffer slot count; capacity grows with it at constant slot size.
    M,
    VrfMode,
    Tau,
    /// Fixed-region size; `topk` selects the per-tile search.
    K,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 6] = [
        SweepAxis::VlenBits,
        SweepAxis::VrfDepth,
        SweepAxis::M,
        SweepAxis::VrfMode,
        SweepAxis::Tau,
        SweepAxis::K,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::VlenBits => "vlen_bits",
            SweepAxis::VrfDepth => "vrf_depth",
            SweepAxis::M => "m",
            SweepAxis::VrfMode => "vrf_mode",
            SweepAxis::Tau => "tau",
            SweepAxis::K => "k",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown sweep axis {s:?}")))
    }
}

/// Rescales both buffers so that each of the `m` slots keeps the size it had in `base`.
pub fn with_slots(base: &MachineConfig, m: usize) -> MachineConfig {
    MachineConfig {
        dense_buffer_bytes: base.dense_slot_bytes() * m as u64,
        sparse_buffer_bytes: base.sparse_slot_bytes() * m as u64,
        m,
        ..*base
    }
}

fn parse_num<T: FromStr>(axis: SweepAxis, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("bad value {v:?} for sweep axis {axis}")))
}

/// `base` with one axis set to `value`; the result is validated.
pub fn apply_axis(base: &Config, axis: SweepAxis, value: &str) -> Result<Config> {
    let mut cfg = base.clone();
    let mc = &mut cfg.machine;
    match axis {
        SweepAxis::VlenBits => {
            let v: u32 = parse_num(axis, value)?;
            if v == 0 {
                return Err(Error::Config("vlen_bits must be >= 1".into()));
            }
            mc.dense_buffer_bytes = mc.dense_buffer_bytes * v as u64 / mc.vlen_bits as u64;
            mc.vlen_bits = v;
        }
        SweepAxis::VrfDepth => mc.vrf_depth = parse_num(axis, value)?,
        SweepAxis::M => {
            let m: usize = parse_num(axis, value)?;
            if m == 0 {
                return Err(Error::Config("m must be >= 1".into()));
            }
            *mc = with_slots(mc, m);
            cfg.grow = GrowConfig::with_m(m);
        }
        SweepAxis::VrfMode => mc.vrf_mode = value.parse()?,
        SweepAxis::Tau => mc.tau = parse_num(axis, value)?,
        SweepAxis::K => {
            mc.k_policy = match value {
                "topk" => KPolicy::TopK,
                v => KPolicy::Fixed(parse_num(axis, v)?),
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Simulates every point on FlexVector, concurrently; results follow `values`.
pub fn sweep(
    w: &Workload,
    base: &Config,
    axis: SweepAxis,
    values: &[String],
) -> Result<Vec<(String, Run)>> {
    let cfgs: Vec<Config> = values
        .iter()
        .map(|v| apply_axis(base, axis, v))
        .collect::<Result<_>>()?;
    cfgs.par_iter()
        .zip(values.par_iter())
        .map(|(cfg, v)| Ok((format!("{axis}={v}"), run_flexvector(w, cfg)?)))
        .collect()
}

/// Labels of the staged ablation, in order.
pub const ABLATION_STAGES: [&str; 5] = ["m1", "m6", "double_vrf", "vertex_cut", "flexible_k"];

/// The five cumulative configurations: one buffer slot with a single
/// 16-row VRF and no fixed region; six slots; double VRF; vertex-cut at
/// D=12, tau=6; per-tile top-k fixed region.
pub fn ablation_configs(base: &Config) -> Vec<(String, Config)> {
    let mut stages = Vec::new();
    let mut cfg = base.clone();
    cfg.machine = MachineConfig {
        vrf_mode: VrfMode::Single,
        vrf_depth: 16,
        vertex_cut: false,
        k_policy: KPolicy::Fixed(0),
        ..with_slots(&base.machine, 1)
    };
    stages.push(cfg.clone());
    cfg.machine = with_slots(&cfg.machine, 6);
    stages.push(cfg.clone());
    cfg.machine.vrf_mode = VrfMode::Double;
    stages.push(cfg.clone());
    cfg.machine.vertex_cut = true;
    cfg.machine.vrf_depth = 12;
    cfg.machine.tau = 6;
    stages.push(cfg.clone());
    cfg.machine.k_policy = KPolicy::TopK;
    stages.push(cfg);
    ABLATION_STAGES
        .iter()
        .map(|s| s.to_string())
        .zip(stages)
        .collect()
}

/// Runs every ablation stage (concurrently) followed by the baseline,
/// labelled `grow`, at `base`'s GROW settings.
pub fn ablate(w: &Workload, base: &Config) -> Result<Vec<(String, Run)>> {
    let stages = ablation_configs(base);
    let mut runs: Vec<(String, Run)> = stages
        .par_iter()
        .map(|(label, cfg)| Ok((label.clone(), run_flexvector(w, cfg)?)))
        .collect::<Result<_>>()?;
    runs.push(("grow".to_string(), run_grow(w, base)?));
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Workload {
        Workload::power_law("small", 128, 256, 2.1, 16, 11, 16).unwrap()
    }

    #[test]
    fn axis_names_round_trip() {
        for a in SweepAxis::ALL {
            assert_eq!(a.name().parse::<SweepAxis>().unwrap(), a);
        }
        assert!(matches!(
            "depth".parse::<SweepAxis>(),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bad_axis_values() {
        let base = Config::default();
        assert!(apply_axis(&base, SweepAxis::VlenBits, "abc").is_err());
        assert!(apply_axis(&base, SweepAxis::VlenBits, "100").is_err());
        assert!(apply_axis(&base, SweepAxis::M, "0").is_err());
        assert!(apply_axis(&base, SweepAxis::VrfMode, "triple").is_err());
        assert!(apply_axis(&base, SweepAxis::Tau, "0").is_err());
        assert!(apply_axis(&base, SweepAxis::K, "-1").is_err());
    }

    #[test]
    fn m_axis_keeps_slot_size() {
        let base = Config::default();
        for m in [1, 6, 8] {
            let c = apply_axis(&base, SweepAxis::M, &m.to_string()).unwrap();
            assert_eq!(c.machine.m, m);
            assert_eq!(
                c.machine.dense_slot_bytes(),
                base.machine.dense_slot_bytes()
            );
            assert_eq!(
                c.machine.sparse_slot_bytes(),
                base.machine.sparse_slot_bytes()
            );
            assert_eq!(c.grow.m, m);
        }
        let six = apply_axis(&base, SweepAxis::M, "6").unwrap();
        assert_eq!(six.machine.dense_buffer_bytes, 2046);
    }

    #[test]
    fn vlen_axis_widens_dense_buffer() {
        let c = apply_axis(&Config::default(), SweepAxis::VlenBits, "512").unwrap();
        assert_eq!(c.machine.vlen_bits, 512);
        assert_eq!(c.machine.dense_buffer_bytes, 8192);
        assert_eq!(c.machine.sparse_buffer_bytes, 256);
    }

    #[test]
    fn k_axis() {
        let base = Config::default();
        assert_eq!(
            apply_axis(&base, SweepAxis::K, "3")
                .unwrap()
                .machine
                .k_policy,
            KPolicy::Fixed(3)
        );
        assert_eq!(
            apply_axis(&base, SweepAxis::K, "topk")
                .unwrap()
                .machine
                .k_policy,
            KPolicy::TopK
        );
    }

    #[test]
    fn singleton_sweep_equals_direct_run() {
        let w = small();
        let base = Config::default();
        let s = sweep(&w, &base, SweepAxis::Tau, &["6".to_string()]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].0, "tau=6");
        assert_eq!(s[0].1, run_flexvector(&w, &base).unwrap());
    }

    #[test]
    fn sweep_keeps_input_order() {
        let w = small();
        let vals: Vec<String> = ["8", "1", "6"].iter().map(|s| s.to_string()).collect();
        let s = sweep(&w, &Config::default(), SweepAxis::M, &vals).unwrap();
        let labels: Vec<&str> = s.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, ["m=8", "m=1", "m=6"]);
    }

    #[test]
    fn both_machines_match_oracle() {
        let w = small();
        let cfg = Config::default();
        let fv = run_flexvector(&w, &cfg).unwrap();
        let gr = run_grow(&w, &cfg).unwrap();
        assert!(fv.oracle_ok && gr.oracle_ok);
        assert_eq!(fv.output, gr.output);
        assert_eq!(fv.report.machine, "flexvector");
        assert_eq!(gr.report.machine, "grow");
        assert_eq!(fv.report.config_hash, cfg.hash());
    }

    #[test]
    fn ablation_stage_settings() {
        let stages = ablation_configs(&Config::default());
        let labels: Vec<&str> = stages.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, ABLATION_STAGES);
        let m: Vec<_> = stages
            .iter()
            .map(|(_, c)| {
                let mc = &c.machine;
                (mc.m, mc.vrf_mode, mc.vrf_depth, mc.vertex_cut, mc.k_policy)
            })
            .collect();
        use KPolicy::*;
        use VrfMode::*;
        assert_eq!(
            m,
            [
                (1, Single, 16, false, Fixed(0)),
                (6, Single, 16, false, Fixed(0)),
                (6, Double, 16, false, Fixed(0)),
                (6, Double, 12, true, Fixed(0)),
                (6, Double, 12, true, TopK),
            ]
        );
    }

    #[test]
    fn shape_checks() {
        let a = CsrMatrix::identity(4);
        assert!(matches!(
            Workload::new("x", a.clone(), DenseMatrix::zeros(3, 2), 2),
            Err(Error::Shape(_))
        ));
        assert!(Workload::new("x", a, DenseMatrix::zeros(4, 2), 2).is_ok());
    }

    #[test]
    fn tile_rows_override_repartitions() {
        let w = small();
        let mc = MachineConfig {
            tile_rows: 8,
            vrf_depth: 8,
            ..Default::default()
        };
        let prog = build_program(&w, &mc).unwrap();
        assert_eq!(prog.tile_rows, 8);
        assert_eq!(execute_functional(&prog).unwrap(), w.reference().unwrap());
    }
}
