//! Experiment description shared by all subcommands: graph source, workload
//! shape, configuration file, seed and output directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};

use flexvector::config::Config;
use flexvector::experiment::Workload;
use flexvector::graph::{
    gcn_layer_reference, gen_power_law, gen_sparse_features, gen_uniform, load_edge_list,
    load_matrix_market, normalize_adjacency, random_dense, spmm_reference, CsrMatrix, DenseMatrix,
    DEFAULT_FRAC_BITS,
};
use flexvector::preprocess::load_external_partition;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Grow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    PowerLaw,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WorkloadKind {
    /// Â × D with a random dense D.
    Spmm,
    /// Â × (X × W) with sparse features X and weights W.
    Gcn,
}

#[derive(Args, Debug, Clone)]
pub struct GraphSpec {
    /// Edge list ("src dst" per line); needs --nodes.
    #[arg(long, help_heading = "Graph")]
    pub edge_list: Option<PathBuf>,
    /// MatrixMarket coordinate file.
    #[arg(long, help_heading = "Graph")]
    pub mtx: Option<PathBuf>,
    /// Synthetic graph family; needs --nodes.
    #[arg(long, value_enum, help_heading = "Graph")]
    pub generator: Option<Generator>,
    #[arg(long, help_heading = "Graph")]
    pub nodes: Option<usize>,
    /// Undirected edges to generate (default 2 × nodes).
    #[arg(long, help_heading = "Graph")]
    pub edges: Option<usize>,
    /// Power-law exponent.
    #[arg(long, default_value_t = 2.1, help_heading = "Graph")]
    pub alpha: f64,
    /// Use adjacency values as given instead of the normalised Â.
    #[arg(long, help_heading = "Graph")]
    pub raw: bool,
    /// One block id per node, replacing the built-in edge-cut partitioner.
    #[arg(long, help_heading = "Graph")]
    pub partition: Option<PathBuf>,
}

pub enum Source<'a> {
    EdgeList(&'a Path),
    Mtx(&'a Path),
    Generated(Generator),
}

impl GraphSpec {
    pub fn source(&self) -> Result<Source<'_>> {
        match (&self.edge_list, &self.mtx, self.generator) {
            (Some(p), None, None) => Ok(Source::EdgeList(p)),
            (None, Some(p), None) => Ok(Source::Mtx(p)),
            (None, None, Some(g)) => Ok(Source::Generated(g)),
            _ => bail!("give exactly one of --edge-list, --mtx or --generator"),
        }
    }

    fn adjacency(&self, seed: u64) -> Result<CsrMatrix> {
        let nodes = || {
            self.nodes
                .context("--nodes is required for this graph source")
        };
        let adj = match self.source()? {
            Source::EdgeList(p) => {
                load_edge_list(p, nodes()?).with_context(|| format!("loading {}", p.display()))?
            }
            Source::Mtx(p) => {
                load_matrix_market(p).with_context(|| format!("loading {}", p.display()))?
            }
            Source::Generated(g) => {
                let n = nodes()?;
                let e = self.edges.unwrap_or(2 * n);
                match g {
                    Generator::PowerLaw => gen_power_law(n, e, self.alpha, seed)?,
                    Generator::Uniform => gen_uniform(n, e, seed)?,
                }
            }
        };
        if !adj.is_square() {
            bail!(
                "adjacency is {}x{}, expected square",
                adj.n_rows(),
                adj.n_cols()
            );
        }
        if self.raw {
            Ok(adj)
        } else {
            Ok(normalize_adjacency(&adj, DEFAULT_FRAC_BITS)?)
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct WorkloadArgs {
    #[arg(long, value_enum, default_value_t = WorkloadKind::Spmm, help_heading = "Workload")]
    pub workload: WorkloadKind,
    /// Width of the dense operand (output features).
    #[arg(long, default_value_t = 16, help_heading = "Workload")]
    pub features: usize,
    /// GCN input feature width (rows of W).
    #[arg(long, default_value_t = 32, help_heading = "Workload")]
    pub in_features: usize,
    /// GCN input feature density.
    #[arg(long, default_value_t = 0.1, help_heading = "Workload")]
    pub x_density: f64,
    /// Apply ReLU after a GCN layer.
    #[arg(long, help_heading = "Workload")]
    pub relu: bool,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[command(flatten)]
    pub graph: GraphSpec,
    #[command(flatten)]
    pub workload: WorkloadArgs,
    /// TOML file with [machine], [timing], [grow], [energy] and [area] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory for reports.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// A fully materialised experiment.
pub struct Loaded {
    pub cfg: Config,
    pub workload: Workload,
    layer: Option<Layer>,
}

struct Layer {
    x: CsrMatrix,
    w: DenseMatrix,
    relu: bool,
}

impl CommonArgs {
    pub fn load(&self) -> Result<Loaded> {
        let cfg = match &self.config {
            Some(p) => Config::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => Config::default(),
        };
        let a = self.graph.adjacency(self.seed)?;
        let n = a.n_rows();
        let wl = &self.workload;
        let (dense, layer) = match wl.workload {
            WorkloadKind::Spmm => (
                random_dense(n, wl.features, -8, 8, self.seed.wrapping_add(1))?,
                None,
            ),
            WorkloadKind::Gcn => {
                let x = gen_sparse_features(
                    n,
                    wl.in_features,
                    wl.x_density,
                    4,
                    self.seed.wrapping_add(2),
                )?;
                let w = random_dense(
                    wl.in_features,
                    wl.features,
                    -4,
                    4,
                    self.seed.wrapping_add(3),
                )?;
                let xw = spmm_reference(&x, &w)?;
                (
                    xw,
                    Some(Layer {
                        x,
                        w,
                        relu: wl.relu,
                    }),
                )
            }
        };
        let tile_rows = cfg.machine.tile_rows;
        let workload = match &self.graph.partition {
            Some(p) => {
                let part = load_external_partition(p, n, tile_rows)
                    .with_context(|| format!("loading {}", p.display()))?;
                Workload::with_partition("input", a, dense, part)?
            }
            None => Workload::new("input", a, dense, tile_rows)?,
        };
        Ok(Loaded {
            cfg,
            workload,
            layer,
        })
    }
}

impl Loaded {
    /// Post-processing applied to the SpMM output (ReLU for an activated layer).
    pub fn finish(&self, out: &DenseMatrix) -> DenseMatrix {
        match &self.layer {
            Some(l) if l.relu => out.map(|v| v.max(0)),
            _ => out.clone(),
        }
    }

    /// Reference result computed independently of the simulators.
    pub fn expected(&self) -> Result<DenseMatrix> {
        Ok(match &self.layer {
            Some(l) => gcn_layer_reference(&self.workload.a, &l.x, &l.w, l.relu)?,
            None => self.workload.reference()?,
        })
    }
}
