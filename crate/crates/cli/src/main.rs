//! Batch front end: preprocessing dumps, simulation runs, sweeps, the staged
//! ablation and a program pretty-printer. Every report is CSV.

mod spec;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use flexvector::experiment::{ablate, build_program, run_flexvector, run_grow, sweep, Run};
use flexvector::isa::{disassemble, Opcode, Program};
use flexvector::machine::{format_trace, simulate_timing};
use flexvector::metrics::{compare, to_csv, SimReport};
use flexvector::preprocess::{extract_tiles, plan_report, prepare_tiles, SparseTile};

use spec::{Baseline, CommonArgs, Loaded};

#[derive(Parser)]
#[command(
    name = "flexvector",
    version,
    about = "FlexVector SpMM toolchain and simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition, tile, split and plan; dump tiles, per-tile k and histograms.
    Preprocess(CommonArgs),
    /// Compile and simulate, optionally against the cache-centric baseline.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        baseline: Option<Baseline>,
        /// Also write the per-instruction timing trace.
        #[arg(long)]
        trace: bool,
    },
    /// Simulate one configuration per value of a machine parameter.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// vlen_bits, vrf_depth, m, vrf_mode, tau or k.
        #[arg(long)]
        axis: flexvector::experiment::SweepAxis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, value_enum)]
        baseline: Option<Baseline>,
    },
    /// Run the five cumulative ablation stages plus the baseline.
    Ablate(CommonArgs),
    /// Print a program, either compiled from a graph or read from a binary file.
    Disasm {
        #[command(flatten)]
        common: CommonArgs,
        /// Binary program to print instead of compiling one.
        #[arg(long, conflicts_with_all = ["edge_list", "mtx", "generator"])]
        program: Option<std::path::PathBuf>,
        /// Write the compiled program in binary form.
        #[arg(long)]
        save: Option<std::path::PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: simulated output does not match the reference");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every oracle check passed.
fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Preprocess(c) => cmd_preprocess(&c),
        Command::Run {
            common,
            baseline,
            trace,
        } => cmd_run(&common, baseline, trace),
        Command::Sweep {
            common,
            axis,
            values,
            baseline,
        } => cmd_sweep(&common, axis, &values, baseline),
        Command::Ablate(c) => cmd_ablate(&c),
        Command::Disasm {
            common,
            program,
            save,
        } => cmd_disasm(&common, program.as_deref(), save.as_deref()),
    }
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn histogram(values: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut h = Vec::new();
    for v in values {
        if v >= h.len() {
            h.resize(v + 1, 0);
        }
        h[v] += 1;
    }
    h
}

fn row_lengths(tiles: &[SparseTile]) -> impl Iterator<Item = usize> + '_ {
    tiles.iter().flat_map(|t| t.rows.iter().map(|r| r.nnz()))
}

fn cmd_preprocess(c: &CommonArgs) -> Result<bool> {
    let Loaded { cfg, workload, .. } = c.load()?;
    let mc = &cfg.machine;
    let tiles = extract_tiles(&workload.a, &workload.part).context("tiling")?;
    let tau = mc.vertex_cut.then_some(mc.tau);
    let plans = prepare_tiles(&tiles, tau, &mc.plan_params()).context("planning tiles")?;
    let cut: Vec<SparseTile> = plans.iter().map(|p| p.tile.clone()).collect();
    let hash = cfg.hash();

    write_out(&c.out, "tiles.txt", &plan_report(&plans))?;

    let mut k_csv = format!("# config_hash={hash}\ntile_row,tile_col,k,max_rnz,subrows,nnz\n");
    for p in &plans {
        let _ = writeln!(
            k_csv,
            "{},{},{},{},{},{}",
            p.tile.tile_row,
            p.tile.tile_col,
            p.k,
            p.tile.max_rnz,
            p.tile.rows.len(),
            p.tile.nnz()
        );
    }
    write_out(&c.out, "k_per_tile.csv", &k_csv)?;

    let before = histogram(row_lengths(&tiles));
    let after = histogram(row_lengths(&cut));
    let mut rnz = format!("# config_hash={hash}\nrnz,rows_before_cut,rows_after_cut\n");
    for r in 1..before.len().max(after.len()) {
        let b = before.get(r).copied().unwrap_or(0);
        let a = after.get(r).copied().unwrap_or(0);
        let _ = writeln!(rnz, "{r},{b},{a}");
    }
    write_out(&c.out, "rnz_hist.csv", &rnz)?;

    let cnz_hist = histogram(
        cut.iter()
            .flat_map(|t| t.col_counts().into_iter().filter(|&n| n > 0)),
    );
    let mut cnz = format!("# config_hash={hash}\ncnz,columns\n");
    for (v, n) in cnz_hist.iter().enumerate().skip(1) {
        let _ = writeln!(cnz, "{v},{n}");
    }
    write_out(&c.out, "cnz_hist.csv", &cnz)?;

    let max_before = tiles.iter().map(|t| t.max_rnz).max().unwrap_or(0);
    let max_after = cut.iter().map(|t| t.max_rnz).max().unwrap_or(0);
    let stats = [
        ("nodes", workload.a.n_rows()),
        ("nnz", workload.a.nnz()),
        ("tiles", plans.len()),
        ("subrows", cut.iter().map(|t| t.rows.len()).sum()),
        ("max_rnz_before_cut", max_before),
        ("max_rnz_after_cut", max_after),
        ("k_total", plans.iter().map(|p| p.k).sum()),
    ];
    let mut s = format!("# config_hash={hash}\nstat,value\n");
    for (name, v) in stats {
        let _ = writeln!(s, "{name},{v}");
        println!("{name}: {v}");
    }
    write_out(&c.out, "preprocess_stats.csv", &s)?;
    Ok(true)
}

const COUNTER_HEADER: &str = "label,cycles,dram_read_bits,dram_write_bits,sram_sparse_accesses,\
sram_dense_accesses,vrf_reads,vrf_writes,misses,mac_ops";

fn counters_csv(hash: &str, reports: &[(String, SimReport)]) -> String {
    let mut s = format!("# config_hash={hash}\n{COUNTER_HEADER}");
    for op in Opcode::ALL {
        let _ = write!(s, ",{op}");
    }
    s.push_str(
        ",energy_dram_pj,energy_sram_pj,energy_vrf_pj,energy_mac_pj,energy_leakage_pj,area_um2\n",
    );
    for (label, r) in reports {
        let c = &r.counters;
        let _ = write!(
            s,
            "{label},{},{},{},{},{},{},{},{},{}",
            c.cycles,
            c.dram_read_bits,
            c.dram_write_bits,
            c.sram_sparse_accesses,
            c.sram_dense_accesses,
            c.vrf_reads,
            c.vrf_writes,
            c.vrf_miss_count,
            c.mac_ops
        );
        for n in c.instr_counts {
            let _ = write!(s, ",{n}");
        }
        let e = &r.energy;
        let _ = writeln!(
            s,
            ",{:.3},{:.3},{:.3},{:.3},{:.3},{:.3}",
            e.dram, e.sram, e.vrf, e.mac, e.leakage, r.area_um2
        );
    }
    s
}

/// Applies the layer's activation and checks against the workload oracle.
fn check(loaded: &Loaded, run: &Run) -> Result<bool> {
    let out = loaded.finish(&run.output);
    Ok(out == loaded.expected()?)
}

fn report_oracle(label: &str, ok: bool) {
    if !ok {
        eprintln!("{label}: output mismatch");
    }
}

fn cmd_run(c: &CommonArgs, baseline: Option<Baseline>, trace: bool) -> Result<bool> {
    let loaded = c.load()?;
    let cfg = &loaded.cfg;
    let hash = cfg.hash();
    let fv = run_flexvector(&loaded.workload, cfg).context("simulating FlexVector")?;
    let mut ok = check(&loaded, &fv)?;
    report_oracle("flexvector", ok);
    let mut reports = vec![("flexvector".to_string(), fv.report)];
    if baseline == Some(Baseline::Grow) {
        let g = run_grow(&loaded.workload, cfg).context("simulating the baseline")?;
        let g_ok = check(&loaded, &g)?;
        report_oracle("grow", g_ok);
        ok &= g_ok;
        reports.push(("grow".to_string(), g.report));
    }
    if !ok {
        return Ok(false);
    }
    let base = if baseline.is_some() {
        "grow"
    } else {
        "flexvector"
    };
    let rows = compare(&reports, base)?;
    write_out(&c.out, "run.csv", &to_csv(&hash, &rows))?;
    write_out(&c.out, "counters.csv", &counters_csv(&hash, &reports))?;
    if trace {
        let prog = build_program(&loaded.workload, &cfg.machine)?;
        let (_, entries) = simulate_timing(&prog, &cfg.machine, &cfg.timing, true)?;
        write_out(&c.out, "trace.txt", &format_trace(&prog, &entries))?;
    }
    for r in &rows {
        println!(
            "{}: cycles={} speedup={:.3} dram_bits={} misses={}",
            r.label, r.cycles, r.speedup, r.dram_bits, r.misses
        );
    }
    Ok(true)
}

fn cmd_sweep(
    c: &CommonArgs,
    axis: flexvector::experiment::SweepAxis,
    values: &[String],
    baseline: Option<Baseline>,
) -> Result<bool> {
    let loaded = c.load()?;
    let cfg = &loaded.cfg;
    let runs = sweep(&loaded.workload, cfg, axis, values).context("running sweep")?;
    let mut ok = true;
    let mut reports = Vec::with_capacity(runs.len() + 1);
    for (label, run) in runs {
        let good = check(&loaded, &run)?;
        report_oracle(&label, good);
        ok &= good;
        reports.push((label, run.report));
    }
    let base = match baseline {
        Some(Baseline::Grow) => {
            let g = run_grow(&loaded.workload, cfg).context("simulating the baseline")?;
            let good = check(&loaded, &g)?;
            report_oracle("grow", good);
            ok &= good;
            reports.push(("grow".to_string(), g.report));
            "grow".to_string()
        }
        None => reports[0].0.clone(),
    };
    if !ok {
        return Ok(false);
    }
    let rows = compare(&reports, &base)?;
    let name = format!("sweep_{axis}.csv");
    write_out(&c.out, &name, &to_csv(&cfg.hash(), &rows))?;
    println!(
        "wrote {} rows to {}",
        rows.len(),
        c.out.join(name).display()
    );
    Ok(true)
}

fn cmd_ablate(c: &CommonArgs) -> Result<bool> {
    let loaded = c.load()?;
    let runs = ablate(&loaded.workload, &loaded.cfg).context("running ablation")?;
    let mut ok = true;
    let mut reports = Vec::with_capacity(runs.len());
    for (label, run) in runs {
        let good = check(&loaded, &run)?;
        report_oracle(&label, good);
        ok &= good;
        reports.push((label, run.report));
    }
    if !ok {
        return Ok(false);
    }
    let rows = compare(&reports, "grow")?;
    write_out(&c.out, "ablation.csv", &to_csv(&loaded.cfg.hash(), &rows))?;
    for r in &rows {
        println!("{}: speedup vs grow {:.3}", r.label, r.speedup);
    }
    Ok(true)
}

fn cmd_disasm(c: &CommonArgs, program: Option<&Path>, save: Option<&Path>) -> Result<bool> {
    let prog = match program {
        Some(path) => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            Program::from_bytes(&bytes).with_context(|| format!("decoding {}", path.display()))?
        }
        None => {
            if c.graph.source().is_err() {
                bail!("disasm needs --program or a graph source");
            }
            let loaded = c.load()?;
            build_program(&loaded.workload, &loaded.cfg.machine).context("compiling")?
        }
    };
    if let Some(path) = save {
        fs::write(path, prog.to_bytes()).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", disassemble(&prog.instructions));
    Ok(true)
}
