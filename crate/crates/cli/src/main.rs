use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use mdgcnn::container::{precompute, ContainerError, PrecomputeContainer, PrecomputeOptions, DEFAULT_R_MAX_FACTOR};
use mdgcnn::conv::{read_signal_csv, ConvError};
use mdgcnn::dirac::{propagate, DiracMode};
use mdgcnn::mesh::io::{heat_color, label_color, load_mesh, write_ply};
use mdgcnn::network::arch::{ArchConfig, ModelKind};
use mdgcnn::network::checkpoint::{read_checkpoint, write_checkpoint};
use mdgcnn::network::train::{predict, train, write_log_csv, TrainConfig};
use mdgcnn::network::NetworkError;
use mdgcnn::synthetic::{Dataset, TextureTask};
use mdgcnn::verify::audit;
use mdgcnn::windows::{WindowError, WindowSpec};

const EXIT_MESH: u8 = 2;
const EXIT_TOO_MANY_INVALID: u8 = 3;
const EXIT_SHAPE: u8 = 4;
const EXIT_VERIFY: u8 = 5;

#[derive(Parser)]
#[command(name = "mdgcnn", version, about = "Directional geodesic convolution on triangle meshes")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute GPC maps, window tensors and the simplification pyramid of a mesh.
    Precompute {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        nrho: usize,
        #[arg(long)]
        ntheta: usize,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        levels: usize,
        /// GPC maps reach this multiple of the window radius.
        #[arg(long, default_value_t = DEFAULT_R_MAX_FACTOR)]
        rmax_factor: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a network and write a checkpoint plus a CSV log.
    Train {
        #[arg(long)]
        pre: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Architecture file, JSON or `key = value` lines.
        #[arg(long)]
        arch: PathBuf,
        /// Overrides the model named in the architecture file.
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long, default_value_t = 50)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        batch_size: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the checkpoint path with a `.csv` extension.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run a checkpoint on a per-vertex signal; writes CSV or a label-colored PLY.
    Predict {
        #[arg(long)]
        pre: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Propagate a point source with a shifted Dirac template.
    DemoDirac {
        #[arg(long)]
        pre: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value = "dir")]
        mode: DiracMode,
        #[arg(long, default_value_t = 0)]
        source: usize,
        /// Output stem; `.ply` and `.csv` files are written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Audit a precompute container.
    Verify {
        #[arg(long)]
        pre: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate the oriented-texture classification dataset on a container's mesh.
    MakeDataset {
        #[arg(long)]
        pre: PathBuf,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 1, err: e.into() }
    }
}

fn shape(msg: String) -> Failure {
    Failure { code: EXIT_SHAPE, err: anyhow!(msg) }
}

fn container_failure(e: ContainerError) -> Failure {
    let code = match &e {
        ContainerError::Mesh(_) | ContainerError::Gpc(_) => EXIT_MESH,
        ContainerError::Window(WindowError::TooManyInvalid { .. }) => EXIT_TOO_MANY_INVALID,
        _ => 1,
    };
    Failure { code, err: e.into() }
}

fn network_failure(e: NetworkError) -> Failure {
    let code = match &e {
        NetworkError::ShapeMismatch(_) | NetworkError::Conv(ConvError::ShapeMismatch(_)) => EXIT_SHAPE,
        _ => 1,
    };
    Failure { code, err: e.into() }
}

type CmdResult = Result<(), Failure>;

fn load_container(path: &Path) -> Result<PrecomputeContainer, Failure> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    PrecomputeContainer::read(BufReader::new(f)).map_err(container_failure)
}

fn check_arch(cfg: &ArchConfig, pre: &PrecomputeContainer) -> CmdResult {
    let spec = pre.options.spec;
    if (cfg.n_rho, cfg.n_theta) != (spec.n_rho, spec.n_theta) {
        return Err(shape(format!(
            "architecture uses {}x{} windows, container holds {}x{}",
            cfg.n_rho, cfg.n_theta, spec.n_rho, spec.n_theta
        )));
    }
    if cfg.levels() > pre.levels.len() {
        return Err(shape(format!("architecture needs {} levels, container has {}", cfg.levels(), pre.levels.len())));
    }
    Ok(())
}

fn cmd_precompute(
    mesh: &Path,
    nrho: usize,
    ntheta: usize,
    radius: f64,
    levels: usize,
    rmax_factor: f64,
    out: &Path,
) -> CmdResult {
    let mesh = load_mesh(mesh).map_err(|e| Failure { code: EXIT_MESH, err: e.into() })?;
    let spec = WindowSpec::new(nrho, ntheta, radius)?;
    let opts = PrecomputeOptions { r_max_factor: rmax_factor, ..PrecomputeOptions::new(spec, levels) };
    let c = precompute(&mesh, opts).map_err(container_failure)?;
    let mut w = BufWriter::new(File::create(out)?);
    c.write(&mut w).map_err(container_failure)?;
    let sizes: Vec<String> = c.levels.iter().map(|l| l.mesh.n_vertices().to_string()).collect();
    println!("wrote {} ({} levels, vertices {})", out.display(), c.levels.len(), sizes.join(" -> "));
    Ok(())
}

fn cmd_train(
    pre: &Path,
    data: &Path,
    arch: &Path,
    model: Option<ModelKind>,
    tc: TrainConfig,
    out: &Path,
    log: Option<PathBuf>,
) -> CmdResult {
    let pre = load_container(pre)?;
    let ds = Dataset::read(BufReader::new(File::open(data)?))?;
    let mut cfg = ArchConfig::parse(&fs::read_to_string(arch)?)?;
    if let Some(m) = model {
        cfg.model = m;
    }
    if ds.mesh_hash != pre.mesh_hash {
        return Err(shape("dataset was generated for a different mesh".into()));
    }
    check_arch(&cfg, &pre)?;
    if let Some(s) = ds.samples.iter().find(|s| s.input.channels != cfg.in_channels) {
        return Err(shape(format!(
            "samples have {} channels, architecture expects {}",
            s.input.channels, cfg.in_channels
        )));
    }
    let levels = pre.network_levels();
    let (graph, mut params) = cfg.build(tc.seed).map_err(network_failure)?;
    let metrics = train(&graph, &mut params, &levels, &ds.samples, &tc, |m, _| {
        println!("epoch {:>4}  loss {:.6}  accuracy {:.4}", m.epoch, m.loss, m.accuracy);
    })
    .map_err(network_failure)?;
    write_checkpoint(BufWriter::new(File::create(out)?), &cfg, &params)?;
    let log = log.unwrap_or_else(|| out.with_extension("csv"));
    write_log_csv(&metrics, BufWriter::new(File::create(&log)?))?;
    println!("wrote {} and {}", out.display(), log.display());
    Ok(())
}

fn cmd_predict(pre: &Path, model: &Path, signal: &Path, out: &Path) -> CmdResult {
    let pre = load_container(pre)?;
    let (cfg, graph, params) = read_checkpoint(BufReader::new(File::open(model)?))?;
    check_arch(&cfg, &pre)?;
    let input = read_signal_csv(BufReader::new(File::open(signal)?))
        .map_err(|e| Failure { code: EXIT_SHAPE, err: e.into() })?;
    let nv = pre.mesh().n_vertices();
    if (input.n_vertices, input.channels) != (nv, cfg.in_channels) {
        return Err(shape(format!(
            "signal is {}x{}, expected {nv}x{}",
            input.n_vertices, input.channels, cfg.in_channels
        )));
    }
    let (probs, labels) = predict(&graph, &params, &pre.network_levels(), &input).map_err(network_failure)?;
    // one row per shape for classification, one per vertex for segmentation
    let row = |v: usize| if probs.n_vertices == 1 { 0 } else { v };
    if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("ply")) {
        let colors: Vec<[u8; 3]> = (0..nv).map(|v| label_color(labels[row(v)])).collect();
        write_ply(pre.mesh(), &colors, out)?;
    } else {
        let mut w = csv::Writer::from_path(out)?;
        let mut header = vec!["vertex".to_string(), "label".to_string()];
        header.extend((0..probs.channels).map(|c| format!("p{c}")));
        w.write_record(&header)?;
        for v in 0..nv {
            let mut rec = vec![v.to_string(), labels[row(v)].to_string()];
            rec.extend(probs.row(row(v)).iter().map(|p| p.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    if probs.n_vertices == 1 {
        println!("predicted class {}", labels[0]);
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_demo_dirac(pre: &Path, t: f64, n: usize, mode: DiracMode, source: usize, out: &Path) -> CmdResult {
    let pre = load_container(pre)?;
    let level = &pre.levels[0];
    let r = propagate(&level.mesh, &level.windows, source, t, n, mode)
        .map_err(|e| Failure { code: EXIT_SHAPE, err: e.into() })?;
    let peak = r.response.iter().cloned().fold(0.0, f64::max);
    let colors: Vec<[u8; 3]> =
        r.response.iter().map(|&x| heat_color(if peak > 0.0 { x / peak } else { 0.0 })).collect();
    let (ply, csv_path) = (out.with_extension("ply"), out.with_extension("csv"));
    write_ply(&level.mesh, &colors, &ply)?;
    r.write_csv(BufWriter::new(File::create(&csv_path)?))?;
    let spec = level.windows.spec;
    let half = spec.radius / (spec.n_rho + 1) as f64;
    let frac = r.annulus_fraction(&level.mesh.vertex_areas(), n as f64 * r.t, half);
    println!("t = {}: {:.1}% of the response within {:.3} of radius {:.3}", r.t, 100.0 * frac, half, n as f64 * r.t);
    println!("wrote {} and {}", ply.display(), csv_path.display());
    Ok(())
}

fn cmd_verify(pre: &Path, seed: u64) -> CmdResult {
    let pre = load_container(pre)?;
    let report = audit(&pre, seed);
    for c in &report.checks {
        println!("{c}");
    }
    if report.all_passed() {
        println!("all checks passed");
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            err: anyhow!("{} check(s) failed", report.checks.iter().filter(|c| !c.passed).count()),
        })
    }
}

fn cmd_make_dataset(pre: &Path, samples: usize, seed: u64, out: &Path) -> CmdResult {
    let pre = load_container(pre)?;
    let ds = Dataset { mesh_hash: pre.mesh_hash, samples: TextureTask::default().generate(pre.mesh(), samples, seed) };
    ds.write(BufWriter::new(File::create(out)?))?;
    println!("wrote {} samples to {}", samples, out.display());
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Precompute { mesh, nrho, ntheta, radius, levels, rmax_factor, out } => {
            cmd_precompute(&mesh, nrho, ntheta, radius, levels, rmax_factor, &out)
        }
        Command::Train { pre, data, arch, model, epochs, seed, batch_size, lr, out, log } => {
            cmd_train(&pre, &data, &arch, model, TrainConfig { epochs, batch_size, lr, seed }, &out, log)
        }
        Command::Predict { pre, model, signal, out } => cmd_predict(&pre, &model, &signal, &out),
        Command::DemoDirac { pre, t, n, mode, source, out } => cmd_demo_dirac(&pre, t, n, mode, source, &out),
        Command::Verify { pre, seed } => cmd_verify(&pre, seed),
        Command::MakeDataset { pre, samples, seed, out } => cmd_make_dataset(&pre, samples, seed, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
