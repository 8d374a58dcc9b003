//! Command-line definitions and the batch driver behind the `altjulia` binary.

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use altjulia_core::{
    classify, project_volume, read_raw_volume, write_atomic, write_escape_ppm, write_mask_ppm, write_ppm,
    write_raw_volume, Axis4, ClassificationResult, Complex64, ConnectivityClass, Error as CoreError, IterationConfig,
    MapParams, Palette, Parallelism, Sampler, SliceSpec, Viewport, VolumeSpec, DEFAULT_MAX, DEFAULT_MIN,
};
use clap::{Args, Parser, Subcommand};

use crate::complex::parse_complex;
use crate::server::{self, ServerConfig};

#[derive(Debug, Parser)]
#[command(
    name = "altjulia",
    version,
    about = "Connectivity atlas for alternated quadratic Julia sets"
)]
pub struct Cli {
    #[command(flatten)]
    pub shared: SharedOptions,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct SharedOptions {
    /// Quartic iterations spent deciding boundedness
    #[arg(long, global = true, default_value_t = IterationConfig::default().max_quartic_iters)]
    pub iters: u32,
    /// Extra quartic steps available to the cycle search
    #[arg(long = "cycle-budget", global = true, default_value_t = IterationConfig::default().cycle_search_budget)]
    pub cycle_budget: u32,
    /// Relative tolerance for periodicity detection
    #[arg(long, global = true, default_value_t = IterationConfig::default().cycle_tolerance)]
    pub tol: f64,
    /// Worker threads; 1 runs serially, 0 or unset uses all cores
    #[arg(long, global = true, env = "ALTJULIA_THREADS")]
    pub threads: Option<usize>,
}

impl SharedOptions {
    pub fn config(&self) -> IterationConfig {
        IterationConfig {
            max_quartic_iters: self.iters,
            cycle_search_budget: self.cycle_budget,
            cycle_tolerance: self.tol,
            ..IterationConfig::default()
        }
    }

    pub fn parallelism(&self) -> Parallelism {
        Parallelism::from_threads(self.threads)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify one parameter pair and print a key=value record
    Classify {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        c1: Complex64,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        c2: Complex64,
    },
    /// Sample a 2D slice with two fixed coordinates and write a PPM
    Slice {
        /// Two fixed coordinates, e.g. re1=0,im1=-1.05
        #[arg(long, allow_hyphen_values = true, value_parser = parse_fixed_pair)]
        fix: FixedPair,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        res: u32,
        #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_MIN)]
        min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_MAX)]
        max: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample a 3D volume with one fixed coordinate and write raw + JSON files
    Volume {
        /// One fixed coordinate, e.g. im2=0
        #[arg(long, allow_hyphen_values = true, value_parser = parse_fixed)]
        fix: (Axis4, f64),
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        res: u32,
        #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_MIN)]
        min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_MAX)]
        max: f64,
        /// Output base path; `.raw` and `.json` are appended
        #[arg(long)]
        out: PathBuf,
    },
    /// Project one class of a stored volume along a free axis
    Project {
        /// Volume base path, as given to `volume --out`
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        axis: Axis4,
        #[arg(long)]
        class: ConnectivityClass,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the filled Julia set of one parameter pair
    Julia {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        c1: Complex64,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
        c2: Complex64,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_complex, default_value = "0")]
        center: Complex64,
        #[arg(long = "half-width", default_value_t = 2.0)]
        half_width: f64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..), default_value_t = 512)]
        res: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Start the HTTP service
    Serve {
        #[arg(long, env = "ALTJULIA_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Directory with the explorer UI bundle served at `/`
        #[arg(long = "ui-dir")]
        ui_dir: Option<PathBuf>,
        /// Largest accepted image side in pixels
        #[arg(long = "res-cap", default_value_t = server::DEFAULT_RES_CAP)]
        res_cap: u32,
        /// Number of cached responses
        #[arg(long = "cache-size", default_value_t = server::DEFAULT_CACHE_SIZE)]
        cache_size: usize,
        /// Concurrent slice/julia renders before answering 503
        #[arg(long = "heavy-jobs", default_value_t = server::DEFAULT_HEAVY_JOBS)]
        heavy_jobs: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPair(pub [(Axis4, f64); 2]);

/// Parses `axis=value` (`axis:value` is accepted as well).
pub fn parse_fixed(text: &str) -> Result<(Axis4, f64), String> {
    let (axis, value) = text
        .split_once(['=', ':'])
        .ok_or_else(|| format!("expected <axis>=<value> with axis one of re1, im1, re2, im2, got {text:?}"))?;
    let axis: Axis4 = axis.trim().parse().map_err(|e: CoreError| e.to_string())?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("invalid coordinate value {value:?} for {axis}"))?;
    if !value.is_finite() {
        return Err(format!("coordinate value for {axis} must be finite"));
    }
    Ok((axis, value))
}

pub fn parse_fixed_pair(text: &str) -> Result<FixedPair, String> {
    let parts: Vec<&str> = text.split(',').collect();
    let [a, b] = parts.as_slice() else {
        return Err(format!(
            "expected two fixed coordinates like re1=0,im1=-1.05, got {text:?}"
        ));
    };
    let (a, b) = (parse_fixed(a)?, parse_fixed(b)?);
    if a.0 == b.0 {
        return Err(format!("axis {} is fixed twice", a.0));
    }
    Ok(FixedPair([a, b]))
}

/// Single-line `key=value` record for one classification.
pub fn classify_record(result: &ClassificationResult) -> String {
    let period = result.period().map_or_else(|| "none".to_string(), |p| p.to_string());
    format!(
        "class={} fate_zero={} fate_crit={} period={} low_confidence={}",
        result.class.name(),
        result.fate_zero,
        result.fate_crit,
        period,
        result.low_confidence
    )
}

/// Colors of a projection mask: the class color on white, black for the
/// totally disconnected class (whose palette color is white).
pub fn mask_colors(palette: &Palette, class: ConnectivityClass) -> ([u8; 3], [u8; 3]) {
    let on = match class {
        ConnectivityClass::TotallyDisconnected => [0, 0, 0],
        other => palette.color(other),
    };
    (on, [255, 255, 255])
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Invalid arguments detected after parsing; exit status 2.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Failed(#[from] anyhow::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Failed(_) => 1,
        }
    }
}

impl From<CoreError> for RunError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::Io { .. } | CoreError::Sidecar { .. } | CoreError::ThreadPool(_) | CoreError::Cancelled => {
                RunError::Failed(err.into())
            }
            _ => RunError::Usage(err.to_string()),
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), RunError> {
    let config = cli.shared.config();
    config.validate()?;
    let sampler = Sampler::new().parallelism(cli.shared.parallelism());
    let palette = Palette::default();

    match cli.command {
        Command::Classify { c1, c2 } => {
            let params = MapParams::new(c1, c2);
            config.check_override(&params)?;
            writeln!(stdout, "{}", classify_record(&classify(&params, &config))).map_err(anyhow::Error::from)?;
        }
        Command::Slice {
            fix,
            res,
            min,
            max,
            out,
        } => {
            let spec = SliceSpec::with_bounds(fix.0, min, max, res)?;
            let grid = sampler.slice2d(&spec, &config)?;
            write_atomic(&out, &write_ppm(&grid, &palette))?;
        }
        Command::Volume {
            fix,
            res,
            min,
            max,
            out,
        } => {
            let spec = VolumeSpec::with_bounds(fix, min, max, res)?;
            let volume = sampler.volume3d(&spec, &config)?;
            write_raw_volume(&volume, &out)?;
        }
        Command::Project {
            input,
            axis,
            class,
            out,
        } => {
            let volume = read_raw_volume(&input)?;
            let mask = project_volume(&volume, axis, class)?;
            let (on, off) = mask_colors(&palette, class);
            write_atomic(&out, &write_mask_ppm(&mask, on, off))?;
        }
        Command::Julia {
            c1,
            c2,
            center,
            half_width,
            res,
            out,
        } => {
            let params = MapParams::new(c1, c2);
            let viewport = Viewport::square(center, half_width, res);
            let grid =
                altjulia_core::render_filled_julia_with(&params, &viewport, &config, cli.shared.parallelism(), None)?;
            write_atomic(
                &out,
                &write_escape_ppm(&grid, crate::JULIA_INTERIOR, &crate::JULIA_GRADIENT),
            )?;
        }
        Command::Serve {
            port,
            host,
            ui_dir,
            res_cap,
            cache_size,
            heavy_jobs,
        } => {
            if cache_size == 0 || heavy_jobs == 0 || res_cap == 0 {
                return Err(RunError::Usage(
                    "--res-cap, --cache-size and --heavy-jobs must be positive".into(),
                ));
            }
            let server_config = ServerConfig {
                res_cap,
                cache_size,
                heavy_jobs,
                ui_dir,
                config,
            };
            let addr = SocketAddr::new(host, port);
            let runtime = tokio::runtime::Runtime::new().map_err(anyhow::Error::from)?;
            runtime.block_on(server::serve(addr, server_config))?;
        }
    }
    Ok(())
}
