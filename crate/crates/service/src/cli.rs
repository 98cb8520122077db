//! `decompose` command line.

use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand};
use decompose_core::io::AlphaDepth;
use decompose_core::{
    collect_pixel_colors, composite_stack, load_image, load_layerstack, recolor,
    reconstruction_error, save_layerstack_with_depth, save_png, simplify_palette, solve_alphas,
    Color, Error, LayerStack, LevelReport, OrderedPalette, PaletteDocument, SimplifyParams,
    SolveOptions,
};
use serde_json::json;

use crate::config::{Config, DEFAULT_PORT};
use crate::error::error_kind;

#[derive(Debug, Parser)]
#[command(name = "decompose", version, about = "Decompose paintings into translucent layers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract a palette from an image and print it as JSON.
    Palette(PaletteArgs),
    /// Solve for layer opacities and save the layer stack directory.
    Solve(SolveArgs),
    /// Recomposite a saved layer stack into a PNG.
    Composite(CompositeArgs),
    /// Change one layer's color and write the recomposited PNG.
    Recolor(RecolorArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct PaletteArgs {
    pub image: PathBuf,
    /// RANSAC inlier distance.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Stop fitting planes once this fraction of surface samples is left.
    #[arg(long)]
    pub termination: Option<f64>,
    /// Fraction of pixels each plane must keep inside.
    #[arg(long)]
    pub inside: Option<f64>,
    /// Mean-shift bandwidth for merging nearby vertices.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the palette here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub image: PathBuf,
    /// Palette JSON as written by `decompose palette`.
    pub palette: PathBuf,
    /// Palette indices bottom to top; for opaque images the first is the
    /// background.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub order: Vec<usize>,
    #[arg(long)]
    pub w_opaque: Option<f64>,
    #[arg(long)]
    pub w_spatial: Option<f64>,
    #[arg(long)]
    pub pyramid_min_dim: Option<usize>,
    /// Iteration cap for every pyramid level.
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Bit depth of the saved opacity PNGs.
    #[arg(long, default_value_t = 16, value_parser = PossibleValuesParser::new(["8", "16"]).map(|s| s.parse::<u8>().unwrap()))]
    pub alpha_bits: u8,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompositeArgs {
    pub dir: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also report the reconstruction error against this image.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecolorArgs {
    pub dir: PathBuf,
    /// Stack index: 0 is the bottom (background), 1 the first layer above.
    #[arg(long)]
    pub layer: usize,
    /// New color as r,g,b.
    #[arg(long, value_parser = parse_color)]
    pub color: Color,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "DECOMPOSE_PORT", default_value_t = DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    /// Largest accepted upload, in MiB.
    #[arg(long)]
    pub max_upload_mb: Option<usize>,
}

fn parse_color(raw: &str) -> Result<Color, String> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    let [r, g, b] = parts[..] else {
        return Err(format!("expected r,g,b, got {raw:?}"));
    };
    let channel = |s: &str| s.parse::<u8>().map_err(|e| format!("{s:?}: {e}"));
    Ok([channel(r)?, channel(g)?, channel(b)?])
}

/// Parses `args` and runs the command. Usage errors exit with 2, as do
/// invalid parameter values; other failures print one JSON error line on
/// stderr and exit with 1.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!(
                "{}",
                json!({ "error": { "kind": error_kind(&err), "message": err.to_string() } })
            );
            match err {
                Error::InvalidParameter(_) | Error::IndexOutOfRange { .. } => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Palette(args) => palette(args),
        Command::Solve(args) => solve(args),
        Command::Composite(args) => composite(args),
        Command::Recolor(args) => recolor_cmd(args),
        Command::Serve(args) => serve(args),
    }
}

fn print_json(value: serde_json::Value) {
    println!("{value}");
}

fn palette(args: PaletteArgs) -> Result<(), Error> {
    let defaults = SimplifyParams::default();
    let params = SimplifyParams {
        ransac_distance_threshold: args.threshold.unwrap_or(defaults.ransac_distance_threshold),
        termination_fraction: args.termination.unwrap_or(defaults.termination_fraction),
        inside_fraction: args.inside.unwrap_or(defaults.inside_fraction),
        meanshift_bandwidth: args.bandwidth.unwrap_or(defaults.meanshift_bandwidth),
        ransac_iterations: args.iterations.unwrap_or(defaults.ransac_iterations),
        surface_samples: args.samples.unwrap_or(defaults.surface_samples),
        seed: args.seed.unwrap_or(defaults.seed),
    };
    params.validate()?;
    let image = load_image(&args.image)?;
    let result = simplify_palette(&collect_pixel_colors(&image)?, &params)?;
    let doc = PaletteDocument::new(&result.palette, Some(params), Some(result.diagnostics));
    let text = serde_json::to_string_pretty(&doc)?;
    match args.output {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn read_palette(path: &Path) -> Result<PaletteDocument, Error> {
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn solve(args: SolveArgs) -> Result<(), Error> {
    let image = load_image(&args.image)?;
    let doc = read_palette(&args.palette)?;
    let palette = OrderedPalette::from_palette(&doc.palette()?, &args.order, image.mode())?;
    let defaults = SolveOptions::default();
    let opts = SolveOptions {
        w_opaque: args.w_opaque.unwrap_or(defaults.w_opaque),
        w_spatial: args.w_spatial.unwrap_or(defaults.w_spatial),
        pyramid_min_dim: args.pyramid_min_dim.unwrap_or(defaults.pyramid_min_dim),
        max_iterations_per_level: args.max_iterations.unwrap_or(defaults.max_iterations_per_level),
        ..defaults
    };
    let mut progress = |r: &LevelReport| {
        eprintln!(
            "{}",
            json!({
                "level": r.level,
                "level_count": r.level_count,
                "width": r.width,
                "height": r.height,
                "energy": r.energy,
                "iterations": r.iterations,
            })
        );
    };
    let alphas = solve_alphas(&image, &palette, &opts, &mut progress)?;
    let stack = LayerStack::new(palette, alphas, image.content_hash(), opts)?
        .with_simplify_params(doc.params);
    let depth = if args.alpha_bits == 8 {
        AlphaDepth::Eight
    } else {
        AlphaDepth::Sixteen
    };
    save_layerstack_with_depth(&stack, &args.output, depth)?;
    let err = reconstruction_error(&image, &composite_stack(&stack))?;
    print_json(json!({
        "output": args.output,
        "layers": stack.palette.layer_count(),
        "rmse": err.rmse,
        "max_abs": err.max_abs,
    }));
    Ok(())
}

fn composite(args: CompositeArgs) -> Result<(), Error> {
    let stack = load_layerstack(&args.dir)?;
    let image = composite_stack(&stack);
    save_png(&image, &args.output)?;
    let mut report = json!({ "output": args.output });
    if let Some(reference) = &args.reference {
        let err = reconstruction_error(&load_image(reference)?, &image)?;
        report["rmse"] = json!(err.rmse);
        report["max_abs"] = json!(err.max_abs);
    }
    print_json(report);
    Ok(())
}

fn recolor_cmd(args: RecolorArgs) -> Result<(), Error> {
    let stack = recolor(&load_layerstack(&args.dir)?, args.layer, args.color)?;
    save_png(&composite_stack(&stack), &args.output)?;
    print_json(json!({ "output": args.output }));
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), Error> {
    let mut config = Config::from_env();
    if let Some(mb) = args.max_upload_mb {
        config.max_upload_bytes = mb * 1024 * 1024;
    }
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!(
            "{}",
            json!({ "listening": listener.local_addr()?.to_string(), "workers": config.workers })
        );
        axum::serve(listener, crate::app(config)).await
    })?;
    Ok(())
}
