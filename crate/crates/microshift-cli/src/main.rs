//! `microshift` command line: encode, decode, train, eval, progressive.
//!
//! Exit codes: 0 on success, 1 on runtime errors (i/o, malformed inputs),
//! 2 on usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use microshift::container::CompressedContainer;
use microshift::context::{train_table, PredictorTable};
use microshift::decoder::{decode_levels, DecodedLevels};
use microshift::encoder::encode_image;
use microshift::fastdec::{fast_decode, heuristic_decode, progressive_fast, WlsParams};
use microshift::image::{read_image, write_image, ImagePlane, MultiPlaneImage};
use microshift::metrics::{bpp, format_report, psnr, ssim};
use microshift::mrf::{mrf_decode, MrfParams};
use microshift::quant::{CodecParams, QuantizedImage};

#[derive(Parser)]
#[command(
    name = "microshift",
    about = "Microshift image codec: microshift sub-quantization + context-predictive lossless coding",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compress a PGM/PPM image into a .msh container
    Encode(EncodeArgs),
    /// Reconstruct an image from a container
    Decode(DecodeArgs),
    /// Train a predictor table on a corpus of PGM images
    Train(TrainArgs),
    /// Report psnr/ssim (and bpp if a bitstream is given)
    Eval(EvalArgs),
    /// Decode every subimage prefix K = 1..N^2 into numbered images
    Progressive(ProgressiveArgs),
}

#[derive(Args)]
struct EncodeArgs {
    /// Input image (binary PGM or PPM, maxval 255)
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Output container
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    /// Quantizer resolution in bits
    #[arg(short = 'M', default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=4))]
    m: u8,
    /// Microshift block side
    #[arg(short = 'N', default_value_t = 3, value_parser = clap::value_parser!(u8).range(3..=4))]
    n: u8,
    /// Predictor table file (defaults to the embedded table)
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Heuristic,
    Fast,
    Mrf,
}

#[derive(Args)]
struct DecoderParams {
    /// WLS smoothing strength
    #[arg(long, default_value_t = 5.0)]
    wls_lambda: f64,
    /// WLS range weight scale (intensity units)
    #[arg(long, default_value_t = 7.0)]
    wls_sigma_c: f64,
    /// WLS iteration count
    #[arg(long, default_value_t = 8)]
    wls_iters: u32,
    /// MRF quantization-noise scale
    #[arg(long, default_value_t = 5.0)]
    mrf_sigma: f64,
    /// MRF smoothness weight
    #[arg(long, default_value_t = 0.02)]
    mrf_gamma: f64,
    /// MRF similarity gate threshold
    #[arg(long, default_value_t = 32.0)]
    mrf_tsim: f64,
    /// MRF shift-compensation slope
    #[arg(long, default_value_t = 0.25)]
    mrf_alpha_nu: f64,
    /// MRF expansion sweeps
    #[arg(long, default_value_t = 4)]
    mrf_sweeps: u32,
    /// MRF candidate-label margin around each uncertainty interval
    #[arg(long, default_value_t = 32)]
    mrf_label_margin: u16,
}

impl DecoderParams {
    fn wls(&self) -> WlsParams<f64> {
        WlsParams { iterations: self.wls_iters, lambda: self.wls_lambda, sigma_c: self.wls_sigma_c }
    }

    fn mrf(&self) -> MrfParams<f64> {
        MrfParams {
            sigma: self.mrf_sigma,
            gamma: self.mrf_gamma,
            t_sim: self.mrf_tsim,
            alpha_nu: self.mrf_alpha_nu,
            max_sweeps: self.mrf_sweeps,
            label_margin: self.mrf_label_margin,
        }
    }
}

#[derive(Args)]
struct DecodeArgs {
    /// Input container
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Output image (PGM for gray, PPM for rgb)
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    /// Reconstruction method
    #[arg(long, value_enum, default_value_t = Method::Fast)]
    method: Method,
    /// Number of subimage streams to use (default: all)
    #[arg(long)]
    subimages: Option<usize>,
    /// Predictor table file (defaults to the embedded table)
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    params: DecoderParams,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of training PGM images
    #[arg(long)]
    corpus: PathBuf,
    /// Output table file
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    /// Quantizer resolution in bits
    #[arg(short = 'M', default_value_t = 3, value_parser = clap::value_parser!(u8).range(2..=4))]
    m: u8,
    /// Microshift block side
    #[arg(short = 'N', default_value_t = 3, value_parser = clap::value_parser!(u8).range(3..=4))]
    n: u8,
}

#[derive(Args)]
struct EvalArgs {
    /// Reference image
    #[arg(long)]
    reference: PathBuf,
    /// Image under test
    #[arg(long)]
    test: PathBuf,
    /// Optional container for rate reporting
    #[arg(long)]
    bitstream: Option<PathBuf>,
}

#[derive(Args)]
struct ProgressiveArgs {
    /// Input container
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Prefix of the emitted images: <prefix>_k<K>.pgm/.ppm
    #[arg(long)]
    out_prefix: String,
    /// Reconstruction method
    #[arg(long, value_enum, default_value_t = Method::Fast)]
    method: Method,
    /// Predictor table file (defaults to the embedded table)
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    params: DecoderParams,
}

fn load_table(path: &Option<PathBuf>) -> Result<PredictorTable, microshift::Error> {
    match path {
        Some(p) => PredictorTable::read_file(p),
        None => Ok(microshift::default_table()),
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn decode_container(
    container: &CompressedContainer,
    table: &PredictorTable,
    upto: usize,
) -> Result<DecodedLevels, microshift::Error> {
    let decoded = decode_levels(container, table, upto)?;
    if !decoded.table_crc_matches {
        eprintln!(
            "warning: container was encoded with a different predictor table \
             (checksum mismatch); decoded levels may be corrupt"
        );
    }
    Ok(decoded)
}

fn reconstruct_plane(
    q: &QuantizedImage,
    method: Method,
    upto: usize,
    total: usize,
    p: &DecoderParams,
) -> Result<ImagePlane, microshift::Error> {
    match method {
        Method::Heuristic => {
            // Absent pixels of a prefix decode are filled bilinearly.
            if upto == total {
                heuristic_decode(q)
            } else {
                microshift::fastdec::heuristic_fill(q)
            }
        }
        Method::Fast => {
            if upto == total {
                fast_decode(q, &p.wls())
            } else {
                progressive_fast(q, &p.wls())
            }
        }
        Method::Mrf => mrf_decode(q, &p.mrf(), upto),
    }
}

fn assemble(planes: Vec<ImagePlane>) -> Result<MultiPlaneImage, microshift::Error> {
    if planes.len() == 3 {
        let mut it = planes.into_iter();
        MultiPlaneImage::rgb(it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
    } else {
        Ok(MultiPlaneImage::gray(planes.into_iter().next().unwrap()))
    }
}

fn cmd_encode(args: &EncodeArgs) -> Result<(), microshift::Error> {
    let params = CodecParams::new(args.m, args.n)?;
    let table = load_table(&args.table)?;
    let img = read_image(&args.input)?;
    let container = encode_image(&img, &params, &table)?;
    container.write_file(&args.output)?;
    print!("{}", format_report(None, None, Some(bpp(&container))));
    Ok(())
}

fn cmd_decode(args: &DecodeArgs) -> Result<(), microshift::Error> {
    let container = CompressedContainer::read_file(&args.input)?;
    let table = load_table(&args.table)?;
    let total = (container.n as usize).pow(2);
    let upto = args.subimages.unwrap_or(total);
    let decoded = decode_container(&container, &table, upto)?;
    let mut planes = Vec::new();
    for q in &decoded.planes {
        planes.push(reconstruct_plane(q, args.method, upto, total, &args.params)?);
    }
    write_image(&assemble(planes)?, &args.output)?;
    println!("method={:?}", args.method);
    println!("subimages={upto}");
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<(), microshift::Error> {
    let params = CodecParams::new(args.m, args.n)?;
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&args.corpus)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .map(|e| e.eq_ignore_ascii_case("pgm") || e.eq_ignore_ascii_case("ppm"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    let mut corpus = Vec::new();
    for path in &paths {
        let img = read_image(path)?;
        corpus.extend(img.planes().iter().cloned());
    }
    let table = train_table(&corpus, &params)?;
    table.write_file(&args.output)?;
    println!("contexts=313");
    println!("crc32=0x{:08X}", table.crc32());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<(), microshift::Error> {
    let reference = read_image(&args.reference)?;
    let test = read_image(&args.test)?;
    if reference.planes().len() != test.planes().len() {
        return Err(microshift::Error::DimensionMismatch(
            "reference and test differ in plane count".into(),
        ));
    }
    // Multi-plane images report plane-averaged quality.
    let mut psnr_sum = 0.0;
    let mut ssim_sum = 0.0;
    for (a, b) in reference.planes().iter().zip(test.planes()) {
        psnr_sum += psnr::<f64>(a, b)?;
        ssim_sum += ssim::<f64>(a, b)?;
    }
    let n = reference.planes().len() as f64;
    let rate = match &args.bitstream {
        Some(p) => Some(bpp(&CompressedContainer::read_file(p)?)),
        None => None,
    };
    print!("{}", format_report(Some(psnr_sum / n), Some(ssim_sum / n), rate));
    Ok(())
}

fn cmd_progressive(args: &ProgressiveArgs) -> Result<(), microshift::Error> {
    let container = CompressedContainer::read_file(&args.input)?;
    let table = load_table(&args.table)?;
    let total = (container.n as usize).pow(2);
    let ext = if container.planes() == 3 { "ppm" } else { "pgm" };
    for upto in 1..=total {
        let decoded = decode_container(&container, &table, upto)?;
        let mut planes = Vec::new();
        for q in &decoded.planes {
            planes.push(reconstruct_plane(q, args.method, upto, total, &args.params)?);
        }
        let path = format!("{}_k{upto}.{ext}", args.out_prefix);
        write_image(&assemble(planes)?, Path::new(&path))?;
        println!("wrote {path}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    // Flag-level validation beyond what clap expresses.
    if let Cmd::Decode(args) = &cli.cmd {
        if args.subimages == Some(0) {
            return usage_error("--subimages must be at least 1");
        }
        if let Some(k) = args.subimages {
            if k > 16 {
                return usage_error("--subimages exceeds any supported N^2");
            }
        }
    }

    let result = match &cli.cmd {
        Cmd::Encode(args) => cmd_encode(args),
        Cmd::Decode(args) => cmd_decode(args),
        Cmd::Train(args) => cmd_train(args),
        Cmd::Eval(args) => cmd_eval(args),
        Cmd::Progressive(args) => cmd_progressive(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(microshift::Error::InvalidParams(msg)) => usage_error(&msg),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
