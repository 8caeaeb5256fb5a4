//! `lab`: command-line front end for the projection laboratory.
//!
//! Exit codes: 0 pass, 1 tolerance failure (or an inapplicable certificate),
//! 2 configuration or input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use projlab::bounds::{
    bourgain_certificate, certify_thm31, certify_thm32, chain_certificate, EngineConfig, Variant,
};
use projlab::directions::{
    mask_intervals, parse_opt_rat, read_direction_record, sample_directions, BitSource,
    DirectionRecord, MaskKind, ScaleSequence, SeqRule,
};
use projlab::energy::density_positions;
use projlab::fractal::{
    box_counts, dim_regress, four_corner, gen_digit_set, gen_ifs, lower_box_estimate, project,
    DyadicPointSet,
};
use projlab::harness::{emit_plot_data, parse_config, run_and_write, ExperimentReport};
use projlab::profile::ComplexityProfile;
use projlab::rational::{parse_rat, Rat};

#[derive(Parser)]
#[command(name = "lab", version, about = "Universal projection direction laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write its report.
    Run {
        config: PathBuf,
        /// Also emit plot data into <output dir>/plots.
        #[arg(long)]
        plot: bool,
    },
    /// Compute a bound certificate for a profile and a direction.
    Certify(CertifyArgs),
    /// Emit plot data files and a manifest for a report.
    Plot {
        /// report.json or the directory holding it.
        report: PathBuf,
        /// Defaults to <report dir>/plots.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample masked directions as JSON lines.
    GenDirections(GenDirectionsArgs),
    /// Generate a preset fractal as a point-set file.
    GenFractal(GenFractalArgs),
    /// Project a planar point set onto a direction.
    Project(ProjectArgs),
    /// Box counts, regression slope and lower estimate of a point set.
    Boxdim(BoxdimArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Statement {
    #[value(name = "prop5.4")]
    Prop54,
    #[value(name = "prop6.1")]
    Prop61,
    #[value(name = "thm3.1")]
    Thm31,
    #[value(name = "thm3.2")]
    Thm32,
}

#[derive(clap::Args)]
struct CertifyArgs {
    /// Profile text file: `R dim` then K[0..=R].
    #[arg(long)]
    profile: PathBuf,
    /// Direction profile (text) or a direction JSON lines file.
    #[arg(long)]
    direction: PathBuf,
    /// Record to use when --direction is JSON lines.
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, value_enum)]
    statement: Statement,
    /// Rate for the chained bound.
    #[arg(long, default_value = "1")]
    sigma: String,
    /// exact, log2, sqrt or eps:<rat> (eps gives the almost-label chain).
    #[arg(long, default_value = "log2")]
    variant: String,
    #[arg(long, default_value = "paper")]
    seq: String,
    #[arg(long, default_value_t = 2)]
    seq_len: usize,
    /// Direction rate for thm3.1.
    #[arg(long, default_value = "1")]
    s: String,
    /// Precision of the partial direction for thm3.2; defaults to R / 2.
    #[arg(long)]
    t: Option<u64>,
    #[arg(long)]
    b_min: Option<u64>,
    #[arg(long)]
    slack_c: Option<u32>,
}

#[derive(clap::Args)]
struct GenDirectionsArgs {
    #[arg(long, default_value = "d0")]
    kind: String,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long, default_value = "paper")]
    seq: String,
    #[arg(long, default_value_t = 2)]
    seq_len: usize,
    /// Bits per direction.
    #[arg(long)]
    depth: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, conflicts_with_all = ["os", "bits_file"])]
    seed: Option<u64>,
    /// Draw from operating system entropy (not reproducible).
    #[arg(long)]
    os: bool,
    /// Read raw bits MSB-first from a file.
    #[arg(long)]
    bits_file: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    FourCorner,
    DigitDensity,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Binary,
}

#[derive(clap::Args)]
struct GenFractalArgs {
    #[arg(long, value_enum)]
    preset: Preset,
    /// Iterations of the four-corner maps.
    #[arg(long)]
    depth: Option<u32>,
    /// Per-axis density of free bits for digit-density sets.
    #[arg(long, default_value = "2/5")]
    density: String,
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct ProjectArgs {
    #[arg(long)]
    input: PathBuf,
    /// Unit vector `x,y`.
    #[arg(long, conflicts_with = "from_direction", allow_hyphen_values = true)]
    e: Option<String>,
    /// `file:index` into a direction JSON lines file.
    #[arg(long)]
    from_direction: Option<String>,
    /// Output precision; defaults to the input precision.
    #[arg(long)]
    r_out: Option<u32>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct BoxdimArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma list or a..b[:step]; defaults to 1..=R.
    #[arg(long)]
    scales: Option<String>,
    #[arg(long)]
    anchors: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Run { config, plot } => run(&config, plot),
        Command::Certify(a) => certify(a),
        Command::Plot { report, out } => plot_cmd(&report, out),
        Command::GenDirections(a) => gen_directions(a).map(|_| true),
        Command::GenFractal(a) => gen_fractal(a).map(|_| true),
        Command::Project(a) => project_cmd(a).map(|_| true),
        Command::Boxdim(a) => boxdim(a).map(|_| true),
    }
}

fn run(config: &Path, plot: bool) -> Result<bool> {
    let cfg = parse_config(config)?;
    let report = run_and_write(&cfg)?;
    if plot {
        emit_plot_data(&report, &cfg.output_dir.join("plots"))?;
    }
    for c in &report.checks {
        println!(
            "{} {} = {} (expected {})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value.value,
            c.expected
        );
    }
    println!(
        "{} {} -> {}",
        report.experiment,
        if report.pass { "pass" } else { "tolerance failure" },
        cfg.output_dir.display()
    );
    Ok(report.pass)
}

fn plot_cmd(report: &Path, out: Option<PathBuf>) -> Result<bool> {
    let rep = ExperimentReport::load(report)
        .with_context(|| format!("reading report {}", report.display()))?;
    let base = if report.is_dir() {
        report.to_path_buf()
    } else {
        report.parent().unwrap_or(Path::new(".")).to_path_buf()
    };
    let dir = out.unwrap_or_else(|| base.join("plots"));
    for p in emit_plot_data(&rep, &dir)? {
        println!("{}", p.display());
    }
    Ok(true)
}

fn read_profile(path: &Path) -> Result<ComplexityProfile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ComplexityProfile::parse(&text)?)
}

fn read_direction(path: &Path, index: usize) -> Result<ComplexityProfile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        Ok(read_direction_record(path, index)?.to_sample()?.predicted)
    } else {
        Ok(ComplexityProfile::parse(&text)?)
    }
}

fn rat_arg(name: &str, text: &str) -> Result<Rat> {
    parse_rat(text).with_context(|| format!("--{name}"))
}

fn certify(a: CertifyArgs) -> Result<bool> {
    let px = read_profile(&a.profile)?;
    let pe = read_direction(&a.direction, a.index)?;
    let mut cfg = EngineConfig::default();
    if let Some(b) = a.b_min {
        cfg.b_min = b;
    }
    if let Some(c) = a.slack_c {
        cfg.slack_c = c;
    }
    let seq = || -> Result<ScaleSequence> {
        Ok(ScaleSequence::build(&SeqRule::parse(&a.seq)?, a.seq_len)?)
    };
    let (json, ok) = match a.statement {
        Statement::Prop54 => {
            let variant: Variant = a.variant.parse()?;
            let c = chain_certificate(&px, &pe, &seq()?, rat_arg("sigma", &a.sigma)?, variant, &cfg)?;
            (serde_json::to_string_pretty(&c)?, c.is_applicable())
        }
        Statement::Prop61 => {
            let c = bourgain_certificate(&px, &pe, &seq()?, &cfg)?;
            (serde_json::to_string_pretty(&c)?, c.is_applicable())
        }
        Statement::Thm31 => {
            let c = certify_thm31(&px, &pe, rat_arg("s", &a.s)?, &cfg)?;
            (serde_json::to_string_pretty(&c)?, true)
        }
        Statement::Thm32 => {
            let t = a.t.unwrap_or(px.horizon() / 2).max(1);
            let c = certify_thm32(&px, &pe, t)?;
            (serde_json::to_string_pretty(&c)?, true)
        }
    };
    println!("{json}");
    Ok(ok)
}

fn gen_directions(a: GenDirectionsArgs) -> Result<()> {
    let s = parse_opt_rat(a.s.as_deref())?;
    let eps = parse_opt_rat(a.eps.as_deref())?;
    let kind = MaskKind::parse(&a.kind, s, eps)?;
    let seq = ScaleSequence::build(&SeqRule::parse(&a.seq)?, a.seq_len)?;
    let spec = mask_intervals(kind, &seq, a.depth)?;
    let (source, seed) = match (a.seed, a.os, a.bits_file) {
        (_, true, _) => (BitSource::Os, None),
        (_, _, Some(path)) => (BitSource::File(path), None),
        (seed, _, _) => {
            let seed = seed.unwrap_or(1);
            (BitSource::Seeded(seed), Some(seed))
        }
    };
    let samples = sample_directions(&spec, &source, a.count)?;
    let mut out = String::new();
    for d in &samples {
        out.push_str(&serde_json::to_string(&DirectionRecord::from_sample(d, seed))?);
        out.push('\n');
    }
    write_out(a.out.as_deref(), out.as_bytes())
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

fn save_set(set: &DyadicPointSet, format: Format, path: &Path) -> Result<()> {
    match format {
        Format::Text => fs::write(path, set.to_text())?,
        Format::Binary => {
            let mut buf = Vec::new();
            set.write_binary(&mut buf)?;
            fs::write(path, buf)?;
        }
    }
    eprintln!("{} cells at precision {} -> {}", set.len(), set.precision(), path.display());
    Ok(())
}

fn gen_fractal(a: GenFractalArgs) -> Result<()> {
    let set = match a.preset {
        Preset::FourCorner => {
            let depth = a.depth.ok_or_else(|| anyhow!("four-corner needs --depth"))?;
            gen_ifs(&four_corner(), depth)?
        }
        Preset::DigitDensity => {
            let r = a.precision.ok_or_else(|| anyhow!("digit-density needs --precision"))?;
            let d = rat_arg("density", &a.density)?;
            let (num, den) = (u32::try_from(*d.numer())?, u32::try_from(*d.denom())?);
            if num == 0 || num > den {
                bail!("--density must lie in (0, 1]");
            }
            let free = density_positions(num, den, r);
            gen_digit_set(&free, &free, r)?
        }
    };
    save_set(&set, a.format, &a.out)
}

fn parse_vector(text: &str) -> Result<(f64, f64)> {
    let (x, y) = text
        .split_once(',')
        .ok_or_else(|| anyhow!("--e expects x,y"))?;
    Ok((x.trim().parse()?, y.trim().parse()?))
}

fn project_cmd(a: ProjectArgs) -> Result<()> {
    let set = DyadicPointSet::load(&a.input)?;
    let e = match (&a.e, &a.from_direction) {
        (Some(e), None) => parse_vector(e)?,
        (None, Some(spec)) => {
            let (file, index) = spec
                .rsplit_once(':')
                .ok_or_else(|| anyhow!("--from-direction expects file:index"))?;
            read_direction_record(Path::new(file), index.parse()?)?.unit_vector()?
        }
        _ => bail!("give exactly one of --e and --from-direction"),
    };
    let out = project(&set, e, a.r_out.unwrap_or(set.precision()))?;
    save_set(&out, a.format, &a.out)
}

fn parse_scales(text: &str) -> Result<Vec<u32>> {
    if let Some((lo, rest)) = text.split_once("..") {
        let (hi, step) = rest.split_once(':').unwrap_or((rest, "1"));
        let (lo, hi, step): (u32, u32, usize) = (lo.trim().parse()?, hi.trim().parse()?, step.trim().parse()?);
        if step == 0 {
            bail!("step must be positive");
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    text.split(',')
        .map(|v| v.trim().parse::<u32>().map_err(Into::into))
        .collect()
}

fn boxdim(a: BoxdimArgs) -> Result<()> {
    let set = DyadicPointSet::load(&a.input)?;
    let scales = match &a.scales {
        Some(s) => parse_scales(s)?,
        None => (1..=set.precision()).collect(),
    };
    let counts = box_counts(&set, &scales)?;
    for (k, n) in &counts {
        println!("{k}\t{n}");
    }
    let fit = dim_regress(&counts)?;
    println!("slope\t{}\nstderr\t{}", fit.slope, fit.stderr);
    if let Some(anchors) = &a.anchors {
        let anchors = parse_scales(anchors)?;
        println!("lower_estimate\t{}", lower_box_estimate(&counts, &anchors)?);
    }
    Ok(())
}
