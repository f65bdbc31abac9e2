//! The `headblend` command line.
//!
//! Every command is deterministic: the same inputs and flags produce
//! byte-identical files and reports. Reports go to stdout, diagnostics to
//! stderr. Exit status is 0 on success, 2 when the inputs or flags are at
//! fault and 1 for anything else.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{run_bench, BenchConfig, BenchLayout};
use crate::config::{file_digest, KeyValues};
use crate::correspondence::{
    cross_pair_cycle_loss, cycle_loss, head_region_pairs, inpainting_pair, CycleResult,
    Correlator, ReferenceBuild, DEFAULT_NAIVE_CAP,
};
use crate::error::{Error, Result, ResultExt};
use crate::features::{centralize, extract_pyramid_features, load_features, save_features};
use crate::io::{read_gray, read_labels, read_mask, read_rgb, write_gray, write_labels, write_mask, write_rgb};
use crate::pipeline::{build_references, swap, FeatureSource, PairInputs};
use crate::preprocess::{preprocess, Preprocessed};
use crate::types::{BlenderConfig, LabelMap, RgbImage};

/// Bundle artifact names, in manifest order.
pub const HEAD_MASK_A: &str = "head_mask_a.png";
pub const HEAD_MASK_T: &str = "head_mask_t.png";
pub const INPAINT_MASK_A: &str = "inpaint_mask_a.png";
pub const INPAINT_MASK_T: &str = "inpaint_mask_t.png";
pub const UNION_MASK_A: &str = "union_mask_a.png";
pub const GRAY_HEAD_A: &str = "gray_head_a.png";
pub const BACKGROUND_T: &str = "background_t.png";
pub const MANIFEST: &str = "manifest.txt";
pub const HEAD_REF: &str = "head_ref.png";
pub const HEAD_REF_VALID: &str = "head_ref_valid.png";
pub const INPAINT_REF: &str = "inpaint_ref.png";
pub const INPAINT_REF_VALID: &str = "inpaint_ref_valid.png";

#[derive(Parser, Debug)]
#[command(name = "headblend", version, about = "Semantic-region head blending")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Derive masks, the gray head and the background cutout into a bundle.
    Preprocess {
        #[command(flatten)]
        pair: PairArgs,
        /// Bundle directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Build the head-color and inpainting references for a bundle.
    Refs {
        /// Bundle directory written by `preprocess`.
        bundle: PathBuf,
        /// `pyramid` or `file:ANIMATED.fmap,TARGET.fmap`.
        #[arg(long, default_value = "pyramid")]
        features: FeatureSource,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run the whole pipeline and write the blended frame.
    Swap {
        #[command(flatten)]
        pair: PairArgs,
        /// Output PNG.
        #[arg(long)]
        out: PathBuf,
        /// `pyramid` or `file:ANIMATED.fmap,TARGET.fmap`.
        #[arg(long, default_value = "pyramid")]
        features: FeatureSource,
        /// Also write every intermediate into `<out stem>_intermediates/`.
        #[arg(long)]
        keep_intermediates: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Compare dense and region-restricted correlation memory and time.
    Bench {
        /// Square frame sizes.
        #[arg(long, value_delimiter = ',', default_value = "32,64")]
        sizes: Vec<usize>,
        /// Fraction of pixels covered by regions on each side; omit to use
        /// synthetic portrait parses instead.
        #[arg(long)]
        fraction: Option<f64>,
        /// Number of regions for `--fraction` layouts.
        #[arg(long, default_value_t = 6)]
        regions: usize,
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
        /// Largest frame, in pixels, for the dense arm.
        #[arg(long, default_value_t = DEFAULT_NAIVE_CAP)]
        cap: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Also write the key-value report here.
        #[arg(long)]
        kv: Option<PathBuf>,
    },
    /// Report target→animated→target cycle losses, per region and overall.
    CycleCheck {
        #[command(flatten)]
        pair: PairArgs,
        /// Second target frame for the cross-pair loss.
        #[arg(long, requires = "second_target_labels")]
        second_target: Option<PathBuf>,
        #[arg(long, requires = "second_target")]
        second_target_labels: Option<PathBuf>,
        /// Features of the second target when `--features file:…` is used.
        #[arg(long)]
        second_features: Option<PathBuf>,
        /// `pyramid` or `file:ANIMATED.fmap,TARGET.fmap`.
        #[arg(long, default_value = "pyramid")]
        features: FeatureSource,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Write pyramid features of an image as an FMAP file.
    Features {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Write a procedural portrait and its label map.
    Synth {
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output PNG for the image; labels go next to it as `<stem>_labels.png`.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
pub struct PairArgs {
    /// Animated portrait (RGB PNG).
    #[arg(long)]
    pub animated: PathBuf,
    /// Animated label map (8-bit gray PNG).
    #[arg(long)]
    pub animated_labels: PathBuf,
    /// Target frame (RGB PNG).
    #[arg(long)]
    pub target: PathBuf,
    /// Target label map (8-bit gray PNG).
    #[arg(long)]
    pub target_labels: PathBuf,
}

/// Config file plus per-field overrides; flags win over the file.
#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Softmax temperature.
    #[arg(long)]
    pub tau: Option<String>,
    /// Norm floor in the cosine denominator.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Target band radius in pixels, or `auto`.
    #[arg(long)]
    pub dilate_target: Option<String>,
    /// Union dilation radius in pixels, or `auto`.
    #[arg(long)]
    pub dilate_union: Option<String>,
    /// Seam ramp width in pixels (1 = hard paste).
    #[arg(long)]
    pub feather: Option<String>,
    /// `skip` or `global-head`.
    #[arg(long)]
    pub fallback: Option<String>,
}

impl ConfigArgs {
    /// Applies the config file, then the flags, on top of `base`.
    pub fn resolve(&self, mut base: BlenderConfig) -> Result<BlenderConfig> {
        if let Some(path) = &self.config {
            base.apply(&KeyValues::read(path)?)
                .map_err(|e| e.context(path.display().to_string()))?;
        }
        let mut flags = KeyValues::new();
        let fields = [
            ("tau", &self.tau),
            ("epsilon", &self.epsilon),
            ("dilate_target", &self.dilate_target),
            ("dilate_union", &self.dilate_union),
            ("feather", &self.feather),
            ("fallback", &self.fallback),
        ];
        for (key, value) in fields {
            if let Some(v) = value {
                flags.set(key, v);
            }
        }
        base.apply(&flags)?;
        Ok(base)
    }
}

fn load_pair(pair: &PairArgs) -> Result<PairInputs> {
    let animated = read_rgb(&pair.animated)?;
    let animated_labels = read_labels(&pair.animated_labels)?;
    let target = read_rgb(&pair.target)?;
    let target_labels = read_labels(&pair.target_labels)?;
    let check = |path: &Path, dims: (usize, usize)| {
        if dims != animated.dims() {
            return Err(Error::invalid(format!(
                "{}: size {}x{} does not match {} ({}x{})",
                path.display(),
                dims.0,
                dims.1,
                pair.animated.display(),
                animated.width(),
                animated.height()
            )));
        }
        Ok(())
    };
    check(&pair.animated_labels, animated_labels.dims())?;
    check(&pair.target, target.dims())?;
    check(&pair.target_labels, target_labels.dims())?;
    Ok(PairInputs {
        animated,
        animated_labels,
        target,
        target_labels,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::fs::canonicalize(path).map_err(|e| Error::io(path, e))
}

fn record_inputs(manifest: &mut KeyValues, pair: &PairArgs) -> Result<()> {
    let inputs = [
        ("animated", &pair.animated),
        ("animated_labels", &pair.animated_labels),
        ("target", &pair.target),
        ("target_labels", &pair.target_labels),
    ];
    for (name, path) in inputs {
        manifest.set(format!("input.{name}.path"), absolute(path)?.display());
        manifest.set(format!("input.{name}.sha256"), file_digest(path)?);
    }
    Ok(())
}

fn record_config(manifest: &mut KeyValues, prefix: &str, config: &BlenderConfig) {
    for (k, v) in config.to_key_values().iter() {
        manifest.set(format!("{prefix}.{k}"), v);
    }
}

/// Writes the seven preprocessing artifacts and returns their manifest entries.
fn write_bundle(dir: &Path, pre: &Preprocessed, manifest: &mut KeyValues) -> Result<()> {
    let masks = [
        (HEAD_MASK_A, &pre.animated_head),
        (HEAD_MASK_T, &pre.target_head),
        (INPAINT_MASK_A, &pre.animated_inpaint),
        (INPAINT_MASK_T, &pre.target_inpaint),
        (UNION_MASK_A, &pre.dilated_union),
    ];
    for (name, mask) in masks {
        write_mask(mask, dir.join(name))?;
    }
    write_gray(&pre.gray_head, dir.join(GRAY_HEAD_A))?;
    write_rgb(&pre.background, dir.join(BACKGROUND_T))?;
    for (key, name) in [
        ("head_mask_a", HEAD_MASK_A),
        ("head_mask_t", HEAD_MASK_T),
        ("inpaint_mask_a", INPAINT_MASK_A),
        ("inpaint_mask_t", INPAINT_MASK_T),
        ("union_mask_a", UNION_MASK_A),
        ("gray_head_a", GRAY_HEAD_A),
        ("background_t", BACKGROUND_T),
    ] {
        manifest.set(format!("artifact.{key}"), name);
    }
    Ok(())
}

fn read_bundle(dir: &Path) -> Result<Preprocessed> {
    Ok(Preprocessed {
        animated_head: read_mask(dir.join(HEAD_MASK_A))?,
        target_head: read_mask(dir.join(HEAD_MASK_T))?,
        animated_inpaint: read_mask(dir.join(INPAINT_MASK_A))?,
        target_inpaint: read_mask(dir.join(INPAINT_MASK_T))?,
        dilated_union: read_mask(dir.join(UNION_MASK_A))?,
        gray_head: read_gray(dir.join(GRAY_HEAD_A))?,
        background: read_rgb(dir.join(BACKGROUND_T))?,
    })
}

fn write_references(
    dir: &Path,
    head: &ReferenceBuild,
    inpaint: &ReferenceBuild,
    manifest: &mut KeyValues,
) -> Result<()> {
    write_rgb(&head.reference.colors, dir.join(HEAD_REF))?;
    write_mask(&head.reference.valid, dir.join(HEAD_REF_VALID))?;
    write_rgb(&inpaint.reference.colors, dir.join(INPAINT_REF))?;
    write_mask(&inpaint.reference.valid, dir.join(INPAINT_REF_VALID))?;
    manifest.set("artifact.head_ref", HEAD_REF);
    manifest.set("artifact.head_ref_valid", HEAD_REF_VALID);
    manifest.set("artifact.inpaint_ref", INPAINT_REF);
    manifest.set("artifact.inpaint_ref_valid", INPAINT_REF_VALID);
    for outcome in head.regions.iter().chain(&inpaint.regions) {
        let status = if outcome.skipped {
            "skipped"
        } else if outcome.fell_back {
            "fallback"
        } else {
            "matched"
        };
        manifest.set(
            format!("refs.region.{}", outcome.region.name()),
            format!("{}x{} {status}", outcome.rows, outcome.cols),
        );
    }
    Ok(())
}

fn cmd_preprocess(pair: &PairArgs, out: &Path, config: &ConfigArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = config.resolve(BlenderConfig::default())?;
    let inputs = load_pair(pair)?;
    let pre = preprocess(
        &inputs.animated,
        &inputs.animated_labels,
        &inputs.target,
        &inputs.target_labels,
        &config,
    )
    .context("preprocess")?;
    create_dir(out)?;
    let mut manifest = KeyValues::new();
    record_inputs(&mut manifest, pair)?;
    record_config(&mut manifest, "config", &config);
    write_bundle(out, &pre, &mut manifest)?;
    manifest.write(out.join(MANIFEST))?;
    report(
        stdout,
        format_args!(
            "bundle {}: head_a={} head_t={} inpaint_a={} inpaint_t={} union_a={}\n",
            out.display(),
            pre.animated_head.count(),
            pre.target_head.count(),
            pre.animated_inpaint.count(),
            pre.target_inpaint.count(),
            pre.dilated_union.count()
        ),
    )
}

/// Reloads the pair recorded in a bundle manifest, checking its digests.
fn manifest_inputs(manifest: &KeyValues) -> Result<PairInputs> {
    let path = |name: &str| -> Result<PathBuf> {
        let p = PathBuf::from(manifest.require(&format!("input.{name}.path"))?);
        let digest = file_digest(&p)?;
        if digest != manifest.require(&format!("input.{name}.sha256"))? {
            return Err(Error::invalid(format!(
                "{} changed since the bundle was written",
                p.display()
            )));
        }
        Ok(p)
    };
    load_pair(&PairArgs {
        animated: path("animated")?,
        animated_labels: path("animated_labels")?,
        target: path("target")?,
        target_labels: path("target_labels")?,
    })
}

fn manifest_config(manifest: &KeyValues) -> Result<BlenderConfig> {
    let mut kv = KeyValues::new();
    for (k, v) in manifest.iter() {
        if let Some(field) = k.strip_prefix("config.") {
            kv.set(field, v);
        }
    }
    let mut config = BlenderConfig::default();
    config.apply(&kv)?;
    Ok(config)
}

fn cmd_refs(bundle: &Path, features: &FeatureSource, config: &ConfigArgs, stdout: &mut dyn Write) -> Result<()> {
    let manifest_path = bundle.join(MANIFEST);
    let mut manifest = KeyValues::read(&manifest_path)?;
    let config = config.resolve(manifest_config(&manifest).context(manifest_path.display().to_string())?)?;
    let inputs = manifest_inputs(&manifest)?;
    let pre = read_bundle(bundle)?;
    let refs = build_references(&inputs, &pre, features, &config)?;
    write_references(bundle, &refs.head, &refs.inpaint, &mut manifest)?;
    manifest.set("refs.tau", config.tau);
    manifest.set("refs.epsilon", config.epsilon);
    manifest.set("refs.fallback", config.fallback);
    manifest.set("refs.features", features);
    manifest.write(&manifest_path)?;
    report(
        stdout,
        format_args!(
            "refs {}: head valid={} inpaint valid={} entries={}\n",
            bundle.display(),
            refs.head.reference.valid.count(),
            refs.inpaint.reference.valid.count(),
            refs.head.entries() + refs.inpaint.entries()
        ),
    )
}

/// `<out stem>_intermediates` next to `out`.
pub fn intermediates_dir(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or("blend".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_intermediates"))
}

fn cmd_swap(
    pair: &PairArgs,
    out: &Path,
    features: &FeatureSource,
    keep: bool,
    config: &ConfigArgs,
    stdout: &mut dyn Write,
) -> Result<()> {
    let config = config.resolve(BlenderConfig::default())?;
    let inputs = load_pair(pair)?;
    let result = swap(&inputs, features, &config)?;
    write_rgb(&result.blended, out)?;
    if keep {
        let dir = intermediates_dir(out);
        create_dir(&dir)?;
        let mut manifest = KeyValues::new();
        record_inputs(&mut manifest, pair)?;
        record_config(&mut manifest, "config", &config);
        write_bundle(&dir, &result.pre, &mut manifest)?;
        write_references(&dir, &result.references.head, &result.references.inpaint, &mut manifest)?;
        write_rgb(&result.head_colors, dir.join("head_colors.png"))?;
        write_rgb(&result.band_fill, dir.join("band_fill.png"))?;
        manifest.set("artifact.head_colors", "head_colors.png");
        manifest.set("artifact.band_fill", "band_fill.png");
        manifest.set("refs.features", features);
        manifest.write(dir.join(MANIFEST))?;
    }
    report(stdout, format_args!("blended {}\n", out.display()))
}

fn cmd_bench(
    config: BenchConfig,
    kv: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let result = run_bench(&config)?;
    if let Some(path) = kv {
        std::fs::write(path, result.to_kv()).map_err(|e| Error::io(path, e))?;
    }
    report(stdout, format_args!("{}", result.to_text()))
}

fn format_cycle(name: &str, result: &CycleResult) -> String {
    let mut s = String::new();
    for r in &result.regions {
        let loss = r.loss.map_or("empty".to_string(), |l| format!("{l:.9}"));
        s.push_str(&format!("{name} region {} pixels={} loss={loss}\n", r.region, r.pixels));
    }
    s.push_str(&format!("{name} = {:.9}\n", result.loss));
    s
}

fn cycle_section(name: &str, outcome: Result<CycleResult>) -> Result<String> {
    match outcome {
        Ok(result) => Ok(format_cycle(name, &result)),
        Err(e) if matches!(e.root(), Error::EmptyCycleDomain) => {
            Ok(format!("{name} = undefined (empty cycle domain)\n"))
        }
        Err(e) => Err(e),
    }
}

fn pair_regions(
    animated: &LabelMap,
    target: &LabelMap,
    config: &BlenderConfig,
) -> Result<Vec<crate::correspondence::RegionPair>> {
    let head_a = animated.mask_of(&crate::types::HEAD_LABELS);
    let head_t = target.mask_of(&crate::types::HEAD_LABELS);
    let h = animated.height();
    let band_t = crate::preprocess::target_inpaint_mask(&head_t, config.target_radius(h))?;
    let band_a = crate::preprocess::animated_inpaint_mask(&head_a, &head_t, config.union_radius(h))?.inpaint;
    let mut pairs = head_region_pairs(animated, target);
    pairs.push(inpainting_pair(&band_a, &band_t));
    Ok(pairs)
}

#[allow(clippy::too_many_arguments)]
fn cmd_cycle_check(
    pair: &PairArgs,
    second: Option<(&Path, &Path)>,
    second_features: Option<&Path>,
    features: &FeatureSource,
    config: &ConfigArgs,
    stdout: &mut dyn Write,
) -> Result<()> {
    let config = config.resolve(BlenderConfig::default())?;
    let inputs = load_pair(pair)?;
    let extract = |img: &RgbImage| extract_pyramid_features(img, config.pyramid_levels, config.patch_radius);
    let (fa, ft) = match features {
        FeatureSource::Pyramid => (extract(&inputs.animated)?, extract(&inputs.target)?),
        FeatureSource::Files { animated, target } => (load_features(animated)?, load_features(target)?),
    };
    if fa.dims() != inputs.animated.dims() || ft.dims() != inputs.target.dims() {
        return Err(Error::invalid("feature maps do not match the image size"));
    }
    let (fa, ft) = (centralize(&fa), centralize(&ft));
    let correlator = Correlator::new(&fa, &ft, config.epsilon)?;
    let pairs = pair_regions(&inputs.animated_labels, &inputs.target_labels, &config)?;
    let mut text = cycle_section("L_c", cycle_loss(&correlator, &pairs, &inputs.target, config.tau))?;

    if let Some((image, labels)) = second {
        let other = read_rgb(image)?;
        let other_labels = read_labels(labels)?;
        if other.dims() != inputs.target.dims() || other_labels.dims() != other.dims() {
            return Err(Error::invalid(format!(
                "{}: second target must match the first target's size",
                image.display()
            )));
        }
        let fo = match (features, second_features) {
            (_, Some(path)) => load_features(path)?,
            (FeatureSource::Pyramid, None) => extract(&other)?,
            (FeatureSource::Files { .. }, None) => {
                return Err(Error::invalid(
                    "--second-features is required with file features and a second target",
                ))
            }
        };
        if fo.dims() != other.dims() {
            return Err(Error::invalid("second feature map does not match the image size"));
        }
        let fo = centralize(&fo);
        let correlator = Correlator::new(&fa, &fo, config.epsilon)?;
        let pairs = pair_regions(&inputs.animated_labels, &other_labels, &config)?;
        text.push_str(&cycle_section(
            "L_c'",
            cross_pair_cycle_loss(&correlator, &pairs, &other, &inputs.target, config.tau),
        )?);
    }
    report(stdout, format_args!("{text}"))
}

fn cmd_features(image: &Path, out: &Path, config: &ConfigArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = config.resolve(BlenderConfig::default())?;
    let img = read_rgb(image)?;
    let features = extract_pyramid_features(&img, config.pyramid_levels, config.patch_radius)?;
    save_features(&features, out)?;
    report(
        stdout,
        format_args!(
            "features {}: {}x{}x{}\n",
            out.display(),
            features.width(),
            features.height(),
            features.channels()
        ),
    )
}

/// Label path written next to a synthetic portrait.
pub fn synth_labels_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or("portrait".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_labels.png"))
}

fn cmd_synth(size: usize, seed: u64, out: &Path, stdout: &mut dyn Write) -> Result<()> {
    let p = crate::synth::portrait(size, seed)?;
    let labels = synth_labels_path(out);
    write_rgb(&p.image, out)?;
    write_labels(&p.labels, &labels)?;
    report(stdout, format_args!("portrait {} labels {}\n", out.display(), labels.display()))
}

fn report(stdout: &mut dyn Write, args: std::fmt::Arguments<'_>) -> Result<()> {
    stdout
        .write_fmt(args)
        .map_err(|e| Error::io("<stdout>", e))
}

/// Executes a parsed command, writing its report to `stdout`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Preprocess { pair, out, config } => cmd_preprocess(pair, out, config, stdout),
        Command::Refs {
            bundle,
            features,
            config,
        } => cmd_refs(bundle, features, config, stdout),
        Command::Swap {
            pair,
            out,
            features,
            keep_intermediates,
            config,
        } => cmd_swap(pair, out, features, *keep_intermediates, config, stdout),
        Command::Bench {
            sizes,
            fraction,
            regions,
            repetitions,
            cap,
            seed,
            kv,
        } => {
            let layout = match fraction {
                Some(fraction) => BenchLayout::Uniform {
                    fraction: *fraction,
                    regions: *regions,
                },
                None => BenchLayout::Portrait,
            };
            let config = BenchConfig {
                sizes: sizes.clone(),
                layout,
                repetitions: *repetitions,
                naive_cap: *cap,
                seed: *seed,
                ..BenchConfig::default()
            };
            cmd_bench(config, kv.as_deref(), stdout)
        }
        Command::CycleCheck {
            pair,
            second_target,
            second_target_labels,
            second_features,
            features,
            config,
        } => {
            let second = second_target.as_deref().zip(second_target_labels.as_deref());
            cmd_cycle_check(pair, second, second_features.as_deref(), features, config, stdout)
        }
        Command::Features { image, out, config } => cmd_features(image, out, config, stdout),
        Command::Synth { size, seed, out } => cmd_synth(*size, *seed, out, stdout),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Diagnostics are written to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_invalid_input() {
                2
            } else {
                1
            }
        }
    }
}
