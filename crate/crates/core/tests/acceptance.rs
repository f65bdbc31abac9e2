//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so the report is always printed.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity, clippy::needless_range_loop)]

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use headblend::bench::{run_bench, BenchConfig, BenchLayout};
use headblend::correspondence::{
    accumulated_attention, accumulated_attention_values, attention_row, cycle_loss,
    head_region_pairs, measure_peak_entries, memory_report, naive_full_correlation,
    region_correlation, softmax_warp, Correlator, CorrelationBlock, RegionPair,
};
use headblend::features::centralize;
use headblend::io::{read_rgb, write_labels, write_rgb};
use headblend::metrics::{psnr, ssim};
use headblend::preprocess::{animated_inpaint_mask, dilate, preprocess, target_inpaint_mask};
use headblend::{synth, BinaryMask, BlenderConfig, GrayImage, LabelMap, Region, RegionIndex, RgbImage};
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn budget(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        return Err(format!("{what} took {:.1}s (limit {}s)", t.as_secs_f64(), limit.as_secs()));
    }
    Ok(())
}

/// Head-region label ids plus background, to draw 2–6 regions from.
const REGION_IDS: [(Region, u8); 6] = [
    (Region::Face, 1),
    (Region::Hair, 10),
    (Region::Eye, 4),
    (Region::Nose, 6),
    (Region::Lip, 7),
    (Region::Tooth, 9),
];

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(101);
    let (mut worst, mut blocks, mut entries) = (0.0f64, 0usize, 0usize);
    for _ in 0..120 {
        let (w, h) = (rng.gen_range(2..=32), rng.gen_range(2..=32));
        let c = rng.gen_range(2..=24);
        let k = rng.gen_range(2..=6);
        let mut ids: Vec<u8> = REGION_IDS.iter().map(|r| r.1).collect();
        ids.shuffle(&mut rng);
        ids.truncate(k);
        ids.push(0);
        let fa = centralize(&random_features(&mut rng, w, h, c));
        let ft = centralize(&random_features(&mut rng, w, h, c));
        let la = random_labels(&mut rng, w, h, &ids);
        let lt = random_labels(&mut rng, w, h, &ids);
        let full = naive_full_correlation(&fa, &ft, 1e-8, 32 * 32, None).map_err(|e| e.to_string())?;
        for (region, _) in REGION_IDS {
            let rows = RegionIndex::from_labels(&la, region);
            let cols = RegionIndex::from_labels(&lt, region);
            let block = region_correlation(&fa, &ft, &rows, &cols, 1e-8).map_err(|e| e.to_string())?;
            for (i, &u) in rows.indices().iter().enumerate() {
                for (j, &v) in cols.indices().iter().enumerate() {
                    worst = worst.max((block.get(i, j) - full.get(u as usize, v as usize)).abs());
                }
            }
            blocks += 1;
            entries += block.entries();
        }
    }
    ensure!(worst <= 1e-5, "max abs diff {worst:e}");
    budget(start, Duration::from_secs(60), "oracle sweep")?;
    Ok(format!("120 pairs, {blocks} blocks, {entries} entries, max diff {worst:.2e}"))
}

/// Random disjoint regions with the given pixel fractions.
fn layout(rng: &mut rand_chacha::ChaCha8Rng, size: usize, fractions: &[(Region, f64)]) -> Vec<RegionIndex> {
    let mut pixels: Vec<u32> = (0..(size * size) as u32).collect();
    pixels.shuffle(rng);
    let mut next = 0;
    fractions
        .iter()
        .map(|&(r, f)| {
            let n = (f * (size * size) as f64).round() as usize;
            let mut idx = pixels[next..next + n].to_vec();
            next += n;
            idx.sort_unstable();
            RegionIndex::new(r, size, size, idx).unwrap()
        })
        .collect()
}

fn complexity_reduction() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(202);
    let animated = [
        (Region::Face, 0.180),
        (Region::Hair, 0.125),
        (Region::Eye, 0.012),
        (Region::Nose, 0.013),
        (Region::Lip, 0.015),
        (Region::Tooth, 0.005),
        (Region::Inpainting, 0.110),
    ];
    let target = [
        (Region::Face, 0.170),
        (Region::Hair, 0.135),
        (Region::Eye, 0.011),
        (Region::Nose, 0.012),
        (Region::Lip, 0.016),
        (Region::Tooth, 0.006),
        (Region::Inpainting, 0.060),
    ];
    let rows = layout(&mut rng, 64, &animated);
    let cols = layout(&mut rng, 64, &target);
    let head: usize = rows[..6].iter().map(|r| r.len()).sum();
    let fa = centralize(&random_features(&mut rng, 64, 64, 15));
    let ft = centralize(&random_features(&mut rng, 64, 64, 15));
    let corr = Correlator::new(&fa, &ft, 1e-8).map_err(|e| e.to_string())?;
    let pairs: Vec<RegionPair> = rows
        .iter()
        .zip(&cols)
        .map(|(r, c)| RegionPair::new(r.clone(), c.clone()).unwrap())
        .collect();
    let mut report = memory_report(&rows, &cols, 64, 64).map_err(|e| e.to_string())?;
    report.measured_peak = Some(measure_peak_entries(&corr, &pairs).map_err(|e| e.to_string())?);
    let predicted: u128 = rows.iter().zip(&cols).map(|(r, c)| r.len() as u128 * c.len() as u128).sum();
    ensure!(report.restricted_entries == predicted, "report disagrees with Σ N_A·N_T");
    ensure!(
        report.measurement_matches() == Some(true),
        "measured {:?} vs predicted {predicted}",
        report.measured_peak
    );
    let ratio = report.ratio().unwrap_or(0.0);
    ensure!(ratio >= 5.0, "ratio {ratio:.2} < 5");

    // Bench table over synthetic portrait parses (head + band), exact counts checked inside.
    let bench = run_bench(&BenchConfig {
        sizes: vec![32, 64],
        layout: BenchLayout::Portrait,
        repetitions: 1,
        ..BenchConfig::default()
    })
    .map_err(|e| e.to_string())?;
    for line in bench.to_text().lines() {
        println!("    {line}");
    }
    let portrait_ratio = bench.rows[1].memory.ratio().unwrap_or(0.0);
    ensure!(portrait_ratio >= 5.0, "portrait ratio {portrait_ratio:.2} < 5");
    budget(start, Duration::from_secs(60), "complexity check")?;
    Ok(format!(
        "head {:.1}% of 64x64, measured = predicted = {predicted} entries, ratio {ratio:.2}x (portrait parses {portrait_ratio:.2}x)",
        100.0 * head as f64 / 4096.0
    ))
}

fn softmax_normalization() -> Outcome {
    let mut rng = rng(303);
    let mut worst = 0.0f64;
    let mut rows_checked = 0;
    for trial in 0..40 {
        let (w, h) = (rng.gen_range(1..=20), rng.gen_range(1..=20));
        let c = rng.gen_range(2..=12);
        let fa = centralize(&random_features(&mut rng, w, h, c));
        let ft = centralize(&random_features(&mut rng, w, h, c));
        let n_rows = rng.gen_range(1..=w * h);
        // Every fourth block has a single column.
        let n_cols = if trial % 4 == 0 { 1 } else { rng.gen_range(1..=w * h) };
        let pick = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| {
            let mut idx: Vec<u32> = (0..(w * h) as u32).collect();
            idx.shuffle(rng);
            idx.truncate(n);
            idx.sort_unstable();
            RegionIndex::new(Region::Face, w, h, idx).unwrap()
        };
        let rows = pick(n_rows, &mut rng);
        let cols = pick(n_cols, &mut rng);
        let block: CorrelationBlock =
            region_correlation(&fa, &ft, &rows, &cols, 1e-8).map_err(|e| e.to_string())?;
        for tau in [1e-3, 1e-2, 1.0, 10.0] {
            for i in 0..rows.len() {
                let row = attention_row(&block, i, tau).map_err(|e| e.to_string())?;
                ensure!(row.weights.iter().all(|&w| w >= 0.0), "negative weight");
                let sum: f64 = row.weights.iter().sum();
                worst = worst.max((sum - 1.0).abs());
                rows_checked += 1;
            }
        }
    }
    ensure!(worst <= 1e-6, "row sum off by {worst:e}");
    Ok(format!("{rows_checked} rows over 4 temperatures, max |Σw − 1| = {worst:.1e}"))
}

fn semantic_locality() -> Outcome {
    let mut rng = rng(404);
    let ids = [0u8, 1, 4, 6, 7, 9, 10];
    let mut checked = 0;
    for trial in 0..30 {
        let (w, h) = (rng.gen_range(4..=24), rng.gen_range(4..=24));
        let fa = centralize(&random_features(&mut rng, w, h, 8));
        let ft = centralize(&random_features(&mut rng, w, h, 8));
        let la = random_labels(&mut rng, w, h, &ids);
        let lt = random_labels(&mut rng, w, h, &ids);
        // Odd trials paint each target region a single color.
        let mut target = random_image(&mut rng, w, h);
        if trial % 2 == 1 {
            for (k, &id) in ids.iter().enumerate() {
                for i in 0..w * h {
                    if lt.get(i) == id {
                        target.set(i, [k as u8 * 30, 255 - k as u8 * 20, 7 * k as u8]);
                    }
                }
            }
        }
        let corr = Correlator::new(&fa, &ft, 1e-8).map_err(|e| e.to_string())?;
        for tau in [1e-3, 0.01, 1.0, 10.0] {
            for pair in head_region_pairs(&la, &lt) {
                if pair.cols.is_empty() {
                    continue;
                }
                let block = corr.streamed(pair.rows.clone(), pair.cols.clone()).map_err(|e| e.to_string())?;
                let warped = softmax_warp(&block, &target, tau).map_err(|e| e.to_string())?;
                let (mut lo, mut hi) = ([255u8; 3], [0u8; 3]);
                for &v in pair.cols.indices() {
                    let c = target.get(v as usize);
                    for k in 0..3 {
                        lo[k] = lo[k].min(c[k]);
                        hi[k] = hi[k].max(c[k]);
                    }
                }
                for &u in pair.rows.indices() {
                    let c = warped.colors.get(u as usize);
                    for k in 0..3 {
                        ensure!(
                            (lo[k]..=hi[k]).contains(&c[k]),
                            "{} pixel {u} channel {k}: {} outside [{}, {}]",
                            pair.region(),
                            c[k],
                            lo[k],
                            hi[k]
                        );
                    }
                    if lo == hi {
                        ensure!(c == lo, "single-color region not reproduced exactly");
                    }
                    checked += 1;
                }
                ensure!(
                    warped.valid.indices().all(|i| pair.rows.to_mask().get(i)),
                    "warp wrote outside its region"
                );
                let values = accumulated_attention_values(&block, tau).map_err(|e| e.to_string())?;
                let map: GrayImage = accumulated_attention(&block, tau).map_err(|e| e.to_string())?;
                let inside = pair.rows.to_mask();
                for i in 0..w * h {
                    if inside.get(i) {
                        ensure!((values[i] - 1.0).abs() <= 1e-6 && map.get(i) == 255, "in-region attention not 1");
                    } else {
                        ensure!(values[i] == 0.0 && map.get(i) == 0, "attention leaked outside the region");
                    }
                }
            }
        }
    }
    Ok(format!("{checked} warped pixels inside their region envelope; attention dark outside"))
}

fn permute_labels(labels: &LabelMap, source: &[usize]) -> LabelMap {
    let raw = labels.as_raw();
    LabelMap::new(labels.width(), labels.height(), source.iter().map(|&s| raw[s]).collect()).unwrap()
}

fn cycle_consistency() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(505);
    let ids = [0u8, 1, 2, 4, 6, 7, 9, 10, 12];
    let (mut worst_self, mut worst_perm) = (0.0f64, 0.0f64);
    for _ in 0..8 {
        let (w, h) = (32, 32);
        let raw = random_features(&mut rng, w, h, 32);
        let image = random_image(&mut rng, w, h);
        let labels = random_labels(&mut rng, w, h, &ids);
        let ft = centralize(&raw);

        let corr = Correlator::new(&ft, &ft, 1e-8).map_err(|e| e.to_string())?;
        let pairs = head_region_pairs(&labels, &labels);
        let res = cycle_loss(&corr, &pairs, &image, 1e-6).map_err(|e| e.to_string())?;
        worst_self = worst_self.max(res.loss);

        let mut source: Vec<usize> = (0..w * h).collect();
        source.shuffle(&mut rng);
        let fa = centralize(&raw.permuted(&source).map_err(|e| e.to_string())?);
        let la = permute_labels(&labels, &source);
        let corr = Correlator::new(&fa, &ft, 1e-8).map_err(|e| e.to_string())?;
        let pairs = head_region_pairs(&la, &labels);
        let res = cycle_loss(&corr, &pairs, &image, 1e-6).map_err(|e| e.to_string())?;
        worst_perm = worst_perm.max(res.loss);
    }
    ensure!(worst_self <= 1e-4, "self-pair L_c {worst_self:e}");
    ensure!(worst_perm <= 1e-4, "permuted-pair L_c {worst_perm:e}");
    budget(start, Duration::from_secs(30), "cycle check")?;
    Ok(format!("8 self pairs L_c ≤ {worst_self:.1e}, 8 permuted pairs L_c ≤ {worst_perm:.1e}"))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = headblend::cli::run(std::iter::once("headblend").chain(args.iter().copied()), &mut out, &mut err);
    if code == 0 {
        Ok(())
    } else {
        Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)))
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn self_swap() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut scores = Vec::new();
    let mut slowest = 0.0f64;
    for seed in 0..5u64 {
        let portrait = synth::portrait(256, seed).map_err(|e| e.to_string())?;
        let (img, labels, out) = (
            dir.path().join(format!("p{seed}.png")),
            dir.path().join(format!("p{seed}_labels.png")),
            dir.path().join(format!("b{seed}.png")),
        );
        write_rgb(&portrait.image, &img).map_err(|e| e.to_string())?;
        write_labels(&portrait.labels, &labels).map_err(|e| e.to_string())?;
        let start = Instant::now();
        run_cli(&[
            "swap", "--animated", p(&img), "--animated-labels", p(&labels), "--target", p(&img),
            "--target-labels", p(&labels), "--out", p(&out),
        ])?;
        let secs = start.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        ensure!(secs < 60.0, "seed {seed} took {secs:.1}s");
        let blended = read_rgb(&out).map_err(|e| e.to_string())?;
        let pre = preprocess(
            &portrait.image,
            &portrait.labels,
            &portrait.image,
            &portrait.labels,
            &BlenderConfig::default(),
        )
        .map_err(|e| e.to_string())?;
        let changed_outside = (0..256 * 256)
            .filter(|&i| !pre.dilated_union.get(i) && blended.get(i) != portrait.image.get(i))
            .count();
        ensure!(changed_outside == 0, "seed {seed}: {changed_outside} pixels outside the union changed");
        let score = psnr(&blended, &portrait.image, None).map_err(|e| e.to_string())?;
        ensure!(score >= 30.0, "seed {seed}: PSNR {score:.2} dB < 30");
        scores.push(score);
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    Ok(format!(
        "5 synthetic 256px portraits, PSNR min {min:.2} / mean {mean:.2} dB, far background bit-exact, slowest {slowest:.1}s"
    ))
}

fn mask_algebra() -> Outcome {
    let mut rng = rng(707);
    for n in 0..1000 {
        let (w, h) = (rng.gen_range(1..=40), rng.gen_range(1..=40));
        let density = rng.gen_range(0.0..0.4);
        let a = BinaryMask::from_fn(w, h, |_, _| rng.gen_bool(density)).unwrap();
        let extra = BinaryMask::from_fn(w, h, |_, _| rng.gen_bool(0.1)).unwrap();
        let b = a.union(&extra).unwrap();
        let t = BinaryMask::from_fn(w, h, |_, _| rng.gen_bool(density)).unwrap();
        let r = rng.gen_range(0..6);
        let da = dilate(&a, r);
        ensure!(a.is_subset_of(&da), "mask {n}: dilation not extensive");
        ensure!(da.is_subset_of(&dilate(&b, r)), "mask {n}: dilation not monotone in the mask");
        ensure!(da.is_subset_of(&dilate(&a, r + 1)), "mask {n}: dilation not monotone in the radius");
        let radius = r.max(1);
        let masks = animated_inpaint_mask(&a, &t, radius).map_err(|e| e.to_string())?;
        ensure!(masks.inpaint.intersection(&a).unwrap().is_empty(), "mask {n}: band overlaps head");
        ensure!(a.union(&masks.inpaint).unwrap() == masks.dilated_union, "mask {n}: head ∪ band ≠ dilated union");
        let tb = target_inpaint_mask(&t, radius).map_err(|e| e.to_string())?;
        ensure!(tb.intersection(&t).unwrap().is_empty(), "mask {n}: target band overlaps head");
    }
    Ok("1000 random masks: extensive, monotone, band ∩ head = ∅, head ∪ band = dilated union".into())
}

fn metrics_sanity() -> Outcome {
    let mut rng = rng(808);
    let a = RgbImage::from_fn(40, 30, |_, _| [rng.gen_range(0..255), rng.gen_range(0..255), rng.gen_range(0..255)]).unwrap();
    let b = RgbImage::from_fn(40, 30, |x, y| a.get_xy(x, y).map(|v| v + 1)).unwrap();
    let offset = psnr(&a, &b, None).map_err(|e| e.to_string())?;
    ensure!((offset - 48.13).abs() <= 0.01, "offset PSNR {offset}");
    let g = GrayImage::from_fn(40, 30, |_, _| rng.gen()).unwrap();
    let same = ssim(&g, &g).map_err(|e| e.to_string())?;
    ensure!(same == 1.0, "SSIM(a, a) = {same}");
    let c1 = (0.01f64 * 255.0).powi(2);
    let mut worst = 0.0f64;
    for (x, y) in [(0u8, 255u8), (10, 200), (128, 129), (77, 3)] {
        let ga = GrayImage::from_fn(16, 16, |_, _| x).unwrap();
        let gb = GrayImage::from_fn(16, 16, |_, _| y).unwrap();
        let (x, y) = (x as f64, y as f64);
        let closed = (2.0 * x * y + c1) / (x * x + y * y + c1);
        worst = worst.max((ssim(&ga, &gb).map_err(|e| e.to_string())? - closed).abs());
    }
    ensure!(worst <= 1e-9, "constant SSIM off by {worst:e}");
    Ok(format!("offset PSNR {offset:.4} dB, SSIM(a,a) = 1, constant-image SSIM within {worst:.1e}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = synth::portrait(96, 71).map_err(|e| e.to_string())?;
    let t = synth::portrait(96, 72).map_err(|e| e.to_string())?;
    let paths = ["a.png", "a_l.png", "t.png", "t_l.png"].map(|n| dir.path().join(n));
    write_rgb(&a.image, &paths[0]).map_err(|e| e.to_string())?;
    write_labels(&a.labels, &paths[1]).map_err(|e| e.to_string())?;
    write_rgb(&t.image, &paths[2]).map_err(|e| e.to_string())?;
    write_labels(&t.labels, &paths[3]).map_err(|e| e.to_string())?;
    let pair = [
        "--animated", p(&paths[0]), "--animated-labels", p(&paths[1]), "--target", p(&paths[2]),
        "--target-labels", p(&paths[3]),
    ];
    let run_once = |k: usize| -> Result<Vec<(String, Vec<u8>)>, String> {
        let root = dir.path().join(format!("run{k}"));
        let bundle = root.join("bundle");
        let out = root.join("swap").join("blend.png");
        std::fs::create_dir_all(out.parent().unwrap()).map_err(|e| e.to_string())?;
        let mut args = vec!["preprocess"];
        args.extend(pair);
        args.extend(["--out", p(&bundle)]);
        run_cli(&args)?;
        run_cli(&["refs", p(&bundle)])?;
        let mut args = vec!["swap"];
        args.extend(pair);
        args.extend(["--out", p(&out), "--keep-intermediates"]);
        run_cli(&args)?;
        let mut files = Vec::new();
        for sub in [bundle, out.parent().unwrap().to_path_buf(), headblend::cli::intermediates_dir(&out)] {
            for e in std::fs::read_dir(&sub).map_err(|e| e.to_string())? {
                let e = e.map_err(|e| e.to_string())?;
                if e.path().is_file() {
                    let name = format!(
                        "{}/{}",
                        sub.file_name().unwrap().to_string_lossy(),
                        e.file_name().to_string_lossy()
                    );
                    files.push((name, std::fs::read(e.path()).map_err(|e| e.to_string())?));
                }
            }
        }
        files.sort();
        Ok(files)
    };
    let first = run_once(0)?;
    let second = run_once(1)?;
    ensure!(first.len() == second.len(), "different artifact sets");
    for (x, y) in first.iter().zip(&second) {
        ensure!(x.0 == y.0, "artifact names differ: {} vs {}", x.0, y.0);
        ensure!(x.1 == y.1, "{} differs between runs", x.0);
    }
    Ok(format!("{} artifacts bitwise identical across two runs", first.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("complexity reduction", complexity_reduction),
        ("softmax normalization", softmax_normalization),
        ("semantic locality", semantic_locality),
        ("cycle consistency", cycle_consistency),
        ("self-swap reconstruction", self_swap),
        ("mask algebra", mask_algebra),
        ("metrics sanity", metrics_sanity),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            Err(panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS {name}: {detail} ({secs:.2}s)", k + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {} FAIL {name}: {why} ({secs:.2}s)", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

