//! `evaluate-seg`: pooled segmentation metrics per class over prediction /
//! truth raster pairs matched by file name.

use std::collections::BTreeMap;
use std::path::Path;

use landscape_tsir::raster::{binarize, load_raster, JaccardMode, MetricSums};
use landscape_tsir::{LandscapeClass, ProbabilityRaster};

use crate::error::{CliError, Result};
use crate::inputs::pgm_files;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassMetrics {
    pub class: LandscapeClass,
    pub pairs: usize,
    pub pixels: usize,
    pub jaccard: f64,
    pub bce: f64,
    pub loss: f64,
}

fn names(dir: &Path) -> Result<BTreeMap<String, std::path::PathBuf>> {
    if !dir.is_dir() {
        return Err(CliError::Data(format!(
            "{} is not a directory",
            dir.display()
        )));
    }
    Ok(pgm_files(dir)?
        .into_iter()
        .map(|p| {
            (
                p.file_name().expect("file").to_string_lossy().into_owned(),
                p,
            )
        })
        .collect())
}

fn load(path: &Path) -> Result<ProbabilityRaster> {
    Ok(load_raster(path, &path.with_extension("json"))?)
}

/// Hard Jaccard uses predictions binarized at `threshold`; BCE and the loss
/// use the raw probabilities. Truth rasters must be binary.
pub fn cmd_evaluate_seg(
    pred_dir: &Path,
    truth_dir: &Path,
    threshold: f64,
) -> Result<Vec<ClassMetrics>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(CliError::Usage(format!(
            "threshold {threshold} outside (0, 1]"
        )));
    }
    let pred = names(pred_dir)?;
    let truth = names(truth_dir)?;
    let only_pred: Vec<&String> = pred.keys().filter(|k| !truth.contains_key(*k)).collect();
    let only_truth: Vec<&String> = truth.keys().filter(|k| !pred.contains_key(*k)).collect();
    if !only_pred.is_empty() || !only_truth.is_empty() {
        let mut msg = String::from("unpaired rasters:");
        for k in only_pred {
            msg.push_str(&format!("\n  prediction only: {k}"));
        }
        for k in only_truth {
            msg.push_str(&format!("\n  truth only: {k}"));
        }
        return Err(CliError::Data(msg));
    }
    if pred.is_empty() {
        return Err(CliError::Data(format!(
            "no .pgm rasters in {}",
            pred_dir.display()
        )));
    }
    let mut sums: BTreeMap<LandscapeClass, (usize, MetricSums<f64>, MetricSums<f64>)> =
        BTreeMap::new();
    for (name, ppath) in &pred {
        let p = load(ppath)?;
        let t = load(&truth[name])?;
        if p.class() != t.class() {
            return Err(CliError::Data(format!(
                "{name}: prediction is {} but truth is {}",
                p.class(),
                t.class()
            )));
        }
        let entry = sums.entry(p.class()).or_default();
        entry.0 += 1;
        entry
            .1
            .add(&p, &t)
            .map_err(|e| CliError::Data(format!("{name}: {e}")))?;
        entry.2.add(&binarize(&p, threshold), &t)?;
    }
    sums.into_iter()
        .map(|(class, (pairs, raw, hard))| {
            let jaccard = hard
                .jaccard(JaccardMode::Hard)
                .map_err(|e| CliError::Data(format!("class {class}: truth is not binary ({e})")))?;
            Ok(ClassMetrics {
                class,
                pairs,
                pixels: raw.pixels,
                jaccard,
                bce: raw.binary_cross_entropy(),
                loss: raw.segmentation_loss(),
            })
        })
        .collect()
}

pub fn metrics_csv(rows: &[ClassMetrics]) -> String {
    let mut s = String::from("class,pairs,pixels,jaccard_hard,bce,loss\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6}\n",
            r.class, r.pairs, r.pixels, r.jaccard, r.bce, r.loss
        ));
    }
    s
}
