use super::{ImageTensor, ProbabilityRaster, RasterError, Result};
use crate::Real;

/// Probability clip used inside binary cross-entropy.
pub const BCE_EPSILON: f64 = 1e-7;
/// Floor applied to the soft Jaccard index before taking its logarithm.
pub const JACCARD_FLOOR: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JaccardMode {
    /// Probabilities used directly: `Σpy / (Σp + Σy − Σpy)`.
    Soft,
    /// Set intersection over union of {0, 1} maps.
    Hard,
}

/// 1 where the probability is at least `threshold`, 0 elsewhere.
pub fn binarize<T: Real>(raster: &ProbabilityRaster<T>, threshold: T) -> ProbabilityRaster<T> {
    let grid = raster
        .grid()
        .map(|p| if p >= threshold { T::one() } else { T::zero() });
    ProbabilityRaster::from_parts_unchecked(grid, *raster.georef(), raster.class())
}

/// Running sums behind every segmentation metric, so metrics can be pooled
/// over many raster pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricSums<T> {
    pub pixels: usize,
    pub sum_pred: T,
    pub sum_truth: T,
    pub sum_product: T,
    pub bce_total: T,
    pub hard_intersection: usize,
    pub hard_union: usize,
    non_binary: Option<(usize, f64)>,
}

impl<T: Real> MetricSums<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_images(&mut self, pred: &ImageTensor<T>, truth: &ImageTensor<T>) -> Result<()> {
        if (pred.width(), pred.height(), pred.channels())
            != (truth.width(), truth.height(), truth.channels())
        {
            return Err(RasterError::DimensionMismatch(
                pred.width(),
                pred.height(),
                truth.width(),
                truth.height(),
            ));
        }
        self.add_slices(pred.values(), truth.values());
        Ok(())
    }

    pub fn add(&mut self, pred: &ProbabilityRaster<T>, truth: &ProbabilityRaster<T>) -> Result<()> {
        self.add_images(pred.grid(), truth.grid())
    }

    fn add_slices(&mut self, pred: &[T], truth: &[T]) {
        let eps = T::lit(BCE_EPSILON);
        let one = T::one();
        for (i, (&p, &y)) in pred.iter().zip(truth).enumerate() {
            self.sum_pred = self.sum_pred + p;
            self.sum_truth = self.sum_truth + y;
            self.sum_product = self.sum_product + p * y;
            let pc = p.max(eps).min(one - eps);
            self.bce_total = self.bce_total - (y * pc.ln() + (one - y) * (one - pc).ln());
            let pb = is_binary(p);
            let yb = is_binary(y);
            if !(pb && yb) {
                if self.non_binary.is_none() {
                    let v = if pb { y } else { p };
                    self.non_binary = Some((self.pixels + i, v.as_f64()));
                }
                continue;
            }
            let (a, b) = (p == one, y == one);
            if a && b {
                self.hard_intersection += 1;
            }
            if a || b {
                self.hard_union += 1;
            }
        }
        self.pixels += pred.len();
    }

    pub fn jaccard(&self, mode: JaccardMode) -> Result<T> {
        match mode {
            JaccardMode::Soft => {
                let denom = self.sum_pred + self.sum_truth - self.sum_product;
                if denom <= T::zero() {
                    Ok(T::one())
                } else {
                    Ok(self.sum_product / denom)
                }
            }
            JaccardMode::Hard => {
                if let Some((index, value)) = self.non_binary {
                    return Err(RasterError::NotBinary { index, value });
                }
                if self.hard_union == 0 {
                    Ok(T::one())
                } else {
                    Ok(T::from_count(self.hard_intersection) / T::from_count(self.hard_union))
                }
            }
        }
    }

    pub fn binary_cross_entropy(&self) -> T {
        if self.pixels == 0 {
            return T::zero();
        }
        self.bce_total / T::from_count(self.pixels)
    }

    /// `B − log(max(J_soft, 1e-7))`.
    pub fn segmentation_loss(&self) -> T {
        let j = self
            .jaccard(JaccardMode::Soft)
            .expect("soft mode is infallible")
            .max(T::lit(JACCARD_FLOOR));
        self.binary_cross_entropy() - j.ln()
    }
}

fn is_binary<T: Real>(v: T) -> bool {
    v == T::zero() || v == T::one()
}

fn sums_of<T: Real>(
    pred: &ProbabilityRaster<T>,
    truth: &ProbabilityRaster<T>,
) -> Result<MetricSums<T>> {
    let mut s = MetricSums::new();
    s.add(pred, truth)?;
    Ok(s)
}

/// Jaccard index; 1 when both maps are empty.
pub fn jaccard<T: Real>(
    pred: &ProbabilityRaster<T>,
    truth: &ProbabilityRaster<T>,
    mode: JaccardMode,
) -> Result<T> {
    sums_of(pred, truth)?.jaccard(mode)
}

/// Mean per-pixel binary cross-entropy with predictions clipped to
/// `[1e-7, 1 − 1e-7]`.
pub fn binary_cross_entropy<T: Real>(
    pred: &ProbabilityRaster<T>,
    truth: &ProbabilityRaster<T>,
) -> Result<T> {
    Ok(sums_of(pred, truth)?.binary_cross_entropy())
}

/// Training loss `C = B − log(J)` with soft Jaccard.
pub fn segmentation_loss<T: Real>(
    pred: &ProbabilityRaster<T>,
    truth: &ProbabilityRaster<T>,
) -> Result<T> {
    Ok(sums_of(pred, truth)?.segmentation_loss())
}
