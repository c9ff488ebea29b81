use super::{ImageTensor, RasterError, Result};
use crate::Real;

/// Floor applied to the standard deviation in [`normalize`].
pub const STD_EPSILON: f64 = 1e-8;

/// Per-channel mean and population standard deviation of an image collection.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelStats<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

impl<T: Real> ChannelStats<T> {
    pub fn channels(&self) -> usize {
        self.mean.len()
    }
}

// Per-image partial sums are sorted before being combined so the result is
// bit-identical for any ordering of the collection.
fn order_free_sum<T: Real>(mut parts: Vec<T>) -> T {
    parts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    parts.into_iter().fold(T::zero(), |acc, v| acc + v)
}

/// Joint statistics over every pixel of every image.
pub fn compute_stats<T: Real>(images: &[ImageTensor<T>]) -> Result<ChannelStats<T>> {
    let first = images.first().ok_or(RasterError::EmptyCollection)?;
    let ch = first.channels();
    if let Some(bad) = images.iter().find(|im| im.channels() != ch) {
        return Err(RasterError::ChannelMismatch(ch, bad.channels()));
    }
    let pixels: usize = images.iter().map(|im| im.width() * im.height()).sum();
    let count = T::from_count(pixels);

    let per_image = |f: &dyn Fn(T, usize) -> T| -> Vec<Vec<T>> {
        images
            .iter()
            .map(|im| {
                let mut acc = vec![T::zero(); ch];
                for (i, v) in im.values().iter().enumerate() {
                    let c = i % ch;
                    acc[c] = acc[c] + f(*v, c);
                }
                acc
            })
            .collect()
    };

    let sums = per_image(&|v, _| v);
    let mean: Vec<T> = (0..ch)
        .map(|c| order_free_sum(sums.iter().map(|s| s[c]).collect()) / count)
        .collect();
    let squares = per_image(&|v, c| {
        let d = v - mean[c];
        d * d
    });
    let std = (0..ch)
        .map(|c| (order_free_sum(squares.iter().map(|s| s[c]).collect()) / count).sqrt())
        .collect();
    Ok(ChannelStats { mean, std })
}

/// `(v - mean) / max(std, 1e-8)` per channel.
pub fn normalize<T: Real>(
    image: &ImageTensor<T>,
    stats: &ChannelStats<T>,
) -> Result<ImageTensor<T>> {
    let ch = image.channels();
    if stats.channels() != ch {
        return Err(RasterError::ChannelMismatch(ch, stats.channels()));
    }
    let eps = T::lit(STD_EPSILON);
    let scale: Vec<T> = stats.std.iter().map(|s| s.max(eps)).collect();
    let values = image
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let c = i % ch;
            (*v - stats.mean[c]) / scale[c]
        })
        .collect();
    ImageTensor::new(image.width(), image.height(), ch, values)
}
