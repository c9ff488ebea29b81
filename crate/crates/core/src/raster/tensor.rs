use super::{RasterError, Result};

/// Row-major image with interleaved channels: the value of channel `c` at
/// (`x`, `y`) lives at `(y * width + x) * channels + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageTensor<T> {
    width: usize,
    height: usize,
    channels: usize,
    values: Vec<T>,
}

impl<T: Copy> ImageTensor<T> {
    pub fn new(width: usize, height: usize, channels: usize, values: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(RasterError::Shape(format!(
                "{width}x{height} has a zero side"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(RasterError::Shape(format!(
                "{channels} channels, expected 1 or 3"
            )));
        }
        if values.len() != width * height * channels {
            return Err(RasterError::Shape(format!(
                "{} values for {width}x{height}x{channels}",
                values.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: T) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    values.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> T {
        self.values[(y * self.width + x) * self.channels + c]
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> ImageTensor<U> {
        ImageTensor {
            width: self.width,
            height: self.height,
            channels: self.channels,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    fn row(&self, y: usize) -> &[T] {
        let stride = self.width * self.channels;
        &self.values[y * stride..(y + 1) * stride]
    }
}

/// Splits `image` into non-overlapping `tile_size` squares in row-major
/// order. No padding: both sides must be multiples of `tile_size`.
pub fn tile<T: Copy>(image: &ImageTensor<T>, tile_size: usize) -> Result<Vec<ImageTensor<T>>> {
    if tile_size == 0
        || !image.width.is_multiple_of(tile_size)
        || !image.height.is_multiple_of(tile_size)
    {
        return Err(RasterError::NotDivisible {
            width: image.width,
            height: image.height,
            tile_size,
        });
    }
    let rows = image.height / tile_size;
    let cols = image.width / tile_size;
    let span = tile_size * image.channels;
    let mut tiles = Vec::with_capacity(rows * cols);
    for tr in 0..rows {
        for tc in 0..cols {
            let mut values = Vec::with_capacity(tile_size * span);
            for y in tr * tile_size..(tr + 1) * tile_size {
                let start = tc * span;
                values.extend_from_slice(&image.row(y)[start..start + span]);
            }
            tiles.push(ImageTensor {
                width: tile_size,
                height: tile_size,
                channels: image.channels,
                values,
            });
        }
    }
    Ok(tiles)
}

/// Inverse of [`tile`]: pastes `rows * cols` equally shaped tiles given in
/// row-major order.
pub fn untile<T: Copy>(
    tiles: &[ImageTensor<T>],
    rows: usize,
    cols: usize,
) -> Result<ImageTensor<T>> {
    if tiles.is_empty() || tiles.len() != rows * cols {
        return Err(RasterError::TileCount {
            expected: rows * cols,
            got: tiles.len(),
        });
    }
    let first = &tiles[0];
    let (tw, th, ch) = (first.width, first.height, first.channels);
    for (index, t) in tiles.iter().enumerate() {
        if (t.width, t.height, t.channels) != (tw, th, ch) {
            return Err(RasterError::TileMismatch {
                index,
                got_w: t.width,
                got_h: t.height,
                got_c: t.channels,
                want_w: tw,
                want_h: th,
                want_c: ch,
            });
        }
    }
    let width = tw * cols;
    let height = th * rows;
    let mut values = Vec::with_capacity(width * height * ch);
    for tr in 0..rows {
        for y in 0..th {
            for tc in 0..cols {
                values.extend_from_slice(tiles[tr * cols + tc].row(y));
            }
        }
    }
    ImageTensor::new(width, height, ch, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(w: usize, h: usize, c: usize) -> ImageTensor<f64> {
        ImageTensor::from_fn(w, h, c, |x, y, k| ((y * w + x) * c + k) as f64).unwrap()
    }

    #[test]
    fn sixteen_tiles_from_1024() {
        let img = ImageTensor::filled(1024, 1024, 3, 7u8).unwrap();
        let tiles = tile(&img, 256).unwrap();
        assert_eq!(tiles.len(), 16);
        assert!(tiles
            .iter()
            .all(|t| (t.width(), t.height(), t.channels()) == (256, 256, 3)));
    }

    #[test]
    fn single_tile_is_identity() {
        let img = ramp(256, 256, 1);
        let tiles = tile(&img, 256).unwrap();
        assert_eq!(tiles, vec![img.clone()]);
        assert_eq!(untile(&tiles, 1, 1).unwrap(), img);
    }

    #[test]
    fn tile_order_is_row_major() {
        let img = ramp(4, 4, 1);
        let tiles = tile(&img, 2).unwrap();
        assert_eq!(tiles[1].get(0, 0, 0), img.get(2, 0, 0));
        assert_eq!(tiles[2].get(0, 0, 0), img.get(0, 2, 0));
        assert_eq!(tiles[3].get(1, 1, 0), img.get(3, 3, 0));
    }

    #[test]
    fn indivisible_sizes_are_rejected() {
        let img = ramp(300, 256, 1);
        assert!(matches!(
            tile(&img, 256),
            Err(RasterError::NotDivisible { .. })
        ));
        assert!(matches!(
            tile(&img, 0),
            Err(RasterError::NotDivisible { .. })
        ));
    }

    #[test]
    fn untile_checks_shapes_and_count() {
        let a = ramp(2, 2, 1);
        let b = ramp(3, 2, 1);
        assert!(matches!(
            untile(&[a.clone(), b], 1, 2),
            Err(RasterError::TileMismatch { index: 1, .. })
        ));
        assert!(matches!(
            untile(&[a.clone(), a], 2, 2),
            Err(RasterError::TileCount {
                expected: 4,
                got: 2
            })
        ));
    }

    #[test]
    fn untile_matches_manual_paste() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let tiles: Vec<ImageTensor<f64>> = (0..4)
            .map(|_| ImageTensor::from_fn(5, 5, 3, |_, _, _| rng.random::<f64>()).unwrap())
            .collect();
        let out = untile(&tiles, 2, 2).unwrap();
        for y in 0..10 {
            for x in 0..10 {
                for c in 0..3 {
                    let t = &tiles[(y / 5) * 2 + x / 5];
                    assert_eq!(out.get(x, y, c).to_bits(), t.get(x % 5, y % 5, c).to_bits());
                }
            }
        }
    }

    proptest! {
        #[test]
        fn tile_untile_round_trip(
            rows in 1usize..5,
            cols in 1usize..5,
            ts in 1usize..9,
            three in any::<bool>(),
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let ch = if three { 3 } else { 1 };
            let img = ImageTensor::from_fn(cols * ts, rows * ts, ch, |_, _, _| rng.random::<f32>()).unwrap();
            let tiles = tile(&img, ts).unwrap();
            prop_assert_eq!(tiles.len(), rows * cols);
            prop_assert_eq!(untile(&tiles, rows, cols).unwrap(), img);
        }
    }
}
