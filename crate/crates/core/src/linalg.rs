//! Dense matrices and least squares by Householder QR.

#![allow(clippy::needless_range_loop)]

use thiserror::Error;

use crate::Real;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("insufficient rows: {rows} rows for {params} parameters (need at least {needed})")]
    InsufficientRows {
        rows: usize,
        params: usize,
        needed: usize,
    },
    #[error("rank-deficient design: column {index} ({name}) is identically zero")]
    ZeroColumn { index: usize, name: String },
    #[error(
        "rank-deficient design: column {index} ({name}) is a linear combination of earlier columns"
    )]
    RankDeficient { index: usize, name: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in design or response")]
    NonFinite,
    #[error("adjusted R² undefined for n = {n}, p = {p} (need n > p + 1)")]
    AdjustedR2Domain { n: usize, p: usize },
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::Shape("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| *a * *b).sum())
            .collect()
    }

    /// Keeps the listed rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            data.extend(cols.iter().map(|&c| self.get(r, c)));
        }
        Self {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }
}

/// Result of an ordinary least-squares solve without intercept.
#[derive(Clone, Debug, PartialEq)]
pub struct OlsFit<T> {
    pub coefficients: Vec<T>,
    pub std_errors: Vec<T>,
    pub fitted: Vec<T>,
    pub residuals: Vec<T>,
    pub rss: T,
    pub tss: T,
    pub r2: T,
    pub adjusted_r2: T,
    pub n: usize,
    pub p: usize,
}

/// `1 − (1 − r2)(n − 1)/(n − p − 1)`.
pub fn adjusted_r2<T: Real>(r2: T, n: usize, p: usize) -> Result<T, LinalgError> {
    if n <= p + 1 {
        return Err(LinalgError::AdjustedR2Domain { n, p });
    }
    let num = T::from_count(n - 1);
    let den = T::from_count(n - p - 1);
    Ok(T::one() - (T::one() - r2) * num / den)
}

/// Minimizes `‖Xβ − y‖²` with a Householder QR factorization.
///
/// Columns whose component orthogonal to the earlier columns falls below
/// `sqrt(ε)/100` of their norm are reported as rank-deficient, naming the
/// column from `names` when given.
pub fn least_squares<T: Real>(
    x: &Matrix<T>,
    y: &[T],
    names: Option<&[String]>,
) -> Result<OlsFit<T>, LinalgError> {
    let (n, p) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(LinalgError::Shape(format!(
            "{n} design rows, {} responses",
            y.len()
        )));
    }
    if n < p + 2 {
        return Err(LinalgError::InsufficientRows {
            rows: n,
            params: p,
            needed: p + 2,
        });
    }
    if x.data.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let name = |j: usize| {
        names
            .and_then(|ns| ns.get(j).cloned())
            .unwrap_or_else(|| format!("x{j}"))
    };

    // column-major working copy
    let mut a: Vec<Vec<T>> = (0..p).map(|j| x.column(j)).collect();
    let norms: Vec<T> = a.iter().map(|c| norm(c)).collect();
    let mut qty = y.to_vec();
    let tol = T::epsilon().sqrt() * T::lit(0.01);

    for k in 0..p {
        if norms[k] == T::zero() {
            return Err(LinalgError::ZeroColumn {
                index: k,
                name: name(k),
            });
        }
        let alpha = norm(&a[k][k..]);
        if alpha <= tol * norms[k] {
            return Err(LinalgError::RankDeficient {
                index: k,
                name: name(k),
            });
        }
        // v = x + sign(x0)‖x‖e1, stored in place of column k below the diagonal
        let sign = if a[k][k] >= T::zero() {
            T::one()
        } else {
            -T::one()
        };
        let mut v: Vec<T> = a[k][k..].to_vec();
        v[0] = v[0] + sign * alpha;
        let vnorm2: T = v.iter().map(|e| *e * *e).sum();
        let two = T::lit(2.0);
        let apply = |col: &mut [T]| {
            let dot: T = v.iter().zip(col.iter()).map(|(a, b)| *a * *b).sum();
            let s = two * dot / vnorm2;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c = *c - s * *vi;
            }
        };
        for col in a.iter_mut().skip(k) {
            apply(&mut col[k..]);
        }
        apply(&mut qty[k..]);
    }

    // back substitution on R (upper triangle of `a`)
    let r = |i: usize, j: usize| a[j][i];
    let mut beta = vec![T::zero(); p];
    for i in (0..p).rev() {
        let mut s = qty[i];
        for j in i + 1..p {
            s = s - r(i, j) * beta[j];
        }
        beta[i] = s / r(i, i);
    }

    let fitted = x.mul_vec(&beta);
    let residuals: Vec<T> = y.iter().zip(&fitted).map(|(a, b)| *a - *b).collect();
    let rss: T = residuals.iter().map(|e| *e * *e).sum();
    let mean = y.iter().copied().sum::<T>() / T::from_count(n);
    let tss: T = y.iter().map(|v| (*v - mean) * (*v - mean)).sum();
    let r2 = if tss > T::zero() {
        T::one() - rss / tss
    } else if rss == T::zero() {
        T::one()
    } else {
        T::zero()
    };
    let adjusted = adjusted_r2(r2, n, p)?;

    // Var(β) = σ² (RᵀR)⁻¹ = σ² R⁻¹R⁻ᵀ; the SE of β_i is σ‖row i of R⁻¹‖.
    let sigma2 = rss / T::from_count(n - p);
    let mut rinv = vec![vec![T::zero(); p]; p];
    for j in 0..p {
        rinv[j][j] = T::one() / r(j, j);
        for i in (0..j).rev() {
            let mut s = T::zero();
            for k in i + 1..=j {
                s = s + r(i, k) * rinv[k][j];
            }
            rinv[i][j] = -s / r(i, i);
        }
    }
    let std_errors = rinv
        .iter()
        .map(|row| (sigma2 * row.iter().map(|v| *v * *v).sum::<T>()).sqrt())
        .collect();

    Ok(OlsFit {
        coefficients: beta,
        std_errors,
        fitted,
        residuals,
        rss,
        tss,
        r2,
        adjusted_r2: adjusted,
        n,
        p,
    })
}

fn norm<T: Real>(v: &[T]) -> T {
    // scaled to avoid overflow on large columns
    let scale = v.iter().fold(T::zero(), |m, e| m.max(e.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    scale
        * v.iter()
            .map(|e| (*e / scale) * (*e / scale))
            .sum::<T>()
            .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, StandardNormal};

    /// Independent route: normal equations solved by Gauss-Jordan elimination.
    fn normal_equations(x: &Matrix<f64>, y: &[f64]) -> Vec<f64> {
        let p = x.ncols();
        let mut m = vec![vec![0.0; p + 1]; p];
        for r in 0..x.nrows() {
            for i in 0..p {
                for j in 0..p {
                    m[i][j] += x.get(r, i) * x.get(r, j);
                }
                m[i][p] += x.get(r, i) * y[r];
            }
        }
        for c in 0..p {
            let piv = (c..p)
                .max_by(|a, b| m[*a][c].abs().total_cmp(&m[*b][c].abs()))
                .unwrap();
            m.swap(c, piv);
            for r in 0..p {
                if r != c {
                    let f = m[r][c] / m[c][c];
                    for k in c..=p {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
        (0..p).map(|i| m[i][p] / m[i][i]).collect()
    }

    fn random_design(rng: &mut impl Rng, n: usize, p: usize) -> Matrix<f64> {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn hand_sized_slope() {
        let x = Matrix::from_rows(&[vec![1.0f64], vec![2.0], vec![3.0]]).unwrap();
        let fit = least_squares(&x, &[2.0, 4.0, 6.0], None).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-14);
        assert!((fit.r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exact_recovery_without_noise() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let x = random_design(&mut rng, 40, 5);
        let beta = [1.5, -2.0, 0.25, 10.0, -0.001];
        let y = x.mul_vec(&beta);
        let fit = least_squares(&x, &y, None).unwrap();
        for (est, truth) in fit.coefficients.iter().zip(beta) {
            assert!(((est - truth) / truth).abs() < 1e-8, "{est} vs {truth}");
        }
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_normal_equations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let x = random_design(&mut rng, 60, 4);
        let y: Vec<f64> = (0..60).map(|_| rng.random_range(-1.0..1.0)).collect();
        let qr = least_squares(&x, &y, None).unwrap();
        let ne = normal_equations(&x, &y);
        for (a, b) in qr.coefficients.iter().zip(ne) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rescaling_a_column_rescales_its_coefficient() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let x = random_design(&mut rng, 30, 3);
        let y: Vec<f64> = (0..30).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut xs = x.clone();
        for r in 0..30 {
            xs.set(r, 1, x.get(r, 1) * 8.0);
        }
        let a = least_squares(&x, &y, None).unwrap();
        let b = least_squares(&xs, &y, None).unwrap();
        assert!((a.coefficients[1] / 8.0 - b.coefficients[1]).abs() < 1e-12);
        assert!((a.r2 - b.r2).abs() < 1e-12);
        for (u, v) in a.fitted.iter().zip(&b.fitted) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn noisy_coefficients_within_three_standard_errors() {
        let beta = [0.8, -1.2, 2.5];
        let mut hits = [0usize; 3];
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + seed);
            let x = random_design(&mut rng, 80, 3);
            let y: Vec<f64> = x
                .mul_vec(&beta)
                .into_iter()
                .map(|v| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    v + 0.3 * e
                })
                .collect();
            let fit = least_squares(&x, &y, None).unwrap();
            for k in 0..3 {
                if (fit.coefficients[k] - beta[k]).abs() <= 3.0 * fit.std_errors[k] {
                    hits[k] += 1;
                }
            }
        }
        assert!(hits.iter().all(|h| *h >= 99), "{hits:?}");
    }

    #[test]
    fn rank_problems_name_the_column() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 0.0, 1.0]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        assert_eq!(
            least_squares(&x, &[0.0; 6], Some(&names)).unwrap_err(),
            LinalgError::ZeroColumn {
                index: 1,
                name: "b".into()
            }
        );
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![i as f64, 1.0, 2.0 * i as f64 + 3.0])
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        assert_eq!(
            least_squares(&x, &[1.0; 6], Some(&names)).unwrap_err(),
            LinalgError::RankDeficient {
                index: 2,
                name: "c".into()
            }
        );
    }

    #[test]
    fn too_few_rows() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            least_squares(&x, &[1.0, 2.0], None),
            Err(LinalgError::InsufficientRows {
                rows: 2,
                params: 2,
                ..
            })
        ));
    }

    #[test]
    fn adjusted_r2_formula() {
        assert_eq!(adjusted_r2(1.0, 50, 7).unwrap(), 1.0);
        let v = adjusted_r2(0.728f64, 100, 9).unwrap();
        assert!((v - (1.0 - 0.272 * 99.0 / 90.0)).abs() < 1e-12);
        assert!((v - 0.7008).abs() < 1e-4);
        assert_eq!(adjusted_r2(0.4, 10, 0).unwrap(), 0.4);
        assert!(adjusted_r2(0.4, 10, 9).is_err());
        for p in 1..5 {
            assert!(adjusted_r2(0.6, 20, p).unwrap() <= 0.6);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let x = Matrix::from_rows(&[
            vec![1.0f32, 0.5],
            vec![2.0, -1.0],
            vec![3.0, 0.0],
            vec![4.0, 2.0],
        ])
        .unwrap();
        let y = x.mul_vec(&[1.5, -0.5]);
        let fit = least_squares(&x, &y, None).unwrap();
        assert!((fit.coefficients[0] - 1.5).abs() < 1e-5);
        assert!((fit.coefficients[1] + 0.5).abs() < 1e-5);
    }
}
