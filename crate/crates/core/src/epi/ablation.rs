use std::fmt;

use rayon::prelude::*;

use super::{build_design, fit_ols, EpiError, EpidemicPanel, ModelSpec, Result};
use crate::geo::CoverageMatrix;
use crate::raster::LandscapeClass;
use crate::Real;

/// Landscape columns included in one ablation row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureSet {
    EnvironmentOnly,
    AllLandscape,
    Single(LandscapeClass),
}

impl FeatureSet {
    /// Row order of the ablation table.
    pub const TABLE: [FeatureSet; 8] = [
        FeatureSet::EnvironmentOnly,
        FeatureSet::AllLandscape,
        FeatureSet::Single(LandscapeClass::Buildings),
        FeatureSet::Single(LandscapeClass::Roads),
        FeatureSet::Single(LandscapeClass::Trees),
        FeatureSet::Single(LandscapeClass::Crops),
        FeatureSet::Single(LandscapeClass::Waterway),
        FeatureSet::Single(LandscapeClass::StandingWater),
    ];

    pub fn classes(self) -> Vec<LandscapeClass> {
        match self {
            FeatureSet::EnvironmentOnly => vec![],
            FeatureSet::AllLandscape => LandscapeClass::ALL.to_vec(),
            FeatureSet::Single(c) => vec![c],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::EnvironmentOnly => "environment_only",
            FeatureSet::AllLandscape => "all_landscape",
            FeatureSet::Single(LandscapeClass::Buildings) => "building",
            FeatureSet::Single(LandscapeClass::Roads) => "road",
            FeatureSet::Single(LandscapeClass::Trees) => "trees",
            FeatureSet::Single(LandscapeClass::Crops) => "crops",
            FeatureSet::Single(LandscapeClass::Waterway) => "waterway",
            FeatureSet::Single(LandscapeClass::StandingWater) => "standing_water",
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stratum {
    All,
    MoreUrban,
    LessUrban,
}

impl Stratum {
    pub const ALL: [Stratum; 3] = [Stratum::All, Stratum::MoreUrban, Stratum::LessUrban];

    pub fn name(self) -> &'static str {
        match self {
            Stratum::All => "all_towns",
            Stratum::MoreUrban => "more_urban",
            Stratum::LessUrban => "less_urban",
        }
    }
}

/// One refit. `adjusted_r2` is `None` when the stratum could not be fitted;
/// `note` then says why.
#[derive(Clone, Debug, PartialEq)]
pub struct AblationCell<T> {
    pub adjusted_r2: Option<T>,
    pub r2: Option<T>,
    pub n: usize,
    pub p: usize,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationTable<T> {
    /// Indexed `[row in FeatureSet::TABLE][stratum in Stratum::ALL]`.
    pub cells: Vec<Vec<AblationCell<T>>>,
    pub more_urban: Vec<String>,
    pub less_urban: Vec<String>,
}

impl<T: Real> AblationTable<T> {
    fn row(fs: FeatureSet) -> usize {
        FeatureSet::TABLE
            .iter()
            .position(|f| *f == fs)
            .expect("table row")
    }

    fn col(s: Stratum) -> usize {
        Stratum::ALL.iter().position(|x| *x == s).expect("stratum")
    }

    pub fn cell(&self, fs: FeatureSet, stratum: Stratum) -> &AblationCell<T> {
        &self.cells[Self::row(fs)][Self::col(stratum)]
    }

    pub fn get(&self, fs: FeatureSet, stratum: Stratum) -> Option<T> {
        self.cell(fs, stratum).adjusted_r2
    }

    fn best_among(&self, stratum: Stratum, rows: &[FeatureSet]) -> Option<FeatureSet> {
        let mut best: Option<(FeatureSet, T)> = None;
        for fs in rows {
            if let Some(v) = self.get(*fs, stratum) {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((*fs, v));
                }
            }
        }
        best.map(|(fs, _)| fs)
    }

    /// Highest adjusted R² in the column (first row wins ties).
    pub fn best(&self, stratum: Stratum) -> Option<FeatureSet> {
        self.best_among(stratum, &FeatureSet::TABLE)
    }

    /// Highest adjusted R² among the single-class rows.
    pub fn best_single(&self, stratum: Stratum) -> Option<FeatureSet> {
        self.best_among(stratum, &FeatureSet::TABLE[2..])
    }
}

/// Splits units by building coverage: strictly above the mean is more urban.
pub fn stratify_units<T: Real>(coverage: &CoverageMatrix<T>) -> Result<(Vec<String>, Vec<String>)> {
    let b = coverage
        .class_index(LandscapeClass::Buildings)
        .ok_or(EpiError::MissingClass(LandscapeClass::Buildings))?;
    let values: Vec<T> = coverage.values().iter().map(|row| row[b]).collect();
    if values.is_empty() {
        return Ok((vec![], vec![]));
    }
    let mean = values.iter().copied().sum::<T>() / T::from_count(values.len());
    let mut more = Vec::new();
    let mut less = Vec::new();
    for (id, v) in coverage.units().iter().zip(values) {
        if v > mean {
            more.push(id.clone());
        } else {
            less.push(id.clone());
        }
    }
    Ok((more, less))
}

fn fit_cell<T: Real>(
    panel: &EpidemicPanel<T>,
    coverage: &CoverageMatrix<T>,
    spec: &ModelSpec,
) -> AblationCell<T> {
    if spec.units.as_ref().is_some_and(Vec::is_empty) {
        return AblationCell {
            adjusted_r2: None,
            r2: None,
            n: 0,
            p: 0,
            note: Some("empty stratum".into()),
        };
    }
    match build_design(panel, coverage, spec).and_then(|d| fit_ols(&d)) {
        Ok(fit) => AblationCell {
            adjusted_r2: Some(fit.adjusted_r2),
            r2: Some(fit.r2),
            n: fit.n_rows,
            p: fit.n_params,
            note: None,
        },
        Err(e) => AblationCell {
            adjusted_r2: None,
            r2: None,
            n: 0,
            p: 0,
            note: Some(e.to_string()),
        },
    }
}

/// Refits the model for every feature set and stratum. Cells that cannot
/// be fitted are recorded as missing rather than failing the table.
pub fn ablate<T: Real>(
    panel: &EpidemicPanel<T>,
    coverage: &CoverageMatrix<T>,
    base: &ModelSpec,
) -> Result<AblationTable<T>> {
    for c in LandscapeClass::ALL {
        coverage.class_index(c).ok_or(EpiError::MissingClass(c))?;
    }
    let (more, less) = stratify_units(coverage)?;
    let in_panel = |ids: &[String]| -> Vec<String> {
        ids.iter()
            .filter(|id| panel.unit_index(id).is_some())
            .filter(|id| base.units.as_ref().is_none_or(|keep| keep.contains(id)))
            .cloned()
            .collect()
    };
    let more_units = in_panel(&more);
    let less_units = in_panel(&less);

    let jobs: Vec<(usize, usize)> = (0..FeatureSet::TABLE.len())
        .flat_map(|r| (0..Stratum::ALL.len()).map(move |c| (r, c)))
        .collect();
    let results: Vec<AblationCell<T>> = jobs
        .par_iter()
        .map(|&(r, c)| {
            let units = match Stratum::ALL[c] {
                Stratum::All => base.units.clone(),
                Stratum::MoreUrban => Some(more_units.clone()),
                Stratum::LessUrban => Some(less_units.clone()),
            };
            let spec = base
                .with_classes(&FeatureSet::TABLE[r].classes())
                .with_units(units);
            fit_cell(panel, coverage, &spec)
        })
        .collect();
    let mut cells: Vec<Vec<AblationCell<T>>> = vec![Vec::new(); FeatureSet::TABLE.len()];
    for ((r, _), cell) in jobs.into_iter().zip(results) {
        cells[r].push(cell);
    }
    Ok(AblationTable {
        cells,
        more_urban: more,
        less_urban: less,
    })
}

/// Exhaustive search over per-covariate lag candidates, maximizing the
/// full model's adjusted R². Combinations are visited in lexicographic
/// order and only a strictly better fit replaces the incumbent, so ties go
/// to the smaller lags.
pub fn lag_search<T: Real>(
    panel: &EpidemicPanel<T>,
    coverage: &CoverageMatrix<T>,
    base: &ModelSpec,
    grid: &[Vec<usize>],
) -> Result<Vec<usize>> {
    let n_cov = panel.covariates().len();
    if grid.len() != n_cov {
        return Err(EpiError::LagCount {
            expected: n_cov,
            got: grid.len(),
        });
    }
    let axes: Vec<Vec<usize>> = grid
        .iter()
        .map(|g| {
            let mut g = g.clone();
            g.sort_unstable();
            g.dedup();
            g
        })
        .collect();
    if axes.iter().any(Vec::is_empty) {
        return Err(EpiError::EmptyGrid);
    }
    let mut combos: Vec<Vec<usize>> = vec![vec![]];
    for axis in &axes {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |l| {
                    let mut c = prefix.clone();
                    c.push(*l);
                    c
                })
            })
            .collect();
    }
    let scores: Vec<Result<T>> = combos
        .par_iter()
        .map(|lags| {
            let d = build_design(panel, coverage, &base.with_lags(lags.clone()))?;
            Ok(fit_ols(&d)?.adjusted_r2)
        })
        .collect();
    let mut best: Option<(usize, T)> = None;
    let mut first_err = None;
    for (k, s) in scores.into_iter().enumerate() {
        match s {
            Ok(v) => {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((k, v));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some((k, _)) => Ok(combos.swap_remove(k)),
        None => Err(first_err.unwrap_or(EpiError::EmptyGrid)),
    }
}
