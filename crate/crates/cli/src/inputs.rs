//! Loading units, rasters, coverage and the epidemic panel from disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use landscape_tsir::epi::io::{read_cases, read_population, read_weather};
use landscape_tsir::epi::{bin_cases, bin_weather, biweek_count, population_series, Covariate};
use landscape_tsir::geo::{coverage_matrix, read_units, CoverageMode};
use landscape_tsir::raster::load_raster;
use landscape_tsir::{
    CoverageMatrix, EpidemicPanel, LandscapeClass, ProbabilityRaster, SpatialUnit,
};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};

pub const COVERAGE_HEADER: &str = "unit_id,class,fraction,positive_px,total_px";

pub fn load_units(cfg: &PipelineConfig) -> Result<Vec<SpatialUnit>> {
    Ok(read_units(&cfg.units)?)
}

/// `*.pgm` files in `dir`, sorted by name.
pub fn pgm_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(CliError::io(dir))? {
        let path = entry.map_err(CliError::io(dir))?.path();
        if path.extension().is_some_and(|e| e == "pgm") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Reads `<rasters_dir>/<class>/*.pgm` (with `.json` sidecars) for each class.
pub fn load_rasters(
    rasters_dir: &Path,
    classes: &[LandscapeClass],
) -> Result<BTreeMap<LandscapeClass, Vec<ProbabilityRaster>>> {
    let mut out = BTreeMap::new();
    for &class in classes {
        let dir = rasters_dir.join(class.name());
        if !dir.is_dir() {
            return Err(CliError::Data(format!(
                "missing raster directory for class {class}: {}",
                dir.display()
            )));
        }
        let mut list = Vec::new();
        for pgm in pgm_files(&dir)? {
            let raster: ProbabilityRaster = load_raster(&pgm, &pgm.with_extension("json"))?;
            if raster.class() != class {
                return Err(CliError::Data(format!(
                    "{} is labelled {} but sits in the {class} directory",
                    pgm.display(),
                    raster.class()
                )));
            }
            list.push(raster);
        }
        if list.is_empty() {
            return Err(CliError::Data(format!(
                "no rasters for class {class} in {}",
                dir.display()
            )));
        }
        out.insert(class, list);
    }
    Ok(out)
}

pub fn aggregate(cfg: &PipelineConfig, units: &[SpatialUnit]) -> Result<CoverageMatrix> {
    let classes = cfg.classes();
    let rasters = load_rasters(&cfg.rasters_dir, &classes)?;
    Ok(coverage_matrix(
        &rasters,
        &classes,
        units,
        cfg.threshold,
        cfg.coverage_mode,
    )?)
}

pub fn coverage_csv(m: &CoverageMatrix) -> String {
    let mut s = String::from(COVERAGE_HEADER);
    s.push('\n');
    for (i, unit) in m.units().iter().enumerate() {
        for (a, class) in m.classes().iter().enumerate() {
            let (pos, tot) = m.counts()[i][a];
            s.push_str(&format!(
                "{},{class},{:.6},{pos},{tot}\n",
                csv_field(unit),
                m.values()[i][a]
            ));
        }
    }
    s
}

/// Quotes a field if it contains a delimiter, quote or line break.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Reads a coverage CSV. Thresholded fractions are rebuilt from the pixel
/// tallies, so no precision is lost to the six-decimal column.
pub fn read_coverage(
    path: &Path,
    classes: &[LandscapeClass],
    mode: CoverageMode,
) -> Result<CoverageMatrix> {
    let data_err =
        |line: u64, m: String| CliError::Data(format!("{}, line {line}: {m}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| data_err(0, e.to_string()))?;
    let header = rdr
        .headers()
        .map_err(|e| data_err(1, e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>().join(",") != COVERAGE_HEADER {
        return Err(data_err(1, format!("header must be {COVERAGE_HEADER}")));
    }
    let mut units: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(usize, LandscapeClass), (f64, u64, u64)> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| data_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |k: usize| rec.get(k).unwrap_or("");
        let class: LandscapeClass = field(1)
            .parse()
            .map_err(|e| data_err(line, format!("{e}")))?;
        let fraction: f64 = field(2)
            .parse()
            .map_err(|_| data_err(line, format!("fraction {:?} is not a number", field(2))))?;
        let pos: u64 = field(3)
            .parse()
            .map_err(|_| data_err(line, format!("positive_px {:?} is not a count", field(3))))?;
        let tot: u64 = field(4)
            .parse()
            .map_err(|_| data_err(line, format!("total_px {:?} is not a count", field(4))))?;
        let id = field(0).to_string();
        let u = match units.iter().position(|x| *x == id) {
            Some(u) => u,
            None => {
                units.push(id);
                units.len() - 1
            }
        };
        if cells.insert((u, class), (fraction, pos, tot)).is_some() {
            return Err(data_err(
                line,
                format!("duplicate row for {}/{class}", units[u]),
            ));
        }
    }
    let mut values = Vec::with_capacity(units.len());
    let mut counts = Vec::with_capacity(units.len());
    for (u, id) in units.iter().enumerate() {
        let mut vrow = Vec::with_capacity(classes.len());
        let mut crow = Vec::with_capacity(classes.len());
        for &c in classes {
            let &(f, p, t) = cells.get(&(u, c)).ok_or_else(|| {
                CliError::Data(format!("{}: no {c} row for unit {id}", path.display()))
            })?;
            vrow.push(f);
            crow.push((p, t));
        }
        values.push(vrow);
        counts.push(crow);
    }
    Ok(match mode {
        CoverageMode::Threshold => CoverageMatrix::from_counts(units, classes.to_vec(), counts)?,
        CoverageMode::MeanProbability => {
            CoverageMatrix::new(units, classes.to_vec(), values, counts)?
        }
    })
}

/// Coverage for `fit` and `ablate`: the configured CSV, else
/// `coverage.csv` in the output directory, else aggregated afresh from the
/// rasters.
pub fn load_coverage(cfg: &PipelineConfig, units: &[SpatialUnit]) -> Result<CoverageMatrix> {
    let path = cfg
        .coverage
        .clone()
        .or_else(|| Some(cfg.output_dir.join("coverage.csv")).filter(|p| p.is_file()));
    match path {
        Some(path) => read_coverage(&path, &cfg.classes(), cfg.coverage_mode),
        None => aggregate(cfg, units),
    }
}

pub fn load_panel(cfg: &PipelineConfig, units: &[SpatialUnit]) -> Result<EpidemicPanel> {
    let ids: Vec<String> = units.iter().map(|u| u.id().to_string()).collect();
    let areas: Vec<f64> = units.iter().map(|u| u.area_km2()).collect();
    let n = biweek_count(cfg.start_date, cfg.end_date);
    let cases = read_cases::<f64>(&cfg.cases)?;
    let infected = bin_cases(&cases, &ids, cfg.start_date, cfg.end_date)?;
    let (temp, rain) = read_weather::<f64>(&cfg.weather)?;
    let weather = bin_weather(&temp, &rain, cfg.start_date, cfg.end_date)?;
    let pop = read_population::<f64>(&cfg.population)?;
    let population = population_series(&pop, &ids, cfg.start_date, n)?;
    Ok(EpidemicPanel::assemble(
        cfg.start_date,
        &ids,
        infected,
        population,
        &areas,
        Covariate::from_weather(&weather),
        &cfg.susceptible_rule(),
    )?)
}

/// Panel units that also have coverage; the rest are dropped with a warning.
pub fn fitted_units(panel: &EpidemicPanel, coverage: &CoverageMatrix) -> Option<Vec<String>> {
    let ids = panel.unit_ids();
    let (keep, dropped): (Vec<String>, Vec<String>) = ids
        .into_iter()
        .partition(|id| coverage.unit_index(id).is_some());
    if dropped.is_empty() {
        None
    } else {
        log::warn!("no coverage for units {dropped:?}; they are left out of the fit");
        Some(keep)
    }
}
