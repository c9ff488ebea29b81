//! CSV inputs: cases `unit_id,date,count`, weather
//! `date,mean_temp_c,precip_mm`, population `unit_id,date,population`.
//! Values are written in shortest round-trip form so re-reading is exact.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{EpiError, Result};
use crate::Real;

pub const CASES_HEADER: [&str; 3] = ["unit_id", "date", "count"];
pub const WEATHER_HEADER: [&str; 3] = ["date", "mean_temp_c", "precip_mm"];
pub const POPULATION_HEADER: [&str; 3] = ["unit_id", "date", "population"];

/// Daily weather: (temperatures, precipitation), both keyed by date.
pub type DailyWeather<T> = (Vec<(NaiveDate, T)>, Vec<(NaiveDate, T)>);

fn csv_err(path: &Path, line: u64, message: impl Into<String>) -> EpiError {
    EpiError::Csv {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn read_rows(path: &Path, header: [&str; 3]) -> Result<Vec<(u64, [String; 3])>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, 0, e.to_string()))?;
    let got = rdr
        .headers()
        .map_err(|e| csv_err(path, 1, e.to_string()))?
        .clone();
    if got.iter().collect::<Vec<_>>() != header {
        return Err(csv_err(
            path,
            1,
            format!("header {:?}, expected {}", got, header.join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(csv_err(
                path,
                line,
                format!("{} fields, expected 3", rec.len()),
            ));
        }
        out.push((
            line,
            [rec[0].to_string(), rec[1].to_string(), rec[2].to_string()],
        ));
    }
    Ok(out)
}

fn parse_date(path: &Path, line: u64, s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| csv_err(path, line, format!("date {s:?}: {e}")))
}

fn parse_num<T: Real>(path: &Path, line: u64, s: &str, what: &str) -> Result<T> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(T::lit)
        .ok_or_else(|| csv_err(path, line, format!("{what} {s:?} is not a finite number")))
}

fn non_negative<T: Real>(path: &Path, line: u64, v: T, what: &str) -> Result<T> {
    if v < T::zero() {
        Err(csv_err(path, line, format!("{what} {v} is negative")))
    } else {
        Ok(v)
    }
}

pub fn read_cases<T: Real>(path: &Path) -> Result<Vec<(String, NaiveDate, T)>> {
    read_rows(path, CASES_HEADER)?
        .into_iter()
        .map(|(line, [u, d, c])| {
            let count = non_negative(path, line, parse_num(path, line, &c, "count")?, "count")?;
            Ok((u, parse_date(path, line, &d)?, count))
        })
        .collect()
}

pub fn read_weather<T: Real>(path: &Path) -> Result<DailyWeather<T>> {
    let mut temp = Vec::new();
    let mut rain = Vec::new();
    for (line, [d, t, p]) in read_rows(path, WEATHER_HEADER)? {
        let date = parse_date(path, line, &d)?;
        temp.push((date, parse_num(path, line, &t, "temperature")?));
        let precip = parse_num(path, line, &p, "precipitation")?;
        rain.push((date, non_negative(path, line, precip, "precipitation")?));
    }
    Ok((temp, rain))
}

pub fn read_population<T: Real>(path: &Path) -> Result<Vec<(String, NaiveDate, T)>> {
    read_rows(path, POPULATION_HEADER)?
        .into_iter()
        .map(|(line, [u, d, p])| {
            let pop: T = parse_num(path, line, &p, "population")?;
            if !(pop > T::zero()) {
                return Err(csv_err(
                    path,
                    line,
                    format!("population {pop} must be positive"),
                ));
            }
            Ok((u, parse_date(path, line, &d)?, pop))
        })
        .collect()
}

fn write_lines(path: &Path, header: [&str; 3], rows: impl Iterator<Item = String>) -> Result<()> {
    let io = |source| EpiError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for row in rows {
        writeln!(w, "{row}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_cases<T: Real>(path: &Path, rows: &[(String, NaiveDate, T)]) -> Result<()> {
    write_lines(
        path,
        CASES_HEADER,
        rows.iter().map(|(u, d, c)| format!("{u},{d},{c}")),
    )
}

pub fn write_weather<T: Real>(
    path: &Path,
    temp: &[(NaiveDate, T)],
    rain: &[(NaiveDate, T)],
) -> Result<()> {
    if temp.len() != rain.len() || temp.iter().zip(rain).any(|(a, b)| a.0 != b.0) {
        return Err(EpiError::Panel(
            "temperature and precipitation dates differ".into(),
        ));
    }
    write_lines(
        path,
        WEATHER_HEADER,
        temp.iter()
            .zip(rain)
            .map(|((d, t), (_, p))| format!("{d},{t},{p}")),
    )
}

pub fn write_population<T: Real>(path: &Path, rows: &[(String, NaiveDate, T)]) -> Result<()> {
    write_lines(
        path,
        POPULATION_HEADER,
        rows.iter().map(|(u, d, p)| format!("{u},{d},{p}")),
    )
}
