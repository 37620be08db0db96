//! CSV formats: building traces, district signals and forecast archives.

use std::collections::BTreeMap;
use std::path::Path;

use commitlab_core::battery::{BatterySpec, Building, EnvironmentSeries};
use commitlab_core::forecast::{archive_from_records, archive_records, ArchiveRecord};
use commitlab_core::series::{ForecastArchive, ForecastKind, TimeSeries};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

/// Header of the building CSV.
pub const ENV_HEADER: &str = "hour,building,load_kwh,pv_kwh";
/// Header of the district CSV.
pub const DISTRICT_HEADER: &str = "hour,price,carbon";
/// Header of the forecast-archive CSV.
pub const ARCHIVE_HEADER: &str = "origin,target,scenario,value";

#[derive(Debug, Serialize, Deserialize)]
struct EnvRow {
    hour: i64,
    building: usize,
    load_kwh: f64,
    pv_kwh: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DistrictRow {
    hour: i64,
    price: f64,
    carbon: f64,
}

fn reader(path: &Path, header: &str) -> Result<csv::Reader<std::fs::File>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    let found = rdr.headers().map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found.join(",") != header {
        return Err(AppError::Data(format!("{}: header must be `{header}`, found `{}`", path.display(), found.join(","))));
    }
    Ok(rdr)
}

fn rows<T: for<'de> Deserialize<'de>>(path: &Path, header: &str) -> Result<Vec<T>> {
    let mut rdr = reader(path, header)?;
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| AppError::Data(format!("{}: row {}: {e}", path.display(), i + 1))))
        .collect()
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))
}

fn contiguous(path: &Path, what: &str, hours: &[i64]) -> Result<i64> {
    let start = hours[0];
    for (k, h) in hours.iter().enumerate() {
        if *h != start + k as i64 {
            return Err(AppError::Data(format!("{}: {what} hours must be consecutive, found {h} after {}", path.display(), start + k as i64 - 1)));
        }
    }
    Ok(start)
}

/// Reads the building and district CSVs; every building gets `battery`.
pub fn read_env(env_csv: &Path, district_csv: &Path, battery: BatterySpec) -> Result<EnvironmentSeries> {
    let env_rows: Vec<EnvRow> = rows(env_csv, ENV_HEADER)?;
    let mut per: BTreeMap<usize, Vec<(i64, f64, f64)>> = BTreeMap::new();
    for r in env_rows {
        per.entry(r.building).or_default().push((r.hour, r.load_kwh, r.pv_kwh));
    }
    if per.is_empty() {
        return Err(AppError::Data(format!("{}: no data rows", env_csv.display())));
    }
    let mut buildings = Vec::with_capacity(per.len());
    for (k, (id, mut v)) in per.into_iter().enumerate() {
        if id != k {
            return Err(AppError::Data(format!("{}: building ids must be 0..n, missing {k}", env_csv.display())));
        }
        v.sort_by_key(|r| r.0);
        let hours: Vec<i64> = v.iter().map(|r| r.0).collect();
        let start = contiguous(env_csv, &format!("building {id}"), &hours)?;
        buildings.push(Building {
            load: TimeSeries::new(start, v.iter().map(|r| r.1).collect())?,
            pv: TimeSeries::new(start, v.iter().map(|r| r.2).collect())?,
            battery,
        });
    }
    let mut district: Vec<DistrictRow> = rows(district_csv, DISTRICT_HEADER)?;
    if district.is_empty() {
        return Err(AppError::Data(format!("{}: no data rows", district_csv.display())));
    }
    district.sort_by_key(|r| r.hour);
    let hours: Vec<i64> = district.iter().map(|r| r.hour).collect();
    let start = contiguous(district_csv, "district", &hours)?;
    let price = TimeSeries::new(start, district.iter().map(|r| r.price).collect())?;
    let carbon = TimeSeries::new(start, district.iter().map(|r| r.carbon).collect())?;
    Ok(EnvironmentSeries::new(buildings, price, carbon)?)
}

/// Writes the building CSV (hour-major, then building).
pub fn write_env_csv(path: &Path, env: &EnvironmentSeries) -> Result<()> {
    let mut w = writer(path)?;
    for t in env.start()..env.end() {
        for (b, bld) in env.buildings.iter().enumerate() {
            w.serialize(EnvRow { hour: t, building: b, load_kwh: bld.load.at(t)?, pv_kwh: bld.pv.at(t)? })?;
        }
    }
    w.flush().map_err(AppError::io(path))
}

/// Writes the district CSV.
pub fn write_district_csv(path: &Path, env: &EnvironmentSeries) -> Result<()> {
    let mut w = writer(path)?;
    for t in env.start()..env.end() {
        w.serialize(DistrictRow { hour: t, price: env.price.at(t)?, carbon: env.carbon.at(t)? })?;
    }
    w.flush().map_err(AppError::io(path))
}

/// Reads and validates a forecast-archive CSV.
pub fn import_archive(path: &Path, kind: ForecastKind) -> Result<ForecastArchive> {
    let records: Vec<ArchiveRecord> = rows(path, ARCHIVE_HEADER)?;
    archive_from_records(&records, kind).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))
}

/// Writes a forecast archive sorted by `(origin, scenario, target)`.
pub fn write_archive(path: &Path, archive: &ForecastArchive) -> Result<()> {
    let mut w = writer(path)?;
    for r in archive_records(archive) {
        w.serialize(r)?;
    }
    w.flush().map_err(AppError::io(path))
}
