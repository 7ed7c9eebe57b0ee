//! Field and location CSV formats.
//!
//! Field files have the header `location_id,lat_deg,lon_deg,t,value` and
//! must cover a complete location × time rectangle. Latitudes are degrees
//! in `[-90, 90]`; longitudes in `[-180, 360)` are accepted and normalized.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::sphere::SpherePoint;

pub const FIELD_HEADER: [&str; 5] = ["location_id", "lat_deg", "lon_deg", "t", "value"];
pub const LOCATION_HEADER: [&str; 2] = ["lat_deg", "lon_deg"];

const MAX_REPORTED_CELLS: usize = 10;

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn open_reader(path: &Path, header: &[&str]) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let found = rdr.headers().map_err(|e| parse_err(path, 1, e.to_string()))?;
    if found.iter().collect::<Vec<_>>() != header {
        return Err(parse_err(
            path,
            1,
            format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(rdr)
}

fn field<T: std::str::FromStr>(path: &Path, line: u64, rec: &csv::StringRecord, k: usize, name: &str) -> Result<T> {
    let raw = rec.get(k).ok_or_else(|| parse_err(path, line, format!("missing column `{name}`")))?;
    raw.parse()
        .map_err(|_| parse_err(path, line, format!("invalid {name} `{raw}`")))
}

fn point_from_degrees(path: &Path, line: u64, lat: f64, lon: f64) -> Result<SpherePoint> {
    if !(-90.0..=90.0).contains(&lat) {
        return Err(parse_err(path, line, format!("latitude {lat} outside [-90, 90]")));
    }
    if !(-180.0..360.0).contains(&lon) {
        return Err(parse_err(path, line, format!("longitude {lon} outside [-180, 360)")));
    }
    SpherePoint::from_degrees(lon, lat).map_err(|e| parse_err(path, line, e.to_string()))
}

/// Reads a field file; rows may come in any order.
pub fn read_field_csv(path: impl AsRef<Path>) -> Result<SampledField> {
    let path = path.as_ref();
    let mut rdr = open_reader(path, &FIELD_HEADER)?;
    let mut coords: BTreeMap<u64, (f64, f64, SpherePoint)> = BTreeMap::new();
    let mut times = BTreeSet::new();
    let mut cells: HashMap<(u64, i64), f64> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != FIELD_HEADER.len() {
            return Err(parse_err(path, line, format!("expected 5 columns, found {}", rec.len())));
        }
        let id: u64 = field(path, line, &rec, 0, "location_id")?;
        let lat: f64 = field(path, line, &rec, 1, "lat_deg")?;
        let lon: f64 = field(path, line, &rec, 2, "lon_deg")?;
        let t: i64 = field(path, line, &rec, 3, "t")?;
        let value: f64 = field(path, line, &rec, 4, "value")?;
        if t < 0 {
            return Err(parse_err(path, line, format!("time index {t} is negative")));
        }
        if !value.is_finite() {
            return Err(parse_err(path, line, format!("non-finite value `{value}`")));
        }
        match coords.get(&id) {
            Some(&(la, lo, _)) if la != lat || lo != lon => {
                return Err(parse_err(
                    path,
                    line,
                    format!("location {id} listed at ({la}, {lo}) and at ({lat}, {lon})"),
                ));
            }
            Some(_) => {}
            None => {
                let p = point_from_degrees(path, line, lat, lon)?;
                coords.insert(id, (lat, lon, p));
            }
        }
        times.insert(t);
        if cells.insert((id, t), value).is_some() {
            return Err(Error::DuplicateCell { location_id: id, t, line });
        }
    }
    if cells.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let mut missing = Vec::new();
    let mut values = Vec::with_capacity(coords.len() * times.len());
    for &id in coords.keys() {
        for &t in &times {
            match cells.get(&(id, t)) {
                Some(v) => values.push(*v),
                None => {
                    if missing.len() < MAX_REPORTED_CELLS {
                        missing.push((id, t));
                    }
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteRectangle { missing });
    }
    SampledField::new(
        coords.keys().copied().collect(),
        coords.values().map(|c| c.2).collect(),
        times.into_iter().collect(),
        values,
    )
}

/// Writes rows ordered by location id, then time, with 17 significant digits.
pub fn write_field_csv(field: &SampledField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if field.n_locations() == 0 || field.n_times() == 0 {
        return Err(Error::Config("refusing to write an empty field".into()));
    }
    let mut order: Vec<usize> = (0..field.n_locations()).collect();
    order.sort_by_key(|&i| field.location_ids()[i]);
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", FIELD_HEADER.join(",")).map_err(io)?;
    for i in order {
        let p = field.locations()[i];
        let id = field.location_ids()[i];
        for (j, t) in field.times().iter().enumerate() {
            writeln!(
                w,
                "{id},{:.16e},{:.16e},{t},{:.16e}",
                p.lat().to_degrees(),
                p.lon().to_degrees(),
                field.value(i, j)
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Reads a `lat_deg,lon_deg` location list.
pub fn read_locations_csv(path: impl AsRef<Path>) -> Result<Vec<SpherePoint>> {
    let path = path.as_ref();
    let mut rdr = open_reader(path, &LOCATION_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let lat: f64 = field(path, line, &rec, 0, "lat_deg")?;
        let lon: f64 = field(path, line, &rec, 1, "lon_deg")?;
        out.push(point_from_degrees(path, line, lat, lon)?);
    }
    Ok(out)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_text(text: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        let mut f = File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn reads_small_rectangle() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(
            &dir,
            "f.csv",
            "location_id,lat_deg,lon_deg,t,value\n7,10,-20,1,0.5\n3,-5,300,0,1.5\n7,10,-20,0,2.5\n3,-5,300,1,3.5\n",
        );
        let f = read_field_csv(&p).unwrap();
        assert_eq!(f.location_ids(), &[3, 7]);
        assert_eq!(f.times(), &[0, 1]);
        assert_eq!(f.values(), &[1.5, 3.5, 2.5, 0.5]);
        assert!((f.locations()[1].lon().to_degrees() - 340.0).abs() < 1e-12);
    }

    #[test]
    fn missing_duplicate_and_parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "m.csv", "location_id,lat_deg,lon_deg,t,value\n1,0,0,0,1\n1,0,0,1,1\n2,1,1,0,1\n");
        match read_field_csv(&p) {
            Err(Error::IncompleteRectangle { missing }) => assert_eq!(missing, vec![(2, 1)]),
            other => panic!("{other:?}"),
        }
        let p = write_tmp(&dir, "d.csv", "location_id,lat_deg,lon_deg,t,value\n1,0,0,0,1\n1,0,0,0,2\n");
        assert!(matches!(read_field_csv(&p), Err(Error::DuplicateCell { line: 3, .. })));
        let p = write_tmp(&dir, "p.csv", "location_id,lat_deg,lon_deg,t,value\n1,0,0,0,1\n1,0,0,x,2\n");
        assert!(matches!(read_field_csv(&p), Err(Error::Parse { line: 3, .. })));
        let p = write_tmp(&dir, "h.csv", "id,lat,lon,t,value\n1,0,0,0,1\n");
        assert!(matches!(read_field_csv(&p), Err(Error::Parse { line: 1, .. })));
        let p = write_tmp(&dir, "l.csv", "location_id,lat_deg,lon_deg,t,value\n1,95,0,0,1\n");
        assert!(matches!(read_field_csv(&p), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_field_csv(dir.path().join("nope.csv")), Err(Error::Io { .. })));
    }

    #[test]
    fn single_cell_writes_one_row() {
        let dir = tempfile::tempdir().unwrap();
        let f = SampledField::from_grid_values(vec![SpherePoint::north_pole()], 1, vec![0.25]).unwrap();
        let p = dir.path().join("one.csv");
        write_field_csv(&f, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        let empty = SampledField::from_grid_values(vec![], 0, vec![]).unwrap();
        assert!(write_field_csv(&empty, dir.path().join("e.csv")).is_err());
    }

    #[test]
    fn locations_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(&dir, "loc.csv", "lat_deg,lon_deg\n0,0\n45,-90\n");
        let pts = read_locations_csv(&p).unwrap();
        assert_eq!(pts.len(), 2);
        assert!((pts[1].lon().to_degrees() - 270.0).abs() < 1e-12);
    }
}
