//! Reading crime CSVs, boundary GeoJSON and demographic CSVs, and turning a
//! dataset binding into month slices ready for simulation.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDateTime, Timelike};
use log::{info, warn};
use patrolsim_core::geodata::{BoundingBox, LatLon, Polygon};
use patrolsim_core::incident::{assign_neighborhoods, filter_valid, partition_by_month, City, CrimeIncident, DateTime, MonthSlice, Neighborhood};
use patrolsim_core::synthetic::{SyntheticCity, SyntheticCitySpec};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{ColumnOverrides, DataSource, DatasetSpec, FileSource, LoadedPlan, SyntheticLayout, SyntheticSource};
use crate::error::{CliError, Result};

/// Crime CSV column names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub id: Option<String>,
    pub datetime: String,
    pub latitude: String,
    pub longitude: String,
    pub crime_type: Option<String>,
}

impl ColumnMap {
    pub const PRESETS: [&'static str; 3] = ["baltimore-part1", "chicago-portal", "generic"];

    pub fn preset(name: &str) -> Option<ColumnMap> {
        let map = |id: &str, dt: &str, lat: &str, lon: &str, ty: &str| ColumnMap {
            id: Some(id.into()),
            datetime: dt.into(),
            latitude: lat.into(),
            longitude: lon.into(),
            crime_type: Some(ty.into()),
        };
        match name {
            "baltimore-part1" => Some(map("RowID", "CrimeDateTime", "Latitude", "Longitude", "Description")),
            "chicago-portal" => Some(map("ID", "Date", "Latitude", "Longitude", "Primary Type")),
            "generic" => Some(map("id", "datetime", "latitude", "longitude", "crime_type")),
            _ => None,
        }
    }

    pub fn default_for(city: City) -> ColumnMap {
        match city {
            City::Baltimore => Self::preset("baltimore-part1"),
            City::Chicago => Self::preset("chicago-portal"),
        }
        .expect("built-in preset")
    }

    pub fn with_overrides(mut self, o: &ColumnOverrides) -> ColumnMap {
        if let Some(v) = &o.id {
            self.id = Some(v.clone());
        }
        if let Some(v) = &o.datetime {
            self.datetime = v.clone();
        }
        if let Some(v) = &o.latitude {
            self.latitude = v.clone();
        }
        if let Some(v) = &o.longitude {
            self.longitude = v.clone();
        }
        if let Some(v) = &o.crime_type {
            self.crime_type = Some(v.clone());
        }
        self
    }
}

const DATE_FORMATS: [&str; 8] = [
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
    "%Y-%m-%dT%H:%M:%S",
    "%Y/%m/%d %H:%M:%S",
    "%m/%d/%Y %H:%M:%S",
    "%m/%d/%Y %H:%M",
    "%m/%d/%Y %I:%M:%S %p",
    "%m/%d/%Y %I:%M %p",
];

/// Parse the accepted timestamp layouts. A trailing UTC offset such as
/// `+00` or `Z` is ignored.
pub fn parse_datetime(s: &str) -> Option<DateTime> {
    let s = s.trim();
    let stripped = s.trim_end_matches('Z');
    let stripped = match stripped.rfind(['+']) {
        Some(i) if i > 10 => &stripped[..i],
        _ => stripped,
    };
    let dt = DATE_FORMATS.iter().find_map(|f| NaiveDateTime::parse_from_str(stripped, f).ok())?;
    DateTime::new(dt.year(), dt.month() as u8, dt.day() as u8, dt.hour() as u8, dt.minute() as u8, dt.second() as u8)
}

/// Row counts from reading one crime file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CrimeReadStats {
    pub rows: usize,
    pub unparseable: usize,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| CliError::data(format!("cannot open {}: {e}", path.display())))
}

pub fn read_crimes<R: Read>(reader: R, city: City, columns: &ColumnMap) -> Result<(Vec<CrimeIncident>, CrimeReadStats)> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| CliError::data(format!("crime csv header: {e}")))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| find(name).ok_or_else(|| CliError::data(format!("crime csv lacks column {name:?}")));
    let (dt_col, lat_col, lon_col) = (need(&columns.datetime)?, need(&columns.latitude)?, need(&columns.longitude)?);
    let id_col = columns.id.as_deref().and_then(find);
    let type_col = columns.crime_type.as_deref().and_then(find);

    let mut out = Vec::new();
    let mut stats = CrimeReadStats::default();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::data(format!("crime csv row {}: {e}", i + 2)))?;
        stats.rows += 1;
        let field = |c: usize| record.get(c).unwrap_or("");
        let lat = field(lat_col).parse::<f64>().ok();
        let lon = field(lon_col).parse::<f64>().ok();
        let ts = parse_datetime(field(dt_col));
        let (Some(lat), Some(lon), Some(timestamp)) = (lat, lon, ts) else {
            stats.unparseable += 1;
            continue;
        };
        let id = id_col.map(field).filter(|s| !s.is_empty()).map_or_else(|| format!("row{}", i + 2), str::to_string);
        out.push(CrimeIncident {
            id,
            location: LatLon::new(lat, lon),
            timestamp,
            city,
            crime_type: type_col.map(field).unwrap_or("").to_string(),
            neighborhood_id: None,
        });
    }
    Ok((out, stats))
}

/// Boundary feature before demographics are attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub id: String,
    pub name: String,
    pub parts: Vec<Polygon>,
}

fn ring(v: &Value) -> Option<Vec<LatLon>> {
    v.as_array()?
        .iter()
        .map(|p| {
            let p = p.as_array()?;
            Some(LatLon::new(p.get(1)?.as_f64()?, p.first()?.as_f64()?))
        })
        .collect()
}

fn polygon(v: &Value) -> Option<Polygon> {
    let rings: Vec<Vec<LatLon>> = v.as_array()?.iter().map(ring).collect::<Option<_>>()?;
    let mut it = rings.into_iter();
    let exterior = it.next()?;
    Some(Polygon::with_holes(exterior, it.collect()))
}

fn property_string(props: &Value, key: &str) -> Option<String> {
    match props.get(key)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Parse a GeoJSON FeatureCollection of Polygon/MultiPolygon features.
pub fn parse_boundaries(text: &str, id_property: &str, name_property: Option<&str>) -> Result<Vec<Boundary>> {
    let doc: Value = serde_json::from_str(text).map_err(|e| CliError::data(format!("geojson: {e}")))?;
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::data("geojson: expected a FeatureCollection"))?;
    let mut out = Vec::with_capacity(features.len());
    for (i, f) in features.iter().enumerate() {
        let props = f.get("properties").cloned().unwrap_or(Value::Null);
        let id = property_string(&props, id_property)
            .ok_or_else(|| CliError::data(format!("geojson feature {i}: missing id property {id_property:?}")))?;
        let name = name_property.and_then(|k| property_string(&props, k)).unwrap_or_else(|| id.clone());
        let geom = f.get("geometry").ok_or_else(|| CliError::data(format!("geojson feature {id}: no geometry")))?;
        let coords = geom.get("coordinates").unwrap_or(&Value::Null);
        let parts = match geom.get("type").and_then(Value::as_str) {
            Some("Polygon") => polygon(coords).map(|p| vec![p]),
            Some("MultiPolygon") => coords.as_array().and_then(|ps| ps.iter().map(polygon).collect()),
            other => return Err(CliError::data(format!("geojson feature {id}: unsupported geometry {other:?}"))),
        }
        .ok_or_else(|| CliError::data(format!("geojson feature {id}: malformed coordinates")))?;
        out.push(Boundary { id, name, parts });
    }
    Ok(out)
}

/// Census covariates of one neighborhood, as fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demographics {
    pub pct_black: f64,
    pub pct_white: f64,
    pub pct_neither: f64,
    pub median_income: f64,
    pub poverty_rate: f64,
}

/// Tolerance within which group shares are renormalized instead of rejected.
const SHARE_SLACK: f64 = 0.02;

fn percent_scale(mut values: impl Iterator<Item = f64>) -> f64 {
    if values.any(|v| v > 1.5) {
        0.01
    } else {
        1.0
    }
}

pub fn read_demographics<R: Read>(reader: R) -> Result<BTreeMap<String, Demographics>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| CliError::data(format!("demographics header: {e}")))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| CliError::data(format!("demographics csv lacks column {name:?}")));
    let (id_c, b_c, w_c, inc_c, pov_c) = (need("id")?, need("pct_black")?, need("pct_white")?, need("median_income")?, need("poverty_rate")?);
    let n_c = col("pct_neither");

    let mut rows: Vec<(String, [f64; 3], Option<f64>, f64)> = Vec::new();
    for (i, r) in rdr.records().enumerate() {
        let r = r.map_err(|e| CliError::data(format!("demographics row {}: {e}", i + 2)))?;
        let num = |c: usize| -> Result<f64> {
            let s = r.get(c).unwrap_or("");
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| CliError::data(format!("demographics row {}: bad number {s:?} in {:?}", i + 2, &headers[c])))
        };
        let neither = n_c.map(num).transpose()?;
        rows.push((r.get(id_c).unwrap_or("").to_string(), [num(b_c)?, num(w_c)?, num(pov_c)?], neither, num(inc_c)?));
    }
    // a share column is on a 0-100 scale if any of its values exceeds 1.5
    let sb = percent_scale(rows.iter().map(|r| r.1[0]));
    let sw = percent_scale(rows.iter().map(|r| r.1[1]));
    let sp = percent_scale(rows.iter().map(|r| r.1[2]));
    let sn = percent_scale(rows.iter().filter_map(|r| r.2));

    let mut out = BTreeMap::new();
    for (id, [b, w, pov], neither, income) in rows {
        let (b, w) = (b * sb, w * sw);
        let n = neither.map_or((1.0 - b - w).max(0.0), |n| n * sn);
        let total = b + w + n;
        if (total - 1.0).abs() > SHARE_SLACK {
            return Err(CliError::data(format!("demographics {id}: group shares sum to {total}")));
        }
        let d = Demographics { pct_black: b / total, pct_white: w / total, pct_neither: n / total, median_income: income, poverty_rate: pov * sp };
        if d.poverty_rate > 1.0 {
            return Err(CliError::data(format!("demographics {id}: poverty rate {} above 1", d.poverty_rate)));
        }
        if out.insert(id.clone(), d).is_some() {
            return Err(CliError::data(format!("demographics: duplicate id {id}")));
        }
    }
    Ok(out)
}

/// Attach demographics to boundaries in boundary order. Boundaries without
/// a demographic row are skipped and returned by id.
pub fn join_neighborhoods(boundaries: Vec<Boundary>, demographics: &BTreeMap<String, Demographics>) -> (Vec<Neighborhood>, Vec<String>) {
    let mut out = Vec::new();
    let mut missing = Vec::new();
    for b in boundaries {
        match demographics.get(&b.id) {
            Some(d) => out.push(Neighborhood {
                id: b.id,
                name: b.name,
                boundary: b.parts,
                pct_black: d.pct_black,
                pct_white: d.pct_white,
                pct_neither: d.pct_neither,
                median_income: d.median_income,
                poverty_rate: d.poverty_rate,
            }),
            None => missing.push(b.id),
        }
    }
    (out, missing)
}

/// Where a dataset's inputs came from, for the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceRecord {
    pub source: String,
    pub sha256: String,
}

/// Counts from ingesting one dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestSummary {
    pub rows: usize,
    pub unparseable: usize,
    pub other_year: usize,
    /// Outside the bounding box or in the January holdout.
    pub filtered: usize,
    pub unassigned: usize,
    pub kept: usize,
    pub neighborhoods: usize,
    pub neighborhoods_without_demographics: Vec<String>,
}

/// A dataset ready for simulation.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub city: City,
    pub year: i32,
    pub bbox: BoundingBox,
    pub neighborhoods: Vec<Neighborhood>,
    pub slices: Vec<MonthSlice>,
    pub summary: IngestSummary,
    pub sources: Vec<SourceRecord>,
}

impl Dataset {
    pub fn month(&self, month: u8) -> Option<&MonthSlice> {
        self.slices.iter().find(|s| s.month == month)
    }

    /// Incidents of the given months, in month order.
    pub fn incidents(&self, months: &[u8]) -> Vec<CrimeIncident> {
        self.slices.iter().filter(|s| months.contains(&s.month)).flat_map(|s| s.incidents.iter().cloned()).collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    BufReader::new(open(path)?)
        .read_to_end(&mut buf)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    Ok(buf)
}

/// Build the synthetic city a source describes.
pub fn synthetic_city(city: City, year: i32, s: &SyntheticSource) -> SyntheticCity {
    let mut spec = match s.layout {
        SyntheticLayout::Demo => SyntheticCitySpec::demo(city, year, s.seed),
        SyntheticLayout::TwoCluster => SyntheticCitySpec::two_cluster(city, year, s.white_share, s.seed),
    };
    spec.incidents_per_month = s.incidents_per_month;
    spec.generate()
}

fn finish(
    spec: &DatasetSpec,
    incidents: Vec<CrimeIncident>,
    neighborhoods: Vec<Neighborhood>,
    default_bbox: BoundingBox,
    mut summary: IngestSummary,
    sources: Vec<SourceRecord>,
) -> Result<Dataset> {
    let bbox = spec.bbox.unwrap_or(default_bbox);
    let before = incidents.len();
    let in_year: Vec<CrimeIncident> = incidents.into_iter().filter(|c| c.timestamp.year == spec.year).collect();
    summary.other_year = before - in_year.len();
    let valid = filter_valid(&in_year, &bbox);
    summary.filtered = in_year.len() - valid.len();
    let assigned = assign_neighborhoods(valid, &neighborhoods);
    summary.unassigned = assigned.dropped;
    summary.kept = assigned.incidents.len();
    summary.neighborhoods = neighborhoods.len();
    if summary.kept == 0 {
        return Err(CliError::data(format!("{} {}: no incidents survive filtering", spec.city, spec.year)));
    }
    Ok(Dataset {
        city: spec.city,
        year: spec.year,
        bbox,
        neighborhoods,
        slices: partition_by_month(assigned.incidents),
        summary,
        sources,
    })
}

fn load_files(spec: &DatasetSpec, f: &FileSource, plan: &LoadedPlan) -> Result<Dataset> {
    let paths: [PathBuf; 3] = [plan.resolve(&f.crimes), plan.resolve(&f.boundaries), plan.resolve(&f.demographics)];
    let bytes = paths.iter().map(|p| read_bytes(p)).collect::<Result<Vec<_>>>()?;
    let sources = paths
        .iter()
        .zip(&bytes)
        .map(|(p, b)| SourceRecord { source: p.display().to_string(), sha256: sha256_hex(b) })
        .collect();

    let columns = match &f.preset {
        Some(name) => ColumnMap::preset(name).ok_or_else(|| CliError::config(format!("unknown column preset {name:?}")))?,
        None => ColumnMap::default_for(spec.city),
    }
    .with_overrides(&f.columns);
    let (incidents, stats) = read_crimes(bytes[0].as_slice(), spec.city, &columns)?;
    let text = std::str::from_utf8(&bytes[1]).map_err(|e| CliError::data(format!("{}: {e}", paths[1].display())))?;
    let boundaries = parse_boundaries(text, &f.id_property, f.name_property.as_deref())?;
    let demographics = read_demographics(bytes[2].as_slice())?;
    let (neighborhoods, missing) = join_neighborhoods(boundaries, &demographics);
    if !missing.is_empty() {
        warn!("{} {}: {} boundaries have no demographics and are skipped", spec.city, spec.year, missing.len());
    }
    if neighborhoods.is_empty() {
        return Err(CliError::data(format!("{} {}: no neighborhood has both a boundary and demographics", spec.city, spec.year)));
    }
    let default_bbox = match spec.city {
        City::Baltimore => BoundingBox::BALTIMORE,
        City::Chicago => hull(&neighborhoods)?,
    };
    let summary = IngestSummary { rows: stats.rows, unparseable: stats.unparseable, neighborhoods_without_demographics: missing, ..Default::default() };
    finish(spec, incidents, neighborhoods, default_bbox, summary, sources)
}

fn hull(neighborhoods: &[Neighborhood]) -> Result<BoundingBox> {
    BoundingBox::hull(neighborhoods.iter().flat_map(|n| n.boundary.iter().flat_map(|p| p.exterior.iter())), 0.01)
        .ok_or_else(|| CliError::data("neighborhood polygons span no area"))
}

/// Load and prepare one dataset binding.
pub fn load_dataset(spec: &DatasetSpec, plan: &LoadedPlan) -> Result<Dataset> {
    let ds = match &spec.source {
        DataSource::Files(f) => load_files(spec, f, plan)?,
        DataSource::Synthetic(s) => {
            let city = synthetic_city(spec.city, spec.year, s);
            let descriptor = serde_json::to_vec(s).expect("serializable source");
            let sources = vec![SourceRecord { source: format!("synthetic:{}", String::from_utf8_lossy(&descriptor)), sha256: sha256_hex(&descriptor) }];
            let summary = IngestSummary { rows: city.incidents.len(), ..Default::default() };
            finish(spec, city.incidents, city.neighborhoods, city.bbox, summary, sources)?
        }
    };
    info!("{} {}: kept {} of {} incidents in {} months", ds.city, ds.year, ds.summary.kept, ds.summary.rows, ds.slices.len());
    Ok(ds)
}

/// Write a synthetic city as the three input files, using the `generic`
/// column preset.
pub fn write_synthetic_files(city: &SyntheticCity, dir: &Path) -> Result<[PathBuf; 3]> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let crimes = dir.join("crimes.csv");
    let mut w = csv::Writer::from_path(&crimes).map_err(|e| CliError::Run(format!("{}: {e}", crimes.display())))?;
    let werr = |e: csv::Error| CliError::Run(e.to_string());
    w.write_record(["id", "datetime", "latitude", "longitude", "crime_type"]).map_err(werr)?;
    for c in &city.incidents {
        w.write_record([c.id.clone(), c.timestamp.to_string(), c.location.lat.to_string(), c.location.lon.to_string(), c.crime_type.clone()])
            .map_err(werr)?;
    }
    w.flush().map_err(|e| CliError::io(&crimes, e))?;

    let ring = |r: &[LatLon]| -> Value {
        let mut pts: Vec<Value> = r.iter().map(|p| json!([p.lon, p.lat])).collect();
        if let Some(first) = pts.first().cloned() {
            pts.push(first);
        }
        Value::Array(pts)
    };
    let features: Vec<Value> = city
        .neighborhoods
        .iter()
        .map(|n| {
            let polys: Vec<Value> = n.boundary.iter().map(|p| Value::Array(std::iter::once(&p.exterior).chain(&p.holes).map(|r| ring(r)).collect())).collect();
            json!({
                "type": "Feature",
                "properties": {"id": n.id, "name": n.name},
                "geometry": {"type": "MultiPolygon", "coordinates": polys},
            })
        })
        .collect();
    let boundaries = dir.join("boundaries.geojson");
    let doc = json!({"type": "FeatureCollection", "features": features});
    std::fs::write(&boundaries, serde_json::to_string_pretty(&doc).expect("json")).map_err(|e| CliError::io(&boundaries, e))?;

    let demographics = dir.join("demographics.csv");
    let mut w = csv::Writer::from_path(&demographics).map_err(|e| CliError::Run(format!("{}: {e}", demographics.display())))?;
    w.write_record(["id", "pct_black", "pct_white", "pct_neither", "median_income", "poverty_rate"]).map_err(werr)?;
    for n in &city.neighborhoods {
        w.write_record([
            n.id.clone(),
            n.pct_black.to_string(),
            n.pct_white.to_string(),
            n.pct_neither.to_string(),
            n.median_income.to_string(),
            n.poverty_rate.to_string(),
        ])
        .map_err(werr)?;
    }
    w.flush().map_err(|e| CliError::io(&demographics, e))?;
    Ok([crimes, boundaries, demographics])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn date_formats() {
        let want = DateTime::new(2019, 3, 4, 17, 5, 0).unwrap();
        for s in ["2019-03-04 17:05", "2019-03-04 17:05:00", "03/04/2019 17:05", "03/04/2019 05:05:00 PM", "2019/03/04 17:05:00+00", "2019-03-04T17:05:00Z"] {
            assert_eq!(parse_datetime(s), Some(want), "{s}");
        }
        assert_eq!(parse_datetime("yesterday"), None);
        assert_eq!(parse_datetime("2019-02-30 10:00"), None);
    }

    #[test]
    fn crime_rows_with_missing_fields_are_counted() {
        let csv = "RowID,CrimeDateTime,Latitude,Longitude,Description\n1,2019-03-04 17:05,39.3,-76.6,ROBBERY\n2,2019-03-04 17:05,,,LARCENY\n";
        let (rows, stats) = read_crimes(csv.as_bytes(), City::Baltimore, &ColumnMap::default_for(City::Baltimore)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(stats, CrimeReadStats { rows: 2, unparseable: 1 });
        assert_eq!(rows[0].crime_type, "ROBBERY");
        let missing = "Date,Latitude\n";
        assert!(read_crimes(missing.as_bytes(), City::Chicago, &ColumnMap::default_for(City::Chicago)).is_err());
    }

    #[test]
    fn percent_scale_is_detected_per_column() {
        let csv = "id,pct_black,pct_white,median_income,poverty_rate\na,60,30,40000,0.2\nb,20,75,90000,0.05\n";
        let d = read_demographics(csv.as_bytes()).unwrap();
        assert!((d["a"].pct_black - 0.6).abs() < 1e-12);
        assert!((d["a"].pct_neither - 0.1).abs() < 1e-12);
        assert!((d["b"].poverty_rate - 0.05).abs() < 1e-12);
        let bad = "id,pct_black,pct_white,pct_neither,median_income,poverty_rate\na,0.5,0.5,0.5,1,0.1\n";
        assert!(read_demographics(bad.as_bytes()).is_err());
    }

    #[test]
    fn geojson_polygons_and_multipolygons() {
        let text = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"id":7,"label":"Seven"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}},
            {"type":"Feature","properties":{"id":"x"},"geometry":{"type":"MultiPolygon","coordinates":[[[[2,2],[3,2],[3,3],[2,2]]],[[[5,5],[6,5],[6,6],[5,5]]]]}}
        ]}"#;
        let b = parse_boundaries(text, "id", Some("label")).unwrap();
        assert_eq!(b[0].id, "7");
        assert_eq!(b[0].name, "Seven");
        assert_eq!(b[0].parts[0].exterior[1], LatLon::new(0.0, 1.0));
        assert_eq!(b[1].name, "x");
        assert_eq!(b[1].parts.len(), 2);
        assert!(parse_boundaries(r#"{"features":[{"properties":{"id":1},"geometry":{"type":"Point","coordinates":[0,0]}}]}"#, "id", None).is_err());
    }
}
