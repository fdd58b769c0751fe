//! Geospatial primitives at city scale.
//!
//! Distances use an equirectangular approximation with a fixed feet-per-degree
//! constant; polygons are tested by ray casting in the (lon, lat) plane.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Feet spanned by one degree of latitude.
pub const FEET_PER_DEGREE_LAT: f64 = 364_567.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub const fn new(lat: f64, lon: f64) -> Self {
        LatLon { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
    }

    /// Point displaced by the given offsets in feet (north, east).
    pub fn offset_feet(&self, north_ft: f64, east_ft: f64) -> LatLon {
        let dlat = north_ft / FEET_PER_DEGREE_LAT;
        let mid = (self.lat + dlat / 2.0).to_radians();
        let dlon = east_ft / (FEET_PER_DEGREE_LAT * libm::cos(mid));
        LatLon::new(self.lat + dlat, self.lon + dlon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl BoundingBox {
    /// Baltimore city box: 39.197–39.372°N, 76.529–76.712°W.
    pub const BALTIMORE: BoundingBox = BoundingBox {
        lat_min: 39.197,
        lat_max: 39.372,
        lon_min: -76.712,
        lon_max: -76.529,
    };

    pub fn new(lat_min: f64, lat_max: f64, lon_min: f64, lon_max: f64) -> Option<Self> {
        let b = BoundingBox { lat_min, lat_max, lon_min, lon_max };
        b.is_valid().then_some(b)
    }

    pub fn is_valid(&self) -> bool {
        self.lat_min < self.lat_max && self.lon_min < self.lon_max
    }

    /// Closed containment test.
    pub fn contains(&self, p: LatLon) -> bool {
        p.lat >= self.lat_min && p.lat <= self.lat_max && p.lon >= self.lon_min && p.lon <= self.lon_max
    }

    pub fn center(&self) -> LatLon {
        LatLon::new((self.lat_min + self.lat_max) / 2.0, (self.lon_min + self.lon_max) / 2.0)
    }

    /// Smallest box around `points`, grown by `margin_deg` on every side.
    pub fn hull<'a, I>(points: I, margin_deg: f64) -> Option<Self>
    where
        I: IntoIterator<Item = &'a LatLon>,
    {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut b = BoundingBox {
            lat_min: first.lat,
            lat_max: first.lat,
            lon_min: first.lon,
            lon_max: first.lon,
        };
        for p in it {
            b.lat_min = b.lat_min.min(p.lat);
            b.lat_max = b.lat_max.max(p.lat);
            b.lon_min = b.lon_min.min(p.lon);
            b.lon_max = b.lon_max.max(p.lon);
        }
        b.lat_min -= margin_deg;
        b.lat_max += margin_deg;
        b.lon_min -= margin_deg;
        b.lon_max += margin_deg;
        b.is_valid().then_some(b)
    }
}

/// Polygon with an exterior ring and optional holes. Rings may be given in
/// closed form (first vertex repeated at the end).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub exterior: Vec<LatLon>,
    pub holes: Vec<Vec<LatLon>>,
}

impl Polygon {
    pub fn new(exterior: Vec<LatLon>) -> Self {
        Polygon { exterior, holes: Vec::new() }
    }

    pub fn with_holes(exterior: Vec<LatLon>, holes: Vec<Vec<LatLon>>) -> Self {
        Polygon { exterior, holes }
    }

    /// Axis-aligned rectangle from two opposite corners.
    pub fn rectangle(a: LatLon, b: LatLon) -> Self {
        let (lat0, lat1) = (a.lat.min(b.lat), a.lat.max(b.lat));
        let (lon0, lon1) = (a.lon.min(b.lon), a.lon.max(b.lon));
        Polygon::new(alloc::vec![
            LatLon::new(lat0, lon0),
            LatLon::new(lat0, lon1),
            LatLon::new(lat1, lon1),
            LatLon::new(lat1, lon0),
        ])
    }

    pub fn is_valid(&self) -> bool {
        ring_len(&self.exterior) >= 3 && self.holes.iter().all(|h| ring_len(h) >= 3)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &LatLon> {
        self.exterior.iter()
    }
}

fn ring_len(ring: &[LatLon]) -> usize {
    match (ring.first(), ring.last()) {
        (Some(a), Some(b)) if ring.len() > 1 && a == b => ring.len() - 1,
        _ => ring.len(),
    }
}

/// Twice the signed area of a ring in degree units.
fn ring_area2(ring: &[LatLon]) -> f64 {
    let n = ring.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        acc += a.lon * b.lat - b.lon * a.lat;
    }
    acc
}

/// Even-odd crossing test with the half-open vertex rule.
fn ring_contains(ring: &[LatLon], p: LatLon) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    let (x, y) = (p.lon, p.lat);
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (ring[i].lon, ring[i].lat);
        let (xj, yj) = (ring[j].lon, ring[j].lat);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Equirectangular distance in feet.
pub fn distance_feet(a: LatLon, b: LatLon) -> f64 {
    let mean_lat = ((a.lat + b.lat) / 2.0).to_radians();
    let dy = (a.lat - b.lat) * FEET_PER_DEGREE_LAT;
    let dx = (a.lon - b.lon) * libm::cos(mean_lat) * FEET_PER_DEGREE_LAT;
    libm::sqrt(dx * dx + dy * dy)
}

/// Ray-casting containment. Points inside a hole are outside; a zero-area
/// exterior contains nothing.
pub fn point_in_polygon(p: LatLon, poly: &Polygon) -> bool {
    if ring_len(&poly.exterior) < 3 || ring_area2(&poly.exterior) == 0.0 {
        return false;
    }
    if !ring_contains(&poly.exterior, p) {
        return false;
    }
    !poly.holes.iter().any(|h| ring_area2(h) != 0.0 && ring_contains(h, p))
}

/// Uniform grid over local feet coordinates. Cell `(ix, iy)` holds the ids of
/// the points whose local coordinates floor-divide to it.
#[derive(Debug, Clone)]
pub struct GridIndex {
    cell_ft: f64,
    origin: LatLon,
    cos_origin: f64,
    cells: BTreeMap<(i64, i64), Vec<usize>>,
    points: Vec<LatLon>,
}

impl GridIndex {
    /// Build an index. Points outside `frame` are still indexed; the frame
    /// only fixes the origin.
    ///
    /// Panics if `cell_ft` is not strictly positive.
    pub fn build(points: &[LatLon], cell_ft: f64, frame: &BoundingBox) -> Self {
        assert!(cell_ft > 0.0 && cell_ft.is_finite(), "grid cell size must be positive");
        let origin = LatLon::new(frame.lat_min, frame.lon_min);
        let cos_origin = libm::cos(frame.center().lat.to_radians()).max(1e-9);
        let mut index = GridIndex {
            cell_ft,
            origin,
            cos_origin,
            cells: BTreeMap::new(),
            points: points.to_vec(),
        };
        for (id, p) in points.iter().enumerate() {
            let key = index.cell_of(*p);
            index.cells.entry(key).or_default().push(id);
        }
        index
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_ft
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatLon] {
        &self.points
    }

    pub fn occupied_cells(&self) -> usize {
        self.cells.len()
    }

    fn local_feet(&self, p: LatLon) -> (f64, f64) {
        let x = (p.lon - self.origin.lon) * self.cos_origin * FEET_PER_DEGREE_LAT;
        let y = (p.lat - self.origin.lat) * FEET_PER_DEGREE_LAT;
        (x, y)
    }

    pub fn cell_of(&self, p: LatLon) -> (i64, i64) {
        let (x, y) = self.local_feet(p);
        (
            libm::floor(x / self.cell_ft) as i64,
            libm::floor(y / self.cell_ft) as i64,
        )
    }

    /// Ids of every indexed point within `radius_ft` (closed ball).
    pub fn radius_query(&self, center: LatLon, radius_ft: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(center, radius_ft, |id| out.push(id));
        out
    }

    /// Number of indexed points within `radius_ft` (closed ball).
    pub fn count_within(&self, center: LatLon, radius_ft: f64) -> usize {
        let mut n = 0;
        self.for_each_within(center, radius_ft, |_| n += 1);
        n
    }

    fn for_each_within<F: FnMut(usize)>(&self, center: LatLon, radius_ft: f64, mut f: F) {
        if self.points.is_empty() || radius_ft.is_nan() || radius_ft < 0.0 {
            return;
        }
        // The exact metric uses cos(mean latitude), so widen the longitude
        // window by the smallest cosine reachable within the latitude band.
        let dlat = radius_ft / FEET_PER_DEGREE_LAT;
        let max_abs_mid = (center.lat.abs() + dlat / 2.0).min(90.0);
        let cos_min = libm::cos(max_abs_mid.to_radians()).max(1e-12);
        let dlon = radius_ft / (FEET_PER_DEGREE_LAT * cos_min);
        let lo = self.cell_of(LatLon::new(center.lat - dlat, center.lon - dlon));
        let hi = self.cell_of(LatLon::new(center.lat + dlat, center.lon + dlon));

        let span_x = (hi.0 as i128 - lo.0 as i128 + 1).max(0);
        let span_y = (hi.1 as i128 - lo.1 as i128 + 1).max(0);
        let mut visit = |ids: &Vec<usize>| {
            for &id in ids {
                if distance_feet(center, self.points[id]) <= radius_ft {
                    f(id);
                }
            }
        };
        if span_x * span_y > self.cells.len() as i128 {
            for (&(ix, iy), ids) in &self.cells {
                if ix >= lo.0 && ix <= hi.0 && iy >= lo.1 && iy <= hi.1 {
                    visit(ids);
                }
            }
        } else {
            for ix in lo.0..=hi.0 {
                for iy in lo.1..=hi.1 {
                    if let Some(ids) = self.cells.get(&(ix, iy)) {
                        visit(ids);
                    }
                }
            }
        }
    }
}
