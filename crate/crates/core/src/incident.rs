//! Crime incidents, neighborhoods and the pure parts of the ingest pipeline:
//! validity filtering, point-in-polygon assignment and month partitioning.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

use crate::geodata::{point_in_polygon, BoundingBox, LatLon, Polygon};

/// January is held out for GAN burn-in; simulation months are 2..=12.
pub const FIRST_SIM_MONTH: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum City {
    Baltimore,
    Chicago,
}

impl City {
    pub fn as_str(&self) -> &'static str {
        match self {
            City::Baltimore => "Baltimore",
            City::Chicago => "Chicago",
        }
    }

    pub fn parse(s: &str) -> Option<City> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baltimore" => Some(City::Baltimore),
            "chicago" => Some(City::Chicago),
            _ => None,
        }
    }
}

impl fmt::Display for City {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Calendar date-time without time zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DateTime {
    pub year: i32,
    pub month: u8,
    pub day: u8,
    pub hour: u8,
    pub minute: u8,
    pub second: u8,
}

impl DateTime {
    pub fn new(year: i32, month: u8, day: u8, hour: u8, minute: u8, second: u8) -> Option<Self> {
        let ok = (1..=12).contains(&month)
            && day >= 1
            && day <= days_in_month(year, month)
            && hour < 24
            && minute < 60
            && second < 60;
        ok.then_some(DateTime { year, month, day, hour, minute, second })
    }
}

impl fmt::Display for DateTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:04}-{:02}-{:02} {:02}:{:02}:{:02}",
            self.year, self.month, self.day, self.hour, self.minute, self.second
        )
    }
}

pub fn days_in_month(year: i32, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 => 29,
        2 => 28,
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrimeIncident {
    pub id: String,
    pub location: LatLon,
    pub timestamp: DateTime,
    pub city: City,
    pub crime_type: String,
    pub neighborhood_id: Option<String>,
}

/// A neighborhood boundary (one or more polygon parts) with its census
/// covariates. Percentages are stored as fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub id: String,
    pub name: String,
    pub boundary: Vec<Polygon>,
    pub pct_black: f64,
    pub pct_white: f64,
    pub pct_neither: f64,
    pub median_income: f64,
    pub poverty_rate: f64,
}

impl Neighborhood {
    pub fn contains(&self, p: LatLon) -> bool {
        self.boundary.iter().any(|poly| point_in_polygon(p, poly))
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        BoundingBox::hull(self.boundary.iter().flat_map(|p| p.exterior.iter()), 0.0)
    }

    /// Group proportions in (Black, White, Neither) order.
    pub fn proportions(&self) -> [f64; 3] {
        [self.pct_black, self.pct_white, self.pct_neither]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthSlice {
    pub city: City,
    pub year: i32,
    pub month: u8,
    pub incidents: Vec<CrimeIncident>,
}

impl MonthSlice {
    pub fn locations(&self) -> Vec<LatLon> {
        self.incidents.iter().map(|c| c.location).collect()
    }

    pub fn len(&self) -> usize {
        self.incidents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.incidents.is_empty()
    }
}

/// Keep incidents inside `bbox` and outside the January holdout.
pub fn filter_valid(incidents: &[CrimeIncident], bbox: &BoundingBox) -> Vec<CrimeIncident> {
    incidents
        .iter()
        .filter(|c| c.location.is_valid() && bbox.contains(c.location) && c.timestamp.month >= FIRST_SIM_MONTH)
        .cloned()
        .collect()
}

/// Result of joining incidents to neighborhoods.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub incidents: Vec<CrimeIncident>,
    pub dropped: usize,
}

/// Set `neighborhood_id` on every incident falling inside some neighborhood.
/// Overlaps resolve to the first neighborhood in input order; incidents in
/// no polygon are dropped and counted.
pub fn assign_neighborhoods(incidents: Vec<CrimeIncident>, neighborhoods: &[Neighborhood]) -> Assignment {
    let boxes: Vec<Option<BoundingBox>> = neighborhoods.iter().map(Neighborhood::bounding_box).collect();
    let mut kept = Vec::with_capacity(incidents.len());
    let mut dropped = 0;
    for mut c in incidents {
        let hit = neighborhoods
            .iter()
            .zip(&boxes)
            .find(|(n, b)| b.is_some_and(|b| b.contains(c.location)) && n.contains(c.location));
        match hit {
            Some((n, _)) => {
                c.neighborhood_id = Some(n.id.clone());
                kept.push(c);
            }
            None => dropped += 1,
        }
    }
    Assignment { incidents: kept, dropped }
}

/// Split incidents into per-month slices ordered by (city, year, month).
/// Empty months are omitted; January incidents are discarded.
pub fn partition_by_month(incidents: Vec<CrimeIncident>) -> Vec<MonthSlice> {
    let mut groups: BTreeMap<(City, i32, u8), Vec<CrimeIncident>> = BTreeMap::new();
    for c in incidents {
        let m = c.timestamp.month;
        if m < FIRST_SIM_MONTH {
            continue;
        }
        groups.entry((c.city, c.timestamp.year, m)).or_default().push(c);
    }
    groups
        .into_iter()
        .map(|((city, year, month), incidents)| MonthSlice { city, year, month, incidents })
        .collect()
}
