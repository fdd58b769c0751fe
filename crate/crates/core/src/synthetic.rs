//! Seeded synthetic cities: square neighborhoods with configurable
//! demographics and crime intensity, and Gaussian-clustered incidents inside
//! each square. Used by tests, acceptance checks and the bundled demo plan.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geodata::{BoundingBox, LatLon, Polygon};
use crate::incident::{City, CrimeIncident, DateTime, Neighborhood};
use crate::seed::{derive, rng_from};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSpec {
    pub id: String,
    /// Center offset from the city center, in feet.
    pub north_ft: f64,
    pub east_ft: f64,
    pub half_side_ft: f64,
    /// Spread of incidents around the center.
    pub sigma_ft: f64,
    /// Relative share of the city's incidents.
    pub crime_weight: f64,
    pub pct_black: f64,
    pub pct_white: f64,
    pub pct_neither: f64,
    pub median_income: f64,
    pub poverty_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCitySpec {
    pub city: City,
    pub year: i32,
    pub center: LatLon,
    pub incidents_per_month: usize,
    pub months: Vec<u8>,
    pub neighborhoods: Vec<NeighborhoodSpec>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCity {
    pub city: City,
    pub year: i32,
    pub incidents: Vec<CrimeIncident>,
    pub neighborhoods: Vec<Neighborhood>,
    pub bbox: BoundingBox,
}

#[allow(clippy::too_many_arguments)]
fn spec(id: &str, north: f64, east: f64, weight: f64, black: f64, white: f64, income: f64, poverty: f64) -> NeighborhoodSpec {
    NeighborhoodSpec {
        id: id.into(),
        north_ft: north,
        east_ft: east,
        half_side_ft: 5_500.0,
        sigma_ft: 2_500.0,
        crime_weight: weight,
        pct_black: black,
        pct_white: white,
        pct_neither: 1.0 - black - white,
        median_income: income,
        poverty_rate: poverty,
    }
}

impl SyntheticCitySpec {
    /// A Black-majority west neighborhood and a White-majority east one, with
    /// `white_share` of the incident history in the east.
    pub fn two_cluster(city: City, year: i32, white_share: f64, seed: u64) -> Self {
        SyntheticCitySpec {
            city,
            year,
            center: LatLon::new(39.29, -76.61),
            incidents_per_month: 100,
            months: (2..=12).collect(),
            neighborhoods: vec![
                spec("west", 0.0, -6_000.0, 1.0 - white_share, 0.85, 0.10, 32_000.0, 0.30),
                spec("east", 0.0, 6_000.0, white_share, 0.10, 0.85, 78_000.0, 0.09),
            ],
            seed,
        }
    }

    /// A 4×4 grid whose racial composition shifts from Black-majority in the
    /// west to White-majority in the east, with income and poverty tracking
    /// it and crime concentrated in the White-majority columns.
    pub fn demo(city: City, year: i32, seed: u64) -> Self {
        let mut rng = rng_from(derive(seed, "demo-layout"));
        let mut hoods = Vec::new();
        for row in 0..4 {
            for col in 0..4 {
                let t = col as f64 / 3.0;
                let jitter: f64 = rng.random_range(-0.04..0.04);
                let black = (0.85 - 0.75 * t + jitter).clamp(0.02, 0.95);
                let white = (0.92 - black - 0.05).max(0.02);
                let income = 30_000.0 + 50_000.0 * t + rng.random_range(-4_000.0..4_000.0);
                let poverty = (0.32 - 0.22 * t + rng.random_range(-0.03..0.03)).clamp(0.02, 0.6);
                let mut s = spec(
                    &format!("n{row}{col}"),
                    (row as f64 - 1.5) * 9_000.0,
                    (col as f64 - 1.5) * 9_000.0,
                    0.5 + 1.5 * t,
                    black,
                    white,
                    income,
                    poverty,
                );
                s.half_side_ft = 4_500.0;
                s.sigma_ft = 2_200.0;
                hoods.push(s);
            }
        }
        SyntheticCitySpec {
            city,
            year,
            center: LatLon::new(39.29, -76.61),
            incidents_per_month: 100,
            months: (2..=12).collect(),
            neighborhoods: hoods,
            seed,
        }
    }

    pub fn generate(&self) -> SyntheticCity {
        let mut rng = rng_from(derive(self.seed, "synthetic-incidents"));
        let neighborhoods: Vec<Neighborhood> = self
            .neighborhoods
            .iter()
            .map(|s| {
                let c = self.center.offset_feet(s.north_ft, s.east_ft);
                let sw = c.offset_feet(-s.half_side_ft, -s.half_side_ft);
                let ne = c.offset_feet(s.half_side_ft, s.half_side_ft);
                Neighborhood {
                    id: s.id.clone(),
                    name: s.id.clone(),
                    boundary: vec![Polygon::rectangle(sw, ne)],
                    pct_black: s.pct_black,
                    pct_white: s.pct_white,
                    pct_neither: s.pct_neither,
                    median_income: s.median_income,
                    poverty_rate: s.poverty_rate,
                }
            })
            .collect();
        let counts = apportion(self.incidents_per_month, &self.neighborhoods.iter().map(|s| s.crime_weight).collect::<Vec<_>>());

        let mut incidents = Vec::new();
        for &month in &self.months {
            for (s, &count) in self.neighborhoods.iter().zip(&counts) {
                let center = self.center.offset_feet(s.north_ft, s.east_ft);
                for _ in 0..count {
                    let (dn, de) = loop {
                        let dn: f64 = rng.sample::<f64, _>(StandardNormal) * s.sigma_ft;
                        let de: f64 = rng.sample::<f64, _>(StandardNormal) * s.sigma_ft;
                        // stay strictly inside the square
                        if dn.abs() < 0.98 * s.half_side_ft && de.abs() < 0.98 * s.half_side_ft {
                            break (dn, de);
                        }
                    };
                    let day = rng.random_range(1..=crate::incident::days_in_month(self.year, month));
                    let hour = rng.random_range(0..24);
                    let minute = rng.random_range(0..60);
                    let n = incidents.len();
                    incidents.push(CrimeIncident {
                        id: format!("{}-{}-{:02}-{:05}", self.city.as_str().to_ascii_lowercase(), self.year, month, n),
                        location: center.offset_feet(dn, de),
                        timestamp: DateTime::new(self.year, month, day, hour, minute, 0).expect("valid generated date"),
                        city: self.city,
                        crime_type: String::from("SYNTHETIC"),
                        neighborhood_id: None,
                    });
                }
            }
        }
        let bbox = BoundingBox::hull(neighborhoods.iter().flat_map(|n| n.boundary.iter().flat_map(|p| p.exterior.iter())), 0.01)
            .expect("synthetic city has at least one neighborhood");
        SyntheticCity { city: self.city, year: self.year, incidents, neighborhoods, bbox }
    }
}

/// Largest-remainder split of `total` in proportion to `weights`.
pub fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| libm::floor(*e) as usize).collect();
    let mut rest = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - libm::floor(exact[b])).total_cmp(&(exact[a] - libm::floor(exact[a]))).then(a.cmp(&b)));
    for i in order {
        if rest == 0 {
            break;
        }
        counts[i] += 1;
        rest -= 1;
    }
    counts
}
