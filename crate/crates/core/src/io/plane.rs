use std::f64::consts::PI;

use super::{Dataset, IoError};
use crate::dsp::{CoordinateSystem, Direction, Ear, HrirRecord};

/// A circle of directions that can be parametrized by one angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Plane {
    Median,
    Horizontal,
    /// Cone of constant lateral angle (degrees).
    InterauralCircle(f64),
}

impl std::fmt::Display for Plane {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Plane::Median => write!(f, "median plane"),
            Plane::Horizontal => write!(f, "horizontal plane"),
            Plane::InterauralCircle(a) => write!(f, "interaural circle at {a} deg"),
        }
    }
}

impl std::str::FromStr for Plane {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase();
        match s.as_str() {
            "median" => Ok(Plane::Median),
            "horizontal" => Ok(Plane::Horizontal),
            _ => {
                let rest = s
                    .strip_prefix("interaural:")
                    .or_else(|| s.strip_prefix("interaural="))
                    .ok_or_else(|| format!("unknown plane '{s}' (median, horizontal, interaural:<deg>)"))?;
                rest.parse::<f64>()
                    .map(Plane::InterauralCircle)
                    .map_err(|_| format!("bad lateral angle '{rest}'"))
            }
        }
    }
}

/// Records on one circle, sorted by their circle angle.
#[derive(Clone, Debug, PartialEq)]
pub struct Circle {
    pub plane: Plane,
    pub ear: Ear,
    /// Circle angle of each record, radians in `[0, 2 pi)`, strictly increasing.
    pub thetas: Vec<f64>,
    pub records: Vec<HrirRecord>,
}

impl Circle {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

const ON_PLANE_TOL: f64 = 1e-6;

impl Plane {
    /// Direction at circle angle `theta` (radians), inverting the mapping
    /// used by [`select_plane`].
    pub fn direction_at(&self, theta: f64, cs: CoordinateSystem) -> Direction {
        // Snap away radian/degree round-off so grid angles come out exact.
        let deg = ((theta.to_degrees() * 1e9).round() / 1e9).rem_euclid(360.0);
        match (self, cs) {
            (Plane::Median, CoordinateSystem::InterauralPolar) => Direction::new(0.0, deg - 90.0),
            (Plane::InterauralCircle(a), CoordinateSystem::InterauralPolar) => Direction::new(*a, deg - 90.0),
            (Plane::Median, CoordinateSystem::VerticalPolar) => {
                if deg <= 180.0 {
                    Direction::new(0.0, deg - 90.0)
                } else {
                    Direction::new(180.0, 270.0 - deg)
                }
            }
            (Plane::Horizontal, CoordinateSystem::VerticalPolar) => Direction::new(deg, 0.0),
            (Plane::Horizontal, CoordinateSystem::InterauralPolar) => {
                if deg <= 90.0 {
                    Direction::new(deg, 0.0)
                } else if deg >= 270.0 {
                    Direction::new(deg - 360.0, 0.0)
                } else {
                    Direction::new(180.0 - deg, 180.0)
                }
            }
            (Plane::InterauralCircle(a), CoordinateSystem::VerticalPolar) => {
                // Back through cartesian: lateral a, polar angle deg - 90.
                let (a, p) = (a.to_radians(), (deg - 90.0).to_radians());
                let (x, y, z) = (a.cos() * p.cos(), a.sin(), a.cos() * p.sin());
                Direction::new(y.atan2(x).to_degrees(), z.clamp(-1.0, 1.0).asin().to_degrees())
            }
        }
    }
}

impl Plane {
    /// Circle angle of `d` in radians, `None` when `d` is off the plane.
    pub fn angle_of(&self, d: Direction, cs: CoordinateSystem) -> Option<f64> {
        circle_angle(*self, to_cartesian(d, cs))
    }
}

/// Great-circle angle between two directions, radians.
pub fn angular_distance(a: Direction, b: Direction, cs: CoordinateSystem) -> f64 {
    let (u, v) = (to_cartesian(a, cs), to_cartesian(b, cs));
    let dot: f64 = u.iter().zip(&v).map(|(p, q)| p * q).sum();
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let cn = cross.iter().map(|c| c * c).sum::<f64>().sqrt();
    cn.atan2(dot)
}

/// Unit vector: x front, y left, z up.
fn to_cartesian(d: Direction, cs: CoordinateSystem) -> [f64; 3] {
    let (a, e) = (d.azimuth_deg.to_radians(), d.elevation_deg.to_radians());
    match cs {
        CoordinateSystem::VerticalPolar => [e.cos() * a.cos(), e.cos() * a.sin(), e.sin()],
        CoordinateSystem::InterauralPolar => [a.cos() * e.cos(), a.sin(), a.cos() * e.sin()],
    }
}

/// Angle around a lateral cone, measured from directly below through the
/// front, so `-90, 0, 90, 180` polar elevation maps to `0, 90, 180, 270` deg.
fn polar_theta(x: f64, z: f64) -> f64 {
    (z.atan2(x) + PI / 2.0).rem_euclid(2.0 * PI)
}

fn circle_angle(plane: Plane, v: [f64; 3]) -> Option<f64> {
    let [x, y, z] = v;
    match plane {
        Plane::Median => (y.abs() < ON_PLANE_TOL).then(|| polar_theta(x, z)),
        Plane::Horizontal => (z.abs() < ON_PLANE_TOL).then(|| y.atan2(x).rem_euclid(2.0 * PI)),
        Plane::InterauralCircle(lat) => {
            let target = lat.to_radians().sin();
            ((y - target).abs() < ON_PLANE_TOL).then(|| polar_theta(x, z))
        }
    }
}

/// Picks the records of `ear` on `plane` and orders them by circle angle.
///
/// In the median plane and on interaural circles the angle runs from below,
/// through the front and the top to the back; in the horizontal plane it is
/// the azimuth counterclockwise from the front. Points that coincide with an
/// earlier record (same circle angle within 1e-9 rad) are dropped.
pub fn select_plane(ds: &Dataset, plane: Plane, ear: Ear) -> Result<Circle, IoError> {
    let mut hits: Vec<(f64, &HrirRecord)> = ds
        .records
        .iter()
        .filter(|r| r.ear == ear)
        .filter_map(|r| {
            let theta = circle_angle(plane, to_cartesian(r.direction, ds.coordinate_system))?;
            // Wraparound from rounding just below 2 pi.
            let theta = if theta >= 2.0 * PI - 1e-12 { 0.0 } else { theta };
            Some((theta, r))
        })
        .collect();
    if hits.is_empty() {
        return Err(IoError::EmptyPlane {
            plane: plane.to_string(),
            ear,
        });
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut thetas: Vec<f64> = Vec::with_capacity(hits.len());
    let mut records = Vec::with_capacity(hits.len());
    for (t, r) in hits {
        if thetas.last().is_some_and(|&p| t - p < 1e-9) {
            continue;
        }
        thetas.push(t);
        records.push(r.clone());
    }
    Ok(Circle {
        plane,
        ear,
        thetas,
        records,
    })
}
