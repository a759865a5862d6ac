//! Planar geometry: points, sampling regions, and the segment-crossing
//! predicate used when re-wiring tree arcs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Sampling region for node coordinates.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Region {
    Square {
        side: f64,
        origin: Point,
    },
    Rectangle {
        width: f64,
        height: f64,
        origin: Point,
    },
    Circle {
        radius: f64,
        center: Point,
    },
}

impl Region {
    pub fn square(side: f64) -> Region {
        Region::Square {
            side,
            origin: Point::new(0.0, 0.0),
        }
    }

    pub fn rectangle(width: f64, height: f64) -> Region {
        Region::Rectangle {
            width,
            height,
            origin: Point::new(0.0, 0.0),
        }
    }

    pub fn circle(radius: f64) -> Region {
        Region::Circle {
            radius,
            center: Point::new(0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Region::Square { side, .. } => side > 0.0 && side.is_finite(),
            Region::Rectangle { width, height, .. } => {
                width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()
            }
            Region::Circle { radius, .. } => radius > 0.0 && radius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidRegion(format!(
                "{self:?} has non-positive dimensions"
            )))
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Region::Square { side, origin } => {
                p.x >= origin.x
                    && p.x <= origin.x + side
                    && p.y >= origin.y
                    && p.y <= origin.y + side
            }
            Region::Rectangle {
                width,
                height,
                origin,
            } => {
                p.x >= origin.x
                    && p.x <= origin.x + width
                    && p.y >= origin.y
                    && p.y <= origin.y + height
            }
            Region::Circle { radius, center } => p.distance(center) <= radius + 1e-12,
        }
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// True when segments (a1,a2) and (b1,b2) cross at an interior point of both.
/// Shared endpoints and mere touching do not count as crossings.
pub fn segments_cross(a1: Point, a2: Point, b1: Point, b2: Point) -> bool {
    // Sharing an endpoint is incidence, not a crossing.
    if a1 == b1 || a1 == b2 || a2 == b1 || a2 == b2 {
        return false;
    }
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_is_euclidean() {
        assert_eq!(Point::new(0.0, 0.0).distance(Point::new(3.0, 4.0)), 5.0);
    }

    #[test]
    fn region_containment() {
        let sq = Region::square(10.0);
        assert!(sq.contains(Point::new(0.0, 10.0)));
        assert!(!sq.contains(Point::new(10.1, 5.0)));
        let c = Region::circle(5.0);
        assert!(c.contains(Point::new(3.0, 4.0)));
        assert!(!c.contains(Point::new(3.1, 4.1)));
    }

    #[test]
    fn region_validation_rejects_nonpositive_dims() {
        assert!(Region::square(0.0).validate().is_err());
        assert!(Region::rectangle(-1.0, 2.0).validate().is_err());
        assert!(Region::circle(5.0).validate().is_ok());
    }

    #[test]
    fn crossing_segments_detected() {
        let p = Point::new;
        assert!(segments_cross(
            p(0.0, 0.0),
            p(2.0, 2.0),
            p(0.0, 2.0),
            p(2.0, 0.0)
        ));
        // Parallel, disjoint.
        assert!(!segments_cross(
            p(0.0, 0.0),
            p(1.0, 0.0),
            p(0.0, 1.0),
            p(1.0, 1.0)
        ));
        // Shared endpoint is not a crossing.
        assert!(!segments_cross(
            p(0.0, 0.0),
            p(1.0, 1.0),
            p(1.0, 1.0),
            p(2.0, 0.0)
        ));
        // Touching at an interior point (T shape) is not a proper crossing.
        assert!(!segments_cross(
            p(0.0, 0.0),
            p(2.0, 0.0),
            p(1.0, 0.0),
            p(1.0, 1.0)
        ));
    }
}
