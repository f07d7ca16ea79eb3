//! Radial boundary extraction for two-dimensional sets given only a
//! membership oracle.
//!
//! All sets built here are sublevel sets of sums of convex functions of
//! `theta` (exponentials of squared distances), hence convex and star-shaped
//! about any interior point. The extractor only assumes the weaker
//! star-shapedness about `center`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub angle: f64,
    /// `None` when no sign change was found along this ray.
    pub point: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub center: [f64; 2],
    pub points: Vec<BoundaryPoint>,
}

impl Boundary {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.point.is_none()).count()
    }

    /// Vertices of the polygon through every recovered point, in angle order.
    pub fn polygon(&self) -> Vec<[f64; 2]> {
        self.points.iter().filter_map(|p| p.point).collect()
    }

    pub fn radii(&self) -> Vec<Option<f64>> {
        self.points
            .iter()
            .map(|p| p.point.map(|q| ((q[0] - self.center[0]).powi(2) + (q[1] - self.center[1]).powi(2)).sqrt()))
            .collect()
    }
}

/// Bisects along `rays` equally spaced rays from `center` for the edge of
/// `{theta : contains(theta)}`, up to `search_radius` and to tolerance `tol`.
pub fn region_boundary_2d<F>(
    contains: F,
    center: [f64; 2],
    rays: usize,
    search_radius: f64,
    tol: f64,
) -> Result<Boundary>
where
    F: Fn(&[f64]) -> bool,
{
    if rays < 3 {
        return Err(Error::domain("boundary extraction needs at least 3 rays"));
    }
    if !(search_radius > 0.0 && tol > 0.0) {
        return Err(Error::domain("search radius and tolerance must be positive"));
    }
    if !contains(&center) {
        return Err(Error::domain("boundary center is not inside the region"));
    }
    let at = |angle: f64, r: f64| [center[0] + r * angle.cos(), center[1] + r * angle.sin()];
    let points = (0..rays)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / rays as f64;
            if contains(&at(angle, search_radius)) {
                return BoundaryPoint { angle, point: None };
            }
            let (mut lo, mut hi) = (0.0, search_radius);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if contains(&at(angle, mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            BoundaryPoint {
                angle,
                point: Some(at(angle, 0.5 * (lo + hi))),
            }
        })
        .collect();
    Ok(Boundary { center, points })
}

/// Shoelace area of a simple polygon.
pub fn polygon_area(vertices: &[[f64; 2]]) -> f64 {
    if vertices.len() < 3 {
        return 0.0;
    }
    let twice: f64 = vertices
        .iter()
        .zip(vertices.iter().cycle().skip(1))
        .map(|(a, b)| a[0] * b[1] - b[0] * a[1])
        .sum();
    0.5 * twice.abs()
}

/// Largest squared distance between two vertices.
pub fn polygon_sq_diameter(vertices: &[[f64; 2]]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            best = best.max((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_circle_radius() {
        let c = [0.3, -0.2];
        let r2: f64 = 0.04;
        let inside = |t: &[f64]| (t[0] - c[0]).powi(2) + (t[1] - c[1]).powi(2) < r2;
        let b = region_boundary_2d(inside, c, 64, 2.0, 1e-9).unwrap();
        assert_eq!(b.failures(), 0);
        for r in b.radii() {
            assert!((r.unwrap() - 0.2).abs() < 1e-9);
        }
    }

    #[test]
    fn unbounded_rays_reported() {
        // half-plane: rays pointing right never leave
        let inside = |t: &[f64]| t[0] > -1.0;
        let b = region_boundary_2d(inside, [0.0, 0.0], 8, 5.0, 1e-6).unwrap();
        assert!(b.failures() > 0 && b.failures() < 8);
    }

    #[test]
    fn center_must_be_inside() {
        assert!(region_boundary_2d(|_| false, [0.0, 0.0], 8, 1.0, 1e-6).is_err());
    }

    #[test]
    fn shoelace_unit_square() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!((polygon_area(&sq) - 1.0).abs() < 1e-15);
        assert!((polygon_sq_diameter(&sq) - 2.0).abs() < 1e-15);
    }
}
