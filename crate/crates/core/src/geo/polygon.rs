use super::{GeoError, Result};
use crate::Real;

/// A named sub-city polygon. Rings are tested together under the even-odd
/// rule, so holes and disjoint outer rings both work.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialUnit<T> {
    id: String,
    rings: Vec<Vec<(T, T)>>,
    area_km2: T,
    bbox: [T; 4],
}

impl<T: Real> SpatialUnit<T> {
    /// Rings may be explicitly closed or left implicitly closed; a closing
    /// vertex equal to the first is dropped.
    pub fn new(id: impl Into<String>, mut rings: Vec<Vec<(T, T)>>, area_km2: T) -> Result<Self> {
        let id = id.into();
        if rings.is_empty() {
            return Err(GeoError::InvalidUnit {
                unit: id,
                message: "no rings".into(),
            });
        }
        if !(area_km2 > T::zero()) || !area_km2.is_finite() {
            return Err(GeoError::InvalidUnit {
                unit: id,
                message: format!("area {area_km2} must be positive"),
            });
        }
        for ring in &mut rings {
            if ring.len() > 1 && ring.first() == ring.last() {
                ring.pop();
            }
        }
        let mut bbox = [
            T::infinity(),
            T::infinity(),
            T::neg_infinity(),
            T::neg_infinity(),
        ];
        for (ring_idx, ring) in rings.iter().enumerate() {
            let mut distinct: Vec<(T, T)> = Vec::new();
            for &(x, y) in ring {
                if !x.is_finite() || !y.is_finite() {
                    return Err(GeoError::InvalidUnit {
                        unit: id,
                        message: "non-finite vertex".into(),
                    });
                }
                if !distinct.contains(&(x, y)) {
                    distinct.push((x, y));
                }
                bbox = [
                    bbox[0].min(x),
                    bbox[1].min(y),
                    bbox[2].max(x),
                    bbox[3].max(y),
                ];
            }
            if distinct.len() < 3 {
                return Err(GeoError::DegenerateRing {
                    unit: id,
                    ring: ring_idx,
                    distinct: distinct.len(),
                });
            }
        }
        Ok(Self {
            id,
            rings,
            area_km2,
            bbox,
        })
    }

    /// Axis-aligned rectangle ring, counter-clockwise.
    pub fn rectangle(id: impl Into<String>, bbox: [T; 4], area_km2: T) -> Result<Self> {
        let [x0, y0, x1, y1] = bbox;
        Self::new(
            id,
            vec![vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)]],
            area_km2,
        )
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn rings(&self) -> &[Vec<(T, T)>] {
        &self.rings
    }

    pub fn area_km2(&self) -> T {
        self.area_km2
    }

    /// [lon_min, lat_min, lon_max, lat_max] over all vertices.
    pub fn bbox(&self) -> [T; 4] {
        self.bbox
    }

    /// Even-odd ray casting towards +lon.
    ///
    /// An edge counts when exactly one endpoint lies strictly above the
    /// point's latitude, and the crossing is decided by the sign of a cross
    /// product rather than a division. Boundary points follow a half-open
    /// convention: for an axis-aligned rectangle `[x0, x1) × [y0, y1)` is
    /// inside, so edge-sharing units never claim the same point.
    pub fn contains(&self, point: (T, T)) -> bool {
        let (px, py) = point;
        let mut inside = false;
        for ring in &self.rings {
            let n = ring.len();
            for k in 0..n {
                let (x1, y1) = ring[k];
                let (x2, y2) = ring[(k + 1) % n];
                if (y1 > py) == (y2 > py) {
                    continue;
                }
                let cross = (x2 - x1) * (py - y1) - (px - x1) * (y2 - y1);
                let right = if y2 > y1 {
                    cross > T::zero()
                } else {
                    cross < T::zero()
                };
                if right {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn translated(&self, dx: T, dy: T) -> Self {
        let rings = self
            .rings
            .iter()
            .map(|r| r.iter().map(|&(x, y)| (x + dx, y + dy)).collect())
            .collect();
        Self::new(self.id.clone(), rings, self.area_km2).expect("translation keeps validity")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn square() -> SpatialUnit<f64> {
        SpatialUnit::rectangle("sq", [0.0, 0.0, 1.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn unit_square_membership() {
        let s = square();
        assert!(s.contains((0.5, 0.5)));
        assert!(!s.contains((2.0, 2.0)));
    }

    #[test]
    fn half_open_boundary() {
        let s = square();
        assert!(s.contains((0.0, 0.5)));
        assert!(s.contains((0.5, 0.0)));
        assert!(s.contains((0.0, 0.0)));
        assert!(!s.contains((1.0, 0.5)));
        assert!(!s.contains((0.5, 1.0)));
        // neighbours sharing the edge x = 1 split it without overlap
        let right = SpatialUnit::rectangle("r", [1.0, 0.0, 2.0, 1.0], 1.0).unwrap();
        assert!(right.contains((1.0, 0.5)));
    }

    #[test]
    fn explicit_closure_and_holes() {
        let closed = SpatialUnit::new(
            "c",
            vec![
                vec![(0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0), (0.0, 0.0)],
                vec![(1.0, 1.0), (3.0, 1.0), (3.0, 3.0), (1.0, 3.0)],
            ],
            1.0,
        )
        .unwrap();
        assert!(closed.contains((0.5, 0.5)));
        assert!(!closed.contains((2.0, 2.0)));
    }

    #[test]
    fn degenerate_rings_rejected() {
        let e = SpatialUnit::new("d", vec![vec![(0.0, 0.0), (1.0, 1.0), (0.0, 0.0)]], 1.0);
        assert!(matches!(
            e,
            Err(GeoError::DegenerateRing { distinct: 2, .. })
        ));
        assert!(SpatialUnit::rectangle("z", [0.0, 0.0, 1.0, 1.0], 0.0).is_err());
    }

    fn winding_number(poly: &[(f64, f64)], p: (f64, f64)) -> i32 {
        let mut wn = 0;
        for k in 0..poly.len() {
            let a = poly[k];
            let b = poly[(k + 1) % poly.len()];
            let side = (b.0 - a.0) * (p.1 - a.1) - (p.0 - a.0) * (b.1 - a.1);
            if a.1 <= p.1 {
                if b.1 > p.1 && side > 0.0 {
                    wn += 1;
                }
            } else if b.1 <= p.1 && side < 0.0 {
                wn -= 1;
            }
        }
        wn
    }

    #[test]
    fn agrees_with_winding_number_on_convex_polygons() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..20 {
            let n = rng.random_range(3..12);
            let (cx, cy) = (rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
            let r = rng.random_range(0.5..5.0);
            let mut angles: Vec<f64> = (0..n)
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect();
            angles.sort_by(f64::total_cmp);
            angles.dedup();
            if angles.len() < 3 {
                continue;
            }
            let ring: Vec<(f64, f64)> = angles
                .iter()
                .map(|a| (cx + r * a.cos(), cy + r * a.sin()))
                .collect();
            let unit = SpatialUnit::new("p", vec![ring.clone()], 1.0).unwrap();
            for _ in 0..1000 {
                let p = (
                    cx + rng.random_range(-1.5 * r..1.5 * r),
                    cy + rng.random_range(-1.5 * r..1.5 * r),
                );
                assert_eq!(
                    unit.contains(p),
                    winding_number(&ring, p) != 0,
                    "point {p:?}"
                );
            }
        }
    }
}
