use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

impl Sphere {
    pub fn contains(&self, p: Vec3, tol: f64) -> bool {
        self.center.distance(p) <= self.radius + tol
    }
}

const TOL: f64 = 1e-9;

/// Smallest sphere containing every point, by exhaustive search over support
/// sets of up to four points. Intended for the handful of target centers in a
/// scene; cost grows as O(n^5).
pub fn min_enclosing_sphere(points: &[Vec3]) -> Option<Sphere> {
    let n = points.len();
    if n == 0 {
        return None;
    }
    if n == 1 {
        return Some(Sphere {
            center: points[0],
            radius: 0.0,
        });
    }
    let mut best: Option<Sphere> = None;
    let mut consider = |s: Option<Sphere>| {
        if let Some(s) = s {
            if points.iter().all(|&p| s.contains(p, TOL))
                && best.is_none_or(|b| s.radius < b.radius)
            {
                best = Some(s);
            }
        }
    };
    for i in 0..n {
        for j in i + 1..n {
            consider(Some(diametral(points[i], points[j])));
            for k in j + 1..n {
                consider(circumcircle(points[i], points[j], points[k]));
                for l in k + 1..n {
                    consider(circumsphere(points[i], points[j], points[k], points[l]));
                }
            }
        }
    }
    best
}

fn diametral(a: Vec3, b: Vec3) -> Sphere {
    Sphere {
        center: (a + b) * 0.5,
        radius: a.distance(b) * 0.5,
    }
}

fn circumcircle(a: Vec3, b: Vec3, c: Vec3) -> Option<Sphere> {
    let ab = b - a;
    let ac = c - a;
    let n = ab.cross(ac);
    let denom = 2.0 * n.length_squared();
    if denom < 1e-18 {
        return None;
    }
    let offset = (n.cross(ab) * ac.length_squared() + ac.cross(n) * ab.length_squared()) * (1.0 / denom);
    let center = a + offset;
    Some(Sphere {
        center,
        radius: center.distance(a),
    })
}

fn circumsphere(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Option<Sphere> {
    // Solve 2 (p - a) . x = |p|^2 - |a|^2 for p in {b, c, d}.
    let r1 = b - a;
    let r2 = c - a;
    let r3 = d - a;
    let det = r1.dot(r2.cross(r3));
    if det.abs() < 1e-12 {
        return None;
    }
    let s1 = r1.length_squared();
    let s2 = r2.length_squared();
    let s3 = r3.length_squared();
    let offset = (r2.cross(r3) * s1 + r3.cross(r1) * s2 + r1.cross(r2) * s3) * (1.0 / (2.0 * det));
    let center = a + offset;
    Some(Sphere {
        center,
        radius: center.distance(a),
    })
}
