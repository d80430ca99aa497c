use alloc::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ObjectId, Scene};
use crate::geometry::Vec3;

/// A pointing ray. `direction` is unit length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    /// Normalizes `direction`; `None` for a zero or non-finite direction.
    pub fn new(origin: Vec3, direction: Vec3) -> Option<Ray> {
        Some(Ray {
            origin,
            direction: direction.normalized()?,
        })
    }

    pub fn towards(origin: Vec3, target: Vec3) -> Option<Ray> {
        Ray::new(origin, target - origin)
    }

    pub fn is_valid(&self) -> bool {
        let o = self.origin;
        (self.direction.length() - 1.0).abs() <= 1e-9
            && o.x.is_finite()
            && o.y.is_finite()
            && o.z.is_finite()
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub id: ObjectId,
    pub distance: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PickResult {
    pub hit: Option<Hit>,
}

/// Distance along the ray to the first surface crossing with t > 0. When the
/// origin is inside the sphere this is the exit distance. Tangent rays hit.
pub fn ray_sphere_distance(ray: &Ray, center: Vec3, radius: f64) -> Option<f64> {
    let oc = ray.origin - center;
    let b = oc.dot(ray.direction);
    let c = oc.length_squared() - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let s = libm::sqrt(disc);
    let near = -b - s;
    if near > 0.0 {
        return Some(near);
    }
    let far = -b + s;
    (far > 0.0).then_some(far)
}

/// Nearest object hit by the ray, testing bounding spheres. Equal distances
/// resolve to the lower id.
pub fn raycast(scene: &Scene, ray: &Ray) -> PickResult {
    debug_assert!(ray.is_valid());
    let mut best: Option<Hit> = None;
    for o in &scene.objects {
        if let Some(d) = ray_sphere_distance(ray, o.position, o.bounding_radius) {
            let closer = match best {
                None => true,
                Some(b) => d < b.distance || (d == b.distance && o.id < b.id),
            };
            if closer {
                best = Some(Hit { id: o.id, distance: d });
            }
        }
    }
    PickResult { hit: best }
}

/// Objects whose line of sight from `viewpoint` to their center passes
/// through another object's bounding sphere before reaching their own surface.
pub fn occluded_set(scene: &Scene, viewpoint: Vec3) -> BTreeSet<ObjectId> {
    let mut out = BTreeSet::new();
    for o in &scene.objects {
        let to_center = o.position - viewpoint;
        let Some(dir) = to_center.normalized() else {
            continue;
        };
        let reach = to_center.length() - o.bounding_radius;
        let sight = Ray {
            origin: viewpoint,
            direction: dir,
        };
        let blocked = scene.objects.iter().any(|p| {
            if p.id == o.id {
                return false;
            }
            let oc = sight.origin - p.position;
            let b = oc.dot(dir);
            let c = oc.length_squared() - p.bounding_radius * p.bounding_radius;
            let disc = b * b - c;
            if disc <= 0.0 {
                return false;
            }
            let s = libm::sqrt(disc);
            let (enter, exit) = (-b - s, -b + s);
            enter < reach && exit > 0.0
        });
        if blocked {
            out.insert(o.id);
        }
    }
    out
}
