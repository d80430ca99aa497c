//! Hand-held disc minimap baseline.
//!
//! Objects inside an aiming cone are projected onto a disc. Icons that overlap
//! are moved, whole cluster at a time, onto the disc's rim where they can be
//! picked individually.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, TAU};
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_angle, wrap_signed, Vec2, Vec3};
use crate::scene::{ObjectId, Scene, VIEWPOINT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MinimapError {
    #[error("invalid minimap config: {0}")]
    InvalidConfig(&'static str),
    #[error("layout must be frozen before it can be expanded or picked")]
    NotFrozen,
    #[error("{needed} icons need rim slots but only {available} fit")]
    CapacityExceeded { needed: usize, available: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimapConfig {
    pub disc_radius: f64,
    pub icon_radius: f64,
    pub cone_half_angle: f64,
    pub cone_origin: Vec3,
    pub cone_direction: Vec3,
}

impl Default for MinimapConfig {
    fn default() -> Self {
        MinimapConfig {
            disc_radius: 1.0,
            icon_radius: 0.04,
            cone_half_angle: 0.35,
            cone_origin: VIEWPOINT,
            cone_direction: Vec3::new(0.0, 0.0, 1.0),
        }
    }
}

impl MinimapConfig {
    pub fn aimed(origin: Vec3, direction: Vec3) -> Self {
        MinimapConfig {
            cone_origin: origin,
            cone_direction: direction,
            ..MinimapConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), MinimapError> {
        if !(self.icon_radius > 0.0 && self.icon_radius < self.disc_radius) {
            return Err(MinimapError::InvalidConfig("need 0 < icon_radius < disc_radius"));
        }
        if !(self.cone_half_angle > 0.0 && self.cone_half_angle < FRAC_PI_2) {
            return Err(MinimapError::InvalidConfig("need 0 < cone_half_angle < pi/2"));
        }
        if self.cone_direction.normalized().is_none() {
            return Err(MinimapError::InvalidConfig("cone direction must be nonzero"));
        }
        Ok(())
    }

    /// Angular pitch between neighbouring rim slots: the chord between them is
    /// at least two icon radii.
    pub fn rim_step(&self) -> f64 {
        2.0 * libm::asin(self.icon_radius / self.disc_radius) * (1.0 + 1e-9)
    }

    pub fn rim_capacity(&self) -> usize {
        libm::floor(TAU / self.rim_step()) as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimapIcon {
    pub object_id: ObjectId,
    pub map_position: Vec2,
    pub expanded: bool,
    /// Rim angle in `[0, 2pi)` for expanded icons.
    pub anchor_angle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimapLayout {
    pub icons: Vec<MinimapIcon>,
    pub frozen: bool,
    pub disc_radius: f64,
    pub icon_radius: f64,
}

/// Right and up axes of the map plane for a viewing direction.
fn map_basis(dir: Vec3) -> (Vec3, Vec3) {
    let right = Vec3::UP
        .cross(dir)
        .normalized()
        .unwrap_or(Vec3::new(1.0, 0.0, 0.0));
    let up = dir.cross(right);
    (right, up)
}

/// Projects every object whose center is inside the aiming cone. The cone's
/// cross-section at each object's depth maps onto the whole disc, so an object
/// on the axis lands at the center and one on the cone surface on the rim.
pub fn project(scene: &Scene, cfg: &MinimapConfig) -> Result<MinimapLayout, MinimapError> {
    cfg.validate()?;
    let dir = cfg.cone_direction.normalized().expect("validated");
    let (right, up) = map_basis(dir);
    let tan_half = libm::tan(cfg.cone_half_angle);
    let mut icons: Vec<MinimapIcon> = scene
        .objects
        .iter()
        .filter_map(|o| {
            let rel = o.position - cfg.cone_origin;
            let depth = rel.dot(dir);
            if depth <= 0.0 {
                return None;
            }
            let lateral = rel - dir * depth;
            let spread = depth * tan_half;
            if lateral.length() > spread {
                return None;
            }
            let scale = cfg.disc_radius / spread;
            Some(MinimapIcon {
                object_id: o.id,
                map_position: Vec2::new(lateral.dot(right) * scale, lateral.dot(up) * scale),
                expanded: false,
                anchor_angle: None,
            })
        })
        .collect();
    icons.sort_by_key(|i| i.object_id);
    Ok(MinimapLayout {
        icons,
        frozen: true,
        disc_radius: cfg.disc_radius,
        icon_radius: cfg.icon_radius,
    })
}

impl MinimapLayout {
    /// True when no object fell inside the cone.
    pub fn is_empty_cone(&self) -> bool {
        self.icons.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<ObjectId> {
        self.icons.iter().map(|i| i.object_id).collect()
    }

    pub fn icon(&self, id: ObjectId) -> Option<&MinimapIcon> {
        self.icons.iter().find(|i| i.object_id == id)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "minimap disc_radius={:.6} icon_radius={:.6} frozen={}",
            self.disc_radius,
            self.icon_radius,
            u8::from(self.frozen)
        );
        for i in &self.icons {
            let _ = writeln!(
                out,
                "{} {:.6} {:.6} {} {:.6}",
                i.object_id,
                i.map_position.x,
                i.map_position.y,
                u8::from(i.expanded),
                i.anchor_angle.unwrap_or(0.0)
            );
        }
        out
    }
}

/// Connected components of the "closer than two icon radii" graph.
fn overlap_components(icons: &[MinimapIcon], icon_radius: f64) -> Vec<Vec<usize>> {
    let n = icons.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if icons[i].map_position.distance(icons[j].map_position) < 2.0 * icon_radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = alloc::vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_slot[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_slot[r] = Some(groups.len());
                groups.push(alloc::vec![i]);
            }
        }
    }
    groups
}

/// Moves every overlapping cluster onto the rim.
///
/// Each cluster is spread at equal angular steps centered on the angle of
/// its centroid, keeping the members' angular order around that centroid.
/// Clusters that then collide are merged into one evenly spaced run centered
/// on their members' mean preferred angle. Interior icons that end up too
/// close to a rim icon join the rim as well, so afterwards every pair of icons
/// is at least two icon radii apart.
pub fn expand_overlaps(
    layout: &MinimapLayout,
    cfg: &MinimapConfig,
) -> Result<MinimapLayout, MinimapError> {
    if !layout.frozen {
        return Err(MinimapError::NotFrozen);
    }
    cfg.validate()?;
    let r_disc = layout.disc_radius;
    let r_icon = layout.icon_radius;
    let step = MinimapConfig {
        disc_radius: r_disc,
        icon_radius: r_icon,
        ..*cfg
    }
    .rim_step();
    let capacity = libm::floor(TAU / step) as usize;

    let mut groups: Vec<Vec<usize>> = overlap_components(&layout.icons, r_icon)
        .into_iter()
        .filter(|g| g.len() >= 2)
        .collect();
    if groups.is_empty() {
        return Ok(layout.clone());
    }
    let mut on_rim: BTreeSet<usize> = groups.iter().flatten().copied().collect();

    loop {
        if on_rim.len() > capacity {
            return Err(MinimapError::CapacityExceeded {
                needed: on_rim.len(),
                available: capacity,
            });
        }
        // (preferred angle, icon index)
        let mut wishes: Vec<(f64, usize)> = Vec::with_capacity(on_rim.len());
        for g in &groups {
            let centroid = g
                .iter()
                .fold(Vec2::ZERO, |acc, &i| acc + layout.icons[i].map_position)
                * (1.0 / g.len() as f64);
            let center_angle = centroid.angle();
            let mut members = g.clone();
            members.sort_by(|&a, &b| {
                let ka = wrap_signed(layout.icons[a].map_position.angle() - center_angle);
                let kb = wrap_signed(layout.icons[b].map_position.angle() - center_angle);
                ka.total_cmp(&kb)
                    .then(layout.icons[a].object_id.cmp(&layout.icons[b].object_id))
            });
            let mid = (members.len() as f64 - 1.0) / 2.0;
            for (j, &i) in members.iter().enumerate() {
                wishes.push((center_angle + (j as f64 - mid) * step, i));
            }
        }
        let angles = arrange_on_circle(&wishes, step);

        let mut icons = layout.icons.clone();
        for (&(_, i), &theta) in wishes.iter().zip(&angles) {
            icons[i] = MinimapIcon {
                object_id: icons[i].object_id,
                map_position: Vec2::from_polar(r_disc, theta),
                expanded: true,
                anchor_angle: Some(wrap_angle(theta)),
            };
        }

        let crowded: Vec<usize> = (0..icons.len())
            .filter(|i| !on_rim.contains(i))
            .filter(|&i| {
                on_rim
                    .iter()
                    .any(|&j| icons[i].map_position.distance(icons[j].map_position) < 2.0 * r_icon)
            })
            .collect();
        if crowded.is_empty() {
            return Ok(MinimapLayout {
                icons,
                frozen: true,
                disc_radius: r_disc,
                icon_radius: r_icon,
            });
        }
        for i in crowded {
            on_rim.insert(i);
            groups.push(alloc::vec![i]);
        }
    }
}

/// Places points on a circle as close to their preferred angles as possible
/// with consecutive points at least `step` apart. Preferred angles that crowd
/// each other are pooled into evenly spaced blocks centered on their mean,
/// merging blocks until no two collide, including across the 0/2pi seam.
/// Requires `wishes.len() * step <= 2pi`. Output is aligned with `wishes`.
fn arrange_on_circle(wishes: &[(f64, usize)], step: f64) -> Vec<f64> {
    let n = wishes.len();
    // Sort by preferred angle in [0, 2pi); ties keep input order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| wrap_angle(wishes[a].0).total_cmp(&wrap_angle(wishes[b].0)).then(a.cmp(&b)));
    let mut pref: Vec<f64> = order.iter().map(|&k| wrap_angle(wishes[k].0)).collect();

    // Blocks as (len, sum of preferred angles) over consecutive entries of `pref`.
    let mut blocks: Vec<(usize, f64)> = pref.iter().map(|&a| (1, a)).collect();
    let first_pos = |b: &(usize, f64)| b.1 / b.0 as f64 - (b.0 as f64 - 1.0) / 2.0 * step;
    let last_pos = |b: &(usize, f64)| b.1 / b.0 as f64 + (b.0 as f64 - 1.0) / 2.0 * step;

    loop {
        if let Some(k) = (0..blocks.len().saturating_sub(1))
            .find(|&k| first_pos(&blocks[k + 1]) - last_pos(&blocks[k]) < step)
        {
            let next = blocks.remove(k + 1);
            blocks[k].0 += next.0;
            blocks[k].1 += next.1;
            continue;
        }
        if blocks.len() > 1 {
            let head = blocks[0];
            let tail = blocks[blocks.len() - 1];
            if first_pos(&head) + TAU - last_pos(&tail) < step {
                // Move the first block past the seam.
                blocks.remove(0);
                blocks.push((head.0, head.1 + TAU * head.0 as f64));
                pref.rotate_left(head.0);
                order.rotate_left(head.0);
                let len = pref.len();
                for a in &mut pref[len - head.0..] {
                    *a += TAU;
                }
                continue;
            }
        }
        break;
    }

    let mut out = alloc::vec![0.0; n];
    let mut cursor = 0;
    for b in &blocks {
        let start = first_pos(b);
        for j in 0..b.0 {
            out[order[cursor]] = start + j as f64 * step;
            cursor += 1;
        }
    }
    out
}

/// Nearest icon within one icon radius of `point`; equal distances go to the
/// lower object id.
pub fn pick_from_minimap(layout: &MinimapLayout, point: Vec2) -> Option<ObjectId> {
    layout
        .icons
        .iter()
        .map(|i| (i.map_position.distance(point), i.object_id))
        .filter(|&(d, _)| d <= layout.icon_radius)
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, id)| id)
}
