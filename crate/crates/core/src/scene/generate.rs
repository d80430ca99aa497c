use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{
    palette_for, search_region_for, ColorKind, ObjectId, Orientation, PerplexityLevel, Scene,
    SceneError, SceneObject, ShapeKind, TargetCount, BOUNDING_RADIUS, DISTRACTOR_COUNT,
    SEARCH_DEPTH, SEARCH_HEIGHT, SEARCH_WIDTH,
};
use crate::geometry::Vec3;
use crate::rng;

pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

/// Objects start this far in front of the viewer so the viewpoint is never
/// inside a bounding sphere.
const MIN_DEPTH: f64 = 1.0;

const STREAM_DISTRACTORS: u64 = 0xD157;
const STREAM_TARGET_PAIR: u64 = 0x7A6E;
const STREAM_TARGET_PLACEMENT: u64 = 0x7A91;

/// Generates a scene.
///
/// Distractor positions, orientations and nominal materials come from a
/// stream keyed by `(level, seed)` alone. Each distractor draws a nominal pair
/// from all 16 palette pairs plus a fallback from the 15 non-target pairs; the
/// fallback is used only when the nominal pair equals the target pair. Both
/// draws always happen, so stream consumption never depends on the target and
/// distractors are identical across target counts and across targets except
/// where a distractor would duplicate the target's material. The marginal
/// distribution over the 15 non-target pairs stays uniform.
pub fn generate_scene(
    level: PerplexityLevel,
    num_targets: TargetCount,
    seed: u64,
    target_override: Option<(ShapeKind, ColorKind)>,
) -> Result<Scene, SceneError> {
    let palette = palette_for(level);
    let pairs = palette.pairs();
    let level_word = level.index() as u64;

    let target_index = match target_override {
        Some(pair) => palette
            .pair_index(pair)
            .ok_or(SceneError::TargetNotInPalette {
                level,
                shape: pair.0,
                color: pair.1,
            })?,
        None => rng::stream(seed, &[STREAM_TARGET_PAIR, level_word]).random_range(0..16),
    };
    let target_pair = pairs[target_index];
    let others: Vec<(ShapeKind, ColorKind)> = pairs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target_index)
        .map(|(_, &p)| p)
        .collect();

    let mut objects = Vec::with_capacity(DISTRACTOR_COUNT + num_targets.count());
    let mut centers: Vec<Vec3> = Vec::with_capacity(DISTRACTOR_COUNT + num_targets.count());

    let mut stream = rng::stream(seed, &[STREAM_DISTRACTORS, level_word]);
    for index in 0..DISTRACTOR_COUNT {
        let position = place(&mut stream, &centers, index)?;
        let orientation = orientation(&mut stream);
        let nominal = stream.random_range(0..16usize);
        let fallback = stream.random_range(0..15usize);
        let pair = if nominal == target_index {
            others[fallback]
        } else {
            pairs[nominal]
        };
        centers.push(position);
        objects.push(SceneObject {
            id: ObjectId(index as u32),
            shape: pair.0,
            color: pair.1,
            position,
            orientation,
            bounding_radius: BOUNDING_RADIUS,
            is_target: false,
        });
    }

    let mut stream = rng::stream(
        seed,
        &[
            STREAM_TARGET_PLACEMENT,
            level_word,
            num_targets.count() as u64,
            target_index as u64,
        ],
    );
    for k in 0..num_targets.count() {
        let index = DISTRACTOR_COUNT + k;
        let position = place(&mut stream, &centers, index)?;
        let orientation = orientation(&mut stream);
        centers.push(position);
        objects.push(SceneObject {
            id: ObjectId(index as u32),
            shape: target_pair.0,
            color: target_pair.1,
            position,
            orientation,
            bounding_radius: BOUNDING_RADIUS,
            is_target: true,
        });
    }

    let search_region = search_region_for(&centers[DISTRACTOR_COUNT..]);
    Ok(Scene {
        perplexity: level,
        num_targets,
        seed,
        target_pair,
        objects,
        search_region,
    })
}

/// Rejection-samples a center whose sphere fits inside the search volume and
/// does not overlap any already placed sphere. All spheres share one radius.
fn place(stream: &mut ChaCha8Rng, placed: &[Vec3], index: usize) -> Result<Vec3, SceneError> {
    let r = BOUNDING_RADIUS;
    let min_gap = 2.0 * r;
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let p = Vec3::new(
            stream.random_range((-SEARCH_WIDTH / 2.0 + r)..(SEARCH_WIDTH / 2.0 - r)),
            stream.random_range(r..(SEARCH_HEIGHT - r)),
            stream.random_range(MIN_DEPTH..(SEARCH_DEPTH - r)),
        );
        if placed.iter().all(|q| q.distance(p) >= min_gap) {
            return Ok(p);
        }
    }
    Err(SceneError::GenerationOverflow {
        index,
        attempts: MAX_PLACEMENT_ATTEMPTS,
    })
}

fn orientation(stream: &mut ChaCha8Rng) -> Orientation {
    Orientation {
        yaw: stream.random_range(0.0..TAU),
        pitch: stream.random_range(0.0..TAU),
        roll: stream.random_range(0.0..TAU),
    }
}
