//! Scene model: the object vocabulary, perplexity palettes, generated search
//! spaces, and geometric queries over them.

mod enclose;
mod generate;
mod query;
mod text;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

pub use enclose::{min_enclosing_sphere, Sphere};
pub use generate::{generate_scene, MAX_PLACEMENT_ATTEMPTS};
pub use query::{occluded_set, ray_sphere_distance, raycast, Hit, PickResult, Ray};

/// Number of distractors in every generated scene.
pub const DISTRACTOR_COUNT: usize = 120;
/// Bounding radius shared by every shape, meters.
pub const BOUNDING_RADIUS: f64 = 0.25;
/// Search volume extents, meters. x spans `[-WIDTH/2, WIDTH/2]`, y spans
/// `[0, HEIGHT]`, z spans `[0, DEPTH]` with the viewer at the z = 0 face.
pub const SEARCH_WIDTH: f64 = 10.0;
pub const SEARCH_HEIGHT: f64 = 5.0;
pub const SEARCH_DEPTH: f64 = 20.0;
/// Standing eye height on the front face of the search volume.
pub const VIEWPOINT: Vec3 = Vec3::new(0.0, 1.6, 0.0);
/// Padding added around the targets' enclosing sphere.
pub const SEARCH_REGION_PAD: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("target pair {shape} {color} is not in the {level} palette")]
    TargetNotInPalette {
        level: PerplexityLevel,
        shape: ShapeKind,
        color: ColorKind,
    },
    #[error("placement of object {index} exceeded {attempts} rejection-sampling attempts")]
    GenerationOverflow { index: usize, attempts: usize },
    #[error("scene text line {line}: {message}")]
    Parse { line: usize, message: alloc::string::String },
}

macro_rules! vocab_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $token:literal, $display:literal;)* }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant,)*
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant,)*];

            /// Stable single-word token used in text formats.
            pub fn token(self) -> &'static str {
                match self {
                    $($name::$variant => $token,)*
                }
            }

            /// Human-readable name, as a person would say it.
            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $display,)*
                }
            }

            pub fn index(self) -> usize {
                self as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = ();
            /// Accepts the token, the display name, or the variant name, case-insensitively.
            fn from_str(s: &str) -> Result<Self, ()> {
                $(
                    if s.eq_ignore_ascii_case($token)
                        || s.eq_ignore_ascii_case($display)
                        || s.eq_ignore_ascii_case(stringify!($variant))
                    {
                        return Ok($name::$variant);
                    }
                )*
                Err(())
            }
        }
    };
}

vocab_enum!(
    /// Object geometry category.
    ShapeKind {
        Cube => "cube", "cube";
        Sphere => "sphere", "sphere";
        Cylinder => "cylinder", "cylinder";
        Pyramid => "pyramid", "pyramid";
        PyramidCuboid => "pyramid_cuboid", "pyramid cuboid";
        Barrel => "barrel", "barrel";
        TruncatedCylinder => "truncated_cylinder", "truncated cylinder";
        Cross => "cross", "cross";
    }
);

vocab_enum!(
    /// Object material: a plain color or a patterned texture.
    ColorKind {
        Green => "green", "green";
        Purple => "purple", "purple";
        Blue => "blue", "blue";
        Red => "red", "red";
        WhitePattern => "white_pattern", "white pattern";
        PurplePattern => "purple_pattern", "purple pattern";
        BluePattern => "blue_pattern", "blue pattern";
        YellowPattern => "yellow_pattern", "yellow pattern";
    }
);

vocab_enum!(
    /// How hard the scene's objects are to name verbally.
    PerplexityLevel {
        Low => "low", "Low";
        Medium => "medium", "Medium";
        High => "high", "High";
    }
);

/// Number of targets in a trial: 1, 2 or 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum TargetCount {
    One,
    Two,
    Four,
}

impl TargetCount {
    pub const ALL: [TargetCount; 3] = [TargetCount::One, TargetCount::Two, TargetCount::Four];

    pub fn count(self) -> usize {
        match self {
            TargetCount::One => 1,
            TargetCount::Two => 2,
            TargetCount::Four => 4,
        }
    }
}

impl From<TargetCount> for u8 {
    fn from(t: TargetCount) -> u8 {
        t.count() as u8
    }
}

impl TryFrom<u8> for TargetCount {
    type Error = alloc::string::String;
    fn try_from(n: u8) -> Result<Self, Self::Error> {
        TargetCount::from_count(n as usize)
            .ok_or_else(|| alloc::format!("num_targets must be 1, 2 or 4, got {n}"))
    }
}

impl TargetCount {
    pub fn from_count(n: usize) -> Option<TargetCount> {
        match n {
            1 => Some(TargetCount::One),
            2 => Some(TargetCount::Two),
            4 => Some(TargetCount::Four),
            _ => None,
        }
    }
}

impl fmt::Display for TargetCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count())
    }
}

/// Opaque object handle, unique within a scene.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Yaw, pitch, roll in radians.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: ObjectId,
    pub shape: ShapeKind,
    pub color: ColorKind,
    pub position: Vec3,
    pub orientation: Orientation,
    pub bounding_radius: f64,
    pub is_target: bool,
}

impl SceneObject {
    /// The (shape, color) "material name" speech commands resolve against.
    pub fn pair(&self) -> (ShapeKind, ColorKind) {
        (self.shape, self.color)
    }
}

/// The four shapes and four colors a perplexity level draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Palette {
    pub shapes: [ShapeKind; 4],
    pub colors: [ColorKind; 4],
}

impl Palette {
    /// All 16 (shape, color) pairs, shape-major.
    pub fn pairs(&self) -> [(ShapeKind, ColorKind); 16] {
        let mut out = [(self.shapes[0], self.colors[0]); 16];
        for (i, &s) in self.shapes.iter().enumerate() {
            for (j, &c) in self.colors.iter().enumerate() {
                out[i * 4 + j] = (s, c);
            }
        }
        out
    }

    pub fn pair_index(&self, pair: (ShapeKind, ColorKind)) -> Option<usize> {
        let s = self.shapes.iter().position(|&x| x == pair.0)?;
        let c = self.colors.iter().position(|&x| x == pair.1)?;
        Some(s * 4 + c)
    }

    pub fn contains(&self, pair: (ShapeKind, ColorKind)) -> bool {
        self.pair_index(pair).is_some()
    }
}

pub fn palette_for(level: PerplexityLevel) -> Palette {
    use ColorKind::*;
    use ShapeKind::*;
    match level {
        PerplexityLevel::Low => Palette {
            shapes: [Cube, Sphere, Cylinder, Pyramid],
            colors: [Purple, Blue, Green, Red],
        },
        PerplexityLevel::Medium => Palette {
            shapes: [Cube, Sphere, Barrel, PyramidCuboid],
            colors: [Purple, Blue, PurplePattern, WhitePattern],
        },
        PerplexityLevel::High => Palette {
            shapes: [Barrel, Cross, PyramidCuboid, TruncatedCylinder],
            colors: [PurplePattern, WhitePattern, YellowPattern, BluePattern],
        },
    }
}

/// A generated search space: 120 distractors plus 1, 2 or 4 identical targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub perplexity: PerplexityLevel,
    pub num_targets: TargetCount,
    pub seed: u64,
    pub target_pair: (ShapeKind, ColorKind),
    pub objects: Vec<SceneObject>,
    /// Approximate target location shown to the user.
    pub search_region: Sphere,
}

impl Scene {
    pub fn object(&self, id: ObjectId) -> Option<&SceneObject> {
        // Generated scenes use dense ids; fall back to a scan for hand-built ones.
        match self.objects.get(id.0 as usize) {
            Some(o) if o.id == id => Some(o),
            _ => self.objects.iter().find(|o| o.id == id),
        }
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.object(id).is_some()
    }

    pub fn targets(&self) -> impl Iterator<Item = &SceneObject> {
        self.objects.iter().filter(|o| o.is_target)
    }

    pub fn distractors(&self) -> impl Iterator<Item = &SceneObject> {
        self.objects.iter().filter(|o| !o.is_target)
    }

    pub fn target_ids(&self) -> Vec<ObjectId> {
        self.targets().map(|o| o.id).collect()
    }

    /// Builds a scene from explicit objects; the target pair and search region
    /// are derived from the objects flagged as targets.
    pub fn from_objects(
        perplexity: PerplexityLevel,
        num_targets: TargetCount,
        seed: u64,
        objects: Vec<SceneObject>,
    ) -> Scene {
        let target_pair = objects
            .iter()
            .find(|o| o.is_target)
            .map(|o| o.pair())
            .unwrap_or((ShapeKind::Cube, ColorKind::Purple));
        let centers: Vec<Vec3> = objects.iter().filter(|o| o.is_target).map(|o| o.position).collect();
        let search_region = search_region_for(&centers);
        Scene {
            perplexity,
            num_targets,
            seed,
            target_pair,
            objects,
            search_region,
        }
    }
}

pub(crate) fn search_region_for(target_centers: &[Vec3]) -> Sphere {
    match min_enclosing_sphere(target_centers) {
        Some(s) => Sphere {
            center: s.center,
            radius: s.radius + SEARCH_REGION_PAD,
        },
        None => Sphere {
            center: VIEWPOINT,
            radius: 0.0,
        },
    }
}

/// True when the point lies strictly inside the search volume.
pub fn inside_search_space(p: Vec3) -> bool {
    p.x > -SEARCH_WIDTH / 2.0
        && p.x < SEARCH_WIDTH / 2.0
        && p.y > 0.0
        && p.y < SEARCH_HEIGHT
        && p.z > 0.0
        && p.z < SEARCH_DEPTH
}
