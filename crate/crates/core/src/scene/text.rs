//! Line-oriented scene format.
//!
//! ```text
//! scene level=low num_targets=1 seed=42
//! 0 cube purple -1.234567 2.000000 5.500000 0.100000 3.000000 6.200000 0
//! ```
//!
//! One object per line: `id shape color x y z yaw pitch roll target_flag`,
//! reals with six decimals. Rust float formatting is locale-free, so equal
//! scenes always produce equal bytes.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::{
    ColorKind, ObjectId, Orientation, PerplexityLevel, Scene, SceneError, SceneObject, ShapeKind,
    TargetCount, BOUNDING_RADIUS,
};
use crate::geometry::Vec3;

impl Scene {
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(64 + self.objects.len() * 80);
        let _ = writeln!(
            out,
            "scene level={} num_targets={} seed={}",
            self.perplexity.token(),
            self.num_targets,
            self.seed
        );
        for o in &self.objects {
            write_object(&mut out, o);
        }
        out
    }

    /// Serialization of the distractor lines only.
    pub fn distractors_text(&self) -> String {
        let mut out = String::new();
        for o in self.distractors() {
            write_object(&mut out, o);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Scene, SceneError> {
        let err = |line: usize, message: &str| SceneError::Parse {
            line,
            message: message.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("scene") {
            return Err(err(hline, "header must start with `scene`"));
        }
        let mut level = None;
        let mut num_targets = None;
        let mut seed = None;
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| err(hline, "expected key=value"))?;
            match k {
                "level" => level = v.parse::<PerplexityLevel>().ok(),
                "num_targets" => {
                    num_targets = v.parse::<usize>().ok().and_then(TargetCount::from_count)
                }
                "seed" => seed = v.parse::<u64>().ok(),
                _ => return Err(err(hline, "unknown header key")),
            }
        }
        let level = level.ok_or_else(|| err(hline, "bad or missing level"))?;
        let num_targets = num_targets.ok_or_else(|| err(hline, "bad or missing num_targets"))?;
        let seed = seed.ok_or_else(|| err(hline, "bad or missing seed"))?;

        let mut objects = Vec::new();
        for (n, line) in lines {
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 10 {
                return Err(err(n, "expected 10 columns"));
            }
            let real = |i: usize| -> Result<f64, SceneError> {
                cols[i]
                    .parse::<f64>()
                    .map_err(|_| err(n, &format!("column {} is not a number", i + 1)))
            };
            objects.push(SceneObject {
                id: ObjectId(cols[0].parse().map_err(|_| err(n, "bad id"))?),
                shape: cols[1].parse::<ShapeKind>().map_err(|_| err(n, "unknown shape"))?,
                color: cols[2].parse::<ColorKind>().map_err(|_| err(n, "unknown color"))?,
                position: Vec3::new(real(3)?, real(4)?, real(5)?),
                orientation: Orientation {
                    yaw: real(6)?,
                    pitch: real(7)?,
                    roll: real(8)?,
                },
                bounding_radius: BOUNDING_RADIUS,
                is_target: match cols[9] {
                    "1" => true,
                    "0" => false,
                    _ => return Err(err(n, "target flag must be 0 or 1")),
                },
            });
        }
        Ok(Scene::from_objects(level, num_targets, seed, objects))
    }
}

fn write_object(out: &mut String, o: &SceneObject) {
    let _ = writeln!(
        out,
        "{} {} {} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {}",
        o.id,
        o.shape.token(),
        o.color.token(),
        o.position.x,
        o.position.y,
        o.position.z,
        o.orientation.yaw,
        o.orientation.pitch,
        o.orientation.roll,
        u8::from(o.is_target)
    );
}
