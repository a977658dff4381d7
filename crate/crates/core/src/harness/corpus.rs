//! Deterministic test domains.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{rasterize, Alignment, Bounds, GridDomain};
use crate::error::{Error, Result};

/// Shape parameters, in coordinates before normalization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum Generator {
    /// Disk of the given radius centered at the origin.
    Ball { radius: f64 },
    /// Axis-aligned square `[0, side]^2`.
    Square { side: f64 },
    /// Two disks joined by a horizontal neck. `neck_length` is the gap
    /// between the disks; a zero right radius leaves the neck as a free tail.
    Dumbbell {
        left_radius: f64,
        right_radius: f64,
        neck_width: f64,
        neck_length: f64,
    },
    /// Rectangle `[0, length] x [0, width]`.
    Tube { length: f64, width: f64 },
    /// Union of random disks with centers in `[-spread, spread]^2`.
    BlobUnion {
        count: usize,
        min_radius: f64,
        max_radius: f64,
        spread: f64,
    },
    /// Unit square minus a regular grid of `holes` disks, each center moved
    /// by a random offset of at most `jitter`.
    Perforated {
        holes: usize,
        hole_radius: f64,
        jitter: f64,
    },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Ball { .. } => "ball",
            Generator::Square { .. } => "square",
            Generator::Dumbbell { .. } => "dumbbell",
            Generator::Tube { .. } => "tube",
            Generator::BlobUnion { .. } => "blob_union",
            Generator::Perforated { .. } => "perforated",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub id: String,
    #[serde(flatten)]
    pub generator: Generator,
    pub h: f64,
    pub seed: u64,
    #[serde(default)]
    pub alignment: Alignment,
    /// Rescale to unit measure after rasterizing.
    #[serde(default = "yes")]
    pub normalize: bool,
}

fn yes() -> bool {
    true
}

impl CorpusSpec {
    pub fn new(id: &str, generator: Generator, h: f64, seed: u64) -> Self {
        CorpusSpec {
            id: id.to_owned(),
            generator,
            h,
            seed,
            alignment: Alignment::CellCentered,
            normalize: true,
        }
    }
}

fn degenerate(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

fn require_width(name: &str, w: f64, h: f64) -> Result<()> {
    if w < 2.0 * h || !w.is_finite() {
        return Err(degenerate(format!(
            "{name} {w} is below two cells (2h = {})",
            2.0 * h
        )));
    }
    Ok(())
}

fn disk(c: [f64; 2], r: f64, p: [f64; 2]) -> bool {
    let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
    dx * dx + dy * dy < r * r
}

pub fn generate(spec: &CorpusSpec) -> Result<GridDomain> {
    let h = spec.h;
    if !(h > 0.0 && h.is_finite()) {
        return Err(degenerate(format!("spacing must be positive, got {h}")));
    }
    let al = spec.alignment;
    let d = match spec.generator {
        Generator::Ball { radius } => {
            require_width("radius", radius, h)?;
            rasterize(
                |p| disk([0.0, 0.0], radius, p),
                Bounds::new([-radius; 2], [radius; 2]),
                h,
                al,
            )?
        }
        Generator::Square { side } => {
            require_width("side", side, h)?;
            rasterize(
                |p| p[0] > 0.0 && p[0] < side && p[1] > 0.0 && p[1] < side,
                Bounds::new([0.0; 2], [side; 2]),
                h,
                al,
            )?
        }
        Generator::Tube { length, width } => {
            require_width("tube width", width, h)?;
            require_width("tube length", length, h)?;
            rasterize(
                |p| p[0] > 0.0 && p[0] < length && p[1] > 0.0 && p[1] < width,
                Bounds::new([0.0; 2], [length, width]),
                h,
                al,
            )?
        }
        Generator::Dumbbell {
            left_radius,
            right_radius,
            neck_width,
            neck_length,
        } => {
            require_width("left radius", left_radius, h)?;
            require_width("neck width", neck_width, h)?;
            require_width("neck length", neck_length, h)?;
            if right_radius != 0.0 {
                require_width("right radius", right_radius, h)?;
            }
            let lc = [-left_radius, 0.0];
            let rc = [neck_length + right_radius, 0.0];
            let half = neck_width / 2.0;
            // the neck reaches halfway into each disk so it is always attached
            let neck_hi = if right_radius > 0.0 {
                rc[0]
            } else {
                neck_length
            };
            let inside = |p: [f64; 2]| {
                disk(lc, left_radius, p)
                    || (right_radius > 0.0 && disk(rc, right_radius, p))
                    || (p[0] > lc[0] && p[0] < neck_hi && p[1].abs() < half)
            };
            let r = left_radius.max(right_radius).max(half);
            rasterize(
                inside,
                Bounds::new(
                    [-2.0 * left_radius, -r],
                    [neck_length + 2.0 * right_radius, r],
                ),
                h,
                al,
            )?
        }
        Generator::BlobUnion {
            count,
            min_radius,
            max_radius,
            spread,
        } => {
            if count == 0 || !(min_radius <= max_radius) {
                return Err(degenerate(format!(
                    "blob union needs count >= 1 and min_radius <= max_radius, got {count}, {min_radius}, {max_radius}"
                )));
            }
            require_width("blob radius", min_radius, h)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let blobs: Vec<([f64; 2], f64)> = (0..count)
                .map(|_| {
                    let c = [
                        rng.random_range(-spread..=spread),
                        rng.random_range(-spread..=spread),
                    ];
                    let r = if max_radius > min_radius {
                        rng.random_range(min_radius..max_radius)
                    } else {
                        min_radius
                    };
                    (c, r)
                })
                .collect();
            let ext = spread + max_radius;
            rasterize(
                |p| blobs.iter().any(|&(c, r)| disk(c, r, p)),
                Bounds::new([-ext; 2], [ext; 2]),
                h,
                al,
            )?
        }
        Generator::Perforated {
            holes,
            hole_radius,
            jitter,
        } => {
            let per_side = (holes as f64).sqrt().ceil().max(1.0) as usize;
            let pitch = 1.0 / per_side as f64;
            if holes > 0 && 2.0 * (hole_radius + jitter) >= pitch {
                return Err(degenerate(format!(
                    "holes of radius {hole_radius} with jitter {jitter} overlap at pitch {pitch}"
                )));
            }
            if holes > 0 {
                require_width("hole radius", hole_radius, h)?;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let centers: Vec<[f64; 2]> = (0..holes)
                .map(|n| {
                    let (a, b) = (n % per_side, n / per_side);
                    let mut jit = || {
                        if jitter > 0.0 {
                            rng.random_range(-jitter..=jitter)
                        } else {
                            0.0
                        }
                    };
                    [
                        (a as f64 + 0.5) * pitch + jit(),
                        (b as f64 + 0.5) * pitch + jit(),
                    ]
                })
                .collect();
            rasterize(
                |p| {
                    p[0] > 0.0
                        && p[0] < 1.0
                        && p[1] > 0.0
                        && p[1] < 1.0
                        && !centers.iter().any(|&c| disk(c, hole_radius, p))
                },
                Bounds::new([0.0; 2], [1.0; 2]),
                h,
                al,
            )?
        }
    };
    if d.is_empty() {
        return Err(degenerate(format!(
            "spec `{}` rasterizes to nothing at h = {h}",
            spec.id
        )));
    }
    if spec.normalize {
        d.normalized()
    } else {
        Ok(d)
    }
}

/// Radius of the disk of unit area.
pub fn unit_disk_radius() -> f64 {
    1.0 / PI.sqrt()
}

/// The twenty-domain corpus used for the inequality suite.
pub fn default_corpus(h: f64, seed: u64) -> Vec<CorpusSpec> {
    use Generator::*;
    let db = |l: f64, r: f64, w: f64, n: f64| Dumbbell {
        left_radius: l,
        right_radius: r,
        neck_width: w,
        neck_length: n,
    };
    let blob = |count: usize, spread: f64| BlobUnion {
        count,
        min_radius: 0.12,
        max_radius: 0.3,
        spread,
    };
    let items: Vec<(&str, Generator)> = vec![
        (
            "ball",
            Ball {
                radius: unit_disk_radius(),
            },
        ),
        ("square", Square { side: 1.0 }),
        (
            "tube-2x0.5",
            Tube {
                length: 2.0,
                width: 0.5,
            },
        ),
        (
            "tube-4x0.25",
            Tube {
                length: 4.0,
                width: 0.25,
            },
        ),
        (
            "tube-1.5x0.67",
            Tube {
                length: 1.5,
                width: 2.0 / 3.0,
            },
        ),
        (
            "tube-8x0.125",
            Tube {
                length: 8.0,
                width: 0.125,
            },
        ),
        ("dumbbell-sym", db(0.3, 0.3, 0.1, 0.5)),
        ("dumbbell-asym", db(0.35, 0.2, 0.06, 0.4)),
        ("dumbbell-long", db(0.3, 0.3, 0.05, 1.2)),
        ("dumbbell-thin", db(0.32, 0.32, 4.0 * h, 1.0)),
        ("tadpole", db(0.4, 0.0, 0.05, 0.8)),
        ("blobs-3", blob(3, 0.3)),
        ("blobs-4", blob(4, 0.35)),
        ("blobs-5", blob(5, 0.4)),
        ("blobs-6", blob(6, 0.45)),
        ("blobs-8-spread", blob(8, 0.9)),
        (
            "perforated-4",
            Perforated {
                holes: 4,
                hole_radius: 0.12,
                jitter: 0.0,
            },
        ),
        (
            "perforated-25",
            Perforated {
                holes: 25,
                hole_radius: 0.05,
                jitter: 0.02,
            },
        ),
        (
            "perforated-100",
            Perforated {
                holes: 100,
                hole_radius: 0.03,
                jitter: 0.01,
            },
        ),
        (
            "ball-node",
            Ball {
                radius: unit_disk_radius(),
            },
        ),
    ];
    items
        .into_iter()
        .enumerate()
        .map(|(n, (id, g))| {
            let mut s = CorpusSpec::new(id, g, h, seed.wrapping_add(n as u64));
            if id == "ball-node" {
                s.alignment = Alignment::NodeCentered;
            }
            s
        })
        .collect()
}

/// Ten dumbbells and tubes for the strip surgery: necks two or three cells
/// high and long enough to leave room for the cut bands.
pub fn surgery_corpus(h: f64, seed: u64) -> Vec<CorpusSpec> {
    use Generator::*;
    let db = |l: f64, r: f64, cells: f64, n: f64| Dumbbell {
        left_radius: l,
        right_radius: r,
        neck_width: cells * h,
        neck_length: n,
    };
    let items: Vec<(&str, Generator)> = vec![
        ("dumbbell-2h-3.0", db(0.38, 0.38, 2.0, 3.0)),
        ("dumbbell-2h-2.5", db(0.38, 0.38, 2.0, 2.5)),
        ("dumbbell-3h-3.0", db(0.38, 0.38, 3.0, 3.0)),
        ("dumbbell-asym-2h", db(0.45, 0.3, 2.0, 2.8)),
        ("dumbbell-small-2h", db(0.5, 0.15, 2.0, 2.5)),
        ("tadpole-2h", db(0.5, 0.0, 2.0, 2.0)),
        ("tadpole-3h", db(0.5, 0.0, 3.0, 1.5)),
        (
            "tube-4x0.25",
            Tube {
                length: 4.0,
                width: 0.25,
            },
        ),
        (
            "tube-2x0.5",
            Tube {
                length: 2.0,
                width: 0.5,
            },
        ),
        ("dumbbell-wide", db(0.3, 0.3, 0.1 / h, 0.5)),
    ];
    items
        .into_iter()
        .enumerate()
        .map(|(n, (id, g))| CorpusSpec::new(id, g, h, seed.wrapping_add(n as u64)))
        .collect()
}
