//! Procedurally rendered 8×8 grayscale digits. Each class is a fixed set of
//! strokes; every image applies its own random affine jitter, stroke width,
//! contrast and pixel noise. Two rendering sources share the stroke
//! templates but differ in their jitter and noise process, which gives the
//! out-of-sample set for data-transfer experiments.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::Example;
use crate::par;
use crate::rng::child_rng;

pub const SIDE: usize = 8;
pub const CLASSES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Desk,
    Shifted,
}

impl Source {
    pub fn tag(self) -> &'static str {
        match self {
            Source::Desk => "desk",
            Source::Shifted => "shifted",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Source::Desk),
            "shifted" => Ok(Source::Shifted),
            _ => Err(Error::InvalidParameter(format!("unknown image source `{s}`"))),
        }
    }
}

struct Style {
    rotation: f64,
    shear: f64,
    scale: (f64, f64),
    shift: f64,
    width: (f64, f64),
    ink: (f64, f64),
    background: f64,
    noise: f64,
}

impl Source {
    fn style(self) -> Style {
        match self {
            Source::Desk => Style {
                rotation: 0.15,
                shear: 0.0,
                scale: (0.85, 1.1),
                shift: 0.06,
                width: (0.055, 0.085),
                ink: (0.85, 1.0),
                background: 0.0,
                noise: 0.03,
            },
            Source::Shifted => Style {
                rotation: 0.2,
                shear: 0.15,
                scale: (0.8, 1.05),
                shift: 0.08,
                width: (0.07, 0.1),
                ink: (0.7, 0.9),
                background: 0.06,
                noise: 0.05,
            },
        }
    }
}

type Seg = ((f64, f64), (f64, f64));

const TL: (f64, f64) = (0.25, 0.15);
const TR: (f64, f64) = (0.75, 0.15);
const ML: (f64, f64) = (0.25, 0.5);
const MR: (f64, f64) = (0.75, 0.5);
const BL: (f64, f64) = (0.25, 0.85);
const BR: (f64, f64) = (0.75, 0.85);

fn strokes(class: usize) -> &'static [Seg] {
    const D0: &[Seg] = &[(TL, TR), (TR, BR), (BR, BL), (BL, TL)];
    const D1: &[Seg] = &[((0.5, 0.15), (0.5, 0.85)), ((0.33, 0.3), (0.5, 0.15))];
    const D2: &[Seg] = &[(TL, TR), (TR, MR), (MR, BL), (BL, BR)];
    const D3: &[Seg] = &[(TL, TR), (TR, BR), (BL, BR), ((0.4, 0.5), MR)];
    const D4: &[Seg] = &[(TL, ML), (ML, MR), (TR, BR)];
    const D5: &[Seg] = &[(TR, TL), (TL, ML), (ML, MR), (MR, BR), (BR, BL)];
    const D6: &[Seg] = &[(TR, TL), (TL, BL), (BL, BR), (BR, MR), (MR, ML)];
    const D7: &[Seg] = &[(TL, TR), (TR, (0.42, 0.85))];
    const D8: &[Seg] = &[(TL, TR), (TR, BR), (BR, BL), (BL, TL), (ML, MR)];
    const D9: &[Seg] = &[(MR, ML), (ML, TL), (TL, TR), (TR, BR), (BR, BL)];
    [D0, D1, D2, D3, D4, D5, D6, D7, D8, D9][class]
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    let (qx, qy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    (qx * qx + qy * qy).sqrt()
}

/// Renders one image of `class` with randomness drawn from `rng`.
pub fn render<R: Rng + ?Sized>(class: usize, source: Source, rng: &mut R) -> Vec<f64> {
    let s = source.style();
    let theta = rng.random_range(-s.rotation..=s.rotation);
    let shear = if s.shear > 0.0 { rng.random_range(-s.shear..=s.shear) } else { 0.0 };
    let scale = rng.random_range(s.scale.0..=s.scale.1);
    let (tx, ty) = (rng.random_range(-s.shift..=s.shift), rng.random_range(-s.shift..=s.shift));
    let width = rng.random_range(s.width.0..=s.width.1);
    let ink = rng.random_range(s.ink.0..=s.ink.1);
    let (sin, cos) = theta.sin_cos();
    let map = |(x, y): (f64, f64)| {
        let (u, v) = ((x - 0.5) * scale, (y - 0.5) * scale);
        let u = u + shear * v;
        (0.5 + cos * u - sin * v + tx, 0.5 + sin * u + cos * v + ty)
    };
    let segs: Vec<Seg> = strokes(class).iter().map(|&(a, b)| (map(a), map(b))).collect();
    let mut img = Vec::with_capacity(SIDE * SIDE);
    for row in 0..SIDE {
        for col in 0..SIDE {
            let p = ((col as f64 + 0.5) / SIDE as f64, (row as f64 + 0.5) / SIDE as f64);
            let d = segs.iter().map(|&(a, b)| segment_distance(p, a, b)).fold(f64::INFINITY, f64::min);
            let stroke = (-(d * d) / (2.0 * width * width)).exp();
            let e: f64 = rng.sample(StandardNormal);
            img.push((s.background + ink * stroke + s.noise * e).clamp(0.0, 1.0));
        }
    }
    img
}

/// `count` images with labels cycling through the classes; image `i` uses
/// stream `i` of `seed`.
pub fn generate(source: Source, count: usize, seed: u64) -> Vec<Example> {
    par::map_range(count, |i| {
        let label = i % CLASSES;
        let mut rng = child_rng(seed, i as u64);
        Example { input: render(label, source, &mut rng), label }
    })
}
