//! Synthetic two-view scenes with known alignment and object masks.
//!
//! A scene is rendered once in scene coordinates and cropped into two views
//! of equal size: the target covers scene columns `[0, width)`, the reference
//! `[shift, shift + width)`. The reference therefore sees each target pixel
//! `shift` columns further left, and the stitched canvas coincides with the
//! scene. Objects may move between the views (`displacement`), and the
//! background may shift by `parallax` columns in the reference to mimic depth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::Homography;
use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, Dims, Image};

const STREAM_BACKGROUND: u64 = 0;
const STREAM_JITTER_T: u64 = 1;
const STREAM_JITTER_R: u64 = 2;
const STREAM_LAYOUT: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Background {
    /// Smooth colour ramp across the scene.
    Gradient,
    /// Two-tone checkerboard with square cells.
    Checker { cell: usize },
    /// Independent uniform colour per scene pixel.
    Noise { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Disk,
    Rectangle,
}

/// A flat-coloured object. `center` is `(x, y)` in scene coordinates as seen
/// by the target; the reference sees it at `center + displacement`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthObject {
    pub shape: Shape,
    pub center: (f64, f64),
    /// Disk radius, or rectangle half-width (the half-height is 0.7 of it).
    pub size: f64,
    pub color: [f64; 3],
    #[serde(default)]
    pub displacement: (f64, f64),
}

impl SynthObject {
    fn half_extent(&self) -> (f64, f64) {
        match self.shape {
            Shape::Disk => (self.size, self.size),
            Shape::Rectangle => (self.size, 0.7 * self.size),
        }
    }

    fn contains(&self, x: f64, y: f64, (ox, oy): (f64, f64)) -> bool {
        let (dx, dy) = (x - self.center.0 - ox, y - self.center.1 - oy);
        match self.shape {
            Shape::Disk => dx * dx + dy * dy <= self.size * self.size,
            Shape::Rectangle => {
                let (hx, hy) = self.half_extent();
                dx.abs() <= hx && dy.abs() <= hy
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Height of each view.
    pub height: usize,
    /// Width of each view.
    pub width: usize,
    /// Fraction of the view width shared by both views.
    pub overlap: f64,
    pub background: Background,
    /// Extra background shift in the reference, in columns.
    #[serde(default)]
    pub parallax: i64,
    #[serde(default)]
    pub objects: Vec<SynthObject>,
    /// Per-pixel, per-channel uniform noise amplitude, drawn independently per view.
    #[serde(default)]
    pub jitter: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SynthSpec {
    pub fn overlap_columns(&self) -> usize {
        (self.overlap * self.width as f64).round() as usize
    }

    /// Column offset of the reference view in the scene.
    pub fn shift(&self) -> usize {
        self.width - self.overlap_columns()
    }

    pub fn scene_dims(&self) -> Dims {
        Dims::new(self.height, self.width + self.shift())
    }

    pub fn view_dims(&self) -> Dims {
        Dims::new(self.height, self.width)
    }

    pub fn validate(&self) -> Result<()> {
        if self.height < 16 || self.width < 16 {
            return Err(Error::TooSmall {
                what: "synthetic view",
                height: self.height,
                width: self.width,
                min: 16,
            });
        }
        if !(self.overlap > 0.0 && self.overlap < 1.0) {
            return Err(Error::Config(format!(
                "overlap fraction {} outside (0, 1)",
                self.overlap
            )));
        }
        if self.overlap * (self.width as f64) < 8.0 || self.overlap_columns() >= self.width {
            return Err(Error::Config(
                "overlap must span at least 8 columns and leave both views an exclusive part".into(),
            ));
        }
        if !(0.0..=0.5).contains(&self.jitter) {
            return Err(Error::Config(format!("jitter {} outside [0, 0.5]", self.jitter)));
        }
        if let Background::Checker { cell: 0 } = self.background {
            return Err(Error::Config("checker cell must be positive".into()));
        }
        let scene = self.scene_dims();
        for (index, o) in self.objects.iter().enumerate() {
            let colour_ok = o.color.iter().all(|c| (0.0..=1.0).contains(c));
            if !(o.size > 0.0 && o.size.is_finite()) || !colour_ok {
                return Err(Error::Config(format!(
                    "object {index} needs a positive size and colour in [0, 1]"
                )));
            }
            let (hx, hy) = o.half_extent();
            for (ox, oy) in [(0.0, 0.0), o.displacement] {
                let (cx, cy) = (o.center.0 + ox, o.center.1 + oy);
                let inside = cx - hx >= 0.0
                    && cy - hy >= 0.0
                    && cx + hx <= (scene.width - 1) as f64
                    && cy + hy <= (scene.height - 1) as f64;
                if !inside {
                    return Err(Error::ObjectOutsideCanvas { index });
                }
            }
        }
        Ok(())
    }
}

/// A rendered pair with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthPair {
    pub target: Image,
    pub reference: Image,
    /// Maps target pixel coordinates to reference pixel coordinates.
    pub homography: Homography,
    /// Union of the rendered object footprints on the stitched canvas.
    pub objects: BinaryMask,
    /// Object footprint in target view coordinates.
    pub target_objects: BinaryMask,
    /// Object footprint in reference view coordinates.
    pub reference_objects: BinaryMask,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Background colours for scene columns `x0..x0 + width`.
fn render_background(bg: Background, height: usize, x0: i64, width: usize, scene: Dims) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(height * width);
    let mut noise = match bg {
        Background::Noise { seed } => Some(rng(seed, STREAM_BACKGROUND)),
        _ => None,
    };
    for i in 0..height {
        for c in 0..width {
            let x = x0 + c as i64;
            let px = match bg {
                Background::Gradient => {
                    let u = x as f64 / scene.width.max(2) as f64;
                    let v = i as f64 / scene.height.max(2) as f64;
                    [0.2 + 0.6 * u, 0.3 + 0.4 * v, 0.8 - 0.5 * u]
                }
                Background::Checker { cell } => {
                    let on = (x.div_euclid(cell as i64) + (i / cell) as i64) % 2 == 0;
                    if on {
                        [0.75, 0.7, 0.65]
                    } else {
                        [0.25, 0.3, 0.35]
                    }
                }
                Background::Noise { .. } => {
                    let r = noise.as_mut().expect("noise generator");
                    [r.gen_range(0.1..0.9), r.gen_range(0.1..0.9), r.gen_range(0.1..0.9)]
                }
            };
            out.push(px);
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn render_view(
    spec: &SynthSpec,
    bg: &[[f64; 3]],
    bg_x0: i64,
    bg_width: usize,
    view_x0: i64,
    bg_offset: i64,
    moved: bool,
    jitter_stream: u64,
) -> (Image, BinaryMask) {
    let d = spec.view_dims();
    let mut footprint = BinaryMask::zeros(d);
    let mut jit = rng(spec.seed, jitter_stream);
    let img = Image::from_fn(d, |i, j| {
        let x = view_x0 + j as i64;
        let bx = (x + bg_offset - bg_x0) as usize;
        let mut px = bg[i * bg_width + bx];
        for o in &spec.objects {
            let off = if moved { o.displacement } else { (0.0, 0.0) };
            if o.contains(x as f64, i as f64, off) {
                px = o.color;
                footprint.set(i, j, true);
            }
        }
        if spec.jitter > 0.0 {
            for c in &mut px {
                *c = (*c + jit.gen_range(-spec.jitter..=spec.jitter)).clamp(0.0, 1.0);
            }
        }
        px
    });
    (img, footprint)
}

/// Renders the two views of `spec`. Identical specs give bit-identical pairs.
pub fn synth_pair(spec: &SynthSpec) -> Result<SynthPair> {
    spec.validate()?;
    let scene = spec.scene_dims();
    let shift = spec.shift() as i64;
    let bg_x0 = spec.parallax.min(0);
    let bg_width = (scene.width as i64 + spec.parallax.max(0) - bg_x0) as usize;
    let bg = render_background(spec.background, spec.height, bg_x0, bg_width, scene);

    let (target, target_objects) = render_view(spec, &bg, bg_x0, bg_width, 0, 0, false, STREAM_JITTER_T);
    let (reference, reference_objects) =
        render_view(spec, &bg, bg_x0, bg_width, shift, spec.parallax, true, STREAM_JITTER_R);

    let w = spec.width;
    let objects = BinaryMask::from_fn(scene, |i, j| {
        (j < w && target_objects.get(i, j)) || (j as i64 >= shift && reference_objects.get(i, j - shift as usize))
    });
    Ok(SynthPair {
        target,
        reference,
        homography: Homography::translation(-(shift as f64), 0.0),
        objects,
        target_objects,
        reference_objects,
    })
}

/// Parameter grid for a suite of adversarial pairs.
///
/// Pair `k` uses seed `seed_start + k` and cycles through every combination
/// of displacement, jitter and shape. Each pair holds one flat object placed
/// inside the overlap, over a background that shifts by `parallax` columns
/// between the views, so the photometrically cheapest seams run through the
/// object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub pairs: usize,
    pub seed_start: u64,
    pub height: usize,
    pub width: usize,
    pub overlap: f64,
    /// Noise seeds are offset by the pair seed.
    pub background: Background,
    pub parallax: i64,
    pub displacements: Vec<f64>,
    pub jitters: Vec<f64>,
    pub shapes: Vec<Shape>,
    pub object_size: f64,
    /// Minimum distance between an object and the overlap border.
    pub margin: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            pairs: 60,
            seed_start: 0,
            height: 96,
            width: 128,
            overlap: 0.6,
            background: Background::Noise { seed: 0 },
            parallax: 3,
            displacements: vec![0.0, 5.0, 15.0],
            jitters: vec![0.0, 0.02],
            shapes: vec![Shape::Disk, Shape::Rectangle],
            object_size: 14.0,
            margin: 4.0,
        }
    }
}

impl SuiteConfig {
    /// Named specs, `synth_000`, `synth_001`, ...
    pub fn specs(&self) -> Result<Vec<(String, SynthSpec)>> {
        if self.pairs == 0 {
            return Err(Error::NoPairs("synthetic suite with zero pairs".into()));
        }
        if self.displacements.is_empty() || self.jitters.is_empty() || self.shapes.is_empty() {
            return Err(Error::Config(
                "suite needs at least one displacement, jitter and shape".into(),
            ));
        }
        let combos = self.displacements.len() * self.jitters.len() * self.shapes.len();
        (0..self.pairs)
            .map(|k| {
                let seed = self.seed_start + k as u64;
                let c = k % combos;
                let disp = self.displacements[c % self.displacements.len()];
                let jitter = self.jitters[(c / self.displacements.len()) % self.jitters.len()];
                let shape = self.shapes[c / (self.displacements.len() * self.jitters.len())];
                let spec = self.layout(seed, disp, jitter, shape)?;
                Ok((format!("synth_{seed:03}"), spec))
            })
            .collect()
    }

    fn layout(&self, seed: u64, disp: f64, jitter: f64, shape: Shape) -> Result<SynthSpec> {
        let background = match self.background {
            Background::Noise { seed: base } => Background::Noise {
                seed: base.wrapping_add(seed),
            },
            b => b,
        };
        let mut spec = SynthSpec {
            height: self.height,
            width: self.width,
            overlap: self.overlap,
            background,
            parallax: self.parallax,
            objects: Vec::new(),
            jitter,
            seed,
        };
        let mut r = rng(seed, STREAM_LAYOUT);
        let angle = r.gen_range(0.0..std::f64::consts::TAU);
        let (dx, dy) = (disp * angle.cos(), disp * angle.sin());
        let probe = SynthObject {
            shape,
            center: (0.0, 0.0),
            size: self.object_size,
            color: [0.0; 3],
            displacement: (dx, dy),
        };
        let (hx, hy) = probe.half_extent();
        let (ov0, ov1) = (spec.shift() as f64, (self.width - 1) as f64);
        let x_lo = ov0 + self.margin + hx + (-dx).max(0.0);
        let x_hi = ov1 - self.margin - hx - dx.max(0.0);
        let y_lo = self.margin + hy + (-dy).max(0.0);
        let y_hi = (self.height - 1) as f64 - self.margin - hy - dy.max(0.0);
        if x_lo > x_hi || y_lo > y_hi {
            return Err(Error::Config(format!(
                "object of size {} with displacement {disp} does not fit the overlap",
                self.object_size
            )));
        }
        let center = (r.gen_range(x_lo..=x_hi), r.gen_range(y_lo..=y_hi));
        let color = [r.gen_range(0.0..1.0), r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)];
        spec.objects.push(SynthObject { center, color, ..probe });
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_spec(disp: (f64, f64), jitter: f64) -> SynthSpec {
        SynthSpec {
            height: 64,
            width: 96,
            overlap: 0.5,
            background: Background::Checker { cell: 8 },
            parallax: 0,
            objects: vec![SynthObject {
                shape: Shape::Disk,
                center: (70.0, 30.0),
                size: 10.0,
                color: [0.9, 0.1, 0.1],
                displacement: disp,
            }],
            jitter,
            seed: 7,
        }
    }

    #[test]
    fn still_scene_views_agree_on_the_overlap() {
        let spec = disk_spec((0.0, 0.0), 0.0);
        let p = synth_pair(&spec).unwrap();
        let shift = spec.shift();
        assert_eq!(shift, 48);
        for i in 0..64 {
            for j in shift..96 {
                assert_eq!(p.target.pixel(i, j), p.reference.pixel(i, j - shift));
            }
        }
        assert_eq!(p.homography.apply(50.0, 3.0), Some((2.0, 3.0)));
    }

    #[test]
    fn displaced_disk_union_is_bounded() {
        let single = synth_pair(&disk_spec((0.0, 0.0), 0.0)).unwrap().objects.count() as f64;
        let moved = synth_pair(&disk_spec((15.0, 0.0), 0.0)).unwrap().objects.count() as f64;
        assert!(moved >= single);
        assert!(moved <= single + 15.0 * 21.0, "{moved} vs {single}");
    }

    #[test]
    fn rendering_is_deterministic() {
        let spec = disk_spec((3.0, -2.0), 0.02);
        assert_eq!(synth_pair(&spec).unwrap(), synth_pair(&spec).unwrap());
        let mut other = spec.clone();
        other.seed = 8;
        assert_ne!(synth_pair(&spec).unwrap().target, synth_pair(&other).unwrap().target);
    }

    #[test]
    fn object_outside_scene_is_rejected() {
        let mut spec = disk_spec((0.0, 0.0), 0.0);
        spec.objects[0].center = (5.0, 30.0);
        assert!(matches!(
            synth_pair(&spec),
            Err(Error::ObjectOutsideCanvas { index: 0 })
        ));
        let mut spec = disk_spec((0.0, 60.0), 0.0);
        spec.objects[0].center = (70.0, 30.0);
        assert!(matches!(
            synth_pair(&spec),
            Err(Error::ObjectOutsideCanvas { index: 0 })
        ));
    }

    #[test]
    fn narrow_overlap_is_rejected() {
        let mut spec = disk_spec((0.0, 0.0), 0.0);
        spec.objects.clear();
        spec.overlap = 0.05;
        assert!(matches!(synth_pair(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn parallax_moves_only_the_background() {
        let mut spec = disk_spec((0.0, 0.0), 0.0);
        spec.background = Background::Noise { seed: 1 };
        spec.parallax = 3;
        let p = synth_pair(&spec).unwrap();
        let shift = spec.shift();
        assert_eq!(p.target.pixel(30, 70), p.reference.pixel(30, 70 - shift));
        assert_eq!(p.target.pixel(2, 60 + 3), p.reference.pixel(2, 60 - shift));
    }

    #[test]
    fn default_suite_covers_the_grid() {
        let specs = SuiteConfig::default().specs().unwrap();
        assert_eq!(specs.len(), 60);
        assert_eq!(specs[0].0, "synth_000");
        let mut seen = std::collections::BTreeSet::new();
        for (_, s) in &specs {
            let o = &s.objects[0];
            let d = (o.displacement.0.hypot(o.displacement.1) * 10.0).round() as i64;
            seen.insert((d, (s.jitter * 100.0).round() as i64, o.shape == Shape::Disk));
            let p = synth_pair(s).unwrap();
            assert!(p.objects.count() > 0);
        }
        assert_eq!(seen.len(), 12);
    }
}
