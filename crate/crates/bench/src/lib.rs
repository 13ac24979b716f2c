//! Shared fixtures for the criterion benches.

use seamkit::alignment::{warp_pair, WarpConfig};
use seamkit::imaging::color_difference_map;
use seamkit::synth::{synth_pair, Background, Shape, SynthObject, SynthSpec};
use seamkit::{AlignedPair, BinaryMask, CostMap, Image};

/// An aligned pair with its colour-difference cost and object mask.
pub struct Fixture {
    pub pair: AlignedPair,
    pub cost: CostMap,
    pub objects: BinaryMask,
    pub target: Image,
}

/// A noise-textured pair of `size x size` views with one displaced disk in the overlap.
pub fn fixture(size: usize) -> Fixture {
    let s = size as f64;
    let spec = SynthSpec {
        height: size,
        width: size,
        overlap: 0.6,
        background: Background::Noise { seed: 3 },
        parallax: 3,
        objects: vec![SynthObject {
            shape: Shape::Disk,
            center: (0.7 * s, 0.5 * s),
            size: 0.1 * s,
            color: [0.8, 0.3, 0.2],
            displacement: (0.02 * s, 0.0),
        }],
        jitter: 0.02,
        seed: 9,
    };
    let synth = synth_pair(&spec).expect("valid spec");
    let pair = warp_pair(
        &synth.target,
        &synth.reference,
        &synth.homography,
        &WarpConfig::default(),
    )
    .expect("pair overlaps");
    let cost =
        color_difference_map(pair.warped_target(), pair.warped_reference(), pair.overlap()).expect("matching canvases");
    Fixture {
        pair,
        cost,
        objects: synth.objects,
        target: synth.target,
    }
}
