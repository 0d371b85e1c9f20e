mod common;

use common::*;
use despeckle_core::io::{decode, encode, quantize};
use despeckle_core::metrics::speckle_index;
use despeckle_core::noise::{apply_multiplicative, speckle_samples};
use despeckle_core::{
    load_any, save_image, speckle_field, Image, ImageFormat, ImageGrid, NoiseSpec, RgbImage,
};
use proptest::prelude::*;

#[test]
fn single_look_field_has_unit_speckle_index() {
    let f = speckle_field(NoiseSpec::new(1, 2024).unwrap(), 512, 512).unwrap();
    let si = speckle_index(&f).unwrap();
    assert!((si - 1.0).abs() <= 0.01, "si {si}");
}

#[test]
fn multi_look_moments() {
    for looks in [3u32, 5, 10] {
        let s = speckle_samples(NoiseSpec::new(looks, 5).unwrap(), 400_000).unwrap();
        let n = s.len() as f64;
        let mean = s.iter().sum::<f64>() / n;
        let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let want = 1.0 / looks as f64;
        assert!((mean - 1.0).abs() < 0.005, "L={looks} mean {mean}");
        assert!((var - want).abs() / want < 0.03, "L={looks} var {var}");
        assert!(s.iter().all(|&v| v > 0.0));
    }
}

#[test]
fn different_seeds_give_different_fields() {
    let a = speckle_field(NoiseSpec::new(1, 1).unwrap(), 16, 16).unwrap();
    let b = speckle_field(NoiseSpec::new(1, 2).unwrap(), 16, 16).unwrap();
    assert_ne!(a, b);
}

#[test]
fn multiplicative_noise_is_monotone_in_clean_image() {
    let mut r = rng(60);
    let clean = random_grid(&mut r, 20, 20, 1.0, 200.0);
    let brighter = clean.map(|v| v + 20.0);
    let field = speckle_field(NoiseSpec::new(3, 8).unwrap(), 20, 20).unwrap();
    let a = apply_multiplicative(&clean, &field).unwrap();
    let b = apply_multiplicative(&brighter, &field).unwrap();
    for i in 0..a.len() {
        assert!(b.data()[i] >= a.data()[i]);
        assert!((1.0..=255.0).contains(&a.data()[i]));
    }
}

#[test]
fn files_round_trip_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let g = ImageGrid::from_fn(9, 4, |x, y| (x * 25 + y * 3) as f64);
    let c = RgbImage::new(g.clone(), g.rotate_180(), g.map(|v| 255.0 - v)).unwrap();
    for (img, name, fmt) in [
        (Image::Gray(g.clone()), "g.pgm", ImageFormat::Pgm),
        (Image::Gray(g.clone()), "g.png", ImageFormat::Png),
        (Image::Rgb(c.clone()), "c.ppm", ImageFormat::Ppm),
        (Image::Rgb(c.clone()), "c.png", ImageFormat::Png),
    ] {
        let path = dir.path().join(name);
        save_image(&img, &path, fmt).unwrap();
        assert_eq!(load_any(&path).unwrap(), img, "{name}");
    }
}

proptest! {
    #[test]
    fn encode_decode_quantizes(w in 1usize..12, h in 1usize..12, seed in any::<u64>(), png in any::<bool>()) {
        let mut r = rng(seed);
        let g = random_grid(&mut r, w, h, -20.0, 280.0);
        let fmt = if png { ImageFormat::Png } else { ImageFormat::Pgm };
        let back = decode(&encode(&Image::Gray(g.clone()), fmt).unwrap()).unwrap();
        let want = g.map(|v| quantize(v) as f64);
        prop_assert_eq!(back, Image::Gray(want));
    }
}
