use duskfcm_core::image::GrayImage;
use duskfcm_core::texture::{
    compute_glcm, cooccurrence_counts, global_texture, index, texture_features, windowed_texture_map, GlcmConfig,
    TEXTURE_FEATURE_COUNT,
};
use duskfcm_core::QuantizedImage;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Counts `(img[y][x], img[y+dy][x+dx])` over every in-bounds anchor.
fn brute_counts(img: &[u16], w: usize, h: usize, levels: usize, (dx, dy): (i32, i32), symmetric: bool) -> Vec<u64> {
    let mut counts = vec![0u64; levels * levels];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let (nx, ny) = (x + dx as i64, y + dy as i64);
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            let a = img[(y * w as i64 + x) as usize] as usize;
            let b = img[(ny * w as i64 + nx) as usize] as usize;
            counts[a * levels + b] += 1;
            if symmetric {
                counts[b * levels + a] += 1;
            }
        }
    }
    counts
}

fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, levels: usize) -> QuantizedImage {
    let data = (0..w * h).map(|_| rng.random_range(0..levels as u16)).collect();
    QuantizedImage::new(w, h, levels, data).unwrap()
}

#[test]
fn glcm_matches_brute_force_on_random_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let offsets = [(1, 0), (0, 1), (1, 1), (1, -1), (-2, 1), (3, 0)];
    for _ in 0..100 {
        let img = random_image(&mut rng, 8, 8, 8);
        for &offset in &offsets {
            for symmetric in [false, true] {
                let got = cooccurrence_counts(&img, offset, symmetric).unwrap();
                assert_eq!(got, brute_counts(img.as_raw(), 8, 8, 8, offset, symmetric), "{offset:?} {symmetric}");
                let cfg = GlcmConfig { levels: 8, offsets: vec![offset], symmetric, window: 0 };
                let glcm = compute_glcm(&img, &cfg, 0).unwrap();
                let total: u64 = got.iter().sum();
                assert_eq!(glcm.pair_count, total);
                for (p, &c) in glcm.p.iter().zip(&got) {
                    assert_eq!(*p, c as f64 / total as f64);
                }
            }
        }
    }
}

#[test]
fn classic_four_by_four_example() {
    let img = QuantizedImage::new(4, 4, 4, vec![0, 0, 1, 1, 0, 0, 1, 1, 0, 2, 2, 2, 2, 2, 3, 3]).unwrap();
    let counts = cooccurrence_counts(&img, (1, 0), true).unwrap();
    assert_eq!(counts, vec![4, 2, 1, 0, 2, 4, 0, 0, 1, 0, 6, 1, 0, 0, 1, 2]);
    assert_eq!(counts.iter().sum::<u64>(), 24);
    let one_sided = cooccurrence_counts(&img, (1, 0), false).unwrap();
    assert_eq!(one_sided, vec![2, 2, 1, 0, 0, 2, 0, 0, 0, 0, 3, 1, 0, 0, 0, 1]);
}

#[test]
fn features_agree_with_direct_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let img = random_image(&mut rng, 9, 7, 5);
        let cfg = GlcmConfig { levels: 5, offsets: vec![(1, 1)], symmetric: false, window: 0 };
        let g = compute_glcm(&img, &cfg, 0).unwrap();
        let f = texture_features(&g);
        let l = 5;
        let (mut energy, mut contrast, mut entropy, mut homog, mut auto) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let (mut mx, mut my) = (0.0, 0.0);
        for i in 0..l {
            for j in 0..l {
                let p = g.get(i, j);
                let d = i as f64 - j as f64;
                energy += p * p;
                contrast += d * d * p;
                if p > 0.0 {
                    entropy -= p * p.ln();
                }
                homog += p / (1.0 + d * d);
                auto += (i * j) as f64 * p;
                mx += i as f64 * p;
                my += j as f64 * p;
            }
        }
        let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
        for i in 0..l {
            for j in 0..l {
                let p = g.get(i, j);
                vx += (i as f64 - mx).powi(2) * p;
                vy += (j as f64 - my).powi(2) * p;
                cov += (i as f64 - mx) * (j as f64 - my) * p;
            }
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());
        assert!(close(f.get(index::ENERGY), energy));
        assert!(close(f.get(index::CONTRAST), contrast));
        assert!(close(f.get(index::ENTROPY), entropy));
        assert!(close(f.get(index::HOMOGENEITY_2), homog));
        assert!(close(f.get(index::AUTOCORRELATION), auto));
        assert!(close(f.get(index::SUM_OF_SQUARES_VARIANCE), vx));
        assert!(close(f.get(index::CORRELATION_1), cov / (vx.sqrt() * vy.sqrt())));
        assert!(close(f.get(index::CORRELATION_1), f.get(index::CORRELATION_2)));
    }
}

#[test]
fn windowed_map_equals_global_texture_of_replicated_crop() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (w, h) = (12, 9);
    let img = random_image(&mut rng, w, h, 4);
    let cfg = GlcmConfig { levels: 4, window: 5, ..Default::default() };
    let map = windowed_texture_map(&img, &cfg).unwrap();
    assert_eq!(map.features.len(), w * h);
    let r = 2i64;
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut crop = Vec::new();
            for yy in y - r..=y + r {
                for xx in x - r..=x + r {
                    let cx = xx.clamp(0, w as i64 - 1) as usize;
                    let cy = yy.clamp(0, h as i64 - 1) as usize;
                    crop.push(img.get(cx, cy));
                }
            }
            let crop = QuantizedImage::new(5, 5, 4, crop).unwrap();
            let expect = global_texture(&crop, &GlcmConfig { window: 0, ..cfg.clone() }).unwrap();
            let got = &map.features[y as usize * w + x as usize];
            for k in 0..TEXTURE_FEATURE_COUNT {
                assert!((got[k] - expect.values[k]).abs() <= 1e-12, "pixel ({x},{y}) feature {k}");
            }
        }
    }
}

#[test]
fn quantize_256_is_identity_on_luminance() {
    let data: Vec<u8> = (0..=255).collect();
    let gray = GrayImage::new(16, 16, data.clone()).unwrap();
    let q = gray.quantize(256).unwrap();
    assert!(q.as_raw().iter().zip(&data).all(|(&a, &b)| a == b as u16));
}

fn arb_image() -> impl Strategy<Value = QuantizedImage> {
    (2usize..=8, 3usize..=10, 3usize..=10).prop_flat_map(|(levels, w, h)| {
        prop::collection::vec(0..levels as u16, w * h)
            .prop_map(move |data| QuantizedImage::new(w, h, levels, data).unwrap())
    })
}

proptest! {
    #[test]
    fn glcm_is_a_distribution(img in arb_image(), sym in any::<bool>(), off in 0usize..4) {
        let cfg = GlcmConfig { levels: img.levels(), symmetric: sym, window: 0, ..Default::default() };
        let g = compute_glcm(&img, &cfg, off).unwrap();
        let total: f64 = g.p.iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(g.p.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn symmetric_glcm_equals_its_transpose(img in arb_image(), off in 0usize..4) {
        let cfg = GlcmConfig { levels: img.levels(), window: 0, ..Default::default() };
        let g = compute_glcm(&img, &cfg, off).unwrap();
        let l = g.levels;
        for i in 0..l {
            for j in 0..l {
                prop_assert_eq!(g.get(i, j), g.get(j, i));
            }
        }
    }

    #[test]
    fn feature_bounds(img in arb_image(), off in 0usize..4) {
        let cfg = GlcmConfig { levels: img.levels(), window: 0, ..Default::default() };
        let g = compute_glcm(&img, &cfg, off).unwrap();
        let f = texture_features(&g);
        let l = g.levels as f64;
        prop_assert!(f.values.iter().all(|v| v.is_finite()));
        prop_assert!(f.get(index::ENERGY) > 0.0 && f.get(index::ENERGY) <= 1.0 + 1e-12);
        prop_assert!(f.get(index::ENTROPY) >= -1e-12 && f.get(index::ENTROPY) <= (l * l).ln() + 1e-12);
        prop_assert!(f.get(index::CORRELATION_1).abs() <= 1.0 + 1e-9);
        prop_assert!(f.get(index::HOMOGENEITY_1) <= 1.0 + 1e-12);
        prop_assert!(f.get(index::MAXIMUM_PROBABILITY) <= 1.0);
        prop_assert!(f.get(index::INFORMATION_CORRELATION_2) >= 0.0 && f.get(index::INFORMATION_CORRELATION_2) <= 1.0);
        prop_assert!(f.get(index::CONTRAST) >= 0.0);
    }
}
