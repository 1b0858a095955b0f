use std::collections::VecDeque;

use duskfcm_core::clustering::{Centroids, ClusterResult, MembershipMatrix, TraceKind};
use duskfcm_core::features::FeatureMatrix;
use duskfcm_core::metrics::full_report;
use duskfcm_core::refine::{
    label_components, morphological_close, refine_mask, region_grow, remove_small_components, Identity, MaskRefiner,
    RefineConfig, RefineContext, RegionGrow,
};
use duskfcm_core::BinaryMask;
use proptest::prelude::*;

/// Plain 4-connected flood fill over pixels equal to the seed's value.
fn flood_fill(values: &[u8], w: usize, h: usize, seed: usize) -> Vec<bool> {
    let mut out = vec![false; w * h];
    let mut queue = VecDeque::from([seed]);
    out[seed] = true;
    while let Some(k) = queue.pop_front() {
        let (x, y) = ((k % w) as i64, (k / w) as i64);
        for (nx, ny) in [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)] {
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            let nk = ny as usize * w + nx as usize;
            if !out[nk] && values[nk] == values[seed] {
                out[nk] = true;
                queue.push_back(nk);
            }
        }
    }
    out
}

fn features_from(values: &[u8]) -> FeatureMatrix {
    let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v as f64 * 10.0, -(v as f64) * 10.0]).collect();
    FeatureMatrix::from_rows(&rows).unwrap()
}

fn arb_regions() -> impl Strategy<Value = (usize, usize, Vec<u8>, usize)> {
    (2usize..14, 2usize..14).prop_flat_map(|(w, h)| {
        (Just(w), Just(h), prop::collection::vec(0u8..2, w * h), 0..w * h)
    })
}

fn arb_mask() -> impl Strategy<Value = BinaryMask> {
    (1usize..16, 1usize..16).prop_flat_map(|(w, h)| {
        prop::collection::vec(prop::bool::weighted(0.4), w * h).prop_map(move |d| BinaryMask::new(w, h, d).unwrap())
    })
}

fn subset(a: &BinaryMask, b: &BinaryMask) -> bool {
    a.as_slice().iter().zip(b.as_slice()).all(|(&x, &y)| !x || y)
}

proptest! {
    #[test]
    fn grow_equals_flood_fill((w, h, values, seed) in arb_regions()) {
        let fm = features_from(&values);
        let mut seeds = BinaryMask::empty(w, h).unwrap();
        seeds.as_mut_slice()[seed] = true;
        let cfg = RefineConfig { grow_threshold: 1.0, ..Default::default() };
        let grown = region_grow(&fm, &seeds, &cfg, (w, h)).unwrap();
        prop_assert_eq!(grown.as_slice(), &flood_fill(&values, w, h, seed)[..]);
    }

    #[test]
    fn small_component_removal_only_removes(m in arb_mask(), min_area in 0usize..8) {
        let out = remove_small_components(&m, min_area);
        prop_assert!(subset(&out, &m));
        let (labels, count) = label_components(&out);
        let mut areas = vec![0usize; count];
        for &l in labels.iter().filter(|&&l| l != usize::MAX) {
            areas[l] += 1;
        }
        prop_assert!(areas.iter().all(|&a| a >= min_area));
    }

    #[test]
    fn closing_is_extensive_and_idempotent(m in arb_mask(), r in 0usize..3) {
        let c = morphological_close(&m, r);
        prop_assert!(subset(&m, &c));
        prop_assert_eq!(morphological_close(&c, r), c);
    }
}

#[test]
fn components_of_two_and_fifty() {
    let mut m = BinaryMask::empty(20, 10).unwrap();
    m.set(0, 0, true);
    m.set(1, 0, true);
    for y in 4..9 {
        for x in 5..15 {
            m.set(x, y, true);
        }
    }
    let out = remove_small_components(&m, 10);
    assert_eq!(out.count(), 50);
    assert!(!out.get(0, 0));
}

fn coarse_from(lesion: &BinaryMask, confidence: impl Fn(usize, usize) -> f64) -> ClusterResult {
    let (w, h) = lesion.dims();
    let n = w * h;
    let mut u = vec![0.0; 2 * n];
    for y in 0..h {
        for x in 0..w {
            let k = y * w + x;
            let a = if lesion.get(x, y) { confidence(x, y) } else { 0.1 };
            u[k] = 1.0 - a;
            u[n + k] = a;
        }
    }
    ClusterResult {
        memberships: MembershipMatrix { c: 2, n, u },
        centroids: Centroids { c: 2, d: 1, v: vec![0.0, 1.0] },
        trace: vec![0.0],
        trace_kind: TraceKind::Objective,
        iterations: 1,
        converged: true,
        degenerate: false,
        sigma: None,
    }
}

#[test]
fn speckles_are_dropped_to_one_component() {
    let (w, h) = (40, 40);
    let mut truth = BinaryMask::empty(w, h).unwrap();
    for y in 10..30 {
        for x in 10..30 {
            truth.set(x, y, true);
        }
    }
    let mut coarse_mask = truth.clone();
    for &(x, y) in &[(2, 2), (36, 5), (4, 35)] {
        coarse_mask.set(x, y, true);
    }
    let values: Vec<u8> = coarse_mask.as_slice().iter().map(|&b| b as u8).collect();
    let fm = features_from(&values);
    let coarse = coarse_from(&coarse_mask, |x, y| 0.9 - 0.01 * ((x as f64 - 20.0).abs() + (y as f64 - 20.0).abs()));
    let cfg = RefineConfig { grow_threshold: 2.0, min_area: Some(5), ..Default::default() };
    let refined = refine_mask(&coarse, 1, &fm, &cfg, (w, h)).unwrap();
    assert_eq!(label_components(&coarse_mask).1, 4);
    assert_eq!(label_components(&refined).1, 1);
    assert_eq!(refined, truth);
}

#[test]
fn refinement_keeps_a_correct_coarse_mask() {
    let (w, h) = (32, 24);
    let mut truth = BinaryMask::empty(w, h).unwrap();
    for y in 6..18 {
        for x in 8..26 {
            truth.set(x, y, true);
        }
    }
    let values: Vec<u8> = truth.as_slice().iter().map(|&b| b as u8).collect();
    let fm = features_from(&values);
    let coarse = coarse_from(&truth, |x, _| 0.6 + 0.01 * x as f64);
    let cfg = RefineConfig { grow_threshold: 5.0, ..Default::default() };
    let refined = refine_mask(&coarse, 1, &fm, &cfg, (w, h)).unwrap();

    let u = &coarse.memberships;
    let core: Vec<usize> = (0..w * h).filter(|&k| truth.as_slice()[k] && u.get(1, k) >= 0.6 + 0.01 * 24.0).collect();
    assert!(!core.is_empty());
    assert!(core.iter().all(|&k| refined.as_slice()[k]));
    let before = full_report(&truth, &truth).unwrap().dice;
    assert!(full_report(&refined, &truth).unwrap().dice >= before);
}

#[test]
fn refiner_interface() {
    let mut m = BinaryMask::empty(6, 6).unwrap();
    m.set(2, 2, true);
    m.set(3, 2, true);
    let values: Vec<u8> = m.as_slice().iter().map(|&b| b as u8).collect();
    let fm = features_from(&values);
    let coarse = coarse_from(&m, |_, _| 0.9);
    let ctx = RefineContext { coarse: &coarse, lesion_cluster: 1, features: &fm, dims: (6, 6) };
    assert_eq!(Identity.refine(&m, &ctx).unwrap(), m);
    let cfg = RefineConfig { min_area: Some(1), closing_radius: 0, ..Default::default() };
    assert_eq!(RegionGrow(cfg).refine(&m, &ctx).unwrap(), m);
}
