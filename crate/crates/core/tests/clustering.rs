use duskfcm_core::clustering::{
    defuzzify, duskfcm_fit, fcm_fit, fit, gmm_fit, kfcm_fit, kmeans_fit, select_lesion_cluster, skfcm_fit,
    ClusterConfig, ClusterResult, Method, TraceKind,
};
use duskfcm_core::features::FeatureMatrix;
use duskfcm_core::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn matrix(rows: &[Vec<f64>]) -> FeatureMatrix {
    FeatureMatrix::from_rows(rows).unwrap()
}

fn line(points: &[f64]) -> FeatureMatrix {
    matrix(&points.iter().map(|&p| vec![p]).collect::<Vec<_>>())
}

/// Gaussian blobs laid out on a `w x h` grid, blob chosen by image quadrant.
fn random_instance(seed: u64) -> (FeatureMatrix, (usize, usize), usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.random_range(4..12);
    let h = rng.random_range(4..12);
    let d = rng.random_range(1..4);
    let c = rng.random_range(2..4);
    let centres: Vec<Vec<f64>> = (0..c).map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
    let noise = Normal::new(0.0, rng.random_range(0.3..2.0)).unwrap();
    let mut rows = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let blob = (2 * x / w + 2 * (2 * y / h)) % c;
            rows.push(centres[blob].iter().map(|m| m + noise.sample(&mut rng)).collect());
        }
    }
    (matrix(&rows), (w, h), c)
}

fn assert_columns_sum_to_one(r: &ClusterResult) {
    let u = &r.memberships;
    assert!(u.max_column_error() <= 1e-9, "column error {}", u.max_column_error());
    assert!(u.u.iter().all(|&x| (0.0..=1.0).contains(&x)));
}

fn assert_monotone(r: &ClusterResult, label: &str) {
    for pair in r.trace.windows(2) {
        match r.trace_kind {
            TraceKind::Objective => assert!(pair[1] <= pair[0] + 1e-9, "{label}: {} -> {}", pair[0], pair[1]),
            TraceKind::LogLikelihood => assert!(pair[1] >= pair[0] - 1e-9, "{label}: {} -> {}", pair[0], pair[1]),
        }
    }
}

#[test]
fn traces_are_monotone_on_random_instances() {
    for seed in 0..100 {
        let (fm, dims, c) = random_instance(seed);
        let cfg = ClusterConfig { c, seed, ..Default::default() };
        for method in [Method::Fcm, Method::Kfcm, Method::Skfcm, Method::Fkm, Method::Gmm] {
            let r = fit(method, &fm, &cfg, dims).unwrap();
            assert!(!r.trace.is_empty());
            assert!(r.iterations <= cfg.max_iter);
            assert_monotone(&r, &format!("{method} seed {seed}"));
            assert_columns_sum_to_one(&r);
        }
        assert_columns_sum_to_one(&duskfcm_fit(&fm, &cfg, dims).unwrap());
        let unsmoothed = duskfcm_fit(&fm, &ClusterConfig { q: 0.0, ..cfg.clone() }, dims).unwrap();
        assert_monotone(&unsmoothed, &format!("duskfcm q=0 seed {seed}"));
    }
}

#[test]
fn reduction_chain() {
    for seed in 0..20 {
        let (fm, dims, c) = random_instance(seed);
        let cfg = ClusterConfig { c, seed, ..Default::default() };
        let dus = duskfcm_fit(&fm, &ClusterConfig { p: 1.0, q: 0.0, ..cfg.clone() }, dims).unwrap();
        let sk = skfcm_fit(&fm, &cfg, dims).unwrap();
        let diff = dus.memberships.max_abs_diff(&sk.memberships);
        assert!(diff <= 1e-9, "duskfcm(p=1,q=0) vs skfcm: {diff}");

        let sk0 = skfcm_fit(&fm, &ClusterConfig { alpha: 0.0, ..cfg.clone() }, dims).unwrap();
        let k = kfcm_fit(&fm, &cfg).unwrap();
        let diff = sk0.memberships.max_abs_diff(&k.memberships);
        assert!(diff <= 1e-9, "skfcm(alpha=0) vs kfcm: {diff}");
    }

    let fm = line(&[0.0, 0.1, 10.0, 10.1]);
    let diameter = 10.1;
    let cfg = ClusterConfig { sigma: Some(1e3 * diameter), max_iter: 500, epsilon: 1e-9, ..Default::default() };
    let k = kfcm_fit(&fm, &cfg).unwrap();
    let f = fcm_fit(&fm, &cfg).unwrap();
    assert!(k.memberships.max_abs_diff(&f.memberships) <= 1e-3);
}

#[test]
fn fcm_two_pairs() {
    let r = fcm_fit(&line(&[0.0, 0.1, 10.0, 10.1]), &ClusterConfig::default()).unwrap();
    let mut v = r.centroids.v.clone();
    v.sort_by(f64::total_cmp);
    assert!((v[0] - 0.05).abs() < 1e-3 && (v[1] - 10.05).abs() < 1e-3);
    for k in 0..4 {
        let own = (0..2).map(|i| r.memberships.get(i, k)).fold(0.0, f64::max);
        assert!(own > 0.99);
    }
}

fn fcm_objective(fm: &FeatureMatrix, u: &[Vec<f64>], m: f64) -> f64 {
    let (n, d) = (fm.rows(), fm.cols());
    let mut j = 0.0;
    for ui in u {
        let w: Vec<f64> = ui.iter().map(|x| x.powf(m)).collect();
        let total: f64 = w.iter().sum();
        let centre: Vec<f64> = (0..d).map(|t| (0..n).map(|k| w[k] * fm.get(k, t)).sum::<f64>() / total).collect();
        for k in 0..n {
            let d2: f64 = fm.row(k).iter().zip(&centre).map(|(a, b)| (a - b) * (a - b)).sum();
            j += w[k] * d2;
        }
    }
    j
}

#[test]
fn fcm_beats_random_memberships() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<f64>> = (0..20).map(|_| vec![rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)]).collect();
    let fm = matrix(&rows);
    let r = fcm_fit(&fm, &ClusterConfig { epsilon: 1e-9, max_iter: 1000, ..Default::default() }).unwrap();
    let fitted: Vec<Vec<f64>> = (0..2).map(|i| (0..20).map(|k| r.memberships.get(i, k)).collect()).collect();
    let best = fcm_objective(&fm, &fitted, 2.0);
    assert!((best - r.trace.last().unwrap()).abs() <= 1e-6 * best);
    for _ in 0..1000 {
        let a: Vec<f64> = (0..20).map(|_| rng.random::<f64>()).collect();
        let u = vec![a.clone(), a.iter().map(|x| 1.0 - x).collect()];
        assert!(best <= fcm_objective(&fm, &u, 2.0) + 1e-9);
    }
}

#[test]
fn kmeans_matches_exhaustive_partition() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let rows: Vec<Vec<f64>> =
            (0..20).map(|_| vec![rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)]).collect();
        let fm = matrix(&rows);
        let r = kmeans_fit(&fm, &ClusterConfig { seed, ..Default::default() }).unwrap();
        let got = *r.trace.last().unwrap();
        let mut best = f64::INFINITY;
        // point 0 fixed in cluster 0; every other assignment enumerated
        for mask in 0u32..(1 << 19) {
            let mut sum = [[0.0; 2]; 2];
            let mut sq = [0.0; 2];
            let mut cnt = [0usize; 2];
            for (k, row) in rows.iter().enumerate() {
                let g = if k == 0 { 0 } else { ((mask >> (k - 1)) & 1) as usize };
                cnt[g] += 1;
                for t in 0..2 {
                    sum[g][t] += row[t];
                    sq[g] += row[t] * row[t];
                }
            }
            let wcss: f64 = (0..2)
                .filter(|&g| cnt[g] > 0)
                .map(|g| sq[g] - (sum[g][0].powi(2) + sum[g][1].powi(2)) / cnt[g] as f64)
                .sum();
            best = best.min(wcss);
        }
        assert!(got <= best + 1e-9, "seed {seed}: lloyd {got} vs exhaustive {best}");
    }
}

#[test]
fn kmeans_two_pairs_and_one_centre_per_point() {
    let fm = line(&[0.0, 0.1, 10.0, 10.1]);
    let r = kmeans_fit(&fm, &ClusterConfig::default()).unwrap();
    let mut v = r.centroids.v.clone();
    v.sort_by(f64::total_cmp);
    assert_eq!(v, vec![0.05, 10.05]);
    let r = kmeans_fit(&fm, &ClusterConfig { c: 4, ..Default::default() }).unwrap();
    assert_eq!(*r.trace.last().unwrap(), 0.0);
}

#[test]
fn gmm_recovers_mixture_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let points: Vec<f64> =
        (0..500).map(|_| if rng.random_bool(0.5) { 0.0 } else { 10.0 } + unit.sample(&mut rng)).collect();
    let r = gmm_fit(&line(&points), &ClusterConfig::default()).unwrap();
    let mut means = r.centroids.v.clone();
    means.sort_by(f64::total_cmp);
    assert!(means[0].abs() < 0.3 && (means[1] - 10.0).abs() < 0.3, "{means:?}");
    assert_eq!(r.trace_kind, TraceKind::LogLikelihood);
    assert_monotone(&r, "gmm");
    assert_columns_sum_to_one(&r);
}

#[test]
fn objective_invariant_under_row_permutation() {
    for seed in 0..10 {
        let (fm, _, c) = random_instance(seed);
        let n = fm.rows();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 77);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let shuffled = fm.select_rows(&perm);
        let cfg = ClusterConfig { c, seed, epsilon: 1e-10, max_iter: 1000, ..Default::default() };
        for method in [Method::Fcm, Method::Fkm] {
            let a = *fit(method, &fm, &cfg, (n, 1)).unwrap().trace.last().unwrap();
            let b = *fit(method, &shuffled, &cfg, (n, 1)).unwrap().trace.last().unwrap();
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{method} seed {seed}: {a} vs {b}");
        }
    }
}

/// Two-region 32x32 intensity phantom with salt-and-pepper noise.
fn noisy_two_region(seed: u64) -> (FeatureMatrix, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for y in 0..32 {
        for x in 0..32 {
            let inside = (8..24).contains(&x) && (8..24).contains(&y);
            let mut v = if inside { 180.0 } else { 70.0 };
            if rng.random::<f64>() < 0.05 {
                v = if rng.random_bool(0.5) { 255.0 } else { 0.0 };
            }
            rows.push(vec![v / 255.0]);
            truth.push(inside);
        }
    }
    (matrix(&rows), truth)
}

fn misclassified(r: &ClusterResult, dims: (usize, usize), truth: &[bool]) -> usize {
    let labels = defuzzify(r, dims).unwrap();
    let a = labels.labels.iter().zip(truth).filter(|(&l, &t)| (l == 1) != t).count();
    a.min(truth.len() - a)
}

#[test]
fn spatial_penalty_resists_salt_and_pepper() {
    for seed in 0..5 {
        let (fm, truth) = noisy_two_region(seed);
        let cfg = ClusterConfig { seed, ..Default::default() };
        let sk = misclassified(&skfcm_fit(&fm, &cfg, (32, 32)).unwrap(), (32, 32), &truth);
        let f = misclassified(&fcm_fit(&fm, &cfg).unwrap(), (32, 32), &truth);
        assert!(sk <= f, "seed {seed}: skfcm {sk} vs fcm {f}");
    }
}

#[test]
fn isolated_flipped_pixel_takes_its_neighbours_label() {
    let mut rows = Vec::new();
    for y in 0..33 {
        for x in 0..33 {
            let v = if x < 16 { 0.2 } else { 0.8 };
            rows.push(vec![if (x, y) == (8, 16) { 0.8 } else { v }]);
        }
    }
    let fm = matrix(&rows);
    let r = duskfcm_fit(&fm, &ClusterConfig::default(), (33, 33)).unwrap();
    let labels = defuzzify(&r, (33, 33)).unwrap();
    let at = |x: usize, y: usize| labels.labels[y * 33 + x];
    assert_eq!(at(8, 16), at(7, 16));
    assert_ne!(at(8, 16), at(30, 16));
    assert_columns_sum_to_one(&r);
}

#[test]
fn constant_image_is_degenerate_but_well_formed() {
    let fm = matrix(&vec![vec![0.5, 0.5]; 25]);
    for method in Method::ALL {
        let r = fit(method, &fm, &ClusterConfig::default(), (5, 5)).unwrap();
        assert!(r.degenerate, "{method}");
        assert_columns_sum_to_one(&r);
    }
}

#[test]
fn red_cluster_beats_brighter_white() {
    // three vertical bands: red, white, dark
    let mut data = Vec::new();
    let mut rows = Vec::new();
    for _y in 0..6 {
        for x in 0..9 {
            let px = match x / 3 {
                0 => [200u8, 40, 40],
                1 => [250, 250, 250],
                _ => [20, 20, 20],
            };
            data.extend_from_slice(&px);
            rows.push(px.iter().map(|&c| c as f64 / 255.0).collect());
        }
    }
    let img = RgbImage::new(9, 6, data).unwrap();
    let r = kmeans_fit(&matrix(&rows), &ClusterConfig { c: 3, ..Default::default() }).unwrap();
    let labels = defuzzify(&r, (9, 6)).unwrap();
    let choice = select_lesion_cluster(&r, &img, &labels).unwrap();
    assert_eq!(choice.cluster, labels.labels[0]);
    assert!(!choice.ambiguous);
}

#[test]
fn same_seed_same_result() {
    let (fm, dims, c) = random_instance(11);
    let cfg = ClusterConfig { c, seed: 9, ..Default::default() };
    for method in Method::ALL {
        assert_eq!(fit(method, &fm, &cfg, dims).unwrap(), fit(method, &fm, &cfg, dims).unwrap());
    }
}
