use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ssmwarp::dtw::{constrained_dtw, dtw};
use ssmwarp::eval::alignment_error;
use ssmwarp::ibdtw::{ibdtw, lower_bound_check};
use ssmwarp::matrix::Matrix;
use ssmwarp::metric::{metric_distance, MetricKind, MetricSpec};
use ssmwarp::normalize::{cdf_match, kolmogorov_distance, level_cdf, quantize};
use ssmwarp::oracle::{brute_force_smith_waterman, gromov_hausdorff, min_stress, StressNorm};
use ssmwarp::path::WarpingPath;
use ssmwarp::ssm::{compute_ssm, SelfSimilarityMatrix};
use ssmwarp::swalign::{median, median_scaled_scores, pcswm, smith_waterman, SwParams};
use ssmwarp::synth::{apply_isometry, curve_pair, warp_truth, Figure8, WarpSpec};
use ssmwarp::TimeOrderedPointCloud;

fn cloud(seed: u64, n: usize, dim: usize) -> TimeOrderedPointCloud {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n).map(|_| (0..dim).map(|_| r.sample(StandardNormal)).collect()).collect();
    TimeOrderedPointCloud::euclidean(pts).unwrap()
}

fn unit_quaternions(r: &mut ChaCha8Rng, joints: usize) -> Vec<f64> {
    (0..joints)
        .flat_map(|_| {
            let q: Vec<f64> = (0..4).map(|_| r.sample(StandardNormal)).collect();
            let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            q.into_iter().map(move |x| x / norm)
        })
        .collect()
}

fn matrix(seed: u64, m: usize, n: usize, lo: f64, hi: f64) -> Matrix {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(m, n, |_, _| r.gen_range(lo..hi))
}

fn global_path(seed: u64, m: usize, n: usize) -> WarpingPath {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let (mut i, mut j) = (0, 0);
    let mut pairs = vec![(0, 0)];
    while (i, j) != (m - 1, n - 1) {
        match (i + 1 < m, j + 1 < n, r.gen_range(0..3)) {
            (true, true, 0) => (i, j) = (i + 1, j + 1),
            (true, _, 1) | (true, false, _) => i += 1,
            _ => j += 1,
        }
        pairs.push((i, j));
    }
    WarpingPath::new(pairs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ssm_is_isometry_blind_and_exactly_symmetric(seed in any::<u64>(), n in 2usize..30, dim in 1usize..5) {
        let c = cloud(seed, n, dim);
        let s = compute_ssm(&c);
        let t = compute_ssm(&apply_isometry(&c, seed ^ 0xabc).unwrap());
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(s.get(i, j), s.get(j, i));
                prop_assert!((s.get(i, j) - t.get(i, j)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn triangle_inequality_for_every_metric(seed in any::<u64>(), joints in 1usize..3) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        for kind in MetricKind::all() {
            let (dim, pts): (usize, Vec<Vec<f64>>) = match kind {
                MetricKind::QuaternionProduct => (4 * joints, (0..3).map(|_| unit_quaternions(&mut r, joints)).collect()),
                _ => (3, (0..3).map(|_| (0..3).map(|_| r.sample(StandardNormal)).collect()).collect()),
            };
            let spec = MetricSpec::new(kind, dim).unwrap();
            let d = |a: usize, b: usize| metric_distance(&pts[a], &pts[b], &spec).unwrap();
            prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9, "{kind:?}");
            prop_assert!(d(0, 0) <= 1e-7);
        }
    }

    #[test]
    fn dtw_is_symmetric_and_scales(seed in any::<u64>(), m in 1usize..12, n in 1usize..12, k in -3i32..4) {
        let c = matrix(seed, m, n, 0.0, 1.0);
        let base = dtw(&c).unwrap();
        let t = dtw(&c.transpose()).unwrap();
        prop_assert!((base.cost - t.cost).abs() <= 1e-12);
        // Powers of two scale exactly, so the tie-broken path cannot move.
        let lambda = 2f64.powi(k);
        let scaled = dtw(&c.map(|v| v * lambda)).unwrap();
        prop_assert_eq!(scaled.cost, base.cost * lambda);
        prop_assert_eq!(scaled.path, base.path);
        let odd = dtw(&c.map(|v| v * 3.7)).unwrap();
        prop_assert!((odd.cost - 3.7 * base.cost).abs() <= 1e-9 * (1.0 + base.cost));
    }

    #[test]
    fn constraint_dominates_and_is_tight_on_the_optimum(seed in any::<u64>(), m in 1usize..9, n in 1usize..9) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..m).map(|_| r.gen_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..1.0)).collect();
        let costs = Matrix::from_fn(m, n, |i, j| (a[i] - b[j]).abs());
        let best = dtw(&costs).unwrap();
        for i in 0..m {
            for j in 0..n {
                let c = constrained_dtw(&a, &b, i, j).unwrap();
                prop_assert!(c >= best.cost - 1e-12);
                if best.path.contains((i, j)) {
                    prop_assert!((c - best.cost).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn ibdtw_is_symmetric(seed in any::<u64>(), m in 2usize..14, n in 2usize..14) {
        let x = compute_ssm(&cloud(seed, m, 2));
        let y = compute_ssm(&cloud(seed.wrapping_add(1), n, 2));
        let xy = ibdtw(&x, &y).unwrap().cost;
        let yx = ibdtw(&y, &x).unwrap().cost;
        prop_assert!((xy - yx).abs() <= 1e-9);
    }

    #[test]
    fn ibdtw_lower_bounds_half_the_stress(seed in any::<u64>(), m in 2usize..6, n in 2usize..6) {
        let x = compute_ssm(&cloud(seed, m, 2));
        let y = compute_ssm(&cloud(seed.wrapping_add(7), n, 3));
        prop_assert!(lower_bound_check(&x, &y).unwrap().holds);
    }

    #[test]
    fn infinity_stress_bounds_twice_gh(seed in any::<u64>(), m in 1usize..5, n in 1usize..5) {
        let ssm = |s: u64, k: usize| {
            if k == 1 {
                SelfSimilarityMatrix::new(Matrix::zeros(1, 1)).unwrap()
            } else {
                compute_ssm(&cloud(s, k, 2))
            }
        };
        let (x, y) = (ssm(seed, m), ssm(seed ^ 0x55, n));
        let stress = min_stress(&x, &y, StressNorm::Infinity).unwrap().best_stress;
        prop_assert!(stress >= 2.0 * gromov_hausdorff(&x, &y).unwrap() - 1e-12);
    }

    #[test]
    fn match_score_range(a in 0.0f64..=1.0, b in 0.0f64..=1.0, sigma in 0.001f64..1.0) {
        let s = SwParams::new(sigma).unwrap().match_score(a, b);
        prop_assert!((-0.6..=0.4 + 1e-15).contains(&s));
    }

    #[test]
    fn outer_scores_span_unit_range(seed in any::<u64>(), m in 2usize..10, n in 2usize..10) {
        let c = matrix(seed, m, n, -3.0, 5.0);
        let s = median_scaled_scores(&c).unwrap();
        prop_assert!(s.as_slice().iter().all(|v| (-1.0..=1.0).contains(v)));
        prop_assert!(median(s.as_slice()).abs() <= 1e-12);
    }

    #[test]
    fn smith_waterman_matches_oracle_and_is_monotone(seed in any::<u64>(), m in 1usize..6, n in 1usize..6, gap in -1.0f64..0.0, lift in 0.0f64..1.0) {
        let s = matrix(seed, m, n, -1.0, 1.0);
        let score = smith_waterman(&s, gap).unwrap().score;
        prop_assert!((score - brute_force_smith_waterman(&s, gap).unwrap()).abs() <= 1e-9);
        let lifted = smith_waterman(&s.map(|v| v + lift), gap).unwrap().score;
        prop_assert!(lifted >= score - 1e-12);
    }

    #[test]
    fn pcswm_is_isometry_blind(seed in any::<u64>(), m in 4usize..10, n in 4usize..10) {
        let (a, b) = (cloud(seed, m, 2), cloud(seed ^ 3, n, 2));
        let params = SwParams::new(0.09).unwrap();
        let sb = compute_ssm(&b).scaled_to_unit();
        let base = pcswm(&compute_ssm(&a).scaled_to_unit(), &sb, &params).unwrap();
        prop_assert_eq!(&pcswm(&compute_ssm(&a).scaled_to_unit(), &sb, &params).unwrap(), &base);
        // A moved copy reproduces the SSM only up to rounding.
        let moved = compute_ssm(&apply_isometry(&a, seed).unwrap()).scaled_to_unit();
        let c = pcswm(&moved, &sb, &params).unwrap();
        for (p, q) in c.as_slice().iter().zip(base.as_slice()) {
            prop_assert!((p - q).abs() <= 1e-6);
        }
    }

    #[test]
    fn cdf_match_is_monotone_idempotent_scale_blind_and_closer(seed in any::<u64>(), n in 3usize..20, alpha in 0.01f64..100.0) {
        let d1 = compute_ssm(&cloud(seed, n, 2));
        let d2 = SelfSimilarityMatrix::new(compute_ssm(&cloud(seed ^ 9, n, 3)).values().map(|v| v * v)).unwrap();
        let levels = 64;
        let (out, map) = cdf_match(&d1, &d2, levels).unwrap();
        prop_assert!(map.is_monotone());

        let (again, _) = cdf_match(&out, &out, levels).unwrap();
        prop_assert_eq!(&again, &out);

        let scaled = SelfSimilarityMatrix::new(d1.values().map(|v| v * alpha)).unwrap();
        let (out_scaled, map_scaled) = cdf_match(&scaled, &d2, levels).unwrap();
        prop_assert_eq!(&map_scaled.mapping, &map.mapping);
        prop_assert_eq!(&out_scaled, &out);

        let q1 = quantize(&d1, levels).unwrap();
        let q2 = quantize(&d2, levels).unwrap();
        let target = level_cdf(&q2, n, levels);
        let before = level_cdf(&q1, n, levels);
        let mapped: Vec<usize> = q1.iter().map(|&l| map.mapping[l]).collect();
        let after = level_cdf(&mapped, n, levels);
        prop_assert!(kolmogorov_distance(&after, &target) <= kolmogorov_distance(&before, &target) + 1e-12);
    }

    #[test]
    fn warps_are_strictly_monotone(seed in any::<u64>(), n in 8usize..1000) {
        let w = WarpSpec::random(&mut ChaCha8Rng::seed_from_u64(seed));
        let delta = 1.0 / (4 * n) as f64;
        let mut t = 0.0;
        while t + delta <= 1.0 {
            prop_assert!(w.eval(t + delta) > w.eval(t), "{t}");
            t += delta;
        }
        prop_assert_eq!(w.eval(0.0), 0.0);
        prop_assert_eq!(w.eval(1.0), 1.0);
    }

    #[test]
    fn truth_paths_validate(seed in any::<u64>(), na in 2usize..80, nb in 2usize..80) {
        let w = WarpSpec::random(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(warp_truth(&w, na, nb).is_valid(na, nb, true));
    }

    #[test]
    fn alignment_error_is_symmetric_and_zero_only_on_equal_sets(seed in any::<u64>(), m in 1usize..25, n in 1usize..25) {
        let p = global_path(seed, m, n);
        let q = global_path(seed ^ 1, m, n);
        let pq = alignment_error(&p, &q).unwrap();
        prop_assert_eq!(pq, alignment_error(&q, &p).unwrap());
        prop_assert_eq!(pq == 0.0, p.cells() == q.cells());
        prop_assert_eq!(alignment_error(&p, &p).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn generated_truth_paths_validate(seed in any::<u64>(), n in 8usize..40) {
        let p = curve_pair(&Figure8, n, None, true, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(p.truth.is_valid(n, n, true));
    }
}
