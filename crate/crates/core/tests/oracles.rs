//! Library results against the brute-force references in `common`, on 200
//! random instances each (n <= 200, c <= 5).

#![allow(clippy::needless_range_loop)]

mod common;

use common::*;
use uqled_core::confident::{
    class_thresholds, confident_joint, estimate_joint, prune_by_noise_rate,
};
use uqled_core::uncertainty::{confident_joint_entropy, entropy_thresholds, mcd_mean, row_entropy};
use uqled_core::{
    cl_pbnr, flip_profile, majority_vote, similarity_scores, FlagSet, SimilarityMatrix,
};

const INSTANCES: u64 = 200;

fn joint_rows(j: &uqled_core::ConfidentJoint) -> Vec<Vec<u64>> {
    (0..j.c()).map(|i| j.row(i).to_vec()).collect()
}

#[test]
fn thresholds_match() {
    for seed in 0..INSTANCES {
        let inst = random_instance(seed, 200, 5);
        let t = class_thresholds(&inst.p, &inst.labels).unwrap();
        let o = oracle_thresholds(&inst.p, &inst.labels);
        for (a, b) in t.0.iter().zip(&o) {
            assert!((a - b).abs() < 1e-12, "seed {seed}");
        }
    }
}

#[test]
fn confident_joint_matches() {
    for seed in 0..INSTANCES {
        let inst = random_instance(seed, 200, 5);
        let t = class_thresholds(&inst.p, &inst.labels).unwrap();
        let joint = confident_joint(&inst.p, &inst.labels, &t).unwrap();
        assert_eq!(
            joint_rows(&joint),
            oracle_joint(&inst.p, &inst.labels, &t.0, |_| true),
            "seed {seed}"
        );
    }
}

#[test]
fn entropy_gated_joint_matches() {
    for seed in 0..INSTANCES {
        let inst = random_instance(seed, 200, 5);
        let t = class_thresholds(&inst.p, &inst.labels).unwrap();
        let te = entropy_thresholds(&row_entropy(&inst.p), &inst.labels).unwrap();
        let joint = confident_joint_entropy(&inst.p, &inst.labels, &t, &te).unwrap();

        let ote = oracle_entropy_thresholds(&inst.p, &inst.labels);
        let (p, y) = (&inst.p, &inst.labels);
        let expected = oracle_joint(p, y, &t.0, |z| oracle_entropy(p.row(z)) <= ote[y.get(z)]);
        assert_eq!(joint_rows(&joint), expected, "seed {seed}");
    }
}

#[test]
fn prune_by_noise_rate_matches() {
    for seed in 0..INSTANCES {
        let inst = random_instance(seed, 200, 5);
        let t = class_thresholds(&inst.p, &inst.labels).unwrap();
        let joint = confident_joint(&inst.p, &inst.labels, &t).unwrap();
        let Ok(q) = estimate_joint(&joint, &inst.labels) else {
            continue;
        };
        let oq = oracle_calibrate(&joint_rows(&joint), &inst.labels).unwrap();
        for i in 0..q.c() {
            for j in 0..q.c() {
                assert!((q.get(i, j) - oq[i][j]).abs() < 1e-12);
            }
        }
        let flags = prune_by_noise_rate(&inst.p, &inst.labels, &q).unwrap();
        let expected = oracle_prune(&inst.p, &inst.labels, &oq);
        assert_eq!(
            flags.as_slice(),
            expected.into_iter().collect::<Vec<_>>(),
            "seed {seed}"
        );
    }
}

#[test]
fn full_pbnr_matches() {
    for seed in 0..INSTANCES {
        let inst = random_instance(seed, 200, 5);
        let flags = cl_pbnr(&inst.p, &inst.labels).unwrap();
        let expected: Vec<usize> = oracle_pbnr(&inst.p, &inst.labels).into_iter().collect();
        assert_eq!(flags.as_slice(), expected, "seed {seed}");
    }
}

#[test]
fn majority_vote_matches() {
    use rand::{Rng, SeedableRng};
    for seed in 0..INSTANCES {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let members = rng.random_range(1..=7);
        let n = rng.random_range(1..=200);
        let sets: Vec<FlagSet> = (0..members)
            .map(|_| (0..n).filter(|_| rng.random::<f64>() < 0.3).collect())
            .collect();
        for m in 1..=members {
            let got = majority_vote(&sets, m).unwrap();
            let expected: Vec<usize> = oracle_vote(&sets, m).into_iter().collect();
            assert_eq!(got.as_slice(), expected, "seed {seed} m {m}");
        }
    }
}

#[test]
fn mcd_mean_matches() {
    for seed in 0..INSTANCES {
        let stack = random_stack(
            seed,
            1 + (seed as usize % 7),
            20 + seed as usize % 50,
            2 + seed as usize % 4,
        );
        let mean = mcd_mean(&stack);
        for (a, b) in mean.values().iter().zip(oracle_mean(&stack)) {
            assert!((a - b).abs() < 1e-12, "seed {seed}");
        }
    }
}

#[test]
fn similarity_and_flip_profile_match() {
    for seed in 0..INSTANCES {
        let inst = random_instance(seed, 200, 5);
        let s = similarity_scores(&inst.p, &inst.labels).unwrap();
        let os = oracle_similarity(&inst.p, &inst.labels);
        for k in 0..s.c() {
            for l in 0..s.c() {
                assert!((s.get(k, l) - os[k][l]).abs() < 1e-12, "seed {seed}");
            }
        }
        let profile = flip_profile(&s).unwrap();
        let expected = oracle_flip_profile(&os);
        for (k, (ts, group, fp)) in expected.iter().enumerate() {
            let got = profile.class(k);
            assert_eq!(&got.group, group, "seed {seed} class {k}");
            assert!((got.ts - ts).abs() < 1e-12);
            for (a, b) in got.fp.iter().zip(fp) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn flip_profile_on_adversarial_scores() {
    // Equal scores, single dominant score, and scores straddling the threshold.
    let cases = vec![
        vec![
            vec![0.0, 0.1, 0.1, 0.1],
            vec![0.2, 0.0, 0.2, 0.2],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.3, 0.1, 0.1, 0.0],
        ],
        vec![
            vec![0.0, 0.9, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.5, 0.5, 0.0],
        ],
    ];
    for rows in cases {
        let s = SimilarityMatrix::from_rows(&rows).unwrap();
        let profile = flip_profile(&s).unwrap();
        for (k, (_, group, fp)) in oracle_flip_profile(&rows).iter().enumerate() {
            assert_eq!(&profile.class(k).group, group);
            for (a, b) in profile.class(k).fp.iter().zip(fp) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn student_t_matches_numerical_integration() {
    for df in [1, 2, 3, 4, 10, 30] {
        for t in [0.5, 1.0, 2.0, 5.0, 10.0] {
            let p = uqled_core::p_two_sided(t, df).unwrap();
            let o = integrated_two_sided_p(t, df);
            assert!((p - o).abs() < 1e-6, "t {t} df {df}: {p} vs {o}");
            let s = statrs::distribution::StudentsT::new(0.0, 1.0, df as f64).unwrap();
            use statrs::distribution::ContinuousCDF;
            assert!(
                (p - 2.0 * (1.0 - s.cdf(t))).abs() < 1e-9,
                "statrs t {t} df {df}"
            );
        }
    }
}
