//! Random instances and brute-force reference implementations shared by the
//! integration tests. The references favour obviousness over speed: full
//! sorts, explicit sets, no shared helpers with the library.

#![allow(dead_code, clippy::needless_range_loop)]

pub mod tables;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uqled_core::{FlagSet, LabelVector, McdStack, ProbMatrix};

pub struct Instance {
    pub p: ProbMatrix,
    pub labels: LabelVector,
}

/// Row-stochastic matrix. With `coarse`, entries are multiples of 1/8 so
/// ties in probability and margin are common.
pub fn random_probs(rng: &mut ChaCha8Rng, n: usize, c: usize, coarse: bool) -> ProbMatrix {
    let mut values = Vec::with_capacity(n * c);
    for _ in 0..n {
        let raw: Vec<f64> = if coarse {
            let mut units = vec![0u32; c];
            for _ in 0..8 {
                units[rng.random_range(0..c)] += 1;
            }
            units.into_iter().map(|u| u as f64 / 8.0).collect()
        } else {
            let w: Vec<f64> = (0..c).map(|_| rng.random::<f64>().powi(3) + 1e-9).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|v| v / s).collect()
        };
        values.extend(raw);
    }
    ProbMatrix::new(n, c, values).unwrap()
}

/// Labels covering every class, the rest agreeing with the row argmax most
/// of the time.
pub fn random_labels(rng: &mut ChaCha8Rng, p: &ProbMatrix) -> LabelVector {
    let (n, c) = (p.n(), p.c());
    let labels = (0..n)
        .map(|z| {
            if z < c {
                z
            } else if rng.random::<f64>() < 0.7 {
                argmax(p.row(z))
            } else {
                rng.random_range(0..c)
            }
        })
        .collect();
    LabelVector::new(labels, c).unwrap()
}

pub fn random_instance(seed: u64, max_n: usize, max_c: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = rng.random_range(2..=max_c);
    let n = rng.random_range(c..=max_n);
    let p = random_probs(&mut rng, n, c, seed.is_multiple_of(2));
    let labels = random_labels(&mut rng, &p);
    Instance { p, labels }
}

pub fn random_stack(seed: u64, passes: usize, n: usize, c: usize) -> McdStack {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    McdStack::new(
        (0..passes)
            .map(|_| random_probs(&mut rng, n, c, seed.is_multiple_of(3)))
            .collect(),
    )
    .unwrap()
}

pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for j in 1..row.len() {
        if row[j] > row[best] {
            best = j;
        }
    }
    best
}

pub fn oracle_thresholds(p: &ProbMatrix, y: &LabelVector) -> Vec<f64> {
    (0..p.c())
        .map(|j| {
            let own: Vec<f64> = (0..p.n())
                .filter(|&z| y.get(z) == j)
                .map(|z| p.get(z, j))
                .collect();
            own.iter().sum::<f64>() / own.len() as f64
        })
        .collect()
}

/// Joint counts; `gate(z)` decides whether sample `z` is counted at all.
pub fn oracle_joint(
    p: &ProbMatrix,
    y: &LabelVector,
    t: &[f64],
    gate: impl Fn(usize) -> bool,
) -> Vec<Vec<u64>> {
    let c = p.c();
    let mut joint = vec![vec![0u64; c]; c];
    for z in (0..p.n()).filter(|&z| gate(z)) {
        let mut qualifying: Vec<usize> = (0..c).filter(|&j| p.get(z, j) >= t[j]).collect();
        qualifying.sort_by(|&a, &b| p.get(z, b).total_cmp(&p.get(z, a)).then(a.cmp(&b)));
        if let Some(&j) = qualifying.first() {
            joint[y.get(z)][j] += 1;
        }
    }
    joint
}

pub fn oracle_entropy(row: &[f64]) -> f64 {
    let mut h = 0.0;
    for &v in row {
        if v > 0.0 {
            h -= v * v.ln();
        }
    }
    h
}

pub fn oracle_entropy_thresholds(p: &ProbMatrix, y: &LabelVector) -> Vec<f64> {
    (0..p.c())
        .map(|j| {
            let own: Vec<f64> = (0..p.n())
                .filter(|&z| y.get(z) == j)
                .map(|z| oracle_entropy(p.row(z)))
                .collect();
            own.iter().sum::<f64>() / own.len() as f64
        })
        .collect()
}

pub fn oracle_calibrate(joint: &[Vec<u64>], y: &LabelVector) -> Option<Vec<Vec<f64>>> {
    let c = joint.len();
    let mut cal = vec![vec![0.0; c]; c];
    for i in 0..c {
        let row: u64 = joint[i].iter().sum();
        let size = (0..y.len()).filter(|&z| y.get(z) == i).count() as f64;
        for j in 0..c {
            if row > 0 {
                cal[i][j] = joint[i][j] as f64 / row as f64 * size;
            }
        }
    }
    let total: f64 = cal.iter().flatten().sum();
    if total == 0.0 {
        return None;
    }
    Some(
        cal.into_iter()
            .map(|r| r.into_iter().map(|v| v / total).collect())
            .collect(),
    )
}

pub fn oracle_prune(p: &ProbMatrix, y: &LabelVector, q: &[Vec<f64>]) -> BTreeSet<usize> {
    let (n, c) = (p.n(), p.c());
    let mut flagged = BTreeSet::new();
    for i in 0..c {
        for j in (0..c).filter(|&j| j != i) {
            let mut cands: Vec<usize> = (0..n).filter(|&z| y.get(z) == i).collect();
            let take = ((n as f64 * q[i][j]).round() as usize).min(cands.len());
            let margin = |z: usize| p.get(z, j) - p.get(z, i);
            cands.sort_by(|&a, &b| margin(b).total_cmp(&margin(a)).then(a.cmp(&b)));
            flagged.extend(cands.into_iter().take(take));
        }
    }
    flagged
}

pub fn oracle_pbnr(p: &ProbMatrix, y: &LabelVector) -> BTreeSet<usize> {
    let t = oracle_thresholds(p, y);
    let joint = oracle_joint(p, y, &t, |_| true);
    oracle_calibrate(&joint, y).map_or_else(BTreeSet::new, |q| oracle_prune(p, y, &q))
}

pub fn oracle_vote(sets: &[FlagSet], m: usize) -> BTreeSet<usize> {
    let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
    for s in sets {
        for z in s.iter() {
            *votes.entry(z).or_default() += 1;
        }
    }
    votes
        .into_iter()
        .filter(|&(_, v)| v >= m)
        .map(|(z, _)| z)
        .collect()
}

pub fn oracle_mean(stack: &McdStack) -> Vec<f64> {
    let (n, c, f) = (stack.n(), stack.c(), stack.num_passes());
    let mut out = vec![0.0; n * c];
    for z in 0..n {
        for k in 0..c {
            let mut s = 0.0;
            for pass in stack.passes() {
                s += pass.get(z, k);
            }
            out[z * c + k] = s / f as f64;
        }
    }
    out
}

pub fn oracle_similarity(p: &ProbMatrix, y: &LabelVector) -> Vec<Vec<f64>> {
    let c = p.c();
    (0..c)
        .map(|k| {
            let members: Vec<usize> = (0..p.n()).filter(|&z| y.get(z) == k).collect();
            (0..c)
                .map(|l| {
                    if l == k {
                        0.0
                    } else {
                        members.iter().map(|&z| p.get(z, l)).sum::<f64>() / members.len() as f64
                    }
                })
                .collect()
        })
        .collect()
}

/// (ts, group, fp) per class.
pub fn oracle_flip_profile(s: &[Vec<f64>]) -> Vec<(f64, Vec<usize>, Vec<f64>)> {
    let c = s.len();
    (0..c)
        .map(|k| {
            let others: Vec<usize> = (0..c).filter(|&l| l != k).collect();
            let vals: Vec<f64> = others.iter().map(|&l| s[k][l]).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let std = (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / vals.len() as f64)
                .sqrt();
            let ts = mean + std;
            let mut group: Vec<usize> = others
                .iter()
                .copied()
                .filter(|&l| s[k][l] >= ts - 1e-12)
                .collect();
            if group.is_empty() {
                let mut best = others[0];
                for &l in &others {
                    if s[k][l] > s[k][best] {
                        best = l;
                    }
                }
                group = vec![best];
            }
            let denom: f64 = group.iter().map(|&l| s[k][l].exp()).sum();
            let mut fp = vec![0.0; c];
            for &l in &group {
                fp[l] = s[k][l].exp() / denom;
            }
            (ts, group, fp)
        })
        .collect()
}

/// Student t density, integrated with composite Simpson on `[|t|, inf)`
/// after the substitution `x = |t| + u / (1 - u)`.
pub fn integrated_two_sided_p(t: f64, df: usize) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let v = df as f64;
    let log_norm =
        ln_gamma((v + 1.0) / 2.0) - ln_gamma(v / 2.0) - 0.5 * (v * std::f64::consts::PI).ln();
    let density = |x: f64| (log_norm - (v + 1.0) / 2.0 * (1.0 + x * x / v).ln()).exp();
    let a = t.abs();
    let integrand = |u: f64| {
        if u >= 1.0 {
            // Limit of the transformed tail: non-zero only for the Cauchy case.
            return if df == 1 { log_norm.exp() } else { 0.0 };
        }
        let w = 1.0 - u;
        density(a + u / w) / (w * w)
    };
    let steps = 200_000;
    let h = 1.0 / steps as f64;
    let mut sum = integrand(0.0) + integrand(1.0);
    for i in 1..steps {
        let u = i as f64 * h;
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(u);
    }
    2.0 * sum * h / 3.0
}
