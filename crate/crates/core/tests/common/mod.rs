//! Reference computations written independently of the library: brute-force
//! sums over probability tables, hand-rolled Hamiltonians and small fits.
#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tlim::estimators::{
    additive_interaction, additive_interaction_categorical, multiplicative_interaction, multiplicative_via_expectations,
    EstimatorConfig, TargetSpec,
};
use tlim::rbm::RbmParams;
use tlim::simulators::{exact_interaction, ExactDistribution, ExactKind};
use tlim::store::{BitColumn, SampleMatrixBuilder, VariableMeta};
use tlim::{Assignment, DataView, SampleMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

pub fn normalise(log_w: &[f64]) -> Vec<f64> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn bit(s: usize, k: usize) -> u8 {
    (s >> k & 1) as u8
}

fn spin(s: usize, k: usize) -> f64 {
    if s >> k & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `ln I^m` straight from the table: alternating sum of log masses of the
/// target patterns with every conditioning variable at its reference value.
pub fn brute_log_im(p: &[f64], targets: &[usize], reference: &[(usize, u8)]) -> f64 {
    let n = targets.len();
    let mut total = 0.0;
    for pattern in 0..1usize << n {
        let mass: f64 = p
            .iter()
            .enumerate()
            .filter(|&(s, _)| reference.iter().all(|&(v, x)| bit(s, v) == x))
            .filter(|&(s, _)| (0..n).all(|q| bit(s, targets[q]) == bit(pattern, q)))
            .map(|(_, &w)| w)
            .sum();
        let sign = if (n - pattern.count_ones() as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += sign * mass.ln();
    }
    total
}

/// Alternating sum of conditional outcome means.
pub fn brute_additive(p: &[f64], y: &dyn Fn(usize) -> f64, targets: &[usize], reference: &[(usize, u8)]) -> f64 {
    let n = targets.len();
    let mut total = 0.0;
    for pattern in 0..1usize << n {
        let (mut mass, mut ymass) = (0.0, 0.0);
        for (s, &w) in p.iter().enumerate() {
            if reference.iter().all(|&(v, x)| bit(s, v) == x) && (0..n).all(|q| bit(s, targets[q]) == bit(pattern, q)) {
                mass += w;
                ymass += w * y(s);
            }
        }
        let sign = if (n - pattern.count_ones() as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += sign * ymass / mass;
    }
    total
}

pub fn random_log_weights(n_vars: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..1usize << n_vars).map(|_| r.random_range(-2.0..2.0)).collect()
}

fn neighbours(side: usize, site: usize) -> [usize; 4] {
    let (row, col) = (site / side, site % side);
    [
        ((row + side - 1) % side) * side + col,
        ((row + 1) % side) * side + col,
        row * side + (col + side - 1) % side,
        row * side + (col + 1) % side,
    ]
}

/// `ln w(s) = (J/T) Σ_i Σ_{j ∈ N(i)} s_i s_j`, the sum over ordered neighbour pairs.
pub fn ising_log_weights(side: usize, j: f64, t: f64) -> Vec<f64> {
    let n = side * side;
    (0..1usize << n)
        .map(|s| {
            let e: f64 = (0..n).map(|i| neighbours(side, i).iter().map(|&k| spin(s, i) * spin(s, k)).sum::<f64>()).sum();
            j / t * e
        })
        .collect()
}

/// The four sites of the plaquette anchored at `site` (down and to the right).
pub fn plaquette_sites(side: usize, site: usize) -> [usize; 4] {
    let (row, col) = (site / side, site % side);
    let r1 = (row + 1) % side;
    let c1 = (col + 1) % side;
    [site, row * side + c1, r1 * side + col, r1 * side + c1]
}

/// `ln w(s) = (J/T) Σ_p Π_{i ∈ p} s_i`.
pub fn plaquette_log_weights(side: usize, j: f64, t: f64) -> Vec<f64> {
    let n = side * side;
    (0..1usize << n)
        .map(|s| j / t * (0..n).map(|a| plaquette_sites(side, a).iter().map(|&k| spin(s, k)).product::<f64>()).sum::<f64>())
        .collect()
}

pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

pub fn random_rbm(m: usize, n: usize, r: &mut ChaCha8Rng) -> RbmParams {
    let w = (0..n).map(|_| (0..m).map(|_| r.random_range(-1.5..1.5)).collect()).collect();
    let b = (0..m).map(|_| r.random_range(-1.0..1.0)).collect();
    let c = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    RbmParams::new(w, b, c).unwrap()
}

/// `ln p(v) + const = b·v + Σ_i softplus(c_i + W_i·v)`.
pub fn rbm_log_weights(p: &RbmParams) -> Vec<f64> {
    (0..1usize << p.m)
        .map(|s| {
            let on = |j: usize| s >> j & 1 == 1;
            let bias: f64 = (0..p.m).filter(|&j| on(j)).map(|j| p.b[j]).sum();
            bias + (0..p.n).map(|i| softplus(p.c[i] + (0..p.m).filter(|&j| on(j)).map(|j| p.w[i][j]).sum::<f64>())).sum::<f64>()
        })
        .collect()
}

/// A random tuple of 1..=max_order targets and a random subset of the rest
/// to condition on.
pub fn random_tuple(n_vars: usize, max_order: usize, r: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut vars: Vec<usize> = (0..n_vars).collect();
    for i in (1..vars.len()).rev() {
        vars.swap(i, r.random_range(0..=i));
    }
    let k = r.random_range(1..=max_order.min(n_vars));
    let targets = vars[..k].to_vec();
    let cond = vars[k..].iter().copied().filter(|_| r.random_bool(0.7)).collect();
    (targets, cond)
}

pub fn exact_cfg() -> EstimatorConfig {
    EstimatorConfig { min_bin_count: 0.0, ..EstimatorConfig::default() }
}

/// Worst relative disagreement between the oracle and every estimator route
/// on exact-frequency data for one tuple.
pub fn oracle_gap(log_w: &[f64], n_vars: usize, targets: &[usize], cond: &[usize]) -> f64 {
    let p = normalise(log_w);
    let reference: Vec<(usize, u8)> = cond.iter().map(|&c| (c, 0)).collect();
    let truth = brute_log_im(&p, targets, &reference);

    let d = ExactDistribution::from_log_weights(n_vars, log_w).unwrap();
    let logp = |s: usize| p[s].ln();
    let (m, w) = d.weighted_samples(Some(&logp)).unwrap();
    let y = m.index_of("Y").unwrap();
    let view = DataView::weighted(&m, &w).unwrap();
    let spec = TargetSpec::new(targets.to_vec()).with_conditioning(cond.to_vec());
    let cfg = exact_cfg();

    let counts = multiplicative_interaction(&view, &spec, &cfg).unwrap().log_value.unwrap();
    let means = multiplicative_via_expectations(&view, &spec, &cfg).unwrap().log_value.unwrap();
    let table = exact_interaction(&d, &spec, ExactKind::LogMultiplicative).unwrap();
    let mut routes = vec![counts, means, table];
    // E(ln p | cell) is ln of a cell mass only when nothing is marginalised
    if targets.len() + cond.len() == n_vars {
        routes.push(additive_interaction(&view, y, &spec, &cfg).unwrap().value);
    }
    routes.iter().map(|&v| rel_err(v, truth)).fold(0.0, f64::max)
}

/// Closed-form RBM n-point interaction against enumeration of its marginal.
pub fn rbm_gap(p: &RbmParams, targets: &[usize]) -> f64 {
    let probs = normalise(&rbm_log_weights(p));
    let reference: Vec<(usize, u8)> = (0..p.m).filter(|v| !targets.contains(v)).map(|v| (v, 0)).collect();
    rel_err(p.npoint_log_interaction(targets).unwrap(), brute_log_im(&probs, targets, &reference))
}

/// Finite samples from a random table, plus a random outcome column.
pub fn random_dataset(n_vars: usize, n: usize, seed: u64) -> SampleMatrix {
    let mut r = rng(seed);
    let d = ExactDistribution::from_log_weights(n_vars, &random_log_weights(n_vars, &mut r)).unwrap();
    let m = d.sample(n, seed ^ 0x9e37).unwrap();
    let mut b = SampleMatrixBuilder::new(n);
    for v in 0..n_vars {
        b = b.binary(m.variable(v).clone(), m.binary_column(v).unwrap().clone());
    }
    b.outcome(VariableMeta::outcome("Y"), (0..n).map(|_| r.random_range(-3.0..3.0)).collect()).build().unwrap()
}

/// Every permutation of `items`.
pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// True when every ordering of the targets gives bit-identical estimates.
pub fn permutation_exact(m: &SampleMatrix, targets: &[usize], cond: &[usize]) -> bool {
    let view = DataView::new(m);
    let y = m.index_of("Y").unwrap();
    let cfg = EstimatorConfig::flagging(1.0);
    let run = |t: &[usize]| {
        let spec = TargetSpec::new(t.to_vec()).with_conditioning(cond.to_vec());
        let mult = multiplicative_interaction(&view, &spec, &cfg).ok().map(|e| e.value.to_bits());
        let add = additive_interaction(&view, y, &spec, &cfg).ok().map(|e| e.value.to_bits());
        (mult, add)
    };
    let base = run(targets);
    permutations(targets).iter().all(|p| run(p) == base)
}

/// A categorical table: `T1 ∈ {0,1,2}`, `T2 ∈ {0,1}`, covariate `W ∈ {0,1}`,
/// one weighted row per configuration and outcome `f(t1, t2, w)`.
pub fn categorical_table(f: &dyn Fn(u8, u8, u8) -> f64, seed: u64) -> (SampleMatrix, Vec<f64>) {
    let mut r = rng(seed);
    let rows: Vec<(u8, u8, u8)> = (0..3).flat_map(|a| (0..2).flat_map(move |b| (0..2).map(move |c| (a, b, c)))).collect();
    let m = SampleMatrixBuilder::new(rows.len())
        .categorical(VariableMeta::categorical("T1", 3), rows.iter().map(|r| r.0).collect())
        .binary(VariableMeta::binary("T2"), BitColumn::from_bools(rows.iter().map(|r| r.1 == 1)))
        .binary(VariableMeta::binary("W"), BitColumn::from_bools(rows.iter().map(|r| r.2 == 1)))
        .outcome(VariableMeta::outcome("Y"), rows.iter().map(|&(a, b, c)| f(a, b, c)).collect())
        .build()
        .unwrap();
    let w = rows.iter().map(|_| r.random_range(0.1..1.0)).collect();
    (m, w)
}

/// `I^a_{T1,T2}(t1 t1'; t2 t2')` given `W = w`.
pub fn categorical_ia(m: &SampleMatrix, weights: &[f64], first: usize, t1: (u8, u8), t2: (u8, u8), w: u8) -> f64 {
    let view = DataView::weighted(m, weights).unwrap();
    let (a, b) = if first == 0 { (0, 1) } else { (1, 0) };
    let (ta, tb) = if first == 0 { (t1, t2) } else { (t2, t1) };
    let spec = TargetSpec::new([a, b])
        .with_transitions([ta, tb])
        .with_conditioning([2])
        .with_reference(Assignment::new(vec![(2, w)]).unwrap());
    additive_interaction_categorical(&view, 3, &spec, &exact_cfg()).unwrap().value
}

/// Largest `|p(s_i | all others) - p(s_i | blanket)|` over sites and states.
pub fn markov_gap(log_w: &[f64], n_vars: usize, blanket: &dyn Fn(usize) -> Vec<usize>) -> f64 {
    let p = normalise(log_w);
    let mut worst: f64 = 0.0;
    for i in 0..n_vars {
        let nb = blanket(i);
        // p(s_i = 1 | blanket configuration), one entry per blanket pattern
        let mut on = vec![0.0; 1 << nb.len()];
        let mut all = vec![0.0; 1 << nb.len()];
        let key = |s: usize| nb.iter().enumerate().map(|(q, &v)| (s >> v & 1) << q).sum::<usize>();
        for (s, &w) in p.iter().enumerate() {
            all[key(s)] += w;
            if s >> i & 1 == 1 {
                on[key(s)] += w;
            }
        }
        for s in 0..p.len() {
            if s >> i & 1 == 1 {
                continue;
            }
            let full = p[s | 1 << i] / (p[s] + p[s | 1 << i]);
            let k = key(s);
            worst = worst.max((full - on[k] / all[k]).abs());
        }
    }
    worst
}

pub fn ising_neighbours(side: usize) -> impl Fn(usize) -> Vec<usize> {
    move |i| {
        let mut v = neighbours(side, i).to_vec();
        v.sort_unstable();
        v.dedup();
        v
    }
}

pub fn plaquette_neighbours(side: usize) -> impl Fn(usize) -> Vec<usize> {
    move |i| {
        let mut v: Vec<usize> = (0..side * side)
            .filter(|&a| plaquette_sites(side, a).contains(&i))
            .flat_map(|a| plaquette_sites(side, a))
            .filter(|&s| s != i)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Maximum-likelihood fit of a pairwise-only model in the {0,1} basis,
/// `p ∝ exp(-(Σ h_i x_i + Σ J_ij x_i x_j))`, to the empirical moments of three
/// binary columns. Returns `(h1, h2, h3, J12, J13, J23)`.
pub fn fit_pairwise3(m: &SampleMatrix) -> [f64; 6] {
    let n = m.n_samples() as f64;
    let features = |x: [f64; 3]| [x[0], x[1], x[2], x[0] * x[1], x[0] * x[2], x[1] * x[2]];
    let mut emp = [0.0; 6];
    for row in 0..m.n_samples() {
        let x = [0, 1, 2].map(|v| m.value(v, row));
        for (e, f) in emp.iter_mut().zip(features(x)) {
            *e += f / n;
        }
    }
    let states: Vec<[f64; 6]> = (0..8).map(|s| features([0, 1, 2].map(|k| (s >> k & 1) as f64))).collect();
    let mut theta = [0.0; 6];
    for _ in 0..20_000 {
        let log_w: Vec<f64> = states.iter().map(|f| -f.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>()).collect();
        let q = normalise(&log_w);
        for k in 0..6 {
            let model: f64 = states.iter().zip(&q).map(|(f, p)| f[k] * p).sum();
            theta[k] += 0.5 * (model - emp[k]);
        }
    }
    theta
}
