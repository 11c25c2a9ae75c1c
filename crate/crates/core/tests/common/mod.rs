#![allow(dead_code)]

use ebco::attribution::ReferenceSet;
use ebco::dataset::{generate_synthetic, Dataset, EncodingMap, SyntheticSpec, ValueDomain};
use ebco::model::{MlpModel, OutputActivation};
use ebco::search::Direction;
use ebco::{Assignment, Value};
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, shape: (usize, usize), scale: f64) -> Array2<f64> {
    Array2::from_shape_fn(shape, |_| rng.gen_range(-scale..scale))
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| rng.gen_range(-scale..scale))
}

/// A random network over the given encoding.
pub fn random_model(rng: &mut ChaCha8Rng, map: EncodingMap, hidden: usize, labels: usize, output: OutputActivation) -> MlpModel {
    let p = map.width;
    MlpModel::from_parts(
        uniform(rng, (p, hidden), 1.0),
        uniform_vec(rng, hidden, 0.5),
        uniform(rng, (hidden, labels), 1.0),
        uniform_vec(rng, labels, 0.5),
        output,
        map,
    )
    .unwrap()
}

/// Random group widths summing to the encoding width, `n` groups.
pub fn random_groups(rng: &mut ChaCha8Rng, n: usize) -> EncodingMap {
    let widths: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    EncodingMap::grouped(&widths)
}

pub fn random_refs(rng: &mut ChaCha8Rng, r: usize, width: usize) -> ReferenceSet {
    ReferenceSet::from_rows(uniform(rng, (r, width), 1.5)).unwrap()
}

/// Small categorical dataset with an untrained random network on top.
pub fn random_instance(seed: u64, n_features: usize, values: usize, labels: usize) -> (Dataset, MlpModel) {
    let spec = SyntheticSpec {
        n_features,
        values_per_feature: values,
        n_labels: labels,
        n_samples: 40,
        n_planted: 1,
        ..SyntheticSpec::default()
    };
    let (ds, _) = generate_synthetic(&spec, seed).unwrap();
    let mut r = rng(seed ^ 0x5eed);
    let model = random_model(&mut r, ds.encoding_map().clone(), 6, labels, OutputActivation::Sigmoid);
    (ds, model)
}

/// `f(x with group columns of S taken from x, the rest from r)`, averaged over `refs`.
pub fn coalition_value(model: &MlpModel, x: &[f64], refs: &Array2<f64>, groups: &[std::ops::Range<usize>], mask: usize) -> Vec<f64> {
    let mut rows = refs.clone();
    for mut row in rows.rows_mut() {
        for (g, cols) in groups.iter().enumerate() {
            if mask >> g & 1 == 1 {
                for c in cols.clone() {
                    row[c] = x[c];
                }
            }
        }
    }
    let p = model.predict(rows.view()).unwrap();
    p.mean_axis(ndarray::Axis(0)).unwrap().to_vec()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Shapley values by enumerating every coalition, straight from the definition.
pub fn brute_force_shapley(model: &MlpModel, x: &[f64], refs: &Array2<f64>) -> Array2<f64> {
    let groups = model.encoding_map().groups();
    let n = groups.len();
    let l = model.n_labels();
    let values: Vec<Vec<f64>> = (0..1usize << n).map(|s| coalition_value(model, x, refs, &groups, s)).collect();
    let mut phi = Array2::zeros((n, l));
    for i in 0..n {
        for s in 0..1usize << n {
            if s >> i & 1 == 1 {
                continue;
            }
            let size = s.count_ones() as usize;
            let w = factorial(size) * factorial(n - size - 1) / factorial(n);
            for k in 0..l {
                phi[[i, k]] += w * (values[s | 1 << i][k] - values[s][k]);
            }
        }
    }
    phi
}

/// Population covariance ratio computed directly from two prediction columns.
pub fn covariance_ratio(pc: &[f64], p: &[f64]) -> f64 {
    let m = p.len() as f64;
    let mp = p.iter().sum::<f64>() / m;
    let mc = pc.iter().sum::<f64>() / m;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (a, b) in pc.iter().zip(p) {
        cov += (a - mc) * (b - mp);
        var += (b - mp) * (b - mp);
    }
    cov / var
}

/// Every full assignment over `domains` with its `(feature name, value index)` key.
pub fn all_assignments(domains: &[ValueDomain]) -> Vec<(Assignment, Vec<(String, usize)>)> {
    let mut out = vec![(Assignment::new(), Vec::new())];
    for d in domains {
        let mut next = Vec::new();
        for (a, key) in &out {
            for (i, v) in d.candidates.iter().enumerate() {
                let mut a2: Assignment = a.clone();
                a2.insert(d.feature.clone(), v.clone());
                let mut k2: Vec<(String, usize)> = key.clone();
                k2.push((d.feature.clone(), i));
                k2.sort();
                next.push((a2, k2));
            }
        }
        out = next;
    }
    out
}

pub struct Scored {
    pub assignment: Assignment,
    pub key: Vec<(String, usize)>,
    pub lambda: Vec<f64>,
    pub upsilon: Vec<f64>,
    pub big_gamma: f64,
    pub objective: f64,
}

/// Scores every full assignment without going through the library's scorer.
pub fn score_all(model: &MlpModel, ds: &Dataset, domains: &[ValueDomain], omega: f64, rho: f64, passthrough: bool) -> Vec<Scored> {
    let base = model.predict(ds.encoded()).unwrap();
    all_assignments(domains)
        .into_iter()
        .map(|(a, key)| {
            let pc = model.predict(ds.encoded_under(&a).unwrap().view()).unwrap();
            let l = pc.ncols();
            let lambda: Vec<f64> = (0..l).map(|k| pc.column(k).mean().unwrap()).collect();
            let upsilon: Vec<f64> = (0..l)
                .map(|k| covariance_ratio(&pc.column(k).to_vec(), &base.column(k).to_vec()))
                .collect();
            let big_gamma = lambda
                .iter()
                .zip(&upsilon)
                .map(|(lam, ups)| {
                    let g = omega * (1.0 - lam) + (1.0 - omega) * ups;
                    if g < rho {
                        0.0
                    } else if passthrough {
                        g
                    } else {
                        rho
                    }
                })
                .sum();
            let objective = lambda.iter().sum::<f64>() / l as f64;
            Scored {
                assignment: a,
                key,
                lambda,
                upsilon,
                big_gamma,
                objective,
            }
        })
        .collect()
}

pub fn minimize_all() -> Vec<Direction> {
    vec![Direction::Minimize]
}

pub fn cat(s: &str) -> Value {
    Value::from(s)
}
