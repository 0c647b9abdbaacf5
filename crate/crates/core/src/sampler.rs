//! Seeded Monte Carlo generators for the three ensembles.
//!
//! Every sampler owns a `ChaCha12` generator seeded from a `u64`; the same
//! seed and parameters give byte-identical edge lists.

use std::cell::Cell;
use std::collections::HashMap;
use std::io::Write;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::maxent::MaxEntModel;

/// Identifier of the generator recorded in sample metadata.
pub const RNG_ID: &str = "chacha12";

const PARITY_CAP: usize = 1000;
const REJECT_CAP: usize = 1000;
const REPAIR_TRIES: usize = 200;

/// What to do with self-loops and multi-edges produced by stub matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplePolicy {
    /// Drop them and report how many stubs were lost.
    #[default]
    Erase,
    /// Redraw the whole matching until the result is simple.
    Reject,
}

/// Metadata written next to a sampled edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub model: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub rng: String,
    pub policy: SamplePolicy,
    pub stubs: usize,
    pub self_loops: usize,
    pub multi_edges: usize,
    /// Fraction of stubs lost to erased self-loops and multi-edges.
    pub erased_fraction: f64,
    /// Matchings drawn (more than one only under `Reject`).
    pub attempts: usize,
    /// Correlated sampler only: nodes holding ends from two degree classes.
    pub mixed_nodes: usize,
    /// Correlated sampler only: endpoint swaps made to remove self-loops and
    /// multi-edges before erasure.
    pub repaired: usize,
    pub params: serde_json::Value,
}

impl SampleReport {
    fn new(model: &str, seed: u64, policy: SamplePolicy, params: serde_json::Value) -> Self {
        SampleReport {
            model: model.to_string(),
            n: 0,
            m: 0,
            seed,
            rng: RNG_ID.to_string(),
            policy,
            stubs: 0,
            self_loops: 0,
            multi_edges: 0,
            erased_fraction: 0.0,
            attempts: 1,
            mixed_nodes: 0,
            repaired: 0,
            params,
        }
    }

    pub fn write_json<W: Write>(&self, w: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(std::io::Error::other)
    }
}

/// `G(n, p)` with `p = λ/(n−1)`, by geometric skipping over the pairs.
pub fn sample_poisson_rg(n: usize, lambda: f64, seed: u64) -> Result<(Graph, SampleReport)> {
    if n < 2 {
        return Err(Error::param("need at least 2 nodes"));
    }
    if !(lambda > 0.0) || lambda >= (n - 1) as f64 {
        return Err(Error::param(format!("need 0 < lambda < n - 1 = {}, got {lambda}", n - 1)));
    }
    let p = lambda / (n - 1) as f64;
    let log_q = (-p).ln_1p();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    // pairs (v, w) with w < v in lexicographic order
    let (mut v, mut w) = (1usize, -1i64);
    while v < n {
        let u: f64 = rng.random();
        w += 1 + ((1.0 - u).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((v, w as usize));
        }
    }
    let (g, _) = Graph::with_numeric_ids(n, edges);
    let mut report = SampleReport::new("poisson", seed, SamplePolicy::Erase, serde_json::json!({ "lambda": lambda }));
    report.n = n;
    report.m = g.edge_count();
    report.stubs = 2 * g.edge_count();
    Ok((g, report))
}

/// Cumulative table for drawing indices with given weights.
struct Cumulative(Vec<f64>);

impl Cumulative {
    fn new(weights: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let mut c: Vec<f64> = weights
            .into_iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        for v in c.iter_mut() {
            *v /= acc;
        }
        Cumulative(c)
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.0.partition_point(|&c| c <= u).min(self.0.len() - 1)
    }
}

fn shuffle<T, R: Rng>(v: &mut [T], rng: &mut R) {
    for i in (1..v.len()).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
}

/// Builds the graph from matched stub pairs under `policy`, redrawing the
/// matching with `rematch` when rejecting.
fn finish<F>(
    n: usize,
    mut pairs: Vec<(usize, usize)>,
    policy: SamplePolicy,
    report: &mut SampleReport,
    mut rematch: F,
) -> Result<Graph>
where
    F: FnMut() -> Vec<(usize, usize)>,
{
    loop {
        let stubs = 2 * pairs.len();
        let (g, load) = Graph::with_numeric_ids(n, pairs);
        let simple = load.self_loops == 0 && load.duplicates == 0;
        if policy == SamplePolicy::Erase || simple {
            report.n = n;
            report.m = g.edge_count();
            report.stubs = stubs;
            report.self_loops = load.self_loops;
            report.multi_edges = load.duplicates;
            report.erased_fraction = if stubs == 0 {
                0.0
            } else {
                2.0 * (load.self_loops + load.duplicates) as f64 / stubs as f64
            };
            return Ok(g);
        }
        if report.attempts >= REJECT_CAP {
            return Err(Error::NonConvergence {
                what: "simple-graph rejection sampling".into(),
                iterations: report.attempts,
                residual: (load.self_loops + load.duplicates) as f64,
            });
        }
        report.attempts += 1;
        pairs = rematch();
    }
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Removes self-loops and multi-edges by swapping an endpoint with another
/// end of the same degree class, which keeps every pair's classes. Returns
/// the number of swaps; whatever is left is erased by the caller.
fn repair<R: Rng>(edges: &mut [(usize, usize)], classes: &[(usize, usize)], c: usize, rng: &mut R) -> usize {
    let mut count: HashMap<(usize, usize), u32> = HashMap::with_capacity(edges.len());
    for &(u, v) in edges.iter() {
        *count.entry(key(u, v)).or_insert(0) += 1;
    }
    let bad = |count: &HashMap<(usize, usize), u32>, (u, v): (usize, usize)| u == v || count[&key(u, v)] > 1;
    let suspects: Vec<usize> = (0..edges.len()).filter(|&e| bad(&count, edges[e])).collect();
    if suspects.is_empty() {
        return 0;
    }
    let mut by_class: Vec<Vec<(usize, bool)>> = vec![Vec::new(); c];
    for (e, &(a, b)) in classes.iter().enumerate() {
        by_class[a].push((e, false));
        by_class[b].push((e, true));
    }
    let end = |edges: &[(usize, usize)], (e, second): (usize, bool)| if second { edges[e].1 } else { edges[e].0 };
    let mut swaps = 0;
    for e in suspects {
        for _ in 0..REPAIR_TRIES {
            if !bad(&count, edges[e]) {
                break;
            }
            let second = rng.random::<bool>();
            let class = if second { classes[e].1 } else { classes[e].0 };
            let pool = &by_class[class];
            let (f, f_second) = pool[rng.random_range(0..pool.len())];
            if f == e {
                continue;
            }
            let (mut ne, mut nf) = (edges[e], edges[f]);
            let w = end(edges, (f, f_second));
            let u = end(edges, (e, second));
            if second { ne.1 = w } else { ne.0 = w }
            if f_second { nf.1 = u } else { nf.0 = u }
            if ne.0 == ne.1 || nf.0 == nf.1 || key(ne.0, ne.1) == key(nf.0, nf.1) {
                continue;
            }
            if count.get(&key(ne.0, ne.1)).is_some_and(|&m| m > 0) || count.get(&key(nf.0, nf.1)).is_some_and(|&m| m > 0) {
                continue;
            }
            for old in [edges[e], edges[f]] {
                *count.get_mut(&key(old.0, old.1)).unwrap() -= 1;
            }
            for new in [ne, nf] {
                *count.entry(key(new.0, new.1)).or_insert(0) += 1;
            }
            edges[e] = ne;
            edges[f] = nf;
            swaps += 1;
        }
    }
    swaps
}

/// Configuration model: i.i.d. degrees from `p` (last node redrawn until the
/// stub count is even), uniform stub matching.
pub fn sample_configuration(
    p: &DegreeDistribution,
    n: usize,
    seed: u64,
    policy: SamplePolicy,
) -> Result<(Graph, SampleReport)> {
    if n < 2 {
        return Err(Error::param("need at least 2 nodes"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let table = Cumulative::new(p.pmf().iter().copied());
    let mut degrees: Vec<usize> = (0..n).map(|_| p.k_min() + table.draw(&mut rng)).collect();
    let mut total: usize = degrees.iter().sum();
    let mut tries = 0;
    while total % 2 == 1 {
        if tries == PARITY_CAP {
            return Err(Error::NonConvergence {
                what: "even stub count for the configuration model".into(),
                iterations: tries,
                residual: 1.0,
            });
        }
        total -= degrees[n - 1];
        degrees[n - 1] = p.k_min() + table.draw(&mut rng);
        total += degrees[n - 1];
        tries += 1;
    }
    let mut stubs: Vec<usize> = Vec::with_capacity(total);
    for (i, &k) in degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(i, k));
    }
    let mut matching = |rng: &mut ChaCha12Rng| {
        shuffle(&mut stubs, rng);
        stubs.chunks_exact(2).map(|c| (c[0], c[1])).collect::<Vec<_>>()
    };
    let first = matching(&mut rng);
    let mut report = SampleReport::new(
        "configuration",
        seed,
        policy,
        serde_json::json!({ "k_min": p.k_min(), "k_max": p.k_max(), "mean": p.mean() }),
    );
    let g = finish(n, first, policy, &mut report, || matching(&mut rng))?;
    Ok((g, report))
}

/// Degree-correlated ensemble: `m_edges` degree pairs drawn i.i.d. from
/// `Q_jk`; the `c_j` ends of class `j` are packed into nodes of degree `j`
/// (leftovers share a node with the next class) and matched to those stubs
/// uniformly within each class.
pub fn sample_degree_correlated(
    model: &MaxEntModel,
    m_edges: usize,
    seed: u64,
    policy: SamplePolicy,
) -> Result<(Graph, SampleReport)> {
    if m_edges == 0 {
        return Err(Error::param("need at least one edge"));
    }
    let joint = model.joint();
    let degrees = joint.degrees().to_vec();
    let c = degrees.len();
    let table = Cumulative::new(joint.matrix().iter().copied());
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = (0..m_edges)
        .map(|_| {
            let cell = table.draw(&mut rng);
            (cell / c, cell % c)
        })
        .collect();
    let mut ends = vec![0usize; c];
    for &(a, b) in &pairs {
        ends[a] += 1;
        ends[b] += 1;
    }
    // walk the ends in ascending class order, closing a node once it holds
    // as many ends as the degree of the class being filled; a class whose
    // count is not a multiple of its degree spills into the next one
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); c];
    let mut n = 0usize;
    let mut fill = 0usize;
    let mut mixed_nodes = 0;
    for a in 0..c {
        if ends[a] > 0 && fill > 0 {
            mixed_nodes += 1;
        }
        for _ in 0..ends[a] {
            owners[a].push(n);
            fill += 1;
            if fill >= degrees[a] {
                n += 1;
                fill = 0;
            }
        }
    }
    if fill > 0 {
        n += 1;
    }
    let repaired = Cell::new(0usize);
    let mut matching = |rng: &mut ChaCha12Rng| {
        for o in owners.iter_mut() {
            shuffle(o, rng);
        }
        let mut next = vec![0usize; c];
        let mut edges = pairs
            .iter()
            .map(|&(a, b)| {
                let u = owners[a][next[a]];
                next[a] += 1;
                let v = owners[b][next[b]];
                next[b] += 1;
                (u, v)
            })
            .collect::<Vec<_>>();
        let swaps = repair(&mut edges, &pairs, c, rng);
        repaired.set(repaired.get() + swaps);
        edges
    };
    let first = matching(&mut rng);
    let mut report = SampleReport::new(
        "maxent",
        seed,
        policy,
        serde_json::json!({ "gamma": model.gamma, "r": model.r, "m_edges": m_edges }),
    );
    report.mixed_nodes = mixed_nodes;
    report.repaired = repaired.get();
    let g = finish(n, first, policy, &mut report, || matching(&mut rng))?;
    Ok((g, report))
}
