//! Undirected simple graphs and exact per-node friendship-paradox
//! measurements.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::joint::JointDegreeDistribution;
use crate::numeric::sum;

/// Undirected simple graph with sorted adjacency lists and external string
/// ids for every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    ids: Vec<String>,
    edge_count: usize,
}

/// Counts of input edges dropped while building a simple graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub duplicates: usize,
    pub self_loops: usize,
}

impl Graph {
    /// Builds a graph on `ids.len()` nodes, dropping self-loops and repeated
    /// edges.
    pub fn from_edges<I>(ids: Vec<String>, edges: I) -> (Graph, LoadReport)
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let n = ids.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut report = LoadReport::default();
        for (a, b) in edges {
            assert!(a < n && b < n, "edge endpoint out of range");
            if a == b {
                report.self_loops += 1;
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut doubled = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            doubled += before - list.len();
        }
        report.duplicates = doubled / 2;
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        (Graph { adjacency, ids, edge_count }, report)
    }

    /// Graph on nodes labelled `0..n`.
    pub fn with_numeric_ids<I>(n: usize, edges: I) -> (Graph, LoadReport)
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges((0..n).map(|i| i.to_string()).collect(), edges)
    }

    pub fn empty() -> Graph {
        Graph { adjacency: Vec::new(), ids: Vec::new(), edge_count: 0 }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Each undirected edge once, as `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Writes the graph in the whitespace-separated edge-list format.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, j) in self.edges() {
            writeln!(w, "{} {}", self.ids[i], self.ids[j])?;
        }
        Ok(())
    }
}

/// Parses an edge list: one whitespace-separated pair of node ids per line,
/// `#` comment lines and blank lines ignored.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<(Graph, LoadReport)> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut ids = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |id: &str, ids: &mut Vec<String>| -> usize {
        if let Some(&i) = index.get(id) {
            return i;
        }
        let i = ids.len();
        ids.push(id.to_owned());
        index.insert(id.to_owned(), i);
        i
    };
    for (line_no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse { line: line_no + 1, message: e.to_string() })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::Parse {
                line: line_no + 1,
                message: format!("expected two node ids, got `{trimmed}`"),
            });
        };
        let a = intern(a, &mut ids);
        let b = intern(b, &mut ids);
        edges.push((a, b));
    }
    Ok(Graph::from_edges(ids, edges))
}

/// Deletes degree-0 nodes, compacting indices and keeping ids. Returns the
/// number of nodes removed.
pub fn remove_isolates(g: &Graph) -> (Graph, usize) {
    let mut remap = vec![usize::MAX; g.node_count()];
    let mut ids = Vec::new();
    for (i, slot) in remap.iter_mut().enumerate() {
        if g.degree(i) > 0 {
            *slot = ids.len();
            ids.push(g.ids[i].clone());
        }
    }
    let removed = g.node_count() - ids.len();
    if removed == 0 {
        return (g.clone(), 0);
    }
    let adjacency = (0..g.node_count())
        .filter(|&i| g.degree(i) > 0)
        .map(|i| g.adjacency[i].iter().map(|&j| remap[j]).collect())
        .collect();
    (Graph { adjacency, ids, edge_count: g.edge_count }, removed)
}

/// A real value per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeAttributes {
    values: Vec<f64>,
}

impl NodeAttributes {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("attribute values must be finite"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Reads a two-column CSV `node_id,x` (header optional) and aligns it
    /// with the nodes of `g`. Every node of `g` must appear.
    pub fn read_csv<R: BufRead>(reader: R, g: &Graph) -> Result<Self> {
        let index: HashMap<&str, usize> =
            g.ids().iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut values = vec![None; g.node_count()];
        for (line_no, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut parts = trimmed.split(',').map(str::trim);
            let (Some(id), Some(x), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse {
                    line: line_no + 1,
                    message: "expected `node_id,x`".into(),
                });
            };
            let x = match x.parse::<f64>() {
                Ok(x) if x.is_finite() => x,
                Ok(_) => {
                    return Err(Error::Parse { line: line_no + 1, message: "non-finite attribute".into() })
                }
                // header line
                Err(_) if line_no == 0 => continue,
                Err(_) => {
                    return Err(Error::Parse {
                        line: line_no + 1,
                        message: format!("cannot parse attribute `{x}`"),
                    })
                }
            };
            // attributes for nodes absent from the graph (e.g. isolates) are ignored
            if let Some(&i) = index.get(id) {
                values[i] = Some(x);
            }
        }
        let missing: Vec<&str> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(i, _)| g.id(i))
            .take(5)
            .collect();
        if !missing.is_empty() {
            return Err(Error::domain(format!("attribute missing for nodes {missing:?}")));
        }
        Self::new(values.into_iter().map(Option::unwrap).collect())
    }

    pub fn write_csv<W: Write>(&self, g: &Graph, mut w: W) -> std::io::Result<()> {
        writeln!(w, "node_id,x")?;
        for (i, x) in self.values.iter().enumerate() {
            writeln!(w, "{},{x}", g.id(i))?;
        }
        Ok(())
    }
}

/// Per-node measurements on a graph without isolated nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStats {
    pub degree: Vec<usize>,
    /// `Σ_j A_ij k_j`, kept exactly so the sign of `Δ_i` is exact.
    pub neighbor_degree_sum: Vec<u64>,
    /// `Δ_i = (1/k_i) Σ_j A_ij k_j − k_i`.
    pub delta: Vec<f64>,
    /// `κ_i = Σ_j A_ij / k_j`.
    pub kappa: Vec<f64>,
    pub x: Option<Vec<f64>>,
    /// `Δ_i^(x) = (1/k_i) Σ_j A_ij x_j − x_i`.
    pub delta_x: Option<Vec<f64>>,
}

impl NodeStats {
    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    /// Sign of `Δ_i`, computed in integers.
    pub fn delta_sign(&self, i: usize) -> std::cmp::Ordering {
        let k = self.degree[i] as u64;
        self.neighbor_degree_sum[i].cmp(&(k * k))
    }
}

pub fn node_stats(g: &Graph, attrs: Option<&NodeAttributes>) -> Result<NodeStats> {
    let n = g.node_count();
    if let Some(i) = (0..n).find(|&i| g.degree(i) == 0) {
        return Err(Error::domain(format!("node `{}` has degree 0", g.id(i))));
    }
    if let Some(a) = attrs {
        if a.len() != n {
            return Err(Error::domain(format!(
                "attribute vector has length {}, graph has {n} nodes",
                a.len()
            )));
        }
    }
    let degree = g.degrees();
    let mut neighbor_degree_sum = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);
    let mut kappa = Vec::with_capacity(n);
    for i in 0..n {
        let k = degree[i];
        let s: u64 = g.neighbors(i).iter().map(|&j| degree[j] as u64).sum();
        neighbor_degree_sum.push(s);
        delta.push(s as f64 / k as f64 - k as f64);
        kappa.push(sum(g.neighbors(i).iter().map(|&j| 1.0 / degree[j] as f64)));
    }
    let delta_x = attrs.map(|a| {
        let x = a.values();
        (0..n)
            .map(|i| {
                let nb = sum(g.neighbors(i).iter().map(|&j| x[j]));
                nb / degree[i] as f64 - x[i]
            })
            .collect()
    });
    Ok(NodeStats {
        degree,
        neighbor_degree_sum,
        delta,
        kappa,
        x: attrs.map(|a| a.values().to_vec()),
        delta_x,
    })
}

/// Network-level summary of the per-node differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadoxSummary {
    pub n: usize,
    pub mean_delta: f64,
    /// Population variance.
    pub var_delta: f64,
    pub frac_delta_pos: f64,
    pub frac_delta_zero: f64,
    pub frac_delta_neg: f64,
    pub mean_kappa: f64,
    /// Population covariance of `x` and `κ`.
    pub cov_x_kappa: Option<f64>,
    pub mean_delta_x: Option<f64>,
    /// Covariance of `k` and `κ`, which equals `mean_delta`.
    pub cov_k_kappa: f64,
}

fn covariance(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = sum(x.iter().copied()) / n;
    let my = sum(y.iter().copied()) / n;
    sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my))) / n
}

pub fn paradox_summary(stats: &NodeStats) -> ParadoxSummary {
    use std::cmp::Ordering;
    let n = stats.len();
    let nf = n as f64;
    let (mut pos, mut zero, mut neg) = (0usize, 0usize, 0usize);
    for i in 0..n {
        match stats.delta_sign(i) {
            Ordering::Greater => pos += 1,
            Ordering::Equal => zero += 1,
            Ordering::Less => neg += 1,
        }
    }
    let (mean_delta, var_delta) = crate::numeric::mean_var(&stats.delta);
    let k: Vec<f64> = stats.degree.iter().map(|&k| k as f64).collect();
    ParadoxSummary {
        n,
        mean_delta,
        var_delta,
        frac_delta_pos: pos as f64 / nf,
        frac_delta_zero: zero as f64 / nf,
        frac_delta_neg: neg as f64 / nf,
        mean_kappa: sum(stats.kappa.iter().copied()) / nf,
        cov_x_kappa: stats.x.as_ref().map(|x| covariance(x, &stats.kappa)),
        mean_delta_x: stats.delta_x.as_ref().map(|d| sum(d.iter().copied()) / nf),
        cov_k_kappa: covariance(&k, &stats.kappa),
    }
}

/// Degree assortativity from the oriented edge-end degree pairs, computed in
/// exact integer arithmetic up to the final division. `None` when the
/// edge-end degrees have zero variance (including edgeless graphs).
pub fn assortativity(g: &Graph) -> Option<f64> {
    let deg = g.degrees();
    let ends = 2 * g.edge_count() as u128;
    if ends == 0 {
        return None;
    }
    let (mut s1, mut s2, mut sjk) = (0u128, 0u128, 0u128);
    for (i, j) in g.edges() {
        let (a, b) = (deg[i] as u128, deg[j] as u128);
        s1 += a + b;
        s2 += a * a + b * b;
        sjk += 2 * a * b;
    }
    let var_num = ends * s2 - s1 * s1;
    if var_num == 0 {
        return None;
    }
    let cov_num = (ends * sjk) as i128 - (s1 * s1) as i128;
    Some(cov_num as f64 / var_num as f64)
}

/// Empirical `Q_jk` over the degree classes present, each edge counted in
/// both orientations.
pub fn empirical_joint(g: &Graph) -> Result<JointDegreeDistribution> {
    if g.edge_count() == 0 {
        return Err(Error::domain("graph has no edges"));
    }
    let deg = g.degrees();
    let mut classes: Vec<usize> = deg.iter().copied().filter(|&k| k > 0).collect();
    classes.sort_unstable();
    classes.dedup();
    let c = classes.len();
    let mut counts = vec![0u64; c * c];
    for (i, j) in g.edges() {
        let a = classes.binary_search(&deg[i]).unwrap();
        let b = classes.binary_search(&deg[j]).unwrap();
        counts[a * c + b] += 1;
        counts[b * c + a] += 1;
    }
    let total = 2.0 * g.edge_count() as f64;
    let matrix = counts.into_iter().map(|v| v as f64 / total).collect();
    Ok(JointDegreeDistribution::from_parts_unchecked(classes, matrix))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> (Graph, LoadReport) {
        load_edge_list(text.as_bytes()).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        Graph::with_numeric_ids(leaves + 1, (1..=leaves).map(|l| (0, l))).0
    }

    #[test]
    fn loads_path() {
        let (g, rep) = parse("a b\nb c");
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        assert_eq!(rep, LoadReport::default());
        assert_eq!(g.id(1), "b");
    }

    #[test]
    fn drops_duplicates_and_self_loops() {
        let (g, rep) = parse("a b\nb a\na a");
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert_eq!(rep, LoadReport { duplicates: 1, self_loops: 1 });
    }

    #[test]
    fn empty_input() {
        let (g, _) = parse("");
        assert_eq!((g.node_count(), g.edge_count()), (0, 0));
        let (g, _) = parse("# only a comment\n\n");
        assert_eq!(g.node_count(), 0);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = load_edge_list("a b\nc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = load_edge_list("a b c\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn remove_isolates_cases() {
        let (g, _) = parse("a b\nz z\nb c");
        let (h, removed) = remove_isolates(&g);
        assert_eq!(removed, 1);
        assert!(!h.ids().iter().any(|s| s == "z"));
        assert_eq!(h.edge_count(), 2);
        let (h2, removed) = remove_isolates(&h);
        assert_eq!((removed, &h2), (0, &h));
        let (g, _) = parse("x x\ny y");
        let (h, removed) = remove_isolates(&g);
        assert_eq!((h.node_count(), removed), (0, 2));
    }

    #[test]
    fn path_stats() {
        let (g, _) = parse("a b\nb c");
        let s = node_stats(&g, None).unwrap();
        assert_eq!(s.delta, vec![1.0, -1.0, 1.0]);
        assert_eq!(s.kappa, vec![0.5, 2.0, 0.5]);
        let sum = paradox_summary(&s);
        assert!((sum.mean_delta - 1.0 / 3.0).abs() < 1e-15);
        assert!((sum.mean_kappa - 1.0).abs() < 1e-15);
    }

    #[test]
    fn star_stats() {
        let g = star(3);
        let s = node_stats(&g, None).unwrap();
        assert_eq!(s.delta[0], -2.0);
        assert!(s.delta[1..].iter().all(|&d| d == 2.0));
        assert_eq!(s.kappa[0], 3.0);
        assert!(s.kappa[1..].iter().all(|&k| (k - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn regular_graph_has_zero_delta() {
        // 6-cycle
        let g = Graph::with_numeric_ids(6, (0..6).map(|i| (i, (i + 1) % 6))).0;
        let s = node_stats(&g, None).unwrap();
        assert!(s.delta.iter().all(|&d| d == 0.0));
        assert!(s.kappa.iter().all(|&k| k == 1.0));
        let sum = paradox_summary(&s);
        assert_eq!(sum.frac_delta_zero, 1.0);
        assert!(assortativity(&g).is_none());
    }

    #[test]
    fn isolated_node_is_a_domain_error() {
        let (g, _) = parse("a b\nc c");
        assert!(matches!(node_stats(&g, None), Err(Error::Domain(_))));
    }

    #[test]
    fn complete_graph_minus_edge() {
        let n = 1000;
        let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).filter(|&e| e != (0, 1));
        let g = Graph::with_numeric_ids(n, edges).0;
        let s = node_stats(&g, None).unwrap();
        let sum = paradox_summary(&s);
        assert_eq!((sum.frac_delta_neg * n as f64).round() as usize, 998);
        assert!((sum.mean_delta - 2.0 / 999_000.0).abs() < 1e-12);
        assert!(sum.mean_delta > 0.0);
    }

    #[test]
    fn assortativity_cases() {
        assert_eq!(assortativity(&star(3)), Some(-1.0));
        let two_edges = Graph::with_numeric_ids(4, [(0, 1), (2, 3)]).0;
        assert!(assortativity(&two_edges).is_none());
        assert!(assortativity(&Graph::empty()).is_none());
    }

    #[test]
    fn empirical_joint_cases() {
        let single = Graph::with_numeric_ids(2, [(0, 1)]).0;
        let q = empirical_joint(&single).unwrap();
        assert_eq!((q.degrees(), q.get(0, 0)), (&[1usize][..], 1.0));
        let q = empirical_joint(&star(3)).unwrap();
        assert_eq!(q.at(1, 3), 0.5);
        assert_eq!(q.at(3, 1), 0.5);
        assert_eq!(q.at(1, 1), 0.0);
        let tri = Graph::with_numeric_ids(3, [(0, 1), (1, 2), (2, 0)]).0;
        assert_eq!(empirical_joint(&tri).unwrap().at(2, 2), 1.0);
    }

    #[test]
    fn attribute_identity_on_star() {
        let g = star(4);
        let attrs = NodeAttributes::new(vec![3.0, -1.0, 0.5, 2.0, 7.0]).unwrap();
        let s = node_stats(&g, Some(&attrs)).unwrap();
        let sum = paradox_summary(&s);
        assert!((sum.mean_delta_x.unwrap() - sum.cov_x_kappa.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn attribute_csv_alignment() {
        let (g, _) = parse("a b\nb c");
        let attrs = NodeAttributes::read_csv("node_id,x\nc,3\na,1\nb,2\n".as_bytes(), &g).unwrap();
        assert_eq!(attrs.values(), &[1.0, 2.0, 3.0]);
        let attrs = NodeAttributes::read_csv("a,1\nb,2\nc,3.5\n".as_bytes(), &g).unwrap();
        assert_eq!(attrs.values()[2], 3.5);
        let err = NodeAttributes::read_csv("a,1\nb,2\n".as_bytes(), &g).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }
}
