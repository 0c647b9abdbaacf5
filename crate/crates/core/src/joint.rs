//! Joint distribution of the degrees at the two ends of an edge.

use serde::{Deserialize, Serialize};

use crate::degree::EdgeEndDistribution;
use crate::error::{Error, Result};
use crate::numeric::{sum, CompensatedSum};

/// `Q_jk`: the fraction of (oriented) edge ends joining a degree-`j` node to
/// a degree-`k` node, stored densely over the degree classes that occur.
///
/// The matrix is symmetric and sums to one; its row sums are the edge-end
/// distribution `q_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDegreeDistribution {
    degrees: Vec<usize>,
    matrix: Vec<f64>,
}

impl JointDegreeDistribution {
    /// Builds from sorted distinct degree classes and a row-major matrix.
    pub fn new(degrees: Vec<usize>, matrix: Vec<f64>) -> Result<Self> {
        let c = degrees.len();
        if c == 0 {
            return Err(Error::param("joint distribution needs at least one degree class"));
        }
        if matrix.len() != c * c {
            return Err(Error::param(format!(
                "matrix has {} entries, expected {}",
                matrix.len(),
                c * c
            )));
        }
        if degrees.windows(2).any(|w| w[0] >= w[1]) || degrees[0] == 0 {
            return Err(Error::param("degree classes must be positive, sorted and distinct"));
        }
        if matrix.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::param("joint distribution entries must be finite and nonnegative"));
        }
        for a in 0..c {
            for b in (a + 1)..c {
                let (x, y) = (matrix[a * c + b], matrix[b * c + a]);
                if (x - y).abs() > 1e-12 * (1.0 + x.abs()) {
                    return Err(Error::Consistency(format!(
                        "joint distribution not symmetric at ({}, {})",
                        degrees[a], degrees[b]
                    )));
                }
            }
        }
        let total = sum(matrix.iter().copied());
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Consistency(format!("joint distribution sums to {total}")));
        }
        Ok(Self { degrees, matrix })
    }

    /// Uncorrelated joint distribution `Q_jk = q_j q_k`.
    pub fn product(q: &EdgeEndDistribution) -> Self {
        let (degrees, probs): (Vec<usize>, Vec<f64>) = q.support().unzip();
        let c = degrees.len();
        let mut matrix = vec![0.0; c * c];
        for a in 0..c {
            for b in 0..c {
                matrix[a * c + b] = probs[a] * probs[b];
            }
        }
        Self { degrees, matrix }
    }

    pub(crate) fn from_parts_unchecked(degrees: Vec<usize>, matrix: Vec<f64>) -> Self {
        Self { degrees, matrix }
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn num_classes(&self) -> usize {
        self.degrees.len()
    }

    /// Entry by class index.
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.matrix[a * self.degrees.len() + b]
    }

    /// Entry by degree value; zero for degrees outside the support.
    pub fn at(&self, j: usize, k: usize) -> f64 {
        match (self.index_of(j), self.index_of(k)) {
            (Some(a), Some(b)) => self.get(a, b),
            _ => 0.0,
        }
    }

    pub fn index_of(&self, k: usize) -> Option<usize> {
        self.degrees.binary_search(&k).ok()
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// `q_k = Σ_j Q_jk` per class.
    pub fn marginal(&self) -> Vec<f64> {
        let c = self.degrees.len();
        (0..c)
            .map(|b| sum((0..c).map(|a| self.get(a, b))))
            .collect()
    }

    /// Neighbour-degree distribution `Q_jk / q_k` over classes `j`, for the
    /// node class with index `b`.
    pub fn conditional(&self, b: usize) -> Vec<f64> {
        let c = self.degrees.len();
        let col: Vec<f64> = (0..c).map(|a| self.get(a, b)).collect();
        let qk = sum(col.iter().copied());
        col.into_iter().map(|v| v / qk).collect()
    }

    /// Pearson correlation of the degrees at either end of an edge,
    /// `Σ jk (Q_jk − q_j q_k) / σ_q²`. `None` when `σ_q² = 0`.
    pub fn assortativity(&self) -> Option<f64> {
        let q = self.marginal();
        let d: Vec<f64> = self.degrees.iter().map(|&k| k as f64).collect();
        let mean = sum(q.iter().zip(&d).map(|(p, k)| p * k));
        let var = sum(q.iter().zip(&d).map(|(p, k)| p * (k - mean) * (k - mean)));
        if !(var > 1e-14 * mean * mean) {
            return None;
        }
        let c = d.len();
        let mut acc = CompensatedSum::new();
        for a in 0..c {
            for b in 0..c {
                acc.add((d[a] - mean) * (d[b] - mean) * (self.get(a, b) - q[a] * q[b]));
            }
        }
        Some(acc.value() / var)
    }

    /// Shannon entropy `−Σ Q log Q`.
    pub fn entropy(&self) -> f64 {
        -sum(self
            .matrix
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| v * v.ln()))
    }

    /// Total-variation distance to another joint distribution, matching
    /// entries by degree value.
    pub fn total_variation(&self, other: &Self) -> f64 {
        let mut classes: Vec<usize> = self.degrees.iter().chain(&other.degrees).copied().collect();
        classes.sort_unstable();
        classes.dedup();
        let mut acc = CompensatedSum::new();
        for &j in &classes {
            for &k in &classes {
                acc.add((self.at(j, k) - other.at(j, k)).abs());
            }
        }
        0.5 * acc.value()
    }

    /// Writes nonzero entries as CSV `j,k,q_jk`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "j,k,q_jk")?;
        for (a, &j) in self.degrees.iter().enumerate() {
            for (b, &k) in self.degrees.iter().enumerate() {
                let v = self.get(a, b);
                if v > 0.0 {
                    writeln!(w, "{j},{k},{v:e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric_matrix() {
        let err = JointDegreeDistribution::new(vec![1, 2], vec![0.5, 0.3, 0.1, 0.1]);
        assert!(matches!(err, Err(Error::Consistency(_))));
    }

    #[test]
    fn diagonal_joint_is_perfectly_assortative() {
        let q = [0.2, 0.5, 0.3];
        let mut m = vec![0.0; 9];
        for i in 0..3 {
            m[i * 3 + i] = q[i];
        }
        let joint = JointDegreeDistribution::new(vec![1, 2, 5], m).unwrap();
        assert!((joint.assortativity().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_class_has_undefined_assortativity() {
        let joint = JointDegreeDistribution::new(vec![3], vec![1.0]).unwrap();
        assert!(joint.assortativity().is_none());
    }
}
