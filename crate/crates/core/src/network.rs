//! Binary network data.

use crate::error::{invalid, Result};

/// A binary network on `n` actors.
///
/// The adjacency matrix is stored densely in row-major order. Undirected
/// networks are stored symmetrically. The diagonal is always zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Network {
    n: usize,
    directed: bool,
    adjacency: Vec<bool>,
    labels: Option<Vec<String>>,
}

impl Network {
    /// Builds a network from a dense row-major adjacency matrix, validating
    /// the zero diagonal and, for undirected networks, symmetry.
    pub fn from_adjacency(n: usize, directed: bool, adjacency: Vec<bool>) -> Result<Self> {
        if adjacency.len() != n * n {
            return Err(invalid(format!(
                "adjacency has {} entries, expected {}",
                adjacency.len(),
                n * n
            )));
        }
        for i in 0..n {
            if adjacency[i * n + i] {
                return Err(invalid(format!("self-tie on actor {}", i + 1)));
            }
            if !directed {
                for j in (i + 1)..n {
                    if adjacency[i * n + j] != adjacency[j * n + i] {
                        return Err(invalid(format!(
                            "undirected network has asymmetric entry ({}, {})",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(Self { n, directed, adjacency, labels: None })
    }

    /// Builds a network from 0-based edges. Undirected edges are symmetrised;
    /// repeated edges are harmless.
    pub fn from_edges(n: usize, directed: bool, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![false; n * n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(invalid(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(invalid(format!("self-tie on actor {}", i + 1)));
            }
            adjacency[i * n + j] = true;
            if !directed {
                adjacency[j * n + i] = true;
            }
        }
        Self::from_adjacency(n, directed, adjacency)
    }

    /// An empty (tie-free) network.
    pub fn empty(n: usize, directed: bool) -> Self {
        Self { n, directed, adjacency: vec![false; n * n], labels: None }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(invalid(format!("{} labels for {} actors", labels.len(), self.n)));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// `y_ij` as a boolean.
    #[inline]
    pub fn tie(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    /// Row `i` of the adjacency matrix.
    #[inline]
    pub fn row(&self, i: usize) -> &[bool] {
        &self.adjacency[i * self.n..(i + 1) * self.n]
    }

    /// Number of ties, counting each undirected dyad once.
    pub fn tie_count(&self) -> usize {
        let all = self.adjacency.iter().filter(|&&y| y).count();
        if self.directed {
            all
        } else {
            all / 2
        }
    }

    /// Number of dyads entering the likelihood: n(n-1) ordered pairs when
    /// directed, n(n-1)/2 otherwise.
    pub fn dyad_count(&self) -> usize {
        let ordered = self.n * self.n.saturating_sub(1);
        if self.directed {
            ordered
        } else {
            ordered / 2
        }
    }

    /// Iterates the ties as 0-based pairs: all ordered pairs for directed
    /// networks, `i < j` pairs for undirected ones.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        let directed = self.directed;
        (0..n).flat_map(move |i| {
            let start = if directed { 0 } else { i + 1 };
            (start..n).filter(move |&j| self.tie(i, j)).map(move |j| (i, j))
        })
    }
}
