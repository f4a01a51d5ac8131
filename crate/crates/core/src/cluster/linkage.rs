use rayon::prelude::*;
use serde::Serialize;

use crate::numkit::RealMatrix;

/// Above this many samples the Prim relaxation step runs in parallel.
const PARALLEL_THRESHOLD: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    /// Cluster id of each sample; ids are dense and numbered by first appearance.
    pub assignments: Vec<usize>,
    pub sizes: Vec<usize>,
    pub linkage_threshold: f64,
    /// Single-linkage merge heights (minimum spanning tree edge lengths), ascending.
    pub merge_heights: Vec<f64>,
}

impl Clustering {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Largest cluster; ties go to the lowest id.
    pub fn largest(&self) -> Option<(usize, usize)> {
        self.sizes
            .iter()
            .copied()
            .enumerate()
            .fold(None, |best, (id, size)| match best {
                Some((_, s)) if s >= size => best,
                _ => Some((id, size)),
            })
    }

    pub fn members(&self, id: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == id)
            .collect()
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Single-linkage agglomerative clustering with Euclidean distance, cut where
/// the next merge would join clusters further apart than `threshold`.
///
/// Builds the minimum spanning tree with dense Prim in `O(N²·d)`; the flat
/// clusters are the components of the tree edges no longer than `threshold`.
pub fn hcluster(x: &RealMatrix, threshold: f64) -> Clustering {
    let n = x.rows();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    for step in 0..n {
        in_tree[current] = true;
        if step > 0 {
            edges.push((best[current], parent[current], current));
        }
        let row = x.row(current);
        let relax = |(j, (b, p)): (usize, (&mut f64, &mut usize))| {
            if !in_tree[j] {
                let d = distance(row, x.row(j));
                if d < *b {
                    *b = d;
                    *p = current;
                }
            }
        };
        if n >= PARALLEL_THRESHOLD {
            best.par_iter_mut()
                .zip(parent.par_iter_mut())
                .enumerate()
                .for_each(relax);
        } else {
            best.iter_mut().zip(parent.iter_mut()).enumerate().for_each(relax);
        }
        // Lowest index wins ties.
        let mut next = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (next == usize::MAX || best[j] < best[next]) {
                next = j;
            }
        }
        if next == usize::MAX {
            break;
        }
        current = next;
    }

    let mut dsu = Dsu::new(n);
    for &(d, a, b) in &edges {
        if d <= threshold {
            dsu.union(a, b);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut assignments = Vec::with_capacity(n);
    let mut sizes = Vec::new();
    for i in 0..n {
        let root = dsu.find(i);
        if label[root] == usize::MAX {
            label[root] = sizes.len();
            sizes.push(0);
        }
        assignments.push(label[root]);
        sizes[label[root]] += 1;
    }
    let mut merge_heights: Vec<f64> = edges.iter().map(|e| e.0).collect();
    merge_heights.sort_by(f64::total_cmp);
    Clustering {
        assignments,
        sizes,
        linkage_threshold: threshold,
        merge_heights,
    }
}

pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
