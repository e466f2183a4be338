use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest prefractal level accepted; level 7 already has 3282 vertices.
pub const MAX_SIERPINSKI_LEVEL: u32 = 7;

/// Decay index `D_SG / (2m)` of the Sierpinski gasket in `R^d`, with
/// `D_SG = log2(d + 1)` and walk dimension `m = log2(d + 3)`.
pub fn sierpinski_alpha(d: u32) -> f64 {
    let d = d as f64;
    (d + 1.0).log2() / (2.0 * (d + 3.0).log2())
}

/// Level-`n` Sierpinski prefractal graph in the plane.
///
/// Vertices live on the integer lattice `{(a, b) : a, b ≥ 0, a + b ≤ 2^n}` in
/// skew coordinates; edges are the sides of the `3^n` unit triangles.
#[derive(Debug, Clone)]
pub struct SierpinskiGraph {
    level: u32,
    vertices: Vec<(u32, u32)>,
    edges: Vec<(usize, usize)>,
}

impl SierpinskiGraph {
    pub fn new(level: u32) -> Result<Self> {
        if level > MAX_SIERPINSKI_LEVEL {
            return Err(Error::Construction(format!(
                "Sierpinski level {level} exceeds the dense limit {MAX_SIERPINSKI_LEVEL}"
            )));
        }
        let mut raw_edges = BTreeSet::new();
        collect_edges((0, 0), 1 << level, &mut raw_edges);

        let vertices: Vec<(u32, u32)> = raw_edges
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let lookup: BTreeMap<(u32, u32), usize> =
            vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let edges = raw_edges
            .iter()
            .map(|(a, b)| (lookup[a], lookup[b]))
            .collect();
        Ok(SierpinskiGraph {
            level,
            vertices,
            edges,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[(u32, u32)] {
        &self.vertices
    }

    /// Combinatorial graph Laplacian `D - Adj`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.vertex_count();
        let mut l = DMatrix::zeros(n, n);
        for &(i, j) in &self.edges {
            l[(i, j)] -= 1.0;
            l[(j, i)] -= 1.0;
            l[(i, i)] += 1.0;
            l[(j, j)] += 1.0;
        }
        l
    }

    /// Energy matrix `(5/3)^n L` and point masses `3^{-n}`, so that the operator
    /// `W⁻¹M` is the graph Laplacian renormalized by `5^n`.
    pub fn energy_and_masses(&self) -> (DMatrix<f64>, Vec<f64>) {
        let n = self.level as i32;
        let energy = self.laplacian() * (5.0_f64 / 3.0).powi(n);
        let masses = vec![3.0_f64.powi(-n); self.vertex_count()];
        (energy, masses)
    }
}

fn collect_edges(
    origin: (u32, u32),
    size: u32,
    out: &mut BTreeSet<((u32, u32), (u32, u32))>,
) {
    let (a, b) = origin;
    if size == 1 {
        let corners = [(a, b), (a + 1, b), (a, b + 1)];
        for i in 0..3 {
            for j in (i + 1)..3 {
                let (p, q) = (corners[i].min(corners[j]), corners[i].max(corners[j]));
                out.insert((p, q));
            }
        }
        return;
    }
    let half = size / 2;
    collect_edges((a, b), half, out);
    collect_edges((a + half, b), half, out);
    collect_edges((a, b + half), half, out);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_and_edge_counts() {
        for n in 0..=5u32 {
            let g = SierpinskiGraph::new(n).unwrap();
            let three_n = 3usize.pow(n);
            assert_eq!(g.vertex_count(), 3 * (three_n + 1) / 2, "level {n}");
            assert_eq!(g.edge_count(), 3 * three_n, "level {n}");
        }
    }

    #[test]
    fn degrees_are_two_at_corners_and_four_elsewhere() {
        let g = SierpinskiGraph::new(3).unwrap();
        let l = g.laplacian();
        let corners = (0..g.vertex_count()).filter(|&i| l[(i, i)] == 2.0).count();
        assert_eq!(corners, 3);
        assert!((0..g.vertex_count()).all(|i| l[(i, i)] == 2.0 || l[(i, i)] == 4.0));
    }

    #[test]
    fn planar_gasket_alpha() {
        let alpha = sierpinski_alpha(2);
        assert!((alpha - 3f64.log2() / (2.0 * 5f64.log2())).abs() < 1e-15);
        assert!((alpha - 0.3413).abs() < 1e-4);
    }

    #[test]
    fn rejects_oversized_levels() {
        assert!(SierpinskiGraph::new(MAX_SIERPINSKI_LEVEL + 1).is_err());
    }
}
