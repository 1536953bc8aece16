//! Directed labeled formation graphs and their incidence-matrix machinery.
//!
//! A [`FormationGraph`] carries two ordered edge sets over the same vertex
//! set: bearing edges and distance edges. The ordered pair `(i, j)` means the
//! measurement is taken by agent `i` (the edge is outgoing at `i`); undirected
//! sensing is expressed by declaring both `(i, j)` and `(j, i)`. Edge index
//! is declaration order, and every stacked vector or matrix in the crate
//! follows that order, with distance entries ahead of bearing entries.

use nalgebra::DMatrix;
use thiserror::Error;

/// Which constraint family an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Bearing,
    Distance,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {index} of the {kind:?} set is a self-loop at vertex {vertex}")]
    SelfLoop {
        kind: EdgeKind,
        index: usize,
        vertex: usize,
    },
    #[error("edge {index} of the {kind:?} set references vertex {vertex}, but the graph has {n} vertices")]
    IndexOutOfRange {
        kind: EdgeKind,
        index: usize,
        vertex: usize,
        n: usize,
    },
    #[error("edges {first} and {second} of the {kind:?} set are both ({i}, {j})")]
    DuplicateEdge {
        kind: EdgeKind,
        first: usize,
        second: usize,
        i: usize,
        j: usize,
    },
}

/// A validated formation graph: `n` vertices plus ordered bearing and
/// distance edge lists.
///
/// The same ordered pair may appear in both sets (bearing and distance
/// measured between the same agents) but at most once per set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormationGraph {
    n: usize,
    bearing_edges: Vec<(usize, usize)>,
    distance_edges: Vec<(usize, usize)>,
}

impl FormationGraph {
    /// Builds and validates: no self-loops, indices in `[0, n)`, no duplicate
    /// ordered pair within one kind.
    pub fn new(
        n: usize,
        bearing_edges: Vec<(usize, usize)>,
        distance_edges: Vec<(usize, usize)>,
    ) -> Result<Self, GraphError> {
        validate_edges(n, EdgeKind::Bearing, &bearing_edges)?;
        validate_edges(n, EdgeKind::Distance, &distance_edges)?;
        Ok(FormationGraph {
            n,
            bearing_edges,
            distance_edges,
        })
    }

    /// Bearing-only convenience constructor.
    pub fn bearing_only(n: usize, bearing_edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        Self::new(n, bearing_edges, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of bearing edges, `m_b`.
    pub fn bearing_count(&self) -> usize {
        self.bearing_edges.len()
    }

    /// Number of distance edges, `m_d`.
    pub fn distance_count(&self) -> usize {
        self.distance_edges.len()
    }

    pub fn bearing_edges(&self) -> &[(usize, usize)] {
        &self.bearing_edges
    }

    pub fn distance_edges(&self) -> &[(usize, usize)] {
        &self.distance_edges
    }

    pub fn edges(&self, kind: EdgeKind) -> &[(usize, usize)] {
        match kind {
            EdgeKind::Bearing => &self.bearing_edges,
            EdgeKind::Distance => &self.distance_edges,
        }
    }

    /// Full incidence matrix of one edge set: column `k` holds −1 at the tail
    /// of edge `k` and +1 at its head. Columns follow declaration order.
    pub fn incidence(&self, kind: EdgeKind) -> DMatrix<f64> {
        let edges = self.edges(kind);
        let mut e = DMatrix::zeros(self.n, edges.len());
        for (k, &(i, j)) in edges.iter().enumerate() {
            e[(i, k)] = -1.0;
            e[(j, k)] = 1.0;
        }
        e
    }

    /// Outgoing-only incidence matrix: −1 at the tail of each edge, zero
    /// elsewhere.
    pub fn outgoing_incidence(&self, kind: EdgeKind) -> DMatrix<f64> {
        let edges = self.edges(kind);
        let mut e = DMatrix::zeros(self.n, edges.len());
        for (k, &(i, _)) in edges.iter().enumerate() {
            e[(i, k)] = -1.0;
        }
        e
    }
}

fn validate_edges(n: usize, kind: EdgeKind, edges: &[(usize, usize)]) -> Result<(), GraphError> {
    for (index, &(i, j)) in edges.iter().enumerate() {
        if i == j {
            return Err(GraphError::SelfLoop {
                kind,
                index,
                vertex: i,
            });
        }
        for vertex in [i, j] {
            if vertex >= n {
                return Err(GraphError::IndexOutOfRange {
                    kind,
                    index,
                    vertex,
                    n,
                });
            }
        }
        if let Some(first) = edges[..index].iter().position(|&e| e == (i, j)) {
            return Err(GraphError::DuplicateEdge {
                kind,
                first,
                second: index,
                i,
                j,
            });
        }
    }
    Ok(())
}

/// Kronecker expansion `M ⊗ I_d`: every entry `M_ik` becomes the block
/// `M_ik · I_d`.
pub fn kron_expand(m: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    m.kronecker(&DMatrix::identity(d, d))
}
