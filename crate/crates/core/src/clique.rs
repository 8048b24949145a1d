//! Simple undirected graphs, brute-force clique numbers, and the 0/1
//! symmetric games built from adjacency matrices.

use crate::error::{Error, Result};
use crate::game::{symmetric_game, Game};

/// Largest graph accepted by the brute-force clique search.
pub const MAX_BRUTE_FORCE_VERTICES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<bool>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: vec![vec![false; n]; n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Builds a graph from neighbor lists; the lists must be symmetric.
    pub fn from_adjacency_lists(lists: &[Vec<usize>]) -> Result<Self> {
        let n = lists.len();
        let mut g = Graph::empty(n);
        for (u, neighbors) in lists.iter().enumerate() {
            for &v in neighbors {
                g.add_edge(u, v)?;
            }
        }
        for (u, neighbors) in lists.iter().enumerate() {
            for &v in neighbors {
                if !lists[v].contains(&u) {
                    return Err(Error::Domain(format!(
                        "edge {u}-{v} is listed for {u} but not for {v}"
                    )));
                }
            }
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.len();
        if u >= n || v >= n {
            return Err(Error::Domain(format!(
                "edge {u}-{v} references a vertex outside 0..{n}"
            )));
        }
        if u == v {
            return Err(Error::Domain(format!("self-loop at vertex {u}")));
        }
        self.adjacency[u][v] = true;
        self.adjacency[v][u] = true;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u][v]
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.adjacency[u][v] = true;
                g.adjacency[v][u] = true;
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            let v = (u + 1) % n;
            if u != v {
                g.adjacency[u][v] = true;
                g.adjacency[v][u] = true;
            }
        }
        g
    }

    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        Graph::from_edges(10, &edges).expect("static edge list")
    }

    pub fn adjacency_matrix(&self) -> Vec<Vec<f64>> {
        self.adjacency
            .iter()
            .map(|row| row.iter().map(|&e| if e { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    /// The symmetric two-player game whose payoff matrix is the adjacency
    /// matrix, with actions `v0, v1, ...`.
    pub fn to_game(&self) -> Result<Game> {
        let names: Vec<String> = (0..self.len()).map(|i| format!("v{i}")).collect();
        symmetric_game(&names, &self.adjacency_matrix())
    }

    /// Clique number by exhaustive subset search.
    pub fn max_clique_size(&self) -> Result<usize> {
        let n = self.len();
        if n > MAX_BRUTE_FORCE_VERTICES {
            return Err(Error::SizeLimit(format!(
                "brute-force clique search handles at most {MAX_BRUTE_FORCE_VERTICES} vertices"
            )));
        }
        let neighbors: Vec<u32> = self
            .adjacency
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &e)| e)
                    .fold(0u32, |m, (j, _)| m | (1 << j))
            })
            .collect();
        let mut best = 0;
        for mask in 0u32..(1u32 << n) {
            let size = mask.count_ones() as usize;
            if size <= best {
                continue;
            }
            let is_clique = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .all(|i| mask & !(1 << i) & !neighbors[i] == 0);
            if is_clique {
                best = size;
            }
        }
        Ok(best)
    }
}
