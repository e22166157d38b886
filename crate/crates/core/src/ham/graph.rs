use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {0} is out of range")]
    NoSuchVertex(usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
}

/// An undirected graph stored as paired arcs: an edge between `u` and `v`
/// appears once in `u`'s arc list and once in `v`'s.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    arcs: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { names: (0..n).map(|i| i.to_string()).collect(), arcs: vec![Vec::new(); n] }
    }

    pub fn with_names(names: Vec<String>) -> Self {
        let n = names.len();
        Graph { names, arcs: vec![Vec::new(); n] }
    }

    pub fn n(&self) -> usize {
        self.arcs.len()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    /// Targets of the arcs leaving `v`, most recent first.
    pub fn arcs(&self, v: usize) -> &[usize] {
        &self.arcs[v]
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        let n = self.n();
        for w in [u, v] {
            if w >= n {
                return Err(GraphError::NoSuchVertex(w));
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        self.arcs[u].insert(0, v);
        self.arcs[v].insert(0, u);
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.arcs.get(u).is_some_and(|a| a.contains(&v))
    }

    pub fn edge_count(&self) -> usize {
        self.arcs.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Every arc `u → v` has a partner `v → u`, with equal multiplicity.
    pub fn arcs_paired(&self) -> bool {
        (0..self.n()).all(|u| {
            self.arcs[u].iter().all(|&v| {
                v < self.n()
                    && v != u
                    && self.arcs[u].iter().filter(|&&w| w == v).count()
                        == self.arcs[v].iter().filter(|&&w| w == u).count()
            })
        })
    }

    /// The same graph with vertex `v` renamed to `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n(), "permutation length");
        let mut names = vec![String::new(); self.n()];
        for (v, &p) in perm.iter().enumerate() {
            names[p] = self.names[v].clone();
        }
        let mut g = Graph::with_names(names);
        for u in 0..self.n() {
            for &v in self.arcs[u].iter().rev() {
                if u < v {
                    g.add_edge(perm[u], perm[v]).expect("relabeling keeps edges valid");
                }
            }
        }
        g
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges=[", self.n())?;
        let mut first = true;
        for u in 0..self.n() {
            for &v in &self.arcs[u] {
                if u < v {
                    if !first {
                        write!(f, ", ")?;
                    }
                    write!(f, "{u}-{v}")?;
                    first = false;
                }
            }
        }
        write!(f, "])")
    }
}

/// Squares of a `rows × cols` board, joined by knight moves. Square `(r, c)`
/// is vertex `r * cols + c` and is named `r,c`.
pub fn knight_graph(rows: usize, cols: usize) -> Graph {
    let names = (0..rows).flat_map(|r| (0..cols).map(move |c| format!("{r},{c}"))).collect();
    let mut g = Graph::with_names(names);
    for r in 0..rows {
        for c in 0..cols {
            // Only moves towards larger indices, so each edge is added once.
            for (dr, dc) in [(1isize, -2isize), (1, 2), (2, -1), (2, 1)] {
                let (r2, c2) = (r as isize + dr, c as isize + dc);
                if r2 < rows as isize && c2 >= 0 && c2 < cols as isize {
                    g.add_edge(r * cols + c, r2 as usize * cols + c2 as usize).unwrap();
                }
            }
        }
    }
    g
}

pub fn complete_graph(n: usize) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

pub fn cycle_graph(n: usize) -> Graph {
    let mut g = Graph::new(n);
    if n >= 3 {
        for u in 0..n {
            g.add_edge(u, (u + 1) % n).unwrap();
        }
    }
    g
}

pub fn petersen_graph() -> Graph {
    let mut g = Graph::new(10);
    for i in 0..5 {
        g.add_edge(i, (i + 1) % 5).unwrap();
        g.add_edge(i, i + 5).unwrap();
        g.add_edge(5 + i, 5 + (i + 2) % 5).unwrap();
    }
    g
}
