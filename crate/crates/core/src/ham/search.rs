use thiserror::Error;

use super::graph::Graph;

const NONE: usize = usize::MAX;

/// Backtracking search for Hamiltonian circuits.
///
/// Paths start at vertex 0. `deg[w]` counts the neighbours of `w` that are
/// not interior to the current path, so an untaken vertex whose count drops
/// below 2 can no longer lie on a circuit. When the tip of the path has an
/// untaken neighbour with exactly two such neighbours, that neighbour must
/// come next.
pub struct HamSearch {
    nbrs: Vec<Vec<usize>>,
    deg: Vec<usize>,
    taken: Vec<bool>,
    /// Predecessor of each path vertex.
    vert: Vec<usize>,
    second: usize,
    count: u64,
}

impl HamSearch {
    pub fn new(g: &Graph) -> Self {
        let nbrs: Vec<Vec<usize>> = (0..g.n())
            .map(|v| {
                let mut a = g.arcs(v).to_vec();
                a.sort_unstable();
                a.dedup();
                a
            })
            .collect();
        let deg = nbrs.iter().map(Vec::len).collect();
        let n = nbrs.len();
        HamSearch { nbrs, deg, taken: vec![false; n], vert: vec![NONE; n], second: NONE, count: 0 }
    }

    pub fn degrees(&self) -> &[usize] {
        &self.deg
    }

    pub fn taken(&self) -> &[bool] {
        &self.taken
    }

    /// Count circuits, calling `visit` with each one (as a vertex sequence
    /// starting at 0) in the canonical direction.
    pub fn run(&mut self, visit: &mut dyn FnMut(&[usize])) -> u64 {
        self.count = 0;
        let n = self.nbrs.len();
        if n < 3 || self.deg.iter().any(|&d| d < 2) {
            return 0;
        }
        self.taken[0] = true;
        self.extend(0, 1, visit);
        self.taken[0] = false;
        self.count
    }

    fn extend(&mut self, tip: usize, len: usize, visit: &mut dyn FnMut(&[usize])) {
        let n = self.nbrs.len();
        if len == n {
            if self.second < tip && self.nbrs[tip].binary_search(&0).is_ok() {
                self.count += 1;
                let mut cycle = Vec::with_capacity(n);
                let mut v = tip;
                while v != NONE {
                    cycle.push(v);
                    v = self.vert[v];
                }
                cycle.reverse();
                visit(&cycle);
            }
            return;
        }
        let mut forced = NONE;
        if len >= 2 {
            for &w in &self.nbrs[tip] {
                if !self.taken[w] && self.deg[w] == 2 {
                    if forced != NONE {
                        return;
                    }
                    forced = w;
                }
            }
        }
        let interior = len >= 2;
        for i in 0..self.nbrs[tip].len() {
            let x = self.nbrs[tip][i];
            if self.taken[x] || (forced != NONE && x != forced) {
                continue;
            }
            self.taken[x] = true;
            self.vert[x] = tip;
            if len == 1 {
                self.second = x;
            }
            let mut alive = true;
            if interior {
                for j in 0..self.nbrs[tip].len() {
                    let y = self.nbrs[tip][j];
                    self.deg[y] -= 1;
                    if !self.taken[y] && self.deg[y] < 2 {
                        alive = false;
                    }
                }
            }
            if alive {
                self.extend(x, len + 1, visit);
            }
            if interior {
                for j in 0..self.nbrs[tip].len() {
                    let y = self.nbrs[tip][j];
                    self.deg[y] += 1;
                }
            }
            self.vert[x] = NONE;
            self.taken[x] = false;
        }
    }
}

/// Number of undirected Hamiltonian circuits of `g`.
pub fn enumerate_hamiltonian_cycles(g: &Graph) -> u64 {
    HamSearch::new(g).run(&mut |_| {})
}

/// All circuits of `g`, each starting at vertex 0 and leaving it towards
/// the smaller of its two circuit neighbours.
pub fn hamiltonian_cycles(g: &Graph) -> Vec<Vec<usize>> {
    let mut cycles = Vec::new();
    HamSearch::new(g).run(&mut |c| cycles.push(c.to_vec()));
    cycles
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("brute force is limited to {max} vertices, graph has {n}")]
pub struct TooLarge {
    pub n: usize,
    pub max: usize,
}

pub const BRUTE_FORCE_LIMIT: usize = 10;

fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = a.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = a.iter().rposition(|&x| x > a[i]).unwrap();
    a.swap(i, j);
    a[i + 1..].reverse();
    true
}

/// Count circuits by trying every ordering of vertices 1..n after vertex 0.
pub fn brute_force_cycles(g: &Graph) -> Result<u64, TooLarge> {
    let n = g.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(TooLarge { n, max: BRUTE_FORCE_LIMIT });
    }
    if n < 3 {
        return Ok(0);
    }
    let mut adj = vec![vec![false; n]; n];
    for (u, row) in adj.iter_mut().enumerate() {
        for &v in g.arcs(u) {
            row[v] = true;
        }
    }
    let mut order: Vec<usize> = (1..n).collect();
    let mut directed = 0u64;
    loop {
        let closes = adj[0][order[0]] && adj[order[n - 2]][0] && order.windows(2).all(|w| adj[w[0]][w[1]]);
        if closes {
            directed += 1;
        }
        if !next_permutation(&mut order) {
            break;
        }
    }
    Ok(directed / 2)
}
