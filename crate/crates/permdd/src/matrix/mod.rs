//! 0-1 matrices: representation, text formats, bipartite-graph queries and
//! the random benchmark generators.

mod generate;
mod matching;
mod parse;

pub use generate::{generate, instance_descriptor, Family, GenError, GenParams, DEFAULT_MAX_RETRIES};
pub use matching::has_perfect_matching;
pub use parse::{parse_dense, parse_matrix_market_pattern, ParseError};

/// An `n x n` matrix with entries in `{0, 1}`, together with a provenance tag.
///
/// Equality and hashing ignore the provenance tag.
#[derive(Clone, Debug)]
pub struct Matrix01 {
    n: usize,
    bits: Vec<bool>,
    source: MatrixSource,
}

/// Where a matrix came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatrixSource {
    Literal,
    File(String),
    Generated(String),
}

impl Matrix01 {
    /// All-zeros matrix.
    pub fn zeros(n: usize) -> Matrix01 {
        assert!(n >= 1, "matrix dimension must be at least 1");
        Matrix01 {
            n,
            bits: vec![false; n * n],
            source: MatrixSource::Literal,
        }
    }

    /// All-ones matrix.
    pub fn ones(n: usize) -> Matrix01 {
        let mut m = Matrix01::zeros(n);
        m.bits.fill(true);
        m
    }

    /// The identity matrix.
    pub fn identity(n: usize) -> Matrix01 {
        Matrix01::from_fn(n, |i, j| i == j)
    }

    /// Builds a matrix entry by entry from `f(row, col)`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Matrix01 {
        let mut m = Matrix01::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.bits[i * self.n + j] = v;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Column indices of the 1 entries in row `i`.
    pub fn row_support(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.get(i, j)).collect()
    }

    /// Row indices of the 1 entries in column `j`.
    pub fn col_support(&self, j: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.get(i, j)).collect()
    }

    pub fn has_zero_row(&self) -> bool {
        (0..self.n).any(|i| (0..self.n).all(|j| !self.get(i, j)))
    }

    pub fn has_zero_col(&self) -> bool {
        (0..self.n).any(|j| (0..self.n).all(|i| !self.get(i, j)))
    }

    pub fn transpose(&self) -> Matrix01 {
        Matrix01::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn source(&self) -> &MatrixSource {
        &self.source
    }

    pub fn with_source(mut self, source: MatrixSource) -> Matrix01 {
        self.source = source;
        self
    }

    /// The bipartite graph whose bi-adjacency matrix this is.
    pub fn bipartite_view(&self) -> BipartiteView {
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) {
                    edges.push((i, j));
                }
            }
        }
        BipartiteView { n: self.n, edges }
    }

    /// Native dense text format: first line `n`, then `n` lines of `n`
    /// characters from `{0, 1}`.
    pub fn serialize_dense(&self) -> String {
        let mut out = String::with_capacity(self.n * (self.n + 1) + 8);
        out.push_str(&self.n.to_string());
        out.push('\n');
        for i in 0..self.n {
            for j in 0..self.n {
                out.push(if self.get(i, j) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

impl PartialEq for Matrix01 {
    fn eq(&self, other: &Matrix01) -> bool {
        self.n == other.n && self.bits == other.bits
    }
}

impl Eq for Matrix01 {}

impl std::hash::Hash for Matrix01 {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.bits.hash(state);
    }
}

/// Row/column vertex sets and the edge list of `G_A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteView {
    pub n: usize,
    /// `(row, col)` pairs with a 1 entry, row-major order.
    pub edges: Vec<(usize, usize)>,
}

/// Adjacency structure of the primal graph over column indices: columns `j`
/// and `k` are adjacent iff some row has 1s in both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimalGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl PrimalGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Neighbors of column `j`, sorted ascending.
    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.adj[j]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, j: usize, k: usize) -> bool {
        self.adj[j].binary_search(&k).is_ok()
    }
}

/// Builds the primal graph of `m`.
pub fn primal_graph(m: &Matrix01) -> PrimalGraph {
    let n = m.n();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        let support = m.row_support(i);
        for (a, &j) in support.iter().enumerate() {
            for &k in &support[a + 1..] {
                if !adj[j].contains(&k) {
                    adj[j].push(k);
                    adj[k].push(j);
                }
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    PrimalGraph { n, adj }
}

#[cfg(test)]
mod tests;
