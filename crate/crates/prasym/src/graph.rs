//! Immutable undirected simple graphs in compressed adjacency form.

use crate::error::{Error, Result};

/// An undirected simple graph. Neighbor lists are sorted, self-loops and
/// parallel edges are rejected at construction, and the degree vector and
/// volume are cached. Immutable after construction and safe to share
/// across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    degrees: Vec<u32>,
    volume: u64,
    connected: bool,
}

impl Graph {
    /// Build a graph from upper-triangle adjacency rows: `upper[i]` holds
    /// the neighbors `j > i` of vertex `i` in ascending order.
    ///
    /// This is the fast path used by the generators; it trusts the rows to
    /// be sorted, deduplicated and strictly above the diagonal, and checks
    /// those assumptions only in debug builds.
    pub(crate) fn from_upper_rows(n: usize, upper: &[Vec<u32>]) -> Graph {
        debug_assert_eq!(upper.len(), n);
        let mut degrees = vec![0u32; n];
        for (i, row) in upper.iter().enumerate() {
            debug_assert!(row.windows(2).all(|w| w[0] < w[1]));
            degrees[i] += row.len() as u32;
            for &j in row {
                debug_assert!((j as usize) > i && (j as usize) < n);
                degrees[j as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for &d in &degrees {
            acc += d as usize;
            offsets.push(acc);
        }
        let mut cursor: Vec<usize> = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; acc];
        // Processing rows in ascending i keeps every adjacency list sorted:
        // row r first receives its smaller neighbors (from rows i < r, in
        // order), then appends its own upper neighbors.
        for (i, row) in upper.iter().enumerate() {
            for &j in row {
                neighbors[cursor[i]] = j;
                cursor[i] += 1;
                neighbors[cursor[j as usize]] = i as u32;
                cursor[j as usize] += 1;
            }
        }
        let volume = acc as u64;
        let connected = connectivity(n, &offsets, &neighbors);
        Graph {
            n,
            offsets,
            neighbors,
            degrees,
            volume,
            connected,
        }
    }

    /// Build a graph from an explicit edge list. Each edge may appear in
    /// either orientation but only once; self-loops and duplicates are
    /// rejected.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Graph> {
        let mut upper: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(Error::structure(format!(
                    "edge ({a}, {b}) out of range for n = {n}"
                )));
            }
            if a == b {
                return Err(Error::structure(format!("self-loop at vertex {a}")));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            upper[i as usize].push(j);
        }
        for (i, row) in upper.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::structure(format!(
                    "parallel edge incident to vertex {i}"
                )));
            }
        }
        Ok(Graph::from_upper_rows(n, &upper))
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> u32 {
        self.degrees[v]
    }

    /// Degree vector `d = A 1`.
    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Sum of all degrees (twice the edge count).
    pub fn volume(&self) -> u64 {
        self.volume
    }

    pub fn min_degree(&self) -> u32 {
        self.degrees.iter().copied().min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// True when the graph has a single connected component (vacuously
    /// true for n <= 1).
    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Vertices of the largest connected component, ascending.
    pub fn largest_component(&self) -> Vec<u32> {
        let mut comp = vec![u32::MAX; self.n];
        let mut best: (usize, u32) = (0, 0); // (size, id)
        let mut next_id = 0u32;
        let mut queue = Vec::new();
        for s in 0..self.n {
            if comp[s] != u32::MAX {
                continue;
            }
            let id = next_id;
            next_id += 1;
            comp[s] = id;
            queue.clear();
            queue.push(s as u32);
            let mut size = 0usize;
            while let Some(v) = queue.pop() {
                size += 1;
                for &w in self.neighbors(v as usize) {
                    if comp[w as usize] == u32::MAX {
                        comp[w as usize] = id;
                        queue.push(w);
                    }
                }
            }
            if size > best.0 {
                best = (size, id);
            }
        }
        (0..self.n as u32)
            .filter(|&v| comp[v as usize] == best.1)
            .collect()
    }

    /// Induced subgraph on `keep` (ascending vertex ids). Returns the
    /// subgraph; vertex `k` of the result is `keep[k]` in `self`.
    pub fn induced(&self, keep: &[u32]) -> Graph {
        let mut index = vec![u32::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            index[old as usize] = new as u32;
        }
        let mut upper: Vec<Vec<u32>> = vec![Vec::new(); keep.len()];
        for (new, &old) in keep.iter().enumerate() {
            for &w in self.neighbors(old as usize) {
                let wn = index[w as usize];
                if wn != u32::MAX && wn > new as u32 {
                    upper[new].push(wn);
                }
            }
        }
        Graph::from_upper_rows(keep.len(), &upper)
    }

    /// Path graph 0 - 1 - ... - (n-1).
    pub fn path(n: usize) -> Graph {
        let upper: Vec<Vec<u32>> = (0..n)
            .map(|i| if i + 1 < n { vec![(i + 1) as u32] } else { vec![] })
            .collect();
        Graph::from_upper_rows(n, &upper)
    }

    /// Complete graph on n vertices.
    pub fn complete(n: usize) -> Graph {
        let upper: Vec<Vec<u32>> = (0..n)
            .map(|i| ((i + 1) as u32..n as u32).collect())
            .collect();
        Graph::from_upper_rows(n, &upper)
    }

    /// Serialize as edge-list text: first line `n m`, then one `i j` line
    /// per edge with `i < j`, sorted lexicographically.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 + 12 * self.edge_count());
        out.push_str(&format!("{} {}\n", self.n, self.edge_count()));
        for i in 0..self.n {
            for &j in self.neighbors(i) {
                if (j as usize) > i {
                    out.push_str(&format!("{} {}\n", i, j));
                }
            }
        }
        out
    }

    /// Parse the edge-list text format produced by [`Graph::to_edge_list`].
    pub fn from_edge_list(text: &str) -> Result<Graph> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty edge-list file".into()))?;
        let mut parts = header.split_whitespace();
        let n: usize = parse_field(parts.next(), "vertex count")?;
        let m: usize = parse_field(parts.next(), "edge count")?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let mut parts = line.split_whitespace();
            let i: u32 = parse_field(parts.next(), "edge endpoint")?;
            let j: u32 = parse_field(parts.next(), "edge endpoint")?;
            if i >= j {
                return Err(Error::Parse(format!(
                    "edge line '{line}' is not in i < j form"
                )));
            }
            edges.push((i, j));
        }
        if edges.len() != m {
            return Err(Error::Parse(format!(
                "header promises {m} edges, found {}",
                edges.len()
            )));
        }
        Graph::from_edges(n, &edges)
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T> {
    field
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("malformed {what}")))
}

fn connectivity(n: usize, offsets: &[usize], neighbors: &[u32]) -> bool {
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0u32];
    seen[0] = true;
    let mut count = 1usize;
    while let Some(v) = stack.pop() {
        for &w in &neighbors[offsets[v as usize]..offsets[v as usize + 1]] {
            if !seen[w as usize] {
                seen[w as usize] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_shape() {
        let g = Graph::path(3);
        assert_eq!(g.n(), 3);
        assert_eq!(g.degrees(), &[1, 2, 1]);
        assert_eq!(g.volume(), 4);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(g.is_connected());
    }

    #[test]
    fn complete_graph_shape() {
        let g = Graph::complete(4);
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.degrees(), &[3, 3, 3, 3]);
    }

    #[test]
    fn rejects_self_loop_and_duplicates() {
        assert!(Graph::from_edges(3, &[(0, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn symmetry_of_adjacency() {
        let g = Graph::from_edges(5, &[(0, 3), (1, 2), (2, 4), (0, 4)]).unwrap();
        for i in 0..g.n() {
            for &j in g.neighbors(i) {
                assert!(g.neighbors(j as usize).contains(&(i as u32)));
            }
            assert_eq!(g.degree(i) as usize, g.neighbors(i).len());
        }
        assert_eq!(g.volume(), g.degrees().iter().map(|&d| d as u64).sum());
        assert_eq!(g.volume() % 2, 0);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_edges(6, &[(0, 2), (0, 5), (1, 4), (2, 3), (3, 5)]).unwrap();
        let text = g.to_edge_list();
        let h = Graph::from_edge_list(&text).unwrap();
        assert_eq!(g, h);
        assert_eq!(text, h.to_edge_list());
    }

    #[test]
    fn disconnected_and_largest_component() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        assert!(!g.is_connected());
        assert_eq!(g.largest_component(), vec![0, 1, 2]);
        let lcc = g.induced(&g.largest_component());
        assert_eq!(lcc.n(), 3);
        assert_eq!(lcc.degrees(), &[1, 2, 1]);
        assert!(lcc.is_connected());
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(Graph::from_edge_list("").is_err());
        assert!(Graph::from_edge_list("2 1\n1 0\n").is_err()); // not i < j
        assert!(Graph::from_edge_list("2 2\n0 1\n").is_err()); // count mismatch
    }
}
