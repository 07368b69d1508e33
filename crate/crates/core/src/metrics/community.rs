use std::collections::{BTreeMap, HashMap};

/// Undirected simple graph in adjacency-list form, neighbours ascending.
#[derive(Clone, Debug)]
pub struct Graph {
    pub adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        Self { adj }
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Colour refinement until the number of classes stops growing.
    fn refine(&self, mut color: Vec<usize>) -> Vec<usize> {
        let n = self.adj.len();
        let mut classes = color.iter().max().map_or(0, |c| c + 1);
        loop {
            let sigs: Vec<(usize, Vec<usize>)> = (0..n)
                .map(|v| {
                    let mut nb: Vec<usize> = self.adj[v].iter().map(|&u| color[u]).collect();
                    nb.sort_unstable();
                    (color[v], nb)
                })
                .collect();
            let next = dense_ids(&sigs);
            let count = next.iter().max().map_or(0, |c| c + 1);
            color = next;
            if count == classes {
                return color;
            }
            classes = count;
        }
    }

    /// Canonical node ranks: colour refinement, then individualization of the
    /// first member of the smallest non-singleton class until all classes are
    /// singletons. Relabelled copies of a graph get the same ranks up to an
    /// automorphism whenever refined classes coincide with orbits.
    pub fn canonical_ranks(&self, side: &[u8]) -> Vec<usize> {
        let n = self.adj.len();
        let mut color = self.refine(dense_ids(&(0..n).map(|v| (side[v], self.adj[v].len())).collect::<Vec<_>>()));
        loop {
            let mut size = vec![0usize; n];
            for &c in &color {
                size[c] += 1;
            }
            let Some(c) = (0..n).find(|&c| size[c] > 1) else { break };
            let v = color.iter().position(|&x| x == c).expect("class is non-empty");
            let keys: Vec<(usize, bool)> = (0..n).map(|u| (color[u], u != v)).collect();
            color = self.refine(dense_ids(&keys));
        }
        color
    }
}

fn dense_ids<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<&K> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(&k).unwrap()).collect()
}

/// Greedy agglomerative modularity maximisation (Clauset-Newman-Moore).
///
/// Merges the adjacent pair with the largest modularity gain until no merge
/// improves it; ties go to the pair with the smallest ranks. Returns the
/// community of each node.
pub fn greedy_communities(g: &Graph, rank: &[usize]) -> Vec<usize> {
    let n = g.adj.len();
    let m2 = 2 * g.edge_count() as i128;
    let mut comm: Vec<usize> = (0..n).collect();
    if m2 == 0 {
        return comm;
    }
    // community id = its smallest-rank member; links[c][d] = edges between c and d
    let mut deg: Vec<i128> = g.adj.iter().map(|l| l.len() as i128).collect();
    let mut key: Vec<usize> = rank.to_vec();
    let mut links: Vec<BTreeMap<usize, i128>> = vec![BTreeMap::new(); n];
    for v in 0..n {
        for &u in &g.adj[v] {
            *links[v].entry(u).or_default() += 1;
        }
    }
    let mut alive: Vec<bool> = vec![true; n];
    loop {
        let mut best: Option<(i128, (usize, usize), usize, usize)> = None;
        for c in 0..n {
            if !alive[c] {
                continue;
            }
            for (&d, &e) in &links[c] {
                if d <= c {
                    continue;
                }
                let gain = m2 * e - deg[c] * deg[d];
                let tie = (key[c].min(key[d]), key[c].max(key[d]));
                let better = match best {
                    None => true,
                    Some((bg, bt, _, _)) => gain > bg || (gain == bg && tie < bt),
                };
                if better {
                    best = Some((gain, tie, c, d));
                }
            }
        }
        let Some((gain, _, c, d)) = best else { break };
        if gain <= 0 {
            break;
        }
        let (keep, gone) = if key[c] <= key[d] { (c, d) } else { (d, c) };
        let moved = std::mem::take(&mut links[gone]);
        for (x, e) in moved {
            links[x].remove(&gone);
            if x == keep {
                continue;
            }
            *links[keep].entry(x).or_default() += e;
            *links[x].entry(keep).or_default() += e;
        }
        deg[keep] += deg[gone];
        key[keep] = key[keep].min(key[gone]);
        alive[gone] = false;
        for cm in comm.iter_mut() {
            if *cm == gone {
                *cm = keep;
            }
        }
    }
    comm
}

/// Newman modularity of a node partition.
pub fn modularity(g: &Graph, comm: &[usize]) -> f64 {
    let m = g.edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let mut inside: HashMap<usize, f64> = HashMap::new();
    let mut degree: HashMap<usize, f64> = HashMap::new();
    for v in 0..g.adj.len() {
        *degree.entry(comm[v]).or_default() += g.adj[v].len() as f64;
        for &u in &g.adj[v] {
            if u > v && comm[u] == comm[v] {
                *inside.entry(comm[v]).or_default() += 1.0;
            }
        }
    }
    let mut terms: Vec<f64> = degree
        .iter()
        .map(|(c, d)| inside.get(c).copied().unwrap_or(0.0) / m - (d / (2.0 * m)).powi(2))
        .collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Square clustering of every node, for bipartite graphs (no triangles):
/// `q / ((d-1)(sum of neighbour degrees - d) - q)` with `q` the number of
/// 4-cycles through the node counted per neighbour pair.
pub fn square_clustering(g: &Graph) -> Vec<f64> {
    let n = g.adj.len();
    let mut hits = vec![0u64; n];
    let mut touched = Vec::new();
    (0..n)
        .map(|v| {
            let d = g.adj[v].len() as u64;
            if d < 2 {
                return 0.0;
            }
            let mut sum_k = 0u64;
            for &u in &g.adj[v] {
                sum_k += g.adj[u].len() as u64;
                for &x in &g.adj[u] {
                    if x != v {
                        if hits[x] == 0 {
                            touched.push(x);
                        }
                        hits[x] += 1;
                    }
                }
            }
            let mut q = 0u64;
            for &x in &touched {
                q += hits[x] * (hits[x] - 1) / 2;
                hits[x] = 0;
            }
            touched.clear();
            let potential = (d - 1) * (sum_k - d) - q;
            if potential == 0 {
                0.0
            } else {
                q as f64 / potential as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_bipartite_squares() {
        // K_{2,3}: each node's neighbour pairs close every possible square
        let g = Graph::new(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]);
        for c in square_clustering(&g) {
            assert!((c - 1.0).abs() < 1e-12);
        }
        let path = Graph::new(4, [(0, 1), (1, 2), (2, 3)]);
        assert_eq!(square_clustering(&path), vec![0.0; 4]);
    }

    #[test]
    fn two_cliques_split() {
        let mut edges = vec![];
        for a in 0..4 {
            for b in a + 1..4 {
                edges.push((a, b));
                edges.push((a + 4, b + 4));
            }
        }
        edges.push((3, 4));
        let g = Graph::new(8, edges);
        let rank = g.canonical_ranks(&[0; 8]);
        let comm = greedy_communities(&g, &rank);
        assert!(comm[..4].iter().all(|&c| c == comm[0]));
        assert!(comm[4..].iter().all(|&c| c == comm[4]));
        assert_ne!(comm[0], comm[4]);
        let q = modularity(&g, &comm);
        // two communities with 6 internal edges each out of 13, degree sums 13 each
        let expect = 2.0 * (6.0 / 13.0 - 0.25);
        assert!((q - expect).abs() < 1e-12);
        assert_eq!(modularity(&g, &[0; 8]), 0.0);
    }
}
