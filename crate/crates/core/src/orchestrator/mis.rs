//! Conflict graphs over movement operations and greedy MIS round extraction.

use serde::{Deserialize, Serialize};

use crate::hw::HardwareConfig;
use crate::ir::Site;
use crate::placer::{pair_compatible, MoveOp};

/// Undirected conflict graph; `adj[u]` lists neighbours in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictGraph {
    pub nodes: Vec<MoveOp>,
    pub adj: Vec<Vec<usize>>,
}

impl ConflictGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u != v && !adj[u].contains(&v) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        adj.iter_mut().for_each(|a| a.sort_unstable());
        ConflictGraph { nodes: Vec::new(), adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Edge between two moves iff the pair alone is not AOD compatible, with
/// every other atom in `atoms` treated as parked.
pub fn build_conflict_graph(moves: &[MoveOp], atoms: &[Site], hw: &HardwareConfig) -> ConflictGraph {
    let n = moves.len();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if !pair_compatible(&moves[i], &moves[j], atoms, hw) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj.iter_mut().for_each(|a| a.sort_unstable());
    ConflictGraph { nodes: moves.to_vec(), adj }
}

/// Repeatedly extracts a maximal independent set: pick the node of minimum
/// residual degree (ties by id), drop its neighbours, repeat; the picked
/// nodes form one round and leave the graph.
pub fn greedy_mis_rounds(graph: &ConflictGraph) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut alive = vec![true; n];
    let mut left = n;
    let mut rounds = Vec::new();
    while left > 0 {
        let mut cand = alive.clone();
        let mut degree: Vec<usize> =
            (0..n).map(|u| if alive[u] { graph.adj[u].iter().filter(|&&v| alive[v]).count() } else { 0 }).collect();
        let mut round = Vec::new();
        loop {
            let pick = (0..n).filter(|&u| cand[u]).min_by_key(|&u| (degree[u], u));
            let Some(u) = pick else { break };
            round.push(u);
            cand[u] = false;
            for &v in &graph.adj[u] {
                if cand[v] {
                    cand[v] = false;
                    for &w in &graph.adj[v] {
                        if cand[w] {
                            degree[w] -= 1;
                        }
                    }
                }
            }
        }
        for &u in &round {
            alive[u] = false;
        }
        left -= round.len();
        round.sort_unstable();
        rounds.push(round);
    }
    rounds
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edgeless_is_one_round() {
        let g = ConflictGraph::from_edges(5, &[]);
        assert_eq!(greedy_mis_rounds(&g), vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn triangle_needs_three() {
        let g = ConflictGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(greedy_mis_rounds(&g).len(), 3);
    }

    #[test]
    fn path_of_five_two_rounds() {
        let g = ConflictGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(greedy_mis_rounds(&g), vec![vec![0, 2, 4], vec![1, 3]]);
    }
}
