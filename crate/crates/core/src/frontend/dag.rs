//! Gate dependency DAG and its ASAP front partition.

use serde::{Deserialize, Serialize};

use super::{Circuit, Gate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDag {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub preds: Vec<Vec<usize>>,
    pub succs: Vec<Vec<usize>>,
    /// Iterated zero-in-degree fronts, each sorted by gate index.
    pub layers: Vec<Vec<usize>>,
}

impl GateDag {
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succs.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
    }
}

fn add_edge(preds: &mut [Vec<usize>], succs: &mut [Vec<usize>], i: usize, j: usize) {
    if !succs[i].contains(&j) {
        succs[i].push(j);
        preds[j].push(i);
    }
}

/// Builds precedence edges between consecutive gates on each qubit. A barrier
/// links every gate that is last on its qubit before the cut to every gate that
/// is first on its qubit after it.
pub fn build_dag(circuit: &Circuit) -> GateDag {
    let n = circuit.gates.len();
    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    let mut last: Vec<Option<usize>> = vec![None; circuit.n_qubits];
    let mut cut_sources: Vec<usize> = Vec::new();
    let mut cut_open = vec![false; circuit.n_qubits];
    let mut barriers = circuit.barriers.iter().peekable();

    for (j, g) in circuit.gates.iter().enumerate() {
        if barriers.next_if(|&&b| b <= j).is_some() {
            while barriers.next_if(|&&b| b <= j).is_some() {}
            cut_sources = last.iter().flatten().copied().collect();
            cut_sources.sort_unstable();
            cut_sources.dedup();
            cut_open.iter_mut().for_each(|o| *o = true);
        }
        for &q in g.qubits().iter() {
            if cut_open[q] {
                cut_open[q] = false;
                for &i in &cut_sources {
                    add_edge(&mut preds, &mut succs, i, j);
                }
            } else if let Some(i) = last[q] {
                add_edge(&mut preds, &mut succs, i, j);
            }
            last[q] = Some(j);
        }
    }

    let mut indeg: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut front: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut layers = Vec::new();
    while !front.is_empty() {
        let mut next = Vec::new();
        for &i in &front {
            for &j in &succs[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        layers.push(std::mem::replace(&mut front, next));
    }

    GateDag { n_qubits: circuit.n_qubits, gates: circuit.gates.clone(), preds, succs, layers }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(q: usize) -> Gate {
        Gate::u3(q, 1.0, 0.0, 0.0)
    }

    #[test]
    fn disjoint_gates_share_a_front() {
        let d = build_dag(&Circuit::with_gates("c", 2, vec![u(0), u(1)]));
        assert_eq!(d.edges().count(), 0);
        assert_eq!(d.layers, vec![vec![0, 1]]);
    }

    #[test]
    fn shared_qubit_orders() {
        let d = build_dag(&Circuit::with_gates("c", 2, vec![u(0), Gate::Cz(0, 1)]));
        assert_eq!(d.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(d.layers.len(), 2);
    }

    #[test]
    fn only_immediate_predecessor_is_linked() {
        let d = build_dag(&Circuit::with_gates("c", 1, vec![u(0), u(0), u(0)]));
        assert_eq!(d.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn barrier_cuts_everything() {
        let mut c = Circuit::with_gates("c", 3, vec![u(0), u(1), u(2)]);
        c.barriers = vec![2];
        let d = build_dag(&c);
        assert_eq!(d.preds[2], vec![0, 1]);
        assert_eq!(d.layers, vec![vec![0, 1], vec![2]]);
    }
}
