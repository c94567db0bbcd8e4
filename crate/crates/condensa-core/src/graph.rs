//! Strongly connected components on small dense digraphs.

use alloc::vec;
use alloc::vec::Vec;

/// Tarjan's algorithm, iterative. Returns the component id of every node.
pub fn strongly_connected(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    // (node, position in its adjacency list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// Components with no edge leaving them, each as a sorted node list.
pub fn terminal_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let comp = strongly_connected(adj);
    let count = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut leaves = vec![false; count];
    for (v, out) in adj.iter().enumerate() {
        if out.iter().any(|&w| comp[w] != comp[v]) {
            leaves[comp[v]] = true;
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (v, &c) in comp.iter().enumerate() {
        groups[c].push(v);
    }
    let mut out: Vec<Vec<usize>> = groups
        .into_iter()
        .enumerate()
        .filter(|(c, _)| !leaves[*c])
        .map(|(_, g)| g)
        .collect();
    out.sort();
    out
}

pub fn is_strongly_connected(adj: &[Vec<usize>]) -> bool {
    let comp = strongly_connected(adj);
    comp.iter().all(|&c| c == comp[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn cycle_is_one_component() {
        let adj = vec![vec![1], vec![2], vec![0]];
        assert!(is_strongly_connected(&adj));
        assert_eq!(terminal_components(&adj), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn chain_with_two_sinks() {
        // 0 -> 1, 3 -> 2, nodes 1 and 2 isolated sinks
        let adj = vec![vec![1], vec![], vec![], vec![2]];
        assert!(!is_strongly_connected(&adj));
        assert_eq!(terminal_components(&adj), vec![vec![1], vec![2]]);
    }

    #[test]
    fn transient_component_is_skipped() {
        // {0,1} cycle feeding into {2,3} cycle
        let adj = vec![vec![1], vec![0, 2], vec![3], vec![2]];
        assert_eq!(terminal_components(&adj), vec![vec![2, 3]]);
    }
}
