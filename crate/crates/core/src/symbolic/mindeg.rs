use std::collections::BTreeSet;

use crate::{Permutation, SymmetricPattern};

const VARIABLE: u8 = 0;
const ELEMENT: u8 = 1;
const ABSORBED: u8 = 2;

/// Fill-reducing ordering by approximate minimum degree on the quotient
/// graph, with element absorption.
///
/// Ties go to the smaller original degree, then the smaller index, so the
/// result is deterministic. Returns the elimination order as a relabeling
/// (old column → elimination step).
pub fn minimum_degree(p: &SymmetricPattern) -> Permutation {
    let n = p.n();
    let mut vadj = p.adjacency();
    let init_deg: Vec<usize> = vadj.iter().map(Vec::len).collect();
    let mut eadj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut evars: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut state = vec![VARIABLE; n];
    let mut degree = init_deg.clone();
    let mut queue: BTreeSet<(usize, usize, usize)> = (0..n).map(|v| (degree[v], init_deg[v], v)).collect();

    let mut mark = vec![0usize; n];
    let mut stamp = 0usize;
    const UNSET: usize = usize::MAX;
    let mut w = vec![UNSET; n];
    let mut touched = Vec::new();
    let mut order = Vec::with_capacity(n);

    for k in 0..n {
        let (_, _, v) = queue.pop_first().expect("one variable per step");
        order.push(v);

        stamp += 1;
        mark[v] = stamp;
        let mut lv = Vec::new();
        for &u in &vadj[v] {
            if state[u] == VARIABLE && mark[u] != stamp {
                mark[u] = stamp;
                lv.push(u);
            }
        }
        for e in std::mem::take(&mut eadj[v]) {
            if state[e] != ELEMENT {
                continue;
            }
            for &u in &evars[e] {
                if state[u] == VARIABLE && mark[u] != stamp {
                    mark[u] = stamp;
                    lv.push(u);
                }
            }
            state[e] = ABSORBED;
            evars[e] = Vec::new();
        }
        vadj[v] = Vec::new();
        state[v] = ELEMENT;

        // |Le \ Lv| for every element touching Lv
        for &u in &lv {
            for &e in &eadj[u] {
                if state[e] == ELEMENT {
                    if w[e] == UNSET {
                        w[e] = evars[e].len();
                        touched.push(e);
                    }
                    w[e] -= 1;
                }
            }
        }
        for &e in &touched {
            if w[e] == 0 {
                state[e] = ABSORBED;
                evars[e] = Vec::new();
            }
        }

        let remaining = n - k - 1;
        let ext = lv.len().saturating_sub(1);
        for &u in &lv {
            eadj[u].retain(|&e| state[e] == ELEMENT);
            vadj[u].retain(|&x| x != v && mark[x] != stamp && state[x] == VARIABLE);
            let from_elements: usize = eadj[u].iter().map(|&e| w[e]).sum();
            eadj[u].push(v);
            let d = (remaining.saturating_sub(1))
                .min(degree[u] + ext)
                .min(vadj[u].len() + ext + from_elements);
            queue.remove(&(degree[u], init_deg[u], u));
            degree[u] = d;
            queue.insert((d, init_deg[u], u));
        }
        for e in touched.drain(..) {
            w[e] = UNSET;
        }
        evars[v] = lv;
    }
    Permutation::from_inverse(order).expect("every column eliminated once")
}
