//! Address digraph, cycle-bearing strongly connected components and positions.
//!
//! Vertices are the map indices `1..=N`; there is an edge `j -> i` exactly when
//! `I_j ⊆ D_i`. All public indices are 1-based.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::rational::{fmt_rational, int};
use crate::spec::RfifSpec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AddressGraph {
    n: usize,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl AddressGraph {
    /// Builds a graph on `1..=n` from `(from, to)` pairs.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut succ = vec![BTreeSet::new(); n];
        let mut pred = vec![BTreeSet::new(); n];
        for &(j, i) in edges {
            assert!(
                (1..=n).contains(&j) && (1..=n).contains(&i),
                "edge out of range"
            );
            succ[j - 1].insert(i);
            pred[i - 1].insert(j);
        }
        AddressGraph {
            n,
            succ: succ.into_iter().map(|s| s.into_iter().collect()).collect(),
            pred: pred.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.succ[from - 1].binary_search(&to).is_ok()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v - 1]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.pred[v - 1]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (1..=self.n)
            .flat_map(|j| self.successors(j).iter().map(move |&i| (j, i)))
            .collect()
    }
}

pub fn build_address_graph(spec: &RfifSpec) -> AddressGraph {
    let n = spec.n_maps();
    let mut edges = Vec::new();
    for i in 1..=n {
        let d = spec.domain(i);
        for j in 1..=n {
            if d.contains_interval(&spec.interval(j)) {
                edges.push((j, i));
            }
        }
    }
    AddressGraph::from_edges(n, &edges)
}

/// Tarjan's algorithm. Returns every strongly connected component (cycle-free
/// singletons included), each sorted, in the order they are completed.
pub fn tarjan(g: &AddressGraph) -> Vec<Vec<usize>> {
    struct State<'a> {
        g: &'a AddressGraph,
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }

    fn visit(s: &mut State<'_>, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for &w in s.g.successors(v + 1) {
            let w = w - 1;
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                Some(_) => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().expect("tarjan stack underflow");
                s.on_stack[w] = false;
                comp.push(w + 1);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            s.out.push(comp);
        }
    }

    let n = g.vertex_count();
    let mut s = State {
        g,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}

/// Strongly connected components that contain a cycle, ordered by smallest member.
/// A singleton qualifies only with a self-loop.
pub fn cyclic_sccs(g: &AddressGraph) -> Vec<Vec<usize>> {
    let mut comps: Vec<Vec<usize>> = tarjan(g)
        .into_iter()
        .filter(|c| c.len() > 1 || g.has_edge(c[0], c[0]))
        .collect();
    comps.sort_by_key(|c| c[0]);
    comps
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// 1-based component index.
    pub index: usize,
    /// Sorted members `a_1 < ... < a_d`.
    pub members: Vec<usize>,
    /// Common ratio `|D_n| / |I_n|`.
    pub t: u64,
}

impl Component {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, n: usize) -> bool {
        self.members.binary_search(&n).is_ok()
    }
}

/// Checks that `|D_n| / |I_n|` is one integer `T >= 2` across `members`.
pub fn component_ratio(spec: &RfifSpec, members: &[usize]) -> Result<u64> {
    let first = spec.ratio(members[0]);
    for &n in members {
        let ratio = spec.ratio(n);
        if !ratio.is_integer() {
            return Err(Error::UniformRatio {
                map: n,
                message: format!("|D_n|/|I_n| = {} is not an integer", fmt_rational(&ratio)),
            });
        }
        if ratio != first {
            return Err(Error::UniformRatio {
                map: n,
                message: format!(
                    "|D_n|/|I_n| = {} differs from {} at map {}",
                    fmt_rational(&ratio),
                    fmt_rational(&first),
                    members[0]
                ),
            });
        }
        if ratio < int(2) {
            return Err(Error::UniformRatio {
                map: n,
                message: format!("|D_n|/|I_n| = {} is below 2", fmt_rational(&ratio)),
            });
        }
    }
    Ok(*first.numer() as u64)
}

pub fn components(g: &AddressGraph, spec: &RfifSpec) -> Result<Vec<Component>> {
    cyclic_sccs(g)
        .into_iter()
        .enumerate()
        .map(|(r, members)| {
            let t = component_ratio(spec, &members)?;
            Ok(Component {
                index: r + 1,
                members,
                t,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionMap {
    /// `p[i - 1] = P(i)`.
    pub p: Vec<usize>,
    /// `ancestors[i - 1]`: vertices outside the strongly connected class of `i`
    /// with a path to `i`.
    pub ancestors: Vec<BTreeSet<usize>>,
}

impl PositionMap {
    pub fn position(&self, i: usize) -> usize {
        self.p[i - 1]
    }
}

/// Position function over the condensation. Vertices are equivalent when they
/// share a Tarjan class; `comps` only documents the caller's components and is
/// consistent with that relation by construction.
pub fn positions(g: &AddressGraph, _comps: &[Component]) -> PositionMap {
    let n = g.vertex_count();
    let mut class = vec![0usize; n];
    for (c, members) in tarjan(g).iter().enumerate() {
        for &v in members {
            class[v - 1] = c;
        }
    }
    let ancestors: Vec<BTreeSet<usize>> = (1..=n)
        .map(|i| {
            let mut seen = BTreeSet::new();
            let mut stack = vec![i];
            while let Some(v) = stack.pop() {
                for &u in g.predecessors(v) {
                    if seen.insert(u) {
                        stack.push(u);
                    }
                }
            }
            seen.into_iter()
                .filter(|&j| class[j - 1] != class[i - 1])
                .collect()
        })
        .collect();

    // Ancestor sets strictly shrink along the condensation order, so sorting by
    // their size gives a valid evaluation order.
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by_key(|&i| ancestors[i - 1].len());
    let mut p = vec![0usize; n];
    for i in order {
        p[i - 1] = 1 + ancestors[i - 1]
            .iter()
            .map(|&j| p[j - 1])
            .max()
            .unwrap_or(0);
    }
    PositionMap { p, ancestors }
}
