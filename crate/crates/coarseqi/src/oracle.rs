//! Independent reference computations over explicitly materialised graphs.
//!
//! Everything here deliberately avoids the closed-form distance and counting
//! formulas implemented elsewhere: regions are flooded vertex by vertex from
//! seed points and distances come from plain breadth-first search. The CLI
//! `distance-selftest` subcommand and the test suites compare the fast
//! formulas against these references.

use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;

use crate::dl::{DlPoint, DlSpace};
use crate::trees::TreeVertex;

/// A finite graph materialised from a neighbour function.
pub struct ExplicitGraph<V> {
    verts: Vec<V>,
    index: HashMap<V, u32>,
    adj: Vec<Vec<u32>>,
}

/// Floods the region reachable from `seeds` through `neighbors`, keeping only
/// vertices accepted by `region`. Panics if the region exceeds `cap` vertices;
/// callers size regions in advance.
pub fn materialize<V, N, R>(seeds: Vec<V>, mut neighbors: N, mut region: R, cap: usize) -> ExplicitGraph<V>
where
    V: Eq + Hash + Clone,
    N: FnMut(&V) -> Vec<V>,
    R: FnMut(&V) -> bool,
{
    let mut verts: Vec<V> = Vec::new();
    let mut index: HashMap<V, u32> = HashMap::new();
    let mut queue = std::collections::VecDeque::new();
    for s in seeds {
        if region(&s) && !index.contains_key(&s) {
            index.insert(s.clone(), verts.len() as u32);
            verts.push(s.clone());
            queue.push_back(s);
        }
    }
    let mut adj: Vec<Vec<u32>> = Vec::new();
    while let Some(v) = queue.pop_front() {
        assert!(verts.len() <= cap, "materialised region exceeded cap {cap}");
        let vi = index[&v];
        let mut row = Vec::new();
        for w in neighbors(&v) {
            if !region(&w) {
                continue;
            }
            let wi = *index.entry(w.clone()).or_insert_with(|| {
                verts.push(w.clone());
                queue.push_back(w.clone());
                (verts.len() - 1) as u32
            });
            row.push(wi);
        }
        if adj.len() <= vi as usize {
            adj.resize(vi as usize + 1, Vec::new());
        }
        adj[vi as usize] = row;
        let _ = &v;
    }
    adj.resize(verts.len(), Vec::new());
    ExplicitGraph { verts, index, adj }
}

impl<V: Eq + Hash + Clone> ExplicitGraph<V> {
    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn vertices(&self) -> &[V] {
        &self.verts
    }

    pub fn index_of(&self, v: &V) -> Option<u32> {
        self.index.get(v).copied()
    }

    pub fn vertex(&self, i: u32) -> &V {
        &self.verts[i as usize]
    }

    pub fn neighbors_of(&self, i: u32) -> &[u32] {
        &self.adj[i as usize]
    }

    /// Edge list with each undirected edge reported once.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (u, row) in self.adj.iter().enumerate() {
            for &w in row {
                if (u as u32) < w {
                    out.push((u as u32, w));
                }
            }
        }
        out
    }

    /// Breadth-first distances from `source`; `u32::MAX` marks unreachable.
    /// Stops early once `stop_at` (if given) has been settled.
    pub fn bfs(&self, source: u32, stop_at: Option<u32>) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.verts.len()];
        let mut queue = std::collections::VecDeque::new();
        dist[source as usize] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            if stop_at == Some(v) {
                break;
            }
            let dv = dist[v as usize];
            for &w in &self.adj[v as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dv + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// BFS distance between two vertices.
    pub fn distance(&self, u: u32, v: u32) -> Option<u32> {
        let d = self.bfs(u, Some(v))[v as usize];
        (d != u32::MAX).then_some(d)
    }

    /// BFS distance tables from many sources, in parallel.
    pub fn multi_source_tables(&self, sources: &[u32]) -> Vec<Vec<u32>>
    where
        V: Sync + Send,
    {
        sources.par_iter().map(|&s| self.bfs(s, None)).collect()
    }

    /// Vertices reachable from `sources` without entering `blocked`.
    pub fn reachable_avoiding(&self, sources: &[u32], blocked: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.verts.len()];
        let mut queue = std::collections::VecDeque::new();
        for &s in sources {
            if !blocked[s as usize] && !seen[s as usize] {
                seen[s as usize] = true;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v as usize] {
                if !seen[w as usize] && !blocked[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }
}

/// Materialises the subtree of depth `depth` below `top`, with the tree
/// adjacency (parent plus children) restricted to it. Geodesics between its
/// vertices never leave it, so BFS distances inside equal tree distances.
pub fn tree_slab_graph(top: &TreeVertex, depth: u32) -> ExplicitGraph<TreeVertex> {
    let floor = top.height() - depth as i64;
    let ceil = top.height();
    let top = top.clone();
    let region = {
        let top = top.clone();
        move |v: &TreeVertex| {
            v.height() >= floor && v.height() <= ceil && top.is_ancestor_of(v)
        }
    };
    let neighbors = |v: &TreeVertex| {
        let mut out = v.children();
        out.push(v.parent());
        out
    };
    let base = top.base() as usize;
    let cap = (0..=depth).map(|k| base.pow(k)).sum::<usize>() + 1;
    materialize(vec![top], neighbors, region, cap)
}

/// Slab region of a Diestel-Leader graph: heights in `[z_lo, z_hi]`, first
/// tree coordinate below `anchor1` (a vertex at height `z_hi`), second tree
/// coordinate below `anchor2` (at internal height `-z_lo`).
pub fn dl_slab_graph(
    space: &DlSpace,
    z_lo: i64,
    z_hi: i64,
    anchor1: &TreeVertex,
    anchor2: &TreeVertex,
    seed: DlPoint,
    cap: usize,
) -> ExplicitGraph<DlPoint> {
    assert_eq!(anchor1.height(), z_hi, "first anchor must sit at the top height");
    assert_eq!(anchor2.height(), -z_lo, "second anchor must sit at internal height -z_lo");
    let region_space = space.clone();
    let (a1, a2) = (anchor1.clone(), anchor2.clone());
    let region = move |p: &DlPoint| {
        p.z() >= z_lo
            && p.z() <= z_hi
            && a1.is_ancestor_of(&region_space.t1(p))
            && a2.is_ancestor_of(&region_space.t2(p))
    };
    let nbr_space = space.clone();
    let neighbors = move |p: &DlPoint| nbr_space.neighbors(p);
    materialize(vec![seed], neighbors, region, cap)
}
