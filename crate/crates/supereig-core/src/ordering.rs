//! Fill-reducing orderings: nested dissection with level-structure
//! separators, reverse Cuthill-McKee on the leaves.

use alloc::vec::Vec;

use crate::sparse::CsrMatrix;

const LEAF: usize = 48;

struct Graph<'a> {
    ptr: &'a [usize],
    adj: &'a [usize],
}

impl Graph<'_> {
    fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[self.ptr[v]..self.ptr[v + 1]]
    }
    fn degree(&self, v: usize) -> usize {
        self.ptr[v + 1] - self.ptr[v]
    }
}

struct Work {
    /// Subgraph id each vertex currently belongs to.
    owner: Vec<u32>,
    level: Vec<u32>,
    next_id: u32,
}

/// Permutation `perm[new] = old` for the graph of `a`.
pub fn nested_dissection(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n_rows();
    let (ptr, adj) = a.adjacency();
    let g = Graph { ptr: &ptr, adj: &adj };
    let mut w = Work { owner: alloc::vec![0; n], level: alloc::vec![u32::MAX; n], next_id: 1 };
    let mut out = Vec::with_capacity(n);
    dissect(&g, &mut w, (0..n).collect(), 0, &mut out);
    debug_assert_eq!(out.len(), n);
    out
}

fn dissect(g: &Graph, w: &mut Work, verts: Vec<usize>, id: u32, out: &mut Vec<usize>) {
    if verts.len() <= LEAF {
        rcm(g, w, &verts, id, out);
        return;
    }
    // split into connected components first
    let comps = components(g, w, &verts, id);
    if comps.len() > 1 {
        for c in comps {
            let cid = w.next_id;
            w.next_id += 1;
            for &v in &c {
                w.owner[v] = cid;
            }
            dissect(g, w, c, cid, out);
        }
        return;
    }
    let root = pseudo_peripheral(g, w, verts[0], id);
    let levels = bfs_levels(g, w, root, id);
    if levels.len() < 3 {
        rcm(g, w, &verts, id, out);
        return;
    }
    let half = verts.len() / 2;
    let mut acc = 0;
    let mut m = 1;
    for (l, lv) in levels.iter().enumerate() {
        acc += lv.len();
        if acc > half {
            m = l.clamp(1, levels.len() - 2);
            break;
        }
    }
    // separator vertices with no neighbor beyond level m fall to the lower part
    let mut lower: Vec<usize> = levels[..m].iter().flatten().copied().collect();
    let upper: Vec<usize> = levels[m + 1..].iter().flatten().copied().collect();
    let mut sep = Vec::with_capacity(levels[m].len());
    let mm = m as u32 + 2;
    for &v in &levels[m] {
        if g.neighbors(v).iter().any(|&u| w.owner[u] == id && w.level[u] == mm) {
            sep.push(v);
        } else {
            lower.push(v);
        }
    }
    clear_levels(w, &levels);
    let (ia, ib) = (w.next_id, w.next_id + 1);
    w.next_id += 2;
    for &v in &lower {
        w.owner[v] = ia;
    }
    for &v in &upper {
        w.owner[v] = ib;
    }
    for &v in &sep {
        w.owner[v] = u32::MAX;
    }
    dissect(g, w, lower, ia, out);
    dissect(g, w, upper, ib, out);
    out.extend_from_slice(&sep);
}

fn components(g: &Graph, w: &mut Work, verts: &[usize], id: u32) -> Vec<Vec<usize>> {
    let mut comps = Vec::new();
    for &v in verts {
        w.level[v] = u32::MAX;
    }
    for &s in verts {
        if w.level[s] != u32::MAX {
            continue;
        }
        let mut c = alloc::vec![s];
        w.level[s] = 0;
        let mut head = 0;
        while head < c.len() {
            let v = c[head];
            head += 1;
            for &u in g.neighbors(v) {
                if w.owner[u] == id && w.level[u] == u32::MAX {
                    w.level[u] = 0;
                    c.push(u);
                }
            }
        }
        comps.push(c);
    }
    for &v in verts {
        w.level[v] = u32::MAX;
    }
    comps
}

/// Level sets of a BFS from `root` inside subgraph `id`. Leaves
/// `w.level[v] = level + 1` on visited vertices; callers clear it.
fn bfs_levels(g: &Graph, w: &mut Work, root: usize, id: u32) -> Vec<Vec<usize>> {
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut frontier = alloc::vec![root];
    w.level[root] = 1;
    let mut l = 1;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &v in &frontier {
            for &u in g.neighbors(v) {
                if w.owner[u] == id && w.level[u] == u32::MAX {
                    w.level[u] = l + 1;
                    next.push(u);
                }
            }
        }
        levels.push(frontier);
        frontier = next;
        l += 1;
    }
    levels
}

fn clear_levels(w: &mut Work, levels: &[Vec<usize>]) {
    for lv in levels {
        for &v in lv {
            w.level[v] = u32::MAX;
        }
    }
}

fn pseudo_peripheral(g: &Graph, w: &mut Work, start: usize, id: u32) -> usize {
    let mut root = start;
    let mut ecc = 0;
    for _ in 0..8 {
        let levels = bfs_levels(g, w, root, id);
        clear_levels(w, &levels);
        let last = levels.last().unwrap();
        let cand = *last.iter().min_by_key(|&&v| (g.degree(v), v)).unwrap();
        if levels.len() <= ecc {
            break;
        }
        ecc = levels.len();
        root = cand;
    }
    root
}

fn rcm(g: &Graph, w: &mut Work, verts: &[usize], id: u32, out: &mut Vec<usize>) {
    for &v in verts {
        w.level[v] = u32::MAX;
    }
    let start = out.len();
    let mut sorted: Vec<usize> = verts.to_vec();
    sorted.sort_by_key(|&v| (g.degree(v), v));
    for &s in &sorted {
        if w.level[s] != u32::MAX {
            continue;
        }
        w.level[s] = 0;
        let mut head = out.len();
        out.push(s);
        while head < out.len() {
            let v = out[head];
            head += 1;
            let mut nb: Vec<usize> =
                g.neighbors(v).iter().copied().filter(|&u| w.owner[u] == id && w.level[u] == u32::MAX).collect();
            nb.sort_by_key(|&u| (g.degree(u), u));
            for u in nb {
                w.level[u] = 0;
                out.push(u);
            }
        }
    }
    out[start..].reverse();
    for &v in verts {
        w.owner[v] = u32::MAX;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_is_bijection() {
        let n = 300;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            for j in [i + 1, i + 17] {
                if j < n {
                    t.push((i, j, -1.0));
                    t.push((j, i, -1.0));
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, n, t);
        let mut p = nested_dissection(&a);
        p.sort_unstable();
        assert_eq!(p, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn handles_disconnected_and_diagonal() {
        let a = CsrMatrix::identity(100);
        let mut p = nested_dissection(&a);
        p.sort_unstable();
        assert_eq!(p, (0..100).collect::<Vec<_>>());
    }
}
