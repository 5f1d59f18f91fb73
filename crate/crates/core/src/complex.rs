//! Simplicial and cubical complexes, lattice skeleta and graph invariants.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::gf2;
use crate::rng;

/// Dimension and position of a face inside its per-dimension face list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId {
    pub dim: usize,
    pub index: usize,
}

impl CellId {
    pub fn new(dim: usize, index: usize) -> Self {
        CellId { dim, index }
    }
}

/// True when two sorted vertex lists have an element in common.
pub fn shares_vertex(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// A finite abstract simplicial complex on vertices `0..vertex_count`.
///
/// Faces of each dimension are stored as sorted vertex lists in
/// lexicographic order, so face ids are canonical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    vertex_count: usize,
    faces: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

impl SimplicialComplex {
    /// Downward closure of the given simplices. Every vertex id below
    /// `vertex_count` becomes a 0-face even when isolated.
    pub fn from_simplices<I>(vertex_count: usize, simplices: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        let mut by_dim: Vec<BTreeSet<Vec<usize>>> = vec![(0..vertex_count).map(|v| vec![v]).collect()];
        for mut s in simplices {
            s.sort_unstable();
            if s.is_empty() {
                return Err(Error::Input("empty simplex".into()));
            }
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Input(format!("repeated vertex in simplex {s:?}")));
            }
            if let Some(&v) = s.last() {
                if v >= vertex_count {
                    return Err(Error::Input(format!("vertex {v} out of range {vertex_count}")));
                }
            }
            if s.len() > 24 {
                return Err(param("simplex dimension above 23 is not supported"));
            }
            let m = s.len();
            for mask in 1u32..(1u32 << m) {
                let f: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
                let d = f.len() - 1;
                if by_dim.len() <= d {
                    by_dim.resize_with(d + 1, BTreeSet::new);
                }
                by_dim[d].insert(f);
            }
        }
        Ok(Self::from_sorted(vertex_count, by_dim.into_iter().map(|s| s.into_iter().collect()).collect()))
    }

    /// Build from explicit per-dimension face lists, rejecting lists that
    /// are not closed under taking faces.
    pub fn from_faces_by_dim(vertex_count: usize, faces_by_dim: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let mut sets: Vec<BTreeSet<Vec<usize>>> = Vec::new();
        for (d, list) in faces_by_dim.into_iter().enumerate() {
            let mut set = BTreeSet::new();
            for mut f in list {
                f.sort_unstable();
                if f.len() != d + 1 || f.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::Data(format!("face {f:?} listed in dimension {d}")));
                }
                if f.iter().any(|&v| v >= vertex_count) {
                    return Err(Error::Data(format!("face {f:?} uses a vertex outside 0..{vertex_count}")));
                }
                set.insert(f);
            }
            sets.push(set);
        }
        if sets.is_empty() {
            sets.push(BTreeSet::new());
        }
        if sets[0].len() != vertex_count {
            return Err(Error::Data("vertex list does not match vertex_count".into()));
        }
        for d in 1..sets.len() {
            for f in &sets[d] {
                for skip in 0..f.len() {
                    let mut g = f.clone();
                    g.remove(skip);
                    if !sets[d - 1].contains(&g) {
                        return Err(Error::Data(format!("face {g:?} of {f:?} is missing")));
                    }
                }
            }
        }
        while sets.len() > 1 && sets.last().map_or(false, |s| s.is_empty()) {
            sets.pop();
        }
        Ok(Self::from_sorted(vertex_count, sets.into_iter().map(|s| s.into_iter().collect()).collect()))
    }

    fn from_sorted(vertex_count: usize, mut faces: Vec<Vec<Vec<usize>>>) -> Self {
        while faces.len() > 1 && faces.last().map_or(false, |f| f.is_empty()) {
            faces.pop();
        }
        let index = faces
            .iter()
            .map(|list| list.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect())
            .collect();
        SimplicialComplex { vertex_count, faces, index }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Largest face dimension.
    pub fn dim(&self) -> usize {
        self.faces.len().saturating_sub(1)
    }

    pub fn count(&self, d: usize) -> usize {
        self.faces.get(d).map_or(0, |f| f.len())
    }

    pub fn counts(&self) -> Vec<usize> {
        self.faces.iter().map(|f| f.len()).collect()
    }

    pub fn total_count(&self) -> usize {
        self.faces.iter().map(|f| f.len()).sum()
    }

    pub fn faces(&self, d: usize) -> &[Vec<usize>] {
        self.faces.get(d).map_or(&[], |f| f.as_slice())
    }

    pub fn faces_by_dim(&self) -> &[Vec<Vec<usize>>] {
        &self.faces
    }

    pub fn face(&self, id: CellId) -> &[usize] {
        &self.faces[id.dim][id.index]
    }

    pub fn id_of(&self, vertices: &[usize]) -> Option<CellId> {
        let mut v = vertices.to_vec();
        v.sort_unstable();
        let d = v.len().checked_sub(1)?;
        self.index.get(d)?.get(&v).map(|&i| CellId::new(d, i))
    }

    /// All face ids, ordered by dimension then index.
    pub fn cell_ids(&self) -> impl Iterator<Item = CellId> + '_ {
        self.faces
            .iter()
            .enumerate()
            .flat_map(|(d, l)| (0..l.len()).map(move |i| CellId::new(d, i)))
    }

    /// Indices of the codimension-one faces of face `i` in dimension `d`.
    pub fn boundary(&self, d: usize, i: usize) -> Vec<usize> {
        if d == 0 {
            return Vec::new();
        }
        let f = &self.faces[d][i];
        let mut out: Vec<usize> = (0..f.len())
            .map(|skip| {
                let g: Vec<usize> = f.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &v)| v).collect();
                self.index[d - 1][&g]
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// For every vertex, the ids of all faces containing it.
    pub fn vertex_stars(&self) -> Vec<Vec<CellId>> {
        let mut star = vec![Vec::new(); self.vertex_count];
        for id in self.cell_ids() {
            for &v in self.face(id) {
                star[v].push(id);
            }
        }
        star
    }

    /// Maximum over vertices of the number of faces containing it.
    pub fn local_degree(&self) -> usize {
        let mut c = vec![0usize; self.vertex_count];
        for list in &self.faces {
            for f in list {
                for &v in f {
                    c[v] += 1;
                }
            }
        }
        c.into_iter().max().unwrap_or(0)
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        self.faces(1)
    }

    /// Adjacency lists of the 1-skeleton.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for e in self.edges() {
            adj[e[0]].push(e[1]);
            adj[e[1]].push(e[0]);
        }
        adj
    }

    /// Number of connected components of the 1-skeleton.
    pub fn components(&self) -> usize {
        let adj = self.adjacency();
        let mut seen = vec![false; self.vertex_count];
        let mut comps = 0;
        for s in 0..self.vertex_count {
            if seen[s] {
                continue;
            }
            comps += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        comps
    }

    /// Subcomplex spanned by the faces of dimension at most `k`.
    pub fn skeleton(&self, k: usize) -> SimplicialComplex {
        Self::from_sorted(self.vertex_count, self.faces.iter().take(k + 1).cloned().collect())
    }
}

/// One face of the integer lattice: `base` is its lowest corner and bit `i`
/// of `dirs` is set when the face extends one unit along axis `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeFace {
    pub base: Vec<u32>,
    pub dirs: u32,
}

impl CubeFace {
    pub fn dim(&self) -> usize {
        self.dirs.count_ones() as usize
    }

    /// Closed interval occupied along each axis.
    pub fn intervals(&self) -> Vec<(u32, u32)> {
        self.base
            .iter()
            .enumerate()
            .map(|(i, &b)| (b, b + (self.dirs >> i & 1)))
            .collect()
    }

    pub fn from_intervals(iv: &[(u32, u32)]) -> Option<Self> {
        let mut dirs = 0u32;
        for (i, &(lo, hi)) in iv.iter().enumerate() {
            match hi.checked_sub(lo)? {
                0 => {}
                1 => dirs |= 1 << i,
                _ => return None,
            }
        }
        Some(CubeFace { base: iv.iter().map(|p| p.0).collect(), dirs })
    }

    /// Codimension-one faces.
    pub fn facets(&self) -> Vec<CubeFace> {
        let mut out = Vec::new();
        for i in 0..self.base.len() {
            if self.dirs >> i & 1 == 1 {
                let d = self.dirs & !(1 << i);
                out.push(CubeFace { base: self.base.clone(), dirs: d });
                let mut b = self.base.clone();
                b[i] += 1;
                out.push(CubeFace { base: b, dirs: d });
            }
        }
        out
    }

    /// Centre of the face in lattice coordinates.
    pub fn center(&self) -> Vec<f64> {
        self.intervals().iter().map(|&(a, b)| (a + b) as f64 / 2.0).collect()
    }
}

/// A cubical complex: a set of lattice faces closed under taking faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicalComplex {
    ambient: usize,
    faces: Vec<Vec<CubeFace>>,
    index: HashMap<CubeFace, usize>,
}

impl CubicalComplex {
    /// Build from arbitrary faces, adding every missing sub-face.
    pub fn from_faces<I: IntoIterator<Item = CubeFace>>(ambient: usize, faces: I) -> Result<Self> {
        if ambient == 0 || ambient > 16 {
            return Err(param("ambient dimension must be in 1..=16"));
        }
        let mut by_dim: Vec<BTreeSet<(Vec<(u32, u32)>, CubeFace)>> = vec![BTreeSet::new(); ambient + 1];
        let mut stack: Vec<CubeFace> = Vec::new();
        for f in faces {
            if f.base.len() != ambient || f.dirs >> ambient != 0 {
                return Err(Error::Input("cube face does not live in the ambient lattice".into()));
            }
            stack.push(f);
        }
        let mut seen: std::collections::HashSet<CubeFace> = std::collections::HashSet::new();
        while let Some(f) = stack.pop() {
            if !seen.insert(f.clone()) {
                continue;
            }
            stack.extend(f.facets());
            by_dim[f.dim()].insert((f.intervals(), f));
        }
        while by_dim.len() > 1 && by_dim.last().map_or(false, |s| s.is_empty()) {
            by_dim.pop();
        }
        let faces: Vec<Vec<CubeFace>> =
            by_dim.into_iter().map(|s| s.into_iter().map(|(_, f)| f).collect()).collect();
        let index = faces
            .iter()
            .flat_map(|l| l.iter().enumerate().map(|(i, f)| (f.clone(), i)))
            .collect();
        Ok(CubicalComplex { ambient, faces, index })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.faces.len().saturating_sub(1)
    }

    pub fn count(&self, d: usize) -> usize {
        self.faces.get(d).map_or(0, |f| f.len())
    }

    pub fn counts(&self) -> Vec<usize> {
        self.faces.iter().map(|f| f.len()).collect()
    }

    pub fn faces(&self, d: usize) -> &[CubeFace] {
        self.faces.get(d).map_or(&[], |f| f.as_slice())
    }

    pub fn face(&self, id: CellId) -> &CubeFace {
        &self.faces[id.dim][id.index]
    }

    pub fn id_of(&self, f: &CubeFace) -> Option<CellId> {
        self.index.get(f).map(|&i| CellId::new(f.dim(), i))
    }

    pub fn boundary(&self, d: usize, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.faces[d][i].facets().iter().map(|g| self.index[g]).collect();
        out.sort_unstable();
        out
    }

    /// Every face of the lattice grid `[0, side]^D` of dimension at most `k`.
    pub fn lattice_skeleton(k: usize, ambient: usize, side: usize) -> Result<Self> {
        grid_skeleton(k, ambient, side)
    }
}

/// `X^{k,D}(S)`: the `k`-skeleton of the unit-cube lattice on `[0,S]^D`.
pub fn grid_skeleton(k: usize, ambient: usize, side: usize) -> Result<CubicalComplex> {
    if ambient == 0 || ambient > 16 {
        return Err(param("D must be in 1..=16"));
    }
    if k > ambient {
        return Err(param(format!("k = {k} exceeds D = {ambient}")));
    }
    if side == 0 || side > u32::MAX as usize - 1 {
        return Err(param("S must be at least 1"));
    }
    let mut faces: Vec<Vec<CubeFace>> = Vec::new();
    for j in 0..=k {
        let mut list: Vec<(Vec<(u32, u32)>, CubeFace)> = Vec::new();
        for dirs in 0u32..(1u32 << ambient) {
            if dirs.count_ones() as usize != j {
                continue;
            }
            let extent: Vec<usize> = (0..ambient).map(|i| if dirs >> i & 1 == 1 { side } else { side + 1 }).collect();
            let total: usize = extent.iter().product();
            for mut r in 0..total {
                let mut base = vec![0u32; ambient];
                for i in 0..ambient {
                    base[i] = (r % extent[i]) as u32;
                    r /= extent[i];
                }
                let f = CubeFace { base, dirs };
                list.push((f.intervals(), f));
            }
        }
        list.sort();
        faces.push(list.into_iter().map(|(_, f)| f).collect());
    }
    let index = faces
        .iter()
        .flat_map(|l| l.iter().enumerate().map(|(i, f)| (f.clone(), i)))
        .collect();
    Ok(CubicalComplex { ambient, faces, index })
}

/// Parent map from a subdivision back to the complex it subdivides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refinement {
    /// `parent[d][i]` is the smallest coarse cell containing fine face `(d, i)`.
    pub parent: Vec<Vec<CellId>>,
    pub coarse_counts: Vec<usize>,
}

impl Refinement {
    pub fn identity(c: &SimplicialComplex) -> Self {
        Refinement {
            parent: c.counts().iter().enumerate().map(|(d, &n)| (0..n).map(|i| CellId::new(d, i)).collect()).collect(),
            coarse_counts: c.counts(),
        }
    }

    pub fn parent_of(&self, fine: CellId) -> CellId {
        self.parent[fine.dim][fine.index]
    }

    /// Fine faces grouped by their coarse parent.
    pub fn children(&self) -> Vec<Vec<Vec<CellId>>> {
        let mut out: Vec<Vec<Vec<CellId>>> = self.coarse_counts.iter().map(|&n| vec![Vec::new(); n]).collect();
        for (d, list) in self.parent.iter().enumerate() {
            for (i, p) in list.iter().enumerate() {
                out[p.dim][p.index].push(CellId::new(d, i));
            }
        }
        out
    }

    /// Compose `self` (fine to middle) with `up` (middle to coarse).
    pub fn then(&self, up: &Refinement) -> Refinement {
        Refinement {
            parent: self.parent.iter().map(|l| l.iter().map(|&p| up.parent_of(p)).collect()).collect(),
            coarse_counts: up.coarse_counts.clone(),
        }
    }
}

/// Freudenthal-Kuhn triangulation: each `j`-cube with base `b` is split into
/// `j!` simplices `b, b+e_{p1}, b+e_{p1}+e_{p2}, ...` over permutations `p`
/// of its axes. The choice is consistent across shared faces.
pub fn triangulate_cubical(c: &CubicalComplex) -> Result<(SimplicialComplex, Refinement)> {
    let verts = c.faces(0);
    let vid: HashMap<&[u32], usize> = verts.iter().enumerate().map(|(i, f)| (f.base.as_slice(), i)).collect();
    let mut simplices: Vec<Vec<usize>> = Vec::new();
    for d in 0..=c.dim() {
        for f in c.faces(d) {
            let axes: Vec<usize> = (0..c.ambient).filter(|&i| f.dirs >> i & 1 == 1).collect();
            for perm in permutations(&axes) {
                let mut p = f.base.clone();
                let mut s = vec![vid[p.as_slice()]];
                for &a in &perm {
                    p[a] += 1;
                    s.push(vid[p.as_slice()]);
                }
                simplices.push(s);
            }
        }
    }
    let fine = SimplicialComplex::from_simplices(verts.len(), simplices)?;
    let mut parent = Vec::new();
    for d in 0..=fine.dim() {
        let mut list = Vec::with_capacity(fine.count(d));
        for s in fine.faces(d) {
            let mut iv: Vec<(u32, u32)> = vec![(u32::MAX, 0); c.ambient];
            for &v in s {
                for (i, &x) in verts[v].base.iter().enumerate() {
                    iv[i].0 = iv[i].0.min(x);
                    iv[i].1 = iv[i].1.max(x);
                }
            }
            let cube = CubeFace::from_intervals(&iv).ok_or_else(|| Error::Structure("simplex spans more than one cube".into()))?;
            list.push(c.id_of(&cube).ok_or_else(|| Error::Structure("carrier cube missing".into()))?);
        }
        parent.push(list);
    }
    Ok((fine, Refinement { parent, coarse_counts: c.counts() }))
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// The full `k`-skeleton of the simplex on `n` vertices.
pub fn simplex_skeleton(k: usize, n: usize) -> Result<SimplicialComplex> {
    if n == 0 {
        return Err(param("need at least one vertex"));
    }
    if k + 1 > n {
        return Err(param(format!("k = {k} needs at least {} vertices", k + 1)));
    }
    if n > 64 {
        return Err(param("simplex skeleton limited to 64 vertices"));
    }
    let mut tops = Vec::new();
    let mut cur = Vec::with_capacity(k + 1);
    fn rec(start: usize, n: usize, want: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == want {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, want, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k + 1, &mut cur, &mut tops);
    SimplicialComplex::from_simplices(n, tops)
}

/// Bipartite graph on `N + N` vertices formed as the union of `d`
/// independent uniform perfect matchings, with parallel edges merged.
/// Left vertices are `0..N`, right vertices `N..2N`.
pub fn random_bipartite_graph(n: usize, d: usize, seed: u64) -> Result<SimplicialComplex> {
    if n == 0 || d == 0 {
        return Err(param("N and d must be positive"));
    }
    let mut r = rng::stream(seed, 0x6269_7061);
    let mut edges = BTreeSet::new();
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..d {
        perm.shuffle(&mut r);
        for (u, &v) in perm.iter().enumerate() {
            edges.insert(vec![u, n + v]);
        }
    }
    SimplicialComplex::from_simplices(2 * n, edges)
}

/// Cycle graph on `n` vertices.
pub fn cycle_graph(n: usize) -> Result<SimplicialComplex> {
    if n < 3 {
        return Err(param("a cycle needs at least 3 vertices"));
    }
    SimplicialComplex::from_simplices(n, (0..n).map(|i| vec![i, (i + 1) % n]))
}

/// Path graph on `n` vertices.
pub fn path_graph(n: usize) -> Result<SimplicialComplex> {
    if n < 2 {
        return Err(param("a path needs at least 2 vertices"));
    }
    SimplicialComplex::from_simplices(n, (0..n - 1).map(|i| vec![i, i + 1]))
}

/// Edge expansion `h = min |E(A, A^c)| / |A|` over `0 < |A| <= n/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub value: f64,
    /// `true` for exhaustive enumeration, `false` for the spectral lower bound.
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpansionMode {
    /// Exhaustive over vertex subsets; limited to 24 vertices.
    Exact,
    /// Cheeger lower bound `lambda_2 / 2` of the graph Laplacian.
    Spectral,
    /// Exact when small enough, spectral otherwise.
    Auto,
}

pub const EXACT_EXPANSION_LIMIT: usize = 24;

pub fn expansion_constant(g: &SimplicialComplex, mode: ExpansionMode) -> Result<Expansion> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(Error::Structure("expansion needs at least two vertices".into()));
    }
    if g.components() != 1 {
        return Err(Error::Structure("graph is disconnected".into()));
    }
    let exact = match mode {
        ExpansionMode::Exact if n > EXACT_EXPANSION_LIMIT => {
            return Err(param(format!("exact expansion limited to {EXACT_EXPANSION_LIMIT} vertices")))
        }
        ExpansionMode::Exact => true,
        ExpansionMode::Spectral => false,
        ExpansionMode::Auto => n <= EXACT_EXPANSION_LIMIT,
    };
    let value = if exact { exact_expansion(g) } else { spectral_bound(g) };
    Ok(Expansion { value, exact })
}

fn exact_expansion(g: &SimplicialComplex) -> f64 {
    let n = g.vertex_count();
    let adj: Vec<u32> = g
        .adjacency()
        .iter()
        .map(|l| l.iter().fold(0u32, |m, &w| m | 1 << w))
        .collect();
    let deg: Vec<i64> = adj.iter().map(|m| m.count_ones() as i64).collect();
    let (mut set, mut size, mut cut) = (0u32, 0usize, 0i64);
    let (mut best_cut, mut best_size) = (i64::MAX, 1usize);
    for i in 1u64..(1u64 << n) {
        let v = i.trailing_zeros() as usize;
        if set >> v & 1 == 0 {
            cut += deg[v] - 2 * (adj[v] & set).count_ones() as i64;
            set |= 1 << v;
            size += 1;
        } else {
            set &= !(1 << v);
            size -= 1;
            cut -= deg[v] - 2 * (adj[v] & set).count_ones() as i64;
        }
        if size >= 1 && 2 * size <= n && (cut as i128) * (best_size as i128) < (best_cut as i128) * (size as i128) {
            best_cut = cut;
            best_size = size;
        }
    }
    best_cut as f64 / best_size as f64
}

fn spectral_bound(g: &SimplicialComplex) -> f64 {
    let n = g.vertex_count();
    let mut l = nalgebra::DMatrix::<f64>::zeros(n, n);
    for e in g.edges() {
        let (a, b) = (e[0], e[1]);
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
        l[(a, b)] -= 1.0;
        l[(b, a)] -= 1.0;
    }
    let mut ev: Vec<f64> = l.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    (ev[1] / 2.0).max(0.0)
}

/// Mod-2 Betti numbers `b_0, ..., b_dim` of a simplicial complex.
pub fn betti_gf2(c: &SimplicialComplex) -> Vec<usize> {
    if c.vertex_count() == 0 {
        return vec![0];
    }
    gf2::betti(&c.counts(), &|d, i| c.boundary(d, i))
}

/// Mod-2 Betti numbers of a cubical complex.
pub fn betti_gf2_cubical(c: &CubicalComplex) -> Vec<usize> {
    gf2::betti(&c.counts(), &|d, i| c.boundary(d, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn grid_counts_small_cases() {
        let g = grid_skeleton(1, 2, 2).unwrap();
        assert_eq!(g.counts(), vec![9, 12]);
        let g = grid_skeleton(0, 3, 1).unwrap();
        assert_eq!(g.counts(), vec![8]);
    }

    #[test]
    fn grid_rejects_k_above_d() {
        assert!(matches!(grid_skeleton(3, 2, 4), Err(Error::Parameter(_))));
    }

    #[test]
    fn simplex_skeleton_counts() {
        assert_eq!(simplex_skeleton(1, 3).unwrap().count(1), 3);
        assert_eq!(simplex_skeleton(1, 4).unwrap().count(1), 6);
        assert_eq!(simplex_skeleton(2, 5).unwrap().count(2), 10);
        assert_eq!(simplex_skeleton(2, 6).unwrap().count(2), 20);
        assert!(simplex_skeleton(2, 2).is_err());
    }

    #[test]
    fn kuhn_triangulation_counts() {
        let g = grid_skeleton(2, 2, 1).unwrap();
        let (t, r) = triangulate_cubical(&g).unwrap();
        assert_eq!(t.counts(), vec![4, 5, 2]);
        assert_eq!(r.parent_of(CellId::new(1, t.id_of(&[0, 3]).unwrap().index)), CellId::new(2, 0));
        let g = grid_skeleton(3, 3, 1).unwrap();
        let (t, _) = triangulate_cubical(&g).unwrap();
        assert_eq!(t.count(3), 6);
    }

    #[test]
    fn expansion_of_small_graphs() {
        let c4 = cycle_graph(4).unwrap();
        let ex = expansion_constant(&c4, ExpansionMode::Exact).unwrap();
        let sp = expansion_constant(&c4, ExpansionMode::Spectral).unwrap();
        assert!((ex.value - 1.0).abs() < 1e-12);
        assert!((sp.value - 1.0).abs() < 1e-9);
        let k4 = simplex_skeleton(1, 4).unwrap();
        assert!((expansion_constant(&k4, ExpansionMode::Exact).unwrap().value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_graph_is_a_structure_error() {
        let g = SimplicialComplex::from_simplices(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(matches!(expansion_constant(&g, ExpansionMode::Auto), Err(Error::Structure(_))));
    }

    #[test]
    fn bipartite_graph_shape() {
        let g = random_bipartite_graph(10, 6, 3).unwrap();
        assert_eq!(g.vertex_count(), 20);
        for e in g.edges() {
            assert!(e[0] < 10 && e[1] >= 10);
        }
        let adj = g.adjacency();
        assert!(adj.iter().all(|l| !l.is_empty() && l.len() <= 6));
        assert_eq!(g, random_bipartite_graph(10, 6, 3).unwrap());
    }

    #[test]
    fn betti_examples() {
        assert_eq!(betti_gf2(&cycle_graph(5).unwrap()), vec![1, 1]);
        let (x, _) = triangulate_cubical(&grid_skeleton(1, 2, 2).unwrap()).unwrap();
        assert_eq!(betti_gf2(&x), vec![1, 4]);
        let two = SimplicialComplex::from_simplices(
            6,
            vec![vec![0, 1], vec![1, 2], vec![0, 2], vec![3, 4], vec![4, 5], vec![3, 5]],
        )
        .unwrap();
        assert_eq!(betti_gf2(&two), vec![2, 2]);
        assert_eq!(betti_gf2_cubical(&grid_skeleton(1, 2, 2).unwrap()), vec![1, 4]);
    }

    #[test]
    fn closure_is_checked_on_explicit_faces() {
        let bad = SimplicialComplex::from_faces_by_dim(3, vec![vec![vec![0], vec![1], vec![2]], vec![vec![0, 1]], vec![vec![0, 1, 2]]]);
        assert!(matches!(bad, Err(Error::Data(_))));
    }

    proptest! {
        #[test]
        fn grid_face_counts_match_formula(k in 0usize..3, d in 1usize..4, s in 1usize..5) {
            prop_assume!(k <= d);
            let g = grid_skeleton(k, d, s).unwrap();
            for j in 0..=k {
                let expect = binom(d, j) * s.pow(j as u32) * (s + 1).pow((d - j) as u32);
                prop_assert_eq!(g.count(j), expect);
            }
        }

        #[test]
        fn euler_characteristic_matches_betti(n in 3usize..9, k in 1usize..3) {
            prop_assume!(k + 1 <= n);
            let c = simplex_skeleton(k, n).unwrap();
            let b = betti_gf2(&c);
            let chi_faces: i64 = c.counts().iter().enumerate().map(|(d, &m)| if d % 2 == 0 { m as i64 } else { -(m as i64) }).sum();
            let chi_betti: i64 = b.iter().enumerate().map(|(d, &m)| if d % 2 == 0 { m as i64 } else { -(m as i64) }).sum();
            prop_assert_eq!(chi_faces, chi_betti);
            prop_assert_eq!(b[0], 1);
            // only the top degree of a full skeleton carries homology
            for j in 1..k { prop_assert_eq!(b[j], 0); }
        }

        #[test]
        fn kuhn_gives_factorial_simplices(d in 1usize..4, s in 1usize..3) {
            let g = grid_skeleton(d, d, s).unwrap();
            let (t, r) = triangulate_cubical(&g).unwrap();
            let fact: usize = (1..=d).product();
            prop_assert_eq!(t.count(d), g.count(d) * fact);
            prop_assert_eq!(betti_gf2(&t), betti_gf2_cubical(&g));
            for list in r.children() { for ch in list { prop_assert!(!ch.is_empty()); } }
        }

        #[test]
        fn spectral_bound_below_exact(n in 3usize..7, d in 2usize..4, seed in 0u64..50) {
            let g = random_bipartite_graph(n, d, seed).unwrap();
            prop_assume!(g.components() == 1);
            let ex = expansion_constant(&g, ExpansionMode::Exact).unwrap().value;
            let sp = expansion_constant(&g, ExpansionMode::Spectral).unwrap().value;
            prop_assert!(sp <= ex + 1e-9);
            prop_assert!(ex > 0.0);
        }
    }
}
