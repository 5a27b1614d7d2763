//! Spatial indexes for point sets in 𝔹ⁿ under the Bergman metric.
//!
//! Two structures back the lattice construction and its audits:
//!
//! * [`ShellGrid`] — an insertable multi-shell hash grid used by the greedy
//!   construction (conflict queries at a fixed radius);
//! * [`BallKdTree`] — a static kd-tree over the real coordinates with tight
//!   bounding boxes and subtree counts, used for covering/nearest audits and
//!   for counting lattice points inside large Bergman balls.
//!
//! The Bergman predicate d(x,a) < r is equivalent to
//! |1−⟨x,a⟩|² < cosh²(r)·(1−|x|²)·(1−|a|²), which interval arithmetic
//! bounds cheaply over axis-aligned boxes of a-values.

use crate::geometry::{bergman_distance, BallPoint, BergmanBall, MAX_DIM};
use num_complex::Complex64;
use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

/// Multiply-shift hasher for small integer keys; the default SipHash is
/// needlessly slow for grid lookups.
#[derive(Default)]
pub struct MixHasher(u64);

impl Hasher for MixHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x100000001b3);
        }
    }
    fn write_u64(&mut self, v: u64) {
        let mut x = self.0 ^ v;
        x = (x ^ (x >> 33)).wrapping_mul(0xff51afd7ed558ccd);
        x = (x ^ (x >> 33)).wrapping_mul(0xc4ceb9fe1a85ec53);
        self.0 = x ^ (x >> 33);
    }
}

type FastMap<K, V> = HashMap<K, V, BuildHasherDefault<MixHasher>>;

fn real_coords(p: &BallPoint, out: &mut [f64; 2 * MAX_DIM]) -> usize {
    let n = p.dim();
    for (j, c) in p.coords().iter().enumerate() {
        out[2 * j] = c.re;
        out[2 * j + 1] = c.im;
    }
    2 * n
}

/// Conservative test of d(x, a) < r for all a in the box `[lo, hi]`:
/// returns (certainly_all_inside, certainly_all_outside).
fn box_classify(
    x: &BallPoint,
    cosh2r: f64,
    lo: &[f64],
    hi: &[f64],
) -> (bool, bool) {
    let n = x.dim();
    let one_minus_x = 1.0 - x.norm_sq();
    // Interval for u = Re(1−⟨x,a⟩) and w = −Im(⟨x,a⟩); both linear in a.
    let (mut u_lo, mut u_hi) = (1.0f64, 1.0f64);
    let (mut w_lo, mut w_hi) = (0.0f64, 0.0f64);
    let (mut q_lo, mut q_hi) = (0.0f64, 0.0f64); // |a|² interval
    let sq = |v_lo: f64, v_hi: f64| -> (f64, f64) {
        if v_lo >= 0.0 {
            (v_lo * v_lo, v_hi * v_hi)
        } else if v_hi <= 0.0 {
            (v_hi * v_hi, v_lo * v_lo)
        } else {
            (0.0, (v_lo * v_lo).max(v_hi * v_hi))
        }
    };
    for j in 0..n {
        let xr = x.coords()[j].re;
        let xi = x.coords()[j].im;
        let (ar_lo, ar_hi) = (lo[2 * j], hi[2 * j]);
        let (ai_lo, ai_hi) = (lo[2 * j + 1], hi[2 * j + 1]);
        // ⟨x,a⟩ = Σ x_j ā_j: Re += xr·ar + xi·ai, Im += xi·ar − xr·ai.
        let add = |acc_lo: &mut f64, acc_hi: &mut f64, c: f64, v_lo: f64, v_hi: f64| {
            if c >= 0.0 {
                *acc_lo += c * v_lo;
                *acc_hi += c * v_hi;
            } else {
                *acc_lo += c * v_hi;
                *acc_hi += c * v_lo;
            }
        };
        // u = 1 − Re⟨x,a⟩
        add(&mut u_lo, &mut u_hi, -xr, ar_lo, ar_hi);
        add(&mut u_lo, &mut u_hi, -xi, ai_lo, ai_hi);
        // w = −Im⟨x,a⟩
        add(&mut w_lo, &mut w_hi, -xi, ar_lo, ar_hi);
        add(&mut w_lo, &mut w_hi, xr, ai_lo, ai_hi);
        let (a2_lo, a2_hi) = sq(ar_lo, ar_hi);
        let (b2_lo, b2_hi) = sq(ai_lo, ai_hi);
        q_lo += a2_lo + b2_lo;
        q_hi += a2_hi + b2_hi;
    }
    let (u2_lo, u2_hi) = sq(u_lo, u_hi);
    let (w2_lo, w2_hi) = sq(w_lo, w_hi);
    // inside ⟺ G(a) = cosh²r·(1−|x|²)(1−|a|²) − |1−⟨x,a⟩|² > 0
    let g_hi = cosh2r * one_minus_x * (1.0 - q_lo) - (u2_lo + w2_lo);
    let g_lo = cosh2r * one_minus_x * (1.0 - q_hi) - (u2_hi + w2_hi);
    (g_lo > 0.0, g_hi <= 0.0)
}

#[inline]
fn point_inside(x: &BallPoint, cosh2r: f64, a: &BallPoint) -> bool {
    let d = (Complex64::new(1.0, 0.0) - crate::geometry::inner(x, a)).norm_sqr();
    cosh2r * (1.0 - x.norm_sq()) * (1.0 - a.norm_sq()) > d
}

// ---------------------------------------------------------------------------
// ShellGrid
// ---------------------------------------------------------------------------

/// Insertable conflict index: answers "is any stored point within Bergman
/// distance ≤ r of z" for one fixed r, by hashing points into per-shell
/// Euclidean grids whose cell size tracks the local ball size.
pub struct ShellGrid {
    r: f64,
    cosh2r: f64,
    /// Bergman radial thickness of a shell.
    shell_h: f64,
    /// Cell sizes per shell (computed lazily as shells appear).
    cells: Vec<ShellCells>,
    points: Vec<BallPoint>,
    next: Vec<u32>,
}

struct ShellCells {
    size: f64,
    heads: FastMap<u64, u32>,
}

impl ShellGrid {
    pub fn new(r: f64) -> Self {
        let shell_h = (r * 0.5).max(1e-3);
        Self {
            r,
            cosh2r: r.cosh() * r.cosh(),
            shell_h,
            cells: Vec::new(),
            points: Vec::new(),
            next: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[BallPoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<BallPoint> {
        self.points
    }

    fn shell_of(&self, p: &BallPoint) -> usize {
        (p.norm().min(1.0 - 1e-15).atanh() / self.shell_h) as usize
    }

    /// Euclidean search radius valid for any query point in shell `s` at
    /// query radius `r`: the bound from the ellipsoid description of
    /// D(z, r), evaluated at the densest (inner) edge of the shell and grown
    /// by the worst shell-to-shell scale factor.
    fn cell_size_for(&self, s: usize) -> f64 {
        let rho_b = s as f64 * self.shell_h; // inner edge, Bergman radial
        let z = rho_b.tanh();
        let t = self.r.tanh();
        let zz = z * z;
        let rho = (1.0 - zz) / (1.0 - t * t * zz);
        (t * rho.sqrt() + z * t * t * rho) * (self.r * 0.5).exp()
    }

    fn ensure_shell(&mut self, s: usize) {
        while self.cells.len() <= s {
            let idx = self.cells.len();
            let size = self.cell_size_for(idx);
            self.cells.push(ShellCells { size, heads: FastMap::default() });
        }
    }

    fn cell_key(size: f64, coords: &[f64], dims: usize) -> u64 {
        let mut key = 0xcbf29ce484222325u64;
        for &c in &coords[..dims] {
            let i = (c / size).floor() as i64 as u64;
            key = (key ^ i).wrapping_mul(0x100000001b3);
            key = key.rotate_left(13);
        }
        key
    }

    /// True iff some stored point lies within Bergman distance < `self.r`
    /// of `z` (strictly, via the algebraic predicate).
    pub fn has_conflict(&self, z: &BallPoint) -> bool {
        let mut xc = [0.0f64; 2 * MAX_DIM];
        let dims = real_coords(z, &mut xc);
        if self.cells.is_empty() {
            return false;
        }
        let s = self.shell_of(z);
        let lo_shell = s.saturating_sub(2);
        let hi_shell = (s + 2).min(self.cells.len() - 1);
        let query_r = BergmanBall { center: *z, radius: self.r }.euclid_radius_bound();
        for sh in lo_shell..=hi_shell {
            let cells = &self.cells[sh];
            if cells.heads.is_empty() {
                continue;
            }
            let reach = (query_r / cells.size).ceil().max(1.0) as i64;
            let mut base = [0i64; 2 * MAX_DIM];
            for (j, v) in xc[..dims].iter().enumerate() {
                base[j] = (v / cells.size).floor() as i64;
            }
            if self.scan_cells(dims, cells, &base, reach, z) {
                return true;
            }
        }
        false
    }

    fn scan_cells(
        &self,
        dims: usize,
        cells: &ShellCells,
        base: &[i64; 2 * MAX_DIM],
        reach: i64,
        z: &BallPoint,
    ) -> bool {
        // Iterate the (2·reach+1)^dims neighborhood in mixed-radix order.
        let width = 2 * reach + 1;
        let total = (width as u64).pow(dims as u32);
        for lin in 0..total {
            let mut rem = lin;
            let mut key = 0xcbf29ce484222325u64;
            for d in 0..dims {
                let off = (rem % width as u64) as i64 - reach;
                rem /= width as u64;
                let i = (base[d] + off) as u64;
                key = (key ^ i).wrapping_mul(0x100000001b3);
                key = key.rotate_left(13);
            }
            let mut cur = cells.heads.get(&key).copied();
            while let Some(i) = cur {
                if i == u32::MAX {
                    break;
                }
                let p = &self.points[i as usize];
                if point_inside(z, self.cosh2r, p) {
                    return true;
                }
                cur = Some(self.next[i as usize]);
            }
        }
        false
    }

    pub fn insert(&mut self, p: BallPoint) -> u32 {
        let s = self.shell_of(&p);
        self.ensure_shell(s);
        let mut xc = [0.0f64; 2 * MAX_DIM];
        let dims = real_coords(&p, &mut xc);
        let idx = self.points.len() as u32;
        self.points.push(p);
        self.next.push(u32::MAX);
        let cells = &mut self.cells[s];
        let key = Self::cell_key(cells.size, &xc, dims);
        let slot = cells.heads.entry(key).or_insert(u32::MAX);
        self.next[idx as usize] = *slot;
        *slot = idx;
        idx
    }
}

// ---------------------------------------------------------------------------
// BallKdTree
// ---------------------------------------------------------------------------

/// Static kd-tree over ball points with tight per-node bounding boxes and
/// subtree counts. Supports Bergman-ball counting (with interval pruning)
/// and nearest-point queries.
pub struct BallKdTree {
    n: usize,
    nodes: Vec<Node>,
    points: Vec<BallPoint>,
    /// permutation: leaf ranges index into this
    order: Vec<u32>,
}

struct Node {
    lo: [f64; 2 * MAX_DIM],
    hi: [f64; 2 * MAX_DIM],
    start: u32,
    len: u32,
    /// right child index; u32::MAX marks a leaf (the left child is the
    /// node right after this one)
    right: u32,
}

const LEAF: usize = 24;

impl BallKdTree {
    pub fn build(points: &[BallPoint]) -> Self {
        assert!(!points.is_empty());
        let n = points[0].dim();
        let dims = 2 * n;
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut coords = vec![[0.0f64; 2 * MAX_DIM]; points.len()];
        for (i, p) in points.iter().enumerate() {
            real_coords(p, &mut coords[i]);
        }
        let mut nodes = Vec::with_capacity(2 * points.len() / LEAF + 2);
        Self::build_rec(&coords, dims, &mut order, 0, points.len(), &mut nodes);
        Self { n, nodes, points: points.to_vec(), order }
    }

    fn build_rec(
        coords: &[[f64; 2 * MAX_DIM]],
        dims: usize,
        order: &mut Vec<u32>,
        start: usize,
        len: usize,
        nodes: &mut Vec<Node>,
    ) -> u32 {
        let me = nodes.len() as u32;
        let mut lo = [f64::INFINITY; 2 * MAX_DIM];
        let mut hi = [f64::NEG_INFINITY; 2 * MAX_DIM];
        for &i in &order[start..start + len] {
            for d in 0..dims {
                let v = coords[i as usize][d];
                lo[d] = lo[d].min(v);
                hi[d] = hi[d].max(v);
            }
        }
        for d in dims..2 * MAX_DIM {
            lo[d] = 0.0;
            hi[d] = 0.0;
        }
        nodes.push(Node { lo, hi, start: start as u32, len: len as u32, right: u32::MAX });
        if len <= LEAF {
            return me;
        }
        // split at the median of the widest dimension
        let mut best_d = 0;
        let mut best_w = -1.0;
        for d in 0..dims {
            let w = hi[d] - lo[d];
            if w > best_w {
                best_w = w;
                best_d = d;
            }
        }
        let mid = len / 2;
        order[start..start + len].select_nth_unstable_by(mid, |&a, &b| {
            coords[a as usize][best_d].total_cmp(&coords[b as usize][best_d])
        });
        let _left = Self::build_rec(coords, dims, order, start, mid, nodes);
        let right = Self::build_rec(coords, dims, order, start + mid, len - mid, nodes);
        nodes[me as usize].right = right;
        me
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of stored points inside the Bergman ball D(x, r). Exact.
    pub fn count_in_ball(&self, x: &BallPoint, r: f64) -> usize {
        let cosh2r = r.cosh() * r.cosh();
        let mut stack = vec![0u32];
        let mut count = 0usize;
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            let (all_in, all_out) = box_classify(x, cosh2r, &node.lo, &node.hi);
            if all_out {
                continue;
            }
            if all_in {
                count += node.len as usize;
                continue;
            }
            if node.right == u32::MAX {
                for &i in &self.order[node.start as usize..(node.start + node.len) as usize] {
                    if point_inside(x, cosh2r, &self.points[i as usize]) {
                        count += 1;
                    }
                }
            } else {
                stack.push(ni + 1);
                stack.push(node.right);
            }
        }
        count
    }

    /// Upper bound on [`Self::count_in_ball`], stopping the descent at
    /// subtrees of ≤ `cutoff` points (undecided boxes count fully). Used to
    /// order probes before exact counting.
    pub fn count_upper_bound(&self, x: &BallPoint, r: f64, cutoff: u32) -> usize {
        let cosh2r = r.cosh() * r.cosh();
        let mut stack = vec![0u32];
        let mut count = 0usize;
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            let (all_in, all_out) = box_classify(x, cosh2r, &node.lo, &node.hi);
            if all_out {
                continue;
            }
            if all_in || node.len <= cutoff || node.right == u32::MAX {
                count += node.len as usize;
                continue;
            }
            stack.push(ni + 1);
            stack.push(node.right);
        }
        count
    }

    /// True iff some stored point lies within Bergman distance < r of x.
    pub fn any_within(&self, x: &BallPoint, r: f64) -> bool {
        let cosh2r = r.cosh() * r.cosh();
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            let (all_in, all_out) = box_classify(x, cosh2r, &node.lo, &node.hi);
            if all_out {
                continue;
            }
            if all_in && node.len > 0 {
                return true;
            }
            if node.right == u32::MAX {
                for &i in &self.order[node.start as usize..(node.start + node.len) as usize] {
                    if point_inside(x, cosh2r, &self.points[i as usize]) {
                        return true;
                    }
                }
            } else {
                stack.push(ni + 1);
                stack.push(node.right);
            }
        }
        false
    }

    /// Smallest Bergman distance from x to a stored point other than
    /// `exclude` (pass `usize::MAX` to include all), found by doubling the
    /// query radius and then taking the explicit minimum over candidates.
    pub fn nearest_distance(&self, x: &BallPoint, exclude: usize) -> f64 {
        let mut r = 0.05f64;
        loop {
            let ids = self.collect_in_ball(x, r);
            let best = ids
                .iter()
                .filter(|&&i| i as usize != exclude)
                .map(|&i| bergman_distance(x, &self.points[i as usize]))
                .fold(f64::INFINITY, f64::min);
            if best.is_finite() {
                // verify no closer point hides just outside the scanned ball
                let check = self.collect_in_ball(x, best.min(r) * 1.001);
                let b2 = check
                    .iter()
                    .filter(|&&i| i as usize != exclude)
                    .map(|&i| bergman_distance(x, &self.points[i as usize]))
                    .fold(f64::INFINITY, f64::min);
                return b2.min(best);
            }
            r *= 2.0;
            if r > 60.0 {
                return f64::INFINITY;
            }
        }
    }

    /// Smallest Bergman distance to a stored point other than `exclude`,
    /// scanning inside `hint` first and falling back to the unbounded search
    /// when that ball is empty.
    pub fn nearest_within_radius(&self, x: &BallPoint, exclude: usize, hint: f64) -> f64 {
        let ids = self.collect_in_ball(x, hint);
        let best = ids
            .iter()
            .filter(|&&i| i as usize != exclude)
            .map(|&i| bergman_distance(x, &self.points[i as usize]))
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            best
        } else {
            self.nearest_distance(x, exclude)
        }
    }

    fn collect_in_ball(&self, x: &BallPoint, r: f64) -> Vec<u32> {
        let cosh2r = r.cosh() * r.cosh();
        let mut stack = vec![0u32];
        let mut out = Vec::new();
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            let (all_in, all_out) = box_classify(x, cosh2r, &node.lo, &node.hi);
            if all_out {
                continue;
            }
            if all_in || node.right == u32::MAX {
                for &i in &self.order[node.start as usize..(node.start + node.len) as usize] {
                    if all_in || point_inside(x, cosh2r, &self.points[i as usize]) {
                        out.push(i);
                    }
                }
            } else {
                stack.push(ni + 1);
                stack.push(node.right);
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}
