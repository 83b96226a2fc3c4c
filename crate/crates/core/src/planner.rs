//! Shortest collision-free paths on a voxel lattice.
//!
//! The lattice spacing is half the translation step. Search runs with
//! 26-connectivity and Euclidean edge costs; the resulting polyline is then
//! shortened by line-of-sight smoothing. [`DistanceField`] runs the same graph
//! backwards from a goal so cost-to-go can be queried from arbitrary points,
//! which is what the oracle policy and the scenario generator need.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::geom::Vec3;
use crate::world::{CityWorld, MotionConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum PlanError {
    /// Start or goal is not a free position.
    Blocked,
    /// The goal cannot be reached inside the world bounds.
    NoPath,
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::Blocked => f.write_str("start or goal is inside an obstacle or out of bounds"),
            PlanError::NoPath => f.write_str("goal is unreachable within the world bounds"),
        }
    }
}

impl core::error::Error for PlanError {}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub points: Vec<Vec3>,
    pub length: f64,
}

impl Path {
    fn from_points(points: Vec<Vec3>) -> Self {
        let length = polyline_length(&points);
        Self { points, length }
    }
}

pub fn polyline_length(points: &[Vec3]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    priority: f64,
    node: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on priority, ties broken by node id for determinism
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const UNSET: u32 = u32::MAX;

/// Lattice of candidate waypoints with precomputed occupancy.
#[derive(Debug, Clone)]
pub struct NavGrid {
    world: CityWorld,
    safety_radius: f64,
    origin: Vec3,
    spacing: f64,
    dims: [usize; 3],
    free: Vec<bool>,
    /// Nodes close enough to an obstacle that edges from them need a full
    /// segment test.
    near: Vec<bool>,
    offsets: Vec<([i64; 3], f64)>,
}

impl NavGrid {
    pub fn new(world: &CityWorld, cfg: &MotionConfig) -> Self {
        let spacing = cfg.translation_step / 2.0;
        let bounds = world.bounds();
        let size = bounds.size();
        let dims = [
            libm::floor(size.x / spacing) as usize + 1,
            libm::floor(size.y / spacing) as usize + 1,
            libm::floor(size.z / spacing) as usize + 1,
        ];
        let n = dims[0] * dims[1] * dims[2];
        let mut grid = Self {
            world: world.clone(),
            safety_radius: cfg.safety_radius,
            origin: bounds.min,
            spacing,
            dims,
            free: vec![false; n],
            near: vec![false; n],
            offsets: Vec::with_capacity(26),
        };
        let margin = cfg.safety_radius + spacing * 1.75;
        let halos: Vec<_> = world.buildings().iter().map(|b| b.aabb().inflate(margin)).collect();
        for idx in 0..n {
            let p = grid.point(idx);
            grid.free[idx] = grid.world.is_free(p, cfg.safety_radius);
            grid.near[idx] = halos.iter().any(|h| h.contains(p));
        }
        for dk in -1i64..=1 {
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if (di, dj, dk) != (0, 0, 0) {
                        let len = libm::sqrt((di * di + dj * dj + dk * dk) as f64) * spacing;
                        grid.offsets.push(([di, dj, dk], len));
                    }
                }
            }
        }
        grid
    }

    pub fn world(&self) -> &CityWorld {
        &self.world
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node_count(&self) -> usize {
        self.free.len()
    }

    fn coords(&self, idx: usize) -> [i64; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [(idx % nx) as i64, ((idx / nx) % ny) as i64, (idx / (nx * ny)) as i64]
    }

    fn index(&self, c: [i64; 3]) -> Option<usize> {
        if (0..3).all(|a| c[a] >= 0 && (c[a] as usize) < self.dims[a]) {
            Some((c[2] as usize * self.dims[1] + c[1] as usize) * self.dims[0] + c[0] as usize)
        } else {
            None
        }
    }

    pub fn point(&self, idx: usize) -> Vec3 {
        let c = self.coords(idx);
        self.origin + Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64) * self.spacing
    }

    fn segment_free(&self, a: Vec3, b: Vec3) -> bool {
        self.world.segment_free(a, b, self.safety_radius)
    }

    fn edge_free(&self, a: usize, b: usize) -> bool {
        if !self.free[a] || !self.free[b] {
            return false;
        }
        if !self.near[a] && !self.near[b] {
            return true;
        }
        self.segment_free(self.point(a), self.point(b))
    }

    /// Free lattice nodes within two cells of `p` that `p` can fly to directly.
    fn links(&self, p: Vec3) -> Vec<(usize, f64)> {
        let rel = (p - self.origin) / self.spacing;
        let base = [
            libm::floor(rel.x) as i64,
            libm::floor(rel.y) as i64,
            libm::floor(rel.z) as i64,
        ];
        let mut out = Vec::new();
        for dk in -1..=2 {
            for dj in -1..=2 {
                for di in -1..=2 {
                    if let Some(idx) = self.index([base[0] + di, base[1] + dj, base[2] + dk]) {
                        if self.free[idx] {
                            let q = self.point(idx);
                            if self.segment_free(p, q) {
                                out.push((idx, p.distance(q)));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn neighbors(&self, idx: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let c = self.coords(idx);
        self.offsets.iter().filter_map(move |(o, len)| {
            let nb = self.index([c[0] + o[0], c[1] + o[1], c[2] + o[2]])?;
            self.edge_free(idx, nb).then_some((nb, *len))
        })
    }

    /// Drops intermediate vertices where a straight segment is collision free.
    /// Exact dynamic program over subsequences of `points`.
    pub fn smooth(&self, points: &[Vec3]) -> Vec<Vec3> {
        let n = points.len();
        if n <= 2 {
            return points.to_vec();
        }
        let mut best = vec![f64::INFINITY; n];
        let mut prev = vec![0usize; n];
        best[0] = 0.0;
        for j in 1..n {
            for i in 0..j {
                if !best[i].is_finite() {
                    continue;
                }
                let c = best[i] + points[i].distance(points[j]);
                if c < best[j] - 1e-12 && (i + 1 == j || self.segment_free(points[i], points[j])) {
                    best[j] = c;
                    prev[j] = i;
                }
            }
        }
        let mut out = vec![points[n - 1]];
        let mut j = n - 1;
        while j != 0 {
            j = prev[j];
            out.push(points[j]);
        }
        out.reverse();
        out
    }

    /// A* from `start` to `goal` followed by smoothing.
    pub fn shortest_path(&self, start: Vec3, goal: Vec3) -> Result<Path, PlanError> {
        let world = &self.world;
        if !world.is_free(start, self.safety_radius) || !world.is_free(goal, self.safety_radius) {
            return Err(PlanError::NoPath);
        }
        if self.segment_free(start, goal) {
            return Ok(Path::from_points(vec![start, goal]));
        }
        let goal_links: BTreeMap<usize, f64> = self.links(goal).into_iter().collect();
        if goal_links.is_empty() {
            return Err(PlanError::NoPath);
        }
        let n = self.node_count();
        let goal_id = n as u32;
        let mut g = vec![f64::INFINITY; n + 1];
        let mut parent = vec![UNSET; n + 1];
        let mut closed = vec![false; n + 1];
        let mut open = BinaryHeap::new();
        let h = |p: Vec3| p.distance(goal);
        for (idx, cost) in self.links(start) {
            if cost < g[idx] {
                g[idx] = cost;
                open.push(Entry {
                    priority: cost + h(self.point(idx)),
                    node: idx as u32,
                });
            }
        }
        while let Some(Entry { node, .. }) = open.pop() {
            let u = node as usize;
            if closed[u] {
                continue;
            }
            closed[u] = true;
            if node == goal_id {
                break;
            }
            if let Some(link) = goal_links.get(&u) {
                let c = g[u] + link;
                if c < g[n] {
                    g[n] = c;
                    parent[n] = node;
                    open.push(Entry { priority: c, node: goal_id });
                }
            }
            for (v, len) in self.neighbors(u) {
                let c = g[u] + len;
                if c < g[v] && !closed[v] {
                    g[v] = c;
                    parent[v] = node;
                    open.push(Entry {
                        priority: c + h(self.point(v)),
                        node: v as u32,
                    });
                }
            }
        }
        if !g[n].is_finite() {
            return Err(PlanError::NoPath);
        }
        let mut raw = vec![goal];
        let mut cur = parent[n];
        while cur != UNSET {
            raw.push(self.point(cur as usize));
            cur = parent[cur as usize];
        }
        raw.push(start);
        raw.reverse();
        Ok(Path::from_points(self.smooth(&raw)))
    }
}

/// Shortest collision-free polyline from `start` to `goal`.
pub fn shortest_path(
    world: &CityWorld,
    start: Vec3,
    goal: Vec3,
    cfg: &MotionConfig,
) -> Result<Path, PlanError> {
    NavGrid::new(world, cfg).shortest_path(start, goal)
}

/// Cost-to-go towards one goal, computed once by Dijkstra over the lattice.
#[derive(Debug, Clone)]
pub struct DistanceField {
    grid: NavGrid,
    goal: Vec3,
    dist: Vec<f64>,
    /// Next node towards the goal; `UNSET` means the goal itself.
    next: Vec<u32>,
}

impl DistanceField {
    pub fn new(world: &CityWorld, goal: Vec3, cfg: &MotionConfig) -> Result<Self, PlanError> {
        let grid = NavGrid::new(world, cfg);
        if !world.is_free(goal, cfg.safety_radius) {
            return Err(PlanError::Blocked);
        }
        let n = grid.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut next = vec![UNSET; n];
        let mut open = BinaryHeap::new();
        for (idx, cost) in grid.links(goal) {
            dist[idx] = cost;
            open.push(Entry {
                priority: cost,
                node: idx as u32,
            });
        }
        if open.is_empty() {
            return Err(PlanError::NoPath);
        }
        let mut done = vec![false; n];
        while let Some(Entry { priority, node }) = open.pop() {
            let u = node as usize;
            if done[u] {
                continue;
            }
            done[u] = true;
            for (v, len) in grid.neighbors(u) {
                let c = priority + len;
                if c < dist[v] {
                    dist[v] = c;
                    next[v] = node;
                    open.push(Entry {
                        priority: c,
                        node: v as u32,
                    });
                }
            }
        }
        Ok(Self {
            grid,
            goal,
            dist,
            next,
        })
    }

    pub fn goal(&self) -> Vec3 {
        self.goal
    }

    pub fn world(&self) -> &CityWorld {
        &self.grid.world
    }

    /// Length of the best route from `p` to the goal that first flies
    /// straight to a nearby lattice node (or directly to the goal).
    /// Infinite when `p` is not free or no route exists.
    pub fn cost_to_go(&self, p: Vec3) -> f64 {
        self.best_link(p).map_or(f64::INFINITY, |(_, c)| c)
    }

    fn best_link(&self, p: Vec3) -> Option<(Option<usize>, f64)> {
        if !self.grid.world.is_free(p, self.grid.safety_radius) {
            return None;
        }
        if self.grid.segment_free(p, self.goal) {
            return Some((None, p.distance(self.goal)));
        }
        self.grid
            .links(p)
            .into_iter()
            .filter(|(idx, _)| self.dist[*idx].is_finite())
            .map(|(idx, c)| (Some(idx), c + self.dist[idx]))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Furthest point along the optimal route that is directly reachable from `p`.
    pub fn lookahead(&self, p: Vec3) -> Option<Vec3> {
        let (first, _) = self.best_link(p)?;
        let Some(mut node) = first else {
            return Some(self.goal);
        };
        let mut target = self.grid.point(node);
        for _ in 0..64 {
            let nx = self.next[node];
            let candidate = if nx == UNSET {
                self.goal
            } else {
                self.grid.point(nx as usize)
            };
            if !self.grid.segment_free(p, candidate) {
                break;
            }
            target = candidate;
            if nx == UNSET {
                break;
            }
            node = nx as usize;
        }
        Some(target)
    }
}
