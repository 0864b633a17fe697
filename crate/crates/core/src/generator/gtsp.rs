//! Covering walks over a strongly connected transition graph (the graphical
//! TSP: visit every vertex, revisits allowed, unit edge costs).
//!
//! The walk is found on the metric closure: breadth-first all-pairs shortest
//! paths, then a Hamiltonian tour from `ti` on the closure, expanded back
//! through the stored shortest paths. Tours are exact (Held-Karp) up to
//! [`EXACT_VERTEX_LIMIT`] vertices, nearest neighbour plus 2-opt above.

use std::collections::VecDeque;

use super::GenError;
use crate::par;
use crate::tgraph::{TransitionGraph, Vertex};

/// Largest vertex count solved exactly.
pub const EXACT_VERTEX_LIMIT: usize = 12;

const INF: u32 = u32::MAX / 4;

/// Walk from `ti` to `tf` visiting every vertex at least once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringWalk {
    pub vertices: Vec<Vertex>,
    /// Number of edges traversed.
    pub cost: usize,
}

pub fn solve_gtsp(tg: &TransitionGraph) -> Result<CoveringWalk, GenError> {
    let start = tg
        .index_of(&Vertex::Entry)
        .ok_or(GenError::MissingSentinels)?;
    let exit = tg
        .index_of(&Vertex::Exit)
        .ok_or(GenError::MissingSentinels)?;
    let closure = MetricClosure::new(tg);
    if closure.dist.iter().flatten().any(|&d| d >= INF) {
        return Err(GenError::NotStronglyConnected);
    }
    let n = tg.vertex_count();
    let tour = if n <= EXACT_VERTEX_LIMIT {
        held_karp(&closure.dist, start)
    } else {
        let t = nearest_neighbour(&closure.dist, start);
        two_opt(&closure.dist, t)
    };

    // expand the closed tour, then drop the final return into `ti`
    let mut walk = vec![start];
    for w in tour.windows(2) {
        walk.extend(closure.path(w[0], w[1]).into_iter().skip(1));
    }
    if let Some(&last) = tour.last() {
        walk.extend(closure.path(last, start).into_iter().skip(1));
    }
    if walk.len() > 1 && walk[walk.len() - 2] == exit {
        walk.pop();
    }
    let vertices: Vec<Vertex> = walk.iter().map(|&i| tg.vertices()[i].clone()).collect();
    Ok(CoveringWalk {
        cost: vertices.len().saturating_sub(1),
        vertices,
    })
}

/// All-pairs BFS distances plus predecessor trees for path recovery.
struct MetricClosure {
    dist: Vec<Vec<u32>>,
    pred: Vec<Vec<usize>>,
}

impl MetricClosure {
    fn new(tg: &TransitionGraph) -> Self {
        let adj = tg.adjacency();
        let n = adj.len();
        let rows = par::map_range(n, |s| {
            let mut dist = vec![INF; n];
            let mut pred = vec![usize::MAX; n];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if dist[v] == INF {
                        dist[v] = dist[u] + 1;
                        pred[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            (dist, pred)
        });
        let (dist, pred) = rows.into_iter().unzip();
        MetricClosure { dist, pred }
    }

    fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let mut out = vec![to];
        let mut cur = to;
        while cur != from {
            cur = self.pred[from][cur];
            out.push(cur);
        }
        out.reverse();
        out
    }
}

fn tour_cost(dist: &[Vec<u32>], tour: &[usize]) -> u64 {
    let n = tour.len();
    (0..n)
        .map(|i| u64::from(dist[tour[i]][tour[(i + 1) % n]]))
        .sum()
}

/// Optimal Hamiltonian cycle through `start`. Ties resolve to the smallest
/// predecessor index so the result is reproducible.
fn held_karp(dist: &[Vec<u32>], start: usize) -> Vec<usize> {
    let n = dist.len();
    let others: Vec<usize> = (0..n).filter(|&v| v != start).collect();
    let m = others.len();
    if m == 0 {
        return vec![start];
    }
    let full = 1usize << m;
    // best[mask][j]: cheapest path from start through `mask`, ending at others[j]
    let mut best = vec![vec![INF; m]; full];
    let mut parent = vec![vec![usize::MAX; m]; full];
    for j in 0..m {
        best[1 << j][j] = dist[start][others[j]];
    }
    for size in 2..=m {
        let masks: Vec<usize> = (1..full)
            .filter(|x| x.count_ones() as usize == size)
            .collect();
        let rows = par::map(&masks, |&mask| {
            let mut row = vec![INF; m];
            let mut prow = vec![usize::MAX; m];
            for j in (0..m).filter(|j| mask & (1 << j) != 0) {
                let prev = mask ^ (1 << j);
                for i in (0..m).filter(|i| prev & (1 << i) != 0) {
                    let c = best[prev][i].saturating_add(dist[others[i]][others[j]]);
                    if c < row[j] {
                        row[j] = c;
                        prow[j] = i;
                    }
                }
            }
            (row, prow)
        });
        for (&mask, (row, prow)) in masks.iter().zip(rows) {
            best[mask] = row;
            parent[mask] = prow;
        }
    }
    let last_mask = full - 1;
    let mut end = 0;
    let mut end_cost = u32::MAX;
    for j in 0..m {
        let c = best[last_mask][j].saturating_add(dist[others[j]][start]);
        if c < end_cost {
            end_cost = c;
            end = j;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut mask = last_mask;
    let mut j = end;
    loop {
        order.push(others[j]);
        let p = parent[mask][j];
        mask ^= 1 << j;
        if p == usize::MAX {
            break;
        }
        j = p;
    }
    order.push(start);
    order.reverse();
    order
}

fn nearest_neighbour(dist: &[Vec<u32>], start: usize) -> Vec<usize> {
    let n = dist.len();
    let mut seen = vec![false; n];
    let mut tour = vec![start];
    seen[start] = true;
    let mut cur = start;
    for _ in 1..n {
        let next = (0..n)
            .filter(|&v| !seen[v])
            .min_by_key(|&v| (dist[cur][v], v))
            .expect("unvisited vertex remains");
        seen[next] = true;
        tour.push(next);
        cur = next;
    }
    tour
}

/// Segment-reversal improvement for asymmetric costs. Position 0 (`ti`)
/// stays fixed; each pass applies the single best improving move.
fn two_opt(dist: &[Vec<u32>], mut tour: Vec<usize>) -> Vec<usize> {
    const MAX_PASSES: usize = 200;
    let n = tour.len();
    if n < 4 {
        return tour;
    }
    for _ in 0..MAX_PASSES {
        // prefix sums of forward and backward edge costs along the tour
        let mut fw = vec![0i64; n];
        let mut bw = vec![0i64; n];
        for k in 1..n {
            fw[k] = fw[k - 1] + i64::from(dist[tour[k - 1]][tour[k]]);
            bw[k] = bw[k - 1] + i64::from(dist[tour[k]][tour[k - 1]]);
        }
        let d = |a: usize, b: usize| i64::from(dist[tour[a]][tour[b]]);
        let best_per_i = par::map_range(n - 2, |i0| {
            let i = i0 + 1;
            let mut best = (0i64, 0usize);
            for j in (i + 1)..n {
                let after = (j + 1) % n;
                let old = d(i - 1, i) + (fw[j] - fw[i]) + d(j, after);
                let new = d(i - 1, j) + (bw[j] - bw[i]) + d(i, after);
                if new - old < best.0 {
                    best = (new - old, j);
                }
            }
            (best.0, i, best.1)
        });
        let Some(&(delta, i, j)) = best_per_i
            .iter()
            .filter(|m| m.0 < 0)
            .min_by_key(|m| (m.0, m.1, m.2))
        else {
            break;
        };
        debug_assert!(delta < 0);
        let before = tour_cost(dist, &tour);
        tour[i..=j].reverse();
        debug_assert_eq!(tour_cost(dist, &tour) as i64, before as i64 + delta);
    }
    tour
}
