//! Transition graphs: one vertex per legal transition plus entry (`ti`) and
//! exit (`tf`) sentinels, an edge wherever two transitions form a pair
//! through a shared simple state, and the k-fold sequence graphs derived
//! from it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::id::Id;
use crate::model::Statechart;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("no legal transition sequence of length {0} exists")]
    EmptyGraph(usize),
    #[error("sequence length must be at least 1")]
    InvalidOrder,
    #[error("model must be flat before building its transition graph")]
    NotFlat,
}

/// Vertex of a transition graph. Derived ordering puts `ti` first and `tf`
/// last with sequences in between.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Entry,
    Seq(Vec<Id>),
    Exit,
}

impl Vertex {
    pub fn name(&self) -> String {
        match self {
            Vertex::Entry => "ti".to_owned(),
            Vertex::Exit => "tf".to_owned(),
            Vertex::Seq(ts) => ts.iter().map(Id::as_str).collect::<Vec<_>>().join(","),
        }
    }

    pub fn sequence(&self) -> Option<&[Id]> {
        match self {
            Vertex::Seq(ts) => Some(ts),
            _ => None,
        }
    }

    pub fn is_sentinel(&self) -> bool {
        !matches!(self, Vertex::Seq(_))
    }
}

/// Directed graph over [`Vertex`] values with unit edge costs.
///
/// Vertices are kept sorted; edges are index pairs into that order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransitionGraph {
    vertices: Vec<Vertex>,
    edges: BTreeSet<(usize, usize)>,
    augmented: bool,
    order: usize,
}

impl TransitionGraph {
    fn from_parts(vertices: BTreeSet<Vertex>, edges: &[(Vertex, Vertex)], order: usize) -> Self {
        let vertices: Vec<Vertex> = vertices.into_iter().collect();
        let index: BTreeMap<&Vertex, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let edges = edges.iter().map(|(a, b)| (index[a], index[b])).collect();
        TransitionGraph {
            vertices,
            edges,
            augmented: false,
            order,
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of sequence vertices (sentinels excluded).
    pub fn sequence_count(&self) -> usize {
        self.vertices.iter().filter(|v| !v.is_sentinel()).count()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Vertex, &Vertex)> + '_ {
        self.edges
            .iter()
            .map(|&(a, b)| (&self.vertices[a], &self.vertices[b]))
    }

    pub fn edge_indices(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, from: &Vertex, to: &Vertex) -> bool {
        match (self.index_of(from), self.index_of(to)) {
            (Some(a), Some(b)) => self.edges.contains(&(a, b)),
            _ => false,
        }
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.vertices.binary_search(v).ok()
    }

    pub fn is_augmented(&self) -> bool {
        self.augmented
    }

    /// Length of the transition sequence each non-sentinel vertex denotes.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Out-neighbour lists in vertex order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
        }
        adj
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(_, b)| b == v).count()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.range((v, 0)..(v + 1, 0)).count()
    }

    /// Adds the return edge `tf -> ti`. Idempotent.
    pub fn augment(&self) -> TransitionGraph {
        let mut g = self.clone();
        if let (Some(ti), Some(tf)) = (g.index_of(&Vertex::Entry), g.index_of(&Vertex::Exit)) {
            g.edges.insert((tf, ti));
        }
        g.augmented = true;
        g
    }

    /// Whether every vertex reaches every other vertex.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut radj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            radj[b].push(a);
        }
        reach_all(&adj, 0) && reach_all(&radj, 0)
    }

    /// Vertices connected only to the sentinels (`ti -> v -> tf` and nothing
    /// else). Each denotes a complete sequence that cannot be extended.
    pub fn unexpandable_short_sequences(&self) -> Vec<Vec<Id>> {
        let (Some(ti), Some(tf)) = (self.index_of(&Vertex::Entry), self.index_of(&Vertex::Exit))
        else {
            return Vec::new();
        };
        (0..self.vertices.len())
            .filter(|&v| {
                !self.vertices[v].is_sentinel()
                    && self.edges.contains(&(ti, v))
                    && self.edges.contains(&(v, tf))
                    && self.in_degree(v) == 1
                    && self.out_degree(v) == 1
            })
            .filter_map(|v| self.vertices[v].sequence().map(<[Id]>::to_vec))
            .collect()
    }

    /// Builds the order-`k` sequence graph from an order-1 graph.
    ///
    /// Vertices are the length-`k` walks over transition vertices; `v -> v'`
    /// when the `(k-1)`-suffix of `v` equals the `(k-1)`-prefix of `v'`;
    /// `ti` and `tf` connect wherever the first (last) transition did.
    pub fn k_fold_transform(&self, k: usize) -> Result<TransitionGraph, GraphError> {
        if k == 0 {
            return Err(GraphError::InvalidOrder);
        }
        let mut g = self.without_return_edge();
        while g.order < k {
            g = g.next_level();
        }
        if g.sequence_count() == 0 {
            return Err(GraphError::EmptyGraph(k));
        }
        Ok(g)
    }

    /// All levels `1..=k`, each derived from the previous one. Levels past
    /// the longest sequence are empty rather than an error.
    pub fn levels(&self, k: usize) -> Vec<TransitionGraph> {
        let mut out = Vec::with_capacity(k);
        let mut g = self.without_return_edge();
        for _ in 0..k {
            let next = g.next_level();
            out.push(g);
            g = next;
        }
        out
    }

    fn without_return_edge(&self) -> TransitionGraph {
        let mut g = self.clone();
        if g.augmented {
            if let (Some(ti), Some(tf)) = (g.index_of(&Vertex::Entry), g.index_of(&Vertex::Exit)) {
                g.edges.remove(&(tf, ti));
            }
            g.augmented = false;
        }
        g
    }

    /// One line-graph step: every edge between two sequence vertices becomes
    /// a vertex of the next order.
    fn next_level(&self) -> TransitionGraph {
        let ti = self.index_of(&Vertex::Entry);
        let tf = self.index_of(&Vertex::Exit);
        let mut vertices = BTreeSet::from([Vertex::Entry, Vertex::Exit]);
        // (u, v) pairs between sequence vertices, keyed by index
        let inner: Vec<(usize, usize)> = self
            .edges
            .iter()
            .copied()
            .filter(|&(a, b)| !self.vertices[a].is_sentinel() && !self.vertices[b].is_sentinel())
            .collect();
        let seq_of = |i: usize| self.vertices[i].sequence().expect("sequence vertex");
        let merged = |a: usize, b: usize| -> Vertex {
            let mut seq = seq_of(a).to_vec();
            seq.extend(seq_of(b).last().cloned());
            Vertex::Seq(seq)
        };
        let mut edges = Vec::new();
        let mut by_first: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for &(a, b) in &inner {
            by_first.entry(a).or_default().push((a, b));
        }
        for &(a, b) in &inner {
            let v = merged(a, b);
            vertices.insert(v.clone());
            if ti.is_some_and(|ti| self.edges.contains(&(ti, a))) {
                edges.push((Vertex::Entry, v.clone()));
            }
            if tf.is_some_and(|tf| self.edges.contains(&(b, tf))) {
                edges.push((v.clone(), Vertex::Exit));
            }
            for &(b2, c) in by_first.get(&b).map(Vec::as_slice).unwrap_or(&[]) {
                edges.push((v.clone(), merged(b2, c)));
            }
        }
        TransitionGraph::from_parts(vertices, &edges, self.order + 1)
    }
}

fn reach_all(adj: &[Vec<usize>], start: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Builds the order-1 transition graph of a flat statechart.
pub fn build_transition_graph(sc: &Statechart) -> Result<TransitionGraph, GraphError> {
    if !sc.is_flat() {
        return Err(GraphError::NotFlat);
    }
    let mut vertices = BTreeSet::from([Vertex::Entry, Vertex::Exit]);
    let mut edges = Vec::new();
    let tv = |id: &Id| Vertex::Seq(vec![id.clone()]);

    for t in sc.transitions() {
        vertices.insert(tv(&t.id));
    }
    for s in sc.simple_states() {
        let ins = sc.transitions().filter(|t| t.target == s.id);
        for t in ins {
            for t2 in sc.outgoing(s.id.as_str()) {
                edges.push((tv(&t.id), tv(&t2.id)));
            }
        }
    }
    if let Some(init) = sc.initial_state() {
        for t in sc.outgoing(init.as_str()) {
            edges.push((Vertex::Entry, tv(&t.id)));
        }
    }
    for s in sc.final_states() {
        for t in sc.transitions().filter(|t| t.target == s.id) {
            edges.push((tv(&t.id), Vertex::Exit));
        }
    }
    Ok(TransitionGraph::from_parts(vertices, &edges, 1))
}
