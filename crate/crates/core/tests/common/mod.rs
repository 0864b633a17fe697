//! Corpus access and brute-force oracles shared by the integration tests.
//! The oracles deliberately avoid the library's own algorithms.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::PathBuf;

use statecover::model::{Input, Statechart, TestSuite};
use statecover::parser::parse_statechart;
use statecover::tgraph::{TransitionGraph, Vertex};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Every valid corpus model as (file name, source text, parsed model).
pub fn corpus() -> Vec<(String, String, Statechart)> {
    let mut names: Vec<String> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".scd"))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let text = read(&n);
            let sc = parse_statechart(&text).unwrap_or_else(|e| panic!("{n}: {e}"));
            (n, text, sc)
        })
        .collect()
}

/// Corpus models after flattening.
pub fn flat_corpus() -> Vec<(String, Statechart)> {
    corpus()
        .into_iter()
        .map(|(n, _, sc)| {
            let flat = sc.flatten().unwrap();
            (n, flat)
        })
        .collect()
}

pub fn atm() -> Statechart {
    parse_statechart(&read("atm.scd")).unwrap()
}

/// Golden ATM listing: id -> (states, transitions).
pub fn atm_golden() -> Vec<(String, Vec<String>, Vec<String>)> {
    read("atm_tc.txt")
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let parts: Vec<&str> = l.split('|').map(str::trim).collect();
            let words = |s: &str| s.split_whitespace().map(str::to_owned).collect::<Vec<_>>();
            (parts[0].to_owned(), words(parts[1]), words(parts[2]))
        })
        .collect()
}

/// Number of legal transition sequences of exactly `len` transitions, by
/// dynamic programming over end states.
pub fn count_walks(sc: &Statechart, len: usize) -> usize {
    if len == 0 {
        return 0;
    }
    let edges: Vec<(String, String)> = sc
        .transitions()
        .map(|t| (t.source.to_string(), t.target.to_string()))
        .collect();
    // ways[s]: walks of the current length ending in s
    let mut ways: BTreeMap<String, usize> = BTreeMap::new();
    for (_, dst) in &edges {
        *ways.entry(dst.clone()).or_default() += 1;
    }
    for _ in 1..len {
        let mut next: BTreeMap<String, usize> = BTreeMap::new();
        for (src, dst) in &edges {
            if let Some(&w) = ways.get(src) {
                *next.entry(dst.clone()).or_default() += w;
            }
        }
        ways = next;
    }
    ways.values().sum()
}

/// Shortest walk from `ti` to `tf` visiting every vertex, by BFS over
/// (vertex, visited set). Returns the number of edges.
pub fn gtsp_oracle(g: &TransitionGraph) -> Option<usize> {
    let n = g.vertex_count();
    assert!(n <= 20, "oracle is exponential in the vertex count");
    let ti = g.index_of(&Vertex::Entry)?;
    let tf = g.index_of(&Vertex::Exit)?;
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in g.edge_indices() {
        adj[a].push(b);
    }
    let full = (1u32 << n) - 1;
    let mut dist: BTreeMap<(usize, u32), usize> = BTreeMap::new();
    let start = (ti, 1u32 << ti);
    dist.insert(start, 0);
    let mut queue = VecDeque::from([start]);
    while let Some((v, mask)) = queue.pop_front() {
        let d = dist[&(v, mask)];
        if v == tf && mask == full {
            return Some(d);
        }
        for &w in &adj[v] {
            let key = (w, mask | (1 << w));
            if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(key) {
                e.insert(d + 1);
                queue.push_back(key);
            }
        }
    }
    None
}

/// Runs `inputs` on a hierarchical model directly: the innermost state
/// handling an event wins, composite targets descend through entry
/// children. Guards must be absent. Returns the visited leaf states, or
/// `None` at the first unhandled event.
pub fn hierarchical_run(sc: &Statechart, events: &[&str]) -> Vec<Option<String>> {
    let descend = |mut s: String| loop {
        match sc.children(&s).find(|c| c.entry) {
            Some(c) => s = c.id.to_string(),
            None => return s,
        }
    };
    let mut cur = descend(sc.initial_state().unwrap().to_string());
    let mut out = Vec::new();
    for e in events {
        let mut scope = Some(cur.clone());
        let mut fired = None;
        while let Some(s) = scope {
            if let Some(t) = sc
                .transitions()
                .find(|t| t.source.as_str() == s && t.event.as_str() == *e)
            {
                fired = Some(t.target.to_string());
                break;
            }
            scope = sc
                .state(&s)
                .and_then(|st| st.parent.as_ref().map(|p| p.to_string()));
        }
        match fired {
            Some(target) => {
                cur = descend(target);
                out.push(Some(cur.clone()));
            }
            None => {
                out.push(None);
                break;
            }
        }
    }
    out
}

/// The element sets used by each subsumption relation, built from the
/// raw case fields with string tags.
pub fn oracle_elements(suite: &TestSuite, relation: &str) -> Vec<BTreeSet<String>> {
    suite
        .cases()
        .iter()
        .map(|c| {
            let mut set = BTreeSet::new();
            if relation != "transition" {
                set.extend(c.states.iter().map(|s| format!("state {s}")));
            }
            if relation != "node" {
                set.extend(c.transitions.iter().map(|t| format!("transition {t}")));
            }
            if relation == "element" {
                set.extend(c.inputs.iter().map(|i: &Input| format!("input {i}")));
                set.extend(c.expected_outputs.iter().map(|o| format!("output {o}")));
            }
            set
        })
        .collect()
}

/// Brute-force NC: `b` covers `a` when a's set is contained in b's and,
/// for equal sets, b is listed first in the suite (suites are numbered in
/// canonical order).
pub fn oracle_covering(suite: &TestSuite, relation: &str, by_start: bool) -> Vec<BTreeSet<String>> {
    let sets = oracle_elements(suite, relation);
    let cases = suite.cases();
    (0..cases.len())
        .map(|a| {
            (0..cases.len())
                .filter(|&b| b != a)
                .filter(|&b| !by_start || cases[a].initial == cases[b].initial)
                .filter(|&b| sets[a].iter().all(|e| sets[b].contains(e)))
                .filter(|&b| sets[a] != sets[b] || b < a)
                .map(|b| cases[b].id.to_string())
                .collect()
        })
        .collect()
}

/// Small deterministic machine generator: states `S0..S{n-1}`, `S0`
/// initial, the last one final, a spanning chain for reachability and
/// random extra transitions with at most one per (state, event).
pub fn random_machine(seed: u64, max_states: usize, max_events: usize) -> Statechart {
    use rand::{Rng, SeedableRng};
    use statecover::model::{State, Transition};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_states);
    let m = rng.gen_range(1..=max_events);
    let events: Vec<String> = (0..m).map(|i| format!("e{i}")).collect();
    let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut edges = Vec::new();
    for s in 0..n - 1 {
        let e = rng.gen_range(0..m);
        used.insert((s, e));
        edges.push((s, s + 1, e));
    }
    for _ in 0..rng.gen_range(0..=n * m / 2) {
        let (s, e) = (rng.gen_range(0..n), rng.gen_range(0..m));
        if used.insert((s, e)) {
            edges.push((s, rng.gen_range(0..n), e));
        }
    }
    let mut b = Statechart::builder(format!("R{seed}")).events(events.clone());
    for s in 0..n {
        let mut st = State::new(format!("S{s}"));
        if s == 0 {
            st = st.initial();
        }
        if s == n - 1 {
            st = st.final_state();
        }
        b = b.state(st);
    }
    for (i, (s, d, e)) in edges.into_iter().enumerate() {
        b = b.transition(Transition::new(
            format!("T{i}"),
            format!("S{s}"),
            format!("S{d}"),
            events[e].clone(),
        ));
    }
    let sc = b.build().unwrap();
    assert!(sc.validate().is_empty());
    sc
}
