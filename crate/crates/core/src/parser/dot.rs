use crate::tgraph::TransitionGraph;

/// Renders a transition graph as a DOT digraph. Nodes are listed in vertex
/// order (`ti`, sequences, `tf`) and edges sorted by (source, target).
pub fn export_dot(tg: &TransitionGraph) -> String {
    let mut out = String::from("digraph TG {\n");
    for v in tg.vertices() {
        out.push_str(&format!("  {};\n", quote(&v.name())));
    }
    for (a, b) in tg.edges() {
        out.push_str(&format!(
            "  {} -> {};\n",
            quote(&a.name()),
            quote(&b.name())
        ));
    }
    out.push_str("}\n");
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::atm;
    use crate::model::{State, Statechart, Transition};
    use crate::tgraph::build_transition_graph;

    fn count(dot: &str) -> (usize, usize) {
        let edges = dot.lines().filter(|l| l.contains("->")).count();
        let nodes = dot
            .lines()
            .filter(|l| l.ends_with(';') && !l.contains("->"))
            .count();
        (nodes, edges)
    }

    #[test]
    fn atm_dot() {
        let g = build_transition_graph(&atm()).unwrap();
        let dot = export_dot(&g);
        assert_eq!(count(&dot), (9, 9));
        assert_eq!(count(&export_dot(&g.augment())), (9, 10));
        assert!(dot.starts_with("digraph TG {\n  \"ti\";\n  \"TR1\";"));
        assert!(dot.contains("  \"ti\" -> \"TR1\";\n"));
        assert!(dot.ends_with("  \"tf\";\n  \"ti\" -> \"TR1\";\n  \"TR1\" -> \"TR2\";\n  \"TR2\" -> \"TR3\";\n  \"TR3\" -> \"TR4\";\n  \"TR4\" -> \"TR5\";\n  \"TR4\" -> \"TR6\";\n  \"TR5\" -> \"tf\";\n  \"TR6\" -> \"TR7\";\n  \"TR7\" -> \"tf\";\n}\n"));
    }

    #[test]
    fn empty_graph() {
        assert_eq!(export_dot(&TransitionGraph::default()), "digraph TG {\n}\n");
    }

    #[test]
    fn single_transition_augmented() {
        let sc = Statechart::builder("M")
            .event("e")
            .state(State::new("S").initial())
            .state(State::new("F").final_state())
            .transition(Transition::new("t1", "S", "F", "e"))
            .build()
            .unwrap();
        let dot = export_dot(&build_transition_graph(&sc).unwrap().augment());
        assert_eq!(
            dot,
            "digraph TG {\n  \"ti\";\n  \"t1\";\n  \"tf\";\n  \"ti\" -> \"t1\";\n  \"t1\" -> \"tf\";\n  \"tf\" -> \"ti\";\n}\n"
        );
    }
}
