//! The reducibility diagrams as data.
//!
//! Each diagram is its own graph; an edge `from -> to` means `from ≤ to`.
//! The label is the id of the shipped reduction witnessing exactly that
//! edge, or else the strictness flag. Strictness is what the caption or
//! surrounding text asserts; `open` means it asserts nothing.

use std::fmt::Write;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    Strict,
    Open,
    /// Drawn as one node `A ∼ B`; stored as edges both ways.
    Equivalent,
}

impl Strictness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strictness::Strict => "strict",
            Strictness::Open => "open",
            Strictness::Equivalent => "equivalent",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Node {
    pub id: &'static str,
    pub label: &'static str,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: &'static str,
    pub to: &'static str,
    pub label: &'static str,
    pub strictness: Strictness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagram {
    pub id: &'static str,
    pub title: &'static str,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HierarchyGraph {
    pub diagrams: Vec<Diagram>,
}

use Strictness::*;

fn n(id: &'static str, label: &'static str) -> Node {
    Node { id, label }
}

/// `by` is a reduction id, or `None` to label with the strictness flag.
fn e(from: &'static str, to: &'static str, by: Option<&'static str>, strictness: Strictness) -> Edge {
    Edge {
        from,
        to,
        label: by.unwrap_or(strictness.as_str()),
        strictness,
    }
}

pub fn hierarchy_graph() -> HierarchyGraph {
    let diagrams = vec![
        Diagram {
            id: "two_class",
            title: "two-class and one-class relations",
            nodes: vec![n("two_class", "E_{A,Aᶜ}"), n("one_class", "E_A")],
            edges: vec![],
        },
        Diagram {
            id: "combinatorial",
            title: "minimal, two-class, one-class and universal c.e. relations",
            nodes: vec![
                n("eq_n[1]", "=_1"),
                n("eq_n[2]", "=_2"),
                n("eq_n", "=_n (n > 2)"),
                n("eq_nat", "=_ℕ"),
                n("u_ce", "U_ce"),
                n("eq_ce", "=ce"),
                n("one_class", "E_A"),
                n("two_class", "E_{A,Aᶜ}"),
            ],
            edges: vec![
                e("eq_n[1]", "eq_n[2]", None, Open),
                e("eq_n[2]", "eq_n", None, Open),
                e("eq_n", "eq_nat", None, Open),
                e("eq_nat", "u_ce", Some("uce_embed"), Open),
                e("u_ce", "eq_ce", None, Open),
                e("one_class", "u_ce", Some("uce_embed"), Open),
                e("eq_n[1]", "one_class", None, Open),
                e("eq_n[2]", "one_class", None, Open),
                e("eq_n", "one_class", None, Open),
                e("two_class", "eq_ce", None, Open),
                e("eq_n[2]", "two_class", None, Open),
            ],
        },
        Diagram {
            id: "ei_borel",
            title: "classical combinatorial relations under Borel reducibility (complete)",
            nodes: vec![
                n("eq", "="),
                n("e0", "E_0"),
                n("e1", "E_1"),
                n("e2", "E_2"),
                n("e3", "E_3"),
                n("e_set", "E_set"),
                n("z0", "Z_0"),
            ],
            edges: vec![
                e("eq", "e0", None, Strict),
                e("e0", "e1", None, Strict),
                e("e0", "e2", None, Strict),
                e("e0", "e3", None, Strict),
                e("e3", "e_set", None, Strict),
                e("e3", "z0", None, Strict),
            ],
        },
        Diagram {
            id: "ei_ce",
            title: "c.e. versions of the combinatorial relations",
            nodes: vec![
                n("eq_ce", "=ce"),
                n("e0", "E_0"),
                n("e1", "E_1"),
                n("e2", "E_2"),
                n("e3", "E_3"),
                n("e_set", "E_set"),
                n("z0", "Z_0"),
            ],
            edges: vec![
                e("eq_ce", "e0", Some("eqce_to_e0"), Strict),
                e("e0", "e1", Some("e0_to_e1"), Equivalent),
                e("e1", "e0", Some("e1_to_e0"), Equivalent),
                e("e0", "e2", Some("e0_to_e2"), Open),
                e("e0", "e3", Some("e0_to_e3"), Open),
                e("e3", "e_set", Some("e3_to_eset"), Open),
                e("e3", "z0", Some("e3_to_z0"), Open),
            ],
        },
        Diagram {
            id: "med",
            title: "min, max and median relations (complete)",
            nodes: vec![
                n("eq_ce", "=ce"),
                n("e_min", "E_min"),
                n("e_max", "E_max"),
                n("e_med", "E_med"),
                n("e0", "E_0"),
            ],
            edges: vec![
                e("e_min", "eq_ce", Some("min_to_eqce"), Strict),
                e("e_max", "eq_ce", Some("max_to_eqce"), Strict),
                e("e_max", "e_med", Some("max_to_med"), Strict),
                e("eq_ce", "e0", Some("eqce_to_e0"), Strict),
                e("e_med", "e0", Some("emed_to_e0"), Strict),
            ],
        },
        Diagram {
            id: "rocket",
            title: "cut and hull relations of computable ordinals and their reverses",
            nodes: vec![
                n("h_omega", "H_ω"),
                n("e_omega", "E_ω ∼ E_max"),
                n("e_min", "E_ω* ∼ E_min"),
                n("e_alpha", "E_α"),
                n("e_alpha_star", "E_α*"),
                n("h_alpha", "H_α"),
                n("e_q", "E_ℚ ∼ =ce"),
            ],
            edges: vec![
                e("e_omega", "h_omega", Some("cut_to_hull"), Strict),
                e("e_min", "h_omega", Some("cut_to_hull_star"), Strict),
                e("e_omega", "e_alpha", None, Strict),
                e("e_alpha", "e_q", None, Open),
                e("e_min", "e_alpha_star", None, Strict),
                e("e_alpha_star", "e_q", None, Open),
                e("h_omega", "h_alpha", None, Strict),
                e("h_alpha", "e_q", None, Open),
                e("e_alpha", "h_alpha", None, Strict),
                e("e_alpha_star", "h_alpha", None, Strict),
            ],
        },
        Diagram {
            id: "enum",
            title: "enumerable and orbit relations",
            nodes: vec![
                n("eq_ce", "=ce"),
                n("e0", "E_0"),
                n("translation", "E_Γ"),
                n("u_fomega", "U_Fω"),
                n("enumerable", "enumerable relations"),
                n("e_set", "E_set"),
            ],
            edges: vec![
                e("eq_ce", "e0", Some("eqce_to_e0"), Strict),
                e("eq_ce", "u_fomega", None, Open),
                e("translation", "u_fomega", Some("gamma_to_fomega"), Open),
                e("enumerable", "e_set", Some("enumerable_to_eset"), Open),
            ],
        },
        Diagram {
            id: "iso",
            title: "isomorphism relations",
            nodes: vec![
                n("eq_ce", "=ce"),
                n("compiso_bin", "≃_bin"),
                n("e_set", "E_set"),
                n("iso_l", "≅_L"),
                n("iso_bin", "≅_bin ∼ ≅_graph ∼ ≅_lo ∼ ≅_tree"),
                n("iso_group", "≅_group"),
                n("iso_pres", "≅_pres"),
            ],
            edges: vec![
                e("eq_ce", "compiso_bin", None, Open),
                e("compiso_bin", "e_set", Some("compiso_to_eset"), Open),
                e("iso_l", "iso_bin", None, Open),
                e("iso_group", "iso_bin", None, Open),
                e("iso_bin", "iso_pres", None, Open),
            ],
        },
        Diagram {
            id: "turing",
            title: "degree-theoretic relations",
            nodes: vec![
                n("eq_ce", "=ce"),
                n("eq_m", "≡_m"),
                n("eq_1", "≡_1"),
                n("compiso_bin", "≃_bin"),
                n("eq_t", "≡_T"),
            ],
            edges: vec![
                e("eq_ce", "eq_m", None, Open),
                e("eq_m", "eq_1", Some("eqm_to_eq1"), Open),
                e("eq_1", "compiso_bin", Some("eq1_to_compiso"), Open),
                e("eq_ce", "eq_t", None, Open),
            ],
        },
        Diagram {
            id: "nce",
            title: "relations on n-c.e. sets",
            nodes: vec![
                n("eq_ce", "=ce"),
                n("eq_dce", "=dce"),
                n("eq_nce", "=n-ce"),
                n("eq_ltomega", "=<ω-ce"),
                n("e3", "E_3"),
                n("e0", "E_0"),
            ],
            edges: vec![
                e("eq_ce", "eq_dce", Some("nce_embed"), Open),
                e("eq_dce", "eq_nce", Some("nce_embed"), Open),
                e("eq_nce", "eq_ltomega", None, Open),
                e("eq_ltomega", "e3", Some("ltomega_to_e3"), Strict),
                e("eq_ce", "e0", Some("eqce_to_e0"), Strict),
                e("e0", "e3", Some("e0_to_e3"), Open),
            ],
        },
    ];
    HierarchyGraph { diagrams }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

impl HierarchyGraph {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    /// One cluster per diagram; node names are `diagram.id`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph hierarchy {\n  rankdir=BT;\n");
        for d in &self.diagrams {
            let _ = writeln!(out, "  subgraph \"cluster_{}\" {{", d.id);
            let _ = writeln!(out, "    label=\"{}\";", dot_escape(d.title));
            for node in &d.nodes {
                let _ = writeln!(
                    out,
                    "    \"{}.{}\" [label=\"{}\"];",
                    d.id,
                    dot_escape(node.id),
                    dot_escape(node.label)
                );
            }
            for edge in &d.edges {
                let style = match edge.strictness {
                    Strict => "solid",
                    Open => "dashed",
                    Equivalent => "bold",
                };
                let _ = writeln!(
                    out,
                    "    \"{0}.{1}\" -> \"{0}.{2}\" [label=\"{3}\", style={4}];",
                    d.id,
                    dot_escape(edge.from),
                    dot_escape(edge.to),
                    dot_escape(edge.label),
                    style
                );
            }
            out.push_str("  }\n");
        }
        out.push_str("}\n");
        out
    }

    pub fn diagram(&self, id: &str) -> Option<&Diagram> {
        self.diagrams.iter().find(|d| d.id == id)
    }
}

impl Diagram {
    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == to)
    }

    pub fn edge(&self, from: &str, to: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_nodes_and_edges_unique() {
        let g = hierarchy_graph();
        for d in &g.diagrams {
            for e in &d.edges {
                assert!(d.nodes.iter().any(|n| n.id == e.from), "{} {}", d.id, e.from);
                assert!(d.nodes.iter().any(|n| n.id == e.to), "{} {}", d.id, e.to);
                assert_ne!(e.from, e.to);
            }
            let mut pairs: Vec<_> = d.edges.iter().map(|e| (e.from, e.to)).collect();
            pairs.sort();
            pairs.dedup();
            assert_eq!(pairs.len(), d.edges.len(), "{}", d.id);
        }
    }

    #[test]
    fn drawn_facts() {
        let g = hierarchy_graph();
        let ce = g.diagram("ei_ce").unwrap();
        assert_eq!(ce.edge("eq_ce", "e0").unwrap().label, "eqce_to_e0");
        assert!(ce.has_edge("e1", "e0") && ce.has_edge("e0", "e1"));
        assert!(!ce.has_edge("e3", "e2"));
        let counts: Vec<(&str, usize)> = g.diagrams.iter().map(|d| (d.id, d.edges.len())).collect();
        assert_eq!(
            counts,
            [
                ("two_class", 0),
                ("combinatorial", 11),
                ("ei_borel", 6),
                ("ei_ce", 7),
                ("med", 5),
                ("rocket", 10),
                ("enum", 4),
                ("iso", 5),
                ("turing", 4),
                ("nce", 6),
            ]
        );
    }

    #[test]
    fn equivalent_edges_come_in_pairs() {
        for d in hierarchy_graph().diagrams {
            for e in d.edges.iter().filter(|e| e.strictness == Equivalent) {
                assert!(d.has_edge(e.to, e.from));
            }
        }
    }
}
