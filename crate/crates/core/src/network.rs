//! Data model and text format for generalized reaction networks: a simple
//! digraph whose vertices carry a stoichiometric complex and (for source
//! vertices) a kinetic-order complex, with optional per-edge rate constants.

use std::collections::{HashMap, HashSet};

use num_traits::Zero;

use crate::error::{GmasError, Result};
use crate::ratcore::{format_rational, parse_rational, Rational, RationalMatrix, SubspaceBasis};

/// A complex: one rational coefficient per species.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Complex(pub Vec<Rational>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub stoich: Complex,
    pub kinetic: Option<Complex>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub tgt: usize,
    pub rate: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedNetwork {
    pub species: Vec<String>,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl GeneralizedNetwork {
    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    /// Indices of vertices with at least one outgoing edge.
    pub fn source_vertex_indices(&self) -> HashSet<usize> {
        self.edges.iter().map(|e| e.src).collect()
    }

    pub fn all_vertices_are_sources(&self) -> bool {
        self.source_vertex_indices().len() == self.num_vertices()
    }

    /// Rate constants as f64, defaulting to 1 for edges without one.
    pub fn rates_or_default(&self) -> Vec<f64> {
        self.edges
            .iter()
            .map(|e| {
                e.rate
                    .as_ref()
                    .map_or(1.0, crate::ratcore::rational_to_f64)
            })
            .collect()
    }

    /// Stoichiometric complex matrix Y (species x vertices).
    pub fn stoich_matrix(&self) -> RationalMatrix {
        RationalMatrix::from_columns(
            &self
                .vertices
                .iter()
                .map(|v| v.stoich.0.clone())
                .collect::<Vec<_>>(),
        )
    }

    /// Kinetic-order complex matrix; columns of non-source vertices are zero.
    pub fn kinetic_matrix(&self) -> RationalMatrix {
        let sources = self.source_vertex_indices();
        RationalMatrix::from_columns(
            &self
                .vertices
                .iter()
                .enumerate()
                .map(|(i, v)| match (&v.kinetic, sources.contains(&i)) {
                    (Some(k), true) => k.0.clone(),
                    _ => vec![Rational::zero(); self.num_species()],
                })
                .collect::<Vec<_>>(),
        )
    }

    /// Stoichiometric subspace: span of edge-wise differences of stoichiometric complexes.
    pub fn stoich_subspace(&self) -> SubspaceBasis {
        let diffs: Vec<Vec<Rational>> = self
            .edges
            .iter()
            .map(|e| {
                complex_difference(
                    &self.vertices[e.tgt].stoich,
                    &self.vertices[e.src].stoich,
                )
            })
            .collect();
        SubspaceBasis::from_spanning(self.num_species(), &diffs)
    }

    /// Kinetic-order subspace; defined only when every vertex is a source.
    pub fn kinetic_subspace(&self) -> Result<SubspaceBasis> {
        let sources = self.source_vertex_indices();
        if let Some(v) = (0..self.num_vertices()).find(|i| !sources.contains(i)) {
            return Err(GmasError::NonSourceVertex(self.vertices[v].id.clone()));
        }
        let diffs: Vec<Vec<Rational>> = self
            .edges
            .iter()
            .map(|e| {
                let tgt = self.vertices[e.tgt].kinetic.as_ref().expect("source vertex");
                let src = self.vertices[e.src].kinetic.as_ref().expect("source vertex");
                complex_difference(tgt, src)
            })
            .collect();
        Ok(SubspaceBasis::from_spanning(self.num_species(), &diffs))
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("species");
        for s in &self.species {
            out.push(' ');
            out.push_str(s);
        }
        out.push('\n');
        for v in &self.vertices {
            out.push_str(&format!("vertex {} stoich", v.id));
            for q in &v.stoich.0 {
                out.push(' ');
                out.push_str(&format_rational(q));
            }
            if let Some(k) = &v.kinetic {
                out.push_str(" kinetic");
                for q in &k.0 {
                    out.push(' ');
                    out.push_str(&format_rational(q));
                }
            }
            out.push('\n');
        }
        for e in &self.edges {
            out.push_str(&format!(
                "edge {} -> {}",
                self.vertices[e.src].id, self.vertices[e.tgt].id
            ));
            if let Some(r) = &e.rate {
                out.push_str(&format!(" rate {}", format_rational(r)));
            }
            out.push('\n');
        }
        out
    }
}

fn complex_difference(a: &Complex, b: &Complex) -> Vec<Rational> {
    a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect()
}

/// Parses the line-based network format. '#' starts a comment; the first
/// non-comment line must declare the species; species ordering is declaration
/// order throughout.
pub fn parse(text: &str) -> Result<GeneralizedNetwork> {
    let mut species: Option<Vec<String>> = None;
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut vertex_ids: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut edge_set: HashSet<(usize, usize)> = HashSet::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let err = |msg: String| GmasError::Parse { line, msg };
        match tokens[0] {
            "species" => {
                if species.is_some() {
                    return Err(err("duplicate species declaration".into()));
                }
                let names: Vec<String> = tokens[1..].iter().map(|s| s.to_string()).collect();
                if names.is_empty() {
                    return Err(err("empty species list".into()));
                }
                let mut seen = HashSet::new();
                for n in &names {
                    if !seen.insert(n.clone()) {
                        return Err(err(format!("duplicate species '{n}'")));
                    }
                }
                species = Some(names);
            }
            "vertex" => {
                let Some(species) = &species else {
                    return Err(err("species must be declared first".into()));
                };
                let n = species.len();
                if tokens.len() < 3 + n || tokens[2] != "stoich" {
                    return Err(err(format!(
                        "expected: vertex <id> stoich <{n} values> [kinetic <{n} values>]"
                    )));
                }
                let id = tokens[1].to_string();
                if vertex_ids.contains_key(&id) {
                    return Err(err(format!("duplicate vertex id '{id}'")));
                }
                let stoich = parse_complex(&tokens[3..3 + n])
                    .map_err(|e| err(format!("stoich: {e}")))?;
                let rest = &tokens[3 + n..];
                let kinetic = match rest.first() {
                    None => None,
                    Some(&"kinetic") => {
                        if rest.len() != 1 + n {
                            return Err(err(format!("kinetic clause needs {n} values")));
                        }
                        Some(
                            parse_complex(&rest[1..1 + n])
                                .map_err(|e| err(format!("kinetic: {e}")))?,
                        )
                    }
                    Some(tok) => return Err(err(format!("unexpected token '{tok}'"))),
                };
                vertex_ids.insert(id.clone(), vertices.len());
                vertices.push(Vertex { id, stoich, kinetic });
            }
            "edge" => {
                if tokens.len() < 4 || tokens[2] != "->" {
                    return Err(err("expected: edge <id> -> <id> [rate <r>]".into()));
                }
                let src_id = tokens[1];
                let tgt_id = tokens[3];
                let src = *vertex_ids
                    .get(src_id)
                    .ok_or_else(|| err(format!("undeclared vertex '{src_id}'")))?;
                let tgt = *vertex_ids
                    .get(tgt_id)
                    .ok_or_else(|| err(format!("undeclared vertex '{tgt_id}'")))?;
                if src == tgt {
                    return Err(err(format!("self-loop on vertex '{src_id}'")));
                }
                if !edge_set.insert((src, tgt)) {
                    return Err(err(format!("duplicate edge {src_id} -> {tgt_id}")));
                }
                let rate = match &tokens[4..] {
                    [] => None,
                    ["rate", r] => {
                        let rate = parse_rational(r).map_err(|e| err(e.to_string()))?;
                        if !num_traits::Signed::is_positive(&rate) {
                            return Err(err(format!("non-positive rate '{r}'")));
                        }
                        Some(rate)
                    }
                    _ => return Err(err("expected: edge <id> -> <id> [rate <r>]".into())),
                };
                edges.push(Edge { src, tgt, rate });
            }
            other => return Err(err(format!("unknown directive '{other}'"))),
        }
    }

    let species = species.ok_or(GmasError::Parse {
        line: 0,
        msg: "missing species declaration".into(),
    })?;
    let net = GeneralizedNetwork { species, vertices, edges };
    // Every source vertex must carry a kinetic-order complex.
    for &i in &net.source_vertex_indices() {
        if net.vertices[i].kinetic.is_none() {
            return Err(GmasError::MissingKinetic(net.vertices[i].id.clone()));
        }
    }
    Ok(net)
}

fn parse_complex(tokens: &[&str]) -> Result<Complex> {
    tokens
        .iter()
        .map(|t| parse_rational(t))
        .collect::<Result<Vec<_>>>()
        .map(Complex)
}
