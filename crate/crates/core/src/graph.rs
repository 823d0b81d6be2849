//! Structural digraph analysis: connected components, weak reversibility, the
//! Laplacian-derived matrix A_kappa, its positive kernel, and the incidence
//! matrix.

use nalgebra::DMatrix;
use num_traits::One;

use crate::error::{GmasError, Result};
use crate::network::GeneralizedNetwork;
use crate::ratcore::{Rational, RationalMatrix};

/// Partition of the vertex set into weakly-connected components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDecomposition {
    /// Component index per vertex, components numbered 0..count.
    pub component_of: Vec<usize>,
    pub count: usize,
}

/// Weakly-connected components of the digraph (underlying undirected connectivity).
pub fn connected_components(net: &GeneralizedNetwork) -> ComponentDecomposition {
    let m = net.num_vertices();
    let mut adj = vec![Vec::new(); m];
    for e in &net.edges {
        adj[e.src].push(e.tgt);
        adj[e.tgt].push(e.src);
    }
    let mut component_of = vec![usize::MAX; m];
    let mut count = 0;
    for start in 0..m {
        if component_of[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component_of[start] = count;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if component_of[w] == usize::MAX {
                    component_of[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    ComponentDecomposition { component_of, count }
}

/// Strongly connected components by Tarjan's algorithm (iterative).
fn strong_components(net: &GeneralizedNetwork) -> Vec<usize> {
    let m = net.num_vertices();
    let mut adj = vec![Vec::new(); m];
    for e in &net.edges {
        adj[e.src].push(e.tgt);
    }
    let mut index = vec![usize::MAX; m];
    let mut lowlink = vec![0usize; m];
    let mut on_stack = vec![false; m];
    let mut scc = vec![usize::MAX; m];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0;
    let mut scc_count = 0;

    for root in 0..m {
        if index[root] != usize::MAX {
            continue;
        }
        // call stack of (vertex, next child position)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut child)) = call.last_mut() {
            if *child < adj[v].len() {
                let w = adj[v][*child];
                *child += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        scc[w] = scc_count;
                        if w == v {
                            break;
                        }
                    }
                    scc_count += 1;
                }
            }
        }
    }
    scc
}

/// True iff every connected component is strongly connected, i.e. every edge
/// lies on a directed cycle.
pub fn is_weakly_reversible(net: &GeneralizedNetwork) -> bool {
    let scc = strong_components(net);
    net.edges.iter().all(|e| scc[e.src] == scc[e.tgt])
}

/// Ids of vertices with out-degree at least one.
pub fn source_vertices(net: &GeneralizedNetwork) -> Vec<String> {
    let idx = net.source_vertex_indices();
    net.vertices
        .iter()
        .enumerate()
        .filter(|(i, _)| idx.contains(i))
        .map(|(_, v)| v.id.clone())
        .collect()
}

/// The m x m matrix A_kappa: kappa_ji off-diagonal for each edge j -> i, minus
/// the total outgoing rate on the diagonal. Column sums are zero.
pub fn laplacian(net: &GeneralizedNetwork, rates: &[f64]) -> Result<DMatrix<f64>> {
    check_rates(net, rates)?;
    let m = net.num_vertices();
    let mut a = DMatrix::zeros(m, m);
    for (e, &k) in net.edges.iter().zip(rates) {
        a[(e.tgt, e.src)] += k;
        a[(e.src, e.src)] -= k;
    }
    Ok(a)
}

/// Incidence matrix I_E (vertices x edges): -1 at the source row, +1 at the target.
pub fn incidence_matrix(net: &GeneralizedNetwork) -> RationalMatrix {
    let m = net.num_vertices();
    let mut ie = RationalMatrix::zeros(m, net.edges.len());
    for (j, e) in net.edges.iter().enumerate() {
        ie[(e.src, j)] = -Rational::one();
        ie[(e.tgt, j)] = Rational::one();
    }
    ie
}

/// Cutoff below which the positive kernel is computed by principal minors
/// (the Matrix-Tree in-tree sums); larger components use a numeric nullspace.
const MATRIX_TREE_MAX: usize = 10;

/// Basis of Ker A_kappa for a weakly reversible network: one vector per
/// connected component, strictly positive on that component's vertices and
/// zero elsewhere, normalized to maximum entry 1.
pub fn positive_kernel(net: &GeneralizedNetwork, rates: &[f64]) -> Result<Vec<Vec<f64>>> {
    if !is_weakly_reversible(net) {
        return Err(GmasError::NotWeaklyReversible(
            "positive kernel of A_kappa requires weak reversibility".into(),
        ));
    }
    check_rates(net, rates)?;
    let a = laplacian(net, rates)?;
    let comps = connected_components(net);
    let m = net.num_vertices();
    let mut out = Vec::with_capacity(comps.count);
    for c in 0..comps.count {
        let members: Vec<usize> = (0..m).filter(|&v| comps.component_of[v] == c).collect();
        let k = members.len();
        let sub = DMatrix::from_fn(k, k, |i, j| a[(members[i], members[j])]);
        let chi = if k <= MATRIX_TREE_MAX {
            tree_weights(&sub)
        } else {
            nullspace_vector(&sub)?
        };
        let max = chi.iter().cloned().fold(f64::MIN, f64::max);
        if !(max > 0.0) || chi.iter().any(|&v| v <= 0.0) {
            return Err(GmasError::Invalid(format!(
                "kernel vector of component {c} is not strictly positive"
            )));
        }
        let mut full = vec![0.0; m];
        for (i, &v) in members.iter().enumerate() {
            full[v] = chi[i] / max;
        }
        out.push(full);
    }
    Ok(out)
}

/// In-tree weight sums via the all-minors Matrix-Tree theorem: the kernel entry
/// at vertex i is |det| of the component block with row and column i removed.
fn tree_weights(sub: &DMatrix<f64>) -> Vec<f64> {
    let k = sub.nrows();
    if k == 1 {
        return vec![1.0];
    }
    (0..k)
        .map(|i| {
            let minor = sub.clone().remove_row(i).remove_column(i);
            minor.determinant().abs()
        })
        .collect()
}

fn nullspace_vector(sub: &DMatrix<f64>) -> Result<Vec<f64>> {
    let svd = sub.clone().svd(true, true);
    let v_t = svd.v_t.as_ref().expect("svd requested");
    // Right singular vector for the smallest singular value.
    let last = v_t.nrows() - 1;
    let mut chi: Vec<f64> = v_t.row(last).iter().cloned().collect();
    let sum: f64 = chi.iter().sum();
    if sum < 0.0 {
        for v in &mut chi {
            *v = -*v;
        }
    }
    Ok(chi)
}

fn check_rates(net: &GeneralizedNetwork, rates: &[f64]) -> Result<()> {
    if rates.len() != net.edges.len() {
        return Err(GmasError::Dimension(format!(
            "expected {} rates, got {}",
            net.edges.len(),
            rates.len()
        )));
    }
    if let Some((i, _)) = rates.iter().enumerate().find(|(_, &r)| !(r > 0.0)) {
        let e = &net.edges[i];
        return Err(GmasError::MissingRate(
            net.vertices[e.src].id.clone(),
            net.vertices[e.tgt].id.clone(),
        ));
    }
    Ok(())
}
