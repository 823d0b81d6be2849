//! Deficiencies, vertex-balance and steady-state predicates, construction of a
//! vertex-balanced steady state, and the top-level analysis verdict.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{GmasError, Result};
use crate::graph::{self, connected_components, is_weakly_reversible, positive_kernel};
use crate::network::GeneralizedNetwork;
use crate::ratcore::{rational_to_f64, Rational};
use crate::signs::{check_sigma_subset_closure, check_uniqueness_condition};

/// Default relative tolerance, overridable per call site.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Deficiencies {
    pub delta: usize,
    pub delta_tilde: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Unique positive steady state in every class, for all rate constants.
    UniquePositiveSteadyStateAllKappa,
    /// A vertex-balanced steady state exists and is unique per class, for all rate constants.
    UniqueAndExistsAllKappa,
    /// If any vertex-balanced steady state exists, each class contains exactly one.
    UniquePerClassIfExists,
    /// Each class contains at most one vertex-balanced steady state.
    AtMostOnePerClass,
    NoConclusion,
}

impl Verdict {
    pub fn describe(self) -> &'static str {
        match self {
            Verdict::UniquePositiveSteadyStateAllKappa => {
                "unique positive steady state per class, vertex-balanced, for all rate constants"
            }
            Verdict::UniqueAndExistsAllKappa => {
                "exactly one vertex-balanced steady state per class, for all rate constants"
            }
            Verdict::UniquePerClassIfExists => {
                "exactly one vertex-balanced steady state per class, if any exists"
            }
            Verdict::AtMostOnePerClass => {
                "at most one vertex-balanced steady state per class"
            }
            Verdict::NoConclusion => "no conclusion",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub weakly_reversible: bool,
    pub num_vertices: usize,
    pub num_components: usize,
    pub dim_stoich_subspace: usize,
    /// Absent when some vertex is not a source (kinetic-order subspace undefined).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim_kinetic_subspace: Option<usize>,
    pub deficiency: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kinetic_deficiency: Option<usize>,
    pub equal_dims: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_condition: Option<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniqueness_condition: Option<ConditionReport>,
    pub verdict: Verdict,
}

/// Stoichiometric deficiency |V| - l - dim S, cross-checked against
/// dim(Ker Y intersect Img I_E).
pub fn stoich_deficiency(net: &GeneralizedNetwork) -> usize {
    let m = net.num_vertices();
    let l = connected_components(net).count;
    let dim_s = net.stoich_subspace().dim();
    let delta = m - l - dim_s;
    let ker_y = net.stoich_matrix().kernel_basis();
    let img_ie = {
        let ie = graph::incidence_matrix(net);
        let cols: Vec<Vec<Rational>> = (0..ie.cols()).map(|j| ie.column(j)).collect();
        crate::ratcore::SubspaceBasis::from_spanning(m, &cols)
    };
    let alt = ker_y
        .intersect(&img_ie)
        .expect("equal ambient dims")
        .dim();
    assert_eq!(delta, alt, "deficiency formulas disagree");
    delta
}

/// Both deficiencies; errors if the kinetic-order subspace is undefined.
pub fn deficiencies(net: &GeneralizedNetwork) -> Result<Deficiencies> {
    let delta = stoich_deficiency(net);
    let m = net.num_vertices();
    let l = connected_components(net).count;
    let dim_st = net.kinetic_subspace()?.dim();
    Ok(Deficiencies { delta, delta_tilde: m - l - dim_st })
}

/// x^y for positive x and rational exponents, evaluated in the log domain.
pub(crate) fn monomial(x: &[f64], exponents: &[Rational]) -> f64 {
    let log_sum: f64 = x
        .iter()
        .zip(exponents)
        .map(|(&xi, e)| rational_to_f64(e) * xi.ln())
        .sum();
    log_sum.exp()
}

fn check_positive(x: &[f64]) -> Result<()> {
    if let Some((i, &v)) = x.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(GmasError::NonPositiveState(i, v));
    }
    Ok(())
}

/// Kinetic-order exponent vectors per vertex (zero for non-sources).
fn kinetic_columns(net: &GeneralizedNetwork) -> Vec<Vec<Rational>> {
    let yt = net.kinetic_matrix();
    (0..yt.cols()).map(|j| yt.column(j)).collect()
}

/// Checks the per-vertex flux balance A_kappa x^Y~ = 0: at each vertex the
/// inflow/outflow imbalance must be at most `tol` times the gross flux there.
pub fn is_vertex_balanced(
    net: &GeneralizedNetwork,
    rates: &[f64],
    x: &[f64],
    tol: f64,
) -> Result<(bool, Vec<f64>)> {
    check_positive(x)?;
    let kin = kinetic_columns(net);
    let m = net.num_vertices();
    let mut inflow = vec![0.0; m];
    let mut outflow = vec![0.0; m];
    for (e, &k) in net.edges.iter().zip(rates) {
        let flux = k * monomial(x, &kin[e.src]);
        outflow[e.src] += flux;
        inflow[e.tgt] += flux;
    }
    let residuals: Vec<f64> = (0..m).map(|i| (inflow[i] - outflow[i]).abs()).collect();
    let balanced = (0..m).all(|i| {
        let gross = inflow[i] + outflow[i];
        gross == 0.0 || residuals[i] <= tol * gross
    });
    Ok((balanced, residuals))
}

/// Checks Y A_kappa x^Y~ = 0 in the max norm, scaled by the largest edge term.
pub fn is_steady_state(
    net: &GeneralizedNetwork,
    rates: &[f64],
    x: &[f64],
    tol: f64,
) -> Result<(bool, Vec<f64>)> {
    check_positive(x)?;
    let residual = crate::dynamics::rhs(net, rates, x)?;
    let kin = kinetic_columns(net);
    let y = net.stoich_matrix();
    let mut scale = 0.0f64;
    for (e, &k) in net.edges.iter().zip(rates) {
        let mono = k * monomial(x, &kin[e.src]);
        let dir_max = (0..net.num_species())
            .map(|i| (rational_to_f64(&y[(i, e.tgt)]) - rational_to_f64(&y[(i, e.src)])).abs())
            .fold(0.0f64, f64::max);
        scale = scale.max(mono * dir_max);
    }
    let scale = scale.max(1e-300);
    let steady = residual.iter().all(|r| r.abs() <= tol * scale);
    Ok((steady, residual))
}

/// Relative consistency threshold for the log-linear system deciding whether a
/// vertex-balanced steady state exists for the given rates.
const LOG_LINEAR_TOL: f64 = 1e-8;

/// Attempts to construct a vertex-balanced steady state by solving
/// Y~^T log x = log of the positive kernel, up to one free scale per component.
///
/// Returns None when the log-linear system is inconsistent (possible whenever
/// the kinetic-order deficiency is positive).
pub fn find_vertex_balanced(
    net: &GeneralizedNetwork,
    rates: &[f64],
) -> Result<Option<(Vec<f64>, f64)>> {
    if !is_weakly_reversible(net) {
        return Err(GmasError::NotWeaklyReversible(
            "vertex-balanced steady states require a weakly reversible graph".into(),
        ));
    }
    let chis = positive_kernel(net, rates)?;
    let comps = connected_components(net);
    let n = net.num_species();
    let m = net.num_vertices();
    let l = comps.count;
    let yt = net.kinetic_matrix().to_f64();

    // Unknowns: u = log x (n entries), then one log-scale per component.
    let mut mat = DMatrix::zeros(m, n + l);
    let mut b = DVector::zeros(m);
    for j in 0..m {
        let c = comps.component_of[j];
        for i in 0..n {
            mat[(j, i)] = yt[(i, j)];
        }
        mat[(j, n + c)] = -1.0;
        b[j] = chis[c][j].ln();
    }
    let svd = mat.clone().svd(true, true);
    let z = svd.solve(&b, 1e-12).map_err(|e| GmasError::Invalid(e.into()))?;
    let residual = (&mat * &z - &b).norm() / b.norm().max(1.0);
    if residual > LOG_LINEAR_TOL {
        return Ok(None);
    }
    let x: Vec<f64> = (0..n).map(|i| z[i].exp()).collect();
    let (ok, _) = is_vertex_balanced(net, rates, &x, LOG_LINEAR_TOL)?;
    if !ok {
        return Ok(None);
    }
    Ok(Some((x, residual)))
}

/// Membership in the balanced set through a known vertex-balanced point:
/// x belongs iff log x - log x* lies in the orthogonal complement of the
/// kinetic-order subspace (projection residual below `tol`).
pub fn balanced_set_membership(
    net: &GeneralizedNetwork,
    x_star: &[f64],
    x: &[f64],
    tol: f64,
) -> Result<bool> {
    check_positive(x_star)?;
    check_positive(x)?;
    let st = net.kinetic_subspace()?;
    let v = DVector::from_iterator(
        x.len(),
        x.iter().zip(x_star).map(|(a, b)| a.ln() - b.ln()),
    );
    if st.dim() == 0 {
        return Ok(true);
    }
    // Orthonormalize the subspace basis and project.
    let bt = st.as_col_matrix().to_f64();
    let qr = bt.qr();
    let q = qr.q();
    let proj = q.transpose() * &v;
    Ok(proj.norm() <= tol * v.norm().max(1.0))
}

/// Full structural analysis: dimensions, deficiencies, sign conditions, and
/// the strongest structural conclusion they support.
pub fn analyze(net: &GeneralizedNetwork) -> AnalysisReport {
    let weakly_reversible = is_weakly_reversible(net);
    let comps = connected_components(net);
    let s = net.stoich_subspace();
    let dim_s = s.dim();
    let deficiency = stoich_deficiency(net);

    let st = net.kinetic_subspace().ok();
    let dim_st = st.as_ref().map(|b| b.dim());
    let kinetic_deficiency =
        dim_st.map(|d| net.num_vertices() - comps.count - d);
    let equal_dims = dim_st == Some(dim_s);

    let sign_condition = st.as_ref().map(|st| {
        let c = check_sigma_subset_closure(&s, st).expect("within enumeration cap");
        ConditionReport { holds: c.holds, witness: c.witness.map(|w| w.to_string()) }
    });
    let uniqueness_condition = st.as_ref().map(|st| {
        let c = check_uniqueness_condition(&s, st).expect("within enumeration cap");
        ConditionReport { holds: c.holds, witness: c.witness.map(|w| w.to_string()) }
    });

    let sign_holds = sign_condition.as_ref().is_some_and(|c| c.holds);
    let uniq_holds = uniqueness_condition.as_ref().is_some_and(|c| c.holds);
    let main_hypotheses = weakly_reversible && equal_dims && sign_holds;

    let verdict = if main_hypotheses && deficiency == 0 && kinetic_deficiency == Some(0) {
        Verdict::UniquePositiveSteadyStateAllKappa
    } else if main_hypotheses && kinetic_deficiency == Some(0) {
        Verdict::UniqueAndExistsAllKappa
    } else if main_hypotheses {
        Verdict::UniquePerClassIfExists
    } else if uniq_holds {
        Verdict::AtMostOnePerClass
    } else {
        Verdict::NoConclusion
    };

    AnalysisReport {
        weakly_reversible,
        num_vertices: net.num_vertices(),
        num_components: comps.count,
        dim_stoich_subspace: dim_s,
        dim_kinetic_subspace: dim_st,
        deficiency,
        kinetic_deficiency,
        equal_dims,
        sign_condition,
        uniqueness_condition,
        verdict,
    }
}
