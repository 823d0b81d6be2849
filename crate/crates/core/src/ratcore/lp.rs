//! Strict-sign feasibility inside a linear subspace, decided by an exact
//! rational LP: maximize a margin t with sign-constrained coordinates bounded
//! away from zero by t, coefficients in [-1, 1], and t <= 1. The pattern is
//! realizable iff the optimum satisfies t > 0.

use num_traits::{One, Signed, Zero};

use super::{Rational, SubspaceBasis};
use crate::error::{GmasError, Result};
use crate::signs::Sign;

#[derive(Debug, Clone)]
pub struct StrictSignOutcome {
    pub feasible: bool,
    /// Exact vector realizing the pattern, when feasible.
    pub witness: Option<Vec<Rational>>,
}

/// Decides whether some v in span(basis) has v_i > 0 where `constraint[i]` is +,
/// v_i < 0 where it is -, and v_i = 0 where it is 0 (coordinates with 0 are left
/// unconstrained when `zeros_are_free`).
pub fn strict_sign_feasible(
    basis: &SubspaceBasis,
    constraint: &[Sign],
    zeros_are_free: bool,
) -> Result<StrictSignOutcome> {
    let n = basis.ambient_dim();
    if constraint.len() != n {
        return Err(GmasError::Dimension(format!(
            "constraint length {} != ambient dim {}",
            constraint.len(),
            n
        )));
    }
    let k = basis.dim();
    if k == 0 {
        let feasible = constraint.iter().all(|s| *s == Sign::Zero);
        let witness = feasible.then(|| vec![Rational::zero(); n]);
        return Ok(StrictSignOutcome { feasible, witness });
    }

    // Variables: cp_0..cp_{k-1}, cm_0..cm_{k-1}, t (all >= 0).
    // v_i = sum_j basis[j][i] * (cp_j - cm_j).
    let nvars = 2 * k + 1;
    let t_col = 2 * k;
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    let coeff = |i: usize, j: usize| -> &Rational { &basis.vectors()[j][i] };

    let mut push_row = |row: Vec<Rational>, b: Rational| {
        rows.push(row);
        rhs.push(b);
    };

    for i in 0..n {
        let mut v_row = vec![Rational::zero(); nvars];
        for j in 0..k {
            v_row[j] = coeff(i, j).clone();
            v_row[k + j] = -coeff(i, j).clone();
        }
        match constraint[i] {
            Sign::Plus => {
                // t - v_i <= 0
                let mut row: Vec<Rational> = v_row.iter().map(|c| -c.clone()).collect();
                row[t_col] = Rational::one();
                push_row(row, Rational::zero());
            }
            Sign::Minus => {
                // t + v_i <= 0
                let mut row = v_row.clone();
                row[t_col] = Rational::one();
                push_row(row, Rational::zero());
            }
            Sign::Zero => {
                if !zeros_are_free {
                    // v_i = 0 as a pair of inequalities
                    push_row(v_row.clone(), Rational::zero());
                    push_row(v_row.iter().map(|c| -c.clone()).collect(), Rational::zero());
                }
            }
        }
    }
    // Bounds cp_j <= 1, cm_j <= 1, t <= 1.
    for j in 0..nvars {
        let mut row = vec![Rational::zero(); nvars];
        row[j] = Rational::one();
        push_row(row, Rational::one());
    }

    let mut objective = vec![Rational::zero(); nvars];
    objective[t_col] = Rational::one();

    let solution = simplex_max(&rows, &rhs, &objective)?;
    let feasible = solution.objective.is_positive();
    let witness = feasible.then(|| {
        (0..n)
            .map(|i| {
                (0..k).fold(Rational::zero(), |acc, j| {
                    acc + coeff(i, j) * (&solution.values[j] - &solution.values[k + j])
                })
            })
            .collect()
    });
    Ok(StrictSignOutcome { feasible, witness })
}

struct SimplexSolution {
    objective: Rational,
    values: Vec<Rational>,
}

/// Textbook primal simplex with Bland's rule: maximize c.x s.t. A x <= b, x >= 0.
/// Requires b >= 0 so the slack basis is feasible.
fn simplex_max(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> Result<SimplexSolution> {
    let m = a.len();
    let n = c.len();
    debug_assert!(b.iter().all(|v| !v.is_negative()));

    // Tableau: m rows of [A | I | b], objective row [-c | 0 | 0].
    let width = n + m + 1;
    let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut row = vec![Rational::zero(); width];
        row[..n].clone_from_slice(&a[i]);
        row[n + i] = Rational::one();
        row[width - 1] = b[i].clone();
        tab.push(row);
    }
    let mut obj = vec![Rational::zero(); width];
    for j in 0..n {
        obj[j] = -c[j].clone();
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        // Bland: entering = lowest-index column with negative reduced cost.
        let Some(enter) = (0..n + m).find(|&j| obj[j].is_negative()) else {
            break;
        };
        // Ratio test, tie-broken by lowest basis variable index.
        let mut leave: Option<usize> = None;
        let mut best: Option<Rational> = None;
        for i in 0..m {
            if tab[i][enter].is_positive() {
                let ratio = &tab[i][width - 1] / &tab[i][enter];
                let better = match &best {
                    None => true,
                    Some(cur) => {
                        ratio < *cur
                            || (ratio == *cur
                                && basis[i] < basis[leave.expect("leave set with best")])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return Err(GmasError::Invalid("unbounded LP in sign feasibility".into()));
        };
        // Pivot on (leave, enter).
        let pivot = tab[leave][enter].clone();
        for v in tab[leave].iter_mut() {
            *v = &*v / &pivot;
        }
        for i in 0..m {
            if i != leave && !tab[i][enter].is_zero() {
                let factor = tab[i][enter].clone();
                for j in 0..width {
                    let v = &tab[i][j] - &factor * &tab[leave][j];
                    tab[i][j] = v;
                }
            }
        }
        if !obj[enter].is_zero() {
            let factor = obj[enter].clone();
            for j in 0..width {
                let v = &obj[j] - &factor * &tab[leave][j];
                obj[j] = v;
            }
        }
        basis[leave] = enter;
    }

    let mut values = vec![Rational::zero(); n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            values[bv] = tab[i][width - 1].clone();
        }
    }
    Ok(SimplexSolution { objective: obj[width - 1].clone(), values })
}
