//! The species-formation ODE and an adaptive embedded Runge-Kutta integrator
//! that keeps trajectories inside the positive orthant.

use crate::balance::monomial;
use crate::error::{GmasError, Result};
use crate::network::GeneralizedNetwork;
use crate::ratcore::rational_to_f64;

/// dx/dt at x: the sum over edges of kappa * x^(kinetic source) * (stoich
/// target - stoich source).
pub fn rhs(net: &GeneralizedNetwork, rates: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if rates.len() != net.edges.len() {
        return Err(GmasError::Dimension(format!(
            "{} rates for {} edges",
            rates.len(),
            net.edges.len()
        )));
    }
    if x.len() != net.num_species() {
        return Err(GmasError::Dimension(format!(
            "state length {} for {} species",
            x.len(),
            net.num_species()
        )));
    }
    let n = net.num_species();
    let y = net.stoich_matrix();
    let yt = net.kinetic_matrix();
    let kin: Vec<Vec<crate::ratcore::Rational>> =
        (0..yt.cols()).map(|j| yt.column(j)).collect();
    let mut out = vec![0.0; n];
    for (e, &k) in net.edges.iter().zip(rates) {
        let flux = k * monomial(x, &kin[e.src]);
        for i in 0..n {
            out[i] +=
                flux * (rational_to_f64(&y[(i, e.tgt)]) - rational_to_f64(&y[(i, e.src)]));
        }
    }
    debug_assert!(rhs_matrix_form_agrees(net, rates, x, &out));
    Ok(out)
}

/// Debug cross-check: the edge sum must match Y A_kappa x^Y~.
fn rhs_matrix_form_agrees(
    net: &GeneralizedNetwork,
    rates: &[f64],
    x: &[f64],
    edge_sum: &[f64],
) -> bool {
    let a = match crate::graph::laplacian(net, rates) {
        Ok(a) => a,
        Err(_) => return true,
    };
    let yt = net.kinetic_matrix();
    let monomials = nalgebra::DVector::from_iterator(
        net.num_vertices(),
        (0..yt.cols()).map(|j| monomial(x, &yt.column(j))),
    );
    let y = net.stoich_matrix().to_f64();
    let alt = y * (a * monomials);
    let scale = edge_sum.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    edge_sum
        .iter()
        .zip(alt.iter())
        .all(|(a, b)| (a - b).abs() <= 1e-12 * scale)
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub species: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory is never empty")
    }

    /// CSV with a header row and one row per accepted step, at full precision
    /// (shortest representation that round-trips).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for s in &self.species {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            out.push_str(&t.to_string());
            for v in x {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Components at or below this value abort the run as a boundary collapse.
    pub positivity_floor: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_steps: 1_000_000,
            positivity_floor: 1e-12,
        }
    }
}

// Dormand-Prince 4(5) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates from `x0` to time `t_end` with adaptive step control; steps whose
/// state would touch the positivity floor are rejected and retried smaller.
pub fn integrate(
    net: &GeneralizedNetwork,
    rates: &[f64],
    x0: &[f64],
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if let Some((i, &v)) = x0.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(GmasError::NonPositiveState(i, v));
    }
    if !(t_end > 0.0) {
        return Err(GmasError::Invalid(format!("t_end must be positive, got {t_end}")));
    }
    let n = x0.len();
    let mut t = 0.0;
    let mut x = x0.to_vec();
    let mut traj = Trajectory {
        species: net.species.clone(),
        times: vec![0.0],
        states: vec![x.clone()],
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let mut h = (t_end / 100.0).min(1e-2);
    let h_min = t_end * 1e-14;
    let mut k0 = rhs(net, rates, &x)?;

    for _ in 0..opts.max_steps {
        if t >= t_end {
            return Ok(traj);
        }
        h = h.min(t_end - t);
        let mut ks: Vec<Vec<f64>> = Vec::with_capacity(7);
        ks.push(k0.clone());
        let mut stage_ok = true;
        for s in 0..6 {
            let mut xs = x.clone();
            for (j, kj) in ks.iter().enumerate() {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..n {
                        xs[i] += h * a * kj[i];
                    }
                }
            }
            if xs.iter().any(|&v| v <= opts.positivity_floor || !v.is_finite()) {
                stage_ok = false;
                break;
            }
            ks.push(rhs(net, rates, &xs)?);
        }
        if stage_ok {
            let mut x5 = x.clone();
            let mut err = 0.0f64;
            let mut e_vec = vec![0.0; n];
            for i in 0..n {
                let mut hi5 = 0.0;
                let mut hi4 = 0.0;
                for (j, kj) in ks.iter().enumerate() {
                    hi5 += B5[j] * kj[i];
                    hi4 += B4[j] * kj[i];
                }
                x5[i] += h * hi5;
                e_vec[i] = h * (hi5 - hi4);
            }
            let positive =
                x5.iter().all(|&v| v > opts.positivity_floor && v.is_finite());
            if positive {
                for i in 0..n {
                    let sc = opts.abs_tol + opts.rel_tol * x[i].abs().max(x5[i].abs());
                    err = err.max((e_vec[i] / sc).abs());
                }
                if err <= 1.0 {
                    t += h;
                    x = x5;
                    // First-same-as-last: stage 7 is the derivative at the new point.
                    k0 = ks[6].clone();
                    traj.times.push(t);
                    traj.states.push(x.clone());
                    traj.accepted_steps += 1;
                    let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    h *= grow;
                    continue;
                }
                h *= (0.9 * err.powf(-0.2)).clamp(0.2, 0.9);
            } else {
                h *= 0.5;
            }
        } else {
            h *= 0.5;
        }
        traj.rejected_steps += 1;
        if h < h_min {
            return Err(GmasError::StateCollapse { t });
        }
    }
    Err(GmasError::Invalid(format!(
        "integration exceeded {} steps at t = {t}",
        opts.max_steps
    )))
}

/// Max-norm drift of the conserved quantities over the whole trajectory:
/// W (x(t) - x(0)) with W rows spanning the orthogonal complement of the
/// stoichiometric subspace.
pub fn conservation_residual(net: &GeneralizedNetwork, traj: &Trajectory) -> f64 {
    let w = net.stoich_subspace().orth_complement();
    if w.dim() == 0 {
        return 0.0;
    }
    let wm = w.as_row_matrix().to_f64();
    let x0 = &traj.states[0];
    traj.states
        .iter()
        .map(|x| {
            let d = nalgebra::DVector::from_iterator(
                x.len(),
                x.iter().zip(x0).map(|(a, b)| a - b),
            );
            (&wm * d).amax()
        })
        .fold(0.0, f64::max)
}
