//! Generalized Birch points: the unique element of (x0 + S) intersected with
//! the exponential manifold x* . exp(S~perp), computed by damped Newton with a
//! predictor-corrector homotopy fallback along the interpolated class
//! representative K(delta) = delta x0 + (1 - delta) x*.

use nalgebra::{DMatrix, DVector};

use crate::balance::is_vertex_balanced;
use crate::error::{GmasError, Result};
use crate::network::GeneralizedNetwork;

/// Exponents beyond this magnitude abort evaluation instead of producing
/// IEEE infinities or zeros.
pub const EXP_CLAMP: f64 = 700.0;

const BOX_LO: f64 = 1e-12;
const BOX_HI: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct BirchProblem {
    /// Rows: orthonormal basis of the orthogonal complement of S (d x n).
    w: DMatrix<f64>,
    /// Rows: orthonormal basis of the orthogonal complement of S~ (dt x n).
    wt: DMatrix<f64>,
    x0: DVector<f64>,
    x_star: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct BirchSolution {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    /// max-norm of W (x - x0).
    pub residual_affine: f64,
    /// x was constructed as x* . exp(Wt^T lambda), so membership in the
    /// manifold is exact by construction.
    pub residual_manifold: bool,
    pub homotopy_steps: usize,
    pub newton_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Affine residual target, relative to the max-norm of W x0.
    pub tol: f64,
    pub max_newton: usize,
    pub max_halvings: usize,
    pub homotopy_initial_step: f64,
    pub homotopy_step_floor: f64,
    /// Starting point for the Newton phase (defaults to lambda = 0); the
    /// homotopy fallback always tracks from lambda = 0.
    pub initial_lambda: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_newton: 200,
            max_halvings: 40,
            homotopy_initial_step: 0.1,
            homotopy_step_floor: 1e-6,
            initial_lambda: None,
        }
    }
}

/// Orthonormalizes the rows of `rows` (each of length n); errors if they are
/// linearly dependent.
fn orthonormal_rows(rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    let d = rows.len();
    if d == 0 {
        return Ok(DMatrix::zeros(0, n));
    }
    for r in rows {
        if r.len() != n {
            return Err(GmasError::Dimension(format!(
                "basis row has length {}, expected {n}",
                r.len()
            )));
        }
    }
    let at = DMatrix::from_fn(n, d, |i, j| rows[j][i]);
    if at.rank(1e-10) < d {
        return Err(GmasError::Invalid("basis rows are linearly dependent".into()));
    }
    let q = at.qr().q();
    Ok(q.transpose())
}

fn check_positive_vec(name: &str, v: &[f64]) -> Result<()> {
    if let Some((i, &x)) = v.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
        return Err(GmasError::Invalid(format!("{name}[{i}] = {x} is not positive")));
    }
    Ok(())
}

impl BirchProblem {
    /// `w_rows` spans the orthogonal complement of S; `wt_rows` that of S~.
    /// Rows are orthonormalized internally (the intersection only depends on
    /// the row spaces).
    pub fn new(
        w_rows: &[Vec<f64>],
        wt_rows: &[Vec<f64>],
        x0: &[f64],
        x_star: &[f64],
    ) -> Result<BirchProblem> {
        let n = x0.len();
        if x_star.len() != n {
            return Err(GmasError::Dimension(format!(
                "x0 has {} entries, x_star has {}",
                n,
                x_star.len()
            )));
        }
        check_positive_vec("x0", x0)?;
        check_positive_vec("x_star", x_star)?;
        Ok(BirchProblem {
            w: orthonormal_rows(w_rows, n)?,
            wt: orthonormal_rows(wt_rows, n)?,
            x0: DVector::from_column_slice(x0),
            x_star: DVector::from_column_slice(x_star),
        })
    }

    /// Builds the problem from a network: S and S~ are the stoichiometric and
    /// kinetic-order subspaces.
    pub fn from_network(
        net: &GeneralizedNetwork,
        x0: &[f64],
        x_star: &[f64],
    ) -> Result<BirchProblem> {
        if x0.len() != net.num_species() {
            return Err(GmasError::Dimension(format!(
                "x0 has {} entries for {} species",
                x0.len(),
                net.num_species()
            )));
        }
        let to_rows = |b: &crate::ratcore::SubspaceBasis| -> Vec<Vec<f64>> {
            b.vectors()
                .iter()
                .map(|v| v.iter().map(crate::ratcore::rational_to_f64).collect())
                .collect()
        };
        let w = to_rows(&net.stoich_subspace().orth_complement());
        let wt = to_rows(&net.kinetic_subspace()?.orth_complement());
        BirchProblem::new(&w, &wt, x0, x_star)
    }

    pub fn ambient_dim(&self) -> usize {
        self.x0.len()
    }

    pub fn codim_s(&self) -> usize {
        self.w.nrows()
    }

    pub fn codim_s_tilde(&self) -> usize {
        self.wt.nrows()
    }

    /// x(lambda) = x* . exp(Wt^T lambda).
    fn point(&self, lambda: &DVector<f64>) -> Result<DVector<f64>> {
        let shift = self.wt.transpose() * lambda;
        let mut x = DVector::zeros(self.ambient_dim());
        for i in 0..x.len() {
            let e = self.x_star[i].ln() + shift[i];
            if e.abs() > EXP_CLAMP {
                return Err(GmasError::Saturation(EXP_CLAMP));
            }
            x[i] = e.exp();
        }
        Ok(x)
    }

    /// F(lambda) = W (x* . exp(Wt^T lambda)).
    pub fn eval_f_log(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        let lam = DVector::from_column_slice(lambda);
        let x = self.point(&lam)?;
        Ok((&self.w * x).iter().cloned().collect())
    }

    /// f(xi) = W (x* . xi^Wt), i.e. F at lambda = Wt log xi.
    pub fn eval_f(&self, xi: &[f64]) -> Result<Vec<f64>> {
        check_positive_vec("xi", xi)?;
        let log_xi = DVector::from_iterator(xi.len(), xi.iter().map(|v| v.ln()));
        let lam = &self.wt * log_xi;
        self.eval_f_log(lam.as_slice())
    }

    /// d F / d lambda = W diag(x(lambda)) Wt^T.
    pub fn jacobian(&self, lambda: &[f64]) -> Result<DMatrix<f64>> {
        let lam = DVector::from_column_slice(lambda);
        let x = self.point(&lam)?;
        let mut scaled = self.wt.transpose();
        for i in 0..x.len() {
            scaled.row_mut(i).scale_mut(x[i]);
        }
        Ok(&self.w * scaled)
    }

    /// Finds the intersection point. Requires equal codimensions so the
    /// Jacobian is square; the caller is responsible for having verified the
    /// sign condition that guarantees existence and uniqueness.
    pub fn solve(&self, opts: &SolveOptions) -> Result<BirchSolution> {
        let d = self.codim_s();
        if d != self.codim_s_tilde() {
            return Err(GmasError::Dimension(format!(
                "codim S = {} but codim S~ = {}; the intersection problem needs them equal",
                d,
                self.codim_s_tilde()
            )));
        }
        let target = &self.w * &self.x0;
        let tol_abs = opts.tol * target.amax().max(1.0);

        let mut lambda = match &opts.initial_lambda {
            Some(l) if l.len() == d => DVector::from_column_slice(l),
            Some(l) => {
                return Err(GmasError::Dimension(format!(
                    "initial lambda has {} entries, expected {d}",
                    l.len()
                )))
            }
            None => DVector::zeros(d),
        };
        let mut stats = Stats::default();
        if d == 0 {
            // S is the full space: the class meets the manifold at x* itself.
            return Ok(self.finish(lambda, &stats));
        }

        match self.newton(&mut lambda, &target, tol_abs, opts, &mut stats) {
            Ok(()) => Ok(self.finish(lambda, &stats)),
            Err(NewtonFailure::Hard(e)) => Err(e),
            Err(NewtonFailure::Stagnated) => {
                let mut lambda = DVector::zeros(d);
                self.homotopy(&mut lambda, tol_abs, opts, &mut stats)?;
                Ok(self.finish(lambda, &stats))
            }
        }
    }

    fn finish(&self, lambda: DVector<f64>, stats: &Stats) -> BirchSolution {
        let x = self.point(&lambda).expect("accepted iterate evaluates");
        let residual_affine = (&self.w * (&x - &self.x0)).amax();
        BirchSolution {
            x: x.iter().cloned().collect(),
            lambda: lambda.iter().cloned().collect(),
            residual_affine,
            residual_manifold: true,
            homotopy_steps: stats.homotopy_steps,
            newton_iterations: stats.newton_iterations,
        }
    }

    /// Damped Newton on G(lambda) = F(lambda) - target, with an Armijo
    /// backtracking line search on the squared residual norm.
    fn newton(
        &self,
        lambda: &mut DVector<f64>,
        target: &DVector<f64>,
        tol_abs: f64,
        opts: &SolveOptions,
        stats: &mut Stats,
    ) -> std::result::Result<(), NewtonFailure> {
        let mut g = self.residual(lambda, target).map_err(NewtonFailure::soft)?;
        for _ in 0..opts.max_newton {
            if g.amax() <= tol_abs {
                return Ok(());
            }
            let jac = self.jacobian(lambda.as_slice()).map_err(NewtonFailure::soft)?;
            let Some(step) = jac.lu().solve(&(-&g)) else {
                return Err(NewtonFailure::Stagnated);
            };
            if !step.iter().all(|v| v.is_finite()) {
                return Err(NewtonFailure::Stagnated);
            }
            let g_norm2 = g.norm_squared();
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..=opts.max_halvings {
                let cand = &*lambda + alpha * &step;
                if let Ok(gc) = self.residual(&cand, target) {
                    if gc.norm_squared() <= (1.0 - 1e-4 * alpha) * g_norm2 {
                        self.box_check(&cand).map_err(NewtonFailure::Hard)?;
                        *lambda = cand;
                        g = gc;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            stats.newton_iterations += 1;
            if !accepted {
                return Err(NewtonFailure::Stagnated);
            }
        }
        if g.amax() <= tol_abs {
            Ok(())
        } else {
            Err(NewtonFailure::Stagnated)
        }
    }

    fn residual(
        &self,
        lambda: &DVector<f64>,
        target: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        Ok(&self.w * self.point(lambda)? - target)
    }

    fn box_check(&self, lambda: &DVector<f64>) -> Result<()> {
        let x = self.point(lambda)?;
        if let Some((i, _)) =
            x.iter().enumerate().find(|(_, &v)| !(BOX_LO..=BOX_HI).contains(&v))
        {
            return Err(GmasError::BoxExit(i));
        }
        Ok(())
    }

    /// Predictor-corrector continuation from x* to x0 along the class
    /// representative K(delta) = delta x0 + (1 - delta) x*. At delta = 0 the
    /// solution is lambda = 0 exactly.
    fn homotopy(
        &self,
        lambda: &mut DVector<f64>,
        tol_abs: f64,
        opts: &SolveOptions,
        stats: &mut Stats,
    ) -> Result<()> {
        let mut delta = 0.0;
        let mut step = opts.homotopy_initial_step;
        while delta < 1.0 {
            let next = (delta + step).min(1.0);
            let target = &self.w * (next * &self.x0 + (1.0 - next) * &self.x_star);
            let mut cand = lambda.clone();
            match self.newton(&mut cand, &target, tol_abs, opts, stats) {
                Ok(()) => {
                    *lambda = cand;
                    delta = next;
                    stats.homotopy_steps += 1;
                    step = (step * 2.0).min(opts.homotopy_initial_step);
                }
                Err(NewtonFailure::Hard(e)) => return Err(e),
                Err(NewtonFailure::Stagnated) => {
                    step *= 0.5;
                    if step < opts.homotopy_step_floor {
                        return Err(GmasError::StepFloorReached);
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct Stats {
    homotopy_steps: usize,
    newton_iterations: usize,
}

enum NewtonFailure {
    /// Progress stalled; a smaller continuation step may still succeed.
    Stagnated,
    /// Unrecoverable (box exit).
    Hard(GmasError),
}

impl NewtonFailure {
    /// Saturation during evaluation is recoverable by shrinking the step.
    fn soft(e: GmasError) -> NewtonFailure {
        match e {
            GmasError::Saturation(_) => NewtonFailure::Stagnated,
            other => NewtonFailure::Hard(other),
        }
    }
}

/// Tolerance used to verify vertex balance of inputs and outputs.
const VB_TOL: f64 = 1e-7;

/// Finds the unique vertex-balanced steady state in the compatibility class of
/// `x0`, given one vertex-balanced point `x_star` of the network.
pub fn intersect_class_with_balanced_set(
    net: &GeneralizedNetwork,
    rates: &[f64],
    x_star: &[f64],
    x0: &[f64],
    opts: &SolveOptions,
) -> Result<BirchSolution> {
    let (ok, residuals) = is_vertex_balanced(net, rates, x_star, VB_TOL)?;
    if !ok {
        let max = residuals.iter().cloned().fold(0.0, f64::max);
        return Err(GmasError::NotVertexBalanced(max));
    }
    let problem = BirchProblem::from_network(net, x0, x_star)?;
    let solution = problem.solve(opts)?;
    let (ok, residuals) = is_vertex_balanced(net, rates, &solution.x, VB_TOL)?;
    if !ok {
        let max = residuals.iter().cloned().fold(0.0, f64::max);
        return Err(GmasError::NotVertexBalanced(max));
    }
    Ok(solution)
}
