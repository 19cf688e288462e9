//! Opinion dynamics and their closed-form influence matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::InfluenceMatrix;

const STOCHASTIC_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;

/// Which update rule generates the expressed predictions.
#[derive(Debug, Clone, PartialEq)]
pub enum Dynamics {
    /// `z(t) = W z(t-1)` run to consensus.
    DeGroot { w: DMatrix<f64> },
    /// Friedkin–Johnsen with unit stubbornness, run to its fixed point.
    Fj { w: DMatrix<f64> },
    /// `z(T) = W(T) ⋯ W(1) ŷ` for explicit row-stochastic factors.
    FiniteProduct { factors: Vec<DMatrix<f64>> },
    /// `T` steps of `z_i ← C_i (Σ_j W_ij z_j + α_i ŷ_i)` starting from `ŷ`.
    FjFiniteSteps {
        w: DMatrix<f64>,
        alpha: Option<Vec<f64>>,
        steps: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsSpec {
    pub dynamics: Dynamics,
    pub tolerance: f64,
    /// Upper bound on effective matrix multiplications (closed forms) or
    /// update steps (simulation).
    pub max_iter: usize,
}

impl DynamicsSpec {
    pub fn new(dynamics: Dynamics) -> Self {
        Self {
            dynamics,
            tolerance: 1e-10,
            max_iter: 1_000_000,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn n(&self) -> usize {
        match &self.dynamics {
            Dynamics::DeGroot { w } | Dynamics::Fj { w } | Dynamics::FjFiniteSteps { w, .. } => {
                w.nrows()
            }
            Dynamics::FiniteProduct { factors } => factors.first().map_or(0, |f| f.nrows()),
        }
    }

    /// Closed-form `W̄` for the configured dynamics.
    pub fn influence_matrix(&self) -> Result<InfluenceMatrix> {
        match &self.dynamics {
            Dynamics::DeGroot { w } => degroot_limit(w, self.tolerance, self.max_iter),
            Dynamics::Fj { w } => fj_limit(w),
            Dynamics::FiniteProduct { factors } => finite_product(factors),
            Dynamics::FjFiniteSteps { w, alpha, steps } => {
                fj_finite_steps(w, alpha.as_deref(), *steps)
            }
        }
    }

    /// Runs the update rule on `yhat` until successive iterates differ by at
    /// most the tolerance in the max norm. Finite variants run exactly their
    /// step count.
    pub fn simulate_until_converged(&self, yhat: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        check_len(yhat.len(), n)?;
        let y0 = DVector::from_column_slice(yhat);
        let z = match &self.dynamics {
            Dynamics::DeGroot { w } => {
                check_square(w)?;
                check_row_stochastic(w)?;
                self.iterate(y0, |z| w * z)?
            }
            Dynamics::Fj { w } => {
                check_nonneg(w)?;
                let c = normalizers(w);
                let y = y0.clone();
                self.iterate(y0, |z| (w * z + &y).component_mul(&c))?
            }
            Dynamics::FiniteProduct { factors } => {
                check_factors(factors)?;
                factors.iter().fold(y0, |z, f| f * z)
            }
            Dynamics::FjFiniteSteps { w, alpha, steps } => {
                check_nonneg(w)?;
                let c = normalizers(w);
                let a = alpha_vec(alpha.as_deref(), n)?;
                let b = a.component_mul(&y0);
                (0..*steps).fold(y0, |z, _| (w * z + &b).component_mul(&c))
            }
        };
        Ok(z.iter().copied().collect())
    }

    fn iterate(
        &self,
        mut z: DVector<f64>,
        step: impl Fn(&DVector<f64>) -> DVector<f64>,
    ) -> Result<DVector<f64>> {
        let mut residual = f64::INFINITY;
        for _ in 0..self.max_iter {
            let next = step(&z);
            residual = (&next - &z).amax();
            z = next;
            if residual <= self.tolerance {
                return Ok(z);
            }
        }
        Err(Error::NonConvergent {
            iterations: self.max_iter,
            residual,
        })
    }
}

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_square(w: &DMatrix<f64>) -> Result<()> {
    check_len(w.ncols(), w.nrows())?;
    if w.nrows() == 0 {
        return Err(Error::InvalidMatrix("matrix must have at least one row".into()));
    }
    Ok(())
}

fn check_nonneg(w: &DMatrix<f64>) -> Result<()> {
    check_square(w)?;
    if let Some(v) = w.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidMatrix(format!(
            "weight {v} must be finite and non-negative"
        )));
    }
    Ok(())
}

/// Fails unless every row of `w` sums to 1 within `1e-9`.
pub fn check_row_stochastic(w: &DMatrix<f64>) -> Result<()> {
    check_nonneg(w)?;
    for (row, r) in w.row_iter().enumerate() {
        let sum = r.sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::NotRowStochastic { row, sum });
        }
    }
    Ok(())
}

fn check_factors(factors: &[DMatrix<f64>]) -> Result<usize> {
    let first = factors
        .first()
        .ok_or_else(|| Error::InvalidParameter("at least one factor is required".into()))?;
    let n = first.nrows();
    for f in factors {
        check_len(f.nrows(), n)?;
        check_row_stochastic(f)?;
    }
    Ok(n)
}

fn normalizers(w: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(w.nrows(), w.row_iter().map(|r| 1.0 / (1.0 + r.sum())))
}

fn alpha_vec(alpha: Option<&[f64]>, n: usize) -> Result<DVector<f64>> {
    match alpha {
        None => Ok(DVector::from_element(n, 1.0)),
        Some(a) => {
            check_len(a.len(), n)?;
            if a.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidParameter(
                    "stubbornness must be finite and non-negative".into(),
                ));
            }
            Ok(DVector::from_column_slice(a))
        }
    }
}

/// Max row absolute sum.
fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Combinatorial Laplacian `D − W` with `D = diag(row sums)`.
pub fn laplacian(w: &DMatrix<f64>) -> DMatrix<f64> {
    let mut l = -w.clone();
    for (i, r) in w.row_iter().enumerate() {
        l[(i, i)] += r.sum();
    }
    l
}

/// `lim W^t` by repeated squaring. Counts `2^s` effective multiplications
/// after `s` squarings and gives up once that exceeds `max_iter`.
pub fn degroot_limit(w: &DMatrix<f64>, tolerance: f64, max_iter: usize) -> Result<InfluenceMatrix> {
    check_row_stochastic(w)?;
    let mut p = w.clone();
    let mut power: usize = 1;
    let mut residual = f64::INFINITY;
    while power.saturating_mul(2) <= max_iter.max(1) {
        let next = &p * &p;
        power *= 2;
        let diff = inf_norm(&(&next - &p));
        p = next;
        if diff <= tolerance {
            residual = inf_norm(&(w * &p - &p));
            if residual <= tolerance {
                return InfluenceMatrix::new(p.map(|v| v.max(0.0)));
            }
        }
    }
    if residual.is_infinite() {
        residual = inf_norm(&(w * &p - &p));
    }
    Err(Error::NonConvergent {
        iterations: power,
        residual,
    })
}

/// `(I + L)^{-1}` for a symmetric non-negative `W`, one LU solve per column.
pub fn fj_limit(w: &DMatrix<f64>) -> Result<InfluenceMatrix> {
    check_nonneg(w)?;
    let n = w.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (w[(i, j)], w[(j, i)]);
            if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    let m = DMatrix::identity(n, n) + laplacian(w);
    let lu = m.lu();
    let mut inv = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        let col = lu.solve(&e).ok_or(Error::SingularSystem)?;
        inv.set_column(j, &col);
    }
    if inv.iter().any(|v| !v.is_finite() || *v < -1e-12) {
        return Err(Error::SingularSystem);
    }
    InfluenceMatrix::new(inv.map(|v| v.max(0.0)))
}

/// `W(T) ⋯ W(1)` for row-stochastic factors given in time order.
pub fn finite_product(factors: &[DMatrix<f64>]) -> Result<InfluenceMatrix> {
    let n = check_factors(factors)?;
    let p = factors
        .iter()
        .fold(DMatrix::identity(n, n), |acc, f| f * acc);
    InfluenceMatrix::new(p)
}

/// Linear map of `steps` finite FJ updates: `W̄_0 = I`,
/// `W̄_t = diag(C) W W̄_{t-1} + diag(C α)`.
pub fn fj_finite_steps(w: &DMatrix<f64>, alpha: Option<&[f64]>, steps: usize) -> Result<InfluenceMatrix> {
    check_nonneg(w)?;
    let n = w.nrows();
    let c = normalizers(w);
    let a = DMatrix::from_fn(n, n, |i, j| c[i] * w[(i, j)]);
    let b = DMatrix::from_diagonal(&c.component_mul(&alpha_vec(alpha, n)?));
    let mut p = DMatrix::identity(n, n);
    for _ in 0..steps {
        p = &a * p + &b;
    }
    InfluenceMatrix::new(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    #[test]
    fn degroot_trivial_cases() {
        let half = DMatrix::from_element(2, 2, 0.5);
        let w = degroot_limit(&half, 1e-10, 1_000_000).unwrap();
        assert!(close(w.as_dmatrix(), &half, 1e-15));
        let id = DMatrix::<f64>::identity(3, 3);
        let w = degroot_limit(&id, 1e-10, 1_000_000).unwrap();
        assert_eq!(w.as_dmatrix(), &id);
    }

    #[test]
    fn degroot_periodic_chain_fails() {
        let flip = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            degroot_limit(&flip, 1e-10, 1_000_000),
            Err(Error::NonConvergent { .. })
        ));
        let spec = DynamicsSpec::new(Dynamics::DeGroot { w: flip }).with_max_iter(1000);
        assert!(matches!(
            spec.simulate_until_converged(&[1.0, -1.0]),
            Err(Error::NonConvergent { .. })
        ));
    }

    #[test]
    fn degroot_rejects_substochastic() {
        let w = DMatrix::from_row_slice(2, 2, &[0.5, 0.4, 0.5, 0.5]);
        assert!(matches!(
            degroot_limit(&w, 1e-10, 100),
            Err(Error::NotRowStochastic { row: 0, .. })
        ));
    }

    #[test]
    fn fj_single_edge() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let wbar = fj_limit(&w).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]);
        assert!(close(wbar.as_dmatrix(), &want, 1e-15));
        assert_eq!(fj_limit(&DMatrix::zeros(3, 3)).unwrap(), InfluenceMatrix::identity(3));
    }

    #[test]
    fn fj_rejects_asymmetric() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(fj_limit(&w), Err(Error::NotSymmetric { row: 0, col: 1 })));
    }

    #[test]
    fn finite_product_order() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]);
        // z(2) = B A ŷ: A copies ŷ_0 everywhere, B then copies the second slot
        let p = finite_product(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(p.as_dmatrix(), &(&b * &a));
        assert_eq!(finite_product(std::slice::from_ref(&a)).unwrap().as_dmatrix(), &a);
        assert!(finite_product(&[]).is_err());
    }

    #[test]
    fn fj_finite_trivial() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 1.0, 0.0]);
        assert_eq!(fj_finite_steps(&w, None, 0).unwrap(), InfluenceMatrix::identity(2));
        assert_eq!(
            fj_finite_steps(&DMatrix::zeros(2, 2), None, 1).unwrap(),
            InfluenceMatrix::identity(2)
        );
    }

    #[test]
    fn simulate_trivial() {
        let spec = DynamicsSpec::new(Dynamics::DeGroot {
            w: DMatrix::from_element(2, 2, 0.5),
        });
        assert_eq!(spec.simulate_until_converged(&[1.0, -1.0]).unwrap(), vec![0.0, 0.0]);
        let spec = DynamicsSpec::new(Dynamics::Fj { w: DMatrix::zeros(3, 3) });
        assert_eq!(
            spec.simulate_until_converged(&[1.0, -1.0, 1.0]).unwrap(),
            vec![1.0, -1.0, 1.0]
        );
    }
}
