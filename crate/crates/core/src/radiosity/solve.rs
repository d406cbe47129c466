use nalgebra::{DMatrix, DVector, QR};

use crate::error::{Error, Result};
use crate::radiosity::{EmissionVector, FormFactorMatrix};

/// Largest accepted relative residual `‖(I − RF)B − RE‖ / ‖RE‖`.
pub const RESIDUAL_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Systems up to this size use a dense QR factorization; larger ones
    /// fall back to Jacobi iteration.
    pub dense_limit: usize,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dense_limit: 2000,
            max_iterations: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiositySolution {
    /// Exitance per patch, lm/m².
    pub exitance: Vec<f64>,
    pub residual: f64,
}

impl RadiositySolution {
    /// Illuminance arriving at each patch: direct term plus `F·B`.
    pub fn incident(&self, ff: &FormFactorMatrix, direct: &[f64]) -> Vec<f64> {
        ff.apply(&self.exitance).into_iter().zip(direct).map(|(r, e)| r + e).collect()
    }
}

#[derive(Debug, Clone)]
enum Method {
    Dense(QR<f64, nalgebra::Dyn, nalgebra::Dyn>),
    Jacobi,
}

/// `(I − R·F)·B = R·E` for a fixed geometry and albedo, factorized once and
/// solvable for many source terms.
#[derive(Debug, Clone)]
pub struct RadiositySystem {
    ff: FormFactorMatrix,
    albedo: Vec<f64>,
    method: Method,
    max_iterations: usize,
}

impl RadiositySystem {
    pub fn new(ff: &FormFactorMatrix, albedo: &[f64], opts: SolverOptions) -> Result<Self> {
        if albedo.len() != ff.len() {
            return Err(Error::Dimension {
                what: "albedo vector",
                expected: ff.len(),
                got: albedo.len(),
            });
        }
        if let Some(a) = albedo.iter().find(|a| !(**a >= 0.0 && **a < 1.0)) {
            return Err(Error::InvalidArgument(format!("albedo {a} outside [0, 1)")));
        }
        let method = if ff.len() <= opts.dense_limit {
            Method::Dense(system_matrix(ff, albedo).qr())
        } else {
            Method::Jacobi
        };
        Ok(RadiositySystem {
            ff: ff.clone(),
            albedo: albedo.to_vec(),
            method,
            max_iterations: opts.max_iterations,
        })
    }

    pub fn form_factors(&self) -> &FormFactorMatrix {
        &self.ff
    }

    pub fn albedo(&self) -> &[f64] {
        &self.albedo
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.method, Method::Dense(_))
    }

    /// Solves for the exitance given the direct illuminance `direct`.
    pub fn solve(&self, direct: &[f64]) -> Result<RadiositySolution> {
        let n = self.ff.len();
        if direct.len() != n {
            return Err(Error::Dimension {
                what: "emission vector",
                expected: n,
                got: direct.len(),
            });
        }
        let rhs: Vec<f64> = direct.iter().zip(&self.albedo).map(|(e, r)| e * r).collect();
        let rhs_norm = norm(&rhs);
        if rhs_norm == 0.0 {
            return Ok(RadiositySolution {
                exitance: vec![0.0; n],
                residual: 0.0,
            });
        }
        let mut exitance = match &self.method {
            Method::Dense(qr) => qr
                .solve(&DVector::from_column_slice(&rhs))
                .map(|b| b.iter().copied().collect())
                .ok_or(Error::NonConvergence {
                    residual: f64::INFINITY,
                    luminaire: None,
                })?,
            Method::Jacobi => self.jacobi(&rhs, rhs_norm),
        };
        // the exact solution is non-negative; clear round-off
        for b in &mut exitance {
            if *b < 0.0 {
                *b = 0.0;
            }
        }
        let residual = self.residual(&exitance, &rhs) / rhs_norm;
        if !(residual < RESIDUAL_LIMIT) {
            return Err(Error::NonConvergence { residual, luminaire: None });
        }
        Ok(RadiositySolution { exitance, residual })
    }

    fn residual(&self, b: &[f64], rhs: &[f64]) -> f64 {
        let fb = self.ff.apply(b);
        let r: Vec<f64> = (0..b.len()).map(|i| b[i] - self.albedo[i] * fb[i] - rhs[i]).collect();
        norm(&r)
    }

    fn jacobi(&self, rhs: &[f64], rhs_norm: f64) -> Vec<f64> {
        let mut b = rhs.to_vec();
        for it in 0..self.max_iterations {
            let fb = self.ff.apply(&b);
            let next: Vec<f64> = (0..b.len()).map(|i| rhs[i] + self.albedo[i] * fb[i]).collect();
            b = next;
            if it % 8 == 7 && self.residual(&b, rhs) / rhs_norm < RESIDUAL_LIMIT * 1e-3 {
                break;
            }
        }
        b
    }
}

fn system_matrix(ff: &FormFactorMatrix, albedo: &[f64]) -> DMatrix<f64> {
    let n = ff.len();
    DMatrix::from_fn(n, n, |i, j| {
        let identity = if i == j { 1.0 } else { 0.0 };
        identity - albedo[i] * ff.get(i, j)
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves `(I − R·F)·B = R·E` for one source term.
pub fn solve_radiosity(ff: &FormFactorMatrix, albedo: &[f64], emission: &EmissionVector) -> Result<RadiositySolution> {
    RadiositySystem::new(ff, albedo, SolverOptions::default())?.solve(&emission.values)
}
