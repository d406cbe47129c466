use rayon::prelude::*;

use crate::accel::AccelIndex;
use crate::error::{Error, Result};
use crate::radiosity::{form_factor_matrix, luminaire_emission, FormFactorMatrix, RadiositySolution, RadiositySystem, SolverOptions};
use crate::scene::Scene;

/// One radiosity solution per luminaire at full output; any dim vector is
/// served by linear recombination.
#[derive(Debug, Clone)]
pub struct LuminaireBasis {
    luminaire_ids: Vec<u32>,
    emissions: Vec<Vec<f64>>,
    solutions: Vec<RadiositySolution>,
    system: RadiositySystem,
}

impl LuminaireBasis {
    /// Builds the basis from precomputed form factors (e.g. from a cache).
    pub fn from_form_factors(scene: &Scene, accel: &AccelIndex, ff: &FormFactorMatrix, opts: SolverOptions) -> Result<Self> {
        if accel.patches().len() != scene.patches.len() || ff.len() != scene.patches.len() {
            return Err(Error::Dimension {
                what: "patches in index / form factors",
                expected: scene.patches.len(),
                got: ff.len(),
            });
        }
        let system = RadiositySystem::new(ff, &scene.albedo(), opts)?;
        let per_luminaire: Vec<(Vec<f64>, RadiositySolution)> = (0..scene.luminaires.len())
            .into_par_iter()
            .map(|l| {
                let emission = luminaire_emission(scene, l, accel);
                let solution = system.solve(&emission).map_err(|e| match e {
                    Error::NonConvergence { residual, .. } => Error::NonConvergence {
                        residual,
                        luminaire: Some(scene.luminaires[l].id),
                    },
                    other => other,
                })?;
                Ok((emission, solution))
            })
            .collect::<Result<_>>()?;
        let (emissions, solutions) = per_luminaire.into_iter().unzip();
        Ok(LuminaireBasis {
            luminaire_ids: scene.luminaires.iter().map(|l| l.id).collect(),
            emissions,
            solutions,
            system,
        })
    }

    pub fn luminaire_ids(&self) -> &[u32] {
        &self.luminaire_ids
    }

    pub fn len(&self) -> usize {
        self.luminaire_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.luminaire_ids.is_empty()
    }

    pub fn form_factors(&self) -> &FormFactorMatrix {
        self.system.form_factors()
    }

    pub fn system(&self) -> &RadiositySystem {
        &self.system
    }

    /// Direct illuminance of luminaire `l` alone at full output.
    pub fn emission(&self, l: usize) -> &[f64] {
        &self.emissions[l]
    }

    /// Solution for luminaire `l` alone at full output.
    pub fn solution(&self, l: usize) -> &RadiositySolution {
        &self.solutions[l]
    }

    /// Largest per-luminaire solver residual.
    pub fn max_residual(&self) -> f64 {
        self.solutions.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    fn check_dims(&self, dims: &[f64]) -> Result<()> {
        if dims.len() != self.len() {
            return Err(Error::Dimension {
                what: "dim vector",
                expected: self.len(),
                got: dims.len(),
            });
        }
        Ok(())
    }

    fn combine<'a>(&'a self, dims: &[f64], pick: impl Fn(usize) -> &'a [f64]) -> Result<Vec<f64>> {
        self.check_dims(dims)?;
        let n = self.system.form_factors().len();
        let mut out = vec![0.0; n];
        for (l, d) in dims.iter().enumerate() {
            if *d == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(pick(l)) {
                *o += d * v;
            }
        }
        Ok(out)
    }

    /// `Σ_l d_l · B⁽ˡ⁾`
    pub fn exitance(&self, dims: &[f64]) -> Result<Vec<f64>> {
        self.combine(dims, |l| &self.solutions[l].exitance)
    }

    /// `Σ_l d_l · E⁽ˡ⁾`
    pub fn direct(&self, dims: &[f64]) -> Result<Vec<f64>> {
        self.combine(dims, |l| &self.emissions[l])
    }

    /// Illuminance arriving at each patch: direct plus interreflected.
    pub fn incident(&self, dims: &[f64]) -> Result<Vec<f64>> {
        let direct = self.direct(dims)?;
        let fb = self.system.form_factors().apply(&self.exitance(dims)?);
        Ok(direct.iter().zip(fb).map(|(e, r)| e + r).collect())
    }

    /// Solves the full system directly for `dims` (no recombination).
    pub fn solve_direct(&self, dims: &[f64]) -> Result<RadiositySolution> {
        self.system.solve(&self.direct(dims)?)
    }
}

/// Form factors plus one solve per luminaire.
pub fn build_basis(scene: &Scene, accel: &AccelIndex, n_samples: usize) -> Result<LuminaireBasis> {
    let ff = match scene.patches.len() {
        0 => return Err(Error::Empty("scene has no patches")),
        // a lone patch sees nothing
        1 => FormFactorMatrix::from_parts(vec![0.0], vec![scene.patches[0].area()])?,
        _ => form_factor_matrix(&scene.patches, accel, n_samples)?,
    };
    LuminaireBasis::from_form_factors(scene, accel, &ff, SolverOptions::default())
}
