//! A fully assembled problem: grid, ambient flow, metric and generator.

use std::sync::Arc;

use crate::ambient::{AmbientField, Preset};
use crate::elliptic::{DirichletSolver, NeumannSolver};
use crate::error::Result;
use crate::generator::{assemble_generator, GeneratorMatrices, Physics};
use crate::grid::Grid;
use crate::metric::WeightedMetric;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabParams {
    pub grid: Grid,
    pub physics: Physics,
    pub preset: Preset,
    pub amplitude: f64,
    pub c1: f64,
    pub c2: f64,
}

impl LabParams {
    pub fn new(grid: Grid) -> Self {
        Self { grid, physics: Physics::default(), preset: Preset::Zero, amplitude: 0.0, c1: 1.0, c2: 1.0 }
    }

    pub fn with_ambient(mut self, preset: Preset, amplitude: f64) -> Self {
        self.preset = preset;
        self.amplitude = amplitude;
        self
    }

    pub fn with_constants(mut self, c1: f64, c2: f64) -> Self {
        self.c1 = c1;
        self.c2 = c2;
        self
    }
}

pub struct Lab {
    pub params: LabParams,
    pub ambient: AmbientField,
    pub metric: WeightedMetric,
    pub gen: GeneratorMatrices,
}

impl Lab {
    pub fn new(params: LabParams) -> Result<Self> {
        crate::linalg::sequential_kernels();
        let g = params.grid;
        let ambient = AmbientField::preset(params.preset, params.amplitude, &g)?;
        let metric = WeightedMetric::new(
            &ambient,
            params.c1,
            params.c2,
            Arc::new(NeumannSolver::new(&g)?),
            Arc::new(DirichletSolver::new(&g)?),
        )?;
        let gen = assemble_generator(params.physics, &ambient, &metric)?;
        Ok(Self { params, ambient, metric, gen })
    }

    pub fn grid(&self) -> &Grid {
        &self.params.grid
    }

    pub fn dim(&self) -> usize {
        self.gen.dim()
    }
}
