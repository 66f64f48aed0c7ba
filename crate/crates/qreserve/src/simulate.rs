//! Synthetic triangle generation: draw a full I x I grid from a model at a
//! known parameter vector, splitting the observed upper triangle from the
//! lower-triangle holdout. Drives the simulation-based calibration studies
//! and ships the bundled reference data.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::Result;
use crate::model::{Model, ModelSpec, ParamVector};
use crate::triangle::{build_index_sets, Cell, Triangle};

/// A simulated grid: observed upper triangle plus the lower-triangle truth.
#[derive(Debug, Clone)]
pub struct SimulatedTriangle {
    pub upper: Triangle,
    /// Holdout cells `(i, j, amount)` in row-major lower-triangle order.
    pub lower: Vec<(usize, usize, f64)>,
}

impl SimulatedTriangle {
    /// Holdout serialized in the same `i,j,amount` long format.
    pub fn lower_csv(&self) -> String {
        let mut out = String::from("i,j,amount\n");
        for (i, j, y) in &self.lower {
            out.push_str(&format!("{i},{j},{y}\n"));
        }
        out
    }
}

/// Draw one triangle of size `i_count` from `spec` at `theta` (quantile
/// transform per cell, currency scale). Deterministic in `seed`.
pub fn simulate_triangle(
    spec: &ModelSpec,
    theta: &ParamVector,
    i_count: usize,
    seed: u64,
) -> Result<SimulatedTriangle> {
    // Bind the spec to a placeholder triangle: the binding only supplies
    // dimensions and design rows, never data, for simulation.
    let (upper_cells, lower_cells) = build_index_sets(i_count)?;
    let ones: Vec<(usize, usize, f64)> = upper_cells.iter().map(|&(i, j)| (i, j, 1.0)).collect();
    let placeholder = Triangle::from_cells(i_count, &ones)?;
    let model = Model::new(spec.clone(), &placeholder, 0.01)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut draw_cell = |&(i, j): &Cell| -> Result<f64> {
        model.cell_dist(theta, i, j)?.sample(&mut rng)
    };
    let mut upper_rows = Vec::with_capacity(upper_cells.len());
    for cell in &upper_cells {
        let y = draw_cell(cell)?;
        upper_rows.push((cell.0, cell.1, y));
    }
    let mut lower = Vec::with_capacity(lower_cells.len());
    for cell in &lower_cells {
        let y = draw_cell(cell)?;
        lower.push((cell.0, cell.1, y));
    }
    Ok(SimulatedTriangle {
        upper: Triangle::from_cells(i_count, &upper_rows)?,
        lower,
    })
}
