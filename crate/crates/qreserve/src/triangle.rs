//! Run-off triangle data model: index sets, log transformation, CSV
//! ingestion, and regression design rows.
//!
//! Cells are indexed by accident year `i` and development year `j`, both
//! 1-based in `1..=I`. The observed (upper) region is `i + j <= I + 1`; the
//! region to predict (lower) is the complement of that within the I x I
//! grid. Storage is a dense I x I grid with an observed mask — triangles are
//! small, so density wins over sparse structures.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{LocationStructure, ModelSpec, ScaleStructure, ShapeStructure};

/// One cell index pair (accident year, development year), 1-based.
pub type Cell = (usize, usize);

/// Upper/lower index-set partition of the I x I grid.
///
/// The upper set has exactly I(I+1)/2 members.
pub fn build_index_sets(i_count: usize) -> Result<(Vec<Cell>, Vec<Cell>)> {
    if i_count == 0 {
        return Err(Error::InvalidDimension(
            "triangle needs at least one accident year".into(),
        ));
    }
    let mut upper = Vec::with_capacity(i_count * (i_count + 1) / 2);
    let mut lower = Vec::new();
    for i in 1..=i_count {
        for j in 1..=i_count {
            if i + j <= i_count + 1 {
                upper.push((i, j));
            } else {
                lower.push((i, j));
            }
        }
    }
    debug_assert_eq!(upper.len(), i_count * (i_count + 1) / 2);
    Ok((upper, lower))
}

// ---------------------------------------------------------------------------
// Triangle
// ---------------------------------------------------------------------------

/// Observed claim amounts on the upper triangle of an I x I grid.
#[derive(Debug, Clone)]
pub struct Triangle {
    i_count: usize,
    amounts: Vec<f64>, // dense row-major I x I; unobserved cells hold NaN
}

impl Triangle {
    /// Build from long-format rows `(i, j, amount)`.
    ///
    /// Every upper-triangle cell must appear exactly once; duplicates and
    /// missing cells are errors, as are negative or non-finite amounts.
    pub fn from_cells(i_count: usize, cells: &[(usize, usize, f64)]) -> Result<Self> {
        if i_count == 0 {
            return Err(Error::InvalidDimension(
                "triangle needs at least one accident year".into(),
            ));
        }
        let mut amounts = vec![f64::NAN; i_count * i_count];
        let mut seen: HashSet<Cell> = HashSet::new();
        for &(i, j, y) in cells {
            if i < 1 || j < 1 || i > i_count || j > i_count {
                return Err(Error::InvalidIndex(format!(
                    "cell ({i},{j}) outside 1..={i_count}"
                )));
            }
            if i + j > i_count + 1 {
                return Err(Error::InvalidData(format!(
                    "cell ({i},{j}) lies in the unobserved lower triangle"
                )));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidData(format!("duplicate cell ({i},{j})")));
            }
            if !y.is_finite() || y < 0.0 {
                return Err(Error::InvalidData(format!(
                    "amount {y} at ({i},{j}) must be finite and >= 0"
                )));
            }
            amounts[(i - 1) * i_count + (j - 1)] = y;
        }
        let expected = i_count * (i_count + 1) / 2;
        if seen.len() != expected {
            return Err(Error::InvalidData(format!(
                "expected {expected} observed cells for I={i_count}, got {}",
                seen.len()
            )));
        }
        Ok(Self { i_count, amounts })
    }

    /// Parse the long-format CSV `i,j,amount` (header required, `#` comments
    /// and blank lines skipped). The triangle size is the largest accident
    /// year present.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows: Vec<(usize, usize, f64)> = Vec::new();
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::InvalidData("empty triangle CSV".into()))?;
        let header_fields: Vec<&str> = header.split(',').map(str::trim).collect();
        if header_fields != ["i", "j", "amount"] {
            return Err(Error::InvalidData(format!(
                "triangle CSV header must be 'i,j,amount', got '{header}'"
            )));
        }
        for (line_no, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::InvalidData(format!(
                    "line {line_no}: expected 3 fields, got {}",
                    fields.len()
                )));
            }
            let i: usize = fields[0]
                .parse()
                .map_err(|_| Error::InvalidData(format!("line {line_no}: bad i '{}'", fields[0])))?;
            let j: usize = fields[1]
                .parse()
                .map_err(|_| Error::InvalidData(format!("line {line_no}: bad j '{}'", fields[1])))?;
            let y: f64 = fields[2].parse().map_err(|_| {
                Error::InvalidData(format!("line {line_no}: bad amount '{}'", fields[2]))
            })?;
            rows.push((i, j, y));
        }
        let i_count = rows.iter().map(|r| r.0.max(r.1)).max().unwrap_or(0);
        Self::from_cells(i_count, &rows)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    /// Serialize back to the long-format CSV (deterministic cell order).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("i,j,amount\n");
        for (i, j) in self.upper_cells() {
            out.push_str(&format!("{i},{j},{}\n", self.amount(i, j).unwrap()));
        }
        out
    }

    /// Number of accident years I (= number of development years).
    pub fn i_count(&self) -> usize {
        self.i_count
    }

    pub fn n_observed(&self) -> usize {
        self.i_count * (self.i_count + 1) / 2
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        i >= 1 && j >= 1 && i <= self.i_count && j <= self.i_count && i + j <= self.i_count + 1
    }

    /// Observed amount at (i, j), if the cell is in the upper triangle.
    pub fn amount(&self, i: usize, j: usize) -> Option<f64> {
        if self.is_observed(i, j) {
            Some(self.amounts[(i - 1) * self.i_count + (j - 1)])
        } else {
            None
        }
    }

    pub fn upper_cells(&self) -> Vec<Cell> {
        build_index_sets(self.i_count).expect("i_count >= 1").0
    }

    pub fn lower_cells(&self) -> Vec<Cell> {
        build_index_sets(self.i_count).expect("i_count >= 1").1
    }

    /// Observed amounts in upper-cell order.
    pub fn observed_values(&self) -> Vec<f64> {
        self.upper_cells()
            .iter()
            .map(|&(i, j)| self.amount(i, j).unwrap())
            .collect()
    }

    /// Copy with amounts floored at `floor` (zero-claim handling for
    /// positive-support families).
    pub fn floored(&self, floor: f64) -> Result<Self> {
        if !(floor > 0.0) {
            return Err(Error::InvalidData(format!("floor {floor} must be > 0")));
        }
        let mut t = self.clone();
        for v in t.amounts.iter_mut() {
            if v.is_finite() {
                *v = v.max(floor);
            }
        }
        Ok(t)
    }
}

// ---------------------------------------------------------------------------
// Log triangle
// ---------------------------------------------------------------------------

/// Log-transformed triangle: `y* = ln(max(y, floor))` per observed cell.
#[derive(Debug, Clone)]
pub struct LogTriangle {
    i_count: usize,
    values: Vec<f64>,
    floor: f64,
}

/// Log-transform a triangle, replacing amounts below `floor` by `floor`
/// before taking logs so zero claims stay finite.
pub fn log_transform(t: &Triangle, floor: f64) -> Result<LogTriangle> {
    if !(floor > 0.0) || !floor.is_finite() {
        return Err(Error::InvalidData(format!("floor {floor} must be > 0")));
    }
    let i_count = t.i_count();
    let mut values = vec![f64::NAN; i_count * i_count];
    for (i, j) in t.upper_cells() {
        let y = t.amount(i, j).unwrap();
        if y < 0.0 {
            return Err(Error::InvalidData(format!(
                "negative amount {y} at ({i},{j})"
            )));
        }
        values[(i - 1) * i_count + (j - 1)] = y.max(floor).ln();
    }
    Ok(LogTriangle {
        i_count,
        values,
        floor,
    })
}

impl LogTriangle {
    pub fn i_count(&self) -> usize {
        self.i_count
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        if i >= 1 && j >= 1 && i <= self.i_count && i + j <= self.i_count + 1 {
            Some(self.values[(i - 1) * self.i_count + (j - 1)])
        } else {
            None
        }
    }

    pub fn upper_cells(&self) -> Vec<Cell> {
        build_index_sets(self.i_count).expect("i_count >= 1").0
    }

    /// Log values in upper-cell order.
    pub fn observed_values(&self) -> Vec<f64> {
        self.upper_cells()
            .iter()
            .map(|&(i, j)| self.value(i, j).unwrap())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Design rows
// ---------------------------------------------------------------------------

/// Covariate rows for one cell: location covariates, scale covariates and
/// shape covariates (accident dummies only), excluding intercepts.
///
/// ANOVA dummy blocks drop level 1, so rows at i = 1 (or j = 1) are all-zero
/// in the corresponding block.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignRow {
    pub location: Vec<f64>,
    pub scale: Vec<f64>,
    pub shape: Vec<f64>,
}

/// Nelson-Siegel slope basis `F1(j) = (1 - e^(-lambda j)) / (lambda j)`.
pub fn ns_basis_f1(j: f64, lambda: f64) -> f64 {
    let x = lambda * j;
    if x.abs() < 1e-8 {
        // limit as x -> 0
        1.0 - 0.5 * x
    } else {
        (1.0 - (-x).exp()) / x
    }
}

/// Nelson-Siegel curvature basis `F2(j) = F1(j) - e^(-lambda j)`.
pub fn ns_basis_f2(j: f64, lambda: f64) -> f64 {
    ns_basis_f1(j, lambda) - (-lambda * j).exp()
}

fn anova_dummies(level: usize, i_count: usize) -> Vec<f64> {
    // Levels 2..=I, level 1 dropped for identification.
    let mut v = vec![0.0; i_count - 1];
    if level >= 2 {
        v[level - 2] = 1.0;
    }
    v
}

/// Design row for cell (i, j) under the given model structures.
pub fn design_row(spec: &ModelSpec, i: usize, j: usize, i_count: usize) -> Result<DesignRow> {
    if i < 1 || j < 1 || i > i_count || j > i_count {
        return Err(Error::InvalidIndex(format!(
            "cell ({i},{j}) outside 1..={i_count}"
        )));
    }
    let location = match spec.location {
        LocationStructure::LinearTrend => vec![i as f64, j as f64],
        LocationStructure::NelsonSiegel => {
            if !(spec.lambda > 0.0) {
                return Err(Error::Parameter(format!(
                    "basis decay lambda {} must be > 0",
                    spec.lambda
                )));
            }
            vec![ns_basis_f1(j as f64, spec.lambda), ns_basis_f2(j as f64, spec.lambda)]
        }
        LocationStructure::Anova | LocationStructure::AnovaAtLevel => {
            let mut v = anova_dummies(i, i_count);
            v.extend(anova_dummies(j, i_count));
            v
        }
    };
    let scale = match spec.scale {
        ScaleStructure::Constant | ScaleStructure::Unspecified => Vec::new(),
        ScaleStructure::Accident => anova_dummies(i, i_count),
        ScaleStructure::Development => anova_dummies(j, i_count),
        ScaleStructure::Both => {
            let mut v = anova_dummies(i, i_count);
            v.extend(anova_dummies(j, i_count));
            v
        }
    };
    let shape = match spec.shape {
        ShapeStructure::Constant => Vec::new(),
        ShapeStructure::AccidentYear => anova_dummies(i, i_count),
    };
    Ok(DesignRow {
        location,
        scale,
        shape,
    })
}
