//! 2-D quasi-static component maps (engine fuel rate, motor efficiencies).
//!
//! Maps are value grids over (speed rpm, torque Nm) with bilinear
//! interpolation. Queries outside the grid clamp to the boundary.
//!
//! File format: plain text, `#` comments; the first data row is the
//! ascending speed grid; every following row is a torque value followed by
//! one value per speed column.

use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyMap {
    speed_grid: Vec<f64>,
    torque_grid: Vec<f64>,
    /// values[torque_index][speed_index]
    values: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub enum MapError {
    NonMonotoneGrid { axis: &'static str },
    DimensionMismatch { expected: usize, got: usize },
    TooSmall,
    NonFiniteValue,
    Io(std::io::Error),
    Parse { line: usize, message: String },
}

impl fmt::Display for MapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapError::NonMonotoneGrid { axis } => {
                write!(f, "{axis} grid must be strictly increasing")
            }
            MapError::DimensionMismatch { expected, got } => {
                write!(f, "value row has {got} entries, expected {expected}")
            }
            MapError::TooSmall => write!(f, "map needs at least 2 points per axis"),
            MapError::NonFiniteValue => write!(f, "map contains a non-finite value"),
            MapError::Io(e) => write!(f, "map file: {e}"),
            MapError::Parse { line, message } => write!(f, "map file line {line}: {message}"),
        }
    }
}

impl std::error::Error for MapError {}

fn strictly_increasing(grid: &[f64]) -> bool {
    grid.windows(2).all(|w| w[0] < w[1])
}

impl EfficiencyMap {
    pub fn new(
        speed_grid: Vec<f64>,
        torque_grid: Vec<f64>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, MapError> {
        if speed_grid.len() < 2 || torque_grid.len() < 2 {
            return Err(MapError::TooSmall);
        }
        if !strictly_increasing(&speed_grid) {
            return Err(MapError::NonMonotoneGrid { axis: "speed" });
        }
        if !strictly_increasing(&torque_grid) {
            return Err(MapError::NonMonotoneGrid { axis: "torque" });
        }
        if values.len() != torque_grid.len() {
            return Err(MapError::DimensionMismatch {
                expected: torque_grid.len(),
                got: values.len(),
            });
        }
        for row in &values {
            if row.len() != speed_grid.len() {
                return Err(MapError::DimensionMismatch {
                    expected: speed_grid.len(),
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(MapError::NonFiniteValue);
            }
        }
        Ok(Self { speed_grid, torque_grid, values })
    }

    pub fn speed_grid(&self) -> &[f64] {
        &self.speed_grid
    }

    pub fn torque_grid(&self) -> &[f64] {
        &self.torque_grid
    }

    pub fn speed_range(&self) -> (f64, f64) {
        (self.speed_grid[0], *self.speed_grid.last().unwrap())
    }

    pub fn torque_range(&self) -> (f64, f64) {
        (self.torque_grid[0], *self.torque_grid.last().unwrap())
    }

    pub fn value_at(&self, torque_index: usize, speed_index: usize) -> f64 {
        self.values[torque_index][speed_index]
    }

    /// True when the query point lies outside the grid envelope (it will be
    /// clamped by [`lookup`](Self::lookup)).
    pub fn out_of_envelope(&self, speed: f64, torque: f64) -> bool {
        let (s_lo, s_hi) = self.speed_range();
        let (t_lo, t_hi) = self.torque_range();
        speed < s_lo || speed > s_hi || torque < t_lo || torque > t_hi
    }

    /// Bilinear interpolation; out-of-grid queries clamp to the boundary.
    pub fn lookup(&self, speed: f64, torque: f64) -> f64 {
        let (si, sf) = Self::locate(&self.speed_grid, speed);
        let (ti, tf) = Self::locate(&self.torque_grid, torque);
        let v00 = self.values[ti][si];
        let v01 = self.values[ti][si + 1];
        let v10 = self.values[ti + 1][si];
        let v11 = self.values[ti + 1][si + 1];
        let lo = v00 + (v01 - v00) * sf;
        let hi = v10 + (v11 - v10) * sf;
        lo + (hi - lo) * tf
    }

    /// Bracketing cell index and in-cell fraction, clamped to the grid.
    fn locate(grid: &[f64], x: f64) -> (usize, f64) {
        let x = x.clamp(grid[0], *grid.last().unwrap());
        // index of the last node <= x, capped so i+1 is valid
        let i = match grid.iter().position(|&g| g > x) {
            Some(p) => p - 1,
            None => grid.len() - 2,
        };
        let span = grid[i + 1] - grid[i];
        ((i), (x - grid[i]) / span)
    }

    pub fn parse(text: &str) -> Result<Self, MapError> {
        let mut speed_grid: Option<Vec<f64>> = None;
        let mut torque_grid = Vec::new();
        let mut values = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
            let nums = nums.map_err(|e: std::num::ParseFloatError| MapError::Parse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
            match speed_grid {
                None => speed_grid = Some(nums),
                Some(_) => {
                    if nums.len() < 2 {
                        return Err(MapError::Parse {
                            line: lineno + 1,
                            message: "row needs a torque value plus one entry per speed".into(),
                        });
                    }
                    torque_grid.push(nums[0]);
                    values.push(nums[1..].to_vec());
                }
            }
        }
        let speed_grid = speed_grid.ok_or(MapError::TooSmall)?;
        Self::new(speed_grid, torque_grid, values)
    }

    pub fn load(path: &Path) -> Result<Self, MapError> {
        let text = std::fs::read_to_string(path).map_err(MapError::Io)?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let speeds: Vec<String> = self.speed_grid.iter().map(|s| format!("{s}")).collect();
        out.push_str(&speeds.join(" "));
        out.push('\n');
        for (ti, t) in self.torque_grid.iter().enumerate() {
            // Display round-trips f64 exactly, so written maps reload bit-equal
            let mut row = vec![format!("{t}")];
            row.extend(self.values[ti].iter().map(|v| format!("{v}")));
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}
