use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grading {
    Uniform,
    /// Spacing shrinks by `ratio` from one cell to the next toward r = 0.
    Geometric {
        ratio: f64,
    },
}

/// Radial nodes on the nondimensional cylinder radius [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    grading: Grading,
}

impl RadialGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes strictly inside (0, 1).
    pub fn interior(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().copied().filter(|&r| r > 0.0 && r < 1.0)
    }

    /// Same grading with `2n - 1` nodes (every old node kept for uniform grids).
    pub fn refined(&self) -> RadialGrid {
        let grading = match self.grading {
            Grading::Uniform => Grading::Uniform,
            Grading::Geometric { ratio } => Grading::Geometric { ratio: ratio.sqrt() },
        };
        make_radial_grid(2 * self.nodes.len() - 1, grading).expect("refinement of a valid grid")
    }
}

pub fn make_radial_grid(n: usize, grading: Grading) -> Result<RadialGrid> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("radial grid needs n >= 2, got {n}")));
    }
    let cells = n - 1;
    let nodes = match grading {
        Grading::Uniform => (0..n)
            .map(|i| if i == cells { 1.0 } else { i as f64 / cells as f64 })
            .collect(),
        Grading::Geometric { ratio } => {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "geometric grading ratio must lie in (0, 1), got {ratio}"
                )));
            }
            // widths w_i = w_0 / ratio^i, i = 0..cells, summing to 1
            let widths: Vec<f64> = (0..cells).map(|i| ratio.powi((cells - 1 - i) as i32)).collect();
            let total: f64 = widths.iter().sum();
            let mut nodes = Vec::with_capacity(n);
            let mut acc = 0.0;
            nodes.push(0.0);
            for w in &widths[..cells - 1] {
                acc += w / total;
                nodes.push(acc);
            }
            nodes.push(1.0);
            nodes
        }
    };
    Ok(RadialGrid { nodes, grading })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeLevel {
    pub j: u32,
    pub t: f64,
    /// T − t, stored separately so it stays exact near blow-up.
    pub remaining: f64,
}

/// Times t_j = T(1 − 2^{−j}), j = 1..=J, accumulating toward the blow-up time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeLadder {
    final_time: f64,
    levels: Vec<TimeLevel>,
}

impl TimeLadder {
    pub fn new(final_time: f64, levels: u32) -> Result<Self> {
        if !(final_time > 0.0 && final_time <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "final time must lie in (0, 1/2], got {final_time}"
            )));
        }
        if !(1..=52).contains(&levels) {
            return Err(Error::InvalidArgument(format!(
                "ladder depth must lie in 1..=52 (double precision), got {levels}"
            )));
        }
        let levels = (1..=levels)
            .map(|j| {
                let remaining = final_time * 0.5f64.powi(j as i32);
                TimeLevel {
                    j,
                    t: final_time - remaining,
                    remaining,
                }
            })
            .collect();
        Ok(Self { final_time, levels })
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn levels(&self) -> &[TimeLevel] {
        &self.levels
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels.iter().map(|l| l.t)
    }

    pub fn depth(&self) -> u32 {
        self.levels.len() as u32
    }
}
