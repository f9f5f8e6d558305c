//! Ordinary least-squares line fits.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// `y ≈ slope·x + intercept` with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

impl LineFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Fit a line through `(x, y)` pairs. Needs two or more distinct `x` values.
pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(ModelError::DegenerateFit(format!(
            "{} point(s); at least 2 required",
            points.len()
        )));
    }
    let first_x = points[0].0;
    if points.iter().all(|&(x, _)| x == first_x) {
        return Err(ModelError::DegenerateFit(format!(
            "all {} abscissae equal {first_x}",
            points.len()
        )));
    }

    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - slope * x - intercept;
            r * r
        })
        .sum();
    // A constant response is fit exactly by a flat line.
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(LineFit {
        slope,
        intercept,
        r2,
    })
}
