//! Log-log power-law fitting for ε sweeps.

use crate::error::{Error, Result};
use serde::Serialize;

/// Least-squares fit of `log|value|` against `log ε` on a trimmed window.
#[derive(Clone, Debug, Serialize)]
pub struct RateFit {
    /// Strictly decreasing ε grid (full sweep, not just the window).
    pub eps_grid: Vec<f64>,
    /// |functional| per ε, aligned with `eps_grid`; NaN marks excluded points.
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Indices of `eps_grid` actually used in the regression.
    pub window: Vec<usize>,
}

impl RateFit {
    /// Fit on the window that drops the `drop_largest` biggest ε values
    /// (pre-asymptotic regime) and every value below `noise_floor`. If the
    /// trimmed window keeps fewer than 3 points, the largest-ε drop is
    /// abandoned and all above-floor points are used instead.
    pub fn fit(
        eps_grid: &[f64],
        values: &[f64],
        drop_largest: usize,
        noise_floor: f64,
    ) -> Result<RateFit> {
        if eps_grid.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} grid points but {} values",
                eps_grid.len(),
                values.len()
            )));
        }
        if eps_grid.windows(2).any(|w| w[1] >= w[0]) || eps_grid.iter().any(|&e| e <= 0.0) {
            return Err(Error::InvalidArgument(
                "epsilon grid must be positive and strictly decreasing".into(),
            ));
        }
        let usable = |i: usize| {
            let v = values[i].abs();
            v.is_finite() && v > noise_floor
        };
        let mut window: Vec<usize> = (drop_largest.min(eps_grid.len())..eps_grid.len())
            .filter(|&i| usable(i))
            .collect();
        if window.len() < 3 {
            window = (0..eps_grid.len()).filter(|&i| usable(i)).collect();
        }
        if window.len() < 2 {
            return Err(Error::NoConvergence(format!(
                "only {} usable sweep points above the noise floor {noise_floor}",
                window.len()
            )));
        }

        let xs: Vec<f64> = window.iter().map(|&i| eps_grid[i].ln()).collect();
        let ys: Vec<f64> = window.iter().map(|&i| values[i].abs().ln()).collect();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };

        Ok(RateFit {
            eps_grid: eps_grid.to_vec(),
            values: values.to_vec(),
            slope,
            intercept,
            r_squared,
            window,
        })
    }
}

/// Geometric grid from `hi` down to `lo` with `count` points.
pub fn geometric_grid(hi: f64, lo: f64, count: usize) -> Result<Vec<f64>> {
    if !(0.0 < lo && lo < hi) || count < 2 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lo < hi and count >= 2, got lo={lo} hi={hi} count={count}"
        )));
    }
    let ratio = (lo / hi).powf(1.0 / (count - 1) as f64);
    Ok((0..count).map(|k| hi * ratio.powi(k as i32)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power_law() {
        let grid = geometric_grid(1e-1, 1e-4, 10).unwrap();
        let values: Vec<f64> = grid.iter().map(|e| 3.0 * e.powf(1.5)).collect();
        let fit = RateFit::fit(&grid, &values, 2, 0.0).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
        assert!(fit.r_squared > 1.0 - 1e-12);
        assert_eq!(fit.window.len(), 8);
    }

    #[test]
    fn noise_floor_drops_points() {
        let grid = geometric_grid(1e-1, 1e-4, 8).unwrap();
        let values: Vec<f64> = grid
            .iter()
            .map(|e| if *e > 1e-3 { e.powi(2) } else { 1e-15 })
            .collect();
        let fit = RateFit::fit(&grid, &values, 2, 1e-12).unwrap();
        assert!(fit.window.iter().all(|&i| grid[i] > 1e-3));
        assert!((fit.slope - 2.0).abs() < 1e-10);
    }

    #[test]
    fn falls_back_when_window_too_small() {
        // only the three largest eps are above the floor, so dropping two
        // would leave a single point; the fallback keeps all three
        let grid = vec![0.1, 0.05, 0.025, 0.0125];
        let values = vec![1e-2, 1e-4, 1e-6, 1e-16];
        let fit = RateFit::fit(&grid, &values, 2, 1e-12).unwrap();
        assert_eq!(fit.window, vec![0, 1, 2]);
    }

    #[test]
    fn rejects_unsorted_grid() {
        assert!(RateFit::fit(&[0.1, 0.2], &[1.0, 1.0], 0, 0.0).is_err());
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = geometric_grid(1e-1, 1e-4, 16).unwrap();
        assert_eq!(g.len(), 16);
        assert!((g[0] - 1e-1).abs() < 1e-15);
        assert!((g[15] - 1e-4).abs() < 1e-18);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }
}
