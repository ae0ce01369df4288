use super::config::OptimizerConfig;
use super::objective::Objective;
use super::run::run_scheme;
use super::scheme::CoordinateScheme;
use crate::dense::Matrix;

/// Stepsizes `2^-10, 2^-9, …, 2^3`.
pub fn default_grid() -> Vec<f64> {
    (-10..=3).map(|e| 2f64.powi(e)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub eta: f64,
    /// Final objective value, `+∞` if the run failed.
    pub score: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    pub points: Vec<GridPoint>,
    /// Index into `points` of the lowest score; ties go to the earlier point.
    pub best: usize,
}

impl GridResult {
    pub fn best_eta(&self) -> f64 {
        self.points[self.best].eta
    }
}

/// Runs `cfg` once per stepsize in `grid` and scores each run by its final value.
pub fn grid_search(
    scheme: &dyn CoordinateScheme,
    objective: &dyn Objective,
    x0: &Matrix,
    cfg: &OptimizerConfig,
    grid: &[f64],
) -> GridResult {
    let eval = |&eta: &f64| {
        let cfg = OptimizerConfig { eta, ..cfg.clone() };
        match run_scheme(scheme, objective, x0, &cfg) {
            Ok(out) => GridPoint {
                eta,
                score: out.final_value(),
                error: None,
            },
            Err(e) => GridPoint {
                eta,
                score: f64::INFINITY,
                error: Some(e.to_string()),
            },
        }
    };
    #[cfg(feature = "parallel")]
    let points: Vec<GridPoint> = {
        use rayon::prelude::*;
        grid.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let points: Vec<GridPoint> = grid.iter().map(eval).collect();
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.score < points[best].score {
            best = i;
        }
    }
    GridResult { points, best }
}
