//! One-parameter sweeps of the bound engine.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use tribell_core::mermin_bounds::{mermin_biased_window, BiasWindow};
use tribell_core::report::BoundError;
use tribell_core::oracle::SeeSawConfig;
use tribell_core::states::{build, StateSpec};
use tribell_core::svetlichny_bounds::svetlichny_biased_window;
use tribell_core::tensor_core::decompose;
use tribell_core::{Criterion, StrengthSextuple};

use crate::error::CliError;
use crate::evaluate::{run, Context, OperatorChoice};
use crate::output::{ReportRow, ScanRow, WindowInfo};
use crate::parse::AngleMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// All six strengths set to `x`.
    StrengthAll,
    /// White-noise visibility of the base state.
    Visibility,
    /// Relative angle of the first party.
    AngleX,
}

impl Axis {
    pub fn from_name(name: &str) -> Option<Axis> {
        match name {
            "strength_all" => Some(Axis::StrengthAll),
            "visibility" => Some(Axis::Visibility),
            "angle_x" => Some(Axis::AngleX),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::StrengthAll => "strength_all",
            Axis::Visibility => "visibility",
            Axis::AngleX => "angle_x",
        }
    }
}

/// Grid points `lo + i (hi - lo)/(steps - 1)`; a single step yields `lo`.
pub fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
}

#[derive(Debug, Clone)]
pub struct ScanSetup {
    pub state: StateSpec,
    pub strengths: StrengthSextuple,
    pub biases: Option<[f64; 6]>,
    pub angles: AngleMode,
    pub angle_grid: usize,
    pub operators: OperatorChoice,
    pub criteria: Option<Vec<Criterion>>,
    pub oracle: Option<SeeSawConfig>,
}

fn window(p: f64, f: fn(f64) -> Result<BiasWindow, BoundError>) -> Option<WindowInfo> {
    f(p).ok().map(|w| WindowInfo { p, r_biased: w.r_biased, r_unbiased: w.r_unbiased })
}

fn point(setup: &ScanSetup, axis: Axis, x: f64) -> Result<ScanRow, CliError> {
    let mut state = setup.state.clone();
    let mut strengths = setup.strengths;
    let mut angles = setup.angles;
    match axis {
        Axis::StrengthAll => {
            strengths = StrengthSextuple::uniform(x).map_err(|e| CliError::config("--range", e.to_string()))?;
        }
        Axis::Visibility => state = StateSpec::Mix(Box::new(state), x),
        Axis::AngleX => {
            let base = match angles {
                AngleMode::Fixed(a) => a,
                AngleMode::Optimal => [FRAC_PI_2; 3],
            };
            let a = [x, base[1], base[2]];
            tribell_core::strengths::validate_angles(&a).map_err(|e| CliError::config("--range", e.to_string()))?;
            angles = AngleMode::Fixed(a);
        }
    }
    let rho = build(&state).map_err(|e| CliError::config("--state", e.to_string()))?;
    let biases = match setup.biases {
        Some(b) => Some(crate::parse::check_biases(&b, &strengths)?),
        None => None,
    };
    let ctx = Context::new(decompose(&rho), strengths, biases, angles, setup.angle_grid);
    let reports = run(&ctx, setup.operators, setup.criteria.as_deref(), setup.oracle.as_ref())?;
    let p = (ctx.s1 * ctx.s1 + ctx.s2 * ctx.s2).sqrt();
    let windows = axis == Axis::StrengthAll && ctx.tstate;
    Ok(ScanRow {
        x,
        reports: reports.iter().map(ReportRow::from).collect(),
        mermin_window: windows.then(|| window(p, mermin_biased_window)).flatten(),
        svetlichny_window: windows.then(|| window(p, svetlichny_biased_window)).flatten(),
    })
}

/// Rows in grid order; points are evaluated in parallel.
pub fn scan(setup: &ScanSetup, axis: Axis, lo: f64, hi: f64, steps: usize) -> Result<Vec<ScanRow>, CliError> {
    grid(lo, hi, steps).into_par_iter().map(|x| point(setup, axis, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        assert_eq!(grid(0.0, 1.0, 1), vec![0.0]);
        assert_eq!(grid(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn visibility_scan_is_linear() {
        let setup = ScanSetup {
            state: StateSpec::Ghz,
            strengths: StrengthSextuple::sharp(),
            biases: None,
            angles: AngleMode::Optimal,
            angle_grid: 8,
            operators: OperatorChoice::Mermin,
            criteria: Some(vec![Criterion::MerminEqualStrengths]),
            oracle: None,
        };
        let rows = scan(&setup, Axis::Visibility, 0.0, 1.0, 5).unwrap();
        for row in rows {
            assert!((row.reports[0].bound - 4.0 * row.x).abs() < 1e-9, "{row:?}");
            assert_eq!(row.reports[0].violated, row.x > 0.5);
        }
    }
}
