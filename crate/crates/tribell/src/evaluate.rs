//! Criterion selection and evaluation for one state and measurement configuration.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use tribell_core::mermin_bounds::{self as mb, grid_maximize, top_two};
use tribell_core::oracle::{best_outcome, extreme_biases, see_saw_restart, SeeSawConfig, SeeSawOutcome};
use tribell_core::report::{tightest, BoundError, XBranch};
use tribell_core::states::{is_tstate, TSTATE_TOL};
use tribell_core::svetlichny_bounds as sb;
use tribell_core::{BoundReport, CorrelationDecomposition, Criterion, Mat3x9, OperatorKind, StrengthSextuple};

use crate::error::CliError;
use crate::parse::AngleMode;

/// Degeneracy threshold `|s1 - s2| <= DEGENERACY_REL * max(1, s1)`.
pub const DEGENERACY_REL: f64 = 1e-9;
pub const DEFAULT_ANGLE_GRID: usize = 64;

#[derive(Debug, Clone)]
pub struct Context {
    pub decomp: CorrelationDecomposition,
    pub t: Mat3x9,
    pub strengths: StrengthSextuple,
    pub biases: Option<[f64; 6]>,
    pub angles: AngleMode,
    pub angle_grid: usize,
    pub tstate: bool,
    pub s1: f64,
    pub s2: f64,
}

impl Context {
    pub fn new(
        decomp: CorrelationDecomposition,
        strengths: StrengthSextuple,
        biases: Option<[f64; 6]>,
        angles: AngleMode,
        angle_grid: usize,
    ) -> Self {
        let t = decomp.t_matrix();
        let (s1, s2) = top_two(&t);
        Self { tstate: is_tstate(&decomp, TSTATE_TOL), decomp, t, strengths, biases, angles, angle_grid, s1, s2 }
    }

    pub fn degenerate(&self) -> bool {
        (self.s1 - self.s2).abs() <= DEGENERACY_REL * self.s1.max(1.0)
    }

    pub fn biased(&self) -> bool {
        self.biases.is_some_and(|b| b.iter().any(|x| *x != 0.0))
    }

    fn x_asymmetric_shape(&self) -> bool {
        let s = &self.strengths;
        s.ry == s.ryp && s.rz == s.rzp && s.rx >= s.rxp
    }

    /// `Ok` when the criterion's hypotheses hold, otherwise the reason.
    pub fn applicable(&self, c: Criterion) -> Result<(), String> {
        use Criterion::*;
        if c.needs_tstate() && !self.tstate {
            return Err(format!("{} needs a T-state (local and bipartite terms present)", c.name()));
        }
        if !c.needs_tstate() && self.biased() && !is_aggregate(c) {
            return Err(format!("{} covers unbiased observables only, but biases were given", c.name()));
        }
        let ok = match c {
            MerminEqualStrengths | SvetlichnyEqualStrengths => self.strengths.equal_per_party(),
            MerminXAsymmetric { .. } | SvetlichnyXAsymmetricBest { .. } => self.x_asymmetric_shape(),
            SvetlichnyXAsymmetric { branch, .. } => {
                self.x_asymmetric_shape() && (branch != XBranch::Parallel || self.degenerate())
            }
            MerminDegenerate { .. } | SvetlichnyDegenerate { .. } => self.degenerate(),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("hypotheses of {} do not hold for this configuration", c.name()))
        }
    }

    /// Whether the criterion's value bounds the operator over every setting
    /// with the configured angles (or over all angles when optimal). Criteria
    /// tied to particular angles, or whose closed form is not a maximum over
    /// angles, are reported but never feed the aggregate.
    pub fn bounds_all_settings(&self, c: Criterion) -> bool {
        use Criterion::*;
        match self.angles {
            AngleMode::Fixed(_) => matches!(c, MerminUnbiased | SvetlichnyUnbiased | MerminTState | SvetlichnyTState),
            AngleMode::Optimal => matches!(
                c,
                MerminUnbiased
                    | SvetlichnyUnbiased
                    | MerminTState
                    | SvetlichnyTState
                    | MerminEqualStrengths
                    | MerminXAsymmetric { .. }
            ),
        }
    }

    fn fixed_angles(&self) -> Option<[f64; 3]> {
        match self.angles {
            AngleMode::Fixed(a) => Some(a),
            AngleMode::Optimal => None,
        }
    }

    /// Closed-form value of one (non-aggregate) criterion.
    pub fn evaluate(&self, c: Criterion) -> Result<BoundReport, BoundError> {
        use Criterion::*;
        let (t, s, n) = (&self.t, &self.strengths, self.angle_grid);
        let fa = self.fixed_angles();
        let relabel = |mut r: BoundReport| {
            r.criterion = c;
            r
        };
        Ok(match c {
            MerminUnbiased => match fa {
                Some(a) => mb::mermin_bound_unbiased(t, s, &a)?,
                None => mb::mermin_bound_unbiased_max(t, s, n)?,
            },
            SvetlichnyUnbiased => match fa {
                Some(a) => sb::svetlichny_bound_unbiased(t, s, &a)?,
                None => sb::svetlichny_bound_unbiased_max(t, s, n)?,
            },
            MerminTState => match fa {
                Some(a) => mb::mermin_bound_tstate(t, s, &a)?,
                None => {
                    let mut r = relabel(mb::mermin_bound_unbiased_max(t, s, n)?);
                    r.bound_value += mb::k_max(s);
                    r
                }
            },
            SvetlichnyTState => match fa {
                Some(a) => sb::svetlichny_bound_tstate(t, s, &a)?,
                None => {
                    let mut r = relabel(sb::svetlichny_bound_unbiased_max(t, s, n)?);
                    r.bound_value += sb::l_max(s);
                    r
                }
            },
            MerminEqualStrengths => mb::mermin_bound_equal_strengths(t, s.rx, s.ry, s.rz)?,
            SvetlichnyEqualStrengths => sb::svetlichny_bound_equal_strengths(t, s.rx, s.ry, s.rz)?,
            MerminOrthogonal => {
                BoundReport::new(c, mb::mermin_sufficient_orthogonal(t, s).value).with_angles([FRAC_PI_2; 3])
            }
            SvetlichnyOrthogonal => {
                BoundReport::new(c, sb::svetlichny_sufficient_orthogonal(t, s).value).with_angles([FRAC_PI_2; 3])
            }
            MerminVariants | SvetlichnyVariants => {
                let f = |a: &[f64; 3]| match c {
                    MerminVariants => mb::mermin_six_variant_criterion(t, s, a).map(|v| v.value),
                    _ => sb::svetlichny_six_variant_criterion(t, s, a).map(|v| v.value),
                };
                let (value, angles) = match fa {
                    Some(a) => (f(&a)?, a),
                    None => grid_maximize(n, f)?,
                };
                BoundReport::new(c, value).with_angles(angles)
            }
            MerminXAsymmetric { tstate } => mb::mermin_bound_x_asymmetric(t, s.rx, s.rxp, s.ry, s.rz, tstate)?,
            SvetlichnyXAsymmetric { branch, tstate } => {
                sb::svetlichny_bound_x_asymmetric(t, s.rx, s.rxp, s.ry, s.rz, branch, self.degenerate(), tstate)?
            }
            SvetlichnyXAsymmetricBest { tstate } => {
                sb::svetlichny_bound_x_asymmetric_best(t, s.rx, s.rxp, s.ry, s.rz, self.degenerate(), tstate)?
            }
            MerminDegenerate { tstate } => mb::mermin_bound_degenerate_smax(s, self.s1, tstate)?,
            SvetlichnyDegenerate { tstate } => sb::svetlichny_bound_degenerate_smax(s, self.s1, tstate)?,
            MerminTightest | SvetlichnyTightest => unreachable!("aggregates are assembled by `run`"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorChoice {
    Mermin,
    Svetlichny,
    Both,
}

impl OperatorChoice {
    pub fn kinds(self) -> Vec<OperatorKind> {
        match self {
            OperatorChoice::Mermin => vec![OperatorKind::Mermin],
            OperatorChoice::Svetlichny => vec![OperatorKind::Svetlichny],
            OperatorChoice::Both => vec![OperatorKind::Mermin, OperatorKind::Svetlichny],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorChoice::Mermin => "mermin",
            OperatorChoice::Svetlichny => "svetlichny",
            OperatorChoice::Both => "both",
        }
    }
}

/// Evaluates the requested criteria (`None` = every applicable one) for the
/// chosen operators. Explicitly requested criteria that do not apply are an
/// incompatibility error.
pub fn run(
    ctx: &Context,
    operators: OperatorChoice,
    criteria: Option<&[Criterion]>,
    oracle: Option<&SeeSawConfig>,
) -> Result<Vec<BoundReport>, CliError> {
    let kinds = operators.kinds();
    let selected: Vec<Criterion> = match criteria {
        Some(list) => {
            for c in list {
                if !kinds.contains(&c.operator()) {
                    return Err(CliError::config(
                        "--criteria",
                        format!("{} does not belong to --operator {}", c.name(), operators.name()),
                    ));
                }
                ctx.applicable(*c).map_err(CliError::Incompatible)?;
            }
            list.to_vec()
        }
        None => Criterion::ALL
            .iter()
            .copied()
            .filter(|c| kinds.contains(&c.operator()) && ctx.applicable(*c).is_ok())
            .collect(),
    };
    if selected.is_empty() {
        return Err(CliError::Incompatible("no criterion applies to this configuration".into()));
    }

    let mut reports = Vec::new();
    for c in &selected {
        if is_aggregate(*c) {
            continue;
        }
        let r = ctx.evaluate(*c).map_err(|e| CliError::Incompatible(format!("{}: {e}", c.name())))?;
        reports.push(r);
    }
    for c in &selected {
        if let Criterion::MerminTightest | Criterion::SvetlichnyTightest = c {
            let kind = c.operator();
            // Only bounds on the configured measurement class compete: the
            // T-state criteria when biases are set, the unbiased ones otherwise,
            // and only those that bound every setting with the requested angles.
            let in_class = |r: &Criterion| {
                r.operator() == kind && r.needs_tstate() == ctx.biased() && ctx.bounds_all_settings(*r)
            };
            let mut pool: Vec<BoundReport> = reports.iter().filter(|r| in_class(&r.criterion)).cloned().collect();
            if pool.is_empty() {
                for base in Criterion::ALL.iter().filter(|b| in_class(b) && !is_aggregate(**b)) {
                    if ctx.applicable(*base).is_ok() {
                        pool.push(ctx.evaluate(*base).map_err(|e| CliError::Incompatible(format!("{}: {e}", base.name())))?);
                    }
                }
            }
            if let Some(r) = tightest(&pool, kind) {
                reports.push(r);
            }
        }
    }
    if let Some(cfg) = oracle {
        attach_oracle(ctx, &mut reports, cfg).map_err(|e| CliError::config("--oracle-restarts", e))?;
    }
    Ok(reports)
}

fn is_aggregate(c: Criterion) -> bool {
    matches!(c, Criterion::MerminTightest | Criterion::SvetlichnyTightest)
}

/// Oracle run shape: which operator, whether biases are searched, and the
/// relative-angle constraint (bit patterns so the key is hashable).
type OracleKey = (OperatorKind, bool, Option<[u64; 3]>);

fn oracle_key(ctx: &Context, r: &BoundReport) -> OracleKey {
    let criterion = r.derived_from.unwrap_or(r.criterion);
    // Criteria that hold only at their own angles are compared at those angles.
    let constraint = if ctx.bounds_all_settings(criterion) { ctx.fixed_angles() } else { r.achieving_angles };
    let search_biases = criterion.needs_tstate() && ctx.biases.is_none();
    (criterion.operator(), search_biases, constraint.map(|a| a.map(f64::to_bits)))
}

/// Parallel restarts, merged by [`best_outcome`].
pub fn parallel_see_saw(
    decomp: &CorrelationDecomposition,
    strengths: &StrengthSextuple,
    biases: &[f64; 6],
    kind: OperatorKind,
    cfg: &SeeSawConfig,
) -> Result<SeeSawOutcome, String> {
    (0..cfg.restarts)
        .into_par_iter()
        .map(|r| see_saw_restart(decomp, strengths, biases, kind, cfg, r).map_err(|e| e.to_string()))
        .try_reduce_with(|a, b| Ok(best_outcome(a, b)))
        .expect("at least one restart")
}

fn attach_oracle(ctx: &Context, reports: &mut [BoundReport], base: &SeeSawConfig) -> Result<(), String> {
    let mut cache: HashMap<OracleKey, f64> = HashMap::new();
    for r in reports.iter_mut() {
        let key = oracle_key(ctx, r);
        let value = match cache.get(&key) {
            Some(v) => *v,
            None => {
                let (kind, search_biases, constraint) = key;
                let cfg = SeeSawConfig { angle_constraints: constraint.map(|a| a.map(f64::from_bits)), ..*base };
                let v = if search_biases {
                    (0..64u32)
                        .into_par_iter()
                        .map(|bits| {
                            let b = extreme_biases(&ctx.strengths, bits);
                            parallel_see_saw(&ctx.decomp, &ctx.strengths, &b, kind, &cfg).map(|o| o.value)
                        })
                        .try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(a.max(b)))?
                } else {
                    let b = ctx.biases.unwrap_or([0.0; 6]);
                    parallel_see_saw(&ctx.decomp, &ctx.strengths, &b, kind, &cfg)?.value
                };
                cache.insert(key, v);
                v
            }
        };
        *r = r.clone().with_oracle(value);
    }
    Ok(())
}
