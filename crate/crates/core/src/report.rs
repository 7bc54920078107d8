//! Bound results tagged with the criterion that produced them.

use crate::observables::{MeasurementSetting, OperatorKind};
use crate::strengths::{Angles, StrengthError};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum BoundError {
    #[error(transparent)]
    Strength(#[from] StrengthError),
    #[error("closed form for {quantity} evaluated to {value:e} < 0")]
    Consistency { quantity: &'static str, value: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("state is not a T-state (local or bipartite correlations present)")]
    NotTState,
    #[error("no biased-only window for P = {p} (needs P > {min})")]
    NoWindow { p: f64, min: f64 },
}

/// Angle choice for the Svetlichny bound with unequal strengths on the first party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum XBranch {
    /// All three relative angles orthogonal.
    Orthogonal,
    /// First party orthogonal, the other two tuned to the singular values.
    Mixed,
    /// First party parallel; needs a doubly degenerate top singular value.
    Parallel,
}

impl XBranch {
    pub const ALL: [XBranch; 3] = [XBranch::Orthogonal, XBranch::Mixed, XBranch::Parallel];

    pub fn name(self) -> &'static str {
        match self {
            XBranch::Orthogonal => "orthogonal",
            XBranch::Mixed => "mixed",
            XBranch::Parallel => "parallel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    MerminUnbiased,
    MerminEqualStrengths,
    MerminOrthogonal,
    MerminVariants,
    MerminTState,
    MerminXAsymmetric { tstate: bool },
    MerminDegenerate { tstate: bool },
    MerminTightest,
    SvetlichnyUnbiased,
    SvetlichnyEqualStrengths,
    SvetlichnyOrthogonal,
    SvetlichnyVariants,
    SvetlichnyTState,
    SvetlichnyXAsymmetric { branch: XBranch, tstate: bool },
    SvetlichnyXAsymmetricBest { tstate: bool },
    SvetlichnyDegenerate { tstate: bool },
    SvetlichnyTightest,
}

impl Criterion {
    pub const ALL: [Criterion; 26] = [
        Criterion::MerminUnbiased,
        Criterion::MerminEqualStrengths,
        Criterion::MerminOrthogonal,
        Criterion::MerminVariants,
        Criterion::MerminTState,
        Criterion::MerminXAsymmetric { tstate: false },
        Criterion::MerminXAsymmetric { tstate: true },
        Criterion::MerminDegenerate { tstate: false },
        Criterion::MerminDegenerate { tstate: true },
        Criterion::MerminTightest,
        Criterion::SvetlichnyUnbiased,
        Criterion::SvetlichnyEqualStrengths,
        Criterion::SvetlichnyOrthogonal,
        Criterion::SvetlichnyVariants,
        Criterion::SvetlichnyTState,
        Criterion::SvetlichnyXAsymmetric { branch: XBranch::Orthogonal, tstate: false },
        Criterion::SvetlichnyXAsymmetric { branch: XBranch::Mixed, tstate: false },
        Criterion::SvetlichnyXAsymmetric { branch: XBranch::Parallel, tstate: false },
        Criterion::SvetlichnyXAsymmetric { branch: XBranch::Orthogonal, tstate: true },
        Criterion::SvetlichnyXAsymmetric { branch: XBranch::Mixed, tstate: true },
        Criterion::SvetlichnyXAsymmetric { branch: XBranch::Parallel, tstate: true },
        Criterion::SvetlichnyXAsymmetricBest { tstate: false },
        Criterion::SvetlichnyXAsymmetricBest { tstate: true },
        Criterion::SvetlichnyDegenerate { tstate: false },
        Criterion::SvetlichnyDegenerate { tstate: true },
        Criterion::SvetlichnyTightest,
    ];

    pub fn name(self) -> &'static str {
        use Criterion::*;
        use XBranch::*;
        match self {
            MerminUnbiased => "mermin.unbiased",
            MerminEqualStrengths => "mermin.equal_strengths",
            MerminOrthogonal => "mermin.orthogonal",
            MerminVariants => "mermin.variants",
            MerminTState => "mermin.tstate",
            MerminXAsymmetric { tstate: false } => "mermin.x_asymmetric",
            MerminXAsymmetric { tstate: true } => "mermin.x_asymmetric.tstate",
            MerminDegenerate { tstate: false } => "mermin.degenerate",
            MerminDegenerate { tstate: true } => "mermin.degenerate.tstate",
            MerminTightest => "mermin.tightest",
            SvetlichnyUnbiased => "svetlichny.unbiased",
            SvetlichnyEqualStrengths => "svetlichny.equal_strengths",
            SvetlichnyOrthogonal => "svetlichny.orthogonal",
            SvetlichnyVariants => "svetlichny.variants",
            SvetlichnyTState => "svetlichny.tstate",
            SvetlichnyXAsymmetric { branch: Orthogonal, tstate: false } => "svetlichny.x_asymmetric.orthogonal",
            SvetlichnyXAsymmetric { branch: Mixed, tstate: false } => "svetlichny.x_asymmetric.mixed",
            SvetlichnyXAsymmetric { branch: Parallel, tstate: false } => "svetlichny.x_asymmetric.parallel",
            SvetlichnyXAsymmetric { branch: Orthogonal, tstate: true } => "svetlichny.x_asymmetric.orthogonal.tstate",
            SvetlichnyXAsymmetric { branch: Mixed, tstate: true } => "svetlichny.x_asymmetric.mixed.tstate",
            SvetlichnyXAsymmetric { branch: Parallel, tstate: true } => "svetlichny.x_asymmetric.parallel.tstate",
            SvetlichnyXAsymmetricBest { tstate: false } => "svetlichny.x_asymmetric",
            SvetlichnyXAsymmetricBest { tstate: true } => "svetlichny.x_asymmetric.tstate",
            SvetlichnyDegenerate { tstate: false } => "svetlichny.degenerate",
            SvetlichnyDegenerate { tstate: true } => "svetlichny.degenerate.tstate",
            SvetlichnyTightest => "svetlichny.tightest",
        }
    }

    pub fn from_name(name: &str) -> Option<Criterion> {
        Self::ALL.iter().copied().find(|c| c.name() == name)
    }

    pub fn operator(self) -> OperatorKind {
        use Criterion::*;
        match self {
            MerminUnbiased | MerminEqualStrengths | MerminOrthogonal | MerminVariants | MerminTState
            | MerminXAsymmetric { .. } | MerminDegenerate { .. } | MerminTightest => OperatorKind::Mermin,
            _ => OperatorKind::Svetlichny,
        }
    }

    /// Whether the criterion includes the bias contribution available on T-states.
    pub fn needs_tstate(self) -> bool {
        use Criterion::*;
        matches!(
            self,
            MerminTState
                | SvetlichnyTState
                | MerminXAsymmetric { tstate: true }
                | MerminDegenerate { tstate: true }
                | SvetlichnyXAsymmetric { tstate: true, .. }
                | SvetlichnyXAsymmetricBest { tstate: true }
                | SvetlichnyDegenerate { tstate: true }
        )
    }
}

/// A closed-form bound, optionally compared with a numerical oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub bound_value: f64,
    pub criterion: Criterion,
    pub achieving_angles: Option<Angles>,
    pub achieving_setting: Option<MeasurementSetting>,
    pub oracle_value: Option<f64>,
    /// `bound_value - oracle_value`.
    pub gap: Option<f64>,
    pub note: Option<&'static str>,
    /// For aggregated reports, the criterion that supplied the value.
    pub derived_from: Option<Criterion>,
}

impl BoundReport {
    pub fn new(criterion: Criterion, bound_value: f64) -> Self {
        Self {
            bound_value,
            criterion,
            achieving_angles: None,
            achieving_setting: None,
            oracle_value: None,
            gap: None,
            note: None,
            derived_from: None,
        }
    }

    pub fn with_angles(mut self, angles: Angles) -> Self {
        self.achieving_angles = Some(angles);
        self
    }

    pub fn with_note(mut self, note: &'static str) -> Self {
        self.note = Some(note);
        self
    }

    pub fn with_oracle(mut self, oracle_value: f64) -> Self {
        self.oracle_value = Some(oracle_value);
        self.gap = Some(self.bound_value - oracle_value);
        self
    }

    /// True when the bound exceeds the operator's classical limit.
    pub fn violated(&self) -> bool {
        self.bound_value > self.criterion.operator().classical_limit()
    }
}

/// Smallest bound among `reports` for `kind`, relabeled as the aggregate
/// criterion. A convenience of this crate, not a separate theorem.
pub fn tightest(reports: &[BoundReport], kind: OperatorKind) -> Option<BoundReport> {
    let best = reports
        .iter()
        .filter(|r| r.criterion.operator() == kind && r.derived_from.is_none())
        .min_by(|a, b| a.bound_value.total_cmp(&b.bound_value))?;
    let mut out = best.clone();
    out.derived_from = Some(best.criterion);
    out.criterion = match kind {
        OperatorKind::Mermin => Criterion::MerminTightest,
        OperatorKind::Svetlichny => Criterion::SvetlichnyTightest,
    };
    out.note = Some("minimum over the applicable criteria that were evaluated");
    Some(out)
}

/// A scalar criterion and whether it certifies violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionValue {
    pub value: f64,
    pub violated: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip_and_are_unique() {
        let all = Criterion::ALL;
        for (i, c) in all.iter().enumerate() {
            assert_eq!(Criterion::from_name(c.name()), Some(*c));
            for d in &all[i + 1..] {
                assert_ne!(c.name(), d.name());
            }
        }
        assert_eq!(Criterion::from_name("nope"), None);
    }

    #[test]
    fn gap_is_bound_minus_oracle() {
        let r = BoundReport::new(Criterion::MerminUnbiased, 4.0).with_oracle(3.5);
        assert_eq!(r.gap, Some(0.5));
        assert!(r.violated());
        assert!(!BoundReport::new(Criterion::SvetlichnyUnbiased, 4.0).violated());
    }

    #[test]
    fn tightest_picks_minimum_of_same_operator() {
        let reports = [
            BoundReport::new(Criterion::MerminUnbiased, 3.0),
            BoundReport::new(Criterion::MerminEqualStrengths, 2.5),
            BoundReport::new(Criterion::SvetlichnyUnbiased, 1.0),
        ];
        let t = tightest(&reports, OperatorKind::Mermin).unwrap();
        assert_eq!(t.bound_value, 2.5);
        assert_eq!(t.criterion, Criterion::MerminTightest);
        assert_eq!(t.derived_from, Some(Criterion::MerminEqualStrengths));
        assert!(tightest(&reports[..2], OperatorKind::Svetlichny).is_none());
    }
}
