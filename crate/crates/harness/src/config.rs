use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use helmholtz_core::krylov::GmresConfig;
use helmholtz_core::problems::{AnalyticSeparable, InclusionDerivatives, SphericalInclusion};
use helmholtz_core::stencil::SchemeOrder;
use helmholtz_core::{Complex64, Placement};
use serde::Deserialize;

use crate::HarnessError;

/// Default grid sizes per axis.
pub const DEFAULT_GRIDS: [usize; 5] = [50, 100, 127, 200, 255];
/// Added by `--large`.
pub const LARGE_GRIDS: [usize; 5] = [400, 511, 600, 767, 800];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProblemId {
    #[default]
    Analytic,
    Inclusion,
}

impl FromStr for ProblemId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "inclusion" => Ok(Self::Inclusion),
            _ => Err(HarnessError::Config(format!("unknown problem '{s}'"))),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Analytic => "analytic",
            Self::Inclusion => "inclusion",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PrecondId {
    #[default]
    Eigt2,
    Eigt3,
    Pfft2,
    Pfft3,
    Fft2,
    Fft4,
    Fft6,
    None,
}

impl PrecondId {
    pub const ALL: [PrecondId; 8] = [
        Self::Eigt2,
        Self::Eigt3,
        Self::Pfft2,
        Self::Pfft3,
        Self::Fft2,
        Self::Fft4,
        Self::Fft6,
        Self::None,
    ];

    /// Grid placement implied by the boundary closure of the preconditioner.
    pub fn placement(self) -> Option<Placement> {
        match self {
            Self::Eigt2 | Self::Pfft2 => Some(Placement::Staggered),
            Self::Eigt3 | Self::Pfft3 => Some(Placement::Collocated),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Eigt2 => "EigT2",
            Self::Eigt3 => "EigT3",
            Self::Pfft2 => "PFFT2",
            Self::Pfft3 => "PFFT3",
            Self::Fft2 => "FFT2",
            Self::Fft4 => "FFT4",
            Self::Fft6 => "FFT6",
            Self::None => "none",
        }
    }
}

impl FromStr for PrecondId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| HarnessError::Config(format!("unknown preconditioner '{s}'")))
    }
}

impl fmt::Display for PrecondId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label().to_ascii_lowercase())
    }
}

/// Boundary closure of the high-order operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryChoice {
    /// Absorbing closure matching the grid placement.
    #[default]
    Auto,
    Staggered,
    Collocated,
    /// Exact ghost values from the analytic solution.
    Oracle,
}

impl FromStr for BoundaryChoice {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Self::Auto),
            "staggered" => Ok(Self::Staggered),
            "collocated" => Ok(Self::Collocated),
            "oracle" => Ok(Self::Oracle),
            _ => Err(HarnessError::Config(format!(
                "unknown boundary closure '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Gmres,
    /// One application of the preconditioner (second-order direct solve).
    Direct,
}

impl FromStr for SolverKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gmres" => Ok(Self::Gmres),
            "direct" => Ok(Self::Direct),
            _ => Err(HarnessError::Config(format!("unknown solver '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmresSection {
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresSection {
    fn default() -> Self {
        let d = GmresConfig::default();
        Self {
            tol: d.tol,
            restart: d.restart,
            max_iter: d.max_iterations,
        }
    }
}

impl GmresSection {
    pub fn to_config(self) -> GmresConfig {
        GmresConfig {
            restart: self.restart,
            tol: self.tol,
            max_iterations: self.max_iter,
            record_history: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyticSection {
    pub k0_sq: f64,
}

impl Default for AnalyticSection {
    fn default() -> Self {
        Self {
            k0_sq: AnalyticSeparable::default().k0_sq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InclusionSection {
    pub center: [f64; 3],
    pub radius: f64,
    pub k_sq_inside: [f64; 2],
    pub k0_sq: f64,
    /// Differentiate the nodal samples of `k²` and `f` instead of each
    /// smooth piece.
    pub sampled_derivatives: bool,
}

impl Default for InclusionSection {
    fn default() -> Self {
        let d = SphericalInclusion::default();
        Self {
            center: d.center,
            radius: d.radius,
            k_sq_inside: [d.k_sq_inside.re, d.k_sq_inside.im],
            k0_sq: d.k0_sq,
            sampled_derivatives: false,
        }
    }
}

impl InclusionSection {
    pub fn to_problem(self) -> SphericalInclusion {
        SphericalInclusion {
            center: self.center,
            radius: self.radius,
            k_sq_inside: Complex64::new(self.k_sq_inside[0], self.k_sq_inside[1]),
            k0_sq: self.k0_sq,
        }
    }

    pub fn derivatives(&self) -> InclusionDerivatives {
        if self.sampled_derivatives {
            InclusionDerivatives::Sampled
        } else {
            InclusionDerivatives::Piecewise
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub problem: ProblemId,
    pub order: u32,
    /// Empty means the default list.
    pub grids: Vec<usize>,
    pub precond: PrecondId,
    pub boundary: BoundaryChoice,
    pub solver: SolverKind,
    pub out: Option<PathBuf>,
    pub repeat: usize,
    pub slices: bool,
    pub large: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            problem: ProblemId::Analytic,
            order: 4,
            grids: Vec::new(),
            precond: PrecondId::Eigt3,
            boundary: BoundaryChoice::Auto,
            solver: SolverKind::Gmres,
            out: None,
            repeat: 1,
            slices: false,
            large: false,
        }
    }
}

/// Contents of a config file. Every section and key is optional.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub run: RunSection,
    pub gmres: GmresSection,
    pub analytic: AnalyticSection,
    pub inclusion: InclusionSection,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn into_spec(self) -> ExperimentSpec {
        let r = self.run;
        ExperimentSpec {
            problem: r.problem,
            order: r.order,
            grids: r.grids,
            precond: r.precond,
            boundary: r.boundary,
            solver: r.solver,
            gmres: self.gmres,
            out: r.out,
            repeat: r.repeat,
            slices: r.slices,
            large: r.large,
            analytic: self.analytic,
            inclusion: self.inclusion,
        }
    }
}

/// One experiment: a problem, a scheme and a preconditioner over a list of
/// grid sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: ProblemId,
    pub order: u32,
    pub grids: Vec<usize>,
    pub precond: PrecondId,
    pub boundary: BoundaryChoice,
    pub solver: SolverKind,
    pub gmres: GmresSection,
    pub out: Option<PathBuf>,
    pub repeat: usize,
    pub slices: bool,
    pub large: bool,
    pub analytic: AnalyticSection,
    pub inclusion: InclusionSection,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ConfigFile::default().into_spec()
    }
}

impl ExperimentSpec {
    pub fn new(problem: ProblemId, order: u32, precond: PrecondId, grids: &[usize]) -> Self {
        Self {
            problem,
            order,
            precond,
            grids: grids.to_vec(),
            ..Self::default()
        }
    }

    pub fn scheme(&self) -> Result<SchemeOrder, HarnessError> {
        Ok(SchemeOrder::from_int(self.order)?)
    }

    /// Grid sizes to run, after defaults and `--large`.
    pub fn grid_list(&self) -> Vec<usize> {
        let mut g = if self.grids.is_empty() {
            DEFAULT_GRIDS.to_vec()
        } else {
            self.grids.clone()
        };
        if self.large {
            g.extend(LARGE_GRIDS);
        }
        g
    }

    /// Node placement: fixed by the preconditioner's boundary closure, or
    /// by an explicit staggered/collocated choice; staggered otherwise.
    pub fn placement(&self) -> Placement {
        match (self.precond.placement(), self.boundary) {
            (Some(p), _) => p,
            (None, BoundaryChoice::Collocated) => Placement::Collocated,
            _ => Placement::Staggered,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let order = self.scheme()?;
        self.gmres.to_config().validate()?;
        if self.repeat == 0 {
            return Err(HarnessError::Config("repeat must be at least 1".into()));
        }
        if self.grid_list().iter().any(|&n| n < 2) {
            return Err(HarnessError::Config("grid sizes must be at least 2".into()));
        }
        let placement = self.placement();
        match (self.boundary, placement) {
            (BoundaryChoice::Staggered, Placement::Collocated)
            | (BoundaryChoice::Collocated, Placement::Staggered) => {
                return Err(HarnessError::Config(format!(
                    "boundary closure {:?} conflicts with the {:?} grid required by {}",
                    self.boundary,
                    placement,
                    self.precond.label()
                )))
            }
            _ => {}
        }
        if self.boundary == BoundaryChoice::Oracle && self.problem != ProblemId::Analytic {
            return Err(HarnessError::Config(
                "the oracle closure needs an exact solution (analytic problem)".into(),
            ));
        }
        if self.solver == SolverKind::Direct {
            if self.precond == PrecondId::None {
                return Err(HarnessError::Config(
                    "a direct solve needs a preconditioner".into(),
                ));
            }
            if order != helmholtz_core::stencil::SchemeOrder::Second {
                return Err(HarnessError::Config(
                    "a direct solve is only exact for the second-order scheme".into(),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_defaults() {
        let c = ConfigFile::parse(
            r#"
[run]
problem = "inclusion"
order = 6
grids = [20, 30]
precond = "pfft2"

[gmres]
tol = 1e-8

[inclusion]
radius = 0.2
"#,
        )
        .unwrap();
        let s = c.into_spec();
        assert_eq!(s.problem, ProblemId::Inclusion);
        assert_eq!(s.grid_list(), vec![20, 30]);
        assert_eq!(s.gmres.tol, 1e-8);
        assert_eq!(s.gmres.restart, 20);
        assert_eq!(s.inclusion.radius, 0.2);
        assert_eq!(s.inclusion.center, [0.5, 0.5, 0.7]);
        assert_eq!(s.placement(), Placement::Staggered);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ConfigFile::parse("[run]\ncolour = 1\n").is_err());
    }

    #[test]
    fn large_extends_defaults() {
        let s = ExperimentSpec {
            large: true,
            ..ExperimentSpec::default()
        };
        assert_eq!(s.grid_list().len(), 10);
    }

    #[test]
    fn conflicting_closure_is_rejected() {
        let s = ExperimentSpec {
            boundary: BoundaryChoice::Staggered,
            precond: PrecondId::Pfft3,
            ..ExperimentSpec::default()
        };
        assert!(s.validate().is_err());
        let s = ExperimentSpec {
            problem: ProblemId::Inclusion,
            boundary: BoundaryChoice::Oracle,
            ..ExperimentSpec::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn precond_names_roundtrip() {
        for p in PrecondId::ALL {
            assert_eq!(p.to_string().parse::<PrecondId>().unwrap(), p);
        }
    }
}
