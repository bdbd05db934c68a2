//! Worst-case cleaning times over the three uncertainty sets.
//!
//! With nominal time `d_bar` and a vector `d` of `S` historical deviations,
//! the robust time is `d_bar + max over gamma in G of sum_s gamma_s d_s`:
//!
//! | kind          | set G                        | worst case               |
//! |---------------|------------------------------|--------------------------|
//! | `convex_hull` | `gamma >= 0, sum gamma <= 1` | `max(max_s d_s, 0)`      |
//! | `box`         | `\|gamma\|_inf <= 1`         | `sum_s \|d_s\|`          |
//! | `ellipsoidal` | `gamma' Q gamma <= Omega^2`  | `Omega sqrt(d' Q^-1 d)`  |

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::instance::ScenarioSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintySet {
    None,
    Box,
    ConvexHull,
    Ellipsoidal,
}

impl UncertaintySet {
    pub const ROBUST: [UncertaintySet; 3] = [Self::Box, Self::ConvexHull, Self::Ellipsoidal];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Box => "box",
            Self::ConvexHull => "convex_hull",
            Self::Ellipsoidal => "ellipsoidal",
        }
    }
}

impl fmt::Display for UncertaintySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UncertaintySet {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "none" | "deterministic" => Ok(Self::None),
            "box" => Ok(Self::Box),
            "convex_hull" | "hull" => Ok(Self::ConvexHull),
            "ellipsoidal" | "ellipsoid" => Ok(Self::Ellipsoidal),
            other => Err(ModelError::Config(format!(
                "unknown uncertainty set {other:?} (expected none, box, convex_hull or ellipsoidal)"
            ))),
        }
    }
}

/// Choice of uncertainty set plus its data.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustConfig {
    pub kind: UncertaintySet,
    pub scenarios: ScenarioSet,
    /// `S x S` shape matrix of the ellipsoid; identity when `None`.
    pub shape: Option<DMatrix<f64>>,
    /// Ellipsoid radius.
    pub omega: f64,
}

impl Default for RobustConfig {
    fn default() -> Self {
        Self::deterministic()
    }
}

impl RobustConfig {
    pub fn deterministic() -> Self {
        Self {
            kind: UncertaintySet::None,
            scenarios: ScenarioSet::default(),
            shape: None,
            omega: 1.0,
        }
    }

    pub fn new(kind: UncertaintySet, scenarios: ScenarioSet) -> Self {
        Self {
            kind,
            scenarios,
            shape: None,
            omega: 1.0,
        }
    }

    pub fn with_shape(mut self, q: DMatrix<f64>, omega: f64) -> Self {
        self.shape = Some(q);
        self.omega = omega;
        self
    }

    /// Checks the configuration and factors `Q` once for repeated use.
    pub fn prepare(&self) -> Result<RobustTransform, ModelError> {
        self.prepare_for(self.scenarios.len())
    }

    pub(crate) fn prepare_for(&self, s: usize) -> Result<RobustTransform, ModelError> {
        if self.kind == UncertaintySet::None {
            return Ok(RobustTransform {
                kind: self.kind,
                omega: self.omega,
                factor: None,
            });
        }
        if s == 0 {
            return Err(ModelError::Config(format!(
                "the {} uncertainty set needs at least one deviation scenario",
                self.kind
            )));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(ModelError::Config(format!(
                "ellipsoid radius must be nonnegative, got {}",
                self.omega
            )));
        }
        let factor = if self.kind == UncertaintySet::Ellipsoidal {
            match &self.shape {
                None => None,
                Some(q) => Some(factor_shape(q, s)?),
            }
        } else {
            None
        };
        Ok(RobustTransform {
            kind: self.kind,
            omega: self.omega,
            factor,
        })
    }
}

fn factor_shape(q: &DMatrix<f64>, s: usize) -> Result<Cholesky<f64, nalgebra::Dyn>, ModelError> {
    if q.nrows() != s || q.ncols() != s {
        return Err(ModelError::Config(format!(
            "ellipsoid shape must be {s} x {s}, got {} x {}",
            q.nrows(),
            q.ncols()
        )));
    }
    let scale = q.amax().max(1.0);
    for i in 0..s {
        for j in 0..i {
            if (q[(i, j)] - q[(j, i)]).abs() > 1e-12 * scale {
                return Err(ModelError::Config(
                    "ellipsoid shape matrix must be symmetric".into(),
                ));
            }
        }
    }
    Cholesky::new(q.clone()).ok_or_else(|| {
        ModelError::Config("ellipsoid shape matrix must be positive definite".into())
    })
}

/// A validated [`RobustConfig`] with `Q` already factored.
#[derive(Debug, Clone)]
pub struct RobustTransform {
    kind: UncertaintySet,
    omega: f64,
    factor: Option<Cholesky<f64, nalgebra::Dyn>>,
}

impl RobustTransform {
    pub fn kind(&self) -> UncertaintySet {
        self.kind
    }

    /// Worst-case cleaning time for one (task, robot) pair.
    pub fn apply(&self, d_bar: f64, deviations: &[f64]) -> f64 {
        match self.kind {
            UncertaintySet::None => d_bar,
            UncertaintySet::ConvexHull => {
                d_bar + deviations.iter().copied().fold(0.0, f64::max)
            }
            UncertaintySet::Box => d_bar + deviations.iter().map(|d| d.abs()).sum::<f64>(),
            UncertaintySet::Ellipsoidal => {
                let quad = match &self.factor {
                    None => deviations.iter().map(|d| d * d).sum::<f64>(),
                    Some(chol) => {
                        let d = DVector::from_column_slice(deviations);
                        let y = chol
                            .l_dirty()
                            .solve_lower_triangular(&d)
                            .expect("Cholesky factor is nonsingular");
                        y.norm_squared()
                    }
                };
                d_bar + self.omega * quad.sqrt()
            }
        }
    }
}

/// Robust cleaning time of a single pair under `cfg`.
pub fn robust_cleaning_time(
    d_bar: f64,
    deviations: &[f64],
    cfg: &RobustConfig,
) -> Result<f64, ModelError> {
    Ok(cfg.prepare_for(deviations.len())?.apply(d_bar, deviations))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: UncertaintySet) -> RobustConfig {
        RobustConfig::new(kind, ScenarioSet::default())
    }

    #[test]
    fn worked_example() {
        let d = [5.0, -3.0, 8.0];
        let hull = robust_cleaning_time(100.0, &d, &cfg(UncertaintySet::ConvexHull)).unwrap();
        let bx = robust_cleaning_time(100.0, &d, &cfg(UncertaintySet::Box)).unwrap();
        let ell = robust_cleaning_time(100.0, &d, &cfg(UncertaintySet::Ellipsoidal)).unwrap();
        assert_eq!(hull, 108.0);
        assert_eq!(bx, 116.0);
        assert!((ell - (100.0 + 98f64.sqrt())).abs() < 1e-12);
        assert!((ell - 109.899).abs() < 1e-3);
    }

    #[test]
    fn nonpositive_deviations_leave_hull_unchanged() {
        let t = robust_cleaning_time(42.0, &[-1.0, -7.5, 0.0], &cfg(UncertaintySet::ConvexHull))
            .unwrap();
        assert_eq!(t, 42.0);
    }

    #[test]
    fn three_four_five() {
        let t = robust_cleaning_time(10.0, &[3.0, 4.0], &cfg(UncertaintySet::Ellipsoidal)).unwrap();
        assert_eq!(t, 15.0);
    }

    #[test]
    fn explicit_identity_shape_matches_default() {
        let d = [1.5, 2.0, 0.25];
        let plain = robust_cleaning_time(1.0, &d, &cfg(UncertaintySet::Ellipsoidal)).unwrap();
        let shaped = robust_cleaning_time(
            1.0,
            &d,
            &cfg(UncertaintySet::Ellipsoidal).with_shape(DMatrix::identity(3, 3), 1.0),
        )
        .unwrap();
        assert!((plain - shaped).abs() < 1e-12);
    }

    #[test]
    fn diagonal_shape_and_radius() {
        // Q = diag(4, 1): d' Q^-1 d = 36/4 + 16 = 25.
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]));
        let c = cfg(UncertaintySet::Ellipsoidal).with_shape(q, 2.0);
        assert_eq!(robust_cleaning_time(0.0, &[6.0, 4.0], &c).unwrap(), 10.0);
    }

    #[test]
    fn indefinite_shape_is_a_config_error() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let c = cfg(UncertaintySet::Ellipsoidal).with_shape(q, 1.0);
        assert!(matches!(
            robust_cleaning_time(0.0, &[1.0, 1.0], &c),
            Err(ModelError::Config(_))
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.0, 2.0]);
        let c = cfg(UncertaintySet::Ellipsoidal).with_shape(asym, 1.0);
        assert!(robust_cleaning_time(0.0, &[1.0, 1.0], &c).is_err());
    }

    #[test]
    fn empty_scenarios_need_deterministic() {
        assert!(robust_cleaning_time(5.0, &[], &cfg(UncertaintySet::Box)).is_err());
        assert_eq!(
            robust_cleaning_time(5.0, &[], &cfg(UncertaintySet::None)).unwrap(),
            5.0
        );
    }

    #[test]
    fn single_scenario() {
        for kind in UncertaintySet::ROBUST {
            let mut c = cfg(kind);
            c.omega = 0.5;
            let t = robust_cleaning_time(10.0, &[4.0], &c).unwrap();
            let expected = if kind == UncertaintySet::Ellipsoidal { 12.0 } else { 14.0 };
            assert_eq!(t, expected, "{kind}");
        }
    }

    #[test]
    fn names_round_trip() {
        for kind in [UncertaintySet::None, UncertaintySet::Box, UncertaintySet::ConvexHull, UncertaintySet::Ellipsoidal] {
            assert_eq!(kind.as_str().parse::<UncertaintySet>().unwrap(), kind);
        }
        assert_eq!("convex-hull".parse::<UncertaintySet>().unwrap(), UncertaintySet::ConvexHull);
    }
}
