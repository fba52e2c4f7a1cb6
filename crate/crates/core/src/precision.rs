use std::fmt;

use serde::Serialize;

/// How a [`PrecisionResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Series,
    Integral,
    Asymptotic,
    LargeN,
    SmallSqueezing,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Integral => "integral",
            Method::Asymptotic => "asymptotic",
            Method::LargeN => "large-N",
            Method::SmallSqueezing => "small-squeezing",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Warning attached to an approximate result used outside its regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RegimeAdvisory {
    /// Large-`n` law applied at small `n`.
    PhotonNumberTooSmall { n: f64 },
    /// Small-squeezing law applied at `nN` not much below 1.
    EnergyNotSmall { energy: f64 },
    /// The approximate fidelity left `[0, 1]` and was clamped.
    FidelityClamped { raw: f64 },
}

impl fmt::Display for RegimeAdvisory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeAdvisory::PhotonNumberTooSmall { n } => {
                write!(f, "large-n asymptotics used at n = {n} < 1")
            }
            RegimeAdvisory::EnergyNotSmall { energy } => {
                write!(f, "small-squeezing law used at nN = {energy}, not << 1")
            }
            RegimeAdvisory::FidelityClamped { raw } => {
                write!(f, "approximate fidelity {raw} clamped into [0, 1]")
            }
        }
    }
}

/// Fidelity and Holevo variance from one evaluation method.
///
/// `infidelity = 1 - F` is carried separately because for large photon
/// numbers it is far smaller than the rounding error of `F` itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionResult {
    pub fidelity: f64,
    pub infidelity: f64,
    pub holevo_variance: f64,
    /// `V / 4`, the statistical variance of the estimate in the peaked regime.
    pub stat_variance: f64,
    pub method: Method,
    pub err_est: f64,
    pub advisory: Option<RegimeAdvisory>,
}

impl PrecisionResult {
    pub(crate) fn from_infidelity(infidelity: f64, method: Method, err_est: f64) -> Self {
        let fidelity = 1.0 - infidelity;
        let holevo_variance = if fidelity > 0.0 {
            infidelity * (1.0 + fidelity) / (fidelity * fidelity)
        } else {
            f64::INFINITY
        };
        PrecisionResult {
            fidelity,
            infidelity,
            holevo_variance,
            stat_variance: holevo_variance / 4.0,
            method,
            err_est,
            advisory: None,
        }
    }

    pub(crate) fn from_fidelity(fidelity: f64, method: Method, err_est: f64) -> Self {
        let mut r = Self::from_infidelity(1.0 - fidelity, method, err_est);
        r.fidelity = fidelity;
        r
    }

    pub(crate) fn with_advisory(mut self, advisory: Option<RegimeAdvisory>) -> Self {
        self.advisory = advisory;
        self
    }

    pub fn is_informative(&self) -> bool {
        self.fidelity > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_matches_fidelity() {
        for f in [1e-3, 0.2, 0.5, 0.9, 0.999_999] {
            let r = PrecisionResult::from_fidelity(f, Method::Series, 0.0);
            let v = f.powi(-2) - 1.0;
            assert!((r.holevo_variance - v).abs() <= 1e-9 * v, "{f}");
            assert_eq!(r.stat_variance, r.holevo_variance / 4.0);
        }
    }

    #[test]
    fn zero_and_perfect_fidelity() {
        let zero = PrecisionResult::from_fidelity(0.0, Method::Series, 0.0);
        assert!(zero.holevo_variance.is_infinite());
        assert!(!zero.is_informative());
        let one = PrecisionResult::from_infidelity(0.0, Method::Series, 0.0);
        assert_eq!(one.holevo_variance, 0.0);
    }
}
