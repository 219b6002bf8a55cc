use serde::{Deserialize, Serialize};
use slp_core::basis::{BoundaryCondition, ProblemSpec};
use slp_core::expansion::parse;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub f: String,
    pub g: String,
    pub gamma: f64,
    /// `"alpha,beta"` for `α y(-1) + β y'(-1) = 0`.
    pub bc_left: String,
    /// `"alpha,beta"` for `α y(1) + β y'(1) = 0`.
    pub bc_right: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correction: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection_tol: Option<f64>,
    /// Emit `(N or k, log10 relative error, corrected)` rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<bool>,
    /// Size whose corrected eigenvalues serve as the plot reference.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_n: Option<usize>,
    /// Sizes for the `ẑ_N(-1)/ŷ_N(-1)` check of `validate`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_n: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_ref: Option<usize>,
    /// Test hook: perturb `Q` before the quadrature comparison in `validate`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrupt_q: Option<bool>,
}

pub fn parse_condition(text: &str) -> Result<BoundaryCondition, CliError> {
    let bad = || CliError::Usage(format!("boundary condition `{text}` must be \"alpha,beta\""));
    let mut parts = text.split(',').map(str::trim);
    let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(bad());
    };
    let alpha: f64 = a.parse().map_err(|_| bad())?;
    let beta: f64 = b.parse().map_err(|_| bad())?;
    BoundaryCondition::new(alpha, beta).map_err(|e| CliError::Usage(e.to_string()))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn spec(&self) -> Result<ProblemSpec, CliError> {
        let p = &self.problem;
        let expr = |label: &str, text: &str| {
            parse(text).map_err(|e| CliError::Usage(format!("{label} = \"{text}\": {e}")))
        };
        Ok(ProblemSpec {
            f: expr("f", &p.f)?,
            g: expr("g", &p.g)?,
            gamma: p.gamma,
            bc_left: parse_condition(&p.bc_left)?,
            bc_right: parse_condition(&p.bc_right)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[problem]
f = "cos(2*pi*x)"
g = "10*(2-exp(-x))"
gamma = 0.25
bc_left = "1,1"
bc_right = "1, -1"

[run]
n_list = [49, 99]
k_list = [5]
"#;

    #[test]
    fn round_trip_is_idempotent() {
        let a = RunConfig::from_toml(SAMPLE).unwrap();
        let printed = a.to_toml();
        let b = RunConfig::from_toml(&printed).unwrap();
        assert_eq!(a, b);
        assert_eq!(printed, b.to_toml());
    }

    #[test]
    fn conditions() {
        assert_eq!(parse_condition(" 0 ,1").unwrap(), BoundaryCondition::NEUMANN);
        assert!(parse_condition("1").is_err());
        assert!(parse_condition("1,2,3").is_err());
        assert!(parse_condition("0,0").is_err());
        assert!(parse_condition("a,1").is_err());
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = SAMPLE.replace("k_list", "k_lst");
        assert!(matches!(RunConfig::from_toml(&text), Err(CliError::Usage(_))));
    }
}
