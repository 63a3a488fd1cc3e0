//! Fitted model presets shipped as data, so counterfactual predictions can
//! run without any raw study files.

use crate::error::Result;
use crate::selection::StepPolicy;
use crate::stats::{GammaParams, LatentModel};

/// A fitted latent model together with its selection policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub latent: LatentModel,
    pub policy: StepPolicy,
}

/// Economics experiments fit: gamma(1.426, 0.148) true effects,
/// gamma(2.735, 0.103) standard errors, selection weights (0, 0.038, 1).
/// The insignificant band is exactly zero: only significant or nearly
/// significant results were eligible.
pub fn econ_table1() -> Preset {
    Preset {
        name: "econ-table1",
        latent: LatentModel::new(
            GammaParams::new(1.426, 0.148).expect("valid parameters"),
            GammaParams::new(2.735, 0.103).expect("valid parameters"),
        ),
        policy: StepPolicy::default_bands(0.0, 0.038).expect("valid policy"),
    }
}

/// Psychology experiments fit: gamma(0.906, 0.156) true effects,
/// gamma(4.762, 0.044) standard errors, selection weights (0.012, 0.299, 1).
pub fn psych_table1() -> Preset {
    Preset {
        name: "psych-table1",
        latent: LatentModel::new(
            GammaParams::new(0.906, 0.156).expect("valid parameters"),
            GammaParams::new(4.762, 0.044).expect("valid parameters"),
        ),
        policy: StepPolicy::default_bands(0.012, 0.299).expect("valid policy"),
    }
}

/// Look a preset up by its CLI name.
pub fn by_name(name: &str) -> Result<Preset> {
    match name {
        "econ-table1" => Ok(econ_table1()),
        "psych-table1" => Ok(psych_table1()),
        other => Err(crate::error::Error::config(format!(
            "unknown preset '{other}' (available: econ-table1, psych-table1)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_point_estimates() {
        let e = econ_table1();
        assert_eq!(e.latent.theta.shape(), 1.426);
        assert_eq!(e.latent.theta.scale(), 0.148);
        assert_eq!(e.latent.sigma.shape(), 2.735);
        assert_eq!(e.latent.sigma.scale(), 0.103);
        assert_eq!(e.policy.weights(), &[0.0, 0.038, 1.0]);
        let p = psych_table1();
        assert_eq!(p.latent.theta.shape(), 0.906);
        assert_eq!(p.latent.theta.scale(), 0.156);
        assert_eq!(p.latent.sigma.shape(), 4.762);
        assert_eq!(p.latent.sigma.scale(), 0.044);
        assert_eq!(p.policy.weights(), &[0.012, 0.299, 1.0]);
        assert_eq!(p.policy.cutoffs(), &[1.64, 1.96]);
    }

    #[test]
    fn lookup() {
        assert!(by_name("econ-table1").is_ok());
        assert!(by_name("psych-table1").is_ok());
        assert!(by_name("nope").is_err());
    }
}
