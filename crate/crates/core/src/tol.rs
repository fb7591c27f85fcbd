use crate::error::{Error, Result};

/// Numerical thresholds shared by every analysis step.
///
/// One policy is fixed at the start of an analysis and passed by reference
/// to every routine that makes a rank, clustering or residual decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rel: f64,
    /// Absolute radius used to cluster eigenvalues.
    pub eig_cluster_abs: f64,
    /// Generic residual bound for assertions.
    pub residual: f64,
    /// Relative bound on `‖A − A*‖_F / ‖A‖_F`.
    pub hermitian: f64,
    /// Bound on `‖U*U − 1‖_F`.
    pub unitary: f64,
    /// Smallest eigenvalue an invariant state needs to count as faithful.
    pub faithful_min_eig: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_rel: 1e-10,
            eig_cluster_abs: 1e-8,
            residual: 1e-8,
            hermitian: 1e-10,
            unitary: 1e-10,
            faithful_min_eig: 1e-9,
        }
    }
}

impl Tolerance {
    pub const FIELDS: [&'static str; 6] = [
        "rank_rel",
        "eig_cluster_abs",
        "residual",
        "hermitian",
        "unitary",
        "faithful_min_eig",
    ];

    /// Rejects non-finite or non-positive fields.
    pub fn validate(&self) -> Result<()> {
        for name in Self::FIELDS {
            let value = self.get(name).expect("known field");
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidTolerance {
                    field: name.to_string(),
                    value,
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, field: &str) -> Option<f64> {
        match field {
            "rank_rel" => Some(self.rank_rel),
            "eig_cluster_abs" => Some(self.eig_cluster_abs),
            "residual" => Some(self.residual),
            "hermitian" => Some(self.hermitian),
            "unitary" => Some(self.unitary),
            "faithful_min_eig" => Some(self.faithful_min_eig),
            _ => None,
        }
    }

    /// Returns a copy with `field` replaced; unknown names and invalid values are errors.
    pub fn with(mut self, field: &str, value: f64) -> Result<Self> {
        let slot = match field {
            "rank_rel" => &mut self.rank_rel,
            "eig_cluster_abs" => &mut self.eig_cluster_abs,
            "residual" => &mut self.residual,
            "hermitian" => &mut self.hermitian,
            "unitary" => &mut self.unitary,
            "faithful_min_eig" => &mut self.faithful_min_eig,
            _ => return Err(Error::UnknownToleranceField(field.to_string())),
        };
        *slot = value;
        self.validate()?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Tolerance::default().validate().unwrap();
    }

    #[test]
    fn override_by_name() {
        let tol = Tolerance::default().with("residual", 1e-6).unwrap();
        assert_eq!(tol.residual, 1e-6);
        assert!(Tolerance::default().with("residual", 0.0).is_err());
        assert!(Tolerance::default().with("residual", f64::NAN).is_err());
        assert!(Tolerance::default().with("bogus", 1.0).is_err());
    }
}
