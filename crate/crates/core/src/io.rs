//! JSON forms of covariance matrices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::CovMatrix;

/// `{n, gamma}` with `gamma` the `2n×2n` matrix flattened row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovMatrixJson {
    pub n: usize,
    pub gamma: Vec<f64>,
}

impl From<&CovMatrix> for CovMatrixJson {
    fn from(cm: &CovMatrix) -> Self {
        let m = 2 * cm.n;
        Self { n: cm.n, gamma: (0..m * m).map(|i| cm.gamma[(i / m, i % m)]).collect() }
    }
}

impl TryFrom<CovMatrixJson> for CovMatrix {
    type Error = Error;

    fn try_from(j: CovMatrixJson) -> Result<Self> {
        let m = 2 * j.n;
        if j.gamma.len() != m * m {
            return Err(Error::DimensionMismatch { expected: m * m, got: j.gamma.len() });
        }
        CovMatrix::new_physical(j.n, DMatrix::from_row_slice(m, m, &j.gamma))
    }
}

pub fn cm_to_json(cm: &CovMatrix) -> serde_json::Value {
    serde_json::to_value(CovMatrixJson::from(cm)).expect("plain struct serializes")
}

pub fn cm_from_json(value: &serde_json::Value) -> Result<CovMatrix> {
    let j: CovMatrixJson = serde_json::from_value(value.clone()).map_err(|e| Error::InvalidInput(format!("bad covariance matrix JSON: {e}")))?;
    CovMatrix::try_from(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::thermal_cm;

    #[test]
    fn round_trip() {
        let cm = thermal_cm(0.7, 2).unwrap();
        let back = cm_from_json(&cm_to_json(&cm)).unwrap();
        assert_eq!(back, cm);
    }

    #[test]
    fn rejects_wrong_length_and_unphysical() {
        let bad = serde_json::json!({"n": 1, "gamma": [1.0, 0.0, 0.0]});
        assert!(matches!(cm_from_json(&bad), Err(Error::DimensionMismatch { .. })));
        let unphysical = serde_json::json!({"n": 1, "gamma": [0.5, 0.0, 0.0, 0.5]});
        assert!(cm_from_json(&unphysical).is_err());
    }
}
