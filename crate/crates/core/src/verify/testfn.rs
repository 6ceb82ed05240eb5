//! Named test functions used by the gradient and occupation estimators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    One,
    /// `1_{x_1 <= threshold}`
    IndicatorLeftHalf { threshold: f64 },
    /// first coordinate (unbounded; occupation use only)
    Coordinate,
    /// `sin(freq * x_1)`
    Sine { freq: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::One => 1.0,
            TestFunction::IndicatorLeftHalf { threshold } => {
                if x[0] <= *threshold {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Coordinate => x[0],
            TestFunction::Sine { freq } => (freq * x[0]).sin(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, TestFunction::Coordinate)
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "one" => Ok(TestFunction::One),
            "indicator_left_half" => Ok(TestFunction::IndicatorLeftHalf { threshold: 0.5 }),
            "coordinate" => Ok(TestFunction::Coordinate),
            "sin" => Ok(TestFunction::Sine { freq: 1.0 }),
            _ => Err(Error::UnknownName { registry: "test function".into(), name: name.into() }),
        }
    }
}
