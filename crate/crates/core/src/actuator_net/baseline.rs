use nalgebra::{DMatrix, DVector};

use super::features::ActuatorDataset;
use super::train::Metrics;
use crate::error::{Error, Result};

/// Ordinary least-squares torque regressor with intercept, fitted through the
/// normal equations. Serves as the reference an actuator net has to beat.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBaseline {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearBaseline {
    pub fn fit(data: &ActuatorDataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("cannot fit a baseline to an empty dataset"));
        }
        // Solve on standardised features for conditioning, then map back.
        let norm = data.normalization();
        let width = data.width();
        let cols = width + 1;
        let mut ata = DMatrix::<f64>::zeros(cols, cols);
        let mut aty = DVector::<f64>::zeros(cols);
        let mut row = vec![0.0; cols];
        for i in 0..data.len() {
            norm.normalize_into(data.features(i), &mut row[..width]);
            row[width] = 1.0;
            let y = data.target(i);
            for a in 0..cols {
                aty[a] += row[a] * y;
                for b in a..cols {
                    ata[(a, b)] += row[a] * row[b];
                }
            }
        }
        for a in 0..cols {
            for b in 0..a {
                ata[(a, b)] = ata[(b, a)];
            }
        }
        let solution = match ata.clone().cholesky() {
            Some(chol) => chol.solve(&aty),
            None => ata
                .lu()
                .solve(&aty)
                .ok_or_else(|| Error::invalid("normal equations are singular"))?,
        };

        let mut weights = vec![0.0; width];
        let mut intercept = solution[width];
        for k in 0..width {
            weights[k] = solution[k] / norm.feature_std[k];
            intercept -= weights[k] * norm.feature_mean[k];
        }
        Ok(Self { weights, intercept })
    }

    pub fn predict_features(&self, features: &[f64]) -> f64 {
        self.intercept
            + self
                .weights
                .iter()
                .zip(features)
                .map(|(w, x)| w * x)
                .sum::<f64>()
    }

    pub fn evaluate(&self, data: &ActuatorDataset) -> Result<Metrics> {
        let predictions: Vec<f64> = (0..data.len())
            .map(|i| self.predict_features(data.features(i)))
            .collect();
        Metrics::from_predictions(&predictions, data.targets())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actuator_net::FeatureWindow;

    #[test]
    fn recovers_exact_linear_map() {
        let samples = (0..40)
            .map(|i| {
                let a = (i as f64 * 0.37).sin();
                let b = (i as f64 * 0.11).cos();
                let c = i as f64 * 0.05;
                let w = FeatureWindow::new(vec![a, b, c], vec![a * b, c * c]).unwrap();
                (w, 2.0 * a - 3.0 * b + 0.5 * c + 0.25 * a * b - c * c + 4.0)
            })
            .collect();
        let data = ActuatorDataset::from_samples(samples).unwrap();
        let fit = LinearBaseline::fit(&data).unwrap();
        let expect = [2.0, -3.0, 0.5, 0.25, -1.0];
        for (w, e) in fit.weights.iter().zip(expect) {
            assert!((w - e).abs() < 1e-9, "{w} vs {e}");
        }
        assert!((fit.intercept - 4.0).abs() < 1e-9);
        assert!(fit.evaluate(&data).unwrap().r2 > 1.0 - 1e-12);
    }
}
