use super::{ClassifierError, Matrix};
use crate::stats;

/// Per-column standardization estimated on training rows. `NaN` entries are
/// treated as masked: they are ignored when fitting and become 0 (the
/// training mean) after transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Columns with no unmasked training value.
    pub fully_masked: Vec<bool>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Result<Self, ClassifierError> {
        if x.rows() < 2 {
            return Err(ClassifierError::TooFewRows(x.rows()));
        }
        let d = x.cols();
        let mut means = vec![0.0; d];
        let mut stds = vec![1.0; d];
        let mut fully_masked = vec![false; d];
        let mut column = Vec::with_capacity(x.rows());
        for j in 0..d {
            column.clear();
            column.extend((0..x.rows()).map(|i| x.get(i, j)).filter(|v| !v.is_nan()));
            if column.is_empty() {
                fully_masked[j] = true;
                continue;
            }
            let m = stats::mean(&column);
            let s = stats::pop_std(&column);
            means[j] = m;
            // rounding in the mean can leave a tiny spread on constant columns
            stds[j] = if s > 1e-12 * m.abs().max(1.0) { s } else { 1.0 };
            if s <= 1e-12 * m.abs().max(1.0) {
                means[j] = column[0];
            }
        }
        Ok(Self {
            means,
            stds,
            fully_masked,
        })
    }

    /// Identity transform of dimension `d`.
    pub fn identity(d: usize) -> Self {
        Self {
            means: vec![0.0; d],
            stds: vec![1.0; d],
            fully_masked: vec![false; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>, ClassifierError> {
        if row.len() != self.dim() {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.dim(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&v, (m, s))| if v.is_nan() { 0.0 } else { (v - m) / s })
            .collect())
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix, ClassifierError> {
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            let t = self.transform_row(x.row(i))?;
            out.row_mut(i).copy_from_slice(&t);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_two_three() {
        let x = Matrix::from_vec(3, 1, vec![1.0, 2.0, 3.0]);
        let s = Standardizer::fit(&x).unwrap();
        assert_eq!(s.means[0], 2.0);
        assert!((s.stds[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((s.stds[0] - 0.8165).abs() < 1e-4);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let x = Matrix::from_vec(3, 2, vec![0.1, 1.0, 0.1, 2.0, 0.1, 4.0]);
        let s = Standardizer::fit(&x).unwrap();
        assert_eq!(s.stds[0], 1.0);
        let t = s.transform(&x).unwrap();
        assert!((0..3).all(|i| t.get(i, 0) == 0.0));
    }

    #[test]
    fn masked_values_impute_to_zero_and_full_mask_is_flagged() {
        let nan = f64::NAN;
        let x = Matrix::from_vec(3, 2, vec![1.0, nan, nan, nan, 3.0, nan]);
        let s = Standardizer::fit(&x).unwrap();
        assert_eq!(s.means[0], 2.0);
        assert!(s.fully_masked[1] && !s.fully_masked[0]);
        assert_eq!((s.means[1], s.stds[1]), (0.0, 1.0));
        let t = s.transform(&x).unwrap();
        assert_eq!(t.get(1, 0), 0.0);
        assert_eq!(t.get(0, 0), -1.0);
    }

    #[test]
    fn transformed_columns_are_standard() {
        let data: Vec<f64> = (0..60).map(|i| ((i * 37) % 11) as f64 * 0.7 - (i % 3) as f64).collect();
        let x = Matrix::from_vec(20, 3, data);
        let t = Standardizer::fit(&x).unwrap().transform(&x).unwrap();
        for j in 0..3 {
            let col: Vec<f64> = (0..20).map(|i| t.get(i, j)).collect();
            assert!(stats::mean(&col).abs() < 1e-9);
            assert!((stats::pop_std(&col) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn needs_two_rows_and_matching_width() {
        assert!(Standardizer::fit(&Matrix::from_vec(1, 1, vec![1.0])).is_err());
        let s = Standardizer::identity(2);
        assert!(matches!(
            s.transform_row(&[1.0]),
            Err(ClassifierError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }
}
