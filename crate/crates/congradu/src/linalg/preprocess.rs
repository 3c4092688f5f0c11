//! Data-matrix preprocessing: column mean-centering and row normalization.

use super::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowNorm {
    L1,
    L2,
}

/// Subtracts the mean of each column; rows are observations.
pub fn mean_center(data: &Matrix) -> Matrix {
    let m = data.nrows() as f64;
    let mut out = data.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.iter().sum::<f64>() / m;
        col.add_scalar_mut(-mean);
    }
    out
}

/// Scales each row to unit length in the chosen norm; all-zero rows are left
/// unchanged.
pub fn row_normalize(data: &Matrix, norm: RowNorm) -> Matrix {
    let mut out = data.clone();
    for mut row in out.row_iter_mut() {
        let len = match norm {
            RowNorm::L1 => row.iter().map(|v| v.abs()).sum::<f64>(),
            RowNorm::L2 => row.norm(),
        };
        if len > 0.0 {
            row /= len;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centering_column() {
        let m = Matrix::from_column_slice(2, 1, &[1.0, 3.0]);
        let c = mean_center(&m);
        assert_eq!(c.as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn centered_columns_sum_to_zero() {
        let m = Matrix::from_row_slice(3, 2, &[1.0, -2.0, 4.0, 0.5, -3.0, 7.0]);
        let c = mean_center(&m);
        for col in c.column_iter() {
            assert!(col.iter().sum::<f64>().abs() <= 1e-12);
        }
    }

    #[test]
    fn row_normalize_l1_and_zero_rows() {
        let m = Matrix::from_row_slice(2, 2, &[2.0, 2.0, 0.0, 0.0]);
        let r = row_normalize(&m, RowNorm::L1);
        assert_eq!(r.row(0).iter().cloned().collect::<Vec<_>>(), vec![0.5, 0.5]);
        assert_eq!(r.row(1).iter().cloned().collect::<Vec<_>>(), vec![0.0, 0.0]);
    }

    #[test]
    fn row_normalize_l2() {
        let m = Matrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let r = row_normalize(&m, RowNorm::L2);
        assert_eq!(r.as_slice(), &[0.6, 0.8]);
    }
}
