//! Dense solves for the tiny (≤ 5×5) systems that show up in active-set work.

/// Solves `a·x = b` for an `n×n` system with column-stacked right-hand sides,
/// using Gaussian elimination with partial pivoting. Returns `None` when a
/// pivot falls below `rel_tol` times the largest entry of `a`.
pub(crate) fn solve<const R: usize>(
    a: &mut [[f64; 5]; 5],
    b: &mut [[f64; R]; 5],
    n: usize,
    rel_tol: f64,
) -> Option<()> {
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| a[i][j].abs())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() <= rel_tol * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            for r in 0..R {
                b[row][r] -= f * b[col][r];
            }
        }
    }
    for col in (0..n).rev() {
        for r in 0..R {
            let mut acc = b[col][r];
            for k in col + 1..n {
                acc -= a[col][k] * b[k][r];
            }
            b[col][r] = acc / a[col][col];
        }
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_detects_singularity() {
        let mut a = [[0.0; 5]; 5];
        a[0][0] = 2.0;
        a[0][1] = 1.0;
        a[1][0] = 1.0;
        a[1][1] = 3.0;
        let mut b = [[0.0; 1]; 5];
        b[0][0] = 3.0;
        b[1][0] = 5.0;
        solve(&mut a, &mut b, 2, 1e-12).unwrap();
        assert!((b[0][0] - 0.8).abs() < 1e-15);
        assert!((b[1][0] - 1.4).abs() < 1e-15);

        let mut a = [[0.0; 5]; 5];
        a[0][0] = 1.0;
        a[0][1] = 2.0;
        a[1][0] = 2.0;
        a[1][1] = 4.0;
        let mut b = [[1.0; 1]; 5];
        assert!(solve(&mut a, &mut b, 2, 1e-12).is_none());
    }
}
