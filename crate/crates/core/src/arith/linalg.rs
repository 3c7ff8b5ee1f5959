use num_traits::{One, Zero};

use super::Rat;

/// Determinant of a square rational matrix by Gaussian elimination.
pub fn det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m.to_vec();
    let mut sign = Rat::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rat::zero();
        };
        if piv != col {
            a.swap(piv, col);
            sign = -sign;
        }
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            for c in col..n {
                let d = &f * &a[col][c];
                a[r][c] -= d;
            }
        }
    }
    (0..n).fold(sign, |acc, i| acc * &a[i][i])
}

/// Determinants of the upper-left `k×k` blocks, `k = 1..=n`.
pub fn leading_principal_minors(m: &[Vec<Rat>]) -> Vec<Rat> {
    (1..=m.len())
        .map(|k| {
            let block: Vec<Vec<Rat>> = m[..k].iter().map(|row| row[..k].to_vec()).collect();
            det(&block)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rat>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| Rat::from_integer(x.into())).collect())
            .collect()
    }

    #[test]
    fn small_determinants() {
        assert_eq!(det(&mat(&[&[2, 1], &[1, 2]])), Rat::from_integer(3.into()));
        assert_eq!(det(&mat(&[&[0, 1], &[1, 0]])), Rat::from_integer((-1).into()));
        assert_eq!(det(&mat(&[&[1, 2], &[2, 4]])), Rat::zero());
        let m = mat(&[&[-2, 1, 0], &[1, -2, 1], &[0, 1, -2]]);
        let minors: Vec<i64> = leading_principal_minors(&m)
            .iter()
            .map(|q| q.to_integer().try_into().unwrap())
            .collect();
        assert_eq!(minors, vec![-2, 3, -4]);
    }
}
