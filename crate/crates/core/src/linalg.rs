//! Exact linear algebra over the rationals.

use num::{BigInt, One, Zero};

use crate::rat::{rat_int, Rat};

pub type Mat = Vec<Vec<Rat>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { rat_int(1) } else { rat_int(0) })
                .collect()
        })
        .collect()
}

pub fn is_identity(m: &Mat) -> bool {
    m.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, x)| if i == j { x.is_one() } else { x.is_zero() })
    })
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![rat_int(0); m]; n];
    for i in 0..n {
        for (l, brow) in b.iter().enumerate().take(k) {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                if brow[j].is_zero() {
                    continue;
                }
                let t = &a[i][l] * &brow[j];
                out[i][j] += t;
            }
        }
    }
    out
}

/// Exact inverse by Gauss-Jordan elimination; `None` for singular input.
pub fn invert(m: &Mat) -> Option<Mat> {
    let n = m.len();
    let mut a = m.clone();
    let mut inv = identity(n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t1 = &f * &a[col][j];
                a[r][j] -= t1;
                let t2 = &f * &inv[col][j];
                inv[r][j] -= t2;
            }
        }
    }
    Some(inv)
}

/// Determinant of a rational matrix.
///
/// Denominators are cleared row by row and the integer core is handled with
/// fraction-free Bareiss elimination, so intermediate entries stay
/// single-fraction-free and small.
pub fn det_bareiss(m: &Mat) -> Rat {
    let n = m.len();
    if n == 0 {
        return rat_int(1);
    }
    let mut scale = Rat::one();
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for row in m {
        let mut lcm = BigInt::one();
        for x in row {
            lcm = num::integer::lcm(lcm, x.denom().clone());
        }
        scale *= Rat::new(BigInt::one(), lcm.clone());
        a.push(
            row.iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect(),
        );
    }

    let mut sign = 1i64;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return rat_int(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det_int = a[n - 1][n - 1].clone();
    Rat::from_integer(det_int * BigInt::from(sign)) * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn invert_round_trip() {
        let m = vec![
            vec![rat_int(2), rat_int(1), rat_int(0)],
            vec![rat_int(-1), rat_int(1), rat_int(1)],
            vec![rat_int(0), rat_int(2), rat_int(-1)],
        ];
        let inv = invert(&m).unwrap();
        assert!(is_identity(&mat_mul(&m, &inv)));
        assert!(is_identity(&mat_mul(&inv, &m)));
    }

    #[test]
    fn invert_singular_is_none() {
        let m = vec![vec![rat_int(1), rat_int(2)], vec![rat_int(2), rat_int(4)]];
        assert!(invert(&m).is_none());
    }

    #[test]
    fn bareiss_matches_cofactor_values() {
        let m = vec![
            vec![rat_int(1), rat(1, 2)],
            vec![rat_int(3), rat_int(4)],
        ];
        // 1·4 − 1/2·3 = 5/2
        assert_eq!(det_bareiss(&m), rat(5, 2));

        let m3 = vec![
            vec![rat_int(2), rat_int(0), rat_int(1)],
            vec![rat_int(1), rat_int(-1), rat_int(3)],
            vec![rat_int(0), rat_int(5), rat_int(-2)],
        ];
        // expand: 2·((−1)(−2)−15) − 0 + 1·(5−0) = 2·(−13) + 5 = −21
        assert_eq!(det_bareiss(&m3), rat_int(-21));

        let sing = vec![vec![rat_int(1), rat_int(2)], vec![rat_int(2), rat_int(4)]];
        assert_eq!(det_bareiss(&sing), rat_int(0));
    }

    #[test]
    fn bareiss_pivoting() {
        let m = vec![
            vec![rat_int(0), rat_int(1)],
            vec![rat_int(1), rat_int(0)],
        ];
        assert_eq!(det_bareiss(&m), rat_int(-1));
    }
}
