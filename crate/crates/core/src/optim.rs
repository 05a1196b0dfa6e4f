//! Exact small-scale optimization: isotonic projection, nonnegative least
//! squares and least-distance programming over the rationals.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::BigQ;

/// Euclidean projection of `y` onto `{x : x₁ ≤ x₂ ≤ … ≤ x_n}` by pooling
/// adjacent violators.
pub fn isotonic_projection(y: &[BigQ]) -> Vec<BigQ> {
    // blocks of (sum, count)
    let mut blocks: Vec<(BigQ, usize)> = Vec::new();
    for v in y {
        blocks.push((v.clone(), 1));
        while blocks.len() >= 2 {
            let (s2, c2) = blocks[blocks.len() - 1].clone();
            let (s1, c1) = blocks[blocks.len() - 2].clone();
            // mean1 > mean2  ⇔  s1·c2 > s2·c1
            if &s1 * BigQ::from_integer(c2.into()) > &s2 * BigQ::from_integer(c1.into()) {
                blocks.pop();
                blocks.pop();
                blocks.push((s1 + s2, c1 + c2));
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for (s, c) in blocks {
        let mean = s / BigQ::from_integer(c.into());
        out.extend(core::iter::repeat_n(mean, c));
    }
    out
}

fn dot(a: &[BigQ], b: &[BigQ]) -> BigQ {
    a.iter().zip(b).map(|(x, y)| x * y).fold(BigQ::zero(), |acc, t| acc + t)
}

/// Solves `M z = r` for square `M` by Gaussian elimination; `None` if singular.
fn solve(mut m: Vec<Vec<BigQ>>, mut r: Vec<BigQ>) -> Option<Vec<BigQ>> {
    let n = r.len();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        r.swap(c, p);
        let inv = m[c][c].recip();
        for j in c..n {
            m[c][j] = &m[c][j] * &inv;
        }
        r[c] = &r[c] * &inv;
        for i in 0..n {
            if i == c || m[i][c].is_zero() {
                continue;
            }
            let factor = m[i][c].clone();
            for j in c..n {
                let t = &factor * &m[c][j];
                m[i][j] -= t;
            }
            let t = &factor * &r[c];
            r[i] -= t;
        }
    }
    Some(r)
}

/// Lawson–Hanson active-set method for `min |E u - f|` subject to `u ≥ 0`;
/// `e` is given by columns.
pub fn nnls(cols: &[Vec<BigQ>], f: &[BigQ]) -> Result<Vec<BigQ>> {
    let m = cols.len();
    let rows = f.len();
    let mut u = vec![BigQ::zero(); m];
    let mut passive = vec![false; m];
    let residual = |u: &[BigQ]| -> Vec<BigQ> {
        (0..rows)
            .map(|i| {
                let s = (0..m).filter(|&j| !u[j].is_zero()).fold(BigQ::zero(), |acc, j| acc + &cols[j][i] * &u[j]);
                &f[i] - s
            })
            .collect()
    };
    // each outer step strictly decreases the residual, so the active sets
    // never repeat; the cap only guards against implementation errors
    for _ in 0..(1usize << m.min(20)).max(64) {
        let r = residual(&u);
        let w: Vec<BigQ> = cols.iter().map(|c| dot(c, &r)).collect();
        let Some(t) = (0..m).filter(|&j| !passive[j] && w[j].is_positive()).max_by(|&a, &b| w[a].cmp(&w[b]).then(b.cmp(&a)))
        else {
            return Ok(u);
        };
        passive[t] = true;
        loop {
            let idx: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
            let gram: Vec<Vec<BigQ>> = idx.iter().map(|&a| idx.iter().map(|&b| dot(&cols[a], &cols[b])).collect()).collect();
            let rhs: Vec<BigQ> = idx.iter().map(|&a| dot(&cols[a], f)).collect();
            let z = solve(gram, rhs).ok_or_else(|| Error::Internal(alloc::string::String::from("degenerate passive set")))?;
            if z.iter().all(|x| x.is_positive()) {
                for (k, &j) in idx.iter().enumerate() {
                    u[j] = z[k].clone();
                }
                break;
            }
            let mut alpha = BigQ::one();
            for (k, &j) in idx.iter().enumerate() {
                if !z[k].is_positive() {
                    let a = &u[j] / (&u[j] - &z[k]);
                    if a < alpha {
                        alpha = a;
                    }
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                let step = &alpha * (&z[k] - &u[j]);
                u[j] += step;
                if !u[j].is_positive() {
                    u[j] = BigQ::zero();
                    passive[j] = false;
                }
            }
        }
    }
    Err(Error::Internal(alloc::string::String::from("nonnegative least squares did not terminate")))
}

/// Least-distance programming: the point of least Euclidean norm in
/// `{x : g_i·x ≥ h_i}`, or `None` when the system is infeasible.
pub fn least_distance(g: &[Vec<BigQ>], h: &[BigQ], dim: usize) -> Result<Option<Vec<BigQ>>> {
    if g.is_empty() {
        return Ok(Some(vec![BigQ::zero(); dim]));
    }
    let cols: Vec<Vec<BigQ>> = g
        .iter()
        .zip(h)
        .map(|(row, hi)| {
            let mut c = row.clone();
            c.push(hi.clone());
            c
        })
        .collect();
    let mut target = vec![BigQ::zero(); dim + 1];
    target[dim] = BigQ::one();
    let u = nnls(&cols, &target)?;
    let r: Vec<BigQ> = (0..=dim)
        .map(|i| cols.iter().zip(&u).fold(BigQ::zero(), |acc, (c, x)| acc + &c[i] * x) - &target[i])
        .collect();
    if r[dim].is_zero() {
        return Ok(None);
    }
    let scale = -r[dim].recip();
    Ok(Some(r[..dim].iter().map(|x| x * &scale).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: i64, d: i64) -> BigQ {
        BigQ::new(n.into(), d.into())
    }

    #[test]
    fn pav_pools_violators() {
        assert_eq!(isotonic_projection(&[b(3, 1), b(1, 1), b(2, 1)]), vec![b(2, 1); 3]);
        assert_eq!(isotonic_projection(&[b(1, 1), b(3, 1), b(2, 1)]), vec![b(1, 1), b(5, 2), b(5, 2)]);
    }

    #[test]
    fn ldp_half_plane() {
        // x + y ≥ 2 → (1, 1)
        let x = least_distance(&[vec![b(1, 1), b(1, 1)]], &[b(2, 1)], 2).unwrap().unwrap();
        assert_eq!(x, vec![b(1, 1), b(1, 1)]);
        // x ≥ 1 and -x ≥ 0 is infeasible
        assert!(least_distance(&[vec![b(1, 1)], vec![b(-1, 1)]], &[b(1, 1), b(0, 1)], 1).unwrap().is_none());
        // x ≥ 1, y ≥ x → (1, 1)
        let x = least_distance(&[vec![b(1, 1), b(0, 1)], vec![b(-1, 1), b(1, 1)]], &[b(1, 1), b(0, 1)], 2).unwrap().unwrap();
        assert_eq!(x, vec![b(1, 1), b(1, 1)]);
    }
}
