//! Test-side oracles, written without the library's own helpers so that
//! the checks do not share code with what they check.

#![allow(dead_code)]

use std::io::Write;

use drsub::objectives::Objective;
use drsub::{Point, Polytope};
use rand::Rng;

/// Writes straight to stderr so the line shows up even when the test
/// harness captures output.
pub fn report(line: &str) {
    let mut err = std::io::stderr();
    let _ = writeln!(err, "{line}");
}

pub fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn pt(v: &[f64]) -> Point {
    Point::new(v.to_vec()).unwrap()
}

pub fn join(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x.max(*y)).collect()
}

pub fn meet(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x.min(*y)).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn uniform<R: Rng>(rng: &mut R, n: usize, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.0..=hi)).collect()
}

pub fn value<F: Objective + ?Sized>(f: &F, x: &[f64]) -> f64 {
    f.value(&pt(x)).unwrap()
}

pub fn gradient<F: Objective + ?Sized>(f: &F, x: &[f64]) -> Vec<f64> {
    f.gradient(&pt(x)).unwrap().into_vec()
}

/// `min F` over `[0,1]^n`. A DR-submodular function is concave along each
/// coordinate, so the minimum over a box sits at a vertex.
pub fn cube_minimum<F: Objective + ?Sized>(f: &F) -> f64 {
    let n = f.dim();
    (0..1u32 << n)
        .map(|mask| {
            let x: Vec<f64> = (0..n).map(|i| f64::from((mask >> i) & 1)).collect();
            value(f, &x)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn central_difference<F: Objective + ?Sized>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[i] += h;
            minus[i] -= h;
            (value(f, &plus) - value(f, &minus)) / (2.0 * h)
        })
        .collect()
}

pub fn is_feasible(poly: &Polytope, x: &[f64], tol: f64) -> bool {
    let a = poly.a();
    let rows_ok = (0..a.nrows()).all(|i| {
        let lhs: f64 = (0..x.len()).map(|j| a[(i, j)] * x[j]).sum();
        lhs <= poly.b()[i] + tol
    });
    rows_ok && x.iter().zip(poly.upper()).all(|(&v, &u)| v >= -tol && v <= u + tol)
}

/// Solves the square system by Gaussian elimination with partial pivoting.
pub fn solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-11 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let factor = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= factor * m[col][c];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    Some(x)
}

/// `max cᵀx` over `{Ax ≤ b, 0 ≤ x ≤ u}` by trying every set of `n` tight
/// constraints.
pub fn enumerate_lp(poly: &Polytope, c: &[f64]) -> Option<f64> {
    let n = poly.dim();
    let a = poly.a();
    let mut cons: Vec<(Vec<f64>, f64)> = (0..a.nrows())
        .map(|i| ((0..n).map(|j| a[(i, j)]).collect(), poly.b()[i]))
        .collect();
    for j in 0..n {
        let mut lo = vec![0.0; n];
        lo[j] = -1.0;
        cons.push((lo, 0.0));
        let mut hi = vec![0.0; n];
        hi[j] = 1.0;
        cons.push((hi, poly.upper()[j]));
    }
    let k = cons.len();
    let mut best: Option<f64> = None;
    // iterate subsets of size n by bitmask; k ≤ 18
    for mask in 0u32..(1u32 << k) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let chosen: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        let m = chosen.iter().map(|&i| cons[i].0.clone()).collect();
        let rhs = chosen.iter().map(|&i| cons[i].1).collect();
        if let Some(x) = solve(m, rhs) {
            if cons.iter().all(|(row, b)| dot(row, &x) <= b + 1e-9) {
                let v = dot(c, &x);
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
    }
    best
}
