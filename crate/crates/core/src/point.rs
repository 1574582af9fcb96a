//! Dense points in `R^n` and the lattice operations on them.
//!
//! Every binary operation checks that both operands share a dimension.

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

/// A finite, dense real vector.
#[derive(Clone, PartialEq, Default)]
pub struct Point(Vec<f64>);

impl Point {
    /// Wraps `entries`, rejecting NaN and infinities.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(index) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Point(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Point(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Point(vec![value; n])
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        debug_assert!(entries.iter().all(|v| v.is_finite()));
        Point(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    fn check_dim(&self, other: &Point) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Point, f: impl Fn(f64, f64) -> f64) -> Result<Point> {
        self.check_dim(other)?;
        Ok(Point(
            self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    /// Entrywise maximum `x ∨ y`.
    pub fn join(&self, other: &Point) -> Result<Point> {
        self.zip_with(other, f64::max)
    }

    /// Entrywise minimum `x ∧ y`.
    pub fn meet(&self, other: &Point) -> Result<Point> {
        self.zip_with(other, f64::min)
    }

    pub fn add(&self, other: &Point) -> Result<Point> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Point) -> Result<Point> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn dot(&self, other: &Point) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    /// `self + alpha * other`
    pub fn axpy(&self, alpha: f64, other: &Point) -> Result<Point> {
        self.zip_with(other, |a, b| a + alpha * b)
    }

    /// Convex combination `(1 - eta) * self + eta * other`.
    pub fn lerp(&self, eta: f64, other: &Point) -> Result<Point> {
        self.zip_with(other, |a, b| (1.0 - eta) * a + eta * b)
    }

    pub fn scale(&self, alpha: f64) -> Point {
        Point(self.0.iter().map(|v| alpha * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Point {
        Point(self.0.iter().map(|&v| f(v)).collect())
    }

    /// Returns `(‖x‖₂, ‖x‖∞)`.
    pub fn norms(&self) -> (f64, f64) {
        (self.norm2(), self.norm_inf())
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn distance(&self, other: &Point) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub fn max_abs_diff(&self, other: &Point) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl<'a> IntoIterator for &'a Point {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn join_and_meet_examples() {
        let x = p(&[0.2, 0.8]);
        let y = p(&[0.5, 0.1]);
        assert_eq!(x.join(&y).unwrap(), p(&[0.5, 0.8]));
        assert_eq!(x.meet(&y).unwrap(), p(&[0.2, 0.1]));
        assert_eq!(x.join(&x).unwrap(), x);
        assert_eq!(x.meet(&x).unwrap(), x);
        assert_eq!(x.join(&Point::zeros(2)).unwrap(), x);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let x = p(&[1.0, 2.0]);
        let y = p(&[1.0]);
        assert!(matches!(
            x.join(&y),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        assert!(x.meet(&y).is_err());
        assert!(x.dot(&y).is_err());
    }

    #[test]
    fn norms_examples() {
        assert_eq!(p(&[3.0, 4.0]).norms(), (5.0, 4.0));
        assert_eq!(Point::zeros(3).norms(), (0.0, 0.0));
        let (e, i) = p(&[-1.0, 1.0]).norms();
        assert!((e - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(i, 1.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            Point::new(vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(Point::new(vec![f64::INFINITY]).is_err());
    }

    fn triple(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
        )
    }

    proptest! {
        #[test]
        fn lattice_laws((a, b, c) in (1usize..12).prop_flat_map(triple)) {
            let (x, y, z) = (p(&a), p(&b), p(&c));
            prop_assert_eq!(x.join(&y).unwrap(), y.join(&x).unwrap());
            prop_assert_eq!(x.meet(&y).unwrap(), y.meet(&x).unwrap());
            prop_assert_eq!(
                x.join(&y).unwrap().join(&z).unwrap(),
                x.join(&y.join(&z).unwrap()).unwrap()
            );
            prop_assert_eq!(
                x.meet(&y).unwrap().meet(&z).unwrap(),
                x.meet(&y.meet(&z).unwrap()).unwrap()
            );
            prop_assert_eq!(x.join(&x).unwrap(), x.clone());
            prop_assert_eq!(x.meet(&x).unwrap(), x.clone());
        }

        #[test]
        fn join_plus_meet_is_sum((a, b, _c) in (1usize..12).prop_flat_map(triple)) {
            let (x, y) = (p(&a), p(&b));
            let lhs = x.join(&y).unwrap().add(&x.meet(&y).unwrap()).unwrap();
            // {max, min} is a permutation of {x_i, y_i}, so the sums agree bit for bit.
            prop_assert_eq!(lhs, x.add(&y).unwrap());
        }

        #[test]
        fn shifted_join_identity((a, b, c) in (1usize..12).prop_flat_map(triple)) {
            let x = p(&a).map(f64::abs);
            let y = p(&b).map(f64::abs);
            let z = p(&c).map(f64::abs);
            let z_star = x.join(&y).unwrap().sub(&x).unwrap();
            let lhs = x.join(&y).unwrap().sub(&z_star).unwrap();
            let rhs = x
                .add(&z)
                .unwrap()
                .join(&y)
                .unwrap()
                .sub(&z.join(&z_star).unwrap())
                .unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
            prop_assert!(lhs.max_abs_diff(&x).unwrap() <= 1e-12);
        }
    }
}
