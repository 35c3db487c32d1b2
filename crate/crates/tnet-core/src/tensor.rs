//! Dense rank-4 NCHW tensor.
//!
//! Layout is fixed and contiguous: `idx = ((n*C + c)*H + h)*W + w`. That
//! formula is the single layout authority for the whole crate — every kernel
//! and every oracle indexes through [`Shape::index`].
//!
//! Training runs in `f32`; the gradient-check harness instantiates the same
//! generic code with `f64`.

use crate::error::{Error, Result};
use crate::rng::Rng;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Element type for tensors: `f32` for training, `f64` for gradient checks.
pub trait Scalar:
    Copy
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Default
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    const ZERO: Self;
    const ONE: Self;
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn tanh(self) -> Self;
    fn abs(self) -> Self;
    fn maximum(self, other: Self) -> Self;
    fn minimum(self, other: Self) -> Self;
    fn is_finite(self) -> bool;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn sqrt(self) -> Self {
                self.sqrt()
            }
            #[inline]
            fn exp(self) -> Self {
                self.exp()
            }
            #[inline]
            fn ln(self) -> Self {
                self.ln()
            }
            #[inline]
            fn tanh(self) -> Self {
                self.tanh()
            }
            #[inline]
            fn abs(self) -> Self {
                self.abs()
            }
            #[inline]
            fn maximum(self, other: Self) -> Self {
                if self > other {
                    self
                } else {
                    other
                }
            }
            #[inline]
            fn minimum(self, other: Self) -> Self {
                if self < other {
                    self
                } else {
                    other
                }
            }
            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// NCHW dimensions. All four must be at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shape {
    pub n: usize,
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl Shape {
    pub fn new(n: usize, c: usize, h: usize, w: usize) -> Shape {
        Shape { n, c, h, w }
    }

    pub fn count(&self) -> usize {
        self.n * self.c * self.h * self.w
    }

    /// The layout authority: `((n*C + c)*H + h)*W + w`.
    #[inline]
    pub fn index(&self, n: usize, c: usize, h: usize, w: usize) -> usize {
        ((n * self.c + c) * self.h + h) * self.w + w
    }

    /// Inverse of [`Shape::index`].
    pub fn coords(&self, idx: usize) -> (usize, usize, usize, usize) {
        let w = idx % self.w;
        let rest = idx / self.w;
        let h = rest % self.h;
        let rest = rest / self.h;
        let c = rest % self.c;
        let n = rest / self.c;
        (n, c, h, w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.c == 0 || self.h == 0 || self.w == 0 {
            return Err(Error::Shape(format!("zero-sized dimension in {self}")));
        }
        Ok(())
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.n, self.c, self.h, self.w)
    }
}

impl From<(usize, usize, usize, usize)> for Shape {
    fn from(d: (usize, usize, usize, usize)) -> Shape {
        Shape::new(d.0, d.1, d.2, d.3)
    }
}

/// Contiguous rank-4 array. Ops never mutate their inputs; the optimizer's
/// in-place update goes through `data_mut`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<S: Scalar = f32> {
    shape: Shape,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn zeros(shape: impl Into<Shape>) -> Result<Tensor<S>> {
        let shape = shape.into();
        shape.validate()?;
        Ok(Tensor {
            shape,
            data: vec![S::ZERO; shape.count()],
        })
    }

    pub fn full(shape: impl Into<Shape>, value: S) -> Result<Tensor<S>> {
        let shape = shape.into();
        shape.validate()?;
        Ok(Tensor {
            shape,
            data: vec![value; shape.count()],
        })
    }

    pub fn from_vec(shape: impl Into<Shape>, data: Vec<S>) -> Result<Tensor<S>> {
        let shape = shape.into();
        shape.validate()?;
        if data.len() != shape.count() {
            return Err(Error::Shape(format!(
                "data length {} does not match shape {} ({} elements)",
                data.len(),
                shape,
                shape.count()
            )));
        }
        Ok(Tensor { shape, data })
    }

    /// He-normal initialization: normal(0, sqrt(2/fan_in)), reproducible per seed.
    pub fn he_init(shape: impl Into<Shape>, fan_in: usize, rng: &mut Rng) -> Result<Tensor<S>> {
        let shape = shape.into();
        shape.validate()?;
        if fan_in == 0 {
            return Err(Error::Config("he_init fan_in must be >= 1".into()));
        }
        let std = (2.0 / fan_in as f64).sqrt();
        let data = (0..shape.count())
            .map(|_| S::from_f64(rng.normal() * std))
            .collect();
        Ok(Tensor { shape, data })
    }

    /// Uniform in [lo, hi), reproducible per seed.
    pub fn uniform(shape: impl Into<Shape>, lo: f64, hi: f64, rng: &mut Rng) -> Result<Tensor<S>> {
        let shape = shape.into();
        shape.validate()?;
        let data = (0..shape.count())
            .map(|_| S::from_f64(rng.uniform(lo, hi)))
            .collect();
        Ok(Tensor { shape, data })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    #[inline]
    pub fn at(&self, n: usize, c: usize, h: usize, w: usize) -> S {
        self.data[self.shape.index(n, c, h, w)]
    }

    #[inline]
    pub fn set(&mut self, n: usize, c: usize, h: usize, w: usize, v: S) {
        let i = self.shape.index(n, c, h, w);
        self.data[i] = v;
    }

    pub fn same_shape(&self, other: &Tensor<S>) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "shape mismatch: {} vs {}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    /// Elementwise sum. Shapes must match exactly.
    pub fn add(&self, other: &Tensor<S>) -> Result<Tensor<S>> {
        self.same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Tensor {
            shape: self.shape,
            data,
        })
    }

    pub fn sub(&self, other: &Tensor<S>) -> Result<Tensor<S>> {
        self.same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(Tensor {
            shape: self.shape,
            data,
        })
    }

    pub fn add_assign(&mut self, other: &Tensor<S>) -> Result<()> {
        self.same_shape(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&self, k: S) -> Tensor<S> {
        Tensor {
            shape: self.shape,
            data: self.data.iter().map(|&v| v * k).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Tensor<S> {
        Tensor {
            shape: self.shape,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn fill(&mut self, value: S) {
        self.data.fill(value);
    }

    /// Grow h and w by `pad` on each side, zero-filled border.
    pub fn pad_spatial(&self, pad: usize) -> Tensor<S> {
        if pad == 0 {
            return self.clone();
        }
        let s = self.shape;
        let out_shape = Shape::new(s.n, s.c, s.h + 2 * pad, s.w + 2 * pad);
        let mut out = vec![S::ZERO; out_shape.count()];
        for n in 0..s.n {
            for c in 0..s.c {
                for h in 0..s.h {
                    let src = s.index(n, c, h, 0);
                    let dst = out_shape.index(n, c, h + pad, pad);
                    out[dst..dst + s.w].copy_from_slice(&self.data[src..src + s.w]);
                }
            }
        }
        Tensor {
            shape: out_shape,
            data: out,
        }
    }

    /// Remove `pad` rows/cols from each spatial border (inverse of pad_spatial).
    pub fn center_crop(&self, pad: usize) -> Result<Tensor<S>> {
        if pad == 0 {
            return Ok(self.clone());
        }
        let s = self.shape;
        if s.h <= 2 * pad || s.w <= 2 * pad {
            return Err(Error::Shape(format!(
                "cannot crop {pad} from each side of {s}"
            )));
        }
        let out_shape = Shape::new(s.n, s.c, s.h - 2 * pad, s.w - 2 * pad);
        let mut out = vec![S::ZERO; out_shape.count()];
        for n in 0..s.n {
            for c in 0..s.c {
                for h in 0..out_shape.h {
                    let src = s.index(n, c, h + pad, pad);
                    let dst = out_shape.index(n, c, h, 0);
                    out[dst..dst + out_shape.w].copy_from_slice(&self.data[src..src + out_shape.w]);
                }
            }
        }
        Ok(Tensor {
            shape: out_shape,
            data: out,
        })
    }

    /// Concatenate along the channel axis. All other dims must match.
    pub fn concat_channels(&self, other: &Tensor<S>) -> Result<Tensor<S>> {
        let (a, b) = (self.shape, other.shape);
        if a.n != b.n || a.h != b.h || a.w != b.w {
            return Err(Error::Shape(format!(
                "concat_channels needs matching n/h/w: {a} vs {b}"
            )));
        }
        let out_shape = Shape::new(a.n, a.c + b.c, a.h, a.w);
        let mut out = vec![S::ZERO; out_shape.count()];
        let plane = a.h * a.w;
        for n in 0..a.n {
            let dst = out_shape.index(n, 0, 0, 0);
            let src = a.index(n, 0, 0, 0);
            out[dst..dst + a.c * plane].copy_from_slice(&self.data[src..src + a.c * plane]);
            let dst = out_shape.index(n, a.c, 0, 0);
            let src = b.index(n, 0, 0, 0);
            out[dst..dst + b.c * plane].copy_from_slice(&other.data[src..src + b.c * plane]);
        }
        Ok(Tensor {
            shape: out_shape,
            data: out,
        })
    }

    /// Split a channel-concatenated tensor back into (first `c_first` channels, rest).
    pub fn split_channels(&self, c_first: usize) -> Result<(Tensor<S>, Tensor<S>)> {
        let s = self.shape;
        if c_first == 0 || c_first >= s.c {
            return Err(Error::Shape(format!(
                "split_channels at {c_first} invalid for {s}"
            )));
        }
        let sa = Shape::new(s.n, c_first, s.h, s.w);
        let sb = Shape::new(s.n, s.c - c_first, s.h, s.w);
        let mut a = vec![S::ZERO; sa.count()];
        let mut b = vec![S::ZERO; sb.count()];
        let plane = s.h * s.w;
        for n in 0..s.n {
            let src = s.index(n, 0, 0, 0);
            let dst = sa.index(n, 0, 0, 0);
            a[dst..dst + c_first * plane].copy_from_slice(&self.data[src..src + c_first * plane]);
            let src = s.index(n, c_first, 0, 0);
            let dst = sb.index(n, 0, 0, 0);
            b[dst..dst + sb.c * plane].copy_from_slice(&self.data[src..src + sb.c * plane]);
        }
        Ok((
            Tensor {
                shape: sa,
                data: a,
            },
            Tensor {
                shape: sb,
                data: b,
            },
        ))
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|v| v.abs().to_f64())
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn assert_finite(&self, what: &str) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(i) => {
                let (n, c, h, w) = self.shape.coords(i);
                Err(Error::Numeric(format!(
                    "non-finite value in {what} at (n={n}, c={c}, h={h}, w={w})"
                )))
            }
        }
    }

    pub fn cast<T: Scalar>(&self) -> Tensor<T> {
        Tensor {
            shape: self.shape,
            data: self.data.iter().map(|v| T::from_f64(v.to_f64())).collect(),
        }
    }
}

/// Flat inner product of two equally-shaped tensors, accumulated in f64.
pub fn dot<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| x.to_f64() * y.to_f64())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    #[test]
    fn zeros_small() {
        let t: Tensor = Tensor::zeros((1, 1, 2, 2)).unwrap();
        assert_eq!(t.data(), &[0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn zeros_shape_preserved() {
        let t: Tensor = Tensor::zeros((2, 3, 4, 4)).unwrap();
        assert_eq!(t.data().len(), 96);
        assert!(t.data().iter().all(|&v| v == 0.0));
        assert_eq!(t.shape(), Shape::new(2, 3, 4, 4));
    }

    #[test]
    fn zeros_single_element() {
        let t: Tensor = Tensor::zeros((1, 1, 1, 1)).unwrap();
        assert_eq!(t.data(), &[0.0]);
    }

    #[test]
    fn zeros_rejects_zero_dim() {
        assert!(Tensor::<f32>::zeros((1, 0, 2, 2)).is_err());
    }

    #[test]
    fn add_basic() {
        let a = Tensor::from_vec((1, 1, 1, 2), vec![1.0f32, 2.0]).unwrap();
        let b = Tensor::from_vec((1, 1, 1, 2), vec![3.0f32, 4.0]).unwrap();
        assert_eq!(a.add(&b).unwrap().data(), &[4.0, 6.0]);
    }

    #[test]
    fn add_zero_identity_bitwise() {
        let mut rng = Rng::new(5);
        let x: Tensor = Tensor::uniform((2, 3, 4, 4), -2.0, 2.0, &mut rng).unwrap();
        let z = Tensor::zeros(x.shape()).unwrap();
        assert_eq!(x.add(&z).unwrap(), x);
    }

    #[test]
    fn add_commutes() {
        let mut rng = Rng::new(6);
        let x: Tensor = Tensor::uniform((2, 8, 16, 16), -1.0, 1.0, &mut rng).unwrap();
        let y: Tensor = Tensor::uniform((2, 8, 16, 16), -1.0, 1.0, &mut rng).unwrap();
        assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
    }

    #[test]
    fn add_shape_mismatch_names_both() {
        let a: Tensor = Tensor::zeros((1, 1, 2, 2)).unwrap();
        let b: Tensor = Tensor::zeros((1, 2, 2, 2)).unwrap();
        let err = a.add(&b).unwrap_err().to_string();
        assert!(err.contains("(1, 1, 2, 2)") && err.contains("(1, 2, 2, 2)"), "{err}");
    }

    #[test]
    fn add_associative_within_tolerance() {
        let mut rng = Rng::new(7);
        let a: Tensor = Tensor::uniform((1, 4, 8, 8), -1.0, 1.0, &mut rng).unwrap();
        let b: Tensor = Tensor::uniform((1, 4, 8, 8), -1.0, 1.0, &mut rng).unwrap();
        let c: Tensor = Tensor::uniform((1, 4, 8, 8), -1.0, 1.0, &mut rng).unwrap();
        let lhs = a.add(&b).unwrap().add(&c).unwrap();
        let rhs = a.add(&b.add(&c).unwrap()).unwrap();
        let diff = lhs.sub(&rhs).unwrap().max_abs();
        assert!(diff <= 1e-6, "associativity diff {diff}");
    }

    #[test]
    fn pad_ones() {
        let x = Tensor::full((1, 1, 2, 2), 1.0f32).unwrap();
        let p = x.pad_spatial(1);
        assert_eq!(p.shape(), Shape::new(1, 1, 4, 4));
        let ones = p.data().iter().filter(|&&v| v == 1.0).count();
        let zeros = p.data().iter().filter(|&&v| v == 0.0).count();
        assert_eq!((ones, zeros), (4, 12));
        assert_eq!(p.at(0, 0, 1, 1), 1.0);
        assert_eq!(p.at(0, 0, 0, 0), 0.0);
    }

    #[test]
    fn pad_zero_is_identity() {
        let mut rng = Rng::new(8);
        let x: Tensor = Tensor::uniform((1, 2, 3, 3), -1.0, 1.0, &mut rng).unwrap();
        assert_eq!(x.pad_spatial(0), x);
    }

    #[test]
    fn pad_preserves_sum() {
        let mut rng = Rng::new(9);
        let x: Tensor<f64> = Tensor::uniform((1, 2, 3, 3), -1.0, 1.0, &mut rng).unwrap();
        let p = x.pad_spatial(2);
        assert_eq!(p.shape(), Shape::new(1, 2, 7, 7));
        let s0: f64 = x.data().iter().sum();
        let s1: f64 = p.data().iter().sum();
        assert!((s0 - s1).abs() < 1e-12);
    }

    #[test]
    fn he_init_deterministic() {
        let a: Tensor = Tensor::he_init((4, 3, 3, 3), 27, &mut Rng::new(1234)).unwrap();
        let b: Tensor = Tensor::he_init((4, 3, 3, 3), 27, &mut Rng::new(1234)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn he_init_variance() {
        let fan_in = 3 * 49;
        let t: Tensor<f64> = Tensor::he_init((64, 3, 7, 7), fan_in, &mut Rng::new(99)).unwrap();
        let n = t.data().len() as f64;
        let mean = t.data().iter().sum::<f64>() / n;
        let var = t.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let target = 2.0 / fan_in as f64;
        assert!(
            (var - target).abs() <= 0.2 * target,
            "var {var} vs target {target}"
        );
    }

    #[test]
    fn he_init_seeds_differ() {
        let a: Tensor = Tensor::he_init((8, 4, 5, 5), 100, &mut Rng::new(1)).unwrap();
        let b: Tensor = Tensor::he_init((8, 4, 5, 5), 100, &mut Rng::new(2)).unwrap();
        let differing = a
            .data()
            .iter()
            .zip(b.data())
            .filter(|(x, y)| x != y)
            .count();
        assert!(differing as f64 >= 0.99 * a.data().len() as f64);
    }

    #[test]
    fn concat_then_split_round_trips() {
        let mut rng = Rng::new(10);
        let a: Tensor = Tensor::uniform((2, 3, 4, 4), -1.0, 1.0, &mut rng).unwrap();
        let b: Tensor = Tensor::uniform((2, 5, 4, 4), -1.0, 1.0, &mut rng).unwrap();
        let cat = a.concat_channels(&b).unwrap();
        assert_eq!(cat.shape(), Shape::new(2, 8, 4, 4));
        let (a2, b2) = cat.split_channels(3).unwrap();
        assert_eq!(a2, a);
        assert_eq!(b2, b);
    }

    proptest! {
        #[test]
        fn index_coords_round_trip(
            n in 1usize..4, c in 1usize..6, h in 1usize..9, w in 1usize..9,
            pick in 0usize..10_000,
        ) {
            let shape = Shape::new(n, c, h, w);
            let idx = pick % shape.count();
            let (a, b, cc, d) = shape.coords(idx);
            prop_assert_eq!(shape.index(a, b, cc, d), idx);
            prop_assert!(a < n && b < c && cc < h && d < w);
        }

        #[test]
        fn pad_then_crop_identity(
            n in 1usize..3, c in 1usize..4, h in 1usize..7, w in 1usize..7,
            pad in 0usize..4, seed in 0u64..1000,
        ) {
            let x: Tensor = Tensor::uniform(
                Shape::new(n, c, h, w), -1.0, 1.0, &mut Rng::new(seed)).unwrap();
            let back = x.pad_spatial(pad).center_crop(pad).unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
