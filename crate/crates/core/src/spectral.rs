//! Discrete resolution of the identity for a positive self-adjoint operator `A`.
//!
//! A [`SpectrumModel`] holds the sorted eigenvalues of `A` (truncated to `N` modes)
//! together with a description of the eigenbasis. Functions are represented by their
//! coefficients against the orthonormal eigenbasis ([`SpectralVec`]); every operator
//! `F(A)` then acts diagonally, and the Hilbert-scale norms are weighted sums
//! `(sum (1 + lambda_j^2)^s c_j^2)^{1/2}`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};

/// Eigenbasis underlying a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis<S> {
    /// `sqrt(2/L) sin(j pi x / L)` on `(0, L)`, `lambda_j = j pi / L`.
    Sine1D { length: S },
    /// Tensor sine basis on `(0, lx) x (0, ly)`, `lambda_jk = pi sqrt((j/lx)^2 + (k/ly)^2)`.
    SineRect2D { lx: S, ly: S },
    /// User-supplied eigenvalues without an associated function basis.
    Custom,
}

/// Multi-index of a mode (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeIndex {
    Single(usize),
    Pair(usize, usize),
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeIndex::Single(j) => write!(f, "{j}"),
            ModeIndex::Pair(j, k) => write!(f, "({j},{k})"),
        }
    }
}

/// Finite, purely discrete spectrum of `A`, sorted ascending.
#[derive(Debug, Clone)]
pub struct SpectrumModel<S> {
    eigenvalues: Vec<S>,
    basis: Basis<S>,
    modes: Vec<ModeIndex>,
    fingerprint: u64,
}

impl<S: Real> SpectrumModel<S> {
    /// Dirichlet sine spectrum on `(0, length)`: `lambda_j = j pi / length`, `j = 1..=n_modes`.
    pub fn sine_1d(n_modes: usize, length: S) -> Result<Arc<Self>> {
        if n_modes == 0 {
            return Err(Error::invalid("n_modes must be at least 1"));
        }
        if !(length > S::zero()) || !length.is_finite() {
            return Err(Error::invalid("length must be positive and finite"));
        }
        let eigenvalues = (1..=n_modes)
            .map(|j| S::from_count(j as u64) * S::PI() / length)
            .collect();
        let modes = (1..=n_modes).map(ModeIndex::Single).collect();
        Ok(Arc::new(Self::assemble(
            eigenvalues,
            Basis::Sine1D { length },
            modes,
        )))
    }

    /// Tensor-product sine spectrum on a rectangle, flattened and sorted ascending.
    ///
    /// Equal eigenvalues (e.g. `lambda_12 = lambda_21` on a square) are ordered by
    /// multi-index so the layout is deterministic.
    pub fn sine_rect(nx: usize, ny: usize, lx: S, ly: S) -> Result<Arc<Self>> {
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("nx and ny must be at least 1"));
        }
        if !(lx > S::zero() && ly > S::zero()) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::invalid("side lengths must be positive and finite"));
        }
        let mut entries = Vec::with_capacity(nx * ny);
        for j in 1..=nx {
            for k in 1..=ny {
                let a = S::from_count(j as u64) / lx;
                let b = S::from_count(k as u64) / ly;
                entries.push((S::PI() * a.hypot(b), ModeIndex::Pair(j, k)));
            }
        }
        entries.sort_by(|x, y| cmp_real(x.0, y.0).then(x.1.cmp(&y.1)));
        let (eigenvalues, modes) = entries.into_iter().unzip();
        Ok(Arc::new(Self::assemble(
            eigenvalues,
            Basis::SineRect2D { lx, ly },
            modes,
        )))
    }

    /// Explicit eigenvalue list. Values are sorted (stably); the mode index records the
    /// original 1-based position.
    pub fn custom(eigenvalues: Vec<S>) -> Result<Arc<Self>> {
        if eigenvalues.is_empty() {
            return Err(Error::invalid("spectrum must contain at least one eigenvalue"));
        }
        if let Some(i) = eigenvalues
            .iter()
            .position(|&l| !(l > S::zero()) || !l.is_finite())
        {
            return Err(Error::invalid(format!(
                "eigenvalue {} must be positive and finite",
                i + 1
            )));
        }
        let mut entries: Vec<(S, ModeIndex)> = eigenvalues
            .into_iter()
            .enumerate()
            .map(|(i, l)| (l, ModeIndex::Single(i + 1)))
            .collect();
        entries.sort_by(|x, y| cmp_real(x.0, y.0));
        let (eigenvalues, modes) = entries.into_iter().unzip();
        Ok(Arc::new(Self::assemble(eigenvalues, Basis::Custom, modes)))
    }

    fn assemble(eigenvalues: Vec<S>, basis: Basis<S>, modes: Vec<ModeIndex>) -> Self {
        let mut h = Fnv::new();
        match &basis {
            Basis::Sine1D { length } => {
                h.write(1);
                h.write(length.as_f64().to_bits());
            }
            Basis::SineRect2D { lx, ly } => {
                h.write(2);
                h.write(lx.as_f64().to_bits());
                h.write(ly.as_f64().to_bits());
            }
            Basis::Custom => h.write(3),
        }
        for l in &eigenvalues {
            h.write(l.as_f64().to_bits());
        }
        SpectrumModel {
            eigenvalues,
            basis,
            modes,
            fingerprint: h.finish(),
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[S] {
        &self.eigenvalues
    }

    /// Eigenvalue at a 1-based flat position.
    pub fn eigenvalue(&self, mode: usize) -> S {
        self.eigenvalues[mode - 1]
    }

    /// Smallest eigenvalue (the infimum of the spectrum).
    pub fn min_eigenvalue(&self) -> S {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> S {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn basis(&self) -> &Basis<S> {
        &self.basis
    }

    /// Flat position to multi-index map.
    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Hilbert-scale weight `(1 + lambda_j^2)^s` for every mode.
    pub fn scale_weights(&self, s: ScaleIndex<S>) -> Vec<S> {
        self.eigenvalues
            .iter()
            .map(|&l| scale_weight(l, s.value()))
            .collect()
    }
}

impl<S: PartialEq> PartialEq for SpectrumModel<S> {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint && self.eigenvalues == other.eigenvalues
    }
}

fn cmp_real<S: Real>(a: S, b: S) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

#[inline]
pub(crate) fn scale_weight<S: Real>(lambda: S, s: S) -> S {
    if s == S::zero() {
        S::one()
    } else {
        (S::one() + lambda * lambda).powf(s)
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, word: u64) {
        for byte in word.to_le_bytes() {
            self.0 ^= u64::from(byte);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Exponent `s` of the Hilbert scale `H^s`; negative values give the dual scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ScaleIndex<S>(S);

impl<S: Real> ScaleIndex<S> {
    pub fn new(s: S) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::invalid("scale index must be finite"));
        }
        Ok(ScaleIndex(s))
    }

    /// `H^0 = L^2`.
    pub fn l2() -> Self {
        ScaleIndex(S::zero())
    }

    pub fn value(self) -> S {
        self.0
    }
}

impl<S: Real> Default for ScaleIndex<S> {
    fn default() -> Self {
        Self::l2()
    }
}

/// Coefficients of a function against the orthonormal eigenbasis of a [`SpectrumModel`].
#[derive(Clone)]
pub struct SpectralVec<S> {
    model: Arc<SpectrumModel<S>>,
    coeffs: Vec<S>,
}

impl<S: fmt::Debug> fmt::Debug for SpectralVec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralVec")
            .field("model", &format_args!("{:016x}", self.model.fingerprint))
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl<S: PartialEq> PartialEq for SpectralVec<S> {
    fn eq(&self, other: &Self) -> bool {
        self.model.fingerprint == other.model.fingerprint && self.coeffs == other.coeffs
    }
}

impl<S: Real> SpectralVec<S> {
    pub fn new(model: &Arc<SpectrumModel<S>>, coeffs: Vec<S>) -> Result<Self> {
        if coeffs.len() != model.len() {
            return Err(Error::LengthMismatch {
                expected: model.len(),
                found: coeffs.len(),
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: i + 1 });
        }
        Ok(SpectralVec {
            model: Arc::clone(model),
            coeffs,
        })
    }

    pub fn zeros(model: &Arc<SpectrumModel<S>>) -> Self {
        SpectralVec {
            model: Arc::clone(model),
            coeffs: vec![S::zero(); model.len()],
        }
    }

    /// `e_k`: unit coefficient on the 1-based flat mode `k`.
    pub fn unit(model: &Arc<SpectrumModel<S>>, k: usize) -> Result<Self> {
        if k == 0 || k > model.len() {
            return Err(Error::invalid(format!(
                "mode {k} outside 1..={}",
                model.len()
            )));
        }
        let mut v = Self::zeros(model);
        v.coeffs[k - 1] = S::one();
        Ok(v)
    }

    /// Builds a vector from per-mode values `f(j, lambda_j)` (0-based `j`).
    pub fn from_fn(model: &Arc<SpectrumModel<S>>, f: impl Fn(usize, S) -> S) -> Result<Self> {
        let coeffs = model
            .eigenvalues()
            .iter()
            .enumerate()
            .map(|(j, &l)| f(j, l))
            .collect();
        Self::new(model, coeffs)
    }

    pub(crate) fn from_parts_unchecked(model: &Arc<SpectrumModel<S>>, coeffs: Vec<S>) -> Self {
        debug_assert_eq!(coeffs.len(), model.len());
        SpectralVec {
            model: Arc::clone(model),
            coeffs,
        }
    }

    pub fn model(&self) -> &Arc<SpectrumModel<S>> {
        &self.model
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn same_model(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.model, &other.model) || *self.model == *other.model
    }

    fn check_model(&self, other: &Self) -> Result<()> {
        if self.same_model(other) {
            Ok(())
        } else {
            Err(Error::ModelMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == S::zero())
    }

    /// Squared Hilbert-scale norm `sum (1 + lambda_j^2)^s c_j^2`.
    pub fn norm_squared(&self, s: ScaleIndex<S>) -> S {
        let terms: Vec<S> = self
            .model
            .eigenvalues()
            .iter()
            .zip(&self.coeffs)
            .map(|(&l, &c)| scale_weight(l, s.value()) * c * c)
            .collect();
        pairwise_sum(&terms)
    }

    /// Hilbert-scale norm `||v||_s`; `s = 0` is the plain coefficient 2-norm.
    pub fn norm(&self, s: ScaleIndex<S>) -> S {
        self.norm_squared(s).sqrt()
    }

    pub fn l2_norm(&self) -> S {
        self.norm(ScaleIndex::l2())
    }

    /// Coefficient inner product (the `H^0` inner product).
    pub fn inner(&self, other: &Self) -> Result<S> {
        self.check_model(other)?;
        let terms: Vec<S> = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a * b)
            .collect();
        Ok(pairwise_sum(&terms))
    }

    /// `a * self + other`.
    pub fn axpy(&self, a: S, other: &Self) -> Result<Self> {
        self.check_model(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&x, &y)| a.mul_add(x, y))
            .collect();
        Self::new(&self.model, coeffs)
    }

    /// `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_model(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&x, &y)| x - y)
            .collect();
        Ok(Self::from_parts_unchecked(&self.model, coeffs))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_model(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&x, &y)| x + y)
            .collect();
        Self::new(&self.model, coeffs)
    }

    pub fn scale(&self, a: S) -> Result<Self> {
        Self::new(&self.model, self.coeffs.iter().map(|&c| a * c).collect())
    }

    /// `F(A) v`: multiplies coefficient `j` by `F(lambda_j)`.
    ///
    /// Fails with [`Error::Evaluation`] at the first mode where `F` is not finite.
    pub fn apply_fn(&self, f: impl Fn(S) -> S) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(self.len());
        for (j, (&l, &c)) in self.model.eigenvalues().iter().zip(&self.coeffs).enumerate() {
            let factor = f(l);
            if !factor.is_finite() {
                return Err(Error::Evaluation {
                    mode: j + 1,
                    eigenvalue: l.as_f64(),
                });
            }
            coeffs.push(factor * c);
        }
        Self::new(&self.model, coeffs)
    }

    /// Multiplies coefficient `j` by `factors[j]`.
    pub fn apply_factors(&self, factors: &[S]) -> Result<Self> {
        if factors.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: factors.len(),
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(factors)
            .map(|(&c, &f)| f * c)
            .collect();
        Self::new(&self.model, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn v(model: &Arc<SpectrumModel<f64>>, c: &[f64]) -> SpectralVec<f64> {
        SpectralVec::new(model, c.to_vec()).unwrap()
    }

    #[test]
    fn sine_1d_eigenvalues() {
        let m = SpectrumModel::sine_1d(3, 1.0).unwrap();
        assert_eq!(m.eigenvalues(), &[PI, 2.0 * PI, 3.0 * PI]);
        let m = SpectrumModel::sine_1d(1, 2.0).unwrap();
        assert_eq!(m.eigenvalues(), &[PI / 2.0]);
        let m = SpectrumModel::sine_1d(5, 1.0).unwrap();
        // 5 pi = 15.707963267948966192...
        assert_relative_eq!(m.eigenvalue(5), 15.707963267948966, max_relative = 1e-15);
    }

    #[test]
    fn sine_1d_rejects_bad_input() {
        assert!(SpectrumModel::<f64>::sine_1d(0, 1.0).is_err());
        assert!(SpectrumModel::<f64>::sine_1d(3, 0.0).is_err());
        assert!(SpectrumModel::<f64>::sine_1d(3, -1.0).is_err());
        assert!(SpectrumModel::<f64>::sine_1d(3, f64::NAN).is_err());
    }

    /// Brute-force enumeration of the rectangle spectrum.
    fn enumerate_rect(nx: usize, ny: usize, lx: f64, ly: f64) -> Vec<f64> {
        let mut all = vec![];
        for j in 1..=nx {
            for k in 1..=ny {
                all.push(PI * ((j as f64 / lx).powi(2) + (k as f64 / ly).powi(2)).sqrt());
            }
        }
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all
    }

    #[test]
    fn sine_rect_spectrum() {
        let m = SpectrumModel::sine_rect(1, 1, 1.0, 1.0).unwrap();
        assert_relative_eq!(m.eigenvalues()[0], PI * 2f64.sqrt(), max_relative = 1e-15);

        let m = SpectrumModel::sine_rect(2, 1, 1.0, 1.0).unwrap();
        assert_relative_eq!(m.eigenvalues()[0], PI * 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(m.eigenvalues()[1], PI * 5f64.sqrt(), max_relative = 1e-15);

        let m = SpectrumModel::sine_rect(2, 2, 1.0, 1.0).unwrap();
        assert_eq!(m.len(), 4);
        assert_relative_eq!(m.min_eigenvalue(), PI * 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(m.max_eigenvalue(), 2.0 * PI * 2f64.sqrt(), max_relative = 1e-15);

        for (nx, ny, lx, ly) in [(5, 3, 1.0, 2.0), (4, 4, 1.0, 1.0), (7, 2, 0.3, 1.7)] {
            let m = SpectrumModel::sine_rect(nx, ny, lx, ly).unwrap();
            let brute = enumerate_rect(nx, ny, lx, ly);
            for (a, b) in m.eigenvalues().iter().zip(&brute) {
                assert_relative_eq!(*a, *b, max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn rect_ties_are_ordered_by_multi_index() {
        let m = SpectrumModel::sine_rect(2, 2, 1.0, 1.0).unwrap();
        assert_eq!(
            m.modes(),
            &[
                ModeIndex::Pair(1, 1),
                ModeIndex::Pair(1, 2),
                ModeIndex::Pair(2, 1),
                ModeIndex::Pair(2, 2)
            ]
        );
        assert_eq!(m.eigenvalues()[1], m.eigenvalues()[2]);
    }

    #[test]
    fn custom_spectrum_is_sorted_and_validated() {
        let m = SpectrumModel::custom(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(m.eigenvalues(), &[1.0, 2.0, 3.0]);
        assert_eq!(m.modes()[0], ModeIndex::Single(2));
        assert!(SpectrumModel::<f64>::custom(vec![]).is_err());
        assert!(SpectrumModel::custom(vec![1.0, 0.0]).is_err());
        assert!(SpectrumModel::custom(vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn vector_invariants() {
        let m = SpectrumModel::sine_1d(3, 1.0).unwrap();
        assert!(matches!(
            SpectralVec::new(&m, vec![1.0, 2.0]),
            Err(Error::LengthMismatch { expected: 3, found: 2 })
        ));
        assert!(matches!(
            SpectralVec::new(&m, vec![1.0, f64::NAN, 0.0]),
            Err(Error::NonFinite { index: 2 })
        ));
        assert!(SpectralVec::unit(&m, 0).is_err());
        assert!(SpectralVec::unit(&m, 4).is_err());
    }

    #[test]
    fn norm_examples() {
        let m = SpectrumModel::sine_1d(3, 1.0).unwrap();
        assert_eq!(v(&m, &[1.0, 0.0, 0.0]).norm(ScaleIndex::l2()), 1.0);

        let m1 = SpectrumModel::sine_1d(1, 1.0).unwrap();
        let e = v(&m1, &[1.0]);
        // mpmath: sqrt(1+pi^2) = 3.2969083094756151587..., (1+pi^2)^(-1/4) = 0.5507399305056360846...
        assert_relative_eq!(e.norm(ScaleIndex::new(1.0).unwrap()), 3.296908309475615, max_relative = 1e-14);
        assert_relative_eq!(e.norm(ScaleIndex::new(-0.5).unwrap()), 0.550739930505636, max_relative = 1e-14);
    }

    #[test]
    fn spectral_function_examples() {
        let m = SpectrumModel::sine_1d(2, 1.0).unwrap();
        let x = v(&m, &[1.0, 1.0]);
        assert_eq!(x.apply_fn(|_| 1.0).unwrap(), x);
        assert_eq!(x.apply_fn(|l| l).unwrap().coeffs(), &[PI, 2.0 * PI]);

        let m1 = SpectrumModel::sine_1d(1, 1.0).unwrap();
        let y = v(&m1, &[1.0]).apply_fn(|l| l.tanh().powi(2)).unwrap();
        // mpmath: tanh(pi)^2 = 0.99255804985720378654...
        assert_relative_eq!(y.coeffs()[0], 0.9925580498572038, max_relative = 1e-15);

        let err = x.apply_fn(|l| 1.0 / (l - PI)).unwrap_err();
        assert!(matches!(err, Error::Evaluation { mode: 1, .. }));
    }

    #[test]
    fn linear_combination_examples() {
        let m = SpectrumModel::sine_1d(2, 1.0).unwrap();
        assert_eq!(v(&m, &[1.0, 0.0]).inner(&v(&m, &[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(v(&m, &[1.0, 1.0]).axpy(2.0, &v(&m, &[1.0, 0.0])).unwrap().coeffs(), &[3.0, 2.0]);
        assert_eq!(v(&m, &[1.0, 2.0]).sub(&v(&m, &[1.0, 2.0])).unwrap().coeffs(), &[0.0, 0.0]);

        let other = SpectrumModel::sine_1d(2, 2.0).unwrap();
        assert_eq!(
            v(&m, &[1.0, 0.0]).inner(&v(&other, &[1.0, 0.0])),
            Err(Error::ModelMismatch)
        );
    }

    #[test]
    fn independently_built_identical_models_are_compatible() {
        let a = SpectrumModel::sine_1d(4, 1.0).unwrap();
        let b = SpectrumModel::sine_1d(4, 1.0).unwrap();
        assert!(SpectralVec::zeros(&a).sub(&SpectralVec::zeros(&b)).is_ok());
    }

    #[test]
    fn single_precision_model() {
        let m = SpectrumModel::<f32>::sine_1d(3, 1.0).unwrap();
        let x = SpectralVec::new(&m, vec![1.0f32, 0.0, 0.0]).unwrap();
        assert!((x.norm(ScaleIndex::new(1.0).unwrap()) - 3.296_908).abs() < 1e-5);
    }

    fn coeffs_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 1..40)
    }

    proptest! {
        #[test]
        fn parseval(c in coeffs_strategy()) {
            let m = SpectrumModel::sine_1d(c.len(), 1.0).unwrap();
            let x = SpectralVec::new(&m, c.clone()).unwrap();
            let direct: f64 = c.iter().map(|a| a * a).sum();
            let n2 = x.norm_squared(ScaleIndex::l2());
            prop_assert!((n2 - direct).abs() <= 1e-14 * direct.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn scale_monotone(c in coeffs_strategy(), s in -3.0f64..3.0, d in 0.0f64..2.0) {
            let m = SpectrumModel::sine_1d(c.len(), 1.0).unwrap();
            let x = SpectralVec::new(&m, c).unwrap();
            let lo = x.norm(ScaleIndex::new(s).unwrap());
            let hi = x.norm(ScaleIndex::new(s + d).unwrap());
            prop_assert!(lo <= hi * (1.0 + 1e-15));
        }

        #[test]
        fn function_calculus_is_multiplicative(c in coeffs_strategy(), a in 0.1f64..2.0, b in -1.0f64..1.0) {
            let m = SpectrumModel::sine_1d(c.len(), 1.0).unwrap();
            let x = SpectralVec::new(&m, c).unwrap();
            let f = |l: f64| (-a * l).exp();
            let g = |l: f64| (b * l).cos();
            let composed = x.apply_fn(g).unwrap().apply_fn(f).unwrap();
            let product = x.apply_fn(|l| f(l) * g(l)).unwrap();
            for (p, q) in composed.coeffs().iter().zip(product.coeffs()) {
                prop_assert!((p - q).abs() <= 1e-14 * p.abs().max(q.abs()) + f64::MIN_POSITIVE);
            }
        }

        #[test]
        fn unit_function_is_bit_exact_identity(c in coeffs_strategy()) {
            let m = SpectrumModel::custom((1..=c.len()).map(|j| j as f64 * 0.7).collect()).unwrap();
            let x = SpectralVec::new(&m, c).unwrap();
            prop_assert_eq!(x.apply_fn(|_| 1.0).unwrap(), x.clone());
        }
    }
}
