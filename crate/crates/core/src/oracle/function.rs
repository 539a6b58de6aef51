//! Concrete members of the function classes: separable quadratics, optionally
//! plus a weighted l1 norm.


use super::OracleError;
use crate::numeric::{Numeric, Rational};
use crate::scenarios::FunctionClass;

/// `a(x) = 1/2 sum_i lambda_i (x_i - c_i)^2`, plus `b(x) = w ||x||_1` when
/// `l1_weight` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction<T> {
    spectrum: Vec<T>,
    shift: Vec<T>,
    l1_weight: Option<T>,
}

/// Minimizer and the optimality data the scenario constraints refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum<T> {
    pub point: Vec<T>,
    pub value: T,
    pub smooth_value: T,
    pub nonsmooth_value: T,
    /// `grad a(x_*)`
    pub gradient: Vec<T>,
    /// `s_* in d b(x_*)` with `gradient + subgradient = 0`.
    pub subgradient: Vec<T>,
}

impl<T: Numeric> TestFunction<T> {
    pub fn quadratic(spectrum: Vec<T>, shift: Vec<T>) -> Result<Self, OracleError> {
        Self::build(spectrum, shift, None)
    }

    pub fn composite(spectrum: Vec<T>, shift: Vec<T>, l1_weight: T) -> Result<Self, OracleError> {
        if l1_weight.strictly_negative() {
            return Err(OracleError::InvalidFunction("l1 weight must be nonnegative".into()));
        }
        Self::build(spectrum, shift, Some(l1_weight))
    }

    fn build(spectrum: Vec<T>, shift: Vec<T>, l1_weight: Option<T>) -> Result<Self, OracleError> {
        if spectrum.is_empty() || spectrum.len() != shift.len() {
            return Err(OracleError::InvalidFunction(format!(
                "spectrum has {} entries and shift {}",
                spectrum.len(),
                shift.len()
            )));
        }
        if spectrum.iter().any(|l| !l.strictly_positive()) {
            return Err(OracleError::InvalidFunction("curvatures must be positive".into()));
        }
        Ok(Self {
            spectrum,
            shift,
            l1_weight,
        })
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    pub fn spectrum(&self) -> &[T] {
        &self.spectrum
    }

    pub fn shift(&self) -> &[T] {
        &self.shift
    }

    pub fn l1_weight(&self) -> Option<&T> {
        self.l1_weight.as_ref()
    }

    pub fn is_composite(&self) -> bool {
        self.l1_weight.is_some()
    }

    pub fn smallest_curvature(&self) -> T {
        fold_extreme(&self.spectrum, |a, b| a < b)
    }

    pub fn largest_curvature(&self) -> T {
        fold_extreme(&self.spectrum, |a, b| a > b)
    }

    /// Spectrum inside `[mu, L]`; composite iff the class is.
    pub fn check_class(&self, class: &FunctionClass) -> Result<(), OracleError> {
        let mu = T::from_rational(&class.mu);
        let l = T::from_rational(&class.l);
        if self.spectrum.iter().any(|v| *v < mu || *v > l) {
            return Err(OracleError::InvalidFunction(format!(
                "spectrum leaves [{}, {}]",
                class.mu, class.l
            )));
        }
        if class.composite != self.is_composite() {
            return Err(OracleError::InvalidFunction(if class.composite {
                "the class is composite but the function has no l1 part".into()
            } else {
                "the class is smooth but the function has an l1 part".into()
            }));
        }
        Ok(())
    }

    pub fn smooth_value(&self, x: &[T]) -> T {
        let half = T::from_rational(&Rational::new(1.into(), 2.into()));
        self.spectrum
            .iter()
            .zip(&self.shift)
            .zip(x)
            .fold(T::zero(), |acc, ((l, c), xi)| {
                let d = xi.clone() - c.clone();
                acc + half.clone() * l.clone() * d.clone() * d
            })
    }

    pub fn smooth_gradient(&self, x: &[T]) -> Vec<T> {
        self.spectrum
            .iter()
            .zip(&self.shift)
            .zip(x)
            .map(|((l, c), xi)| l.clone() * (xi.clone() - c.clone()))
            .collect()
    }

    /// `H v` for the quadratic part.
    pub fn hessian_apply(&self, v: &[T]) -> Vec<T> {
        self.spectrum.iter().zip(v).map(|(l, vi)| l.clone() * vi.clone()).collect()
    }

    pub fn nonsmooth_value(&self, x: &[T]) -> T {
        match &self.l1_weight {
            Some(w) => x.iter().fold(T::zero(), |acc, xi| acc + w.clone() * xi.abs()),
            None => T::zero(),
        }
    }

    pub fn value(&self, x: &[T]) -> T {
        self.smooth_value(x) + self.nonsmooth_value(x)
    }

    /// `prox_{gamma b}(v)`: soft thresholding at `gamma w`.
    pub fn prox(&self, v: &[T], gamma: &T) -> Vec<T> {
        match &self.l1_weight {
            Some(w) => {
                let cut = gamma.clone() * w.clone();
                v.iter().map(|vi| soft_threshold(vi, &cut)).collect()
            }
            None => v.to_vec(),
        }
    }

    /// Subgradient of `b` at `x` closest to `-r`, i.e. the one minimizing
    /// `||r + s||`.
    pub fn nearest_subgradient(&self, x: &[T], r: &[T]) -> Vec<T> {
        match &self.l1_weight {
            Some(w) => x
                .iter()
                .zip(r)
                .map(|(xi, ri)| {
                    if xi.strictly_positive() {
                        w.clone()
                    } else if xi.strictly_negative() {
                        -w.clone()
                    } else {
                        clamp(-ri.clone(), -w.clone(), w.clone())
                    }
                })
                .collect(),
            None => vec![T::zero(); x.len()],
        }
    }

    pub fn minimizer(&self) -> Optimum<T> {
        let point: Vec<T> = match &self.l1_weight {
            Some(w) => self
                .spectrum
                .iter()
                .zip(&self.shift)
                .map(|(l, c)| soft_threshold(c, &(w.clone() / l.clone())))
                .collect(),
            None => self.shift.clone(),
        };
        let gradient = self.smooth_gradient(&point);
        let subgradient = gradient.iter().map(|g| -g.clone()).collect();
        Optimum {
            value: self.value(&point),
            smooth_value: self.smooth_value(&point),
            nonsmooth_value: self.nonsmooth_value(&point),
            point,
            gradient,
            subgradient,
        }
    }
}

fn fold_extreme<T: Numeric>(v: &[T], better: impl Fn(&T, &T) -> bool) -> T {
    v.iter()
        .skip(1)
        .fold(v[0].clone(), |acc, x| if better(x, &acc) { x.clone() } else { acc })
}

fn clamp<T: Numeric>(v: T, lo: T, hi: T) -> T {
    if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}

fn soft_threshold<T: Numeric>(v: &T, cut: &T) -> T {
    if *v > cut.clone() {
        v.clone() - cut.clone()
    } else if *v < -cut.clone() {
        v.clone() + cut.clone()
    } else {
        T::zero()
    }
}

/// Two-eigenvalue quadratic `1/2 (mu x^2 + L y^2)` centred at the origin,
/// the classical worst case of steepest descent.
pub fn two_eigenvalue_quadratic<T: Numeric>(mu: T, l: T) -> Result<TestFunction<T>, OracleError> {
    TestFunction::quadratic(vec![mu, l], vec![T::zero(), T::zero()])
}

pub(crate) fn is_zero_vec<T: Numeric>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    #[test]
    fn composite_minimizer_is_stationary() {
        let f = TestFunction::composite(vec![int(1), int(4)], vec![int(3), rat(1, 8)], int(1)).unwrap();
        let opt = f.minimizer();
        assert_eq!(opt.point, vec![int(2), int(0)]);
        // s_* must be a subgradient of |x| at x_*
        assert_eq!(opt.subgradient, vec![int(1), rat(1, 2)]);
        assert_eq!(opt.value, rat(1, 2) + rat(1, 2) * int(4) * rat(1, 64) + int(2));
    }

    #[test]
    fn prox_soft_thresholds() {
        let f = TestFunction::composite(vec![1.0], vec![0.0], 2.0).unwrap();
        assert_eq!(f.prox(&[3.0], &0.5), vec![2.0]);
        assert_eq!(f.prox(&[-0.5], &0.5), vec![0.0]);
    }

    #[test]
    fn float_zero_gets_the_clamped_subgradient() {
        let f = TestFunction::composite(vec![1.0, 1.0], vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(f.nearest_subgradient(&[0.0, -0.0], &[0.5, -3.0]), vec![-0.5, 1.0]);
    }
}
