//! Comparison of three contraction factors for gradient descent with Armijo
//! backtracking (no noise): the certified one and two classical bounds.

use num_traits::One;

use super::CertifyError;
use crate::numeric::{from_f64, int, to_f64, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct ArmijoComparison {
    pub epsilon: f64,
    pub eta: f64,
    pub kappa: f64,
    /// `1 - 4 eps (1 - eps) / (eta kappa)`
    pub t_new: f64,
    /// `1 - 2 eps / (eta kappa)`, defined for `eps < 1/2`.
    pub t_ly: Option<f64>,
    /// `(kappa - (2 - 1/eps)(1 - eps)/eta) / (kappa + (1/eps - 1)/eta)`,
    /// defined for `eps >= 1/2`.
    pub t_nemi: Option<f64>,
    /// `t_new < t_ly`, decided exactly.
    pub new_below_ly: Option<bool>,
    /// `t_new <= t_nemi`, decided exactly.
    pub new_at_most_nemi: Option<bool>,
}

/// Inputs are converted to their exact binary rationals, so the ordering
/// flags carry no rounding error.
pub fn compare_armijo(epsilon: f64, eta: f64, kappa: f64) -> Result<ArmijoComparison, CertifyError> {
    let exact = |name: &str, x: f64| from_f64(x).ok_or_else(|| CertifyError::InvalidComparison(format!("{name} = {x} is not finite")));
    let (e, h, k) = (exact("epsilon", epsilon)?, exact("eta", eta)?, exact("kappa", kappa)?);
    let one = Rational::one();
    let zero = int(0);
    if !(e > zero && e < one) {
        return Err(CertifyError::InvalidComparison(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    if h <= one {
        return Err(CertifyError::InvalidComparison(format!("eta = {eta} must exceed 1")));
    }
    if k <= one {
        return Err(CertifyError::InvalidComparison(format!("kappa = {kappa} must exceed 1")));
    }
    let half = Rational::new(1.into(), 2.into());
    let hk = &h * &k;
    let t_new = &one - int(4) * &e * (&one - &e) / &hk;
    let t_ly = (e < half).then(|| &one - int(2) * &e / &hk);
    let t_nemi = (e >= half).then(|| {
        let inv = &one / &e;
        (&k - (int(2) - &inv) * (&one - &e) / &h) / (&k + (&inv - &one) / &h)
    });
    Ok(ArmijoComparison {
        epsilon,
        eta,
        kappa,
        t_new: to_f64(&t_new),
        new_below_ly: t_ly.as_ref().map(|ly| &t_new < ly),
        new_at_most_nemi: t_nemi.as_ref().map(|nemi| &t_new <= nemi),
        t_ly: t_ly.as_ref().map(to_f64),
        t_nemi: t_nemi.as_ref().map(to_f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_two_ten() {
        let c = compare_armijo(0.25, 2.0, 10.0).unwrap();
        assert!((c.t_new - 0.9625).abs() < 1e-15);
        assert!((c.t_ly.unwrap() - 0.975).abs() < 1e-15);
        assert_eq!(c.new_below_ly, Some(true));
        assert_eq!(c.t_nemi, None);
    }

    #[test]
    fn limits_near_half() {
        let c = compare_armijo(0.5, 1.0 + 1e-9, 1.0 + 1e-9).unwrap();
        assert!(c.t_new.abs() < 1e-8);
        assert!((c.t_nemi.unwrap() - 0.5).abs() < 1e-8);
        assert_eq!(c.new_at_most_nemi, Some(true));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(compare_armijo(1.0, 2.0, 10.0).is_err());
        assert!(compare_armijo(0.3, 1.0, 10.0).is_err());
        assert!(compare_armijo(0.3, 2.0, f64::NAN).is_err());
    }
}
