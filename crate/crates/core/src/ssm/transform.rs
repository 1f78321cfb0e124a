//! Bijections between the constrained parameter space of a model and the
//! unconstrained space ℝⁿ on which all proposal kernels operate.

use crate::error::{Error, Result};
use crate::scalar::{c, Scalar};
use crate::ssm::UnconstrainedParams;

/// Per-coordinate transform pieces.
///
/// `forward` maps constrained → unconstrained, `inverse` maps back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentTransform {
    /// Already unconstrained.
    Identity,
    /// θ > 0, mapped by x = log θ.
    Log,
    /// θ ∈ (−1, 1), mapped by x = atanh θ.
    Atanh,
}

impl ComponentTransform {
    fn forward<T: Scalar>(self, theta: T, index: usize) -> Result<T> {
        match self {
            ComponentTransform::Identity => Ok(theta),
            ComponentTransform::Log => {
                if theta <= T::zero() {
                    return Err(Error::domain(format!(
                        "component {index}: log transform needs a positive value, got {theta}"
                    )));
                }
                Ok(theta.ln())
            }
            ComponentTransform::Atanh => {
                if theta <= -T::one() || theta >= T::one() {
                    return Err(Error::domain(format!(
                        "component {index}: atanh transform needs |value| < 1, got {theta}"
                    )));
                }
                Ok(theta.atanh())
            }
        }
    }

    #[inline]
    fn inverse<T: Scalar>(self, x: T) -> T {
        match self {
            ComponentTransform::Identity => x,
            ComponentTransform::Log => x.exp(),
            ComponentTransform::Atanh => x.tanh(),
        }
    }

    /// log |d inverse / dx| at the unconstrained point.
    #[inline]
    fn log_jacobian<T: Scalar>(self, x: T) -> T {
        match self {
            ComponentTransform::Identity => T::zero(),
            ComponentTransform::Log => x,
            ComponentTransform::Atanh => {
                let th = x.tanh();
                (T::one() - th * th).ln()
            }
        }
    }

    /// d/dx of [`Self::log_jacobian`].
    #[inline]
    fn grad_log_jacobian<T: Scalar>(self, x: T) -> T {
        match self {
            ComponentTransform::Identity => T::zero(),
            ComponentTransform::Log => T::one(),
            ComponentTransform::Atanh => -c::<T>(2.0) * x.tanh(),
        }
    }

    /// dθ/dx, the factor that chain-rules a ∂/∂θ gradient to ∂/∂x.
    #[inline]
    pub(crate) fn dtheta_dx<T: Scalar>(self, x: T) -> T {
        match self {
            ComponentTransform::Identity => T::one(),
            ComponentTransform::Log => x.exp(),
            ComponentTransform::Atanh => {
                let th = x.tanh();
                T::one() - th * th
            }
        }
    }
}

/// Componentwise transform between constrained and unconstrained space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterTransform<T> {
    components: Vec<ComponentTransform>,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Scalar> ParameterTransform<T> {
    pub fn new(components: Vec<ComponentTransform>) -> Self {
        ParameterTransform {
            components,
            _marker: std::marker::PhantomData,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ComponentTransform] {
        &self.components
    }

    /// Constrained θ → unconstrained x. Errors on boundary or exterior values.
    pub fn to_unconstrained(&self, theta: &[T]) -> Result<UnconstrainedParams<T>> {
        if theta.len() != self.components.len() {
            return Err(Error::Config(format!(
                "expected {} parameters, got {}",
                self.components.len(),
                theta.len()
            )));
        }
        let mut out = Vec::with_capacity(theta.len());
        for (i, (&t, comp)) in theta.iter().zip(&self.components).enumerate() {
            out.push(comp.forward(t, i)?);
        }
        UnconstrainedParams::new(out)
    }

    /// Unconstrained x → constrained θ.
    pub fn to_constrained(&self, x: &UnconstrainedParams<T>) -> Vec<T> {
        x.values()
            .iter()
            .zip(&self.components)
            .map(|(&v, comp)| comp.inverse(v))
            .collect()
    }

    /// log |det J| of the inverse map at x (nats).
    pub fn log_jacobian(&self, x: &UnconstrainedParams<T>) -> T {
        x.values()
            .iter()
            .zip(&self.components)
            .map(|(&v, comp)| comp.log_jacobian(v))
            .sum()
    }

    /// Gradient of [`Self::log_jacobian`] with respect to x.
    pub fn grad_log_jacobian(&self, x: &UnconstrainedParams<T>) -> Vec<T> {
        x.values()
            .iter()
            .zip(&self.components)
            .map(|(&v, comp)| comp.grad_log_jacobian(v))
            .collect()
    }

    /// dθ_i/dx_i for every component, used to chain-rule model gradients.
    pub fn dtheta_dx(&self, x: &UnconstrainedParams<T>) -> Vec<T> {
        x.values()
            .iter()
            .zip(&self.components)
            .map(|(&v, comp)| comp.dtheta_dx(v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn transform() -> ParameterTransform<f64> {
        ParameterTransform::new(vec![
            ComponentTransform::Identity,
            ComponentTransform::Log,
            ComponentTransform::Atanh,
        ])
    }

    #[test]
    fn named_values() {
        let t = transform();
        let x = t.to_unconstrained(&[0.2, 1.0, 0.9]).unwrap();
        assert_eq!(x.values()[0], 0.2);
        assert_eq!(x.values()[1], 0.0);
        // atanh(0.9) by the independent closed form ln((1+0.9)/(1-0.9))/2.
        let oracle = 0.5 * (1.9_f64 / 0.1).ln();
        assert!((x.values()[2] - oracle).abs() < 1e-14);
        assert!((oracle - 1.472_219_489_583_22).abs() < 1e-12);
    }

    #[test]
    fn boundary_values_are_domain_errors() {
        let t = transform();
        assert!(t.to_unconstrained(&[0.0, 0.0, 0.5]).is_err()); // sigma = 0
        assert!(t.to_unconstrained(&[0.0, 1.0, 1.0]).is_err()); // |phi| = 1
        assert!(t.to_unconstrained(&[0.0, -1.0, 0.5]).is_err());
    }

    #[test]
    fn round_trip_on_sampled_interior() {
        let t = transform();
        let mut rng = crate::rng::seeded_rng(11);
        for _ in 0..200 {
            let theta = [
                rng.random_range(-5.0..5.0),
                rng.random_range(0.01..20.0),
                rng.random_range(-0.99..0.99),
            ];
            let x = t.to_unconstrained(&theta).unwrap();
            let back = t.to_constrained(&x);
            for (a, b) in theta.iter().zip(&back) {
                assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn log_jacobian_finite_and_matches_fd() {
        let t = transform();
        let mut rng = crate::rng::seeded_rng(5);
        for _ in 0..50 {
            let x = UnconstrainedParams::new(vec![
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            ])
            .unwrap();
            let lj = t.log_jacobian(&x);
            assert!(lj.is_finite());
            let grad = t.grad_log_jacobian(&x);
            let fd = crate::stats::central_difference(
                |v| {
                    t.log_jacobian(&UnconstrainedParams::new(v.to_vec()).unwrap())
                },
                x.values(),
                1e-6,
            );
            for (g, f) in grad.iter().zip(&fd) {
                assert!((g - f).abs() < 1e-5 * (1.0 + g.abs()));
            }
        }
    }
}
