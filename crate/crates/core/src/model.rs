//! Data carried through bounds, decoders and generators.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::support::{SupportSet, MAX_PREDICTORS};

/// Known per-predictor weights `w`. Every entry is finite and non-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector<T>(Vec<T>);

impl<T: Real> CoefficientVector<T> {
    pub fn new(w: Vec<T>) -> Result<Self> {
        if w.len() > MAX_PREDICTORS {
            return Err(Error::Capacity {
                m: w.len(),
                max: MAX_PREDICTORS,
            });
        }
        if let Some((i, _)) = w
            .iter()
            .enumerate()
            .find(|(_, x)| x.is_zero() || !x.is_finite())
        {
            return Err(Error::invalid(
                "w",
                format!("entry {} must be finite and non-zero", i + 1),
            ));
        }
        Ok(CoefficientVector(w))
    }

    pub fn ones(m: usize) -> Self {
        CoefficientVector(vec![T::one(); m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    /// `γ*`: `w_i` on the support, zero elsewhere.
    pub fn restrict(&self, support: SupportSet) -> Vec<T> {
        self.0
            .iter()
            .enumerate()
            .map(|(c, &w)| if support.contains(c + 1) { w } else { T::zero() })
            .collect()
    }
}

impl<T> std::ops::Index<usize> for CoefficientVector<T> {
    type Output = T;
    fn index(&self, col: usize) -> &T {
        &self.0[col]
    }
}

/// One environment: a deterministic `n_e × m` design and, once generated or
/// loaded, its response `Y^e`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentData<T> {
    pub env_id: usize,
    x: Array2<T>,
    y: Option<Array1<T>>,
}

impl<T: Real> EnvironmentData<T> {
    pub fn new(env_id: usize, x: Array2<T>) -> Result<Self> {
        let (n, m) = x.dim();
        if n == 0 {
            return Err(Error::Dimension(format!("environment {env_id} has no rows")));
        }
        if m > MAX_PREDICTORS {
            return Err(Error::Capacity {
                m,
                max: MAX_PREDICTORS,
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("x", "design entries must be finite"));
        }
        Ok(EnvironmentData { env_id, x, y: None })
    }

    pub fn with_response(mut self, y: Array1<T>) -> Result<Self> {
        self.set_response(y)?;
        Ok(self)
    }

    pub fn set_response(&mut self, y: Array1<T>) -> Result<()> {
        if y.len() != self.n() {
            return Err(Error::Dimension(format!(
                "response of length {} for environment {} with {} rows",
                y.len(),
                self.env_id,
                self.n()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("y", "response entries must be finite"));
        }
        self.y = Some(y);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn m(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<T> {
        &self.x
    }

    pub fn column(&self, col: usize) -> ArrayView1<'_, T> {
        self.x.column(col)
    }

    pub fn y(&self) -> Option<&Array1<T>> {
        self.y.as_ref()
    }

    pub fn response(&self) -> Result<&Array1<T>> {
        self.y.as_ref().ok_or(Error::MissingResponse(self.env_id))
    }

    pub(crate) fn check_weights(&self, w: &CoefficientVector<T>) -> Result<()> {
        if w.len() != self.m() {
            Err(Error::Dimension(format!(
                "w has {} entries but environment {} has {} predictors",
                w.len(),
                self.env_id,
                self.m()
            )))
        } else {
            Ok(())
        }
    }
}

/// True noise level plus the known range it is guaranteed to lie in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec<T> {
    pub sigma: T,
    pub sigma_min: T,
    pub sigma_max: T,
}

impl<T: Real> NoiseSpec<T> {
    pub fn new(sigma: T, sigma_min: T, sigma_max: T) -> Result<Self> {
        if !(sigma_min > T::zero()) {
            return Err(Error::invalid("sigma_min", "must be positive"));
        }
        if !(sigma_max >= sigma_min) {
            return Err(Error::invalid("sigma_max", "must be at least sigma_min"));
        }
        if !(sigma >= sigma_min && sigma <= sigma_max) {
            return Err(Error::invalid("sigma", "must lie in [sigma_min, sigma_max]"));
        }
        Ok(NoiseSpec {
            sigma,
            sigma_min,
            sigma_max,
        })
    }

    /// Variance known exactly.
    pub fn known(sigma: T) -> Result<Self> {
        Self::new(sigma, sigma, sigma)
    }
}

/// Ground truth for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T> {
    pub w: CoefficientVector<T>,
    pub s_star: SupportSet,
    pub noise: NoiseSpec<T>,
}

impl<T: Real> ModelSpec<T> {
    pub fn new(w: CoefficientVector<T>, s_star: SupportSet, noise: NoiseSpec<T>) -> Result<Self> {
        s_star.check_fits(w.len())?;
        Ok(ModelSpec { w, s_star, noise })
    }

    pub fn m(&self) -> usize {
        self.w.len()
    }

    pub fn gamma_star(&self) -> Vec<T> {
        self.w.restrict(self.s_star)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn coefficients_reject_zero() {
        assert!(CoefficientVector::new(vec![1.0, 0.0]).is_err());
        assert!(CoefficientVector::new(vec![1.0, f64::NAN]).is_err());
        let w = CoefficientVector::new(vec![2.0, -1.0, 3.0]).unwrap();
        let s = SupportSet::from_indices([1, 3]).unwrap();
        assert_eq!(w.restrict(s), vec![2.0, 0.0, 3.0]);
    }

    #[test]
    fn environment_checks() {
        assert!(EnvironmentData::<f64>::new(0, Array2::zeros((0, 2))).is_err());
        let env = EnvironmentData::new(1, array![[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert!(env.response().is_err());
        assert!(env.clone().with_response(array![1.0]).is_err());
        let env = env.with_response(array![1.0, 2.0]).unwrap();
        assert_eq!(env.response().unwrap()[1], 2.0);
        assert!(EnvironmentData::new(0, array![[f64::INFINITY]]).is_err());
    }

    #[test]
    fn noise_range() {
        assert!(NoiseSpec::new(1.0, 0.5, 2.0).is_ok());
        assert!(NoiseSpec::new(0.4, 0.5, 2.0).is_err());
        assert!(NoiseSpec::new(1.0, 0.0, 2.0).is_err());
        assert!(NoiseSpec::new(1.0, 1.5, 1.2).is_err());
    }

    #[test]
    fn model_gamma_star() {
        let w = CoefficientVector::new(vec![0.7, 1.2, 0.9]).unwrap();
        let s = SupportSet::from_indices([2]).unwrap();
        let model = ModelSpec::new(w, s, NoiseSpec::known(1.0).unwrap()).unwrap();
        assert_eq!(model.gamma_star(), vec![0.0, 1.2, 0.0]);
        let bad = SupportSet::from_indices([4]).unwrap();
        assert!(ModelSpec::new(model.w.clone(), bad, model.noise).is_err());
    }
}
