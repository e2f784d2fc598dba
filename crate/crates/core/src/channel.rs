//! Spatially correlated AWGN / Rayleigh / Rician channel vectors and the
//! distribution of the total gain `h^H h`.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{symmetric_eigen, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Awgn,
    Rayleigh,
    Rician,
}

/// Line-of-sight array response.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LosSpec {
    /// `Δ_i = 1`.
    #[default]
    Broadside,
    /// `Δ_i = exp(jπ i sin φ)` for a half-wavelength array, `φ` in radians.
    Steering(f64),
}

/// Immutable channel description with its cached eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub antennas: usize,
    pub rician_k: f64,
    pub rho: f64,
    pub correlation: Matrix<f64>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors.
    pub eigenvectors: Matrix<f64>,
    pub los: Vec<Complex64>,
    sqrt_correlation: Matrix<f64>,
}

pub fn build_model(kind: ChannelKind, antennas: usize, rician_k: f64, rho: f64, los: LosSpec) -> Result<ChannelModel> {
    if antennas == 0 {
        return Err(Error::InvalidParameter("at least one antenna is required"));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter("correlation coefficient must lie in [0, 1)"));
    }
    if !(rician_k >= 0.0) {
        return Err(Error::InvalidParameter("Rician factor must be non-negative"));
    }
    let rician_k = if kind == ChannelKind::Rayleigh { 0.0 } else { rician_k };
    let correlation = Matrix::from_fn(antennas, antennas, |r, c| libm::pow(rho, r.abs_diff(c) as f64));
    let eig = symmetric_eigen(&correlation);
    let eigenvalues: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
    let sqrt_correlation = Matrix::from_fn(antennas, antennas, |r, c| {
        (0..antennas).map(|j| eig.vectors[(r, j)] * libm::sqrt(eigenvalues[j]) * eig.vectors[(c, j)]).sum()
    });
    let los = (0..antennas)
        .map(|i| match los {
            LosSpec::Broadside => Complex64::new(1.0, 0.0),
            LosSpec::Steering(phi) => Complex64::from_polar(1.0, core::f64::consts::PI * i as f64 * libm::sin(phi)),
        })
        .collect();
    Ok(ChannelModel {
        kind,
        antennas,
        rician_k,
        rho,
        correlation,
        eigenvalues,
        eigenvectors: eig.vectors,
        los,
        sqrt_correlation,
    })
}

impl ChannelModel {
    pub fn awgn(antennas: usize) -> Result<Self> {
        build_model(ChannelKind::Awgn, antennas, 0.0, 0.0, LosSpec::Broadside)
    }

    pub fn rayleigh(antennas: usize, rho: f64) -> Result<Self> {
        build_model(ChannelKind::Rayleigh, antennas, 0.0, rho, LosSpec::Broadside)
    }

    pub fn rician(antennas: usize, rician_k: f64, rho: f64) -> Result<Self> {
        build_model(ChannelKind::Rician, antennas, rician_k, rho, LosSpec::Broadside)
    }

    /// `V^H Δ`, the LOS vector in the eigenbasis.
    pub fn los_in_eigenbasis(&self) -> Vec<Complex64> {
        (0..self.antennas)
            .map(|j| (0..self.antennas).map(|i| self.los[i] * self.eigenvectors[(i, j)]).sum())
            .collect()
    }

    /// Rejects models whose eigenvalues are not pairwise distinct.
    pub fn require_distinct_eigenvalues(&self) -> Result<()> {
        for (i, &a) in self.eigenvalues.iter().enumerate() {
            for &b in &self.eigenvalues[i + 1..] {
                if (a - b).abs() <= 1e-9 * a.abs().max(b.abs()) {
                    return Err(Error::UnsupportedModel("gain distribution needs distinct correlation eigenvalues"));
                }
            }
        }
        Ok(())
    }
}

/// Circularly symmetric unit-variance complex Gaussian.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// Draws one channel vector. AWGN returns the all-ones vector.
pub fn sample_channel<R: Rng + ?Sized>(model: &ChannelModel, rng: &mut R) -> Vec<Complex64> {
    let n = model.antennas;
    if model.kind == ChannelKind::Awgn {
        return alloc::vec![Complex64::new(1.0, 0.0); n];
    }
    let u: Vec<Complex64> = (0..n).map(|_| complex_normal(rng)).collect();
    let k = model.rician_k;
    let los_scale = libm::sqrt(k / (k + 1.0));
    let scatter_scale = libm::sqrt(1.0 / (k + 1.0));
    (0..n)
        .map(|i| {
            let scattered: Complex64 = (0..n).map(|j| u[j] * model.sqrt_correlation[(i, j)]).sum();
            model.los[i] * los_scale + scattered * scatter_scale
        })
        .collect()
}

/// Partial-fraction weights `b_j = λ_j^{N-1} Π_{n≠j} 1/(λ_j - λ_n)`.
pub fn gain_weights(model: &ChannelModel) -> Result<Vec<f64>> {
    model.require_distinct_eigenvalues()?;
    let lambda = &model.eigenvalues;
    let n = lambda.len();
    Ok((0..n)
        .map(|j| {
            (0..n)
                .filter(|&m| m != j)
                .fold(1.0, |acc, m| acc * lambda[j] / (lambda[j] - lambda[m]))
        })
        .collect())
}

fn require_rayleigh(model: &ChannelModel) -> Result<()> {
    if model.kind != ChannelKind::Rayleigh {
        return Err(Error::UnsupportedModel("gain distribution is only available for Rayleigh channels"));
    }
    Ok(())
}

pub fn gain_pdf(model: &ChannelModel, x: f64) -> Result<f64> {
    require_rayleigh(model)?;
    let b = gain_weights(model)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    Ok(b.iter().zip(&model.eigenvalues).map(|(&bj, &lj)| bj / lj * libm::exp(-x / lj)).sum())
}

pub fn gain_cdf(model: &ChannelModel, x: f64) -> Result<f64> {
    require_rayleigh(model)?;
    let b = gain_weights(model)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    // 1 - Σ b_j e^{-x/λ_j}, since Σ b_j = 1
    let tail: f64 = b.iter().zip(&model.eigenvalues).map(|(&bj, &lj)| bj * libm::exp(-x / lj)).sum();
    Ok((1.0 - tail).clamp(0.0, 1.0))
}

/// `Pr[h^H h > x]`, accurate far into the tail where `1 - cdf` is not.
pub fn gain_survival(model: &ChannelModel, x: f64) -> Result<f64> {
    require_rayleigh(model)?;
    let b = gain_weights(model)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    let tail: f64 = b.iter().zip(&model.eigenvalues).map(|(&bj, &lj)| bj * libm::exp(-x / lj)).sum();
    Ok(tail.clamp(0.0, 1.0))
}

/// Smallest `x` with `gain_cdf(x) ≥ p`, by bisection.
pub fn gain_quantile(model: &ChannelModel, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidParameter("quantile probability must lie in [0, 1)"));
    }
    let mut hi = model.eigenvalues[0].max(1e-12);
    while gain_cdf(model, hi)? < p {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gain_cdf(model, mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(hi)
}
