//! Globally adaptive 7/15-point Gauss–Kronrod quadrature.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use crate::{Error, Result};

// Tabulated nodes and weights, kept at their published precision.

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_489_0,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

/// Termination controls.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 0.0, max_evals: 10_000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]`, bisecting the worst segment until the summed
/// error estimate meets `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, config: QuadConfig) -> Result<QuadResult> {
    let first = kronrod(&mut f, a, b);
    let mut evaluations = 15;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    loop {
        let tol = config.abs_tol.max(config.rel_tol * value.abs());
        if error <= tol {
            return Ok(QuadResult { value, error_estimate: error, evaluations });
        }
        if evaluations + 30 > config.max_evals {
            return Err(Error::Quadrature { evaluations, estimate: value, error_estimate: error });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod(&mut f, worst.a, mid);
        let right = kronrod(&mut f, mid, worst.b);
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Rebuild totals occasionally so running updates do not drift.
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(7) - 3.0 * x * x + 1.0, -1.0, 2.0, QuadConfig::default()).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0) + 3.0;
        assert!((r.value - exact).abs() < 1e-13);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn smooth_and_peaked_integrands() {
        let r = integrate(|x| x.sin(), 0.0, PI, QuadConfig::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        let r = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, QuadConfig::default()).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value - exact).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let cfg = QuadConfig { abs_tol: 1e-15, rel_tol: 0.0, max_evals: 60 };
        let err = integrate(|x| x.abs().sqrt(), -1.0, 1.0, cfg).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
