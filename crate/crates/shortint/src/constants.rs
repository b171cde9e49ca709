//! Shared numeric constants.

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// log(2 pi)
pub const LOG_2PI: f64 = 1.837_877_066_409_345_5;

/// A = 2 - gamma - log(2 pi); the linear coefficient in the centered pair
/// average -h log h + A h.
pub const A: f64 = 2.0 - EULER_GAMMA - LOG_2PI;

/// B = 1 - gamma - log(2 pi) = A - 1; appears in the pair sum
/// h^2 - h log h + B h and in the integrated moment main term.
pub const B: f64 = 1.0 - EULER_GAMMA - LOG_2PI;

/// Moments of the standard normal: 1*3*...*(k-1) for even k, 0 for odd k.
pub fn normal_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let mut m = 1.0;
    let mut j = 1;
    while j < k {
        m *= j as f64;
        j += 2;
    }
    m
}
