//! Dense matrix exponential by scaling and squaring.

use nalgebra::DMatrix;

/// Taylor degree used after scaling. With `||A/2^s||_1 <= 1/2` the first
/// neglected term is below `0.5^19 / 19! ~ 1.6e-23`.
const TAYLOR_ORDER: u32 = 18;
const SCALED_NORM: f64 = 0.5;

fn norm_1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` for a square matrix.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(a.is_square(), "matrix exponential needs a square matrix");
    let n = a.nrows();
    let norm = norm_1(a);
    let squarings = if norm > SCALED_NORM {
        (norm / SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * 2f64.powi(-squarings);

    // Horner: I + A(I + A/2 (I + A/3 (...)))
    let eye = DMatrix::<f64>::identity(n, n);
    let mut acc = eye.clone();
    for k in (1..=TAYLOR_ORDER).rev() {
        acc = &eye + (&scaled * acc) / k as f64;
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}
