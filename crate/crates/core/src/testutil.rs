//! Independent finite-difference oracle for unit tests.

/// Central-difference derivatives of orders 1..=3 with one Richardson step.
pub fn fd_derivs(f: impl Fn(f64) -> f64, x: f64, h: f64) -> [f64; 3] {
    let raw = |h: f64| {
        let (fm2, fm1, f0, fp1, fp2) = (f(x - 2.0 * h), f(x - h), f(x), f(x + h), f(x + 2.0 * h));
        [
            (fp1 - fm1) / (2.0 * h),
            (fp1 - 2.0 * f0 + fm1) / (h * h),
            (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h * h * h),
        ]
    };
    let coarse = raw(h);
    let fine = raw(h / 2.0);
    [0, 1, 2].map(|k| (4.0 * fine[k] - coarse[k]) / 3.0)
}

