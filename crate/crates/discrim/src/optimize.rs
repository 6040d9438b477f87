//! Scalar minimization helpers shared by the scheme optimizers.

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Shrinks the bracket until its width falls below `tol` (absolute, in
/// the argument). Returns `(x_min, f_min)`. The bracket is assumed to
/// contain a single local minimum; callers that cannot guarantee this
/// should seed with [`scan_then_golden`].
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);

    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }

    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Coarse scan over `n_scan + 1` equispaced points of `[a, b]`
/// (endpoints included) followed by golden-section refinement around
/// the best sample.
///
/// The scan selects the basin, so functions with several local minima
/// (e.g. the mirror-degenerate angle objectives) converge to the global
/// one provided the scan resolves it. Sampling the endpoints matters:
/// objectives whose global minimum sits exactly on the boundary next to
/// a slightly worse interior basin would otherwise be bracketed into
/// the wrong well.
pub fn scan_then_golden(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    n_scan: usize,
    tol: f64,
) -> (f64, f64) {
    debug_assert!(n_scan >= 2);
    let step = (b - a) / n_scan as f64;
    let mut best_x = a;
    let mut best_f = f(a);
    for k in 1..=n_scan {
        let x = if k == n_scan { b } else { a + step * k as f64 };
        let fx = f(x);
        if fx < best_f {
            best_f = fx;
            best_x = x;
        }
    }
    let lo = (best_x - step).max(a);
    let hi = (best_x + step).min(b);
    let (x, fx) = golden_section_min(&f, lo, hi, tol);
    if fx <= best_f {
        (x, fx)
    } else {
        (best_x, best_f)
    }
}
