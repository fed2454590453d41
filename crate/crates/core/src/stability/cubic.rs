//! Closed-form roots of a monic real cubic `λ³ + a₂λ² + a₁λ + a₀`.
//!
//! Depressed-cubic reduction, then the trigonometric form when all three
//! roots are real and Cardano's formula otherwise. Each root gets a single
//! Newton step against the undepressed polynomial, kept only if it lowers
//! the residual.

use std::f64::consts::PI;

use num_complex::Complex64;

pub fn eval(a2: f64, a1: f64, a0: f64, z: Complex64) -> Complex64 {
    ((z + a2) * z + a1) * z + a0
}

fn eval_deriv(a2: f64, a1: f64, z: Complex64) -> Complex64 {
    (z * 3.0 + 2.0 * a2) * z + a1
}

fn polish(a2: f64, a1: f64, a0: f64, z: Complex64) -> Complex64 {
    let d = eval_deriv(a2, a1, z);
    if d.norm() == 0.0 {
        return z;
    }
    let next = z - eval(a2, a1, a0, z) / d;
    if next.re.is_finite()
        && next.im.is_finite()
        && eval(a2, a1, a0, next).norm() < eval(a2, a1, a0, z).norm()
    {
        next
    } else {
        z
    }
}

/// Roots ordered real-first; a complex pair is returned as `(z, z̄)` with `im(z) > 0`.
pub fn solve(a2: f64, a1: f64, a0: f64) -> [Complex64; 3] {
    let shift = a2 / 3.0;
    let p = a1 - a2 * shift;
    let q = (2.0 * a2 * a2 * a2) / 27.0 - a2 * a1 / 3.0 + a0;

    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    if disc > 0.0 {
        // One real root and a conjugate pair. Choose the Cardano branch that
        // avoids cancellation between -q/2 and sqrt(disc).
        let big = -(half_q.signum()) * (half_q.abs() + disc.sqrt()).cbrt();
        let small = if big != 0.0 { -third_p / big } else { 0.0 };
        let real = big + small - shift;
        let re = -0.5 * (big + small) - shift;
        let im = 0.5 * 3f64.sqrt() * (big - small).abs();

        let real = polish(a2, a1, a0, Complex64::new(real, 0.0));
        let mut pair = polish(a2, a1, a0, Complex64::new(re, im));
        if pair.im < 0.0 {
            pair = pair.conj();
        }
        // Keep the real root on the real axis.
        [Complex64::new(real.re, 0.0), pair, pair.conj()]
    } else if p == 0.0 {
        let r = Complex64::new(-shift, 0.0);
        [r, r, r]
    } else {
        let r = 2.0 * (-third_p).sqrt();
        let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let mut roots = [0.0f64; 3];
        for (k, root) in roots.iter_mut().enumerate() {
            let t = r * (phi - 2.0 * PI * k as f64 / 3.0).cos();
            let z = polish(a2, a1, a0, Complex64::new(t - shift, 0.0));
            *root = z.re;
        }
        roots.sort_by(|a, b| a.total_cmp(b));
        roots.map(|x| Complex64::new(x, 0.0))
    }
}
