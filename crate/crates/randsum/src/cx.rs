//! Cancellation-free complex kernels shared by the model layer and the
//! transform engines.
//!
//! The generating functions inverted here have dynamic ranges up to e^{2λ},
//! so the exponent of every `exp` must be assembled without catastrophic
//! cancellation. These helpers keep `exp(w) - 1`, `ln(1 + w)` and
//! `e^{iu} - 1` accurate for small arguments, which is where the naive forms
//! lose all their digits.

use num_complex::Complex64;

/// e^{iu} - 1 = -2 sin^2(u/2) + i sin(u), exact-to-rounding for all u.
pub(crate) fn expi_m1(u: f64) -> Complex64 {
    let s = (0.5 * u).sin();
    Complex64::new(-2.0 * s * s, u.sin())
}

/// exp(w) - 1 for complex w without cancellation near w = 0.
///
/// Real part: e^a cos b - 1 = expm1(a) cos b - 2 sin^2(b/2); both terms are
/// O(|w|), so no digits cancel.
pub(crate) fn exp_m1(w: Complex64) -> Complex64 {
    let (a, b) = (w.re, w.im);
    let sb = (0.5 * b).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * sb * sb, a.exp() * b.sin())
}

/// ln(1 + w) for complex w, accurate near w = 0.
///
/// |1 + w|^2 = 1 + (2 Re w + |w|^2) feeds the real `ln_1p`; the argument uses
/// `atan2` directly.
pub(crate) fn ln_1p(w: Complex64) -> Complex64 {
    let t = 2.0 * w.re + w.norm_sqr();
    Complex64::new(0.5 * t.ln_1p(), w.im.atan2(1.0 + w.re))
}

/// Falling factorial x(x-1)...(x-j+1); 1 for j = 0.
pub(crate) fn falling(x: f64, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (x - i as f64))
}

/// Rising factorial x(x+1)...(x+j-1); 1 for j = 0.
pub(crate) fn rising(x: f64, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (x + i as f64))
}

/// Kahan-compensated sum of complex terms.
#[derive(Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: Complex64,
    carry: Complex64,
}

impl CompensatedSum {
    pub fn add(&mut self, term: Complex64) {
        let y = term - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> Complex64 {
        self.sum
    }
}
