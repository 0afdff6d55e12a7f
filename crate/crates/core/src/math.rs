//! Float helpers routed through `libm` so the crate stays `no_std`.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// `|x|^p`. Integer and half-integer exponents avoid `pow`, which
/// dominates the cost of ℓp norms otherwise.
#[inline]
pub fn abs_pow(x: f64, p: f64) -> f64 {
    let a = abs(x);
    if p == 1.0 {
        return a;
    }
    if p == 2.0 {
        return a * a;
    }
    if a == 0.0 {
        return if p == 0.0 { 1.0 } else { 0.0 };
    }
    let twice = 2.0 * p;
    if (0.0..=64.0).contains(&twice) && libm::floor(twice) == twice {
        let whole = int_pow(a, (twice as u32) / 2);
        return if (twice as u32) % 2 == 1 {
            whole * sqrt(a)
        } else {
            whole
        };
    }
    powf(a, p)
}

#[inline]
fn int_pow(mut base: f64, mut exp: u32) -> f64 {
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}
