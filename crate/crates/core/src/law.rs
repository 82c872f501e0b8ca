//! The interface the order engine consumes: anything that can report a
//! survival function, and optionally a density.

use crate::error::Result;
use crate::fm;
use crate::quad::{self, Tolerance};

/// A nonnegative lifetime law viewed through its survival function.
///
/// Implementations supply `sf`, `pdf` and `rate_scale`; everything else has
/// a numerically sound default that can be overridden with a closed form.
pub trait LifetimeLaw {
    /// `P(T > t)`; callers pass `t >= 0`.
    fn sf(&self, t: f64) -> f64;

    /// Density at `t`, or `None` when the law has atoms.
    fn pdf(&self, t: f64) -> Option<f64>;

    /// Largest characteristic rate (1/time) of the law. Drives the lower end
    /// of default grids.
    fn rate_scale(&self) -> f64;

    /// `ln pdf(t)`; overriding avoids underflow far in the tail.
    fn ln_pdf(&self, t: f64) -> Option<f64> {
        self.pdf(t).map(fm::ln)
    }

    fn hazard(&self, t: f64) -> Option<f64> {
        let s = self.sf(t);
        self.pdf(t)
            .map(|f| if s > 0.0 { f / s } else { f64::INFINITY })
    }

    /// A time beyond which `sf < eps`.
    fn tail_time(&self, eps: f64) -> f64 {
        let mut t = 1.0 / self.rate_scale().max(f64::MIN_POSITIVE);
        for _ in 0..200 {
            if self.sf(t) < eps {
                break;
            }
            t *= 2.0;
        }
        t
    }

    /// Laplace transform of the survival function, `∫₀^∞ e^{-st} sf(t) dt`,
    /// by adaptive quadrature.
    fn laplace_sf(&self, s: f64) -> Result<f64> {
        let hi = self.tail_time(1e-15);
        let tol = Tolerance {
            abs: 1e-13,
            rel: 1e-11,
            max_intervals: 4000,
        };
        // The integrand is concentrated within a few multiples of 1/s, and
        // fast transients live near 1/rate_scale; panels spanning several
        // scales would step over them.
        let mut breaks = self.breakpoints();
        if s > 0.0 {
            breaks.extend([1.0 / s, 8.0 / s, 40.0 / s].into_iter().filter(|&b| b < hi));
        }
        let mut b = 1.0 / self.rate_scale();
        while b.is_finite() && b > 0.0 && b < hi {
            breaks.push(b);
            b *= 4.0;
        }
        breaks.sort_by(f64::total_cmp);
        quad::integrate(|t| fm::exp(-s * t) * self.sf(t), 0.0, hi, &breaks, tol).map(|e| e.value)
    }

    /// Points where `sf` jumps, for quadrature splitting.
    fn breakpoints(&self) -> alloc::vec::Vec<f64> {
        alloc::vec::Vec::new()
    }
}

impl<L: LifetimeLaw + ?Sized> LifetimeLaw for &L {
    fn sf(&self, t: f64) -> f64 {
        (**self).sf(t)
    }
    fn pdf(&self, t: f64) -> Option<f64> {
        (**self).pdf(t)
    }
    fn rate_scale(&self) -> f64 {
        (**self).rate_scale()
    }
    fn ln_pdf(&self, t: f64) -> Option<f64> {
        (**self).ln_pdf(t)
    }
    fn hazard(&self, t: f64) -> Option<f64> {
        (**self).hazard(t)
    }
    fn tail_time(&self, eps: f64) -> f64 {
        (**self).tail_time(eps)
    }
    fn laplace_sf(&self, s: f64) -> Result<f64> {
        (**self).laplace_sf(s)
    }
    fn breakpoints(&self) -> alloc::vec::Vec<f64> {
        (**self).breakpoints()
    }
}
