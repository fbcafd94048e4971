//! Error function of complex argument.
//!
//! Three evaluation paths, picked by region after folding to `Re z >= 0`:
//! the Maclaurin series near the origin and close to the imaginary axis,
//! the Laplace continued fraction of the Faddeeva function in the middle
//! range, and the asymptotic expansion of erfc for `|z| >= 10`.

use num_complex::Complex64;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Magnitude beyond which results are reported as saturated.
pub const SATURATION_RADIUS: f64 = 30.0;

const SERIES_RADIUS: f64 = 2.0;
const ASYMPTOTIC_RADIUS: f64 = 10.0;

/// erf(z) for complex z.
pub fn cerf(z: Complex64) -> Complex64 {
    cerf_flagged(z).0
}

/// erf(z) together with a flag that is set when `|z|` is in the saturated
/// region (`|z| >= 30`) or the value overflowed.
pub fn cerf_flagged(z: Complex64) -> (Complex64, bool) {
    if z.re.is_nan() || z.im.is_nan() {
        return (Complex64::new(f64::NAN, f64::NAN), true);
    }
    let (w, sign) = if z.re < 0.0 { (-z, -1.0) } else { (z, 1.0) };
    let r = w.norm();
    let mut v = if r >= ASYMPTOTIC_RADIUS {
        1.0 - erfc_asymptotic(w)
    } else if r <= SERIES_RADIUS || w.re < 1.0 {
        maclaurin(w)
    } else {
        1.0 - (-w * w).exp() * faddeeva_cf(Complex64::new(-w.im, w.re))
    };
    // erf maps the real and imaginary axes to themselves
    if z.im == 0.0 {
        v.im = 0.0;
    }
    if z.re == 0.0 {
        v.re = 0.0;
    }
    v *= sign;
    let flagged = r >= SATURATION_RADIUS || !v.re.is_finite() || !v.im.is_finite();
    (v, flagged)
}

fn maclaurin(z: Complex64) -> Complex64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut n = 0usize;
    loop {
        n += 1;
        term *= -z2 / n as f64;
        let c = term / (2 * n + 1) as f64;
        sum += c;
        if c.norm() <= 1e-17 * sum.norm() || n > 2000 {
            break;
        }
    }
    sum * FRAC_2_SQRT_PI
}

/// Faddeeva function w(ζ) for Im ζ > 0 from the Laplace continued fraction,
/// evaluated backward with the depth doubled until successive values agree.
fn faddeeva_cf(zeta: Complex64) -> Complex64 {
    let eval = |depth: usize| {
        let mut r = Complex64::new(0.0, 0.0);
        for n in (1..=depth).rev() {
            r = (n as f64 * 0.5) / (zeta - r);
        }
        Complex64::new(0.0, FRAC_1_SQRT_PI) / (zeta - r)
    };
    let r2 = zeta.norm_sqr();
    let mut depth = 20 + (800.0 / r2).ceil() as usize;
    let mut prev = eval(depth);
    while depth < 16_384 {
        depth *= 2;
        let next = eval(depth);
        if (next - prev).norm() <= 1e-16 * next.norm() {
            return next;
        }
        prev = next;
    }
    prev
}

/// Asymptotic erfc(z) for large |z| with |arg z| < 3π/4.
fn erfc_asymptotic(z: Complex64) -> Complex64 {
    let (sum, _) = asymptotic_sum(z);
    (-z * z).exp() / (z * std::f64::consts::PI.sqrt()) * sum
}

/// Partial sum of the erfc asymptotic series truncated before its smallest
/// term, and the magnitude of the first omitted term (relative scale).
pub(crate) fn asymptotic_sum(z: Complex64) -> (Complex64, f64) {
    let inv = 1.0 / (2.0 * z * z);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut n = 0usize;
    loop {
        n += 1;
        let next = -term * inv * (2 * n - 1) as f64;
        if next.norm() >= term.norm() || n > 500 {
            return (sum, next.norm());
        }
        if next.norm() < 1e-18 * sum.norm() {
            sum += next;
            return (sum, 0.0);
        }
        sum += next;
        term = next;
    }
}

/// Independent references used to check [`cerf`].
pub mod reference {
    use num_complex::Complex64;

    /// Double-double number: unevaluated sum `hi + lo`.
    #[derive(Debug, Clone, Copy)]
    struct Dd {
        hi: f64,
        lo: f64,
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        let e = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: e }
    }

    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd {
            hi: s,
            lo: b - (s - a),
        }
    }

    impl Dd {
        fn new(x: f64) -> Self {
            Dd { hi: x, lo: 0.0 }
        }
        fn add(self, o: Dd) -> Dd {
            let s = two_sum(self.hi, o.hi);
            let t = two_sum(self.lo, o.lo);
            let r = quick_two_sum(s.hi, s.lo + t.hi);
            quick_two_sum(r.hi, r.lo + t.lo)
        }
        fn neg(self) -> Dd {
            Dd {
                hi: -self.hi,
                lo: -self.lo,
            }
        }
        fn mul(self, o: Dd) -> Dd {
            let p = self.hi * o.hi;
            let e = self.hi.mul_add(o.hi, -p);
            quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
        }
        fn div_f64(self, d: f64) -> Dd {
            let q1 = self.hi / d;
            let p = q1 * d;
            let e = q1.mul_add(d, -p);
            let r = self.add(Dd { hi: -p, lo: -e });
            let q2 = r.hi / d;
            quick_two_sum(q1, q2)
        }
        fn abs(self) -> f64 {
            self.hi.abs()
        }
    }

    #[derive(Debug, Clone, Copy)]
    struct Cdd {
        re: Dd,
        im: Dd,
    }

    impl Cdd {
        fn add(self, o: Cdd) -> Cdd {
            Cdd {
                re: self.re.add(o.re),
                im: self.im.add(o.im),
            }
        }
        fn mul(self, o: Cdd) -> Cdd {
            Cdd {
                re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
                im: self.re.mul(o.im).add(self.im.mul(o.re)),
            }
        }
        fn div_f64(self, d: f64) -> Cdd {
            Cdd {
                re: self.re.div_f64(d),
                im: self.im.div_f64(d),
            }
        }
        fn norm(self) -> f64 {
            self.re.abs().hypot(self.im.abs())
        }
        fn to_c64(self) -> Complex64 {
            Complex64::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
        }
    }

    const TWO_OVER_SQRT_PI: Dd = Dd {
        hi: std::f64::consts::FRAC_2_SQRT_PI,
        lo: 1.533_545_961_316_588e-17,
    };

    /// Maclaurin series `(2/√π) Σ (-1)^n z^(2n+1) / (n! (2n+1))` summed in
    /// double-double arithmetic until the terms drop below 1e-34 relative.
    pub fn erf_series(z: Complex64) -> Complex64 {
        erf_series_terms(z, usize::MAX)
    }

    /// Same series with at most `max_terms` terms.
    pub fn erf_series_terms(z: Complex64, max_terms: usize) -> Complex64 {
        let zd = Cdd {
            re: Dd::new(z.re),
            im: Dd::new(z.im),
        };
        let mz2 = {
            let s = zd.mul(zd);
            Cdd {
                re: s.re.neg(),
                im: s.im.neg(),
            }
        };
        let mut term = zd;
        let mut sum = zd;
        let mut n = 0usize;
        while n + 1 < max_terms.min(5000) {
            n += 1;
            term = term.mul(mz2).div_f64(n as f64);
            let c = term.div_f64((2 * n + 1) as f64);
            sum = sum.add(c);
            if c.norm() < 1e-34 * sum.norm().max(1e-300) && n > 4 {
                break;
            }
        }
        let k = Cdd {
            re: TWO_OVER_SQRT_PI,
            im: Dd::new(0.0),
        };
        sum.mul(k).to_c64()
    }

    /// Optimally truncated asymptotic value of erf(z) and an error bound
    /// made of twice the first omitted term.
    pub fn erf_asymptotic(z: Complex64) -> (Complex64, f64) {
        let (sum, omitted) = super::asymptotic_sum(z);
        let pref = (-z * z).exp() / (z * std::f64::consts::PI.sqrt());
        (1.0 - pref * sum, 2.0 * omitted * pref.norm())
    }
}
