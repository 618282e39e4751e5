//! Special functions, semi-infinite quadrature and small dense linear algebra.

pub mod gamma;
pub mod linalg;
pub mod quadrature;

pub use gamma::{gamma, log_gamma};
pub use linalg::{cholesky, cholesky_jittered, DenseMatrix, Sym3, PIVOT_FLOOR};
pub use quadrature::{
    integrate_interval, integrate_semi_infinite, integrate_semi_infinite_scaled, Quadrature,
    QuadratureSpec,
};

/// Unevaluated sum `hi + lo` carrying about 106 bits; products of doubles are
/// exact.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleWord {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleWord {
    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Self {
            hi: s,
            lo: (a - (s - bb)) + (b - bb),
        }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Self { hi: s, lo: lo - (s - hi) }
    }

    /// Exact `a · b`.
    pub fn product(a: f64, b: f64) -> Self {
        let p = a * b;
        Self { hi: p, lo: a.mul_add(b, -p) }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

impl std::ops::Add for DoubleWord {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        let t = Self::two_sum(self.lo, o.lo);
        let u = Self::renorm(s.hi, s.lo + t.hi);
        Self::renorm(u.hi, u.lo + t.lo)
    }

}

impl std::ops::Sub for DoubleWord {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + Self { hi: -o.hi, lo: -o.lo }
    }
}

impl std::ops::Mul for DoubleWord {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let p = Self::product(self.hi, o.hi);
        Self::renorm(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}
