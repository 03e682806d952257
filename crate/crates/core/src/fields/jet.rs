//! Truncated Taylor polynomials in three variables.
//!
//! A [`Jet`] of order `n` stores the Taylor coefficients `∂^m f(p) / m!` for
//! every multi-index `m` with `|m| <= n`. Arithmetic on jets is exact up to
//! truncation, so a field written once against `Jet` inputs yields its value
//! and all partial derivatives up to [`MAX_ORDER`] at a point.
//!
//! Coefficients are stored in graded order: the constant term, then the three
//! first-degree slots `x, y, z`, then degree two, and so on. A jet of order
//! `n` only ever reads the prefix of length [`coeff_count`]`(n)`.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::LazyLock;

/// Highest derivative order a jet can carry.
pub const MAX_ORDER: usize = 3;

const MAX_COEFFS: usize = 20;

/// Number of coefficients of a jet of the given order (`C(order + 3, 3)`).
pub const fn coeff_count(order: usize) -> usize {
    (order + 1) * (order + 2) * (order + 3) / 6
}

struct Tables {
    exps: Vec<[u8; 3]>,
    degree: Vec<u8>,
    index: [[[u8; MAX_ORDER + 1]; MAX_ORDER + 1]; MAX_ORDER + 1],
    // (lhs, rhs, out) slot triples sorted by output degree.
    mul: Vec<(u8, u8, u8)>,
    mul_len: [usize; MAX_ORDER + 1],
    // per axis: (out slot, source slot, factor) for ∂_axis.
    deriv: [Vec<(u8, u8, f64)>; 3],
}

static TABLES: LazyLock<Tables> = LazyLock::new(|| {
    let mut exps = Vec::with_capacity(MAX_COEFFS);
    for deg in 0..=MAX_ORDER {
        for a in (0..=deg).rev() {
            for b in (0..=deg - a).rev() {
                let c = deg - a - b;
                exps.push([a as u8, b as u8, c as u8]);
            }
        }
    }
    debug_assert_eq!(exps.len(), MAX_COEFFS);
    let degree: Vec<u8> = exps.iter().map(|e| e[0] + e[1] + e[2]).collect();
    let mut index = [[[u8::MAX; MAX_ORDER + 1]; MAX_ORDER + 1]; MAX_ORDER + 1];
    for (slot, e) in exps.iter().enumerate() {
        index[e[0] as usize][e[1] as usize][e[2] as usize] = slot as u8;
    }

    let mut mul = Vec::new();
    for (i, ei) in exps.iter().enumerate() {
        for (j, ej) in exps.iter().enumerate() {
            let s = [ei[0] + ej[0], ei[1] + ej[1], ei[2] + ej[2]];
            if (s[0] + s[1] + s[2]) as usize <= MAX_ORDER {
                let k = index[s[0] as usize][s[1] as usize][s[2] as usize];
                mul.push((i as u8, j as u8, k));
            }
        }
    }
    mul.sort_by_key(|&(_, _, k)| degree[k as usize]);
    let mut mul_len = [0; MAX_ORDER + 1];
    for (order, len) in mul_len.iter_mut().enumerate() {
        *len = mul
            .iter()
            .take_while(|&&(_, _, k)| degree[k as usize] as usize <= order)
            .count();
    }

    let deriv = std::array::from_fn(|axis| {
        let mut out = Vec::new();
        for (slot, e) in exps.iter().enumerate() {
            if degree[slot] as usize >= MAX_ORDER {
                continue;
            }
            let mut up = *e;
            up[axis] += 1;
            let src = index[up[0] as usize][up[1] as usize][up[2] as usize];
            out.push((slot as u8, src, f64::from(up[axis])));
        }
        out
    });

    Tables {
        exps,
        degree,
        index,
        mul,
        mul_len,
        deriv,
    }
});

/// Truncated Taylor expansion of a scalar function of `(x, y, z)` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    order: u8,
    c: [f64; MAX_COEFFS],
}

impl Jet {
    /// A constant carried at the given order.
    pub fn constant(value: f64, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [0.0; MAX_COEFFS];
        c[0] = value;
        Self { order: order as u8, c }
    }

    /// The coordinate function `axis` expanded at `value`.
    pub fn variable(value: f64, axis: usize, order: usize) -> Self {
        let mut j = Self::constant(value, order);
        if order >= 1 {
            j.c[1 + axis] = 1.0;
        }
        j
    }

    /// Seeds the three coordinate variables at a point.
    pub fn seed(p: [f64; 3], order: usize) -> [Jet; 3] {
        std::array::from_fn(|i| Self::variable(p[i], i, order))
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    fn len(&self) -> usize {
        coeff_count(self.order as usize)
    }

    /// Taylor coefficient for the multi-index `exps`, zero beyond the order.
    pub fn coeff(&self, exps: [usize; 3]) -> f64 {
        if exps.iter().sum::<usize>() > self.order() {
            return 0.0;
        }
        self.c[TABLES.index[exps[0]][exps[1]][exps[2]] as usize]
    }

    pub fn set_coeff(&mut self, exps: [usize; 3], value: f64) {
        assert!(exps.iter().sum::<usize>() <= self.order());
        self.c[TABLES.index[exps[0]][exps[1]][exps[2]] as usize] = value;
    }

    /// Multi-indices of all coefficients of a jet of the given order.
    pub fn multi_indices(order: usize) -> impl Iterator<Item = [usize; 3]> {
        TABLES.exps[..coeff_count(order)]
            .iter()
            .map(|e| [e[0] as usize, e[1] as usize, e[2] as usize])
    }

    /// First partial derivative `∂f/∂x_axis`; needs order >= 1.
    pub fn d(&self, axis: usize) -> f64 {
        debug_assert!(self.order >= 1);
        self.c[1 + axis]
    }

    pub fn gradient(&self) -> [f64; 3] {
        [self.d(0), self.d(1), self.d(2)]
    }

    /// The jet of `∂f/∂x_axis`, one order lower. `None` at order 0.
    pub fn partial(&self, axis: usize) -> Option<Jet> {
        let order = self.order().checked_sub(1)?;
        let mut out = Jet::constant(0.0, order);
        let n = coeff_count(order);
        for &(slot, src, factor) in &TABLES.deriv[axis] {
            if (slot as usize) < n {
                out.c[slot as usize] = factor * self.c[src as usize];
            }
        }
        Some(out)
    }

    /// Drops coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order());
        let mut out = Jet::constant(0.0, order);
        let n = coeff_count(order);
        out.c[..n].copy_from_slice(&self.c[..n]);
        out
    }

    fn lower(a: &Jet, b: &Jet) -> (Jet, Jet) {
        if a.order == b.order {
            (*a, *b)
        } else {
            let o = a.order().min(b.order());
            (a.truncate(o), b.truncate(o))
        }
    }

    /// Evaluates `sum_k t[k] (self - a)^k` where `a` is the constant term and
    /// `t[k] = g^(k)(a) / k!` are the Taylor coefficients of a scalar `g`.
    fn compose(&self, taylor: &[f64; MAX_ORDER + 1]) -> Jet {
        let n = self.order();
        let mut out = Jet::constant(taylor[0], n);
        if n == 0 {
            return out;
        }
        let mut h = *self;
        h.c[0] = 0.0;
        let mut power = h;
        for (k, &t) in taylor.iter().enumerate().take(n + 1).skip(1) {
            out += power * t;
            if k < n {
                power *= h;
            }
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&[e, e, e / 2.0, e / 6.0])
    }

    pub fn ln(&self) -> Jet {
        let a = self.value();
        self.compose(&[a.ln(), 1.0 / a, -1.0 / (2.0 * a * a), 1.0 / (3.0 * a * a * a)])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(&[s, c, -s / 2.0, -c / 6.0])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(&[c, -s, -c / 2.0, s / 6.0])
    }

    /// Real power `self^p`; the constant term must be positive unless `p` is
    /// a non-negative integer.
    pub fn powf(&self, p: f64) -> Jet {
        let a = self.value();
        let mut t = [0.0; MAX_ORDER + 1];
        let mut binom = 1.0;
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = binom * a.powf(p - k as f64);
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&t)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let r = 1.0 / a;
        self.compose(&[r, -r * r, r * r * r, -r * r * r * r])
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut out = Jet::constant(1.0, self.order());
        for _ in 0..n {
            out *= *self;
        }
        out
    }

    pub fn abs(&self) -> Jet {
        if self.value() < 0.0 {
            -*self
        } else {
            *self
        }
    }

    pub fn is_finite(&self) -> bool {
        self.c[..self.len()].iter().all(|v| v.is_finite())
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let (mut a, b) = Jet::lower(&self, &rhs);
        for i in 0..a.len() {
            a.c[i] += b.c[i];
        }
        a
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let (mut a, b) = Jet::lower(&self, &rhs);
        for i in 0..a.len() {
            a.c[i] -= b.c[i];
        }
        a
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let (a, b) = Jet::lower(&self, &rhs);
        let t = &*TABLES;
        let mut out = Jet::constant(0.0, a.order());
        for &(i, j, k) in &t.mul[..t.mul_len[a.order()]] {
            out.c[k as usize] += a.c[i as usize] * b.c[j as usize];
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        let n = self.len();
        for v in &mut self.c[..n] {
            *v = -*v;
        }
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        let n = self.len();
        for v in &mut self.c[..n] {
            *v *= rhs;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        rhs + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    // Division is multiplication by the reciprocal series.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        rhs.recip() * self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, rhs: Jet) {
        *self = *self * rhs;
    }
}

/// Degree of the slot in graded storage order (exposed for tests).
#[doc(hidden)]
pub fn slot_degree(slot: usize) -> usize {
    TABLES.degree[slot] as usize
}
