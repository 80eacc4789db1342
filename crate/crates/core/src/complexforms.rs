//! Rectangular and phasor (polar) complex numbers.
//!
//! Operations are pure; their real-arithmetic cost is published as a
//! constant [`OpCost`] next to each function so callers can charge their own
//! ledgers in bulk.

use std::ops::{Add, AddAssign, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::Real;

/// Real-arithmetic operation counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCost {
    pub mul: u64,
    pub add: u64,
    pub div: u64,
    pub sqrt: u64,
    /// sin / cos / atan2 evaluations.
    pub trig: u64,
}

impl OpCost {
    pub const ZERO: OpCost = OpCost::new(0, 0, 0, 0, 0);

    pub const fn new(mul: u64, add: u64, div: u64, sqrt: u64, trig: u64) -> Self {
        OpCost {
            mul,
            add,
            div,
            sqrt,
            trig,
        }
    }

    /// `self` repeated `n` times.
    pub const fn times(self, n: u64) -> Self {
        OpCost {
            mul: self.mul * n,
            add: self.add * n,
            div: self.div * n,
            sqrt: self.sqrt * n,
            trig: self.trig * n,
        }
    }

    /// Multiplies plus additions, the quantity FLOP estimates usually count.
    pub const fn mul_add(&self) -> u64 {
        self.mul + self.add
    }

    pub const fn is_zero(&self) -> bool {
        self.mul == 0 && self.add == 0 && self.div == 0 && self.sqrt == 0 && self.trig == 0
    }
}

impl Add for OpCost {
    type Output = OpCost;

    fn add(self, o: OpCost) -> OpCost {
        OpCost {
            mul: self.mul + o.mul,
            add: self.add + o.add,
            div: self.div + o.div,
            sqrt: self.sqrt + o.sqrt,
            trig: self.trig + o.trig,
        }
    }
}

impl AddAssign for OpCost {
    fn add_assign(&mut self, o: OpCost) {
        *self = *self + o;
    }
}

impl std::iter::Sum for OpCost {
    fn sum<I: Iterator<Item = OpCost>>(iter: I) -> OpCost {
        iter.fold(OpCost::ZERO, |a, b| a + b)
    }
}

/// Cost of [`to_phasor`]: `a²`, `b²`, their sum, one square root, one atan2.
pub const TO_PHASOR_COST: OpCost = OpCost::new(2, 1, 0, 1, 1);
/// Cost of [`to_rectangular`]: two multiplies by the magnitude, cos and sin.
pub const TO_RECTANGULAR_COST: OpCost = OpCost::new(2, 0, 0, 0, 2);
/// Cost of [`mul_rect`].
pub const MUL_RECT_COST: OpCost = OpCost::new(4, 2, 0, 0, 0);
/// Cost of [`mul_phasor`]; the angle wrap is not counted.
pub const MUL_PHASOR_COST: OpCost = OpCost::new(1, 1, 0, 0, 0);

/// Complex number `re + j·im`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CRect<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> CRect<T> {
    pub fn new(re: T, im: T) -> Self {
        CRect { re, im }
    }

    pub fn zero() -> Self {
        CRect::new(T::zero(), T::zero())
    }

    pub fn norm(self) -> T {
        (self.re * self.re + self.im * self.im).sqrt()
    }

    pub fn scale(self, s: T) -> Self {
        CRect::new(self.re * s, self.im * s)
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl<T: Real> Add for CRect<T> {
    type Output = Self;

    #[inline]
    fn add(self, o: Self) -> Self {
        CRect::new(self.re + o.re, self.im + o.im)
    }
}

impl<T: Real> AddAssign for CRect<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.re += o.re;
        self.im += o.im;
    }
}

impl<T: Real> Sub for CRect<T> {
    type Output = Self;

    #[inline]
    fn sub(self, o: Self) -> Self {
        CRect::new(self.re - o.re, self.im - o.im)
    }
}

impl<T: Real> Mul for CRect<T> {
    type Output = Self;

    #[inline]
    fn mul(self, o: Self) -> Self {
        mul_rect(self, o)
    }
}

/// Complex number `mag ∠ ang`.
///
/// Always `mag ≥ 0` and `ang ∈ (−π, π]`; a zero magnitude carries angle 0.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CPhasor<T> {
    mag: T,
    ang: T,
}

impl<T: Real> CPhasor<T> {
    /// Builds a phasor, folding a negative magnitude into the angle and
    /// normalizing the angle.
    pub fn new(mag: T, ang: T) -> Self {
        let (mag, ang) = if mag < T::zero() {
            (-mag, ang + T::PI())
        } else {
            (mag, ang)
        };
        canonical(mag, normalize_angle(ang))
    }

    pub fn mag(self) -> T {
        self.mag
    }

    pub fn ang(self) -> T {
        self.ang
    }
}

#[inline]
fn canonical<T: Real>(mag: T, ang: T) -> CPhasor<T> {
    if mag == T::zero() {
        CPhasor {
            mag: T::zero(),
            ang: T::zero(),
        }
    } else {
        CPhasor { mag, ang }
    }
}

/// Wraps an angle into `(−π, π]`.
///
/// Inputs already in range are returned unchanged.
#[inline]
pub fn normalize_angle<T: Real>(ang: T) -> T {
    let pi = T::PI();
    if ang <= pi && ang > -pi {
        return ang;
    }
    let tau = T::TAU();
    let mut a = ang % tau;
    if a > pi {
        a -= tau;
    } else if a <= -pi {
        a += tau;
    }
    // `a % τ` can round onto the boundary
    if a <= -pi {
        pi
    } else {
        a
    }
}

/// Wrap for a sum of two in-range angles, which lies in `(−2π, 2π]`.
#[inline(always)]
pub(crate) fn wrap_sum<T: Real>(s: T) -> T {
    let pi = T::PI();
    if s > pi {
        s - T::TAU()
    } else if s <= -pi {
        s + T::TAU()
    } else {
        s
    }
}

/// Four-quadrant angle with the `(−π, π]` convention and canonical zero.
#[inline(always)]
pub(crate) fn angle_of<T: Real>(re: T, im: T, mag: T) -> T {
    if mag == T::zero() {
        return T::zero();
    }
    let a = im.atan2(re);
    // atan2(−0, x<0) is −π
    if a == -T::PI() {
        T::PI()
    } else {
        a
    }
}

pub fn to_phasor<T: Real>(z: CRect<T>) -> CPhasor<T> {
    let mag = (z.re * z.re + z.im * z.im).sqrt();
    CPhasor {
        mag,
        ang: angle_of(z.re, z.im, mag),
    }
}

pub fn to_rectangular<T: Real>(z: CPhasor<T>) -> CRect<T> {
    let (s, c) = z.ang.sin_cos();
    CRect::new(z.mag * c, z.mag * s)
}

#[inline(always)]
pub fn mul_rect<T: Real>(z1: CRect<T>, z2: CRect<T>) -> CRect<T> {
    CRect::new(z1.re * z2.re - z1.im * z2.im, z1.re * z2.im + z2.re * z1.im)
}

#[inline(always)]
pub fn mul_phasor<T: Real>(z1: CPhasor<T>, z2: CPhasor<T>) -> CPhasor<T> {
    canonical(z1.mag * z2.mag, wrap_sum(z1.ang + z2.ang))
}

pub fn conj_rect<T: Real>(z: CRect<T>) -> CRect<T> {
    CRect::new(z.re, -z.im)
}

pub fn conj_phasor<T: Real>(z: CPhasor<T>) -> CPhasor<T> {
    canonical(z.mag, normalize_angle(-z.ang))
}
