use crate::{Error, Real, Result};

/// Rank-4 real tensor `(batch, channel, height, width)`, row-major with the
/// width axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTensor4<T> {
    dims: [usize; 4],
    data: Vec<T>,
}

impl<T: Real> RealTensor4<T> {
    /// Wraps `data`, rejecting a length mismatch or non-finite values.
    pub fn new(dims: [usize; 4], data: Vec<T>) -> Result<Self> {
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::shape("tensor data length", &[len], &[data.len()]));
        }
        let t = RealTensor4 { dims, data };
        t.check_finite("tensor")?;
        Ok(t)
    }

    pub fn zeros(dims: [usize; 4]) -> Self {
        RealTensor4 {
            dims,
            data: vec![T::zero(); dims.iter().product()],
        }
    }

    pub fn from_fn(dims: [usize; 4], mut f: impl FnMut([usize; 4]) -> T) -> Self {
        let mut data = Vec::with_capacity(dims.iter().product());
        for b in 0..dims[0] {
            for c in 0..dims[1] {
                for h in 0..dims[2] {
                    for w in 0..dims[3] {
                        data.push(f([b, c, h, w]));
                    }
                }
            }
        }
        RealTensor4 { dims, data }
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn plane_len(&self) -> usize {
        self.dims[2] * self.dims[3]
    }

    /// The `(h, w)` plane at `(outer, inner)`.
    pub fn plane(&self, outer: usize, inner: usize) -> &[T] {
        let n = self.plane_len();
        let start = (outer * self.dims[1] + inner) * n;
        &self.data[start..start + n]
    }

    pub fn plane_mut(&mut self, outer: usize, inner: usize) -> &mut [T] {
        let n = self.plane_len();
        let start = (outer * self.dims[1] + inner) * n;
        &mut self.data[start..start + n]
    }

    fn offset(&self, idx: [usize; 4]) -> usize {
        ((idx[0] * self.dims[1] + idx[1]) * self.dims[2] + idx[2]) * self.dims[3] + idx[3]
    }

    pub fn get(&self, idx: [usize; 4]) -> T {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: [usize; 4], v: T) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub fn expect_dims(&self, what: &'static str, dims: [usize; 4]) -> Result<()> {
        if self.dims == dims {
            Ok(())
        } else {
            Err(Error::shape(what, &dims, &self.dims))
        }
    }

    /// Largest elementwise absolute difference; `∞` on a shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dims != other.dims {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.as_f64() - b.as_f64()).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.as_f64().abs()).fold(0.0, f64::max)
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        RealTensor4 {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> RealTensor4<U> {
        RealTensor4 {
            dims: self.dims,
            data: self.data.iter().map(|v| U::from_f64(v.as_f64())).collect(),
        }
    }
}

/// Half-spectrum slabs in rectangular form.
///
/// `dims = (outer1, outer2, rows, cols)`; each `(outer1, outer2)` slab is a
/// `rows × cols` RFFT layout with `cols = ⌊L/2⌋ + 1`. Real and imaginary
/// parts are stored as separate planes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRect<T> {
    dims: [usize; 4],
    pub(crate) re: Vec<T>,
    pub(crate) im: Vec<T>,
}

impl<T: Real> SpectrumRect<T> {
    pub fn zeros(dims: [usize; 4]) -> Self {
        let n = dims.iter().product();
        SpectrumRect {
            dims,
            re: vec![T::zero(); n],
            im: vec![T::zero(); n],
        }
    }

    pub fn from_planes(dims: [usize; 4], re: Vec<T>, im: Vec<T>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if re.len() != n || im.len() != n {
            return Err(Error::shape("spectrum planes", &[n, n], &[re.len(), im.len()]));
        }
        Ok(SpectrumRect { dims, re, im })
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn slab_len(&self) -> usize {
        self.dims[2] * self.dims[3]
    }

    pub fn slab_count(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn re(&self) -> &[T] {
        &self.re
    }

    pub fn im(&self) -> &[T] {
        &self.im
    }

    /// `(re, im)` of the slab with flat index `s`.
    pub fn slab(&self, s: usize) -> (&[T], &[T]) {
        let n = self.slab_len();
        (&self.re[s * n..(s + 1) * n], &self.im[s * n..(s + 1) * n])
    }

    pub fn slab_mut(&mut self, s: usize) -> (&mut [T], &mut [T]) {
        let n = self.slab_len();
        (&mut self.re[s * n..(s + 1) * n], &mut self.im[s * n..(s + 1) * n])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dims != other.dims {
            return f64::INFINITY;
        }
        let d = |a: &[T], b: &[T]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x.as_f64() - y.as_f64()).abs())
                .fold(0.0, f64::max)
        };
        d(&self.re, &other.re).max(d(&self.im, &other.im))
    }
}

/// Half-spectrum slabs in phasor form; same layout as [`SpectrumRect`].
///
/// Magnitudes are `≥ 0`, angles lie in `(−π, π]`, and zero magnitudes carry
/// angle 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPhasor<T> {
    dims: [usize; 4],
    pub(crate) mag: Vec<T>,
    pub(crate) ang: Vec<T>,
}

impl<T: Real> SpectrumPhasor<T> {
    pub fn zeros(dims: [usize; 4]) -> Self {
        let n = dims.iter().product();
        SpectrumPhasor {
            dims,
            mag: vec![T::zero(); n],
            ang: vec![T::zero(); n],
        }
    }

    /// Validates the phasor invariants elementwise.
    pub fn from_planes(dims: [usize; 4], mag: Vec<T>, ang: Vec<T>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if mag.len() != n || ang.len() != n {
            return Err(Error::shape("spectrum planes", &[n, n], &[mag.len(), ang.len()]));
        }
        let s = SpectrumPhasor { dims, mag, ang };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let pi = T::PI();
        for (&m, &a) in self.mag.iter().zip(&self.ang) {
            if m.is_nan() || m < T::zero() || a.is_nan() || a <= -pi || a > pi || (m == T::zero() && a != T::zero()) {
                return Err(Error::InvalidArgument(format!("invalid phasor element {m}∠{a}")));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn slab_len(&self) -> usize {
        self.dims[2] * self.dims[3]
    }

    pub fn slab_count(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn mag(&self) -> &[T] {
        &self.mag
    }

    pub fn ang(&self) -> &[T] {
        &self.ang
    }

    pub fn slab(&self, s: usize) -> (&[T], &[T]) {
        let n = self.slab_len();
        (&self.mag[s * n..(s + 1) * n], &self.ang[s * n..(s + 1) * n])
    }

    pub fn slab_mut(&mut self, s: usize) -> (&mut [T], &mut [T]) {
        let n = self.slab_len();
        (&mut self.mag[s * n..(s + 1) * n], &mut self.ang[s * n..(s + 1) * n])
    }
}
