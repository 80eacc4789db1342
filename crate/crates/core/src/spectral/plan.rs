use super::fft::Radix2;
use crate::{Error, Real, Result};

/// Transform sizing for one convolution geometry.
///
/// The FFT side `L` is the smallest power of two that holds the padded image
/// plus a kernel's worth of zero head room, so circular products in the
/// spectral domain equal linear convolution on the cropped region.
#[derive(Debug, Clone)]
pub struct FftPlan<T> {
    image_len: usize,
    padding: usize,
    kernel_len: usize,
    fft_len: usize,
    valid_out_len: usize,
    radix: Radix2<T>,
}

/// Plans transforms for an `n × n` image, `k × k` kernel and padding `p`.
pub fn plan_fft<T: Real>(n: usize, k: usize, p: usize) -> Result<FftPlan<T>> {
    if k == 0 {
        return Err(Error::UnsupportedGeometry("kernel side must be at least 1".into()));
    }
    if k > n {
        return Err(Error::UnsupportedGeometry(format!(
            "kernel side {k} exceeds image side {n}"
        )));
    }
    let spatial = n + 2 * p;
    let fft_len = (spatial + k - 1).next_power_of_two();
    Ok(FftPlan {
        image_len: n,
        padding: p,
        kernel_len: k,
        fft_len,
        valid_out_len: spatial - k + 1,
        radix: Radix2::new(fft_len)?,
    })
}

impl<T: Real> FftPlan<T> {
    pub fn new(n: usize, k: usize, p: usize) -> Result<Self> {
        plan_fft(n, k, p)
    }

    pub fn image_len(&self) -> usize {
        self.image_len
    }

    /// Padded image side `N + 2P`.
    pub fn spatial_len(&self) -> usize {
        self.image_len + 2 * self.padding
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn kernel_len(&self) -> usize {
        self.kernel_len
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    /// Columns kept by the real transform, `⌊L/2⌋ + 1`.
    pub fn half_len(&self) -> usize {
        self.fft_len / 2 + 1
    }

    /// Elements of one half-spectrum slab, `L·(⌊L/2⌋+1)`.
    pub fn spectrum_len(&self) -> usize {
        self.fft_len * self.half_len()
    }

    pub fn valid_out_len(&self) -> usize {
        self.valid_out_len
    }

    pub fn twiddles(&self) -> &[crate::CRect<T>] {
        self.radix.twiddles()
    }

    pub(crate) fn radix(&self) -> &Radix2<T> {
        &self.radix
    }

    /// Places an `n × n` image at offset `(p, p)` of a zeroed `L × L` plane.
    pub fn pad_embed(&self, x: &[T], out: &mut [T]) -> Result<()> {
        let n = self.image_len;
        if x.len() != n * n {
            return Err(Error::shape("pad_embed input", &[n * n], &[x.len()]));
        }
        embed(x, n, n, self.padding, self.fft_len, out)
    }

    /// Top-left `valid × valid` block of an `L × L` result.
    pub fn crop_valid(&self, y: &[T], out: &mut [T]) -> Result<()> {
        let v = self.valid_out_len;
        if out.len() != v * v {
            return Err(Error::shape("crop_valid output", &[v * v], &[out.len()]));
        }
        crop(y, self.fft_len, 0, v, out)
    }
}

/// Zeroes the `l × l` plane `out` and copies the `rows × cols` block `x` to
/// offset `(offset, offset)`.
pub fn embed<T: Real>(x: &[T], rows: usize, cols: usize, offset: usize, l: usize, out: &mut [T]) -> Result<()> {
    if out.len() != l * l {
        return Err(Error::shape("embed output", &[l * l], &[out.len()]));
    }
    if x.len() != rows * cols || offset + rows > l || offset + cols > l {
        return Err(Error::shape("embed input", &[l - offset, l - offset], &[rows, cols]));
    }
    out.fill(T::zero());
    for (r, row) in x.chunks_exact(cols).enumerate() {
        let start = (r + offset) * l + offset;
        out[start..start + cols].copy_from_slice(row);
    }
    Ok(())
}

/// Copies the `size × size` block at `(offset, offset)` of the `l × l`
/// plane `y` into `out`.
pub fn crop<T: Real>(y: &[T], l: usize, offset: usize, size: usize, out: &mut [T]) -> Result<()> {
    if y.len() != l * l || offset + size > l || out.len() != size * size {
        return Err(Error::shape("crop", &[l * l, size * size], &[y.len(), out.len()]));
    }
    for (r, row) in out.chunks_exact_mut(size.max(1)).enumerate().take(size) {
        let start = (r + offset) * l + offset;
        row.copy_from_slice(&y[start..start + size]);
    }
    Ok(())
}
