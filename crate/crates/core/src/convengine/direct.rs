//! Sliding-window reference convolutions, `O(N²K²)`.

use crate::{Error, Real, Result};

/// Cross-correlation of the `n × n` plane `x`, zero-padded by `padding`, with
/// the `k × k` plane `kernel`. Output side is `n + 2·padding − k + 1`.
pub fn direct_crosscorr<T: Real>(x: &[T], n: usize, kernel: &[T], k: usize, padding: usize) -> Result<Vec<T>> {
    if x.len() != n * n || kernel.len() != k * k {
        return Err(Error::shape(
            "crosscorr operands",
            &[n * n, k * k],
            &[x.len(), kernel.len()],
        ));
    }
    let padded = n + 2 * padding;
    if k == 0 || k > padded {
        return Err(Error::UnsupportedGeometry(format!(
            "kernel side {k} does not fit padded image side {padded}"
        )));
    }
    let out = padded - k + 1;
    let mut y = vec![T::zero(); out * out];
    for i in 0..out {
        for j in 0..out {
            let mut acc = T::zero();
            for u in 0..k {
                let r = i + u;
                if r < padding || r >= padding + n {
                    continue;
                }
                let row = &x[(r - padding) * n..(r - padding + 1) * n];
                for v in 0..k {
                    let c = j + v;
                    if c < padding || c >= padding + n {
                        continue;
                    }
                    acc += row[c - padding] * kernel[u * k + v];
                }
            }
            y[i * out + j] = acc;
        }
    }
    Ok(y)
}

/// Full convolution of the `m × m` plane `g` with the `k × k` plane `kernel`
/// (size `m + k − 1`), with `crop` rows and columns removed from every side.
pub fn direct_fullconv<T: Real>(g: &[T], m: usize, kernel: &[T], k: usize, crop: usize) -> Result<Vec<T>> {
    if g.len() != m * m || kernel.len() != k * k {
        return Err(Error::shape(
            "fullconv operands",
            &[m * m, k * k],
            &[g.len(), kernel.len()],
        ));
    }
    if m == 0 || k == 0 || 2 * crop > m + k - 1 {
        return Err(Error::UnsupportedGeometry(format!(
            "cannot crop {crop} from a full convolution of sides {m} and {k}"
        )));
    }
    let full = m + k - 1;
    let out = full - 2 * crop;
    let mut y = vec![T::zero(); out * out];
    for i in 0..out {
        for j in 0..out {
            let (p, q) = (i + crop, j + crop);
            let mut acc = T::zero();
            for u in 0..k {
                if u > p || p - u >= m {
                    continue;
                }
                for v in 0..k {
                    if v > q || q - v >= m {
                        continue;
                    }
                    acc += g[(p - u) * m + (q - v)] * kernel[u * k + v];
                }
            }
            y[i * out + j] = acc;
        }
    }
    Ok(y)
}
