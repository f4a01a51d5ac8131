use super::{NumError, NumResult};

/// In-place unnormalized Walsh–Hadamard transform in Sylvester (natural) order.
///
/// After the call `data[m] = Σ_x (−1)^{popcount(m & x)} · input[x]`. Applying it
/// twice multiplies the input by `data.len()`.
pub fn fwht(data: &mut [f64]) -> NumResult<()> {
    let len = data.len();
    if !len.is_power_of_two() {
        return Err(NumError::NotPowerOfTwo(len));
    }
    let mut half = 1;
    while half < len {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
    Ok(())
}
