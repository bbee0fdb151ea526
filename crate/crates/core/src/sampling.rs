//! Deterministic low-discrepancy sequences used wherever the contracts
//! forbid hidden randomness (gamma validation samples, generic-element
//! candidates).

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Radical-inverse of `index` in the given base (van der Corput).
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut f = 1.0 / base as f64;
    while index > 0 {
        result += (index % base) as f64 * f;
        index /= base;
        f /= base as f64;
    }
    result
}

/// Point `index` of the Halton sequence in `[0,1)^dim`.
pub fn halton_point(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "Halton bases exhausted");
    (0..dim)
        .map(|d| radical_inverse(index + 1, PRIMES[d]))
        .collect()
}

/// Deterministic direction samples of unit Euclidean length. Cube points
/// are recentred and normalized; near-zero vectors are skipped so the
/// output always has the requested count.
pub fn halton_directions(count: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut index = 0u64;
    while out.len() < count {
        let p = halton_point(index, dim);
        index += 1;
        let v: Vec<f64> = p.iter().map(|x| 2.0 * x - 1.0).collect();
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-6 {
            continue;
        }
        out.push(v.iter().map(|x| x / n).collect());
    }
    out
}
