//! Minimal Sobol sequence generator for up to 10 dimensions, using the
//! gray-code construction with direction numbers from the Joe-Kuo tables.

/// (s, a, m) rows for dimensions 2..=10; dimension 1 is the van der Corput
/// sequence in base 2 and needs no parameters.
const PARAMS: [(u32, u32, &[u32]); 9] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 3, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
];

const BITS: usize = 32;

pub struct SobolSequence {
    /// Direction numbers, `dim` rows of `BITS` entries.
    v: Vec<[u32; BITS]>,
    x: Vec<u32>,
    index: u64,
}

impl SobolSequence {
    /// Sequences beyond 10 dimensions are unsupported.
    pub fn new(dim: usize) -> Option<Self> {
        if dim == 0 || dim > PARAMS.len() + 1 {
            return None;
        }
        let mut v = Vec::with_capacity(dim);
        // First dimension: v_k = 2^(31-k).
        let mut first = [0u32; BITS];
        for (k, slot) in first.iter_mut().enumerate() {
            *slot = 1 << (31 - k);
        }
        v.push(first);
        for &(s, a, m) in PARAMS.iter().take(dim.saturating_sub(1)) {
            let s = s as usize;
            let mut row = [0u32; BITS];
            for k in 0..s {
                row[k] = m[k] << (31 - k);
            }
            for k in s..BITS {
                row[k] = row[k - s] ^ (row[k - s] >> s);
                for j in 0..s - 1 {
                    if (a >> j) & 1 == 1 {
                        row[k] ^= row[k - s + 1 + j];
                    }
                }
            }
            v.push(row);
        }
        Some(SobolSequence {
            v,
            x: vec![0; dim],
            index: 0,
        })
    }

    /// Next point in the unit hypercube [0,1)^d.
    pub fn next_point(&mut self) -> Vec<f64> {
        let point = self
            .x
            .iter()
            .map(|&xi| xi as f64 / (1u64 << 32) as f64)
            .collect();
        let c = self.index.trailing_ones() as usize;
        for (xi, row) in self.x.iter_mut().zip(&self.v) {
            *xi ^= row[c];
        }
        self.index += 1;
        point
    }
}
