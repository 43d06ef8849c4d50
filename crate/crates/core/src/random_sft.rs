//! Random forbidden sets `F_n`, the random SFT `Y_n` and the hole `H_n`.
//!
//! Every word of `B_n(X)` is forbidden independently with probability
//! `1 - alpha`. Sampling consumes one uniform per word in the lexicographic
//! order of [`BlockIndex`], so for a fixed seed the forbidden sets are nested
//! in `alpha`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use bitvec::prelude::*;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::SampleError;
use crate::sft::{BlockIndex, Sft, Symbol, Word};
use crate::thermo::{measure_of_word, GibbsData};

/// One step of the splitmix64 generator, used to derive trial seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniforms on `[0, 1)` from xoshiro256** whose state is filled by
/// splitmix64 from the seed. Each uniform is the top 53 bits of one output.
#[derive(Clone, Debug)]
pub struct UniformStream(Xoshiro256StarStar);

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        UniformStream(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// One draw of `F_n`: bit `j` is set iff block `j` of the lexicographic index
/// is forbidden.
#[derive(Clone, Debug, PartialEq)]
pub struct ForbiddenSample {
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    bits: BitVec<u64, Lsb0>,
}

impl ForbiddenSample {
    /// A sample with an explicit forbidden set. `alpha` is NaN and `seed` is
    /// zero since nothing was drawn.
    pub fn from_indices(n: usize, len: usize, forbidden: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = bitvec![u64, Lsb0; 0; len];
        for i in forbidden {
            bits.set(i, true);
        }
        ForbiddenSample {
            n,
            alpha: f64::NAN,
            seed: 0,
            bits,
        }
    }

    /// Number of words in `B_n`.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `|F_n|`.
    pub fn count(&self) -> usize {
        self.bits.count_ones()
    }

    #[inline]
    pub fn is_forbidden(&self, block: usize) -> bool {
        self.bits[block]
    }

    pub fn forbidden_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    /// Bits packed most-significant-first into bytes, as lowercase hex.
    /// Trailing pad bits are zero.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.len().div_ceil(4));
        for chunk in self.bits.chunks(8) {
            let mut byte = 0u8;
            for (i, b) in chunk.iter().enumerate() {
                if *b {
                    byte |= 0x80 >> i;
                }
            }
            write!(s, "{byte:02x}").expect("writing to a String");
        }
        s
    }

    fn check(&self, index: &BlockIndex) -> Result<(), SampleError> {
        if self.len() != index.len() {
            return Err(SampleError::SizeMismatch {
                expected: index.len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

pub fn check_alpha(alpha: f64) -> Result<(), SampleError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(SampleError::BadAlpha(alpha))
    }
}

/// Draws `F_n` over the blocks of `index`. Block `j` is forbidden iff the
/// `j`-th uniform of the stream is below `1 - alpha`.
pub fn sample_forbidden(
    index: &BlockIndex,
    alpha: f64,
    seed: u64,
) -> Result<ForbiddenSample, SampleError> {
    check_alpha(alpha)?;
    let mut stream = UniformStream::new(seed);
    let threshold = 1.0 - alpha;
    let bits = (0..index.len())
        .map(|_| stream.next_f64() < threshold)
        .collect();
    Ok(ForbiddenSample {
        n: index.block_len(),
        alpha,
        seed,
        bits,
    })
}

/// `W_n(u)`: the distinct length-`n` subwords of `u`.
pub fn window_set(u: &[Symbol], n: usize) -> Result<BTreeSet<Word>, SampleError> {
    if n == 0 || u.len() < n {
        return Err(SampleError::TooShort { len: u.len(), n });
    }
    Ok(u.windows(n).map(Word::from).collect())
}

/// `xi_u`: whether no `n`-window of `u` is forbidden. One left-to-right scan
/// with a rolling block index.
pub fn xi(index: &BlockIndex, u: &[Symbol], sample: &ForbiddenSample) -> Result<bool, SampleError> {
    sample.check(index)?;
    let n = index.block_len();
    if u.len() < n {
        return Err(SampleError::TooShort { len: u.len(), n });
    }
    let mut cur = index.index_of(&u[..n]).ok_or(SampleError::Inadmissible)?;
    if sample.is_forbidden(cur) {
        return Ok(false);
    }
    for &b in &u[n..] {
        cur = index.step(cur, b).ok_or(SampleError::Inadmissible)?;
        if sample.is_forbidden(cur) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `E[xi_u] = alpha^{|W_n(u)|}`.
pub fn expected_xi(u: &[Symbol], alpha: f64, n: usize) -> Result<f64, SampleError> {
    Ok(alpha.powi(window_set(u, n)?.len() as i32))
}

/// `Cov(xi_u, xi_v) = alpha^{|W(u) | W(v)|} (1 - alpha^{|W(u) & W(v)|})`.
pub fn cov_xi(u: &[Symbol], v: &[Symbol], alpha: f64, n: usize) -> Result<f64, SampleError> {
    let wu = window_set(u, n)?;
    let wv = window_set(v, n)?;
    let both = wu.intersection(&wv).count();
    let either = wu.len() + wv.len() - both;
    Ok(covariance(alpha, either, both))
}

pub(crate) fn covariance(alpha: f64, union: usize, intersection: usize) -> f64 {
    alpha.powi(union as i32) * (1.0 - alpha.powi(intersection as i32))
}

/// `Y(F)`: the trimmed vertex shift on the surviving blocks. Returns the
/// shift and, for each of its symbols, the block index it came from.
pub fn build_y(
    sft: &Sft,
    index: &BlockIndex,
    sample: &ForbiddenSample,
) -> Result<(Sft, Vec<usize>), SampleError> {
    sample.check(index)?;
    Ok(index.subshift(sft, |i| !sample.is_forbidden(i)))
}

/// `mu(H_n) = sum of mu(w)` over forbidden `w`.
pub fn hole_measure(
    g: &GibbsData,
    index: &BlockIndex,
    sample: &ForbiddenSample,
) -> Result<f64, SampleError> {
    sample.check(index)?;
    Ok(sample
        .forbidden_indices()
        .map(|i| measure_of_word(g, index.word(i)))
        .sum())
}
