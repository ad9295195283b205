//! Counter-based Philox4x32-10 generator.
//!
//! Every draw is a pure function of a 128-bit counter and a 64-bit key, so
//! particle `i` at step `k` of replica `r` sees the same numbers regardless of
//! thread count or evaluation order.

use rand_core::{impls, Error, RngCore};
use rand_distr::{Distribution, StandardNormal};

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// Ten rounds of Philox4x32 on `ctr` under `key`.
#[inline]
pub fn philox4x32(mut ctr: [u32; 4], mut key: [u32; 2]) -> [u32; 4] {
    for r in 0..10 {
        if r > 0 {
            key[0] = key[0].wrapping_add(W0);
            key[1] = key[1].wrapping_add(W1);
        }
        let (hi0, lo0) = mulhilo(M0, ctr[0]);
        let (hi1, lo1) = mulhilo(M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

/// Uniform on `[0, 1)` with 53 random bits.
#[inline]
fn unit(hi: u32, lo: u32) -> f64 {
    ((((hi as u64) << 32) | lo as u64) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Tags separate the independent uses of one `(particle, step, replica)` slot.
pub(crate) const TAG_INCREMENT: u32 = 0;
pub(crate) const TAG_INITIAL: u32 = 0x8000_0000;

/// The random stream of one replica: a key derived from the seed plus the
/// replica id in the third counter word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoiseStream {
    key: [u32; 2],
    replica: u32,
}

impl NoiseStream {
    pub fn new(seed: u64, replica: u32) -> Self {
        Self { key: [seed as u32, (seed >> 32) as u32], replica }
    }

    pub fn replica(&self) -> u32 {
        self.replica
    }

    /// Four raw words for `(stream, slot, tag)`.
    #[inline]
    pub fn block(&self, stream: u32, slot: u32, tag: u32) -> [u32; 4] {
        philox4x32([stream, slot, self.replica, tag], self.key)
    }

    /// Two uniforms on `[0, 1)`.
    #[inline]
    pub fn uniforms(&self, stream: u32, slot: u32, tag: u32) -> [f64; 2] {
        let w = self.block(stream, slot, tag);
        [unit(w[0], w[1]), unit(w[2], w[3])]
    }

    /// A word stream over consecutive tags of one `(stream, slot)` counter,
    /// starting at `tag`.
    pub fn slot_rng(&self, stream: u32, slot: u32, tag: u32) -> SlotRng<'_> {
        SlotRng { src: self, stream, slot, tag, buf: [0; 4], pos: 4 }
    }

    /// `out.len()` standard normals for one particle at one step.
    #[inline]
    pub fn normals(&self, stream: u32, step: u32, out: &mut [f64]) {
        let mut rng = self.slot_rng(stream, step, TAG_INCREMENT);
        for z in out {
            *z = StandardNormal.sample(&mut rng);
        }
    }
}

/// Philox blocks of one counter slot, consumed word by word.
pub struct SlotRng<'a> {
    src: &'a NoiseStream,
    stream: u32,
    slot: u32,
    tag: u32,
    buf: [u32; 4],
    pos: usize,
}

impl RngCore for SlotRng<'_> {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        if self.pos == 4 {
            self.buf = self.src.block(self.stream, self.slot, self.tag);
            self.tag = self.tag.wrapping_add(1);
            self.pos = 0;
        }
        self.pos += 1;
        self.buf[self.pos - 1]
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        impls::next_u64_via_u32(self)
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        impls::fill_bytes_via_next(self, dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_answers() {
        assert_eq!(philox4x32([0; 4], [0; 2]), [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8]);
        assert_eq!(
            philox4x32([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd]
        );
        assert_eq!(
            philox4x32([0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344], [0xa4093822, 0x299f31d0]),
            [0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1]
        );
    }

    #[test]
    fn normal_moments() {
        let s = NoiseStream::new(42, 3);
        let n = 200_000;
        let (mut m1, mut m2, mut m4) = (0.0, 0.0, 0.0);
        let mut z3 = [0.0; 3];
        for i in 0..n / 3 {
            s.normals(i as u32, 0, &mut z3);
            for z in z3 {
                m1 += z;
                m2 += z * z;
                m4 += z.powi(4);
            }
        }
        let n = (n / 3 * 3) as f64;
        assert!((m1 / n).abs() < 4.0 / n.sqrt());
        assert!((m2 / n - 1.0).abs() < 4.0 * 2f64.sqrt() / n.sqrt());
        assert!((m4 / n - 3.0).abs() < 4.0 * 96f64.sqrt() / n.sqrt());
    }

    #[test]
    fn replicas_differ() {
        let (a, b) = (NoiseStream::new(7, 0), NoiseStream::new(7, 1));
        assert_ne!(a.block(0, 0, 0), b.block(0, 0, 0));
        assert_eq!(a.block(5, 9, 1), NoiseStream::new(7, 0).block(5, 9, 1));
    }
}
