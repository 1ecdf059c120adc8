//! Counter-based replicate streams.
//!
//! Every replicate draws from its own ChaCha8 stream keyed by
//! `(master_seed, replicate_index)`: the seed selects the key and the replicate
//! index selects the 64-bit stream id. A replicate's sample path therefore does
//! not depend on which worker runs it or in which order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    replicate_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, replicate_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(replicate_index);
        RngStream {
            master_seed,
            replicate_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn replicate_index(&self) -> u64 {
        self.replicate_index
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fair bits, 64 per underlying word, least significant first.
    pub fn bits(&mut self) -> BitReader<'_> {
        BitReader {
            stream: self,
            word: 0,
            left: 0,
        }
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

pub struct BitReader<'a> {
    stream: &'a mut RngStream,
    word: u64,
    left: u32,
}

impl BitReader<'_> {
    #[inline]
    pub fn next_bit(&mut self) -> bool {
        if self.left == 0 {
            self.word = self.stream.next_u64();
            self.left = 64;
        }
        let b = self.word & 1 == 1;
        self.word >>= 1;
        self.left -= 1;
        b
    }

    /// Number of one bits among the next `count` bits.
    #[inline]
    pub fn count_ones(&mut self, mut count: usize) -> u32 {
        let mut ones = 0;
        while count > 0 {
            if self.left == 0 {
                self.word = self.stream.next_u64();
                self.left = 64;
            }
            let take = (self.left as usize).min(count) as u32;
            let mask = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
            ones += (self.word & mask).count_ones();
            self.word = if take == 64 { 0 } else { self.word >> take };
            self.left -= take;
            count -= take as usize;
        }
        ones
    }
}
