//! Fixed-point plaintext codecs.
//!
//! Two encodings share the Paillier plaintext space:
//!
//! * the signed codec maps reals to centered-modular residues (negative x
//!   becomes `n - round(|x| * 2^F)`), used by the logistic regression
//!   protocol where homomorphic sums and one plaintext multiplication must
//!   decode at scale `2^F` or `2^(2F)`;
//! * the layout codec builds 1024-bit words whose bits `[960, 1024)` hold an
//!   offset-encoded value window and whose low 960 bits carry an arbitrary
//!   magic region, used by the boosting protocol. Sums of layout words keep
//!   the two regions independent as long as the magic sums stay below
//!   2^960, which is what the reverse sum attack exploits.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

use super::{HeError, PlaintextWord};

pub const MAGIC_BITS: u32 = 960;
pub const VALUE_WINDOW_BITS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodecParams {
    /// Fixed-point fractional bits.
    pub frac_bits: u32,
    /// Offset exponent of the layout value window.
    pub offset_bits: u32,
    pub magic_bits: u32,
    /// Largest number of layout words a homomorphic sum may combine.
    pub max_count: u64,
}

/// Decoded homomorphic sum of layout words.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutSum {
    pub value_sum: f64,
    pub low_region: BigUint,
}

impl CodecParams {
    /// Signed codec defaults: F = 40 keeps 2F-scale products of protocol
    /// magnitudes far inside a 1088-bit modulus.
    pub fn signed_default() -> Self {
        Self { frac_bits: 40, offset_bits: 0, magic_bits: MAGIC_BITS, max_count: 1 }
    }

    /// Layout codec defaults: F = 24 with a 2^48 offset leaves room for
    /// 2^20 summands before the value window runs out of headroom.
    pub fn layout_default() -> Self {
        Self { frac_bits: 24, offset_bits: 48, magic_bits: MAGIC_BITS, max_count: 1 << 20 }
    }

    fn scale(&self) -> f64 {
        (self.frac_bits as f64).exp2()
    }

    /// Centered-modular fixed-point encoding.
    pub fn encode_signed(&self, x: f64, n: &BigUint) -> Result<PlaintextWord, HeError> {
        let scaled = (x.abs() * self.scale()).round();
        if !scaled.is_finite() || scaled >= (63f64).exp2() {
            return Err(HeError::SignedOverflow(x));
        }
        let m = BigUint::from(scaled as u64);
        let raw = if x < 0.0 && !m.is_zero() { n - m } else { m };
        Ok(PlaintextWord::new(raw))
    }

    /// Decode a centered-modular residue. `scale_exponent` is 1 for plain
    /// words and sums, 2 for words produced by one plaintext multiplication.
    pub fn decode_signed(&self, w: &PlaintextWord, scale_exponent: u32, n: &BigUint) -> f64 {
        let half = n >> 1;
        let signed = if w.raw > half {
            -((n - &w.raw).to_f64().unwrap_or(f64::INFINITY))
        } else {
            w.raw.to_f64().unwrap_or(f64::INFINITY)
        };
        signed / ((self.frac_bits * scale_exponent) as f64).exp2()
    }

    /// Layout encoding: `raw = (round(x * 2^F) + 2^offset_bits) << 960 | magic`.
    pub fn encode_layout(
        &self,
        x: f64,
        magic: &BigUint,
        n: &BigUint,
    ) -> Result<PlaintextWord, HeError> {
        if magic.bits() > self.magic_bits as u64 {
            return Err(HeError::MagicOverflow(self.magic_bits));
        }
        // Word sums must stay below n: count * 2^(magic_bits + window) <= 2^(key_bits - 1).
        let key_bits = n.bits();
        let word_bits = (self.magic_bits + VALUE_WINDOW_BITS) as u64;
        if 64 - self.max_count.leading_zeros() as u64 + word_bits > key_bits - 1 {
            return Err(HeError::LayoutHeadroom {
                count: self.max_count,
                key_bits: key_bits as u32,
            });
        }
        let scaled = (x * self.scale()).round();
        let offset = (self.offset_bits as f64).exp2();
        let window = scaled + offset;
        if !window.is_finite() || window < 0.0 || window >= (VALUE_WINDOW_BITS as f64).exp2() {
            return Err(HeError::LayoutValueOverflow(x));
        }
        let raw = (BigUint::from(window as u64) << self.magic_bits) | magic.clone();
        Ok(PlaintextWord::new(raw))
    }

    /// Decode a homomorphic sum of `count` layout words. Exact in the low
    /// region and within `count * 2^-F` in the value sum, provided no
    /// cross-region carry occurred.
    pub fn decode_layout(&self, w: &PlaintextWord, count: u64) -> LayoutSum {
        let low_mask = (BigUint::from(1u8) << self.magic_bits) - 1u8;
        let low_region = &w.raw & low_mask;
        let window = BigInt::from(&w.raw >> self.magic_bits);
        let offsets = BigInt::from(count) << self.offset_bits;
        let value = window - offsets;
        let value_f = if value.is_negative() {
            -(-&value).to_f64().unwrap_or(f64::INFINITY)
        } else {
            value.to_f64().unwrap_or(f64::INFINITY)
        };
        LayoutSum { value_sum: value_f / self.scale(), low_region }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::he::paillier::{encrypt, keygen, mul_plain};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn modulus() -> BigUint {
        // Codec arithmetic only needs a modulus of the right width, not a
        // valid key; a prime-free stand-in keeps these tests instant.
        (BigUint::from(1u8) << 1088) - 9u8
    }

    #[test]
    fn signed_round_trip_dyadic_values() {
        let p = CodecParams::signed_default();
        let n = modulus();
        for &x in &[-1.5, 0.0, 2.25, -0.0078125, 1000.5] {
            let w = p.encode_signed(x, &n).unwrap();
            assert_eq!(p.decode_signed(&w, 1, &n), x);
        }
    }

    #[test]
    fn signed_round_trip_error_bound() {
        let n = modulus();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        // F = 24 admits the full |x| < 2^38 range; F = 40 is bounded by the
        // 63-bit window instead.
        for (frac_bits, max_mag) in [(24u32, 38i32), (40, 22)] {
            let p = CodecParams { frac_bits, ..CodecParams::signed_default() };
            let tol = (-(frac_bits as f64)).exp2();
            for _ in 0..500 {
                let mag = rng.gen_range(-12.0..max_mag as f64);
                let x = rng.gen_range(-1.0f64..1.0) * mag.exp2();
                let w = p.encode_signed(x, &n).unwrap();
                assert!((p.decode_signed(&w, 1, &n) - x).abs() <= tol, "x={x}");
            }
        }
    }

    #[test]
    fn signed_overflow_rejected() {
        let p = CodecParams::signed_default();
        let n = modulus();
        assert!(matches!(p.encode_signed(1e30, &n), Err(HeError::SignedOverflow(_))));
        assert!(matches!(p.encode_signed(f64::NAN, &n), Err(HeError::SignedOverflow(_))));
    }

    #[test]
    fn signed_product_decodes_at_double_scale() {
        let kp = keygen(1088, 11).unwrap();
        let p = CodecParams::signed_default();
        let n = &kp.public.n;
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for i in 0..100u64 {
            let x = rng.gen_range(-50.0f64..50.0);
            let y = rng.gen_range(-50.0f64..50.0);
            let c = encrypt(&kp.public, &p.encode_signed(x, n).unwrap(), i).unwrap();
            let prod = mul_plain(&kp.public, &c, &p.encode_signed(y, n).unwrap()).unwrap();
            let got = p.decode_signed(&kp.decrypt(&prod).unwrap(), 2, n);
            let tol = (-(p.frac_bits as f64)).exp2() * (x.abs() + y.abs() + 1.0);
            assert!((got - x * y).abs() <= tol, "x={x} y={y} got={got}");
        }
    }

    #[test]
    fn layout_single_word_round_trip() {
        let p = CodecParams::layout_default();
        let n = modulus();
        let w = p.encode_layout(0.5, &BigUint::zero(), &n).unwrap();
        let sum = p.decode_layout(&w, 1);
        assert_eq!(sum.value_sum, 0.5);
        assert_eq!(sum.low_region, BigUint::zero());
    }

    #[test]
    fn layout_sum_carries_magic_region() {
        let p = CodecParams::layout_default();
        let n = modulus();
        let a = p.encode_layout(0.25, &BigUint::from(0x30001u32), &n).unwrap();
        let b = p.encode_layout(-0.25, &BigUint::from(0x20010u32), &n).unwrap();
        let sum = PlaintextWord::new(a.raw + b.raw);
        let decoded = p.decode_layout(&sum, 2);
        assert_eq!(decoded.value_sum, 0.0);
        assert_eq!(decoded.low_region, BigUint::from(0x50011u32));
    }

    #[test]
    fn layout_random_sum_matches_plaintext_oracle() {
        let p = CodecParams::layout_default();
        let n = modulus();
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let mut word_sum = BigUint::zero();
        let mut value_sum = 0.0f64;
        let mut magic_sum = BigUint::zero();
        let count = 50u64;
        for _ in 0..count {
            let x = rng.gen_range(-1.0f64..1.0);
            let magic = BigUint::from(rng.gen::<u128>());
            let w = p.encode_layout(x, &magic, &n).unwrap();
            word_sum += w.raw;
            value_sum += x;
            magic_sum += magic;
        }
        let decoded = p.decode_layout(&PlaintextWord::new(word_sum), count);
        assert!((decoded.value_sum - value_sum).abs() <= count as f64 * (-24f64).exp2());
        assert_eq!(decoded.low_region, magic_sum);
    }

    #[test]
    fn layout_rejects_oversized_magic_and_values() {
        let p = CodecParams::layout_default();
        let n = modulus();
        let too_big = BigUint::from(1u8) << 960;
        assert!(matches!(
            p.encode_layout(0.0, &too_big, &n),
            Err(HeError::MagicOverflow(960))
        ));
        assert!(matches!(
            p.encode_layout(1e30, &BigUint::zero(), &n),
            Err(HeError::LayoutValueOverflow(_))
        ));
        // A value that would drive the window negative is rejected too.
        assert!(matches!(
            p.encode_layout(-1e10, &BigUint::zero(), &n),
            Err(HeError::LayoutValueOverflow(_))
        ));
    }

    #[test]
    fn layout_headroom_enforced_via_max_count() {
        let p = CodecParams { max_count: u64::MAX, ..CodecParams::layout_default() };
        let n = modulus();
        assert!(matches!(
            p.encode_layout(0.0, &BigUint::zero(), &n),
            Err(HeError::LayoutHeadroom { .. })
        ));
    }
}
