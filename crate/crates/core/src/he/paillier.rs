//! Paillier cryptosystem with seeded, reproducible key generation.
//!
//! Supports the two homomorphic operations the protocols rely on:
//! ciphertext addition and ciphertext-by-plaintext multiplication.
//! Encryption nonces are short exponents applied to a precomputed n-th
//! power, which keeps a 2048-bit encryption near a millisecond without
//! changing the decryption relation.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{biguint_from_hex, biguint_to_hex, HeError, PlaintextWord};

/// Bits of the short encryption nonce exponent. Cryptographic strength is a
/// non-goal here; this only has to make equal plaintexts encrypt differently.
const NONCE_BITS: u64 = 128;

const MILLER_RABIN_ROUNDS: u32 = 32;

/// Smallest key size able to host the 1024-bit layout words plus carry room.
pub const MIN_KEY_BITS: u32 = 1088;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    /// Modulus n = p*q.
    pub n: BigUint,
    /// Generator, fixed to n + 1.
    pub g: BigUint,
    pub key_bits: u32,
    pub key_id: u64,
    nn: BigUint,
    half_n: BigUint,
    /// Successive squares of 2^n mod n^2; nonces are powers of this fixed
    /// base, so each encryption is NONCE_BITS conditional products.
    h_n_squares: Vec<BigUint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretKey {
    p: BigUint,
    q: BigUint,
    pp: BigUint,
    qq: BigUint,
    hp: BigUint,
    hq: BigUint,
    p_inv_q: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keypair {
    pub public: PublicKey,
    pub secret: SecretKey,
    pub key_bits: u32,
}

/// A Paillier ciphertext in `[0, n^2)` tagged with the key that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub value: BigUint,
    pub key_id: u64,
}

impl PublicKey {
    fn from_n(n: BigUint, key_bits: u32) -> Self {
        let nn = &n * &n;
        let g = &n + 1u8;
        let half_n = &n >> 1;
        let mut h_n_squares = Vec::with_capacity(NONCE_BITS as usize);
        let mut acc = BigUint::from(2u8).modpow(&n, &nn);
        for _ in 0..NONCE_BITS {
            let next = (&acc * &acc) % &nn;
            h_n_squares.push(acc);
            acc = next;
        }
        let key_id = key_id_of(&n);
        Self { n, g, key_bits, key_id, nn, half_n, h_n_squares }
    }

    pub fn modulus_squared(&self) -> &BigUint {
        &self.nn
    }
}

fn key_id_of(n: &BigUint) -> u64 {
    // FNV-1a over the little-endian bytes of n.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in n.to_bytes_le() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic key generation: identical seeds give identical keypairs.
pub fn keygen(key_bits: u32, seed: u64) -> Result<Keypair, HeError> {
    if key_bits < MIN_KEY_BITS {
        return Err(HeError::KeyTooSmall(key_bits));
    }
    if key_bits % 2 != 0 {
        return Err(HeError::KeyBitsOdd(key_bits));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let half = (key_bits / 2) as u64;
    let p = gen_prime(half, &mut rng);
    let q = loop {
        let q = gen_prime(half, &mut rng);
        if q != p {
            break q;
        }
    };
    Ok(Keypair::from_primes(p, q))
}

impl Keypair {
    /// Rebuild the full keypair, including the CRT decryption data, from
    /// the two primes.
    pub fn from_primes(p: BigUint, q: BigUint) -> Keypair {
        let n = &p * &q;
        let key_bits = n.bits() as u32;
        let public = PublicKey::from_n(n, key_bits);
        let pp = &p * &p;
        let qq = &q * &q;
        // hp = L_p(g^(p-1) mod p^2)^-1 mod p, and likewise for q.
        let hp = crt_half_inverse(&public.g, &p, &pp);
        let hq = crt_half_inverse(&public.g, &q, &qq);
        let p_inv_q = modinv(&p, &q).expect("p invertible mod q");
        let secret = SecretKey { p, q, pp, qq, hp, hq, p_inv_q };
        Keypair { public, secret, key_bits }
    }
}

impl Serialize for Keypair {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Keypair", 3)?;
        s.serialize_field("p", &biguint_to_hex(&self.secret.p))?;
        s.serialize_field("q", &biguint_to_hex(&self.secret.q))?;
        s.serialize_field("key_id", &self.public.key_id)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for Keypair {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            p: String,
            q: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        let p = biguint_from_hex(&raw.p)
            .ok_or_else(|| serde::de::Error::custom("invalid hex prime"))?;
        let q = biguint_from_hex(&raw.q)
            .ok_or_else(|| serde::de::Error::custom("invalid hex prime"))?;
        Ok(Keypair::from_primes(p, q))
    }
}

fn crt_half_inverse(g: &BigUint, prime: &BigUint, prime_sq: &BigUint) -> BigUint {
    let exp = prime - 1u8;
    let gp = g.modpow(&exp, prime_sq);
    let lp = (gp - 1u8) / prime;
    modinv(&(lp % prime), prime).expect("L(g^(p-1)) invertible mod p")
}

impl Keypair {
    pub fn decrypt(&self, c: &Ciphertext) -> Result<PlaintextWord, HeError> {
        if c.key_id != self.public.key_id {
            return Err(HeError::KeyMismatch);
        }
        let sk = &self.secret;
        let mp = {
            let d = c.value.modpow(&(&sk.p - 1u8), &sk.pp);
            let l = (d - 1u8) / &sk.p;
            (l * &sk.hp) % &sk.p
        };
        let mq = {
            let d = c.value.modpow(&(&sk.q - 1u8), &sk.qq);
            let l = (d - 1u8) / &sk.q;
            (l * &sk.hq) % &sk.q
        };
        // CRT recombination.
        let diff = if mq >= mp { (&mq - &mp) % &sk.q } else { &sk.q - ((&mp - &mq) % &sk.q) };
        let m = &mp + &sk.p * ((diff * &sk.p_inv_q) % &sk.q);
        Ok(PlaintextWord::new(m))
    }
}

/// Randomized encryption; distinct seeds give distinct ciphertexts of the
/// same plaintext.
pub fn encrypt(pk: &PublicKey, m: &PlaintextWord, seed: u64) -> Result<Ciphertext, HeError> {
    if m.raw >= pk.n {
        return Err(HeError::PlaintextOutOfRange);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let rho = loop {
        let r = rng.gen_biguint(NONCE_BITS);
        if !r.is_zero() {
            break r;
        }
    };
    let gm = (1u8 + &m.raw * &pk.n) % &pk.nn;
    let mut nonce = BigUint::one();
    for (i, square) in pk.h_n_squares.iter().enumerate() {
        if rho.bit(i as u64) {
            nonce = (nonce * square) % &pk.nn;
        }
    }
    Ok(Ciphertext { value: (gm * nonce) % &pk.nn, key_id: pk.key_id })
}

/// The multiplicative identity of ciphertext addition: a deterministic
/// encryption of 0 with unit nonce. Used as the fold seed of homomorphic
/// sums so that empty sums stay comparable across aggregation orders.
pub fn zero_cipher(pk: &PublicKey) -> Ciphertext {
    Ciphertext { value: BigUint::one(), key_id: pk.key_id }
}

/// Homomorphic addition: the result decrypts to `(a + b) mod n`.
pub fn add_cipher(pk: &PublicKey, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, HeError> {
    if a.key_id != b.key_id || a.key_id != pk.key_id {
        return Err(HeError::KeyMismatch);
    }
    Ok(Ciphertext { value: (&a.value * &b.value) % &pk.nn, key_id: a.key_id })
}

/// Ciphertext-by-plaintext multiplication: decrypts to `(v * a) mod n`.
///
/// Centered exponents keep the cost proportional to the magnitude of the
/// encoded value rather than to the key size: a residue above n/2 is
/// handled as the inverse ciphertext raised to `n - v`.
pub fn mul_plain(pk: &PublicKey, a: &Ciphertext, v: &PlaintextWord) -> Result<Ciphertext, HeError> {
    if a.key_id != pk.key_id {
        return Err(HeError::KeyMismatch);
    }
    if v.raw >= pk.n {
        return Err(HeError::PlaintextOutOfRange);
    }
    let value = if v.raw <= pk.half_n {
        a.value.modpow(&v.raw, &pk.nn)
    } else {
        let inv = modinv(&a.value, &pk.nn).expect("ciphertext coprime to n^2");
        inv.modpow(&(&pk.n - &v.raw), &pk.nn)
    };
    Ok(Ciphertext { value, key_id: a.key_id })
}

/// Homomorphic inner product of a plaintext vector with a cipher vector.
///
/// Centered residues split into a positive and a negated group; each group
/// is one interleaved multi-exponentiation (shared squarings across all
/// bases) and the negated group costs a single modular inversion.
pub fn dot_plain(
    pk: &PublicKey,
    plain: &[PlaintextWord],
    cipher: &[Ciphertext],
) -> Result<Ciphertext, HeError> {
    assert_eq!(plain.len(), cipher.len());
    assert!(!plain.is_empty());
    let mut positive: Vec<(&BigUint, u128)> = Vec::new();
    let mut negated: Vec<(&BigUint, u128)> = Vec::new();
    for (v, c) in plain.iter().zip(cipher) {
        if c.key_id != pk.key_id {
            return Err(HeError::KeyMismatch);
        }
        if v.raw >= pk.n {
            return Err(HeError::PlaintextOutOfRange);
        }
        let (bucket, magnitude) = if v.raw <= pk.half_n {
            (&mut positive, v.raw.clone())
        } else {
            (&mut negated, &pk.n - &v.raw)
        };
        match magnitude.to_u128() {
            Some(m) => bucket.push((&c.value, m)),
            None => {
                // Residues beyond 128 bits fall back to the generic path.
                return dot_plain_generic(pk, plain, cipher);
            }
        }
    }
    let pos = multi_exp(&positive, &pk.nn);
    let value = if negated.is_empty() {
        pos
    } else {
        let neg = multi_exp(&negated, &pk.nn);
        let inv = modinv(&neg, &pk.nn).expect("ciphertext coprime to n^2");
        (pos * inv) % &pk.nn
    };
    Ok(Ciphertext { value, key_id: pk.key_id })
}

fn dot_plain_generic(
    pk: &PublicKey,
    plain: &[PlaintextWord],
    cipher: &[Ciphertext],
) -> Result<Ciphertext, HeError> {
    let mut acc: Option<Ciphertext> = None;
    for (v, c) in plain.iter().zip(cipher) {
        let term = mul_plain(pk, c, v)?;
        acc = Some(match acc {
            Some(a) => add_cipher(pk, &a, &term)?,
            None => term,
        });
    }
    Ok(acc.expect("non-empty vectors"))
}

/// Interleaved square-and-multiply over all bases at once.
fn multi_exp(terms: &[(&BigUint, u128)], modulus: &BigUint) -> BigUint {
    let max_bits = terms.iter().map(|(_, e)| 128 - e.leading_zeros()).max().unwrap_or(0);
    let mut acc = BigUint::one();
    for bit in (0..max_bits).rev() {
        acc = (&acc * &acc) % modulus;
        for (base, exp) in terms {
            if exp >> bit & 1 == 1 {
                acc = (acc * *base) % modulus;
            }
        }
    }
    acc
}

pub fn modinv(a: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(modulus.clone());
    let e = a.extended_gcd(&m);
    if !e.gcd.is_one() {
        return None;
    }
    let mut x = e.x % &m;
    if x.is_negative() {
        x += &m;
    }
    Some(x.to_biguint().expect("normalized to non-negative"))
}

fn gen_prime(bits: u64, rng: &mut ChaCha20Rng) -> BigUint {
    loop {
        let mut c = rng.gen_biguint(bits);
        // Force the top two bits so the product reaches full width, and make it odd.
        c.set_bit(bits - 1, true);
        c.set_bit(bits - 2, true);
        c.set_bit(0, true);
        if survives_trial_division(&c) && miller_rabin(&c, rng) {
            return c;
        }
    }
}

const SMALL_PRIMES: [u32; 53] = [
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

fn survives_trial_division(c: &BigUint) -> bool {
    SMALL_PRIMES.iter().all(|&p| (c % p).to_u32_digits() != [0])
}

fn miller_rabin(c: &BigUint, rng: &mut ChaCha20Rng) -> bool {
    let one = BigUint::one();
    let c_minus_1 = c - &one;
    let s = c_minus_1.trailing_zeros().unwrap_or(0);
    let d = &c_minus_1 >> s;
    'witness: for _ in 0..MILLER_RABIN_ROUNDS {
        let a = rng.gen_biguint_range(&BigUint::from(2u8), &c_minus_1);
        let mut x = a.modpow(&d, c);
        if x.is_one() || x == c_minus_1 {
            continue 'witness;
        }
        for _ in 1..s {
            x = x.modpow(&BigUint::from(2u8), c);
            if x == c_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

impl Serialize for PublicKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("PublicKey", 4)?;
        s.serialize_field("n", &biguint_to_hex(&self.n))?;
        s.serialize_field("g", &biguint_to_hex(&self.g))?;
        s.serialize_field("key_bits", &self.key_bits)?;
        s.serialize_field("key_id", &self.key_id)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for PublicKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: String,
            key_bits: u32,
        }
        let raw = Raw::deserialize(deserializer)?;
        let n = biguint_from_hex(&raw.n)
            .ok_or_else(|| serde::de::Error::custom("invalid hex modulus"))?;
        Ok(PublicKey::from_n(n, raw.key_bits))
    }
}

impl Serialize for Ciphertext {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Ciphertext", 2)?;
        s.serialize_field("c", &biguint_to_hex(&self.value))?;
        s.serialize_field("key_id", &self.key_id)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for Ciphertext {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            c: String,
            key_id: u64,
        }
        let raw = Raw::deserialize(deserializer)?;
        let value = biguint_from_hex(&raw.c)
            .ok_or_else(|| serde::de::Error::custom("invalid hex ciphertext"))?;
        Ok(Ciphertext { value, key_id: raw.key_id })
    }
}
