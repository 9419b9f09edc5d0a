//! Negacyclic number-theoretic transform for the two ring moduli in use.
//!
//! `x^n + 1` is split into `m = n / base` factors `x^base - γ_i` with
//! `γ_i = ζ^(2·brv(i) + 1)` and `ζ` a primitive `2m`-th root of unity:
//!
//! * q = 3329, n = 256: `2n = 512 ∤ q - 1`, so the split stops at quadratic
//!   factors (`base = 2`).
//! * q = 12289, n ∈ {512, 1024}: `2n | q - 1`, full split (`base = 1`).
//!
//! Products computed here are bit-identical to schoolbook negacyclic
//! multiplication; the tests check exactly that.

use std::sync::OnceLock;

use crate::lattice::arith::{csub, Modulus};

pub(crate) struct NttTables {
    q: Modulus,
    n: usize,
    base: usize,
    zetas: Vec<Twiddle>,
    zetas_inv: Vec<Twiddle>,
    gammas: Vec<u32>,
    scale: Twiddle,
}

/// A fixed multiplier with its Shoup quotient `⌊w·2^32/q⌋`.
#[derive(Clone, Copy)]
struct Twiddle {
    w: u32,
    shoup: u32,
}

impl Twiddle {
    fn new(w: u32, q: u32) -> Self {
        Twiddle {
            w,
            shoup: (((w as u64) << 32) / q as u64) as u32,
        }
    }

    /// `a·w mod q` for any `a < 2^32`.
    #[inline(always)]
    fn mul(self, a: u32, q: u32) -> u32 {
        let est = ((a as u64 * self.shoup as u64) >> 32) as u32;
        csub(a.wrapping_mul(self.w).wrapping_sub(est.wrapping_mul(q)), q)
    }
}

fn bit_reverse(x: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - bits)
    }
}

fn prime_factors(mut x: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= x {
        if x.is_multiple_of(p) {
            out.push(p);
            while x.is_multiple_of(p) {
                x /= p;
            }
        }
        p += 1;
    }
    if x > 1 {
        out.push(x);
    }
    out
}

impl NttTables {
    fn build(q: u32, n: usize, base: usize) -> Self {
        let modq = Modulus::new_unchecked(q);
        let m = n / base;
        let order = 2 * m as u32;
        assert_eq!((q - 1) % order, 0, "no 2m-th root of unity mod {q}");
        let factors = prime_factors(q - 1);
        let generator = (2..q)
            .find(|&g| factors.iter().all(|&p| modq.pow(g, ((q - 1) / p) as u64) != 1))
            .expect("prime modulus has a generator");
        let zeta = modq.pow(generator, ((q - 1) / order) as u64);
        let layers = m.trailing_zeros();
        let zetas: Vec<u32> = (0..m)
            .map(|k| modq.pow(zeta, bit_reverse(k, layers) as u64))
            .collect();
        let zetas_inv = zetas.iter().map(|&z| Twiddle::new(modq.inv(z), q)).collect();
        let zetas = zetas.into_iter().map(|z| Twiddle::new(z, q)).collect();
        let gammas = (0..m)
            .map(|i| modq.pow(zeta, 2 * bit_reverse(i, layers) as u64 + 1))
            .collect();
        let scale = Twiddle::new(modq.inv(modq.pow(2, layers as u64)), q);
        NttTables {
            q: modq,
            n,
            base,
            zetas,
            zetas_inv,
            gammas,
            scale,
        }
    }

    /// Tables for `(q, n)`, if that ring has a fast path.
    pub(crate) fn get(q: u32, n: usize) -> Option<&'static NttTables> {
        static KYBER: OnceLock<NttTables> = OnceLock::new();
        static RING512: OnceLock<NttTables> = OnceLock::new();
        static RING1024: OnceLock<NttTables> = OnceLock::new();
        match (q, n) {
            (3329, 256) => Some(KYBER.get_or_init(|| NttTables::build(3329, 256, 2))),
            (12289, 512) => Some(RING512.get_or_init(|| NttTables::build(12289, 512, 1))),
            (12289, 1024) => Some(RING1024.get_or_init(|| NttTables::build(12289, 1024, 1))),
            _ => None,
        }
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn forward(&self, a: &mut [u32]) {
        debug_assert_eq!(a.len(), self.n);
        let q = &self.q;
        let qv = q.value();
        let mut k = 1;
        let mut len = self.n / 2;
        while len >= self.base {
            for start in (0..self.n).step_by(2 * len) {
                let z = self.zetas[k];
                k += 1;
                let (lo, hi) = a[start..start + 2 * len].split_at_mut(len);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let t = z.mul(*y, qv);
                    *y = q.sub(*x, t);
                    *x = q.add(*x, t);
                }
            }
            len /= 2;
        }
    }

    pub(crate) fn inverse(&self, a: &mut [u32]) {
        debug_assert_eq!(a.len(), self.n);
        let q = &self.q;
        let qv = q.value();
        let mut len = self.base;
        while len <= self.n / 2 {
            let first = self.n / (2 * len);
            for (b, start) in (0..self.n).step_by(2 * len).enumerate() {
                let zi = self.zetas_inv[first + b];
                let (lo, hi) = a[start..start + 2 * len].split_at_mut(len);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (u, v) = (*x, *y);
                    *x = q.add(u, v);
                    *y = zi.mul(q.sub(u, v), qv);
                }
            }
            len *= 2;
        }
        for c in a.iter_mut() {
            *c = self.scale.mul(*c, qv);
        }
    }

    /// `acc += a ∘ b` in the transform domain.
    pub(crate) fn mul_acc(&self, acc: &mut [u32], a: &[u32], b: &[u32]) {
        let q = &self.q;
        match self.base {
            1 => {
                for ((c, &x), &y) in acc.iter_mut().zip(a).zip(b) {
                    *c = q.add(*c, q.mul(x, y));
                }
            }
            2 => {
                for (i, &g) in self.gammas.iter().enumerate() {
                    let (a0, a1) = (a[2 * i], a[2 * i + 1]);
                    let (b0, b1) = (b[2 * i], b[2 * i + 1]);
                    let c0 = q.add(q.mul(a0, b0), q.mul(q.mul(a1, b1), g));
                    let c1 = q.add(q.mul(a0, b1), q.mul(a1, b0));
                    acc[2 * i] = q.add(acc[2 * i], c0);
                    acc[2 * i + 1] = q.add(acc[2 * i + 1], c1);
                }
            }
            _ => unreachable!("base case degree is 1 or 2"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_exist_only_for_supported_rings() {
        assert!(NttTables::get(3329, 256).is_some());
        assert!(NttTables::get(12289, 512).is_some());
        assert!(NttTables::get(12289, 1024).is_some());
        assert!(NttTables::get(1 << 15, 640).is_none());
    }

    #[test]
    fn roots_have_exact_order() {
        for (q, n) in [(3329u32, 256usize), (12289, 512), (12289, 1024)] {
            let t = NttTables::get(q, n).unwrap();
            let m = n / t.base;
            let zeta = t.zetas[bit_reverse(1, m.trailing_zeros())].w;
            let modq = Modulus::new_unchecked(q);
            assert_eq!(modq.pow(zeta, m as u64), q - 1, "zeta^m = -1");
        }
    }

    #[test]
    fn forward_inverse_identity() {
        for (q, n) in [(3329u32, 256usize), (12289, 512), (12289, 1024)] {
            let t = NttTables::get(q, n).unwrap();
            let orig: Vec<u32> = (0..n as u32).map(|i| (i * 7919 + 13) % q).collect();
            let mut a = orig.clone();
            t.forward(&mut a);
            assert_ne!(a, orig);
            t.inverse(&mut a);
            assert_eq!(a, orig);
        }
    }
}
