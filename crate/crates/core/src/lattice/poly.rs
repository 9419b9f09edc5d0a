//! Ring elements of `R_q = Z_q[x]/(x^n + 1)`, vectors and matrices over them,
//! and the unstructured `n × n` matrices used by the plain-LWE variant.

use crate::error::{Error, Result};
use crate::lattice::arith::{compress_unchecked, decompress_unchecked, Modulus};
use crate::lattice::encode::{pack_bits_into, unpack_bits};
use crate::lattice::ntt::NttTables;
use crate::lattice::params::{ceil_log2, ParamSet, Variant};
use crate::lattice::sample::{domain, sample_uniform, Xof};

/// A polynomial with `n` coefficients in `[0, q)`.
///
/// In the LWE variant the same container holds a plain column vector of
/// `Z_q^n`; only [`RingElement::mul`] gives it ring semantics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RingElement {
    q: Modulus,
    coeffs: Vec<u16>,
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

impl RingElement {
    pub fn zero(n: usize, q: Modulus) -> Self {
        RingElement {
            q,
            coeffs: vec![0; n],
        }
    }

    /// Builds an element from reduced coefficients.
    pub fn from_coeffs(coeffs: Vec<u16>, q: Modulus) -> Result<Self> {
        if let Some((i, c)) = coeffs.iter().enumerate().find(|(_, &c)| c as u32 >= q.value()) {
            return Err(Error::Domain(format!("coefficient {i} = {c} not reduced mod {}", q.value())));
        }
        Ok(RingElement { q, coeffs })
    }

    /// Reduces arbitrary signed coefficients.
    pub fn from_signed(coeffs: &[i64], q: Modulus) -> Self {
        RingElement {
            q,
            coeffs: coeffs.iter().map(|&c| q.reduce_signed(c) as u16).collect(),
        }
    }

    pub(crate) fn from_raw(coeffs: Vec<u16>, q: Modulus) -> Self {
        debug_assert!(coeffs.iter().all(|&c| (c as u32) < q.value()));
        RingElement { q, coeffs }
    }

    /// The monomial `x^power`, for `power < n`.
    pub fn monomial(n: usize, power: usize, q: Modulus) -> Self {
        let mut e = Self::zero(n, q);
        e.coeffs[power] = 1;
        e
    }

    pub fn coeffs(&self) -> &[u16] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn modulus(&self) -> Modulus {
        self.q
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.q != other.q {
            return Err(Error::Domain(format!(
                "moduli differ: {} vs {}",
                self.q.value(),
                other.q.value()
            )));
        }
        check_len(self.len(), other.len())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |q, a, b| q.add(a, b)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |q, a, b| q.sub(a, b)))
    }

    pub fn neg(&self) -> Self {
        let q = self.q;
        RingElement {
            q,
            coeffs: self.coeffs.iter().map(|&c| q.sub(0, c as u32) as u16).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Modulus, u32, u32) -> u32) -> Self {
        let q = self.q;
        RingElement {
            q,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(&q, a as u32, b as u32) as u16)
                .collect(),
        }
    }

    /// Negacyclic product; uses the NTT when the ring supports it.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        match NttTables::get(self.q.value(), self.len()) {
            Some(t) => {
                let a = self.to_ntt(t);
                let b = other.to_ntt(t);
                let mut acc = vec![0u32; self.len()];
                t.mul_acc(&mut acc, &a, &b);
                Ok(Self::from_ntt(acc, t, self.q))
            }
            None => self.schoolbook_mul(other),
        }
    }

    /// Quadratic-time negacyclic product: `x^n ≡ -1`.
    pub fn schoolbook_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.len();
        let mut pos = vec![0u64; n];
        let mut neg = vec![0u64; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                let p = a as u64 * b as u64;
                if i + j < n {
                    pos[i + j] += p;
                } else {
                    neg[i + j - n] += p;
                }
            }
        }
        let q = self.q;
        let qv = q.value() as u64;
        let coeffs = pos
            .iter()
            .zip(&neg)
            .map(|(&p, &m)| ((p % qv + qv - m % qv) % qv) as u16)
            .collect();
        Ok(RingElement { q, coeffs })
    }

    fn to_ntt(&self, t: &NttTables) -> Vec<u32> {
        let mut a: Vec<u32> = self.coeffs.iter().map(|&c| c as u32).collect();
        t.forward(&mut a);
        a
    }

    fn from_ntt(mut a: Vec<u32>, t: &NttTables, q: Modulus) -> Self {
        t.inverse(&mut a);
        RingElement {
            q,
            coeffs: a.into_iter().map(|c| c as u16).collect(),
        }
    }

    /// `Σ a_i b_i mod q`, treating both operands as plain vectors.
    pub fn plain_dot(&self, other: &Self) -> Result<u32> {
        self.check_compatible(other)?;
        Ok(self.plain_dot_unchecked(other))
    }

    fn plain_dot_unchecked(&self, other: &Self) -> u32 {
        let acc: u64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a as u64 * b as u64)
            .sum();
        self.q.reduce_u64(acc)
    }

    /// `max_i |c_i mod± q|`.
    pub fn inf_norm(&self) -> u32 {
        self.coeffs
            .iter()
            .map(|&c| self.q.centered(c as u32).unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn to_bytes(&self, bits: u32) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        pack_bits_into(&self.coeffs, bits, &mut out)?;
        Ok(out)
    }

    /// Decodes `n` coefficients of `bits` bits, rejecting any `≥ q`.
    pub fn from_bytes(bytes: &[u8], bits: u32, n: usize, q: Modulus) -> Result<Self> {
        let coeffs = unpack_bits(bytes, bits, n, q.value())?;
        Ok(RingElement { q, coeffs })
    }
}

/// An ordered list of ring elements sharing one modulus and length.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModuleVector {
    elems: Vec<RingElement>,
}

impl ModuleVector {
    pub fn new(elems: Vec<RingElement>) -> Result<Self> {
        if let Some(first) = elems.first() {
            for e in &elems[1..] {
                first.check_compatible(e)?;
            }
        }
        Ok(ModuleVector { elems })
    }

    pub fn zero(k: usize, n: usize, q: Modulus) -> Self {
        ModuleVector {
            elems: vec![RingElement::zero(n, q); k],
        }
    }

    pub(crate) fn from_flat(flat: Vec<u16>, k: usize, q: Modulus) -> Self {
        let n = flat.len() / k;
        ModuleVector {
            elems: flat
                .chunks_exact(n)
                .map(|c| RingElement::from_raw(c.to_vec(), q))
                .collect(),
        }
    }

    pub fn elems(&self) -> &[RingElement] {
        &self.elems
    }

    pub fn elems_mut(&mut self) -> &mut [RingElement] {
        &mut self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&RingElement, &RingElement) -> Result<RingElement>) -> Result<Self> {
        check_len(self.len(), other.len())?;
        let elems = self
            .elems
            .iter()
            .zip(&other.elems)
            .map(|(a, b)| f(a, b))
            .collect::<Result<_>>()?;
        Ok(ModuleVector { elems })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, RingElement::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, RingElement::sub)
    }

    /// `⟨a, b⟩ = Σ a_i · b_i` in `R_q`.
    pub fn inner(&self, other: &Self) -> Result<RingElement> {
        check_len(self.len(), other.len())?;
        let first = self
            .elems
            .first()
            .ok_or_else(|| Error::Domain("empty vector".into()))?;
        for (a, b) in self.elems.iter().zip(&other.elems) {
            first.check_compatible(a)?;
            first.check_compatible(b)?;
        }
        let q = first.q;
        let n = first.len();
        match NttTables::get(q.value(), n) {
            Some(t) => {
                let mut acc = vec![0u32; n];
                for (a, b) in self.elems.iter().zip(&other.elems) {
                    t.mul_acc(&mut acc, &a.to_ntt(t), &b.to_ntt(t));
                }
                Ok(RingElement::from_ntt(acc, t, q))
            }
            None => {
                let mut acc = RingElement::zero(n, q);
                for (a, b) in self.elems.iter().zip(&other.elems) {
                    acc = acc.add(&a.schoolbook_mul(b)?)?;
                }
                Ok(acc)
            }
        }
    }

    pub fn inf_norm(&self) -> u32 {
        self.elems.iter().map(RingElement::inf_norm).max().unwrap_or(0)
    }

    pub fn to_bytes(&self, bits: u32) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        for e in &self.elems {
            pack_bits_into(&e.coeffs, bits, &mut out)?;
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], bits: u32, k: usize, n: usize, q: Modulus) -> Result<Self> {
        let per = (n * bits as usize).div_ceil(8);
        if !(n * bits as usize).is_multiple_of(8) && k > 1 {
            return Err(Error::Format("element encodings must be byte aligned".into()));
        }
        check_len(k * per, bytes.len()).map_err(|_| {
            Error::Format(format!("expected {} bytes, got {}", k * per, bytes.len()))
        })?;
        let elems = bytes
            .chunks_exact(per)
            .map(|c| RingElement::from_bytes(c, bits, n, q))
            .collect::<Result<_>>()?;
        Ok(ModuleVector { elems })
    }
}

/// A module vector readied for repeated products: held in the NTT domain
/// when the ring has one, unchanged otherwise.
#[derive(Clone)]
pub(crate) enum Prepared {
    Ntt {
        table: &'static NttTables,
        q: Modulus,
        elems: Vec<Vec<u32>>,
    },
    Plain(ModuleVector),
}

impl ModuleVector {
    pub(crate) fn prepare(&self) -> Prepared {
        let table = self
            .elems
            .first()
            .and_then(|e| NttTables::get(e.q.value(), e.len()));
        match table {
            Some(table) => Prepared::Ntt {
                table,
                q: self.elems[0].q,
                elems: self.elems.iter().map(|e| e.to_ntt(table)).collect(),
            },
            None => Prepared::Plain(self.clone()),
        }
    }
}

fn same_ring(a: &Prepared, b: &Prepared) -> Result<()> {
    match (a, b) {
        (Prepared::Ntt { table: ta, elems: ea, .. }, Prepared::Ntt { table: tb, elems: eb, .. }) => {
            if !std::ptr::eq(*ta, *tb) {
                return Err(Error::Domain("operands live in different rings".into()));
            }
            check_len(ea.len(), eb.len())
        }
        (Prepared::Plain(_), Prepared::Plain(_)) => Ok(()),
        _ => Err(Error::Domain("operands live in different rings".into())),
    }
}

/// [`pairing`] on prepared operands.
pub(crate) fn pairing_prepared(variant: Variant, left: &Prepared, right: &Prepared) -> Result<RingElement> {
    same_ring(left, right)?;
    match (left, right) {
        (Prepared::Ntt { table, q, elems: l }, Prepared::Ntt { elems: r, .. }) => {
            let mut acc = vec![0u32; table.n()];
            for (a, b) in l.iter().zip(r) {
                table.mul_acc(&mut acc, a, b);
            }
            Ok(RingElement::from_ntt(acc, table, *q))
        }
        (Prepared::Plain(l), Prepared::Plain(r)) => pairing(variant, l, r),
        _ => unreachable!("checked by same_ring"),
    }
}

/// A `k × k` matrix over `R_q`, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleMatrix {
    k: usize,
    entries: Vec<RingElement>,
    /// Entries in the NTT domain, when the ring has one.
    ntt: Option<Vec<Vec<u32>>>,
}

impl ModuleMatrix {
    pub fn new(k: usize, entries: Vec<RingElement>) -> Result<Self> {
        check_len(k * k, entries.len())?;
        ModuleVector::new(entries.clone())?;
        Ok(Self::build(k, entries))
    }

    fn build(k: usize, entries: Vec<RingElement>) -> Self {
        let ntt = entries
            .first()
            .and_then(|e| NttTables::get(e.q.value(), e.len()))
            .map(|t| entries.iter().map(|e| e.to_ntt(t)).collect());
        ModuleMatrix { k, entries, ntt }
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    pub fn get(&self, row: usize, col: usize) -> &RingElement {
        &self.entries[row * self.k + col]
    }

    /// `A · v` when `transpose` is false, `Aᵀ · v` otherwise.
    fn apply(&self, v: &ModuleVector, transpose: bool) -> Result<ModuleVector> {
        check_len(self.k, v.len())?;
        let first = &self.entries[0];
        for e in v.elems() {
            first.check_compatible(e)?;
        }
        if self.ntt.is_some() {
            return self.apply_prepared(&v.prepare(), transpose);
        }
        let q = first.q;
        let n = first.len();
        let entry = |i: usize, j: usize| {
            if transpose {
                self.get(j, i)
            } else {
                self.get(i, j)
            }
        };
        let elems = match NttTables::get(q.value(), n) {
            Some(_) => unreachable!("matrices over NTT rings carry transformed entries"),
            None => (0..self.k)
                .map(|i| {
                    let mut acc = RingElement::zero(n, q);
                    for (j, vj) in v.elems.iter().enumerate() {
                        acc = acc.add(&entry(i, j).schoolbook_mul(vj)?)?;
                    }
                    Ok(acc)
                })
                .collect::<Result<_>>()?,
        };
        Ok(ModuleVector { elems })
    }

    fn apply_prepared(&self, v: &Prepared, transpose: bool) -> Result<ModuleVector> {
        let (Some(a), Prepared::Ntt { table, q, elems: vh }) = (&self.ntt, v) else {
            return match v {
                Prepared::Plain(v) => self.apply(v, transpose),
                Prepared::Ntt { .. } => Err(Error::Domain("operands live in different rings".into())),
            };
        };
        let first = &self.entries[0];
        if *q != first.q || table.n() != first.len() {
            return Err(Error::Domain("operands live in different rings".into()));
        }
        check_len(self.k, vh.len())?;
        let k = self.k;
        let elems = (0..k)
            .map(|i| {
                let mut acc = vec![0u32; table.n()];
                for (j, vj) in vh.iter().enumerate() {
                    let idx = if transpose { j * k + i } else { i * k + j };
                    table.mul_acc(&mut acc, &a[idx], vj);
                }
                RingElement::from_ntt(acc, table, *q)
            })
            .collect();
        Ok(ModuleVector { elems })
    }
}

/// An unstructured `n × n` matrix over `Z_q`, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlainMatrix {
    n: usize,
    q: Modulus,
    data: Vec<u16>,
}

impl PlainMatrix {
    pub fn new(n: usize, q: Modulus, data: Vec<u16>) -> Result<Self> {
        check_len(n * n, data.len())?;
        if data.iter().any(|&c| c as u32 >= q.value()) {
            return Err(Error::Domain("matrix entry not reduced".into()));
        }
        Ok(PlainMatrix { n, q, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.data[row * self.n + col]
    }

    fn check_columns(&self, cols: &ModuleVector) -> Result<()> {
        for c in cols.elems() {
            check_len(self.n, c.len())?;
            if c.q != self.q {
                return Err(Error::Domain("moduli differ".into()));
            }
        }
        Ok(())
    }

    /// `A · S` column by column.
    fn mul_columns(&self, cols: &ModuleVector) -> Result<ModuleVector> {
        self.check_columns(cols)?;
        let w = cols.len();
        let n = self.n;
        // Interleave so that row `c` of S is contiguous.
        let mut s = vec![0u64; n * w];
        for (j, col) in cols.elems().iter().enumerate() {
            for (c, &v) in col.coeffs.iter().enumerate() {
                s[c * w + j] = v as u64;
            }
        }
        let mut out = vec![vec![0u16; n]; w];
        let mut acc = vec![0u64; w];
        for r in 0..n {
            acc.iter_mut().for_each(|a| *a = 0);
            let row = &self.data[r * n..(r + 1) * n];
            for (c, &a) in row.iter().enumerate() {
                let a = a as u64;
                for (acc_j, &s_cj) in acc.iter_mut().zip(&s[c * w..(c + 1) * w]) {
                    *acc_j += a * s_cj;
                }
            }
            for j in 0..w {
                out[j][r] = self.q.reduce_u64(acc[j]) as u16;
            }
        }
        Ok(ModuleVector {
            elems: out.into_iter().map(|c| RingElement::from_raw(c, self.q)).collect(),
        })
    }

    /// `Aᵀ · S` column by column.
    fn mul_transpose_columns(&self, cols: &ModuleVector) -> Result<ModuleVector> {
        self.check_columns(cols)?;
        let w = cols.len();
        let n = self.n;
        let mut acc = vec![0u64; n * w];
        for r in 0..n {
            let row = &self.data[r * n..(r + 1) * n];
            for (j, col) in cols.elems().iter().enumerate() {
                let s = col.coeffs[r] as u64;
                if s == 0 {
                    continue;
                }
                for (c, &a) in row.iter().enumerate() {
                    acc[j * n + c] += a as u64 * s;
                }
            }
        }
        let flat = acc.into_iter().map(|x| self.q.reduce_u64(x) as u16).collect();
        Ok(ModuleVector::from_flat(flat, w, self.q))
    }
}

/// The public matrix of one parameter set, in whichever shape its variant uses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PublicMatrix {
    Module(ModuleMatrix),
    Plain(PlainMatrix),
}

/// Expands a 32-byte seed into the public matrix.
///
/// Ring variants sample entry `(i, j)` from `xof(ρ, MATRIX ∥ j ∥ i)`; the LWE
/// variant samples row `r` from `xof(ρ, MATRIX ∥ r as u16 LE)`.
pub fn expand_matrix(rho: &[u8; 32], params: &ParamSet) -> Result<PublicMatrix> {
    params.validate()?;
    let q = Modulus::new(params.q)?;
    match params.variant {
        Variant::Mlwe | Variant::Rlwe => {
            let k = params.k;
            let mut entries = Vec::with_capacity(k * k);
            for i in 0..k {
                for j in 0..k {
                    let mut x = Xof::with_index(rho, domain::MATRIX, &[j as u8, i as u8]);
                    let coeffs = sample_uniform(&mut x, params.q, params.n)?;
                    entries.push(RingElement::from_raw(coeffs, q));
                }
            }
            Ok(PublicMatrix::Module(ModuleMatrix::build(k, entries)))
        }
        Variant::Lwe => {
            let n = params.n;
            let mut data = Vec::with_capacity(n * n);
            for r in 0..n {
                let mut x = Xof::with_index(rho, domain::MATRIX, &(r as u16).to_le_bytes());
                data.extend(sample_uniform(&mut x, params.q, n)?);
            }
            Ok(PublicMatrix::Plain(PlainMatrix { n, q, data }))
        }
    }
}

impl PublicMatrix {
    /// `A · v`.
    pub fn mul_vec(&self, v: &ModuleVector) -> Result<ModuleVector> {
        match self {
            PublicMatrix::Module(m) => m.apply(v, false),
            PublicMatrix::Plain(m) => m.mul_columns(v),
        }
    }

    /// `Aᵀ · v`.
    pub fn mul_transpose_vec(&self, v: &ModuleVector) -> Result<ModuleVector> {
        match self {
            PublicMatrix::Module(m) => m.apply(v, true),
            PublicMatrix::Plain(m) => m.mul_transpose_columns(v),
        }
    }

    pub(crate) fn mul_prepared(&self, v: &Prepared, transpose: bool) -> Result<ModuleVector> {
        match (self, v) {
            (PublicMatrix::Module(m), v) => m.apply_prepared(v, transpose),
            (PublicMatrix::Plain(m), Prepared::Plain(v)) if transpose => m.mul_transpose_columns(v),
            (PublicMatrix::Plain(m), Prepared::Plain(v)) => m.mul_columns(v),
            (PublicMatrix::Plain(_), Prepared::Ntt { .. }) => {
                Err(Error::Domain("operands live in different rings".into()))
            }
        }
    }
}

/// The bilinear term that carries the message.
///
/// Ring variants: `Σ left_i · right_i`, one ring element. LWE: the `k × k`
/// block `[left_i · right_j]` flattened row-major.
pub fn pairing(variant: Variant, left: &ModuleVector, right: &ModuleVector) -> Result<RingElement> {
    match variant {
        Variant::Mlwe | Variant::Rlwe => left.inner(right),
        Variant::Lwe => {
            let first = left
                .elems
                .first()
                .ok_or_else(|| Error::Domain("empty vector".into()))?;
            for e in left.elems.iter().chain(&right.elems) {
                first.check_compatible(e)?;
            }
            let mut out = Vec::with_capacity(left.len() * right.len());
            for l in &left.elems {
                for r in &right.elems {
                    out.push(l.plain_dot_unchecked(r) as u16);
                }
            }
            Ok(RingElement::from_raw(out, first.q))
        }
    }
}

/// Coefficients quantised to `bits` bits, or raw residues when `bits` is the
/// full width `⌈log₂ q⌉`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompressedPoly {
    bits: u32,
    coeffs: Vec<u16>,
}

fn is_lossy(bits: u32, q: Modulus) -> bool {
    bits < ceil_log2(q.value())
}

impl CompressedPoly {
    pub fn compress(e: &RingElement, bits: u32) -> Self {
        let q = e.q.value();
        let coeffs = if is_lossy(bits, e.q) {
            e.coeffs
                .iter()
                .map(|&c| compress_unchecked(c as u32, bits, q) as u16)
                .collect()
        } else {
            e.coeffs.clone()
        };
        CompressedPoly { bits, coeffs }
    }

    pub fn decompress(&self, q: Modulus) -> RingElement {
        let coeffs = if is_lossy(self.bits, q) {
            self.coeffs
                .iter()
                .map(|&c| decompress_unchecked(c as u32, self.bits, q.value()) as u16)
                .collect()
        } else {
            self.coeffs.clone()
        };
        RingElement::from_raw(coeffs, q)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn coeffs(&self) -> &[u16] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [u16] {
        &mut self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn write_bytes(&self, out: &mut Vec<u8>) -> Result<()> {
        pack_bits_into(&self.coeffs, self.bits, out)
    }

    /// Values must be `< 2^bits`, and `< q` when stored at full width.
    pub fn from_bytes(bytes: &[u8], bits: u32, count: usize, q: Modulus) -> Result<Self> {
        let bound = if is_lossy(bits, q) { 1 << bits } else { q.value() };
        Ok(CompressedPoly {
            bits,
            coeffs: unpack_bits(bytes, bits, count, bound)?,
        })
    }

    /// Builds a value directly, e.g. for tamper tests.
    pub fn from_values(bits: u32, coeffs: Vec<u16>, q: Modulus) -> Result<Self> {
        let bound = if is_lossy(bits, q) { 1u32 << bits } else { q.value() };
        if coeffs.iter().any(|&c| c as u32 >= bound) {
            return Err(Error::Format(format!("value exceeds {bound}")));
        }
        Ok(CompressedPoly { bits, coeffs })
    }
}

/// A vector of [`CompressedPoly`] with a common width.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompressedVector {
    polys: Vec<CompressedPoly>,
}

impl CompressedVector {
    pub fn compress(v: &ModuleVector, bits: u32) -> Self {
        CompressedVector {
            polys: v.elems.iter().map(|e| CompressedPoly::compress(e, bits)).collect(),
        }
    }

    pub fn decompress(&self, q: Modulus) -> ModuleVector {
        ModuleVector {
            elems: self.polys.iter().map(|p| p.decompress(q)).collect(),
        }
    }

    pub fn polys(&self) -> &[CompressedPoly] {
        &self.polys
    }

    pub fn polys_mut(&mut self) -> &mut [CompressedPoly] {
        &mut self.polys
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn write_bytes(&self, out: &mut Vec<u8>) -> Result<()> {
        for p in &self.polys {
            p.write_bytes(out)?;
        }
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8], bits: u32, k: usize, n: usize, q: Modulus) -> Result<Self> {
        let total = (k * n * bits as usize).div_ceil(8);
        if bytes.len() != total {
            return Err(Error::Format(format!("expected {total} bytes, got {}", bytes.len())));
        }
        if !(n * bits as usize).is_multiple_of(8) {
            return Err(Error::Format("element encodings must be byte aligned".into()));
        }
        let per = n * bits as usize / 8;
        let polys = bytes
            .chunks_exact(per)
            .map(|c| CompressedPoly::from_bytes(c, bits, n, q))
            .collect::<Result<_>>()?;
        Ok(CompressedVector { polys })
    }
}

impl ModuleVector {
    /// Samples `k` elements of `n` CBD coefficients from one stream.
    pub(crate) fn sample_cbd(xof: &mut Xof, eta: u32, k: usize, n: usize, q: Modulus) -> Result<Self> {
        let flat = crate::lattice::sample::cbd_from_xof(xof, eta, k * n, q)?;
        Ok(Self::from_flat(flat, k, q))
    }
}
