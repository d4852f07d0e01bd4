//! Arithmetic over small binary extension fields GF(2^m), 1 <= m <= 8.
//!
//! GF(4) is the field the code is built over and gets a table-driven fast
//! path: a 4x4 product table for scalars and a per-scalar 256-entry byte
//! table for packed [`SymbolBlock`]s. Every other field falls back to a
//! carry-less multiply reduced by the field polynomial, which is plenty at
//! the sizes the parameter census explores.
//!
//! Elements of GF(4) are encoded as `0, 1, 2, 3` for `0, 1, w, w+1`.

use std::fmt;

use crate::error::{Error, Result};

/// `w^2 + w + 1`.
pub const GF4_POLY: u16 = 0b111;

const GF4_MUL: [[u8; 4]; 4] = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];

const GF4_INV: [u8; 4] = [0, 1, 3, 2];

/// `GF4_BYTE_MUL[s][b]` multiplies each of the four 2-bit elements packed in
/// `b` by `s`.
static GF4_BYTE_MUL: [[u8; 256]; 4] = build_gf4_byte_tables();

const fn build_gf4_byte_tables() -> [[u8; 256]; 4] {
    let mut tables = [[0u8; 256]; 4];
    let mut s = 0;
    while s < 4 {
        let mut b = 0;
        while b < 256 {
            let mut out = 0u8;
            let mut k = 0;
            while k < 4 {
                let shift = 6 - 2 * k;
                let e = ((b >> shift) & 3) as usize;
                out |= GF4_MUL[s][e] << shift;
                k += 1;
            }
            tables[s][b] = out;
            b += 1;
        }
        s += 1;
    }
    tables
}

/// Description of a field GF(q), q = 2^m, by its order and reduction
/// polynomial (bit i is the coefficient of x^i).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldSpec {
    order: u16,
    poly: u16,
    bits: u8,
}

impl FieldSpec {
    pub const GF4: FieldSpec = FieldSpec {
        order: 4,
        poly: GF4_POLY,
        bits: 2,
    };

    pub fn new(order: u16, poly: u16) -> Result<Self> {
        if !(2..=256).contains(&order) || !order.is_power_of_two() {
            return Err(Error::InvalidField(format!(
                "order {order} is not a power of two in [2, 256]"
            )));
        }
        let bits = order.trailing_zeros() as u8;
        if poly >> bits != 1 {
            return Err(Error::InvalidField(format!(
                "polynomial {poly:#x} does not have degree {bits}"
            )));
        }
        if !is_irreducible(poly, bits) {
            return Err(Error::InvalidField(format!(
                "polynomial {poly:#x} is reducible over GF(2)"
            )));
        }
        Ok(FieldSpec { order, poly, bits })
    }

    /// The field of the given order with a conventional primitive polynomial.
    pub fn with_order(order: u16) -> Result<Self> {
        let poly = match order {
            2 => 0b11,
            4 => GF4_POLY,
            8 => 0b1011,
            16 => 0b1_0011,
            32 => 0b10_0101,
            64 => 0b100_0011,
            128 => 0b1000_1001,
            256 => 0b1_0001_1101,
            _ => {
                return Err(Error::InvalidField(format!(
                    "order {order} is not a power of two in [2, 256]"
                )))
            }
        };
        FieldSpec::new(order, poly)
    }

    pub fn order(self) -> u16 {
        self.order
    }

    pub fn poly(self) -> u16 {
        self.poly
    }

    /// Bits per element, m.
    pub fn bits(self) -> u8 {
        self.bits
    }

    pub fn is_gf4(self) -> bool {
        self == FieldSpec::GF4
    }

    pub fn contains(self, value: u8) -> bool {
        u16::from(value) < self.order
    }

    pub fn check(self, value: u8) -> Result<u8> {
        if self.contains(value) {
            Ok(value)
        } else {
            Err(Error::ElementOutOfRange {
                value: value.into(),
                order: self.order,
            })
        }
    }

    /// All elements in encoding order.
    pub fn elements(self) -> impl Iterator<Item = u8> + Clone {
        (0..self.order).map(|v| v as u8)
    }

    pub fn element(self, value: u8) -> Result<FieldElement> {
        Ok(FieldElement {
            field: self,
            value: self.check(value)?,
        })
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        a ^ b
    }

    /// Identical to [`FieldSpec::add`] in characteristic 2.
    #[inline]
    pub fn sub(self, a: u8, b: u8) -> u8 {
        a ^ b
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        a
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        if self.bits == 2 {
            GF4_MUL[(a & 3) as usize][(b & 3) as usize]
        } else {
            clmul_reduce(a, b, self.poly, self.bits)
        }
    }

    pub fn inv(self, a: u8) -> Result<u8> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        if self.bits == 2 {
            return Ok(GF4_INV[(a & 3) as usize]);
        }
        // a^(q-2) by square and multiply
        let mut result = 1u8;
        let mut base = a;
        let mut e = self.order - 2;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(result, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        Ok(result)
    }

    pub fn div(self, a: u8, b: u8) -> Result<u8> {
        Ok(self.mul(a, self.inv(b)?))
    }
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::GF4
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.order)
    }
}

fn clmul_reduce(a: u8, b: u8, poly: u16, bits: u8) -> u8 {
    let mut acc: u16 = 0;
    let (a, mut b) = (u16::from(a), u16::from(b));
    let mut shifted = a;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= shifted;
        }
        shifted <<= 1;
        b >>= 1;
    }
    for deg in (bits as u16..=2 * (bits as u16 - 1)).rev() {
        if acc & (1 << deg) != 0 {
            acc ^= poly << (deg - bits as u16);
        }
    }
    acc as u8
}

fn poly_mod(mut a: u32, b: u32) -> u32 {
    let db = 31 - b.leading_zeros();
    while a != 0 && 31 - a.leading_zeros() >= db {
        let da = 31 - a.leading_zeros();
        a ^= b << (da - db);
    }
    a
}

fn is_irreducible(poly: u16, bits: u8) -> bool {
    let p = u32::from(poly);
    // any factorization has a factor of degree <= bits / 2
    for deg in 1..=(bits / 2).max(1) {
        if deg == bits {
            break;
        }
        for divisor in (1u32 << deg)..(1u32 << (deg + 1)) {
            if poly_mod(p, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

/// A field element tagged with its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: FieldSpec,
    value: u8,
}

impl FieldElement {
    pub fn field(self) -> FieldSpec {
        self.field
    }

    pub fn value(self) -> u8 {
        self.value
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_gf4() {
            f.write_str(["0", "1", "w", "w+1"][self.value as usize])
        } else {
            write!(f, "{:#04x}", self.value)
        }
    }
}

fn same_field(a: FieldElement, b: FieldElement) -> Result<FieldSpec> {
    if a.field == b.field {
        Ok(a.field)
    } else {
        Err(Error::FieldMismatch {
            left: a.field.order,
            right: b.field.order,
        })
    }
}

pub fn gf_add(a: FieldElement, b: FieldElement) -> Result<FieldElement> {
    let field = same_field(a, b)?;
    Ok(FieldElement {
        field,
        value: field.add(a.value, b.value),
    })
}

pub fn gf_sub(a: FieldElement, b: FieldElement) -> Result<FieldElement> {
    let field = same_field(a, b)?;
    Ok(FieldElement {
        field,
        value: field.sub(a.value, b.value),
    })
}

pub fn gf_mul(a: FieldElement, b: FieldElement) -> Result<FieldElement> {
    let field = same_field(a, b)?;
    Ok(FieldElement {
        field,
        value: field.mul(a.value, b.value),
    })
}

pub fn gf_inv(a: FieldElement) -> Result<FieldElement> {
    Ok(FieldElement {
        field: a.field,
        value: a.field.inv(a.value)?,
    })
}

/// A multi-element symbol: a vector of GF(4) elements packed four per byte,
/// most significant 2-bit pair first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SymbolBlock {
    bytes: Vec<u8>,
}

impl SymbolBlock {
    pub fn new(bytes: Vec<u8>) -> Self {
        SymbolBlock { bytes }
    }

    pub fn zeroed(len: usize) -> Self {
        SymbolBlock {
            bytes: vec![0; len],
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    /// Number of packed field elements.
    pub fn element_count(&self) -> usize {
        self.bytes.len() * 4
    }

    /// Element `idx`, counting from the most significant pair of byte 0.
    pub fn element(&self, idx: usize) -> u8 {
        let shift = 6 - 2 * (idx % 4);
        (self.bytes[idx / 4] >> shift) & 3
    }

    pub fn from_elements(elements: &[u8]) -> Self {
        let mut bytes = vec![0u8; elements.len().div_ceil(4)];
        for (idx, &e) in elements.iter().enumerate() {
            bytes[idx / 4] |= (e & 3) << (6 - 2 * (idx % 4));
        }
        SymbolBlock { bytes }
    }

    /// `self += scalar * other`, element-wise over GF(4).
    pub fn mul_add_assign(&mut self, scalar: u8, other: &SymbolBlock) {
        debug_assert_eq!(self.bytes.len(), other.bytes.len());
        match scalar & 3 {
            0 => {}
            1 => {
                for (dst, src) in self.bytes.iter_mut().zip(&other.bytes) {
                    *dst ^= src;
                }
            }
            s => {
                let table = &GF4_BYTE_MUL[s as usize];
                for (dst, &src) in self.bytes.iter_mut().zip(&other.bytes) {
                    *dst ^= table[src as usize];
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &SymbolBlock) {
        self.mul_add_assign(1, other);
    }

    pub fn scaled(&self, scalar: u8) -> SymbolBlock {
        let table = &GF4_BYTE_MUL[(scalar & 3) as usize];
        SymbolBlock {
            bytes: self.bytes.iter().map(|&b| table[b as usize]).collect(),
        }
    }
}

/// Multiplies every packed element of `block` by `s`.
///
/// Blocks are GF(4)-only; a scalar from any other field is rejected.
pub fn scalar_block_mul(s: FieldElement, block: &SymbolBlock) -> Result<SymbolBlock> {
    if !s.field.is_gf4() {
        return Err(Error::FieldMismatch {
            left: s.field.order,
            right: 4,
        });
    }
    Ok(block.scaled(s.value))
}

/// A value the codec can form linear combinations of: either a bare field
/// element (one symbol per element) or a packed block.
pub trait Symbol: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;

    /// `self += coeff * other` in `field`.
    fn mul_add_assign(&mut self, field: FieldSpec, coeff: u8, other: &Self);
}

impl Symbol for u8 {
    fn zero_like(&self) -> Self {
        0
    }

    #[inline]
    fn mul_add_assign(&mut self, field: FieldSpec, coeff: u8, other: &Self) {
        *self ^= field.mul(coeff, *other);
    }
}

impl Symbol for SymbolBlock {
    fn zero_like(&self) -> Self {
        SymbolBlock::zeroed(self.bytes.len())
    }

    fn mul_add_assign(&mut self, field: FieldSpec, coeff: u8, other: &Self) {
        debug_assert!(field.is_gf4(), "symbol blocks are packed GF(4) elements");
        SymbolBlock::mul_add_assign(self, coeff, other);
    }
}

/// `sum(coeffs[i] * symbols[i])`. `symbols` must be non-empty.
pub fn combine<S: Symbol>(field: FieldSpec, coeffs: &[u8], symbols: &[&S]) -> S {
    debug_assert_eq!(coeffs.len(), symbols.len());
    let mut acc = symbols[0].zero_like();
    for (&c, s) in coeffs.iter().zip(symbols) {
        if c != 0 {
            acc.mul_add_assign(field, c, s);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const W: u8 = 2;
    const W1: u8 = 3;

    fn gf4(v: u8) -> FieldElement {
        FieldSpec::GF4.element(v).unwrap()
    }

    #[test]
    fn product_table_matches_reference() {
        // rows/cols in order 0, 1, w, w+1
        let expected = [[0, 0, 0, 0], [0, 1, W, W1], [0, W, W1, 1], [0, W1, 1, W]];
        for a in 0..4u8 {
            for b in 0..4u8 {
                assert_eq!(FieldSpec::GF4.mul(a, b), expected[a as usize][b as usize]);
                assert_eq!(clmul_reduce(a, b, GF4_POLY, 2), expected[a as usize][b as usize]);
            }
        }
    }

    #[test]
    fn add_examples() {
        assert_eq!(gf_add(gf4(W), gf4(W1)).unwrap(), gf4(1));
        assert_eq!(gf_add(gf4(0), gf4(W)).unwrap(), gf4(W));
        for x in 0..4 {
            assert_eq!(gf_add(gf4(x), gf4(x)).unwrap(), gf4(0));
            assert_eq!(gf_add(gf4(x), gf4(1)).unwrap(), gf_sub(gf4(x), gf4(1)).unwrap());
        }
    }

    #[test]
    fn mul_examples() {
        assert_eq!(gf_mul(gf4(W), gf4(W)).unwrap(), gf4(W1));
        assert_eq!(gf_mul(gf4(W), gf4(W1)).unwrap(), gf4(1));
        for x in 0..4 {
            assert_eq!(gf_mul(gf4(0), gf4(x)).unwrap(), gf4(0));
        }
    }

    #[test]
    fn inv_examples() {
        assert_eq!(gf_inv(gf4(1)).unwrap(), gf4(1));
        assert_eq!(gf_inv(gf4(W)).unwrap(), gf4(W1));
        assert!(matches!(gf_inv(gf4(0)), Err(Error::DivisionByZero)));
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let gf8 = FieldSpec::with_order(8).unwrap();
        let a = gf8.element(5).unwrap();
        assert!(matches!(gf_add(a, gf4(1)), Err(Error::FieldMismatch { .. })));
        assert!(matches!(gf_mul(gf4(1), a), Err(Error::FieldMismatch { .. })));
        assert!(scalar_block_mul(a, &SymbolBlock::zeroed(2)).is_err());
    }

    #[test]
    fn field_spec_validation() {
        assert!(FieldSpec::new(4, 0b111).is_ok());
        assert!(FieldSpec::new(4, 0b101).is_err()); // (x+1)^2
        assert!(FieldSpec::new(6, 0b111).is_err());
        assert!(FieldSpec::new(8, 0b111).is_err());
        assert!(FieldSpec::new(16, 0b1_0101).is_err()); // (x^2+x+1)^2
        assert!(FieldSpec::new(512, 0).is_err());
        for order in [2u16, 4, 8, 16, 32, 64, 128, 256] {
            FieldSpec::with_order(order).unwrap();
        }
        assert!(gf4(3).field().is_gf4());
        assert!(FieldSpec::GF4.element(4).is_err());
    }

    #[test]
    fn gf4_field_axioms_exhaustive() {
        let f = FieldSpec::GF4;
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in 0..4 {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                }
            }
        }
        for a in 1..4 {
            let inverses: Vec<u8> = (0..4).filter(|&x| f.mul(a, x) == 1).collect();
            assert_eq!(inverses, vec![f.inv(a).unwrap()]);
        }
    }

    #[test]
    fn larger_fields_have_inverses() {
        for order in [2u16, 8, 16, 256] {
            let f = FieldSpec::with_order(order).unwrap();
            for a in f.elements().skip(1) {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "{f} a={a}");
            }
        }
    }

    #[test]
    fn block_mul_examples() {
        let block = SymbolBlock::new(vec![0x1B]);
        assert_eq!(block.element(0), 0);
        assert_eq!(block.element(3), W1);
        assert_eq!(scalar_block_mul(gf4(W), &block).unwrap().as_bytes(), &[0x2D]);
        let any = SymbolBlock::new(vec![0xff, 0x00, 0x5a, 0xc3]);
        assert_eq!(scalar_block_mul(gf4(1), &any).unwrap(), any);
        assert_eq!(scalar_block_mul(gf4(0), &any).unwrap(), SymbolBlock::zeroed(4));
    }

    proptest! {
        #[test]
        fn block_mul_composes(s1 in 0u8..4, s2 in 0u8..4, bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            let b = SymbolBlock::new(bytes);
            let lhs = b.scaled(s2).scaled(s1);
            let rhs = b.scaled(FieldSpec::GF4.mul(s1, s2));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn block_mul_is_elementwise(s in 0u8..4, bytes in proptest::collection::vec(any::<u8>(), 1..32)) {
            let b = SymbolBlock::new(bytes);
            let scaled = b.scaled(s);
            for idx in 0..b.element_count() {
                prop_assert_eq!(scaled.element(idx), FieldSpec::GF4.mul(s, b.element(idx)));
            }
            let elements: Vec<u8> = (0..b.element_count()).map(|i| b.element(i)).collect();
            prop_assert_eq!(SymbolBlock::from_elements(&elements), b);
        }
    }
}
