//! Arithmetic in binary extension fields GF(2^ℓ), ℓ ≤ 16.
//!
//! Two entry points share one [`FieldSpec`]: [`FieldElement`] carries its spec
//! and checks compatibility on every operation, while [`Gf2m`] works on raw
//! `u16` values through log/antilog tables for the hot loops of the codecs.

use thiserror::Error;

pub const MAX_DEGREE: u32 = 16;

/// Smallest primitive polynomial of each degree 1..=16, as a bit mask.
const STANDARD_MODULI: [u32; 16] = [
    0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x402B,
    0x8003, 0x1002D,
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("field degree {0} outside 1..={MAX_DEGREE}")]
    Degree(u32),
    #[error("modulus {modulus:#x} does not have degree {degree}")]
    ModulusDegree { degree: u32, modulus: u32 },
    #[error("modulus {0:#x} is reducible")]
    Reducible(u32),
    #[error("value {value} does not fit GF(2^{degree})")]
    OutOfRange { degree: u32, value: u32 },
    #[error("operands come from different fields")]
    Mismatch,
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("basis index {index} outside 1..={degree}")]
    BasisIndex { degree: u32, index: usize },
    #[error("coefficient vector has length {got}, expected {expected}")]
    BitLength { expected: usize, got: usize },
}

/// Degree and reduction polynomial of a binary extension field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    degree: u32,
    modulus: u32,
}

impl FieldSpec {
    pub fn new(degree: u32, modulus: u32) -> Result<Self, FieldError> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(FieldError::Degree(degree));
        }
        if modulus >> degree != 1 {
            return Err(FieldError::ModulusDegree { degree, modulus });
        }
        if !is_irreducible(modulus) {
            return Err(FieldError::Reducible(modulus));
        }
        Ok(Self { degree, modulus })
    }

    /// The built-in primitive modulus for `degree`.
    pub fn standard(degree: u32) -> Result<Self, FieldError> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(FieldError::Degree(degree));
        }
        Ok(Self { degree, modulus: STANDARD_MODULI[degree as usize - 1] })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn order(&self) -> usize {
        1usize << self.degree
    }

    pub fn modulus_hex(&self) -> String {
        format!("{:x}", self.modulus)
    }

    pub fn element(&self, value: u32) -> Result<FieldElement, FieldError> {
        if value as usize >= self.order() {
            return Err(FieldError::OutOfRange { degree: self.degree, value });
        }
        Ok(FieldElement { spec: *self, value: value as u16 })
    }

    fn reduce(&self, mut v: u32) -> u16 {
        let d = self.degree;
        for bit in (d..2 * d).rev() {
            if v >> bit & 1 == 1 {
                v ^= self.modulus << (bit - d);
            }
        }
        v as u16
    }

    fn schoolbook_mul(&self, a: u16, b: u16) -> u16 {
        let mut acc = 0u32;
        for i in 0..self.degree {
            if b >> i & 1 == 1 {
                acc ^= (a as u32) << i;
            }
        }
        self.reduce(acc)
    }
}

/// Remainder of `a` modulo `b` as GF(2) polynomials.
pub(crate) fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = 31 - b.leading_zeros();
    while a != 0 && 31 - a.leading_zeros() >= db {
        a ^= b << (31 - a.leading_zeros() - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
pub fn is_irreducible(modulus: u32) -> bool {
    if modulus < 2 {
        return false;
    }
    let degree = 31 - modulus.leading_zeros();
    (1..=degree / 2).all(|d| ((1u32 << d)..(1u32 << (d + 1))).all(|g| poly_rem(modulus, g) != 0))
}

/// A value tagged with the field it lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    spec: FieldSpec,
    value: u16,
}

impl FieldElement {
    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn value(&self) -> u16 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn add(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        self.same_field(&other)?;
        Ok(FieldElement { spec: self.spec, value: self.value ^ other.value })
    }

    pub fn mul(self, other: FieldElement) -> Result<FieldElement, FieldError> {
        self.same_field(&other)?;
        Ok(FieldElement { spec: self.spec, value: self.spec.schoolbook_mul(self.value, other.value) })
    }

    /// Inverse via x^(q-2).
    pub fn inv(self) -> Result<FieldElement, FieldError> {
        if self.value == 0 {
            return Err(FieldError::ZeroInverse);
        }
        let mut e = self.spec.order() as u64 - 2;
        let mut base = self.value;
        let mut acc = 1u16;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.spec.schoolbook_mul(acc, base);
            }
            base = self.spec.schoolbook_mul(base, base);
            e >>= 1;
        }
        Ok(FieldElement { spec: self.spec, value: acc })
    }

    fn same_field(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.spec == other.spec {
            Ok(())
        } else {
            Err(FieldError::Mismatch)
        }
    }
}

/// Coefficient `basis_index` (1-based, polynomial basis) of `p · a`, where
/// `a = Σ a_bits[i] x^i`. Linear in `a_bits` for fixed `p`.
pub fn basis_coefficient(
    p: FieldElement,
    a_bits: &[bool],
    basis_index: usize,
) -> Result<bool, FieldError> {
    let degree = p.spec.degree;
    if basis_index == 0 || basis_index > degree as usize {
        return Err(FieldError::BasisIndex { degree, index: basis_index });
    }
    if a_bits.len() != degree as usize {
        return Err(FieldError::BitLength { expected: degree as usize, got: a_bits.len() });
    }
    let a = a_bits.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | (b as u32) << i);
    let prod = p.mul(p.spec.element(a)?)?;
    Ok(prod.value >> (basis_index - 1) & 1 == 1)
}

/// Table-driven arithmetic on raw values of one field.
#[derive(Clone, Debug)]
pub struct Gf2m {
    spec: FieldSpec,
    exp: Vec<u16>,
    log: Vec<u32>,
}

impl Gf2m {
    /// Builds tables around the smallest generator of the multiplicative
    /// group (`x` itself for the built-in primitive moduli).
    pub fn new(spec: FieldSpec) -> Self {
        let q = spec.order();
        let generator = (1..q)
            .map(|g| g as u16)
            .find(|&g| {
                let mut cur = g;
                let mut order = 1;
                while cur != 1 {
                    cur = spec.schoolbook_mul(cur, g);
                    order += 1;
                }
                order == q - 1
            })
            .expect("a finite field has a primitive element");
        let mut exp = vec![0u16; 2 * q];
        let mut log = vec![u32::MAX; q];
        let mut cur = 1u16;
        for i in 0..q - 1 {
            exp[i] = cur;
            log[cur as usize] = i as u32;
            cur = spec.schoolbook_mul(cur, generator);
        }
        for i in q - 1..2 * q {
            exp[i] = exp[i - (q - 1)];
        }
        Self { spec, exp, log }
    }

    pub fn with_degree(degree: u32) -> Result<Self, FieldError> {
        Ok(Self::new(FieldSpec::standard(degree)?))
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn order(&self) -> usize {
        self.spec.order()
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }

    #[inline]
    pub fn inv(&self, a: u16) -> Option<u16> {
        if a == 0 {
            None
        } else {
            let q1 = self.order() as u32 - 1;
            Some(self.exp[((q1 - self.log[a as usize]) % q1) as usize])
        }
    }

    #[inline]
    pub fn div(&self, a: u16, b: u16) -> Option<u16> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    pub fn pow(&self, a: u16, e: u64) -> u16 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let q1 = self.order() as u64 - 1;
        self.exp[((self.log[a as usize] as u64 * (e % q1)) % q1) as usize]
    }

    /// `g^i` for the table generator `g`.
    pub fn antilog(&self, i: usize) -> u16 {
        self.exp[i % (self.order() - 1)]
    }

    pub fn log(&self, a: u16) -> Option<usize> {
        (a != 0).then(|| self.log[a as usize] as usize)
    }

    /// Evaluates `coeffs[0] + coeffs[1] x + ...` at `x` by Horner's rule.
    pub fn eval_poly(&self, coeffs: &[u16], x: u16) -> u16 {
        coeffs.iter().rev().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf8() -> FieldSpec {
        FieldSpec::new(3, 0b1011).unwrap()
    }

    #[test]
    fn standard_moduli_are_primitive() {
        for degree in 1..=MAX_DEGREE {
            let spec = FieldSpec::standard(degree).unwrap();
            assert!(is_irreducible(spec.modulus()), "degree {degree}");
            let field = Gf2m::new(spec);
            if degree > 1 {
                assert_eq!(field.antilog(1), 2, "x generates for degree {degree}");
            }
            let q = field.order();
            let mut seen = vec![false; q];
            for i in 0..q - 1 {
                let v = field.antilog(i) as usize;
                assert!(!seen[v] && v != 0, "degree {degree} repeats at {i}");
                seen[v] = true;
            }
        }
    }

    #[test]
    fn rejects_bad_moduli() {
        assert_eq!(FieldSpec::new(3, 0b1111), Err(FieldError::Reducible(0b1111)));
        assert!(matches!(FieldSpec::new(3, 0b111), Err(FieldError::ModulusDegree { .. })));
        assert_eq!(FieldSpec::new(0, 1), Err(FieldError::Degree(0)));
        assert_eq!(FieldSpec::new(17, 1 << 17 | 0b1001), Err(FieldError::Degree(17)));
    }

    #[test]
    fn small_field_identities() {
        let f = gf8();
        let e = |v| f.element(v).unwrap();
        assert_eq!(e(0b011).add(e(0b101)).unwrap().value(), 0b110);
        assert_eq!(e(0b010).mul(e(0b100)).unwrap().value(), 0b011);
        assert_eq!(e(1).inv().unwrap().value(), 1);
        for v in 0..8 {
            assert!(e(v).add(e(v)).unwrap().is_zero());
            assert_eq!(e(v).add(e(0)).unwrap(), e(v));
            assert_eq!(e(v).mul(e(1)).unwrap(), e(v));
            assert!(e(v).mul(e(0)).unwrap().is_zero());
        }
        let inv2 = (1..8).find(|&v| e(2).mul(e(v)).unwrap().value() == 1).unwrap();
        assert_eq!(e(2).inv().unwrap().value() as u32, inv2);
        assert_eq!(e(0).inv(), Err(FieldError::ZeroInverse));
    }

    #[test]
    fn mismatched_fields_error() {
        let a = gf8().element(3).unwrap();
        let b = FieldSpec::standard(4).unwrap().element(3).unwrap();
        assert_eq!(a.add(b), Err(FieldError::Mismatch));
        assert_eq!(a.mul(b), Err(FieldError::Mismatch));
        assert!(gf8().element(8).is_err());
    }

    #[test]
    fn field_axioms_on_full_tables() {
        for spec in [gf8(), FieldSpec::standard(4).unwrap()] {
            let q = spec.order() as u32;
            let tab = Gf2m::new(spec);
            for x in 0..q {
                let ex = spec.element(x).unwrap();
                if x != 0 {
                    let ix = ex.inv().unwrap();
                    assert_eq!(ex.mul(ix).unwrap().value(), 1);
                    assert_eq!(ix.inv().unwrap(), ex);
                    assert_eq!(tab.inv(x as u16), Some(ix.value()));
                }
                for y in 0..q {
                    let ey = spec.element(y).unwrap();
                    assert_eq!(tab.mul(x as u16, y as u16), ex.mul(ey).unwrap().value());
                    for z in 0..q {
                        let ez = spec.element(z).unwrap();
                        let l = ex.mul(ey).unwrap().mul(ez).unwrap();
                        let r = ex.mul(ey.mul(ez).unwrap()).unwrap();
                        assert_eq!(l, r);
                        let l = ex.mul(ey.add(ez).unwrap()).unwrap();
                        let r = ex.mul(ey).unwrap().add(ex.mul(ez).unwrap()).unwrap();
                        assert_eq!(l, r);
                    }
                }
            }
        }
    }

    fn bits(v: u32, len: usize) -> Vec<bool> {
        (0..len).map(|i| v >> i & 1 == 1).collect()
    }

    #[test]
    fn basis_coefficient_examples() {
        let f = gf8();
        for a in 0..8 {
            let zero = basis_coefficient(f.element(0).unwrap(), &bits(a, 3), 2).unwrap();
            assert!(!zero);
            let id = basis_coefficient(f.element(1).unwrap(), &bits(a, 3), 1).unwrap();
            assert_eq!(id, a & 1 == 1);
        }
        // p = x: output bit 0 of x·a, taken from schoolbook multiplication.
        let table: Vec<bool> =
            (0..8).map(|a| basis_coefficient(f.element(2).unwrap(), &bits(a, 3), 1).unwrap()).collect();
        assert_eq!(table, [false, false, false, false, true, true, true, true]);
        assert!(basis_coefficient(f.element(2).unwrap(), &bits(0, 3), 0).is_err());
        assert!(basis_coefficient(f.element(2).unwrap(), &bits(0, 3), 4).is_err());
    }

    #[test]
    fn basis_coefficient_is_linear_and_nontrivial() {
        for degree in 1..=4 {
            let spec = FieldSpec::standard(degree).unwrap();
            let q = spec.order() as u32;
            let l = degree as usize;
            for p in 0..q {
                let pe = spec.element(p).unwrap();
                for idx in 1..=l {
                    let f = |a: u32| basis_coefficient(pe, &bits(a, l), idx).unwrap();
                    for a in 0..q {
                        for b in 0..q {
                            assert_eq!(f(a ^ b), f(a) ^ f(b));
                        }
                    }
                }
                let any = (0..q).any(|a| basis_coefficient(pe, &bits(a, l), 1).unwrap());
                assert_eq!(any, p != 0);
            }
        }
    }
}
