//! Table-based arithmetic in GF(2^ν), 3 ≤ ν ≤ 12.
//!
//! Elements are integers in `[0, 2^ν)` in polynomial basis; the primitive
//! element α is represented by `2`.

use crate::error::{Error, Result};

pub const MIN_NU: u32 = 3;
pub const MAX_NU: u32 = 12;

/// Default primitive polynomial per extension degree: the numerically
/// smallest primitive polynomial of that degree (bit `i` is the coefficient
/// of `x^i`).
///
/// | ν  | polynomial                     |
/// |----|--------------------------------|
/// | 3  | x³+x+1 (`0xb`)                 |
/// | 4  | x⁴+x+1 (`0x13`)                |
/// | 5  | x⁵+x²+1 (`0x25`)               |
/// | 6  | x⁶+x+1 (`0x43`)                |
/// | 7  | x⁷+x+1 (`0x83`)                |
/// | 8  | x⁸+x⁴+x³+x²+1 (`0x11d`)        |
/// | 9  | x⁹+x⁴+1 (`0x211`)              |
/// | 10 | x¹⁰+x³+1 (`0x409`)             |
/// | 11 | x¹¹+x²+1 (`0x805`)             |
/// | 12 | x¹²+x⁶+x⁴+x+1 (`0x1053`)       |
pub fn default_primitive_poly(nu: u32) -> Option<u32> {
    Some(match nu {
        3 => 0xb,
        4 => 0x13,
        5 => 0x25,
        6 => 0x43,
        7 => 0x83,
        8 => 0x11d,
        9 => 0x211,
        10 => 0x409,
        11 => 0x805,
        12 => 0x1053,
        _ => return None,
    })
}

/// GF(2^ν) with discrete exp/log tables. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Field {
    nu: u32,
    poly: u32,
    /// `exp[i] = α^i` for `0 ≤ i < 2·(2^ν − 1)`, doubled so that a sum of two
    /// logs indexes directly.
    exp: Vec<u16>,
    /// `log[x]` for `x ≠ 0`; `log[0]` is unused.
    log: Vec<u16>,
}

impl Field {
    /// Builds the field. `None` selects [`default_primitive_poly`].
    pub fn new(nu: u32, primitive_poly: Option<u32>) -> Result<Self> {
        if !(MIN_NU..=MAX_NU).contains(&nu) {
            return Err(Error::InvalidParameters(format!(
                "extension degree {nu} outside {MIN_NU}..={MAX_NU}"
            )));
        }
        let poly = match primitive_poly {
            Some(p) => p,
            None => default_primitive_poly(nu).expect("range checked"),
        };
        if poly >> nu != 1 {
            return Err(Error::InvalidParameters(format!(
                "polynomial {poly:#x} does not have degree {nu}"
            )));
        }

        let size = 1usize << nu;
        let order = size - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; size];
        let mut x: u32 = 1;
        for (i, e) in exp.iter_mut().take(order).enumerate() {
            if i > 0 && x == 1 {
                // α has order i < 2^ν − 1.
                return Err(Error::NonPrimitivePolynomial { poly, nu });
            }
            *e = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x >> nu & 1 == 1 {
                x ^= poly;
            }
        }
        if x != 1 {
            // x^ν … never returns to 1: the polynomial is reducible with x as a factor
            // (constant term zero), which is also not primitive.
            return Err(Error::NonPrimitivePolynomial { poly, nu });
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Field { nu, poly, exp, log })
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn primitive_poly(&self) -> u32 {
        self.poly
    }

    /// Number of elements, `2^ν`.
    pub fn size(&self) -> usize {
        1 << self.nu
    }

    /// Multiplicative group order, `2^ν − 1`.
    pub fn order(&self) -> usize {
        (1 << self.nu) - 1
    }

    #[inline]
    pub fn add(&self, x: u16, y: u16) -> u16 {
        x ^ y
    }

    #[inline]
    pub fn mul(&self, x: u16, y: u16) -> u16 {
        if x == 0 || y == 0 {
            return 0;
        }
        self.exp[self.log[x as usize] as usize + self.log[y as usize] as usize]
    }

    pub fn inv(&self, x: u16) -> Result<u16> {
        if x == 0 {
            return Err(Error::DivisionByZero);
        }
        let l = self.log[x as usize] as usize;
        Ok(self.exp[(self.order() - l) % self.order()])
    }

    /// `x / y`; panics on `y == 0`. Internal hot paths check the divisor first.
    #[inline]
    pub(crate) fn div(&self, x: u16, y: u16) -> u16 {
        debug_assert!(y != 0);
        if x == 0 {
            return 0;
        }
        let order = self.order();
        let l = self.log[x as usize] as usize + order - self.log[y as usize] as usize;
        self.exp[l % order]
    }

    pub fn pow(&self, x: u16, e: u64) -> u16 {
        if e == 0 {
            return 1;
        }
        if x == 0 {
            return 0;
        }
        let l = self.log[x as usize] as u64 * (e % self.order() as u64);
        self.exp[(l % self.order() as u64) as usize]
    }

    /// `α^i` for any non-negative exponent.
    #[inline]
    pub fn alpha_pow(&self, i: usize) -> u16 {
        self.exp[i % self.order()]
    }

    /// Discrete log base α; `None` for zero.
    #[inline]
    pub fn log(&self, x: u16) -> Option<usize> {
        if x == 0 {
            None
        } else {
            Some(self.log[x as usize] as usize)
        }
    }

    #[inline]
    pub(crate) fn square(&self, x: u16) -> u16 {
        self.mul(x, x)
    }
}
