//! Scalars and coordinate arrays.
//!
//! Every coordinate is stored as a complex double; real spaces simply keep the
//! imaginary parts at zero. Functionals act bilinearly, `f(x) = Σ f_k x_k`,
//! with no conjugation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub(crate) fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Unit-modulus phase of `z`, or `fallback` when `z == 0`.
#[inline]
pub(crate) fn phase_or(z: C64, fallback: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        fallback
    } else {
        z / r
    }
}

/// JSON form of a scalar: a bare number for real values, `[re, im]` otherwise.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarRepr {
    Real(f64),
    Complex([f64; 2]),
}

impl From<ScalarRepr> for C64 {
    fn from(s: ScalarRepr) -> Self {
        match s {
            ScalarRepr::Real(x) => re(x),
            ScalarRepr::Complex([a, b]) => C64::new(a, b),
        }
    }
}

/// Encodes entries as bare numbers (real field) or `[re, im]` pairs (complex field).
pub fn encode_entries(entries: &[C64], complex: bool) -> Vec<ScalarRepr> {
    entries
        .iter()
        .map(|z| {
            if complex {
                ScalarRepr::Complex([z.re, z.im])
            } else {
                ScalarRepr::Real(z.re)
            }
        })
        .collect()
}

pub fn decode_entries(entries: &[ScalarRepr]) -> Vec<C64> {
    entries.iter().map(|&s| s.into()).collect()
}

macro_rules! coord_type {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(pub Vec<C64>);

        impl $name {
            pub fn new(entries: Vec<C64>) -> Self {
                Self(entries)
            }

            pub fn from_real(entries: &[f64]) -> Self {
                Self(entries.iter().map(|&x| re(x)).collect())
            }

            pub fn zeros(n: usize) -> Self {
                Self(vec![ZERO; n])
            }

            /// `k`-th canonical unit element (0-based).
            pub fn unit(n: usize, k: usize) -> Self {
                let mut v = vec![ZERO; n];
                v[k] = ONE;
                Self(v)
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn entries(&self) -> &[C64] {
                &self.0
            }

            pub fn is_real(&self) -> bool {
                self.0.iter().all(|z| z.im == 0.0)
            }

            pub fn is_zero(&self) -> bool {
                self.0.iter().all(|z| *z == ZERO)
            }

            pub fn scaled(&self, c: C64) -> Self {
                Self(self.0.iter().map(|z| z * c).collect())
            }

            pub fn scaled_re(&self, c: f64) -> Self {
                Self(self.0.iter().map(|z| z * c).collect())
            }

            /// Real parts; only meaningful for real-field data.
            pub fn real_parts(&self) -> Vec<f64> {
                self.0.iter().map(|z| z.re).collect()
            }

            pub fn add(&self, other: &Self) -> Self {
                Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
            }

            pub fn sub(&self, other: &Self) -> Self {
                Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
            }

            pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
                if self.0.len() != n {
                    Err(Error::DimensionMismatch {
                        expected: n,
                        found: self.0.len(),
                    })
                } else {
                    Ok(())
                }
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                encode_entries(&self.0, !self.is_real()).serialize(s)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let raw = Vec::<ScalarRepr>::deserialize(d)?;
                Ok(Self(decode_entries(&raw)))
            }
        }
    };
}

coord_type!(CoordVector);
coord_type!(CoordFunctional);

impl CoordFunctional {
    /// `f(x) = Σ f_k x_k`.
    pub fn apply(&self, x: &CoordVector) -> C64 {
        self.0.iter().zip(&x.0).map(|(f, v)| f * v).sum()
    }
}
