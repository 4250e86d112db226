//! Canonical length-prefixed encoding.
//!
//! Every field is written as a 4-byte big-endian length followed by the
//! field bytes. Integers are 8-byte big-endian; group elements and scalars
//! use the fixed widths of their group. Encodings are part of the transcript
//! format and are bit-exact.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("input truncated")]
    Truncated,
    #[error("field has unexpected length {found}, expected {expected}")]
    BadLength { expected: usize, found: usize },
    #[error("trailing bytes after last field")]
    TrailingBytes,
    #[error("value is not canonical")]
    NonCanonical,
    #[error("unknown tag {0}")]
    UnknownTag(u8),
}

#[derive(Debug, Default, Clone)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(&mut self, bytes: &[u8]) -> &mut Self {
        let len = u32::try_from(bytes.len()).expect("field longer than 4 GiB");
        self.buf.extend_from_slice(&len.to_be_bytes());
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.field(&v.to_be_bytes())
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.field(&[v])
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    rest: &'a [u8],
}

impl<'a> Decoder<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { rest: bytes }
    }

    pub fn field(&mut self) -> Result<&'a [u8], DecodeError> {
        if self.rest.len() < 4 {
            return Err(DecodeError::Truncated);
        }
        let (len, rest) = self.rest.split_at(4);
        let len = u32::from_be_bytes([len[0], len[1], len[2], len[3]]) as usize;
        if rest.len() < len {
            return Err(DecodeError::Truncated);
        }
        let (out, rest) = rest.split_at(len);
        self.rest = rest;
        Ok(out)
    }

    pub fn fixed<const N: usize>(&mut self) -> Result<[u8; N], DecodeError> {
        let f = self.field()?;
        f.try_into().map_err(|_| DecodeError::BadLength {
            expected: N,
            found: f.len(),
        })
    }

    pub fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_be_bytes(self.fixed::<8>()?))
    }

    pub fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.fixed::<1>()?[0])
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        if self.rest.is_empty() {
            Ok(())
        } else {
            Err(DecodeError::TrailingBytes)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_is_length_then_bytes() {
        let mut enc = Encoder::new();
        enc.field(b"ab").u64(1);
        assert_eq!(
            enc.finish(),
            [0, 0, 0, 2, b'a', b'b', 0, 0, 0, 8, 0, 0, 0, 0, 0, 0, 0, 1]
        );
    }

    #[test]
    fn errors() {
        assert_eq!(Decoder::new(&[0, 0]).field(), Err(DecodeError::Truncated));
        assert_eq!(
            Decoder::new(&[0, 0, 0, 3, 1]).field(),
            Err(DecodeError::Truncated)
        );
        let bytes = [0, 0, 0, 1, 7];
        assert!(matches!(
            Decoder::new(&bytes).u64(),
            Err(DecodeError::BadLength {
                expected: 8,
                found: 1
            })
        ));
        let mut d = Decoder::new(&[0, 0, 0, 0, 9]);
        d.field().unwrap();
        assert_eq!(d.finish(), Err(DecodeError::TrailingBytes));
    }

    proptest! {
        #[test]
        fn fields_roundtrip(fields in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 0..40), 0..8), n in any::<u64>()) {
            let mut enc = Encoder::new();
            for f in &fields {
                enc.field(f);
            }
            enc.u64(n);
            let bytes = enc.finish();
            let mut dec = Decoder::new(&bytes);
            for f in &fields {
                prop_assert_eq!(dec.field().unwrap(), &f[..]);
            }
            prop_assert_eq!(dec.u64().unwrap(), n);
            prop_assert!(dec.finish().is_ok());
        }
    }
}
