//! graph6 encoding and decoding. Strings are ASCII, bytes 63..=126; the
//! upper triangle is packed column-major, six bits per byte, MSB first.

use crate::graph::Graph;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Graph6Error {
    EmptyInput,
    /// Byte outside the printable graph6 range at this offset.
    InvalidByte { offset: usize, byte: u8 },
    /// Input ended before the adjacency bits did.
    Truncated { expected: usize, got: usize },
    /// Extra bytes after a complete graph.
    TrailingData { offset: usize },
    /// Padding bits after the last pair must be zero.
    DirtyPadding { offset: usize },
    /// Vertex counts beyond the three-byte header form.
    TooLarge,
}

impl fmt::Display for Graph6Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Graph6Error::EmptyInput => write!(f, "empty graph6 string"),
            Graph6Error::InvalidByte { offset, byte } => {
                write!(f, "invalid graph6 byte 0x{byte:02x} at offset {offset}")
            }
            Graph6Error::Truncated { expected, got } => {
                write!(f, "graph6 string has {got} bytes, needs {expected}")
            }
            Graph6Error::TrailingData { offset } => {
                write!(f, "trailing data after graph6 payload at offset {offset}")
            }
            Graph6Error::DirtyPadding { offset } => {
                write!(f, "nonzero padding bits in final byte at offset {offset}")
            }
            Graph6Error::TooLarge => write!(f, "vertex count beyond supported graph6 range"),
        }
    }
}

impl std::error::Error for Graph6Error {}

/// Largest vertex count this codec reads or writes (three-byte header form).
pub const MAX_N: usize = 258_047;

/// Encodes a graph as graph6.
pub fn encode(g: &Graph) -> String {
    let n = g.n();
    assert!(n <= MAX_N, "graph too large for graph6");
    let mut out = Vec::new();
    if n <= 62 {
        out.push(63 + n as u8);
    } else {
        out.push(126);
        out.push(63 + ((n >> 12) & 0x3f) as u8);
        out.push(63 + ((n >> 6) & 0x3f) as u8);
        out.push(63 + (n & 0x3f) as u8);
    }
    let mut acc = 0u8;
    let mut filled = 0;
    for y in 1..n {
        for x in 0..y {
            acc = (acc << 1) | u8::from(g.has_edge(x, y));
            filled += 1;
            if filled == 6 {
                out.push(63 + acc);
                acc = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push(63 + (acc << (6 - filled)));
    }
    String::from_utf8(out).expect("graph6 bytes are ASCII")
}

/// Decodes a graph6 string. The whole input must be one graph; offsets in
/// errors are byte positions into `s`.
pub fn decode(s: &str) -> Result<Graph, Graph6Error> {
    let bytes = s.as_bytes();
    if bytes.is_empty() {
        return Err(Graph6Error::EmptyInput);
    }
    for (offset, &b) in bytes.iter().enumerate() {
        if !(63..=126).contains(&b) {
            return Err(Graph6Error::InvalidByte { offset, byte: b });
        }
    }
    let (n, header_len) = if bytes[0] != 126 {
        ((bytes[0] - 63) as usize, 1)
    } else {
        if bytes.len() >= 2 && bytes[1] == 126 {
            return Err(Graph6Error::TooLarge);
        }
        if bytes.len() < 4 {
            return Err(Graph6Error::Truncated {
                expected: 4,
                got: bytes.len(),
            });
        }
        let n = ((bytes[1] - 63) as usize) << 12
            | ((bytes[2] - 63) as usize) << 6
            | (bytes[3] - 63) as usize;
        (n, 4)
    };
    let pair_bits = if n < 2 { 0 } else { n * (n - 1) / 2 };
    let body_len = pair_bits.div_ceil(6);
    let expected = header_len + body_len;
    if bytes.len() < expected {
        return Err(Graph6Error::Truncated {
            expected,
            got: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Graph6Error::TrailingData { offset: expected });
    }
    let mut g = Graph::empty(n);
    let mut pos = 0;
    for y in 1..n {
        for x in 0..y {
            let byte = bytes[header_len + pos / 6] - 63;
            if byte >> (5 - pos % 6) & 1 == 1 {
                g.set_edge(x, y);
            }
            pos += 1;
        }
    }
    if pair_bits % 6 != 0 {
        let last = bytes[expected - 1] - 63;
        let pad = 6 - pair_bits % 6;
        if last & ((1 << pad) - 1) != 0 {
            return Err(Graph6Error::DirtyPadding {
                offset: expected - 1,
            });
        }
    }
    Ok(g)
}

// Graphs travel through JSON as graph6 strings.
impl serde::Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&encode(self))
    }
}

impl<'de> serde::Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Graph, D::Error> {
        let s = String::deserialize(d)?;
        decode(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate;

    #[test]
    fn known_strings() {
        assert_eq!(encode(&Graph::empty(0)), "?");
        assert_eq!(encode(&Graph::empty(1)), "@");
        assert_eq!(encode(&Graph::complete(4)), "C~");
        assert_eq!(encode(&Graph::path(4)), "Ch");
        assert_eq!(encode(&Graph::cycle(5)), "Dhc");
        assert_eq!(decode("C~").unwrap(), Graph::complete(4));
    }

    #[test]
    fn roundtrip_all_small_graphs() {
        for n in 0..=5 {
            for g in enumerate::labeled_graphs(n).unwrap() {
                let s = encode(&g);
                assert_eq!(decode(&s).unwrap(), g, "n={n} s={s}");
            }
        }
    }

    #[test]
    fn roundtrip_long_form() {
        for n in [63usize, 100, 200] {
            let mut g = Graph::empty(n);
            g.set_edge(0, n - 1);
            g.set_edge(n / 2, n / 2 + 1);
            let s = encode(&g);
            assert!(s.starts_with('~'));
            assert_eq!(decode(&s).unwrap(), g);
        }
    }

    #[test]
    fn decode_errors_carry_offsets() {
        assert_eq!(decode("").unwrap_err(), Graph6Error::EmptyInput);
        assert_eq!(
            decode("D!").unwrap_err(),
            Graph6Error::InvalidByte { offset: 1, byte: b'!' }
        );
        assert_eq!(
            decode("Dh").unwrap_err(),
            Graph6Error::Truncated { expected: 3, got: 2 }
        );
        assert_eq!(
            decode("Dhcc").unwrap_err(),
            Graph6Error::TrailingData { offset: 3 }
        );
        assert_eq!(decode("~~????").unwrap_err(), Graph6Error::TooLarge);
        // "Dhd" flips a padding bit of "Dhc"
        assert_eq!(
            decode("Dhd").unwrap_err(),
            Graph6Error::DirtyPadding { offset: 2 }
        );
    }

    #[test]
    fn graphs_serialize_as_graph6_strings() {
        let g = Graph::cycle(5);
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, "\"Dhc\"");
        let back: Graph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Graph>("\"D!\"").is_err());
    }
}
