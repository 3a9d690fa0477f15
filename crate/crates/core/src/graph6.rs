//! graph6 codec for undirected simple graphs (McKay's format).
//!
//! The upper triangle of the adjacency matrix is read column by column —
//! x(0,1), x(0,2), x(1,2), x(0,3), ... — packed six bits per printable
//! byte (most significant bit first), each byte offset by 63. The node
//! count is encoded in a 1-, 4- or 8-byte header. The optional
//! `>>graph6<<` prefix is accepted.

use crate::graph::Graph;
use ndarray::Array2;
use thiserror::Error;

const PREFIX: &str = ">>graph6<<";

#[derive(Debug, Error)]
pub enum Graph6Error {
    #[error("empty graph6 string")]
    Empty,
    #[error("byte {byte:#04x} at offset {offset} outside graph6 range 63..=126")]
    OutOfRange { byte: u8, offset: usize },
    #[error("malformed header at offset {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: &'static str },
    #[error("truncated bit stream at offset {offset}: need {expected} data bytes, found {found}")]
    Truncated {
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("trailing byte at offset {offset}")]
    Trailing { offset: usize },
}

/// Decodes a graph6 string into a [`Graph`]. Errors carry the byte offset
/// into the original input.
pub fn parse_graph6(text: &str) -> Result<Graph, Graph6Error> {
    let text = text.trim_end_matches(['\r', '\n']);
    let (base, body) = match text.strip_prefix(PREFIX) {
        Some(rest) => (PREFIX.len(), rest),
        None => (0, text),
    };
    let bytes = body.as_bytes();
    if bytes.is_empty() {
        return Err(Graph6Error::Empty);
    }
    for (k, &b) in bytes.iter().enumerate() {
        if !(63..=126).contains(&b) {
            return Err(Graph6Error::OutOfRange {
                byte: b,
                offset: base + k,
            });
        }
    }

    // Header: n < 63 in one byte; '~' + 3 bytes for n < 2^18; '~~' + 6 bytes.
    let (n, header_len) = if bytes[0] != 126 {
        ((bytes[0] - 63) as usize, 1)
    } else if bytes.len() >= 2 && bytes[1] != 126 {
        if bytes.len() < 4 {
            return Err(Graph6Error::MalformedHeader {
                offset: base,
                reason: "four bytes required for the extended node count",
            });
        }
        let n = bytes[1..4]
            .iter()
            .fold(0usize, |acc, &b| (acc << 6) | (b - 63) as usize);
        (n, 4)
    } else {
        if bytes.len() < 8 {
            return Err(Graph6Error::MalformedHeader {
                offset: base,
                reason: "eight bytes required for the long node count",
            });
        }
        let n = bytes[2..8]
            .iter()
            .fold(0usize, |acc, &b| (acc << 6) | (b - 63) as usize);
        (n, 8)
    };

    let bits = n * n.saturating_sub(1) / 2;
    let expected = bits.div_ceil(6);
    let data = &bytes[header_len..];
    if data.len() < expected {
        return Err(Graph6Error::Truncated {
            offset: base + bytes.len(),
            expected,
            found: data.len(),
        });
    }
    if data.len() > expected {
        return Err(Graph6Error::Trailing {
            offset: base + header_len + expected,
        });
    }

    let mut adj = Array2::zeros((n, n));
    let mut pos = 0usize;
    for j in 1..n {
        for i in 0..j {
            let byte = data[pos / 6] - 63;
            if (byte >> (5 - pos % 6)) & 1 == 1 {
                adj[[i, j]] = 1.0;
                adj[[j, i]] = 1.0;
            }
            pos += 1;
        }
    }
    Ok(Graph::from_adj(adj).expect("decoded adjacency is symmetric 0/1"))
}

/// Encodes a [`Graph`] in canonical (minimal-header) graph6 form.
pub fn encode_graph6(g: &Graph) -> String {
    let n = g.n();
    let mut out: Vec<u8> = Vec::new();
    if n < 63 {
        out.push(n as u8 + 63);
    } else if n < (1 << 18) {
        out.push(126);
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 0x3f) as u8 + 63);
        }
    } else {
        out.push(126);
        out.push(126);
        for shift in [30, 24, 18, 12, 6, 0] {
            out.push(((n >> shift) & 0x3f) as u8 + 63);
        }
    }
    let mut acc = 0u8;
    let mut nbits = 0;
    for j in 1..n {
        for i in 0..j {
            acc = (acc << 1) | (g.has_edge(i, j) as u8);
            nbits += 1;
            if nbits == 6 {
                out.push(acc + 63);
                acc = 0;
                nbits = 0;
            }
        }
    }
    if nbits > 0 {
        out.push((acc << (6 - nbits)) + 63);
    }
    String::from_utf8(out).expect("graph6 bytes are printable ascii")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, erdos_renyi};

    #[test]
    fn empty_three_node_graph() {
        // 'B' = 63 + 3 nodes, '?' = all-zero bit group.
        let g = parse_graph6("B?").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn single_edge_three_node_graph() {
        // '_' = 32 = 100000b sets x(0,1) only.
        let g = parse_graph6("B_").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn triangle() {
        let g = parse_graph6("Bw").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(encode_graph6(&complete(3)), "Bw");
    }

    #[test]
    fn two_nodes_no_edges() {
        let g = parse_graph6("A?").unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn optional_prefix_and_newline() {
        let g = parse_graph6(">>graph6<<Bw\n").unwrap();
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn error_offsets() {
        match parse_graph6("B\x20") {
            Err(Graph6Error::OutOfRange { byte: 0x20, offset: 1 }) => {}
            other => panic!("expected out-of-range at offset 1, got {other:?}"),
        }
        match parse_graph6("D?") {
            Err(Graph6Error::Truncated {
                expected: 2,
                found: 1,
                ..
            }) => {}
            other => panic!("expected truncation, got {other:?}"),
        }
        match parse_graph6("Bw?") {
            Err(Graph6Error::Trailing { offset: 2 }) => {}
            other => panic!("expected trailing byte at offset 2, got {other:?}"),
        }
        match parse_graph6(">>graph6<<B\x7f") {
            Err(Graph6Error::OutOfRange { offset: 11, .. }) => {}
            other => panic!("expected offset past prefix, got {other:?}"),
        }
        assert!(matches!(parse_graph6(""), Err(Graph6Error::Empty)));
        assert!(matches!(
            parse_graph6("~?"),
            Err(Graph6Error::MalformedHeader { .. })
        ));
    }

    #[test]
    fn round_trip_random_corpus() {
        for seed in 0..100 {
            let n = 1 + (seed as usize % 20);
            let g = erdos_renyi(n, 0.4, seed).unwrap();
            let enc = encode_graph6(&g);
            let back = parse_graph6(&enc).unwrap();
            assert_eq!(back.adjacency(), g.adjacency(), "seed {seed}");
            assert_eq!(encode_graph6(&back), enc);
        }
    }

    #[test]
    fn large_header_round_trip() {
        let g = erdos_renyi(70, 0.1, 5).unwrap();
        let enc = encode_graph6(&g);
        assert!(enc.starts_with('~'));
        let back = parse_graph6(&enc).unwrap();
        assert_eq!(back.adjacency(), g.adjacency());
    }
}
