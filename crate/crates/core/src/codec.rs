//! Encoding a 6-symbol message into five 2-symbol node segments and
//! decoding it back from any three of them.
//!
//! Decoders are precomputed per node subset. The three subset families get
//! their own construction:
//!
//! - all systematic nodes: identity;
//! - two systematic nodes and node 4: the missing segment is
//!   `u4 − u_i − u_j`;
//! - two systematic nodes and node 5: `m_k = A_k⁻ᵀ(u5 − A_iᵀu_i − A_jᵀu_j)`;
//!
//! and anything with a single systematic node is solved by inverting the
//! stacked 6x6 generator rows.

use std::fmt;

use crate::construction::{CodeInstance, ALPHA, DATA_NODES, MESSAGE_SYMBOLS, NODES};
use crate::error::{Error, Result};
use crate::galois::{combine, FieldSpec, Symbol};
use crate::linalg::Mat;

/// The two symbols one node holds for one stripe.
pub type Segment<S> = [S; ALPHA];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message<S> {
    pub segments: [Segment<S>; DATA_NODES],
}

impl<S: Symbol> Message<S> {
    pub fn new(segments: [Segment<S>; DATA_NODES]) -> Self {
        Message { segments }
    }

    /// The six symbols in order m1, m2, m3.
    pub fn symbols(&self) -> impl Iterator<Item = &S> {
        self.segments.iter().flatten()
    }

    pub fn from_symbols(symbols: [S; MESSAGE_SYMBOLS]) -> Self {
        let [a, b, c, d, e, f] = symbols;
        Message {
            segments: [[a, b], [c, d], [e, f]],
        }
    }
}

impl Message<u8> {
    /// The message whose six symbols are the base-q digits of `index`,
    /// most significant first. Enumerates every message for `index < q^6`.
    pub fn from_index(index: u32, order: u16) -> Self {
        let q = u32::from(order);
        let mut digits = [0u8; MESSAGE_SYMBOLS];
        let mut rest = index;
        for d in digits.iter_mut().rev() {
            *d = (rest % q) as u8;
            rest /= q;
        }
        Message::from_symbols(digits)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword<S> {
    pub segments: [Segment<S>; NODES],
}

impl<S> Codeword<S> {
    /// Segment of `node` in 1..=5.
    pub fn node(&self, node: u8) -> &Segment<S> {
        &self.segments[usize::from(node) - 1]
    }
}

/// Three distinct node ids in 1..=5, kept sorted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSubset([u8; 3]);

impl NodeSubset {
    pub fn new(mut nodes: [u8; 3]) -> Result<Self> {
        nodes.sort_unstable();
        if nodes.iter().any(|&n| !(1..=NODES as u8).contains(&n)) {
            return Err(Error::InvalidSubset(format!("{nodes:?}: node ids must be in 1..=5")));
        }
        if nodes[0] == nodes[1] || nodes[1] == nodes[2] {
            return Err(Error::InvalidSubset(format!("{nodes:?}: node ids must be distinct")));
        }
        Ok(NodeSubset(nodes))
    }

    pub fn nodes(self) -> [u8; 3] {
        self.0
    }

    /// All ten subsets in lexicographic order.
    pub fn all() -> impl Iterator<Item = NodeSubset> {
        (1..=3u8).flat_map(|a| {
            ((a + 1)..=4).flat_map(move |b| ((b + 1)..=5).map(move |c| NodeSubset([a, b, c])))
        })
    }

    /// Position of this subset in [`NodeSubset::all`].
    pub fn index(self) -> usize {
        NodeSubset::all().position(|s| s == self).expect("valid subset")
    }

    pub fn contains(self, node: u8) -> bool {
        self.0.contains(&node)
    }
}

impl fmt::Display for NodeSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}", self.0[0], self.0[1], self.0[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStrategy {
    Systematic,
    /// Two systematic nodes plus node 4.
    FirstParity,
    /// Two systematic nodes plus node 5.
    SecondParity,
    /// One systematic node plus both parities: general 6x6 solve.
    Elimination,
}

/// A precomputed decoder: `m = matrix · [u_a; u_b; u_c]` for the sorted
/// subset (a, b, c).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeSpec {
    subset: NodeSubset,
    strategy: DecodeStrategy,
    matrix: Mat,
}

impl DecodeSpec {
    pub fn subset(&self) -> NodeSubset {
        self.subset
    }

    pub fn strategy(&self) -> DecodeStrategy {
        self.strategy
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// Applies the decoder to segments given in the subset's sorted order.
    pub fn apply<S: Symbol>(&self, segments: &[Segment<S>; 3]) -> Message<S> {
        let field = self.matrix.field();
        let stacked: Vec<&S> = segments.iter().flatten().collect();
        let symbols: [S; MESSAGE_SYMBOLS] =
            std::array::from_fn(|r| combine(field, self.matrix.row(r), &stacked));
        Message::from_symbols(symbols)
    }
}

pub fn encode<S: Symbol>(message: &Message<S>, inst: &CodeInstance) -> Codeword<S> {
    let field = inst.field();
    let [m1, m2, m3] = &message.segments;
    let sum: Segment<S> = std::array::from_fn(|r| combine(field, &[1, 1, 1], &[&m1[r], &m2[r], &m3[r]]));
    // u5 = A1ᵀm1 + A2ᵀm2 + A3ᵀm3; row r of Aᵀ is column r of A
    let second: Segment<S> = std::array::from_fn(|r| {
        let mut coeffs = Vec::with_capacity(MESSAGE_SYMBOLS);
        for i in 1..=3 {
            let a = inst.a(i);
            coeffs.extend([a.get(0, r), a.get(1, r)]);
        }
        let symbols: Vec<&S> = message.symbols().collect();
        combine(field, &coeffs, &symbols)
    });
    Codeword {
        segments: [m1.clone(), m2.clone(), m3.clone(), sum, second],
    }
}

/// Builds the decoder for `subset`; fails when its stacked generator rows
/// are singular, which only happens for tuples that are not MDS.
pub fn decode_matrix(subset: NodeSubset, inst: &CodeInstance) -> Result<DecodeSpec> {
    let f = inst.field();
    let nodes = subset.nodes();
    let systematic: Vec<u8> = nodes.iter().copied().filter(|&n| n <= 3).collect();
    let i2 = Mat::identity(f, ALPHA);
    // decode matrix as blocks: block (k, c) maps subset segment c to m_{k+1}
    let mut blocks: [[Option<Mat>; 3]; 3] = Default::default();
    let column_of = |node: u8| nodes.iter().position(|&n| n == node).expect("node in subset");

    let strategy = match systematic.len() {
        3 => {
            for k in 0..3 {
                blocks[k][k] = Some(i2.clone());
            }
            DecodeStrategy::Systematic
        }
        2 => {
            let parity = nodes[2];
            let missing = (1..=3u8).find(|n| !systematic.contains(n)).expect("one missing");
            for &s in &systematic {
                blocks[usize::from(s) - 1][column_of(s)] = Some(i2.clone());
            }
            let row = usize::from(missing) - 1;
            if parity == 4 {
                // m_k = u4 − u_i − u_j
                for &s in &systematic {
                    blocks[row][column_of(s)] = Some(i2.scale(f.neg(1)));
                }
                blocks[row][2] = Some(i2.clone());
                DecodeStrategy::FirstParity
            } else {
                // m_k = −A_k⁻ᵀA_iᵀu_i − A_k⁻ᵀA_jᵀu_j + A_k⁻ᵀu5
                let inv_t = inst
                    .a(usize::from(missing))
                    .transpose()
                    .inv2()
                    .map_err(|_| singular(subset))?;
                for &s in &systematic {
                    let coeff = inv_t.mul(&inst.a(usize::from(s)).transpose())?.scale(f.neg(1));
                    blocks[row][column_of(s)] = Some(coeff);
                }
                blocks[row][2] = Some(inv_t);
                DecodeStrategy::SecondParity
            }
        }
        _ => {
            let matrix = inst.subset_rows(subset).inverse().map_err(|_| singular(subset))?;
            return Ok(DecodeSpec {
                subset,
                strategy: DecodeStrategy::Elimination,
                matrix,
            });
        }
    };
    Ok(DecodeSpec {
        subset,
        strategy,
        matrix: assemble(f, &blocks),
    })
}

fn assemble(f: FieldSpec, blocks: &[[Option<Mat>; 3]; 3]) -> Mat {
    let mut m = Mat::zeros(f, MESSAGE_SYMBOLS, MESSAGE_SYMBOLS);
    for (br, row) in blocks.iter().enumerate() {
        for (bc, cell) in row.iter().enumerate() {
            if let Some(b) = cell {
                for r in 0..ALPHA {
                    for c in 0..ALPHA {
                        m.set(br * ALPHA + r, bc * ALPHA + c, b.get(r, c));
                    }
                }
            }
        }
    }
    m
}

fn singular(subset: NodeSubset) -> Error {
    Error::InvalidParams(format!(
        "stacked generator rows of nodes {subset} are singular; the code is not MDS"
    ))
}

/// Recovers the message from the segments of the three nodes in `subset`,
/// given in the subset's sorted order.
pub fn decode<S: Symbol>(
    subset: NodeSubset,
    segments: &[Segment<S>; 3],
    inst: &CodeInstance,
) -> Result<Message<S>> {
    let spec = inst.decoder(subset).ok_or_else(|| singular(subset))?;
    Ok(spec.apply(segments))
}

/// Decodes from `subset` and re-encodes to check a fourth node's segment.
pub fn decode_verified<S: Symbol>(
    subset: NodeSubset,
    segments: &[Segment<S>; 3],
    check_node: u8,
    check_segment: &Segment<S>,
    inst: &CodeInstance,
) -> Result<Message<S>> {
    if subset.contains(check_node) || !(1..=NODES as u8).contains(&check_node) {
        return Err(Error::InvalidSubset(format!(
            "verification node {check_node} must be a node outside {subset}"
        )));
    }
    let message = decode(subset, segments, inst)?;
    let codeword = encode(&message, inst);
    if codeword.node(check_node) != check_segment {
        return Err(Error::Inconsistent(format!(
            "node {check_node} does not match the message decoded from nodes {subset}"
        )));
    }
    Ok(message)
}
