//! Byte encoding of vector diagrams for rank-to-rank transfer.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "DDQW"  u16 version  u16 qubits  u32 node_count
//! node_count x { u16 level, 2 x { u32 target, f64 re, f64 im } }
//! root: u32 target, f64 re, f64 im
//! ```
//!
//! Nodes appear children first (post-order, child 0 before child 1), so
//! every `target` names an earlier node; `0xFFFF_FFFF` is the terminal.

use rustc_hash::FxHashMap;

use crate::dd::{Edge, NodeId, Package, VecEdge};
use crate::error::WireError;
use crate::numerics::Complex;

pub const MAGIC: &[u8; 4] = b"DDQW";
pub const VERSION: u16 = 1;
const TERMINAL: u32 = u32::MAX;
const HEADER_LEN: usize = 12;
const EDGE_LEN: usize = 20;
const NODE_LEN: usize = 2 + 2 * EDGE_LEN;

/// Encodes `v` deterministically.
pub fn encode(pkg: &Package, v: VecEdge) -> Result<Vec<u8>, WireError> {
    let qubits = pkg.qubits(v).unwrap_or(0);
    let qubits = u16::try_from(qubits).map_err(|_| WireError::Capacity(format!("{qubits} qubits")))?;
    let mut order: FxHashMap<NodeId, u32> = FxHashMap::default();
    let mut body = Vec::new();
    if !v.is_zero() {
        // iterative post-order walk
        let mut stack: Vec<(NodeId, bool)> = vec![(v.node, false)];
        while let Some((id, expanded)) = stack.pop() {
            if id.is_terminal() || order.contains_key(&id) {
                continue;
            }
            let e = VecEdge {
                weight: crate::ONE,
                node: id,
            };
            let children = [pkg.child(e, 0), pkg.child(e, 1)];
            if !expanded {
                stack.push((id, true));
                for c in children.iter().rev() {
                    if !c.node.is_terminal() && !order.contains_key(&c.node) {
                        stack.push((c.node, false));
                    }
                }
                continue;
            }
            let ordinal = u32::try_from(order.len())
                .ok()
                .filter(|&o| o != TERMINAL)
                .ok_or_else(|| WireError::Capacity("too many nodes".into()))?;
            let level = pkg.level(e) as u16;
            body.extend_from_slice(&level.to_le_bytes());
            for c in children {
                put_edge(&mut body, c, &order);
            }
            order.insert(id, ordinal);
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN + body.len() + EDGE_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&qubits.to_le_bytes());
    out.extend_from_slice(&(order.len() as u32).to_le_bytes());
    out.extend_from_slice(&body);
    put_edge(&mut out, v, &order);
    Ok(out)
}

fn put_edge(out: &mut Vec<u8>, e: VecEdge, order: &FxHashMap<NodeId, u32>) {
    let target = if e.node.is_terminal() { TERMINAL } else { order[&e.node] };
    out.extend_from_slice(&target.to_le_bytes());
    out.extend_from_slice(&e.weight.re.to_le_bytes());
    out.extend_from_slice(&e.weight.im.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N], WireError> {
        let end = self.pos + N;
        let slice = self.bytes.get(self.pos..end).ok_or_else(|| WireError::Decode {
            offset: self.pos,
            message: format!("truncated while reading {what}"),
        })?;
        self.pos = end;
        Ok(slice.try_into().expect("slice length"))
    }

    fn u16(&mut self, what: &str) -> Result<u16, WireError> {
        self.take::<2>(what).map(u16::from_le_bytes)
    }

    fn u32(&mut self, what: &str) -> Result<u32, WireError> {
        self.take::<4>(what).map(u32::from_le_bytes)
    }

    fn f64(&mut self, what: &str) -> Result<f64, WireError> {
        self.take::<8>(what).map(f64::from_le_bytes)
    }
}

fn decode_err(offset: usize, message: impl Into<String>) -> WireError {
    WireError::Decode {
        offset,
        message: message.into(),
    }
}

/// Rebuilds an encoded diagram inside `pkg` through canonical construction.
pub fn decode(pkg: &mut Package, bytes: &[u8]) -> Result<VecEdge, WireError> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<4>("magic")? != MAGIC {
        return Err(decode_err(0, "bad magic"));
    }
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(decode_err(4, format!("unsupported version {version}")));
    }
    let qubits = r.u16("qubit count")? as i32;
    let count = r.u32("node count")? as usize;
    let needed = count.saturating_mul(NODE_LEN).saturating_add(HEADER_LEN + EDGE_LEN);
    if needed > bytes.len() {
        return Err(decode_err(
            bytes.len(),
            format!("truncated: {count} nodes need {needed} bytes"),
        ));
    }
    let mut built: Vec<VecEdge> = Vec::with_capacity(count);
    for _ in 0..count {
        let at = r.pos;
        let level = r.u16("node level")? as u32;
        let a = read_edge(&mut r, &built)?;
        let b = read_edge(&mut r, &built)?;
        let e = pkg
            .make_vec_node(level, [a, b])
            .map_err(|e| decode_err(at, format!("node at level {level}: {e}")))?;
        built.push(e);
    }
    let at = r.pos;
    let root = read_edge(&mut r, &built)?;
    if r.pos != bytes.len() {
        return Err(decode_err(r.pos, format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    if !root.is_zero() && pkg.level(root) != qubits - 1 {
        return Err(decode_err(
            at,
            format!("root covers {} qubits, header says {qubits}", pkg.level(root) + 1),
        ));
    }
    Ok(pkg.scale(root, crate::ONE))
}

fn read_edge(r: &mut Reader<'_>, built: &[VecEdge]) -> Result<VecEdge, WireError> {
    let at = r.pos;
    let target = r.u32("edge target")?;
    let w = Complex::new(r.f64("weight")?, r.f64("weight")?);
    if !w.re.is_finite() || !w.im.is_finite() {
        return Err(decode_err(at + 4, "non-finite weight"));
    }
    if target == TERMINAL {
        return Ok(Edge::terminal(w));
    }
    let node = built
        .get(target as usize)
        .ok_or_else(|| decode_err(at, format!("reference to node {target} not yet defined")))?;
    if node.is_zero() {
        return Ok(Edge::zero());
    }
    Ok(Edge {
        weight: w * node.weight,
        node: node.node,
    })
}
