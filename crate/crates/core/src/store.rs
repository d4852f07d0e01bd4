//! A simulated five-node store on the local filesystem.
//!
//! A file is framed with an 8-byte little-endian length, zero-padded to
//! whole stripes of six symbol blocks and encoded stripe by stripe. Node
//! `i` keeps its two blocks per stripe in `node{i}.seg`, stripe-major, after
//! a fixed header:
//!
//! ```text
//! "MDS53\0" | version u16 | params len u16 | params ASCII
//!           | symbol_size u32 | stripe_count u64 | node_id u8
//! ```
//!
//! All integers are little-endian. `cluster.manifest` lists the layout and
//! the status of every node.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::codec::{decode, encode, Message, NodeSubset, Segment};
use crate::construction::{CodeInstance, CodeParams, ALPHA, DATA_NODES, MESSAGE_SYMBOLS, NODES};
use crate::error::{Error, Result};
use crate::galois::SymbolBlock;
use crate::repair::{execute_repair, make_repair_plan, verify_alignment, RepairPlan};

pub const MAGIC: &[u8; 6] = b"MDS53\0";
pub const FORMAT_VERSION: u16 = 1;
/// Bytes of the original-length prefix placed before the file contents.
pub const LENGTH_PREFIX: usize = 8;
pub const MANIFEST_FILE: &str = "cluster.manifest";
const MANIFEST_HEADER: &str = "mds53-cluster v1";

pub fn node_file_name(node: u8) -> String {
    format!("node{node}.seg")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StripeLayout {
    pub symbol_size: usize,
    pub stripe_count: u64,
    pub original_length: u64,
}

impl StripeLayout {
    pub fn for_length(original_length: u64, symbol_size: usize) -> Result<Self> {
        if symbol_size == 0 {
            return Err(Error::Store("symbol size must be at least 1 byte".into()));
        }
        let framed = original_length + LENGTH_PREFIX as u64;
        let stripe = (MESSAGE_SYMBOLS * symbol_size) as u64;
        Ok(StripeLayout {
            symbol_size,
            stripe_count: framed.div_ceil(stripe),
            original_length,
        })
    }

    pub fn stripe_bytes(&self) -> usize {
        MESSAGE_SYMBOLS * self.symbol_size
    }

    pub fn padded_length(&self) -> u64 {
        self.stripe_count * self.stripe_bytes() as u64
    }

    /// Segment payload bytes held by one healthy node.
    pub fn node_payload(&self) -> u64 {
        self.stripe_count * (ALPHA * self.symbol_size) as u64
    }
}

/// Frames and pads `data` and cuts it into stripes of six blocks.
pub fn ingest(data: &[u8], symbol_size: usize) -> Result<(StripeLayout, Vec<Message<SymbolBlock>>)> {
    let layout = StripeLayout::for_length(data.len() as u64, symbol_size)?;
    let mut framed = Vec::with_capacity(layout.padded_length() as usize);
    framed.extend_from_slice(&(data.len() as u64).to_le_bytes());
    framed.extend_from_slice(data);
    framed.resize(layout.padded_length() as usize, 0);
    let stripes = framed
        .chunks_exact(layout.stripe_bytes())
        .map(|stripe| {
            let mut blocks = stripe.chunks_exact(symbol_size).map(|b| SymbolBlock::new(b.to_vec()));
            Message::from_symbols(std::array::from_fn(|_| blocks.next().expect("six blocks")))
        })
        .collect();
    Ok((layout, stripes))
}

/// Inverse of [`ingest`]: concatenates stripes and strips the framing.
pub fn unframe(layout: &StripeLayout, stripes: &[Message<SymbolBlock>]) -> Result<Vec<u8>> {
    let mut framed = Vec::with_capacity(layout.padded_length() as usize);
    for s in stripes {
        for b in s.symbols() {
            framed.extend_from_slice(b.as_bytes());
        }
    }
    if framed.len() < LENGTH_PREFIX {
        return Err(Error::Store("payload shorter than its length prefix".into()));
    }
    let len = u64::from_le_bytes(framed[..LENGTH_PREFIX].try_into().expect("8 bytes"));
    if len != layout.original_length || LENGTH_PREFIX as u64 + len > framed.len() as u64 {
        return Err(Error::Store(format!(
            "length prefix {len} disagrees with recorded length {}",
            layout.original_length
        )));
    }
    framed.truncate(LENGTH_PREFIX + len as usize);
    framed.drain(..LENGTH_PREFIX);
    Ok(framed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    Systematic,
    Parity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Healthy,
    Failed,
}

impl fmt::Display for NodeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeStatus::Healthy => "healthy",
            NodeStatus::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeStore {
    pub node_id: u8,
    pub status: NodeStatus,
    pub path: PathBuf,
}

impl NodeStore {
    pub fn role(&self) -> NodeRole {
        if usize::from(self.node_id) <= DATA_NODES {
            NodeRole::Systematic
        } else {
            NodeRole::Parity
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeHeader {
    pub params: CodeParams,
    pub symbol_size: u32,
    pub stripe_count: u64,
    pub node_id: u8,
}

impl NodeHeader {
    pub fn to_bytes(&self) -> Vec<u8> {
        let params = self.params.to_string();
        let mut out = Vec::with_capacity(32 + params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(params.len() as u16).to_le_bytes());
        out.extend_from_slice(params.as_bytes());
        out.extend_from_slice(&self.symbol_size.to_le_bytes());
        out.extend_from_slice(&self.stripe_count.to_le_bytes());
        out.push(self.node_id);
        out
    }

    /// Parses a header, returning it with the number of bytes it occupied.
    pub fn parse(bytes: &[u8]) -> Result<(NodeHeader, usize)> {
        let mut pos = 0;
        let mut take = |n: usize| -> Result<&[u8]> {
            let chunk = bytes
                .get(pos..pos + n)
                .ok_or_else(|| Error::Store("node header is truncated".into()))?;
            pos += n;
            Ok(chunk)
        };
        if take(MAGIC.len())? != MAGIC {
            return Err(Error::Store("bad magic in node header".into()));
        }
        let version = u16::from_le_bytes(take(2)?.try_into().expect("2 bytes"));
        if version != FORMAT_VERSION {
            return Err(Error::Store(format!("unsupported node format version {version}")));
        }
        let plen = u16::from_le_bytes(take(2)?.try_into().expect("2 bytes"));
        let params = std::str::from_utf8(take(usize::from(plen))?)
            .map_err(|_| Error::Store("params string is not ASCII".into()))?
            .parse()?;
        let symbol_size = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
        let stripe_count = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        let node_id = take(1)?[0];
        Ok((
            NodeHeader {
                params,
                symbol_size,
                stripe_count,
                node_id,
            },
            pos,
        ))
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Byte counts for one node repair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairReport {
    pub node: u8,
    pub stripes: u64,
    pub symbol_size: usize,
    /// Bytes sent by each helper, in node order.
    pub per_helper: Vec<(u8, u64)>,
    pub downloaded_bytes: u64,
    /// What decoding the whole stripe from three nodes would have moved.
    pub naive_bytes: u64,
    pub rewritten_bytes: u64,
}

#[derive(Debug, Clone)]
pub struct Cluster {
    dir: PathBuf,
    inst: CodeInstance,
    layout: StripeLayout,
    nodes: Vec<NodeStore>,
}

/// Encodes every stripe and writes the five node files and the manifest.
pub fn write_cluster(
    layout: &StripeLayout,
    stripes: &[Message<SymbolBlock>],
    inst: &CodeInstance,
    dir: impl AsRef<Path>,
) -> Result<Cluster> {
    let dir = dir.as_ref();
    if !inst.field().is_gf4() {
        return Err(Error::Store(format!(
            "symbol blocks pack GF(4) elements; cannot store over {}",
            inst.field()
        )));
    }
    if stripes.len() as u64 != layout.stripe_count {
        return Err(Error::Store(format!(
            "layout expects {} stripes, got {}",
            layout.stripe_count,
            stripes.len()
        )));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: Vec<Vec<u8>> = (1..=NODES as u8)
        .map(|node| {
            let mut bytes = header_for(inst, layout, node).to_bytes();
            bytes.reserve(layout.node_payload() as usize);
            bytes
        })
        .collect();
    for stripe in stripes {
        if stripe.symbols().any(|b| b.len() != layout.symbol_size) {
            return Err(Error::Store("stripe block size differs from the layout".into()));
        }
        let cw = encode(stripe, inst);
        for (node, file) in (1..=NODES as u8).zip(files.iter_mut()) {
            for block in cw.node(node) {
                file.extend_from_slice(block.as_bytes());
            }
        }
    }
    let nodes = (1..=NODES as u8)
        .map(|node| NodeStore {
            node_id: node,
            status: NodeStatus::Healthy,
            path: dir.join(node_file_name(node)),
        })
        .collect::<Vec<_>>();
    for (node, bytes) in nodes.iter().zip(&files) {
        write_atomic(&node.path, bytes)?;
    }
    let cluster = Cluster {
        dir: dir.to_path_buf(),
        inst: inst.clone(),
        layout: *layout,
        nodes,
    };
    cluster.save_manifest()?;
    Ok(cluster)
}

/// Ingests `data` and writes it as a new cluster in `dir`.
pub fn store_file(data: &[u8], symbol_size: usize, inst: &CodeInstance, dir: impl AsRef<Path>) -> Result<Cluster> {
    let (layout, stripes) = ingest(data, symbol_size)?;
    write_cluster(&layout, &stripes, inst, dir)
}

fn header_for(inst: &CodeInstance, layout: &StripeLayout, node: u8) -> NodeHeader {
    NodeHeader {
        params: *inst.params(),
        symbol_size: layout.symbol_size as u32,
        stripe_count: layout.stripe_count,
        node_id: node,
    }
}

impl Cluster {
    pub fn open(dir: impl AsRef<Path>) -> Result<Cluster> {
        let dir = dir.as_ref();
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let bad = |msg: String| Error::Store(format!("{}: {msg}", path.display()));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some(MANIFEST_HEADER) {
            return Err(bad(format!("missing {MANIFEST_HEADER:?} header")));
        }
        let (mut params, mut symbol_size, mut stripe_count, mut original_length) = (None, None, None, None);
        let mut nodes = Vec::new();
        let num = |s: &str| s.parse::<u64>().map_err(|e| bad(format!("{s:?}: {e}")));
        for l in lines {
            let fields: Vec<&str> = l.split_whitespace().collect();
            match fields.as_slice() {
                ["params", p] => params = Some(p.parse::<CodeParams>()?),
                ["symbol_size", v] => symbol_size = Some(num(v)? as usize),
                ["stripe_count", v] => stripe_count = Some(num(v)?),
                ["original_length", v] => original_length = Some(num(v)?),
                ["node", id, file, status] => {
                    let node_id = id.parse::<u8>().map_err(|e| bad(format!("{id:?}: {e}")))?;
                    if usize::from(node_id) != nodes.len() + 1 {
                        return Err(bad(format!("node {node_id} listed out of order")));
                    }
                    let status = match *status {
                        "healthy" => NodeStatus::Healthy,
                        "failed" => NodeStatus::Failed,
                        other => return Err(bad(format!("unknown node status {other:?}"))),
                    };
                    nodes.push(NodeStore {
                        node_id,
                        status,
                        path: dir.join(file),
                    });
                }
                _ => return Err(bad(format!("unrecognised line {l:?}"))),
            }
        }
        let missing = |what: &str| bad(format!("missing {what}"));
        if nodes.len() != NODES {
            return Err(bad(format!("expected {NODES} nodes, found {}", nodes.len())));
        }
        let layout = StripeLayout {
            symbol_size: symbol_size.ok_or_else(|| missing("symbol_size"))?,
            stripe_count: stripe_count.ok_or_else(|| missing("stripe_count"))?,
            original_length: original_length.ok_or_else(|| missing("original_length"))?,
        };
        if layout != StripeLayout::for_length(layout.original_length, layout.symbol_size)? {
            return Err(bad("stripe count does not fit the original length".into()));
        }
        let inst = CodeInstance::new(params.ok_or_else(|| missing("params"))?)?;
        if !inst.field().is_gf4() {
            return Err(bad(format!("clusters are stored over GF(4), not {}", inst.field())));
        }
        Ok(Cluster {
            dir: dir.to_path_buf(),
            inst,
            layout,
            nodes,
        })
    }

    pub fn save_manifest(&self) -> Result<()> {
        let mut text = format!(
            "{MANIFEST_HEADER}\nparams {}\nsymbol_size {}\nstripe_count {}\noriginal_length {}\n",
            self.inst.params(),
            self.layout.symbol_size,
            self.layout.stripe_count,
            self.layout.original_length
        );
        for n in &self.nodes {
            let file = n.path.file_name().and_then(|f| f.to_str()).unwrap_or_default();
            text.push_str(&format!("node {} {} {}\n", n.node_id, file, n.status));
        }
        write_atomic(&self.dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn instance(&self) -> &CodeInstance {
        &self.inst
    }

    pub fn layout(&self) -> &StripeLayout {
        &self.layout
    }

    pub fn nodes(&self) -> &[NodeStore] {
        &self.nodes
    }

    pub fn node(&self, id: u8) -> Result<&NodeStore> {
        check_node(id)?;
        Ok(&self.nodes[usize::from(id) - 1])
    }

    /// Reads and validates a node file against the cluster layout.
    pub fn read_node(&self, id: u8) -> Result<Vec<Segment<SymbolBlock>>> {
        let node = self.node(id)?;
        if node.status == NodeStatus::Failed {
            return Err(Error::Store(format!("node {id} is marked failed")));
        }
        let bytes = fs::read(&node.path).map_err(|e| Error::io(&node.path, e))?;
        let (header, offset) = NodeHeader::parse(&bytes)
            .map_err(|e| Error::Store(format!("{}: {e}", node.path.display())))?;
        let expected = header_for(&self.inst, &self.layout, id);
        if header != expected {
            return Err(Error::Store(format!(
                "{}: header {header:?} disagrees with the cluster manifest",
                node.path.display()
            )));
        }
        let payload = &bytes[offset..];
        if payload.len() as u64 != self.layout.node_payload() {
            return Err(Error::Store(format!(
                "{}: expected {} payload bytes, found {}",
                node.path.display(),
                self.layout.node_payload(),
                payload.len()
            )));
        }
        let ss = self.layout.symbol_size;
        Ok(payload
            .chunks_exact(ALPHA * ss)
            .map(|seg| [SymbolBlock::new(seg[..ss].to_vec()), SymbolBlock::new(seg[ss..].to_vec())])
            .collect())
    }

    /// Nodes that are marked healthy and whose files pass validation.
    pub fn available_nodes(&self) -> Vec<u8> {
        (1..=NODES as u8).filter(|&n| self.read_node(n).is_ok()).collect()
    }

    /// Truncates the node file to zero bytes and marks it failed.
    pub fn fail_node(&mut self, id: u8) -> Result<()> {
        check_node(id)?;
        let node = &mut self.nodes[usize::from(id) - 1];
        fs::File::create(&node.path).map_err(|e| Error::io(&node.path, e))?;
        node.status = NodeStatus::Failed;
        self.save_manifest()
    }

    pub fn repair_node(&mut self, id: u8) -> Result<RepairReport> {
        let plan = make_repair_plan(id, &self.inst)?;
        self.repair_node_with_plan(&plan)
    }

    /// Rebuilds one node from one combined block per stripe from each of the
    /// other four. Each helper applies its download vector locally, so only
    /// the combined block counts as traffic. Repairing a healthy node
    /// rewrites identical bytes.
    pub fn repair_node_with_plan(&mut self, plan: &RepairPlan) -> Result<RepairReport> {
        let id = plan.failed();
        check_node(id)?;
        if plan.params() != self.inst.params() {
            return Err(Error::InvalidParams(format!(
                "plan is for {}, cluster uses {}",
                plan.params(),
                self.inst.params()
            )));
        }
        let report = verify_alignment(plan, &self.inst);
        if !report.passed() {
            return Err(Error::Alignment(format!("repair plan rejected:\n{report}")));
        }
        let helpers: Vec<u8> = (1..=NODES as u8).filter(|&n| n != id).collect();
        let mut segments = Vec::with_capacity(helpers.len());
        let mut unavailable = Vec::new();
        for &h in &helpers {
            match self.read_node(h) {
                Ok(s) => segments.push(s),
                Err(_) => unavailable.push(h),
            }
        }
        if !unavailable.is_empty() {
            let mut failed = unavailable;
            failed.push(id);
            failed.sort_unstable();
            return Err(Error::TooManyFailures { failed });
        }

        let ss = self.layout.symbol_size;
        let stripes = self.layout.stripe_count as usize;
        let mut payload = header_for(&self.inst, &self.layout, id).to_bytes();
        payload.reserve(self.layout.node_payload() as usize);
        let mut per_helper: Vec<(u8, u64)> = helpers.iter().map(|&h| (h, 0)).collect();
        for s in 0..stripes {
            // what each helper puts on the wire for this stripe
            let sent: Vec<SymbolBlock> = helpers
                .iter()
                .zip(&segments)
                .map(|(&h, segs)| plan.helper_symbol(h, &segs[s]).expect("plan covers every helper"))
                .collect();
            for (count, block) in per_helper.iter_mut().zip(&sent) {
                count.1 += block.len() as u64;
            }
            let downloaded: [SymbolBlock; 4] = sent.try_into().expect("four helpers");
            for block in execute_repair(plan, &downloaded) {
                payload.extend_from_slice(block.as_bytes());
            }
        }

        let node = &mut self.nodes[usize::from(id) - 1];
        write_atomic(&node.path, &payload)?;
        node.status = NodeStatus::Healthy;
        self.save_manifest()?;
        let downloaded_bytes = per_helper.iter().map(|(_, b)| b).sum();
        Ok(RepairReport {
            node: id,
            stripes: self.layout.stripe_count,
            symbol_size: ss,
            per_helper,
            downloaded_bytes,
            naive_bytes: (MESSAGE_SYMBOLS * ss * stripes) as u64,
            rewritten_bytes: self.layout.node_payload(),
        })
    }

    /// Decodes the file from three nodes, or from the first three available
    /// ones when `nodes` is `None`.
    pub fn reconstruct_file(&self, nodes: Option<[u8; 3]>) -> Result<Vec<u8>> {
        let subset = match nodes {
            Some(n) => NodeSubset::new(n)?,
            None => {
                let available = self.available_nodes();
                if available.len() < DATA_NODES {
                    return Err(Error::Store(format!(
                        "only nodes {available:?} are available; at least {DATA_NODES} are needed"
                    )));
                }
                NodeSubset::new([available[0], available[1], available[2]])?
            }
        };
        let [a, b, c] = subset.nodes();
        let (sa, sb, sc) = (self.read_node(a)?, self.read_node(b)?, self.read_node(c)?);
        let stripes = sa
            .into_iter()
            .zip(sb)
            .zip(sc)
            .map(|((x, y), z)| decode(subset, &[x, y, z], &self.inst))
            .collect::<Result<Vec<_>>>()?;
        unframe(&self.layout, &stripes)
    }
}

fn check_node(id: u8) -> Result<()> {
    if (1..=NODES as u8).contains(&id) {
        Ok(())
    } else {
        Err(Error::InvalidSubset(format!("node {id} is not in 1..={NODES}")))
    }
}
