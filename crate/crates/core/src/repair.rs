//! Minimum-bandwidth exact repair by interference alignment.
//!
//! A newcomer replacing node `f` downloads one symbol from each of the four
//! survivors. Every repair is viewed in a basis where `f` looks systematic:
//! the basis components are the segments of two *helper* nodes and of `f`
//! itself, and the remaining two survivors are *mixed* nodes whose segments
//! are combinations of all three components.
//!
//! | failed | helpers | mixed  | basis            |
//! |--------|---------|--------|------------------|
//! | 1..=3  | other systematic | 4, 5 | m |
//! | 4      | 1, 2    | 3, 5   | (m1, m2, u4)     |
//! | 5      | 1, 2    | 3, 4   | (m1, m2, u5)     |
//!
//! The mixed nodes each send one combination chosen so that, for every
//! helper component, the two interference rows are collinear. Each helper
//! then sends a single projection of its own segment along that common
//! direction, which cancels the helper's contribution from both mixed
//! symbols. What is left is `R·u_f` with `R` the 2x2 signal matrix.
//!
//! Download vectors for the mixed nodes come from closed forms in the code
//! parameters ([`systematic_repair_vectors`], [`parity1_repair_vectors`],
//! [`parity2_repair_vectors`]); cancellation coefficients are then read off
//! the actual interference rows.

use std::fmt;

use crate::codec::Segment;
use crate::construction::{CodeInstance, CodeParams, ALPHA, DATA_NODES, MESSAGE_SYMBOLS, NODES};
use crate::error::{Error, Result};
use crate::galois::{combine, FieldSpec, Symbol};
use crate::linalg::{Mat, Vec2};

/// Symbols downloaded per repair: one from each of the n − 1 survivors.
pub const REPAIR_BANDWIDTH: usize = NODES - 1;

/// The cut-set lower bound (M/k)·(n−1)/(n−k), when it is a whole number of
/// symbols.
pub fn min_repair_bandwidth(file_symbols: usize, n: usize, k: usize) -> Option<usize> {
    let numer = file_symbols * (n - 1);
    let denom = k * (n - k);
    (denom != 0 && numer % denom == 0).then(|| numer / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairFamily {
    Systematic(u8),
    FirstParity,
    SecondParity,
}

impl RepairFamily {
    pub fn of(node: u8) -> Result<Self> {
        match node {
            1..=3 => Ok(RepairFamily::Systematic(node)),
            4 => Ok(RepairFamily::FirstParity),
            5 => Ok(RepairFamily::SecondParity),
            _ => Err(Error::InvalidSubset(format!("node {node} is not in 1..=5"))),
        }
    }

    /// (helper nodes, mixed nodes).
    pub fn roles(self) -> ([u8; 2], [u8; 2]) {
        match self {
            RepairFamily::Systematic(i) => {
                let mut others = (1..=DATA_NODES as u8).filter(|&j| j != i);
                let helpers = [others.next().unwrap(), others.next().unwrap()];
                (helpers, [4, 5])
            }
            RepairFamily::FirstParity => ([1, 2], [3, 5]),
            RepairFamily::SecondParity => ([1, 2], [3, 4]),
        }
    }
}

/// Download vectors for the two mixed nodes, as derived in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairVectors {
    /// `phi1` goes to node 4 and `phi2` to node 5.
    Systematic { node: u8, phi1: Vec2, phi2: Vec2 },
    /// `phi41` goes to node 3 and `phi42` to node 5.
    FirstParity { phi41: Vec2, phi42: Vec2 },
    /// `phi51` goes to node 3 and `phi52` to node 4, with
    /// `phi5jᵀ = phi5j_primeᵀ·A3ᵀ`. `p` is the scalar that makes the pencil
    /// used to find `phi52_prime` rank-deficient.
    SecondParity {
        p: u8,
        phi51_prime: Vec2,
        phi52_prime: Vec2,
        phi51: Vec2,
        phi52: Vec2,
    },
}

impl RepairVectors {
    /// Vectors for the mixed nodes, in the order of [`RepairFamily::roles`].
    pub fn mixed(&self) -> [Vec2; 2] {
        match *self {
            RepairVectors::Systematic { phi1, phi2, .. } => [phi1, phi2],
            RepairVectors::FirstParity { phi41, phi42 } => [phi41, phi42],
            RepairVectors::SecondParity { phi51, phi52, .. } => [phi51, phi52],
        }
    }
}

/// φ_i2 and φ_i1 for systematic node `i`:
/// i = 3: φ32 = e2, φ31ᵀ = φ32ᵀA1ᵀ;
/// i = 2: φ22 = e1, φ21ᵀ = φ22ᵀA1ᵀ;
/// i = 1: φ12 = e1 + e2, φ11ᵀ = φ12ᵀA2ᵀ.
pub fn systematic_repair_vectors(i: u8, inst: &CodeInstance) -> Result<RepairVectors> {
    let f = inst.field();
    let (phi2, via) = match i {
        3 => (Vec2::E2, 1),
        2 => (Vec2::E1, 1),
        1 => (Vec2::E1.add(f, Vec2::E2), 2),
        _ => return Err(Error::InvalidSubset(format!("node {i} is not systematic"))),
    };
    let phi1 = inst.a(via).mul_vec(phi2)?;
    Ok(RepairVectors::Systematic { node: i, phi1, phi2 })
}

/// φ42 = (λ−1)e1 + (μ−1)e2 and φ41ᵀ = φ42ᵀ(A1ᵀ − A3ᵀ).
pub fn parity1_repair_vectors(inst: &CodeInstance) -> Result<RepairVectors> {
    let f = inst.field();
    let p = inst.params();
    let phi42 = Vec2([f.sub(p.lambda, 1), f.sub(p.mu, 1)]);
    let phi41 = inst.a(1).sub(inst.a(3))?.mul_vec(phi42)?;
    Ok(RepairVectors::FirstParity { phi41, phi42 })
}

/// Second parity vectors:
///
/// 1. p = (μ−1)/(μ−λ);
/// 2. φ'52 spans the kernel of `(A1⁻¹A3 − I) − p(A2⁻¹A3 − I)`, taken as
///    ω = c1·e2 − d1·e1 from the single nonzero row (c1, d1) of that matrix
///    premultiplied by A1;
/// 3. φ'51 = A1⁻¹(A3 − A1)φ'52;
/// 4. the three rank conditions are checked, and φ5j = A3·φ'5j.
pub fn parity2_repair_vectors(inst: &CodeInstance) -> Result<RepairVectors> {
    let f = inst.field();
    let params = inst.params();
    let (a1, a2, a3) = (inst.a(1), inst.a(2), inst.a(3));
    let i2 = Mat::identity(f, ALPHA);

    let p = f
        .div(f.sub(params.mu, 1), f.sub(params.mu, params.lambda))
        .map_err(|_| Error::Alignment("p = (mu-1)/(mu-lambda) is undefined for mu = lambda".into()))?;
    if p == 0 {
        return Err(Error::Alignment("p = (mu-1)/(mu-lambda) is zero".into()));
    }

    let a1_inv = a1.inv2()?;
    let a2_inv = a2.inv2()?;
    let pencil = a1_inv
        .mul(a3)?
        .sub(&i2)?
        .sub(&a2_inv.mul(a3)?.sub(&i2)?.scale(p))?;
    let phi52_prime = a1.mul(&pencil)?.null_vec2().map_err(|e| match e {
        Error::NotRankOne(r) => Error::Alignment(format!(
            "rank((A1^-1 A3 - I) - p(A2^-1 A3 - I)) = {r}, expected 1"
        )),
        other => other,
    })?;
    let phi51_prime = a1_inv.mul(&a3.sub(a1)?)?.mul_vec(phi52_prime)?;

    let conditions = [
        (
            "rank([phi51'^T A1^T; phi52'^T (A3^T - A1^T)]) = 1",
            Vec2::stack(f, a1.mul_vec(phi51_prime)?, a3.sub(a1)?.mul_vec(phi52_prime)?).rank(),
            1,
        ),
        (
            "rank([phi51'^T A2^T; phi52'^T (A3^T - A2^T)]) = 1",
            Vec2::stack(f, a2.mul_vec(phi51_prime)?, a3.sub(a2)?.mul_vec(phi52_prime)?).rank(),
            1,
        ),
        (
            "rank([phi51'^T; phi52'^T]) = 2",
            Vec2::stack(f, phi51_prime, phi52_prime).rank(),
            2,
        ),
    ];
    for (label, rank, expected) in conditions {
        if rank != expected {
            return Err(Error::Alignment(format!("{label} fails (rank {rank})")));
        }
    }

    Ok(RepairVectors::SecondParity {
        p,
        phi51_prime,
        phi52_prime,
        phi51: a3.mul_vec(phi51_prime)?,
        phi52: a3.mul_vec(phi52_prime)?,
    })
}

pub fn repair_vectors(failed: u8, inst: &CodeInstance) -> Result<RepairVectors> {
    match RepairFamily::of(failed)? {
        RepairFamily::Systematic(i) => systematic_repair_vectors(i, inst),
        RepairFamily::FirstParity => parity1_repair_vectors(inst),
        RepairFamily::SecondParity => parity2_repair_vectors(inst),
    }
}

/// The failed node's repair basis: `blocks[k][c]` is the 2x2 coefficient of
/// basis component `c` (helper 0, helper 1, failed) in mixed node `k`.
struct Frame {
    helpers: [u8; 2],
    mixed: [u8; 2],
    blocks: [[Mat; 3]; 2],
}

impl Frame {
    fn new(failed: u8, inst: &CodeInstance) -> Result<Frame> {
        let (helpers, mixed) = RepairFamily::of(failed)?.roles();
        let basis = inst
            .node_rows(helpers[0])
            .vstack(&inst.node_rows(helpers[1]))?
            .vstack(&inst.node_rows(failed))?;
        let to_basis = basis.inverse().map_err(|_| {
            Error::InvalidParams(format!(
                "nodes {}, {}, {failed} do not form a basis; the code is not MDS",
                helpers[0], helpers[1]
            ))
        })?;
        let block = |node: u8, c: usize| -> Result<Mat> {
            inst.node_rows(node).mul(&to_basis)?.block(0, c * ALPHA, ALPHA, ALPHA)
        };
        let blocks = [
            [block(mixed[0], 0)?, block(mixed[0], 1)?, block(mixed[0], 2)?],
            [block(mixed[1], 0)?, block(mixed[1], 1)?, block(mixed[1], 2)?],
        ];
        Ok(Frame {
            helpers,
            mixed,
            blocks,
        })
    }

    /// `rows[k][c] = v_kᵀ · blocks[k][c]`.
    fn rows(&self, vectors: [Vec2; 2]) -> Result<[[Vec2; 3]; 2]> {
        let row = |k: usize, c: usize| self.blocks[k][c].left_mul_vec(vectors[k]);
        Ok([
            [row(0, 0)?, row(0, 1)?, row(0, 2)?],
            [row(1, 0)?, row(1, 1)?, row(1, 2)?],
        ])
    }
}

/// Which mixed symbol's interference direction the helpers project onto.
/// Either works once the rows are aligned; [`HelperSide::First`] is the
/// default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HelperSide {
    #[default]
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Download {
    pub node: u8,
    pub vector: Vec2,
}

/// Everything a newcomer needs to rebuild one node from four downloads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairPlan {
    params: CodeParams,
    failed: u8,
    mixed: [Download; 2],
    helpers: [Download; 2],
    /// `cancel[k][h]` times helper `h`'s symbol is subtracted from mixed
    /// symbol `k`.
    cancel: [[u8; 2]; 2],
    reconstruct: Mat,
    reconstruct_inv: Mat,
    bandwidth: usize,
}

pub fn make_repair_plan(failed: u8, inst: &CodeInstance) -> Result<RepairPlan> {
    make_repair_plan_with(failed, inst, HelperSide::First)
}

pub fn make_repair_plan_with(
    failed: u8,
    inst: &CodeInstance,
    side: HelperSide,
) -> Result<RepairPlan> {
    let vectors = repair_vectors(failed, inst)?.mixed();
    plan_from_vectors(failed, inst, vectors, side)
}

/// Builds a plan around arbitrary mixed-node vectors; fails if they do not
/// align the interference.
pub fn plan_from_vectors(
    failed: u8,
    inst: &CodeInstance,
    vectors: [Vec2; 2],
    side: HelperSide,
) -> Result<RepairPlan> {
    let f = inst.field();
    let frame = Frame::new(failed, inst)?;
    let rows = frame.rows(vectors)?;
    let projecting = match side {
        HelperSide::First => 0,
        HelperSide::Second => 1,
    };

    let mut helpers = [Download {
        node: 0,
        vector: Vec2::default(),
    }; 2];
    let mut cancel = [[0u8; 2]; 2];
    for h in 0..2 {
        let direction = rows[projecting][h];
        if direction.is_zero() {
            return Err(Error::Alignment(format!(
                "interference from node {} vanishes on the projecting symbol",
                frame.helpers[h]
            )));
        }
        let g = direction.normalized(f);
        helpers[h] = Download {
            node: frame.helpers[h],
            vector: g,
        };
        for k in 0..2 {
            cancel[k][h] = rows[k][h].ratio_to(f, g).ok_or_else(|| {
                Error::Alignment(format!(
                    "interference rows from node {} are not aligned (rank 2)",
                    frame.helpers[h]
                ))
            })?;
        }
    }

    let reconstruct = Vec2::stack(f, rows[0][2], rows[1][2]);
    let reconstruct_inv = reconstruct.inv2().map_err(|_| {
        Error::Alignment(format!("signal matrix for node {failed} has rank < 2"))
    })?;
    Ok(RepairPlan {
        params: *inst.params(),
        failed,
        mixed: [
            Download {
                node: frame.mixed[0],
                vector: vectors[0],
            },
            Download {
                node: frame.mixed[1],
                vector: vectors[1],
            },
        ],
        helpers,
        cancel,
        reconstruct,
        reconstruct_inv,
        bandwidth: REPAIR_BANDWIDTH,
    })
}

impl RepairPlan {
    pub fn failed(&self) -> u8 {
        self.failed
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn field(&self) -> FieldSpec {
        self.params.field()
    }

    pub fn mixed(&self) -> &[Download; 2] {
        &self.mixed
    }

    pub fn helpers(&self) -> &[Download; 2] {
        &self.helpers
    }

    pub fn cancel(&self) -> &[[u8; 2]; 2] {
        &self.cancel
    }

    pub fn reconstruct(&self) -> &Mat {
        &self.reconstruct
    }

    /// Number of symbols the plan downloads.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// All four downloads ordered by node id.
    pub fn downloads(&self) -> [Download; 4] {
        let mut all = [self.mixed[0], self.mixed[1], self.helpers[0], self.helpers[1]];
        all.sort_by_key(|d| d.node);
        all
    }

    pub fn download_vector(&self, node: u8) -> Option<Vec2> {
        self.downloads().iter().find(|d| d.node == node).map(|d| d.vector)
    }

    /// The symbol `node` sends: its download vector applied to the segment.
    pub fn helper_symbol<S: Symbol>(&self, node: u8, segment: &Segment<S>) -> Option<S> {
        let v = self.download_vector(node)?;
        Some(combine(self.field(), &v.0, &[&segment[0], &segment[1]]))
    }

    /// Collects the four downloads in node order from a segment lookup.
    pub fn gather<S: Symbol>(&self, mut segment_of: impl FnMut(u8) -> Segment<S>) -> [S; 4] {
        self.downloads().map(|d| {
            let seg = segment_of(d.node);
            combine(self.field(), &d.vector.0, &[&seg[0], &seg[1]])
        })
    }

    /// Replaces the vector sent to `node`, leaving the rest of the plan
    /// untouched. Useful for probing [`verify_alignment`].
    pub fn with_download(mut self, node: u8, vector: Vec2) -> Self {
        for d in self.mixed.iter_mut().chain(self.helpers.iter_mut()) {
            if d.node == node {
                d.vector = vector;
            }
        }
        self
    }

    pub fn with_bandwidth(mut self, bandwidth: usize) -> Self {
        self.bandwidth = bandwidth;
        self
    }

    fn position(&self, node: u8) -> usize {
        self.downloads()
            .iter()
            .position(|d| d.node == node)
            .expect("download for node")
    }
}

/// Rebuilds the failed node's segment from the four downloaded symbols,
/// given in node order (see [`RepairPlan::downloads`]).
pub fn execute_repair<S: Symbol>(plan: &RepairPlan, downloaded: &[S; 4]) -> Segment<S> {
    let f = plan.field();
    let helper_syms = plan.helpers.map(|h| &downloaded[plan.position(h.node)]);
    let cleaned: [S; 2] = std::array::from_fn(|k| {
        let mixed = &downloaded[plan.position(plan.mixed[k].node)];
        combine(
            f,
            &[1, f.neg(plan.cancel[k][0]), f.neg(plan.cancel[k][1])],
            &[mixed, helper_syms[0], helper_syms[1]],
        )
    });
    std::array::from_fn(|r| combine(f, plan.reconstruct_inv.row(r), &[&cleaned[0], &cleaned[1]]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentCheck {
    pub name: String,
    pub expected: usize,
    pub actual: usize,
}

impl AlignmentCheck {
    pub fn passed(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentReport {
    pub failed: u8,
    pub checks: Vec<AlignmentCheck>,
}

impl AlignmentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(AlignmentCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AlignmentCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for AlignmentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {}: expected {}, got {}",
                if c.passed() { "ok  " } else { "FAIL" },
                c.name,
                c.expected,
                c.actual
            )?;
        }
        Ok(())
    }
}

/// Recomputes every alignment condition from the plan's download vectors.
/// Ranks of residuals (e.g. a cancellation that should leave nothing) are
/// reported with an expected rank of 0.
pub fn verify_alignment(plan: &RepairPlan, inst: &CodeInstance) -> AlignmentReport {
    let f = inst.field();
    let mut checks = Vec::new();
    let mut check = |name: String, expected: usize, actual: usize| {
        checks.push(AlignmentCheck {
            name,
            expected,
            actual,
        })
    };

    let optimum = min_repair_bandwidth(MESSAGE_SYMBOLS, NODES, DATA_NODES).unwrap_or(0);
    check("bandwidth (symbols)".into(), optimum, plan.bandwidth);

    let mut surviving: Vec<u8> = plan.downloads().iter().map(|d| d.node).collect();
    surviving.dedup();
    surviving.retain(|&n| n != plan.failed && (1..=NODES as u8).contains(&n));
    check("distinct surviving helpers".into(), NODES - 1, surviving.len());

    let frame = match Frame::new(plan.failed, inst) {
        Ok(frame) => frame,
        Err(_) => {
            check("repair basis rank".into(), MESSAGE_SYMBOLS, 0);
            return AlignmentReport {
                failed: plan.failed,
                checks,
            };
        }
    };
    let vectors = [plan.mixed[0].vector, plan.mixed[1].vector];
    let roles_match = frame.mixed == [plan.mixed[0].node, plan.mixed[1].node]
        && frame.helpers == [plan.helpers[0].node, plan.helpers[1].node];
    check("node roles match the repair family".into(), 1, usize::from(roles_match));
    let rows = frame.rows(vectors).expect("2x2 blocks");

    let signal = Vec2::stack(f, rows[0][2], rows[1][2]);
    check("signal rank".into(), 2, signal.rank());
    for h in 0..2 {
        let node = frame.helpers[h];
        check(
            format!("interference rank from node {node}"),
            1,
            Vec2::stack(f, rows[0][h], rows[1][h]).rank(),
        );
        let g = plan.helpers[h].vector;
        for k in 0..2 {
            let residual = rows[k][h].add(f, g.scale(f, f.neg(plan.cancel[k][h])));
            check(
                format!(
                    "residual after cancelling node {node} from node {}",
                    frame.mixed[k]
                ),
                0,
                residual.to_row(f).rank(),
            );
        }
    }
    check("reconstruct matrix rank".into(), 2, plan.reconstruct.rank());
    check(
        "reconstruct matrix equals signal matrix (residual rank)".into(),
        0,
        plan.reconstruct.sub(&signal).map(|d| d.rank()).unwrap_or(2),
    );
    AlignmentReport {
        failed: plan.failed,
        checks,
    }
}

const MANIFEST_HEADER: &str = "mds53-repair-plan 1";

impl RepairPlan {
    /// Line-oriented text form; coefficient pairs are hex.
    pub fn to_manifest(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(MANIFEST_HEADER.into());
        line(format!("params {}", self.params));
        line(format!("failed {}", self.failed));
        line(format!("bandwidth {}", self.bandwidth));
        for d in &self.mixed {
            line(format!("mixed {} {}", d.node, d.vector.to_hex()));
        }
        for d in &self.helpers {
            line(format!("helper {} {}", d.node, d.vector.to_hex()));
        }
        for k in 0..2 {
            for h in 0..2 {
                line(format!(
                    "cancel {} {} {:02x}",
                    self.mixed[k].node, self.helpers[h].node, self.cancel[k][h]
                ));
            }
        }
        let r = &self.reconstruct;
        line(format!(
            "reconstruct {} {}",
            Vec2([r.get(0, 0), r.get(0, 1)]).to_hex(),
            Vec2([r.get(1, 0), r.get(1, 1)]).to_hex()
        ));
        out
    }

    pub fn from_manifest(text: &str) -> Result<RepairPlan> {
        let bad = |msg: String| Error::Parse(format!("repair manifest: {msg}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        if lines.next() != Some(MANIFEST_HEADER) {
            return Err(bad(format!("missing {MANIFEST_HEADER:?} header")));
        }
        let mut params = None;
        let mut failed = None;
        let mut bandwidth = None;
        let mut mixed = Vec::new();
        let mut helpers = Vec::new();
        let mut cancels = Vec::new();
        let mut reconstruct = None;
        let node = |s: &str| -> Result<u8> {
            s.parse::<u8>()
                .ok()
                .filter(|n| (1..=NODES as u8).contains(n))
                .ok_or_else(|| bad(format!("bad node id {s:?}")))
        };
        for l in lines {
            let fields: Vec<&str> = l.split_whitespace().collect();
            match fields.as_slice() {
                ["params", p] => params = Some(p.parse::<CodeParams>()?),
                ["failed", n] => failed = Some(node(n)?),
                ["bandwidth", b] => {
                    bandwidth = Some(b.parse::<usize>().map_err(|e| bad(format!("{b:?}: {e}")))?)
                }
                ["mixed", n, v] => mixed.push(Download {
                    node: node(n)?,
                    vector: Vec2::from_hex(v)?,
                }),
                ["helper", n, v] => helpers.push(Download {
                    node: node(n)?,
                    vector: Vec2::from_hex(v)?,
                }),
                ["cancel", k, h, c] => cancels.push((
                    node(k)?,
                    node(h)?,
                    u8::from_str_radix(c, 16).map_err(|e| bad(format!("{c:?}: {e}")))?,
                )),
                ["reconstruct", r0, r1] => reconstruct = Some((Vec2::from_hex(r0)?, Vec2::from_hex(r1)?)),
                _ => return Err(bad(format!("unrecognised line {l:?}"))),
            }
        }
        let params = params.ok_or_else(|| bad("missing params".into()))?;
        let failed = failed.ok_or_else(|| bad("missing failed".into()))?;
        let bandwidth = bandwidth.ok_or_else(|| bad("missing bandwidth".into()))?;
        let (r0, r1) = reconstruct.ok_or_else(|| bad("missing reconstruct".into()))?;
        let mixed: [Download; 2] = mixed
            .try_into()
            .map_err(|_| bad("expected exactly two mixed downloads".into()))?;
        let helpers: [Download; 2] = helpers
            .try_into()
            .map_err(|_| bad("expected exactly two helper downloads".into()))?;
        let field = params.field();
        for d in mixed.iter().chain(&helpers) {
            field.check(d.vector.0[0])?;
            field.check(d.vector.0[1])?;
        }
        let mut nodes: Vec<u8> = mixed.iter().chain(&helpers).map(|d| d.node).collect();
        nodes.push(failed);
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.len() != NODES {
            return Err(bad("downloads must name the four surviving nodes".into()));
        }
        let mut cancel = [[None; 2]; 2];
        for (k_node, h_node, c) in cancels {
            let k = mixed.iter().position(|d| d.node == k_node);
            let h = helpers.iter().position(|d| d.node == h_node);
            match (k, h) {
                (Some(k), Some(h)) if cancel[k][h].is_none() => cancel[k][h] = Some(field.check(c)?),
                _ => return Err(bad(format!("bad cancel entry {k_node} {h_node}"))),
            }
        }
        let mut coeffs = [[0u8; 2]; 2];
        for k in 0..2 {
            for h in 0..2 {
                coeffs[k][h] = cancel[k][h].ok_or_else(|| bad("missing cancel entry".into()))?;
            }
        }
        let reconstruct = Mat::from_rows(field, &[r0.0, r1.0])?;
        let reconstruct_inv = reconstruct.inv2().map_err(|_| bad("reconstruct matrix is singular".into()))?;
        Ok(RepairPlan {
            params,
            failed,
            mixed,
            helpers,
            cancel: coeffs,
            reconstruct,
            reconstruct_inv,
            bandwidth,
        })
    }
}
