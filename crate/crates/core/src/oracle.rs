//! Exhaustive checks that do not rely on the closed forms in
//! [`crate::codec`] or [`crate::repair`]. They are only feasible for small
//! fields and exist to cross-check the fast paths.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use crate::codec::NodeSubset;
use crate::construction::{CodeInstance, CodeParams, Condition, ALPHA, MESSAGE_SYMBOLS, NODES};
use crate::error::{Error, Result};
use crate::galois::FieldSpec;
use crate::linalg::{Mat, Vec2};
use crate::repair::RepairFamily;

/// Largest field for which every message is enumerated.
pub const MAX_MDS_ORDER: u16 = 8;
/// Largest field for which repair vectors are searched.
pub const MAX_SEARCH_ORDER: u16 = 4;
/// Largest field for which the parameter space is enumerated.
pub const MAX_CENSUS_ORDER: u16 = 16;

fn too_large(what: &str, field: FieldSpec, max: u16) -> Error {
    Error::InvalidField(format!("{what} over {field} is infeasible (limit GF({max}))"))
}

fn messages(field: FieldSpec) -> impl Iterator<Item = [u8; MESSAGE_SYMBOLS]> {
    let q = u32::from(field.order());
    (0..q.pow(MESSAGE_SYMBOLS as u32)).map(move |mut index| {
        let mut digits = [0u8; MESSAGE_SYMBOLS];
        for d in digits.iter_mut().rev() {
            *d = (index % q) as u8;
            index /= q;
        }
        digits
    })
}

fn apply_row(field: FieldSpec, row: &[u8], m: &[u8; MESSAGE_SYMBOLS]) -> u8 {
    row.iter().zip(m).fold(0, |acc, (&g, &x)| field.add(acc, field.mul(g, x)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetCheck {
    pub subset: NodeSubset,
    /// Distinct six-symbol restrictions seen over all messages.
    pub distinct: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdsReport {
    pub field: FieldSpec,
    pub messages: usize,
    pub subsets: Vec<SubsetCheck>,
}

impl MdsReport {
    pub fn is_mds(&self) -> bool {
        self.subsets.iter().all(|s| s.distinct == self.messages)
    }

    pub fn failing(&self) -> impl Iterator<Item = NodeSubset> + '_ {
        self.subsets
            .iter()
            .filter(|s| s.distinct != self.messages)
            .map(|s| s.subset)
    }
}

pub fn brute_force_mds(inst: &CodeInstance) -> Result<MdsReport> {
    brute_force_mds_generator(inst.generator())
}

/// Encodes every message with a 10x6 generator and checks that each
/// three-node restriction is injective.
pub fn brute_force_mds_generator(generator: &Mat) -> Result<MdsReport> {
    let field = generator.field();
    if field.order() > MAX_MDS_ORDER {
        return Err(too_large("MDS enumeration", field, MAX_MDS_ORDER));
    }
    if generator.rows() != NODES * ALPHA || generator.cols() != MESSAGE_SYMBOLS {
        return Err(Error::Dimension(format!(
            "expected a 10x6 generator, got {}x{}",
            generator.rows(),
            generator.cols()
        )));
    }
    let words: Vec<[u8; 10]> = messages(field)
        .map(|m| std::array::from_fn(|r| apply_row(field, generator.row(r), &m)))
        .collect();
    let subsets = NodeSubset::all()
        .map(|subset| {
            let rows: Vec<usize> = subset
                .nodes()
                .iter()
                .flat_map(|&n| {
                    let r0 = (usize::from(n) - 1) * ALPHA;
                    [r0, r0 + 1]
                })
                .collect();
            let seen: HashSet<u64> = words
                .iter()
                .map(|w| rows.iter().fold(0u64, |key, &r| key << 8 | u64::from(w[r])))
                .collect();
            SubsetCheck {
                subset,
                distinct: seen.len(),
            }
        })
        .collect();
    Ok(MdsReport {
        field,
        messages: words.len(),
        subsets,
    })
}

/// Rows `(v1ᵀX_j, v2ᵀY_j)` for the interference from each of the two helper
/// components, and the signal pair, written straight from how the mixed
/// nodes depend on the helper and failed segments.
fn rank_systems(failed: u8, inst: &CodeInstance, v1: Vec2, v2: Vec2) -> Result<([Mat; 2], Mat)> {
    let f = inst.field();
    let t = |j: usize| inst.a(j).transpose();
    let i2 = Mat::identity(f, ALPHA);
    let row = |v: Vec2, m: &Mat| m.left_mul_vec(v);
    let pair = |a: Vec2, b: Vec2| Vec2::stack(f, a, b);
    match RepairFamily::of(failed)? {
        // node 4 = Σ m_j, node 5 = Σ A_jᵀ m_j
        RepairFamily::Systematic(i) => {
            let (helpers, _) = RepairFamily::Systematic(i).roles();
            let interference = [
                pair(v1, row(v2, &t(usize::from(helpers[0])))?),
                pair(v1, row(v2, &t(usize::from(helpers[1])))?),
            ];
            Ok((interference, pair(v1, row(v2, &t(usize::from(i)))?)))
        }
        // m3 = u4 − m1 − m2: node 3 = −m1 − m2 + u4,
        // node 5 = (A1ᵀ − A3ᵀ)m1 + (A2ᵀ − A3ᵀ)m2 + A3ᵀu4
        RepairFamily::FirstParity => {
            let interference = [
                pair(v1, row(v2, &t(1).sub(&t(3))?)?),
                pair(v1, row(v2, &t(2).sub(&t(3))?)?),
            ];
            Ok((interference, pair(v1, row(v2, &t(3))?)))
        }
        // m3 = A3⁻ᵀ(u5 − A1ᵀm1 − A2ᵀm2): node 3 = −A3⁻ᵀA1ᵀm1 − A3⁻ᵀA2ᵀm2 + A3⁻ᵀu5,
        // node 4 = (I − A3⁻ᵀA1ᵀ)m1 + (I − A3⁻ᵀA2ᵀ)m2 + A3⁻ᵀu5
        RepairFamily::SecondParity => {
            let b = t(3).inv2()?;
            let via = |j: usize| b.mul(&t(j));
            let interference = [
                pair(row(v1, &via(1)?)?, row(v2, &i2.sub(&via(1)?)?)?),
                pair(row(v1, &via(2)?)?, row(v2, &i2.sub(&via(2)?)?)?),
            ];
            Ok((interference, pair(row(v1, &b)?, row(v2, &b)?)))
        }
    }
}

/// True when some pair of helper vectors makes the failed segment a function of
/// the four downloads. By linearity that holds exactly when every message
/// whose downloads are all zero also has a zero failed segment.
fn repairable_by_enumeration(failed: u8, inst: &CodeInstance, mixed: [(u8, Vec2); 2]) -> bool {
    let f = inst.field();
    let (helpers, _) = RepairFamily::of(failed).expect("node in range").roles();
    let rows = |n: u8| inst.node_rows(n);
    // vᵀ applied to a node's two generator rows
    let dl = |n: u8, v: Vec2| -> Vec<u8> {
        let g = rows(n);
        (0..MESSAGE_SYMBOLS)
            .map(|c| f.add(f.mul(v.0[0], g.get(0, c)), f.mul(v.0[1], g.get(1, c))))
            .collect()
    };
    let mixed_rows = [dl(mixed[0].0, mixed[0].1), dl(mixed[1].0, mixed[1].1)];
    let failed_rows = rows(failed);
    let nonzero: Vec<Vec2> = f
        .elements()
        .flat_map(|a| f.elements().map(move |b| Vec2([a, b])))
        .filter(|v| !v.is_zero())
        .collect();
    // the kernel of the mixed downloads, shared by every helper choice
    let kernel: Vec<[u8; MESSAGE_SYMBOLS]> = messages(f)
        .filter(|m| mixed_rows.iter().all(|r| apply_row(f, r, m) == 0))
        .collect();
    nonzero.iter().any(|&g0| {
        let h0 = dl(helpers[0], g0);
        nonzero.iter().any(|&g1| {
            let h1 = dl(helpers[1], g1);
            kernel.iter().all(|m| {
                apply_row(f, &h0, m) != 0
                    || apply_row(f, &h1, m) != 0
                    || (apply_row(f, failed_rows.row(0), m) == 0
                        && apply_row(f, failed_rows.row(1), m) == 0)
            })
        })
    })
}

/// Every pair of nonzero mixed-node vectors that satisfies the rank system
/// for `failed` and, checked by enumeration, actually permits exact repair
/// from four symbols.
pub fn brute_force_repair_search(failed: u8, inst: &CodeInstance) -> Result<BTreeSet<(Vec2, Vec2)>> {
    let f = inst.field();
    if f.order() > MAX_SEARCH_ORDER {
        return Err(too_large("repair search", f, MAX_SEARCH_ORDER));
    }
    let (_, mixed_nodes) = RepairFamily::of(failed)?.roles();
    let nonzero: Vec<Vec2> = f
        .elements()
        .flat_map(|a| f.elements().map(move |b| Vec2([a, b])))
        .filter(|v| !v.is_zero())
        .collect();
    let mut found = BTreeSet::new();
    for &v1 in &nonzero {
        for &v2 in &nonzero {
            let (interference, signal) = rank_systems(failed, inst, v1, v2)?;
            if signal.rank() != 2 || interference.iter().any(|m| m.rank() != 1) {
                continue;
            }
            if repairable_by_enumeration(failed, inst, [(mixed_nodes[0], v1), (mixed_nodes[1], v2)]) {
                found.insert((v1, v2));
            }
        }
    }
    Ok(found)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamCensus {
    pub field: FieldSpec,
    pub total: usize,
    pub valid: Vec<CodeParams>,
    /// Tuples violating each condition, in label order.
    pub violations: Vec<(Condition, usize)>,
}

impl ParamCensus {
    pub fn count(&self) -> usize {
        self.valid.len()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# valid (lambda, mu, theta, eta) over {}", self.field);
        let _ = writeln!(out, "field {}", self.field.order());
        let _ = writeln!(out, "total {}", self.total);
        let _ = writeln!(out, "valid {}", self.valid.len());
        for (c, n) in &self.violations {
            let _ = writeln!(out, "violates {} {}", c.label(), n);
        }
        for p in &self.valid {
            let _ = writeln!(out, "params {p}");
        }
        out
    }
}

/// Every (λ, μ, θ, η) over `field` in lexicographic order.
pub fn param_tuples(field: FieldSpec) -> impl Iterator<Item = CodeParams> {
    let q = u64::from(field.order());
    (0..q.pow(4)).map(move |i| {
        let d = |k: u32| (i / q.pow(3 - k) % q) as u8;
        CodeParams::new(field, d(0), d(1), d(2), d(3)).expect("elements in range")
    })
}

/// The lexicographically first valid tuple; cheap even for GF(256).
pub fn first_valid_params(field: FieldSpec) -> Option<CodeParams> {
    param_tuples(field).find(CodeParams::is_valid)
}

pub fn enumerate_valid_params(field: FieldSpec) -> Result<ParamCensus> {
    if field.order() > MAX_CENSUS_ORDER {
        return Err(too_large("parameter census", field, MAX_CENSUS_ORDER));
    }
    let mut counts = [0usize; 10];
    let mut valid = Vec::new();
    let mut total = 0;
    for p in param_tuples(field) {
        total += 1;
        let violated = p.check_conditions();
        for c in &violated {
            counts[Condition::ALL.iter().position(|x| x == c).expect("listed")] += 1;
        }
        if violated.is_empty() {
            valid.push(p);
        }
    }
    Ok(ParamCensus {
        field,
        total,
        valid,
        violations: Condition::ALL.iter().copied().zip(counts).collect(),
    })
}
