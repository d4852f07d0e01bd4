//! Code parameters, the coefficient matrices A1/A2/A3 and the 10x6
//! generator.
//!
//! A parameter tuple (λ, μ, θ, η) fixes
//!
//! ```text
//! A1 = [θ 0; η 1]   A2 = (1/λ)[θ−1 0; η 1]   A3 = (1/μ)[θ −1; η 1]
//! ```
//!
//! and the generator stacks `I` blocks for the three systematic nodes,
//! `[I I I]` for the first parity node and `[A1ᵀ A2ᵀ A3ᵀ]` for the second.
//! Ten conditions on the tuple (labelled "6a".."6j") make the code MDS and
//! every node optimally repairable.

use std::fmt;
use std::str::FromStr;

use crate::codec::{self, DecodeSpec, NodeSubset};
use crate::error::{Error, Result};
use crate::galois::FieldSpec;
use crate::linalg::Mat;

pub const NODES: usize = 5;
pub const DATA_NODES: usize = 3;
/// Symbols per node per stripe.
pub const ALPHA: usize = 2;
/// Symbols per stripe, k·α.
pub const MESSAGE_SYMBOLS: usize = DATA_NODES * ALPHA;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeParams {
    field: FieldSpec,
    pub lambda: u8,
    pub mu: u8,
    pub theta: u8,
    pub eta: u8,
}

/// One of the ten validity conditions on a parameter tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    /// λ ∉ {0, 1}
    Lambda,
    /// μ ∉ {λ, 0, 1}
    Mu,
    /// θ ∉ {0, 1}
    Theta,
    /// η ∉ {0, −1}
    Eta,
    /// θ + η ≠ 0
    ThetaPlusEta,
    /// θ(1 − λ) ≠ 1
    ThetaOneMinusLambda,
    /// θ(μ − 1) ≠ η
    ThetaMuMinusOne,
    /// θ(μ − λ) ≠ ηλ + μ
    ThetaMuMinusLambda,
    /// μ − 1 ≠ η(1 − λ)
    MuMinusOne,
    /// η + 1 ≠ η(θ − 1)(μ − λ) / (θλ(μ − 1))
    EtaPlusOne,
}

impl Condition {
    pub const ALL: [Condition; 10] = [
        Condition::Lambda,
        Condition::Mu,
        Condition::Theta,
        Condition::Eta,
        Condition::ThetaPlusEta,
        Condition::ThetaOneMinusLambda,
        Condition::ThetaMuMinusOne,
        Condition::ThetaMuMinusLambda,
        Condition::MuMinusOne,
        Condition::EtaPlusOne,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Condition::Lambda => "6a",
            Condition::Mu => "6b",
            Condition::Theta => "6c",
            Condition::Eta => "6d",
            Condition::ThetaPlusEta => "6e",
            Condition::ThetaOneMinusLambda => "6f",
            Condition::ThetaMuMinusOne => "6g",
            Condition::ThetaMuMinusLambda => "6h",
            Condition::MuMinusOne => "6i",
            Condition::EtaPlusOne => "6j",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl CodeParams {
    pub fn new(field: FieldSpec, lambda: u8, mu: u8, theta: u8, eta: u8) -> Result<Self> {
        for v in [lambda, mu, theta, eta] {
            field.check(v)?;
        }
        Ok(CodeParams {
            field,
            lambda,
            mu,
            theta,
            eta,
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Violated conditions in label order; empty iff the tuple is valid.
    pub fn check_conditions(&self) -> Vec<Condition> {
        let f = self.field;
        let (l, m, t, e) = (self.lambda, self.mu, self.theta, self.eta);
        let one = 1u8;
        let mut violated = Vec::new();
        let mut require = |ok: bool, c: Condition| {
            if !ok {
                violated.push(c);
            }
        };

        require(l != 0 && l != one, Condition::Lambda);
        require(m != l && m != 0 && m != one, Condition::Mu);
        require(t != 0 && t != one, Condition::Theta);
        require(e != 0 && e != f.neg(one), Condition::Eta);
        require(f.add(t, e) != 0, Condition::ThetaPlusEta);
        require(f.mul(t, f.sub(one, l)) != one, Condition::ThetaOneMinusLambda);
        require(f.mul(t, f.sub(m, one)) != e, Condition::ThetaMuMinusOne);
        require(
            f.mul(t, f.sub(m, l)) != f.add(f.mul(e, l), m),
            Condition::ThetaMuMinusLambda,
        );
        require(f.sub(m, one) != f.mul(e, f.sub(one, l)), Condition::MuMinusOne);

        // The last condition divides by θλ(μ − 1); it is only evaluated once
        // the denominator is known to be nonzero.
        let denom = f.mul(t, f.mul(l, f.sub(m, one)));
        if denom != 0 {
            let numer = f.mul(e, f.mul(f.sub(t, one), f.sub(m, l)));
            let rhs = f.div(numer, denom).expect("nonzero denominator");
            require(f.add(e, one) != rhs, Condition::EtaPlusOne);
        }
        violated
    }

    pub fn is_valid(&self) -> bool {
        self.check_conditions().is_empty()
    }
}

/// η = λ = w and θ = μ = w + 1 over GF(4).
pub fn canonical_params(field: FieldSpec) -> Result<CodeParams> {
    if !field.is_gf4() {
        return Err(Error::InvalidParams(format!(
            "the canonical tuple is defined over GF(4) with w^2+w+1, not {field} (poly {:#x}); \
             enumerate the census instead",
            field.poly()
        )));
    }
    let (w, w1) = (2, 3);
    CodeParams::new(field, w, w1, w1, w)
}

impl Default for CodeParams {
    fn default() -> Self {
        canonical_params(FieldSpec::GF4).expect("GF(4) is canonical")
    }
}

/// `q=4;poly=0x7;lambda=2;mu=3;theta=3;eta=2`
impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "q={};poly={:#x};lambda={};mu={};theta={};eta={}",
            self.field.order(),
            self.field.poly(),
            self.lambda,
            self.mu,
            self.theta,
            self.eta
        )
    }
}

impl FromStr for CodeParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut q = None;
        let mut poly = None;
        let mut vals = [None; 4];
        for part in s.trim().split(';').filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {part:?}")))?;
            let value = value.trim();
            let parsed = parse_int(value)?;
            let slot = match key.trim() {
                "q" => &mut q,
                "poly" => &mut poly,
                "lambda" => &mut vals[0],
                "mu" => &mut vals[1],
                "theta" => &mut vals[2],
                "eta" => &mut vals[3],
                other => return Err(Error::Parse(format!("unknown parameter key {other:?}"))),
            };
            if slot.replace(parsed).is_some() {
                return Err(Error::Parse(format!("duplicate key {:?}", key.trim())));
            }
        }
        let missing = |name: &str| Error::Parse(format!("missing {name} in {s:?}"));
        let q = q.ok_or_else(|| missing("q"))?;
        let q = u16::try_from(q).map_err(|_| Error::InvalidField(format!("order {q}")))?;
        let field = match poly {
            Some(p) => {
                let p = u16::try_from(p).map_err(|_| Error::InvalidField(format!("poly {p:#x}")))?;
                FieldSpec::new(q, p)?
            }
            None => FieldSpec::with_order(q)?,
        };
        let mut elems = [0u8; 4];
        for (i, name) in ["lambda", "mu", "theta", "eta"].iter().enumerate() {
            let v = vals[i].ok_or_else(|| missing(name))?;
            elems[i] = u8::try_from(v).map_err(|_| Error::ElementOutOfRange {
                value: v.min(u64::from(u16::MAX)) as u16,
                order: field.order(),
            })?;
        }
        CodeParams::new(field, elems[0], elems[1], elems[2], elems[3])
    }
}

fn parse_int(s: &str) -> Result<u64> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

/// A1, A2, A3. Needs λ ≠ 0 and μ ≠ 0; validity is not required.
pub fn build_code_matrices(params: &CodeParams) -> Result<(Mat, Mat, Mat)> {
    let f = params.field;
    let (l, m, t, e) = (params.lambda, params.mu, params.theta, params.eta);
    let inv_l = f
        .inv(l)
        .map_err(|_| Error::InvalidParams("lambda must be nonzero".into()))?;
    let inv_m = f
        .inv(m)
        .map_err(|_| Error::InvalidParams("mu must be nonzero".into()))?;
    let a1 = Mat::from_rows(f, &[[t, 0], [e, 1]])?;
    let a2 = Mat::from_rows(f, &[[f.sub(t, 1), 0], [e, 1]])?.scale(inv_l);
    let a3 = Mat::from_rows(f, &[[t, f.neg(1)], [e, 1]])?.scale(inv_m);
    Ok((a1, a2, a3))
}

/// The 10x6 generator: `I` per systematic node, `[I I I]`, `[A1ᵀ A2ᵀ A3ᵀ]`.
pub fn build_generator(matrices: &(Mat, Mat, Mat)) -> Result<Mat> {
    let (a1, a2, a3) = matrices;
    let field = a1.field();
    for a in [a1, a2, a3] {
        if a.rows() != ALPHA || a.cols() != ALPHA {
            return Err(Error::Dimension(format!(
                "coefficient matrices must be 2x2, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if a.field() != field {
            return Err(Error::FieldMismatch {
                left: field.order(),
                right: a.field().order(),
            });
        }
    }
    let i = Mat::identity(field, ALPHA);
    let (t1, t2, t3) = (a1.transpose(), a2.transpose(), a3.transpose());
    Mat::from_blocks(
        field,
        &[
            vec![Some(&i), None, None],
            vec![None, Some(&i), None],
            vec![None, None, Some(&i)],
            vec![Some(&i), Some(&i), Some(&i)],
            vec![Some(&t1), Some(&t2), Some(&t3)],
        ],
    )
}

/// A fully built code: matrices, generator and per-subset decoders.
#[derive(Debug, Clone)]
pub struct CodeInstance {
    params: CodeParams,
    a: [Mat; 3],
    generator: Mat,
    decoders: Vec<Option<DecodeSpec>>,
}

impl CodeInstance {
    /// Builds the instance for any tuple with λ, μ ≠ 0. Subsets whose
    /// stacked generator rows are singular get no decoder; see
    /// [`CodeInstance::is_mds`].
    pub fn new(params: CodeParams) -> Result<Self> {
        let mats = build_code_matrices(&params)?;
        let generator = build_generator(&mats)?;
        let (a1, a2, a3) = mats;
        let mut inst = CodeInstance {
            params,
            a: [a1, a2, a3],
            generator,
            decoders: Vec::new(),
        };
        inst.decoders = NodeSubset::all()
            .map(|s| codec::decode_matrix(s, &inst).ok())
            .collect();
        Ok(inst)
    }

    /// Like [`CodeInstance::new`] but rejects tuples violating any condition.
    pub fn new_valid(params: CodeParams) -> Result<Self> {
        let violated = params.check_conditions();
        if !violated.is_empty() {
            let labels: Vec<&str> = violated.iter().map(|c| c.label()).collect();
            return Err(Error::InvalidParams(format!(
                "{params} violates conditions {}",
                labels.join(", ")
            )));
        }
        CodeInstance::new(params)
    }

    pub fn canonical() -> Self {
        CodeInstance::new(CodeParams::default()).expect("canonical parameters are valid")
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn field(&self) -> FieldSpec {
        self.params.field
    }

    /// `A_i` for i in 1..=3.
    pub fn a(&self, i: usize) -> &Mat {
        &self.a[i - 1]
    }

    pub fn generator(&self) -> &Mat {
        &self.generator
    }

    /// The two generator rows of `node` (1..=5) as a 2x6 matrix.
    pub fn node_rows(&self, node: u8) -> Mat {
        let r0 = (usize::from(node) - 1) * ALPHA;
        self.generator
            .block(r0, 0, ALPHA, MESSAGE_SYMBOLS)
            .expect("node index in 1..=5")
    }

    /// Stacked 6x6 generator rows for a subset of three nodes.
    pub fn subset_rows(&self, subset: NodeSubset) -> Mat {
        let [a, b, c] = subset.nodes();
        self.node_rows(a)
            .vstack(&self.node_rows(b))
            .and_then(|m| m.vstack(&self.node_rows(c)))
            .expect("same shape")
    }

    pub fn decoder(&self, subset: NodeSubset) -> Option<&DecodeSpec> {
        self.decoders[subset.index()].as_ref()
    }

    /// True when every three-node subset has a decoder.
    pub fn is_mds(&self) -> bool {
        self.decoders.iter().all(Option::is_some)
    }

    /// A1ᵀ = λA2ᵀ + [e1 0] = μA3ᵀ + [e2 0], entry-wise.
    pub fn structural_identity_holds(&self) -> bool {
        let f = self.field();
        let t1 = self.a(1).transpose();
        let mut e1_0 = Mat::zeros(f, 2, 2);
        e1_0.set(0, 0, 1);
        let mut e2_0 = Mat::zeros(f, 2, 2);
        e2_0.set(1, 0, 1);
        let via2 = self.a(2).transpose().scale(self.params.lambda).add(&e1_0);
        let via3 = self.a(3).transpose().scale(self.params.mu).add(&e2_0);
        matches!((via2, via3), (Ok(x), Ok(y)) if x == t1 && y == t1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const F: FieldSpec = FieldSpec::GF4;
    const W: u8 = 2;
    const W1: u8 = 3;

    fn labels(p: &CodeParams) -> Vec<&'static str> {
        p.check_conditions().iter().map(|c| c.label()).collect()
    }

    #[test]
    fn canonical_matrices() {
        let p = canonical_params(F).unwrap();
        assert_eq!((p.lambda, p.mu, p.theta, p.eta), (W, W1, W1, W));
        let (a1, a2, a3) = build_code_matrices(&p).unwrap();
        assert_eq!(a1, Mat::from_rows(F, &[[W1, 0], [W, 1]]).unwrap());
        assert_eq!(a2, Mat::from_rows(F, &[[1, 0], [1, W1]]).unwrap());
        assert_eq!(a3, Mat::from_rows(F, &[[1, W], [W1, W]]).unwrap());
        assert_eq!(a1.transpose(), Mat::from_rows(F, &[[W1, W], [0, 1]]).unwrap());
        assert_eq!(a2.transpose(), Mat::from_rows(F, &[[1, 1], [0, W1]]).unwrap());
        assert_eq!(a3.transpose(), Mat::from_rows(F, &[[1, W1], [W, W]]).unwrap());
    }

    #[test]
    fn zero_lambda_or_mu_rejected() {
        let p = CodeParams::new(F, 0, W1, W1, W).unwrap();
        assert!(matches!(build_code_matrices(&p), Err(Error::InvalidParams(_))));
        let p = CodeParams::new(F, W, 0, W1, W).unwrap();
        assert!(matches!(CodeInstance::new(p), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn condition_examples() {
        assert!(labels(&canonical_params(F).unwrap()).is_empty());
        let p = CodeParams::new(F, 1, W1, W1, W).unwrap();
        assert!(labels(&p).contains(&"6a"));
        let p = CodeParams::new(F, W, W, W1, W).unwrap();
        assert!(labels(&p).contains(&"6b"));
        // all-zero tuple: 6j's denominator is zero, so it is not evaluated
        let p = CodeParams::new(F, 0, 0, 0, 0).unwrap();
        let l = labels(&p);
        assert!(l.contains(&"6a") && l.contains(&"6c") && !l.contains(&"6j"));
    }

    #[test]
    fn canonical_rejects_other_fields() {
        assert!(canonical_params(FieldSpec::with_order(2).unwrap()).is_err());
        assert!(canonical_params(FieldSpec::with_order(8).unwrap()).is_err());
    }

    #[test]
    fn generator_layout() {
        let inst = CodeInstance::canonical();
        let g = inst.generator();
        assert_eq!((g.rows(), g.cols()), (10, 6));
        assert_eq!(g.block(0, 0, 6, 6).unwrap(), Mat::identity(F, 6));
        let i = Mat::identity(F, 2);
        for b in 0..3 {
            assert_eq!(g.block(6, 2 * b, 2, 2).unwrap(), i);
        }
        let expected_bottom: [[u8; 6]; 2] = [[W1, W, 1, 1, 1, W1], [0, 1, 0, W1, W, W]];
        assert_eq!(g.block(8, 0, 2, 6).unwrap(), Mat::from_rows(F, &expected_bottom).unwrap());
    }

    #[test]
    fn generator_rejects_bad_shapes() {
        let i = Mat::identity(F, 2);
        let bad = Mat::identity(F, 3);
        assert!(build_generator(&(i.clone(), i.clone(), bad)).is_err());
        let gf8 = Mat::identity(FieldSpec::with_order(8).unwrap(), 2);
        assert!(build_generator(&(i.clone(), i, gf8)).is_err());
    }

    #[test]
    fn params_text_roundtrip() {
        let p = CodeParams::default();
        let text = p.to_string();
        assert_eq!(text, "q=4;poly=0x7;lambda=2;mu=3;theta=3;eta=2");
        assert_eq!(text.parse::<CodeParams>().unwrap(), p);
        assert_eq!("q=4;lambda=2;mu=3;theta=3;eta=2".parse::<CodeParams>().unwrap(), p);
        assert!("q=4;lambda=2;mu=3;theta=3".parse::<CodeParams>().is_err());
        assert!("q=4;lambda=9;mu=3;theta=3;eta=2".parse::<CodeParams>().is_err());
        assert!("q=5;lambda=2;mu=3;theta=3;eta=2".parse::<CodeParams>().is_err());
        assert!("q=4;poly=0x5;lambda=2;mu=3;theta=3;eta=2".parse::<CodeParams>().is_err());
        assert!("q=4;q=4;lambda=2;mu=3;theta=3;eta=2".parse::<CodeParams>().is_err());
        assert!("nonsense".parse::<CodeParams>().is_err());
    }

    #[test]
    fn identity_and_ranks_hold_for_every_valid_gf8_tuple() {
        let f = FieldSpec::with_order(8).unwrap();
        let mut valid = 0;
        for l in f.elements() {
            for m in f.elements() {
                for t in f.elements() {
                    for e in f.elements() {
                        let p = CodeParams::new(f, l, m, t, e).unwrap();
                        if !p.is_valid() {
                            continue;
                        }
                        valid += 1;
                        let inst = CodeInstance::new(p).unwrap();
                        assert!(inst.structural_identity_holds(), "{p}");
                        for i in 1..=3 {
                            assert_eq!(inst.a(i).rank(), 2);
                            for j in (i + 1)..=3 {
                                assert_eq!(inst.a(i).sub(inst.a(j)).unwrap().rank(), 2, "{p}");
                            }
                        }
                        assert!(inst.is_mds(), "{p}");
                    }
                }
            }
        }
        assert!(valid > 0);
    }
}
