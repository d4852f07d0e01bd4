//! A (5,3) MDS storage code with two GF(4) symbols per node and
//! minimum-bandwidth exact repair of every node.
//!
//! Any three of the five nodes recover the six message symbols, and a single
//! lost node is rebuilt from one symbol downloaded from each of the other
//! four, matching the cut-set bound of four symbols.
//!
//! ```
//! use mds53::{codec, repair, CodeInstance, Message};
//!
//! let inst = CodeInstance::canonical();
//! let msg = Message::new([[1u8, 2], [3, 0], [2, 2]]);
//! let cw = codec::encode(&msg, &inst);
//!
//! let plan = repair::make_repair_plan(5, &inst).unwrap();
//! let rebuilt = repair::execute_repair(&plan, &plan.gather(|n| *cw.node(n)));
//! assert_eq!(&rebuilt, cw.node(5));
//! ```

pub mod cli;
pub mod codec;
pub mod construction;
pub mod error;
pub mod galois;
pub mod linalg;
pub mod oracle;
pub mod repair;
pub mod store;

pub use codec::{Codeword, Message, NodeSubset, Segment};
pub use construction::{CodeInstance, CodeParams, Condition};
pub use error::{Error, Result};
pub use galois::{FieldSpec, SymbolBlock};
pub use linalg::{Mat, Vec2};
pub use repair::{RepairPlan, RepairVectors};
