//! C ABI over the `mds53` crate.
//!
//! Every function returns an [`Mds53Status`]; on anything but
//! `MDS53_STATUS_OK` a description is available from
//! [`mds53_last_error_message`] on the same thread. Handles are opaque and
//! must be released with their `_free` function. Buffers are caller-owned.
//!
//! Symbol blocks are passed as contiguous byte arrays: a message is six
//! blocks of `symbol_size` bytes, a codeword ten (two per node, node 1
//! first).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use mds53::codec::{decode, encode, Message, NodeSubset, Segment};
use mds53::repair::{execute_repair, make_repair_plan};
use mds53::store::{store_file, Cluster};
use mds53::{CodeInstance, CodeParams, Error, RepairPlan, SymbolBlock};

/// Result codes.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mds53Status {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidParams = 3,
    Singular = 4,
    Io = 5,
    Store = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// A built code instance.
pub struct Mds53Code {
    inst: CodeInstance,
}

/// A repair plan for one node of a code.
pub struct Mds53Plan {
    plan: RepairPlan,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(Mds53Status, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidParams(_)
            | Error::InvalidField(_)
            | Error::ElementOutOfRange { .. }
            | Error::FieldMismatch { .. }
            | Error::Parse(_) => Mds53Status::InvalidParams,
            Error::Singular | Error::NotRankOne(_) | Error::Alignment(_) | Error::DivisionByZero => {
                Mds53Status::Singular
            }
            Error::Io { .. } => Mds53Status::Io,
            Error::Store(_) | Error::TooManyFailures { .. } | Error::Inconsistent(_) => Mds53Status::Store,
            Error::Dimension(_) | Error::InvalidSubset(_) => Mds53Status::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: Mds53Status, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> Mds53Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            Mds53Status::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            Mds53Status::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: caller guarantees a non-null pointer is valid for reads.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(Mds53Status::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a>(p: *const u8, len: usize, what: &str) -> Result<&'a [u8], Failure> {
    if p.is_null() {
        return fail(Mds53Status::NullPointer, format!("{what} is null"));
    }
    // SAFETY: caller guarantees `len` readable bytes at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn slice_mut<'a>(p: *mut u8, len: usize, what: &str) -> Result<&'a mut [u8], Failure> {
    if p.is_null() {
        return fail(Mds53Status::NullPointer, format!("{what} is null"));
    }
    // SAFETY: caller guarantees `len` writable bytes at `p`.
    Ok(unsafe { std::slice::from_raw_parts_mut(p, len) })
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(Mds53Status::NullPointer, format!("{what} is null"));
    }
    // SAFETY: caller guarantees a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .or_else(|_| fail(Mds53Status::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Boxes `value` into `*out`; nothing is allocated when `out` is null.
unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return fail(Mds53Status::NullPointer, "out is null");
    }
    // SAFETY: caller guarantees `out` is valid for writes.
    unsafe { out.write(Box::into_raw(Box::new(value))) };
    Ok(())
}

fn subset(nodes: &[u8]) -> Result<NodeSubset, Failure> {
    let arr: [u8; 3] = nodes.try_into().expect("three nodes");
    Ok(NodeSubset::new(arr)?)
}

fn check_elements(code: &Mds53Code, values: &[u8]) -> Result<(), Failure> {
    for &v in values {
        code.inst.field().check(v)?;
    }
    Ok(())
}

fn require_blocks(code: &Mds53Code, symbol_size: usize) -> Result<(), Failure> {
    if !code.inst.field().is_gf4() {
        return fail(Mds53Status::InvalidArgument, "symbol blocks require a GF(4) code");
    }
    if symbol_size == 0 {
        return fail(Mds53Status::InvalidArgument, "symbol_size must be at least 1");
    }
    Ok(())
}

fn blocks(bytes: &[u8], symbol_size: usize) -> Vec<SymbolBlock> {
    bytes.chunks_exact(symbol_size).map(|c| SymbolBlock::new(c.to_vec())).collect()
}

/// Message for the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn mds53_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds the canonical GF(4) code.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mds53_code_new_canonical(out: *mut *mut Mds53Code) -> Mds53Status {
    guard(|| {
        let code = Mds53Code {
            inst: CodeInstance::canonical(),
        };
        unsafe { put_handle(out, code) }
    })
}

/// Builds a code from a parameter string such as
/// `"q=4;lambda=2;mu=3;theta=3;eta=2"`. Tuples violating any validity
/// condition are rejected with `MDS53_STATUS_INVALID_PARAMS`.
///
/// # Safety
/// `params` must be NUL-terminated; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mds53_code_from_params(params: *const c_char, out: *mut *mut Mds53Code) -> Mds53Status {
    guard(|| {
        let text = unsafe { string(params, "params") }?;
        let params: CodeParams = text.parse()?;
        let code = Mds53Code {
            inst: CodeInstance::new_valid(params)?,
        };
        unsafe { put_handle(out, code) }
    })
}

/// # Safety
/// `code` must come from a constructor above and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mds53_code_free(code: *mut Mds53Code) {
    if !code.is_null() {
        // SAFETY: pointer came from Box::into_raw in a constructor.
        drop(unsafe { Box::from_raw(code) });
    }
}

/// Writes the NUL-terminated parameter string into `buf`. `needed`, when
/// non-null, receives the required size including the terminator, also on
/// `MDS53_STATUS_BUFFER_TOO_SMALL`.
///
/// # Safety
/// `code` must be a live handle; `buf` must hold `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn mds53_code_params(
    code: *const Mds53Code,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> Mds53Status {
    guard(|| {
        let code = unsafe { deref(code, "code") }?;
        let text = code.inst.params().to_string();
        let size = text.len() + 1;
        if !needed.is_null() {
            unsafe { needed.write(size) };
        }
        if cap < size {
            return fail(Mds53Status::BufferTooSmall, format!("need {size} bytes, have {cap}"));
        }
        let dst = unsafe { slice_mut(buf.cast(), size, "buf") }?;
        dst[..text.len()].copy_from_slice(text.as_bytes());
        dst[text.len()] = 0;
        Ok(())
    })
}

/// Encodes six field elements into ten (two per node).
///
/// # Safety
/// `message` must hold 6 bytes and `codeword` 10.
#[no_mangle]
pub unsafe extern "C" fn mds53_encode_scalars(
    code: *const Mds53Code,
    message: *const u8,
    codeword: *mut u8,
) -> Mds53Status {
    guard(|| {
        let code = unsafe { deref(code, "code") }?;
        let msg = unsafe { slice(message, 6, "message") }?;
        check_elements(code, msg)?;
        let out = unsafe { slice_mut(codeword, 10, "codeword") }?;
        let cw = encode(&Message::from_symbols(msg.try_into().expect("6")), &code.inst);
        for node in 1..=5u8 {
            let i = usize::from(node - 1) * 2;
            out[i..i + 2].copy_from_slice(cw.node(node));
        }
        Ok(())
    })
}

/// Decodes six elements from the segments of three distinct nodes, given
/// in the order of `nodes`.
///
/// # Safety
/// `nodes` must hold 3 bytes, `segments` 6 and `message` 6.
#[no_mangle]
pub unsafe extern "C" fn mds53_decode_scalars(
    code: *const Mds53Code,
    nodes: *const u8,
    segments: *const u8,
    message: *mut u8,
) -> Mds53Status {
    guard(|| {
        let code = unsafe { deref(code, "code") }?;
        let ids = unsafe { slice(nodes, 3, "nodes") }?;
        let segs = unsafe { slice(segments, 6, "segments") }?;
        check_elements(code, segs)?;
        let out = unsafe { slice_mut(message, 6, "message") }?;
        let s = subset(ids)?;
        let by_node = |n: u8| -> Segment<u8> {
            let i = ids.iter().position(|&x| x == n).expect("member") * 2;
            [segs[i], segs[i + 1]]
        };
        let [a, b, c] = s.nodes();
        let m = decode(s, &[by_node(a), by_node(b), by_node(c)], &code.inst)?;
        for (dst, src) in out.iter_mut().zip(m.symbols()) {
            *dst = *src;
        }
        Ok(())
    })
}

/// Encodes six blocks of `symbol_size` bytes into ten. GF(4) codes only.
///
/// # Safety
/// `message` must hold `6 * symbol_size` bytes and `codeword`
/// `10 * symbol_size`.
#[no_mangle]
pub unsafe extern "C" fn mds53_encode_blocks(
    code: *const Mds53Code,
    message: *const u8,
    symbol_size: usize,
    codeword: *mut u8,
) -> Mds53Status {
    guard(|| {
        let code = unsafe { deref(code, "code") }?;
        require_blocks(code, symbol_size)?;
        let msg = unsafe { slice(message, 6 * symbol_size, "message") }?;
        let out = unsafe { slice_mut(codeword, 10 * symbol_size, "codeword") }?;
        let b: [SymbolBlock; 6] = blocks(msg, symbol_size).try_into().expect("6 blocks");
        let cw = encode(&Message::from_symbols(b), &code.inst);
        let mut chunks = out.chunks_exact_mut(symbol_size);
        for node in 1..=5u8 {
            for block in cw.node(node) {
                chunks.next().expect("10 blocks").copy_from_slice(block.as_bytes());
            }
        }
        Ok(())
    })
}

/// Block version of [`mds53_decode_scalars`].
///
/// # Safety
/// `nodes` must hold 3 bytes, `segments` `6 * symbol_size` and `message`
/// `6 * symbol_size`.
#[no_mangle]
pub unsafe extern "C" fn mds53_decode_blocks(
    code: *const Mds53Code,
    nodes: *const u8,
    segments: *const u8,
    symbol_size: usize,
    message: *mut u8,
) -> Mds53Status {
    guard(|| {
        let code = unsafe { deref(code, "code") }?;
        require_blocks(code, symbol_size)?;
        let ids = unsafe { slice(nodes, 3, "nodes") }?;
        let segs = blocks(unsafe { slice(segments, 6 * symbol_size, "segments") }?, symbol_size);
        let out = unsafe { slice_mut(message, 6 * symbol_size, "message") }?;
        let s = subset(ids)?;
        let by_node = |n: u8| -> Segment<SymbolBlock> {
            let i = ids.iter().position(|&x| x == n).expect("member") * 2;
            [segs[i].clone(), segs[i + 1].clone()]
        };
        let [a, b, c] = s.nodes();
        let m = decode(s, &[by_node(a), by_node(b), by_node(c)], &code.inst)?;
        for (dst, src) in out.chunks_exact_mut(symbol_size).zip(m.symbols()) {
            dst.copy_from_slice(src.as_bytes());
        }
        Ok(())
    })
}

/// Derives the repair plan for `failed` (1..=5).
///
/// # Safety
/// `code` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mds53_plan_new(code: *const Mds53Code, failed: u8, out: *mut *mut Mds53Plan) -> Mds53Status {
    guard(|| {
        let code = unsafe { deref(code, "code") }?;
        let plan = Mds53Plan {
            plan: make_repair_plan(failed, &code.inst)?,
        };
        unsafe { put_handle(out, plan) }
    })
}

/// # Safety
/// `plan` must come from [`mds53_plan_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mds53_plan_free(plan: *mut Mds53Plan) {
    if !plan.is_null() {
        // SAFETY: pointer came from Box::into_raw in mds53_plan_new.
        drop(unsafe { Box::from_raw(plan) });
    }
}

/// The four helper node ids in ascending order; downloads passed to the
/// execute functions follow this order.
///
/// # Safety
/// `nodes` must hold 4 bytes.
#[no_mangle]
pub unsafe extern "C" fn mds53_plan_helpers(plan: *const Mds53Plan, nodes: *mut u8) -> Mds53Status {
    guard(|| {
        let plan = unsafe { deref(plan, "plan") }?;
        let out = unsafe { slice_mut(nodes, 4, "nodes") }?;
        for (dst, d) in out.iter_mut().zip(plan.plan.downloads()) {
            *dst = d.node;
        }
        Ok(())
    })
}

/// The two coefficients helper `node` applies to its segment.
///
/// # Safety
/// `vector` must hold 2 bytes.
#[no_mangle]
pub unsafe extern "C" fn mds53_plan_download_vector(plan: *const Mds53Plan, node: u8, vector: *mut u8) -> Mds53Status {
    guard(|| {
        let plan = unsafe { deref(plan, "plan") }?;
        let out = unsafe { slice_mut(vector, 2, "vector") }?;
        match plan.plan.download_vector(node) {
            Some(v) => {
                out.copy_from_slice(&v.0);
                Ok(())
            }
            None => fail(Mds53Status::InvalidArgument, format!("node {node} is not a helper in this plan")),
        }
    })
}

/// Computes the block helper `node` sends, from its two stored blocks.
///
/// # Safety
/// `segment` must hold `2 * symbol_size` bytes and `out` `symbol_size`.
#[no_mangle]
pub unsafe extern "C" fn mds53_plan_helper_symbol_blocks(
    plan: *const Mds53Plan,
    node: u8,
    segment: *const u8,
    symbol_size: usize,
    out: *mut u8,
) -> Mds53Status {
    guard(|| {
        let plan = unsafe { deref(plan, "plan") }?;
        if !plan.plan.field().is_gf4() || symbol_size == 0 {
            return fail(Mds53Status::InvalidArgument, "blocks need a GF(4) plan and symbol_size >= 1");
        }
        let seg = blocks(unsafe { slice(segment, 2 * symbol_size, "segment") }?, symbol_size);
        let dst = unsafe { slice_mut(out, symbol_size, "out") }?;
        let sent = plan
            .plan
            .helper_symbol(node, &[seg[0].clone(), seg[1].clone()])
            .ok_or_else(|| Failure(Mds53Status::InvalidArgument, format!("node {node} is not a helper")))?;
        dst.copy_from_slice(sent.as_bytes());
        Ok(())
    })
}

/// Rebuilds the failed node's two elements from four downloaded elements
/// in helper order.
///
/// # Safety
/// `downloads` must hold 4 bytes and `segment` 2.
#[no_mangle]
pub unsafe extern "C" fn mds53_plan_execute_scalars(
    plan: *const Mds53Plan,
    downloads: *const u8,
    segment: *mut u8,
) -> Mds53Status {
    guard(|| {
        let plan = unsafe { deref(plan, "plan") }?;
        let d = unsafe { slice(downloads, 4, "downloads") }?;
        for &v in d {
            plan.plan.field().check(v)?;
        }
        let out = unsafe { slice_mut(segment, 2, "segment") }?;
        out.copy_from_slice(&execute_repair(&plan.plan, &d.try_into().expect("4")));
        Ok(())
    })
}

/// Block version of [`mds53_plan_execute_scalars`].
///
/// # Safety
/// `downloads` must hold `4 * symbol_size` bytes and `segment`
/// `2 * symbol_size`.
#[no_mangle]
pub unsafe extern "C" fn mds53_plan_execute_blocks(
    plan: *const Mds53Plan,
    downloads: *const u8,
    symbol_size: usize,
    segment: *mut u8,
) -> Mds53Status {
    guard(|| {
        let plan = unsafe { deref(plan, "plan") }?;
        if !plan.plan.field().is_gf4() || symbol_size == 0 {
            return fail(Mds53Status::InvalidArgument, "blocks need a GF(4) plan and symbol_size >= 1");
        }
        let d: [SymbolBlock; 4] = blocks(unsafe { slice(downloads, 4 * symbol_size, "downloads") }?, symbol_size)
            .try_into()
            .expect("4 blocks");
        let out = unsafe { slice_mut(segment, 2 * symbol_size, "segment") }?;
        for (dst, b) in out.chunks_exact_mut(symbol_size).zip(execute_repair(&plan.plan, &d)) {
            dst.copy_from_slice(b.as_bytes());
        }
        Ok(())
    })
}

/// Stores the file at `input` as a five-node cluster in `dir`.
///
/// # Safety
/// Path arguments must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mds53_cluster_encode_file(
    code: *const Mds53Code,
    input: *const c_char,
    dir: *const c_char,
    symbol_size: usize,
) -> Mds53Status {
    guard(|| {
        let code = unsafe { deref(code, "code") }?;
        let input = PathBuf::from(unsafe { string(input, "input") }?);
        let dir = unsafe { string(dir, "dir") }?;
        let data = std::fs::read(&input).map_err(|e| Failure(Mds53Status::Io, format!("{}: {e}", input.display())))?;
        store_file(&data, symbol_size, &code.inst, dir)?;
        Ok(())
    })
}

/// Truncates one node's file and marks it failed.
///
/// # Safety
/// `dir` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mds53_cluster_fail(dir: *const c_char, node: u8) -> Mds53Status {
    guard(|| {
        let mut cluster = Cluster::open(unsafe { string(dir, "dir") }?)?;
        cluster.fail_node(node)?;
        Ok(())
    })
}

/// Repairs one node. `downloaded_bytes`, when non-null, receives the repair
/// traffic.
///
/// # Safety
/// `dir` must be NUL-terminated; `downloaded_bytes` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mds53_cluster_repair(dir: *const c_char, node: u8, downloaded_bytes: *mut u64) -> Mds53Status {
    guard(|| {
        let mut cluster = Cluster::open(unsafe { string(dir, "dir") }?)?;
        let report = cluster.repair_node(node)?;
        if !downloaded_bytes.is_null() {
            unsafe { downloaded_bytes.write(report.downloaded_bytes) };
        }
        Ok(())
    })
}

/// Decodes the stored file from any three available nodes into `output`.
///
/// # Safety
/// Path arguments must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn mds53_cluster_reconstruct(dir: *const c_char, output: *const c_char) -> Mds53Status {
    guard(|| {
        let cluster = Cluster::open(unsafe { string(dir, "dir") }?)?;
        let output = PathBuf::from(unsafe { string(output, "output") }?);
        let data = cluster.reconstruct_file(None)?;
        std::fs::write(&output, data).map_err(|e| Failure(Mds53Status::Io, format!("{}: {e}", output.display())))?;
        Ok(())
    })
}
