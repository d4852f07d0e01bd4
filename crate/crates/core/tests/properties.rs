use mds53::codec::{decode, decode_verified, encode, Message, NodeSubset};
use mds53::galois::combine;
use mds53::oracle::enumerate_valid_params;
use mds53::repair::{execute_repair, make_repair_plan, make_repair_plan_with, HelperSide};
use mds53::store::{ingest, unframe};
use mds53::{CodeInstance, CodeParams, FieldSpec, Mat, RepairPlan, SymbolBlock};
use proptest::prelude::*;

fn valid_params(order: u16) -> Vec<CodeParams> {
    enumerate_valid_params(FieldSpec::with_order(order).unwrap()).unwrap().valid
}

fn instance_strategy() -> impl Strategy<Value = CodeInstance> {
    let pools: Vec<CodeParams> = [4, 8, 16].into_iter().flat_map(valid_params).collect();
    prop::sample::select(pools).prop_map(|p| CodeInstance::new(p).unwrap())
}

fn message_for(inst: &CodeInstance, raw: [u8; 6]) -> Message<u8> {
    let q = inst.field().order();
    let digits = raw.map(|x| (u16::from(x) % q) as u8);
    Message::from_symbols(digits)
}

fn blocks(len: usize) -> impl Strategy<Value = [SymbolBlock; 6]> {
    prop::array::uniform6(prop::collection::vec(any::<u8>(), len)).prop_map(|a| a.map(SymbolBlock::new))
}

proptest! {
    #[test]
    fn any_three_nodes_decode(inst in instance_strategy(), raw in any::<[u8; 6]>()) {
        let m = message_for(&inst, raw);
        let cw = encode(&m, &inst);
        for s in NodeSubset::all() {
            let [a, b, c] = s.nodes();
            prop_assert_eq!(decode(s, &[*cw.node(a), *cw.node(b), *cw.node(c)], &inst).unwrap(), m.clone());
        }
    }

    #[test]
    fn every_node_repairs_from_four_symbols(inst in instance_strategy(), raw in any::<[u8; 6]>(), second in any::<bool>()) {
        let side = if second { HelperSide::Second } else { HelperSide::First };
        let cw = encode(&message_for(&inst, raw), &inst);
        for node in 1..=5u8 {
            let plan = make_repair_plan_with(node, &inst, side).unwrap();
            prop_assert_eq!(plan.bandwidth(), 4);
            let got = execute_repair(&plan, &plan.gather(|n| *cw.node(n)));
            prop_assert_eq!(&got, cw.node(node));
        }
    }

    #[test]
    fn encoding_matches_generator(inst in instance_strategy(), raw in any::<[u8; 6]>()) {
        let m = message_for(&inst, raw);
        let cw = encode(&m, &inst);
        let g = inst.generator();
        let f = inst.field();
        let symbols: Vec<u8> = m.symbols().copied().collect();
        for r in 0..10 {
            let expect = combine(f, g.row(r), &symbols.iter().collect::<Vec<_>>());
            prop_assert_eq!(cw.node((r / 2 + 1) as u8)[r % 2], expect);
        }
    }

    #[test]
    fn encoding_is_linear(raw1 in any::<[u8; 6]>(), raw2 in any::<[u8; 6]>(), s in 1u8..4) {
        let inst = CodeInstance::canonical();
        let f = inst.field();
        let (a, b) = (message_for(&inst, raw1), message_for(&inst, raw2));
        let mixed = Message::from_symbols(std::array::from_fn(|i| {
            let (x, y) = (a.symbols().nth(i).unwrap(), b.symbols().nth(i).unwrap());
            f.add(*x, f.mul(s, *y))
        }));
        let (ca, cb, cm) = (encode(&a, &inst), encode(&b, &inst), encode(&mixed, &inst));
        for node in 1..=5u8 {
            for k in 0..2 {
                prop_assert_eq!(cm.node(node)[k], f.add(ca.node(node)[k], f.mul(s, cb.node(node)[k])));
            }
        }
    }

    #[test]
    fn block_codeword_repairs_bytewise(data in blocks(17)) {
        let inst = CodeInstance::canonical();
        let cw = encode(&Message::from_symbols(data), &inst);
        for node in 1..=5u8 {
            let plan = make_repair_plan(node, &inst).unwrap();
            let got = execute_repair(&plan, &plan.gather(|n| cw.node(n).clone()));
            prop_assert_eq!(&got, cw.node(node));
        }
    }

    #[test]
    fn block_decode_with_verification(data in blocks(9), pick in 0usize..10) {
        let inst = CodeInstance::canonical();
        let m = Message::from_symbols(data);
        let cw = encode(&m, &inst);
        let s = NodeSubset::all().nth(pick).unwrap();
        let [a, b, c] = s.nodes();
        let check = (1..=5u8).find(|n| !s.contains(*n)).unwrap();
        let segs = [cw.node(a).clone(), cw.node(b).clone(), cw.node(c).clone()];
        prop_assert_eq!(decode_verified(s, &segs, check, cw.node(check), &inst).unwrap(), m);
    }

    #[test]
    fn repair_manifest_roundtrips(inst in instance_strategy(), node in 1u8..=5) {
        let plan = make_repair_plan(node, &inst).unwrap();
        prop_assert_eq!(RepairPlan::from_manifest(&plan.to_manifest()).unwrap(), plan);
    }

    #[test]
    fn params_text_roundtrips(inst in instance_strategy()) {
        let p = *inst.params();
        prop_assert_eq!(p.to_string().parse::<CodeParams>().unwrap(), p);
    }

    #[test]
    fn ingest_roundtrips(data in prop::collection::vec(any::<u8>(), 0..3000), ss in 1usize..300) {
        let (layout, stripes) = ingest(&data, ss).unwrap();
        prop_assert!(layout.stripe_count * 6 * ss as u64 >= data.len() as u64 + 8);
        prop_assert!((layout.stripe_count - 1) * 6 * (ss as u64) < data.len() as u64 + 8);
        prop_assert_eq!(unframe(&layout, &stripes).unwrap(), data);
    }

    #[test]
    fn rank_ignores_transpose(entries in prop::collection::vec(0u8..4, 12)) {
        let m = Mat::new(FieldSpec::GF4, 3, 4, entries).unwrap();
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }
}
