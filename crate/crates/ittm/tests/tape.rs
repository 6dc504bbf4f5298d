use std::collections::BTreeSet;

use ittm::machine::{nat_decode, nat_encode, pair, rel_decode, rel_encode, unpair, Program};
use ittm::programs::ClassicalTM;
use ittm::TapeRep;
use proptest::prelude::*;

fn bits(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..2, 0..max)
}

fn tape() -> impl Strategy<Value = TapeRep> {
    (bits(12), bits(4)).prop_map(|(p, mut t)| {
        if t.is_empty() {
            t.push(0);
        }
        TapeRep::new(&p, &t)
    })
}

proptest! {
    #[test]
    fn cells_follow_prefix_then_tail(p in bits(12), t in bits(5)) {
        prop_assume!(!t.is_empty());
        let r = TapeRep::new(&p, &t);
        for i in 0..40 {
            let want = if i < p.len() { p[i] } else { t[(i - p.len()) % t.len()] };
            prop_assert_eq!(r.read(i), want);
        }
    }

    #[test]
    fn literal_round_trips(r in tape()) {
        prop_assert_eq!(r.to_string().parse::<TapeRep>().unwrap(), r);
    }

    #[test]
    fn equal_cells_give_equal_values(r in tape(), s in tape()) {
        let same = (0..64).all(|i| r.read(i) == s.read(i));
        prop_assert_eq!(same, r == s);
    }

    #[test]
    fn write_changes_one_cell(r in tape(), i in 0usize..30, b in 0u8..2) {
        let w = r.write(i, b);
        for k in 0..50 {
            prop_assert_eq!(w.read(k), if k == i { b } else { r.read(k) });
        }
    }

    #[test]
    fn numerals_round_trip(n in 0usize..200) {
        prop_assert_eq!(nat_decode(&nat_encode(n)).unwrap(), n);
    }

    #[test]
    fn pairing_is_a_bijection(n in 0u64..100_000) {
        let (i, j) = unpair(n);
        prop_assert_eq!(pair(i, j), n);
    }

    #[test]
    fn relations_round_trip(r in prop::collection::btree_set((0u64..6, 0u64..6), 0..12)) {
        prop_assert_eq!(rel_decode(&rel_encode(&r), 6), r);
    }

    #[test]
    fn classical_json_round_trips(rows in prop::collection::vec((0usize..3, 0u8..2, 0usize..3, 0u8..2, 0usize..3), 0..6)) {
        let names = ["a", "b", "c"];
        let mut tm = ClassicalTM::new(&names, "a");
        for (s, r, n, w, m) in rows {
            tm.set(names[s], r, names[n], w, [ittm::Move::L, ittm::Move::R, ittm::Move::S][m]);
        }
        prop_assert_eq!(ClassicalTM::from_json(&tm.to_json()).unwrap(), tm);
    }
}

#[test]
fn pair_matches_cantor_order() {
    let mut n = 0;
    for s in 0..20u64 {
        for i in 0..=s {
            assert_eq!(pair(i, s - i), n);
            n += 1;
        }
    }
}

#[test]
fn rel_encode_places_bits() {
    let r: BTreeSet<_> = [(0, 1), (1, 0)].into_iter().collect();
    let t = rel_encode(&r);
    assert_eq!(t.cells(5), vec![0, 1, 1, 0, 0]);
}

#[test]
fn program_text_round_trips() {
    let p = ittm::programs::gen_clock(&"w*2+1".parse().unwrap()).unwrap();
    assert_eq!(Program::parse(&p.to_text()).unwrap(), p);
}
