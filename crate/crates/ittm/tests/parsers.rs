//! Parsers reject bad input with errors, never panics; accepted input round-trips.

use ittm::programs::{parse_relation, ClassicalTM};
use ittm::{asm, Ordinal, Program, TapeRep};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn ordinal_literals(s in "[w0-9^*+() ]{0,16}") {
        if let Ok(o) = s.parse::<Ordinal>() {
            prop_assert_eq!(o.to_string().parse::<Ordinal>().unwrap(), o);
        }
    }

    #[test]
    fn tape_literals(s in "[01; x]{0,12}") {
        if let Ok(t) = s.parse::<TapeRep>() {
            prop_assert_eq!(t.to_string().parse::<TapeRep>().unwrap(), t);
        }
    }

    #[test]
    fn program_text(s in "(states:|start|limit|halt|q0|[01]{3}|->|[LRS]| |\n){0,30}") {
        if let Ok(p) = Program::parse(&s) {
            prop_assert_eq!(Program::parse(&p.to_text()).unwrap(), p);
        }
    }

    #[test]
    fn assembly(s in "(main:|f:|\n|  |move [LRS]|write \\([01_],[01_],[01_]\\)|on \\([01_],[01_],[01_]\\) goto A|goto A|A:|call f|halt|onlimit A|;|#x){0,16}") {
        if let Ok(unit) = asm::parse(&s) {
            let printed = unit.to_string();
            prop_assert_eq!(asm::parse(&printed).unwrap().to_string(), printed);
            if let Ok(p) = asm::compile(&unit) {
                prop_assert!(p.validate().is_empty());
            }
        }
    }

    #[test]
    fn classical_json(s in r#"(\{|\}|\[|\]|"states"|"start"|"table"|"a"|"a,0"|"b,1"|"0"|"1"|"R"|:|,){0,24}"#) {
        if let Ok(tm) = ClassicalTM::from_json(&s) {
            prop_assert_eq!(ClassicalTM::from_json(&tm.to_json()).unwrap(), tm);
        }
    }

    #[test]
    fn relation_json(s in r"(\[|\]|,|[0-9]{1,5}|-| ){0,20}") {
        let _ = parse_relation(&s);
    }
}
