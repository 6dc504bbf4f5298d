#![no_main]

use ittm::asm;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(unit) = asm::parse(s) {
        let printed = unit.to_string();
        let again = asm::parse(&printed).expect("printed unit parses");
        assert_eq!(again.to_string(), printed);
        if let Ok(p) = asm::compile(&unit) {
            assert!(p.validate().is_empty());
        }
    }
});
