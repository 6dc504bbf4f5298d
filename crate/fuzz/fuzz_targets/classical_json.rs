#![no_main]

use ittm::programs::ClassicalTM;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(tm) = ClassicalTM::from_json(s) {
        assert_eq!(ClassicalTM::from_json(&tm.to_json()).unwrap(), tm);
        let _ = tm.simulate(&[1, 1, 0, 1], 1000);
    }
});
