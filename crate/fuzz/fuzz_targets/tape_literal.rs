#![no_main]

use ittm::TapeRep;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(t) = s.parse::<TapeRep>() {
        assert_eq!(t.to_string().parse::<TapeRep>().unwrap(), t);
    }
});
