#![no_main]

use ittm::Program;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = Program::parse(s) {
        let _ = p.validate();
        assert_eq!(Program::parse(&p.to_text()).unwrap(), p);
    }
});
