#![no_main]

use ittm::Ordinal;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(o) = s.parse::<Ordinal>() {
        assert_eq!(o.to_string().parse::<Ordinal>().unwrap(), o);
    }
});
