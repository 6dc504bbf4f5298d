#![no_main]

use ittm::machine::rel_decode;
use ittm::programs::parse_relation;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_relation(s) {
        let pairs: Vec<(u64, u64)> = serde_json::from_str(s).expect("accepted input is a pair list");
        let decoded = rel_decode(&t, 64);
        for p in pairs.iter().filter(|p| p.0 < 64 && p.1 < 64) {
            assert!(decoded.contains(p));
        }
        assert!(decoded.iter().all(|p| pairs.contains(p)));
    }
});
