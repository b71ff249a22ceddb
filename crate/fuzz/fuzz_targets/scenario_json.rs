#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if qsync::parse_scenario(text).is_err() {
        return;
    }
    // Validation builds the models, so it must reject bad input without panicking.
    if let Ok(s) = qsync::scenario_from_str(text) {
        let again = serde_json::to_string(&s).unwrap();
        let back = qsync::scenario_from_str(&again).unwrap();
        assert_eq!(back, s);
    }
});
