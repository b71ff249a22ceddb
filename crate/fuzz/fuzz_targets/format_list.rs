#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for item in text.split(',') {
        if let Ok(f) = item.parse::<qsync::Format>() {
            assert_eq!(item.to_ascii_uppercase().parse::<qsync::Format>(), Ok(f));
        }
    }
});
