#![no_main]

use libfuzzer_sys::fuzz_target;
use qsync::RunArtifact;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(a) = RunArtifact::from_json(text) {
        let first = a.to_json().unwrap();
        let second = RunArtifact::from_json(&first).unwrap().to_json().unwrap();
        assert_eq!(first, second);
        let _ = qsync::export::csv_files(&a);
    }
});
