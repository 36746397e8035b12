#![no_main]

use conflux::dec::io::ComplexDocument;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(doc) = ComplexDocument::from_json(text) else {
        return;
    };
    // malformed geometry must come back as an error, never a panic
    let _ = doc.build();
    let again = ComplexDocument::from_json(&doc.to_json().expect("serialize")).expect("roundtrip");
    assert_eq!(doc, again);
});
