#![no_main]

use libfuzzer_sys::fuzz_target;

use infodiag_cli::input::GraphFile;

fuzz_target!(|data: &[u8]| {
    // Arbitrary bytes must never panic the parser or the edge validation.
    if let Ok(file) = serde_json::from_slice::<GraphFile>(data) {
        let _ = file.into_graph();
    }
});
