#![no_main]

use libfuzzer_sys::fuzz_target;

use infodiag_cli::input::ModelFile;

fuzz_target!(|data: &[u8]| {
    // Arbitrary bytes must never panic the parser or the algebraic law
    // checks behind it.
    if let Ok(file) = serde_json::from_slice::<ModelFile>(data) {
        let _ = file.into_backend();
    }
});
