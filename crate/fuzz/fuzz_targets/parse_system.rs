#![no_main]

use libfuzzer_sys::fuzz_target;

use infodiag_cli::input::SystemFile;

fuzz_target!(|data: &[u8]| {
    // Arbitrary bytes must never panic the parser or the validation that
    // turns a parsed file into a checked system.
    if let Ok(file) = serde_json::from_slice::<SystemFile>(data) {
        let _ = file.into_system();
    }
});
