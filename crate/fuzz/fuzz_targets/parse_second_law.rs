#![no_main]

use libfuzzer_sys::fuzz_target;

use infodiag_cli::input::SecondLawFile;

fuzz_target!(|data: &[u8]| {
    // Arbitrary bytes must never panic the parser or the chain expansion.
    if let Ok(file) = serde_json::from_slice::<SecondLawFile>(data) {
        let _ = file.into_chain_parts();
    }
});
