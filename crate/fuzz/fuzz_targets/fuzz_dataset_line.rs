#![no_main]

use libfuzzer_sys::fuzz_target;
use planmem::domain::QueryInstance;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(instance) = serde_json::from_str::<QueryInstance>(text) {
        let line = serde_json::to_string(&instance).expect("instances serialize");
        let back: QueryInstance =
            serde_json::from_str(&line).expect("serialized instances parse");
        assert_eq!(back, instance, "serialize/deserialize round trip diverged");
    }
});
