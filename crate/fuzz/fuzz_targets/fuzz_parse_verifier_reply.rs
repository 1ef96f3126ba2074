#![no_main]

use libfuzzer_sys::fuzz_target;
use planmem::llmio::{parse_verifier_reply, render_verdict_text};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(verdict) = parse_verifier_reply(text) {
        assert!(verdict.score <= 100);
        assert_eq!(verdict.accepted, verdict.score == 100 && verdict.violations.is_empty());
        let rendered = render_verdict_text(&verdict);
        let reparsed = parse_verifier_reply(&rendered).expect("rendered verdicts must parse");
        assert_eq!(reparsed.score, verdict.score);
        assert_eq!(reparsed.accepted, verdict.accepted);
        assert_eq!(reparsed.violations.len(), verdict.violations.len());
    }
});
