#![no_main]

use libfuzzer_sys::fuzz_target;
use planmem::domain::TaskKind;
use planmem::fixtures::same_items_any_order;
use planmem::llmio::parse_extractor_reply;
use planmem::queryparse::render_constraints;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for kind in TaskKind::ALL {
        if let Ok(cs) = parse_extractor_reply(kind, text) {
            assert_eq!(cs.task_kind, kind);
            let rendered = render_constraints(&cs);
            let reparsed = parse_extractor_reply(kind, &rendered)
                .expect("rendered constraint lists must parse");
            assert!(
                same_items_any_order(&reparsed, &cs),
                "render/parse round trip diverged for {kind}"
            );
        }
    }
});
