#![no_main]

use libfuzzer_sys::fuzz_target;
use planmem::domain::TaskKind;
use planmem::fixtures::same_items_any_order;
use planmem::queryparse::{parse_query, render_query};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for kind in TaskKind::ALL {
        if let Ok((cs, _)) = parse_query(kind, text) {
            let rendered = render_query(&cs);
            let (reparsed, _) =
                parse_query(kind, &rendered).expect("rendered queries must parse");
            assert!(
                same_items_any_order(&reparsed, &cs),
                "render/parse round trip diverged for {kind}"
            );
        }
    }
});
