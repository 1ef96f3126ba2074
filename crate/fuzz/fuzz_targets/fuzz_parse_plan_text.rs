#![no_main]

use libfuzzer_sys::fuzz_target;
use planmem::domain::TaskKind;
use planmem::queryparse::{parse_plan_text, render_plan};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for kind in TaskKind::ALL {
        if let Ok(plan) = parse_plan_text(kind, text) {
            let rendered = render_plan(&plan);
            let reparsed =
                parse_plan_text(kind, &rendered).expect("rendered plans must parse");
            assert_eq!(reparsed, plan, "render/parse round trip diverged for {kind}");
        }
    }
});
