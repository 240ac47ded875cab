#![no_main]

use eun::format::parse_event;
use eun::{EunGraph, Layer, Ordering, Structure, VariableSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let vars = vec![
        VariableSpec::new("H", ["0", "1"], None).unwrap(),
        VariableSpec::new("W", ["low", "mid", "high"], Some("mid")).unwrap(),
        VariableSpec::new("Grid:A", ["1:0", "2:0.5"], None).unwrap(),
    ];
    let graph = EunGraph::new(3).with_arc(Layer::Utility, 0, 1);
    let structure = Structure::new(vars, Ordering::identity(3), graph).unwrap();
    if let Ok(event) = parse_event(&structure, text) {
        let partial = event.as_cylinder().expect("parsed events are cylinders");
        assert!(!partial.is_empty());
    }
});
