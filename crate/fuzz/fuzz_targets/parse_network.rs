#![no_main]

use eun::format::{parse_network, serialize_network};
use eun::BuildOptions;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let options = BuildOptions {
        state_cap: 4096,
        ..BuildOptions::lenient()
    };
    if let Ok(net) = parse_network(text, options) {
        // anything accepted must survive a round trip unchanged
        let again = serialize_network(&net);
        let back = parse_network(&again, options).expect("serialized network parses");
        assert_eq!(serialize_network(&back), again);
    }
});
