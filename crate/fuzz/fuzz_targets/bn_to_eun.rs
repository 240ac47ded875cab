#![no_main]

use eun::format::{bn_to_eun, parse_bayes_net};
use eun::BuildOptions;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if parse_bayes_net(text).is_err() {
        return;
    }
    let options = BuildOptions {
        state_cap: 4096,
        ..BuildOptions::default()
    };
    if let Ok(net) = bn_to_eun(text, options) {
        assert!(net.imap_status().is_markov());
    }
});
