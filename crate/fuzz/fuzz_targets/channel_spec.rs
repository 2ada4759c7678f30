#![no_main]

use libfuzzer_sys::fuzz_target;
use qresource::channel_spec::ChannelSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = ChannelSpec::from_json(text) else { return };
    // re-serialization must parse back to the same spec
    assert_eq!(ChannelSpec::from_json(&spec.to_json()).ok().as_ref(), Some(&spec));
    if let Ok(ch) = spec.build_unchecked() {
        assert_eq!(ch.d_in(), ch.dims_in().iter().product::<usize>());
    }
});
