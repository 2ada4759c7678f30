#![no_main]

use libfuzzer_sys::fuzz_target;
use qresource::io::parse_state;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(file) = parse_state(text) {
            // anything accepted must be a usable density
            let rho = file.state.density();
            assert_eq!(rho.dim(), rho.dims().iter().product::<usize>());
        }
    }
});
