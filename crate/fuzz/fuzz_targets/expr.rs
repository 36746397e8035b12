#![no_main]

use conflux::fields::expr::{default_variables, Expr};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let vars = default_variables(3);
    let Ok(e) = Expr::parse_str(text, &vars) else {
        return;
    };
    // evaluation and symbolic derivatives must not panic, whatever the value
    let x = [0.3, -1.7, 2.5];
    let _ = e.eval(&x);
    for i in 0..vars.len() {
        let _ = e.diff(i).eval(&x);
    }
});
