#![no_main]

use std::str::FromStr;

use libfuzzer_sys::fuzz_target;
use lrmg::graph::{Axis, Metric, Sigma, Weighting};
use lrmg::solvers::FilteredSide;
use lrmg::synth::{ManifoldKind, NoisePlacement};
use lrmg::{LaplacianKind, Loss};

/// Anything that parses must print to a string that parses to the same value.
fn round_trip<T>(s: &str)
where
    T: FromStr + ToString + PartialEq + std::fmt::Debug,
{
    if let Ok(v) = s.parse::<T>() {
        let again = v.to_string().parse::<T>().ok();
        assert_eq!(again.as_ref(), Some(&v), "{s:?}");
    }
}

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    round_trip::<Axis>(s);
    round_trip::<Weighting>(s);
    round_trip::<Metric>(s);
    round_trip::<Sigma>(s);
    round_trip::<LaplacianKind>(s);
    round_trip::<Loss>(s);
    round_trip::<FilteredSide>(s);
    round_trip::<ManifoldKind>(s);
    round_trip::<NoisePlacement>(s);
});
