//! Benchmark fixtures shared by the criterion targets.

use optoent_core::{FilterSpec, SystemParams};

/// Weak coupling, narrow filter.
pub fn weak() -> (SystemParams, FilterSpec) {
    (
        SystemParams::symmetric(1.0, 1e5, 1e4).unwrap(),
        FilterSpec::new(156.5, 10.0).unwrap(),
    )
}

/// Strong coupling, filter as wide as the cavity.
pub fn large_band() -> (SystemParams, FilterSpec) {
    (
        SystemParams::symmetric(1.0, 1e5, 1e6).unwrap(),
        FilterSpec::new(3.16e5, 1e5).unwrap(),
    )
}
