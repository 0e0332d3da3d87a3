use liouville_core::geometry::{disk, Point2};
use liouville_core::solver::{discretize, MEMORY_CAP_ENV};
use liouville_core::Error;
use std::sync::Arc;

#[test]
fn grid_over_the_memory_cap_is_refused() {
    std::env::set_var(MEMORY_CAP_ENV, "1");
    let dom = Arc::new(disk(1.0, Point2::ORIGIN).unwrap());
    assert!(matches!(discretize(dom.clone(), 1.0 / 256.0, [0.0, 0.0]), Err(Error::MemoryCap { .. })));
    assert!(discretize(dom, 0.1, [0.0, 0.0]).is_ok());
}
