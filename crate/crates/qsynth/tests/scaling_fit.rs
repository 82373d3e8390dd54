mod common;

use common::{depth_fit, FIT_RESIDUAL_RATIO};

/// Known to fail; see the acceptance output for the measured depths.
#[test]
#[ignore = "emitted depth does not follow a single 2^{n/2} n^2 constant"]
fn depth_follows_quadratic_model() {
    let (rows, c, spread) = depth_fit();
    assert!(
        spread < FIT_RESIDUAL_RATIO,
        "depths {rows:?}, C = {c:.2}, spread {spread:.2}"
    );
}
