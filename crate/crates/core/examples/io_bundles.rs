//! Writes one actuation bundle under each exchange strategy and reads it back.
//!
//! ```text
//! cargo run --example io_bundles -- [directory]
//! ```

use std::path::PathBuf;

use afc_drl::coupling::{
    bundle_dir, read_action, read_bundle, write_action, write_bundle, ActuationBundle, IoStrategy,
};
use afc_drl::env::{actuate, reset, EnvConfig};

fn main() -> afc_drl::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("afc_io_bundles"));
    let config = EnvConfig::default();
    let (state, _) = reset(&config, 3);
    let out = actuate(&state, 0.8, &config)?;
    let bundle = ActuationBundle::from_outcome(0, 0, &out);

    let mut sizes = Vec::new();
    for strategy in [IoStrategy::baseline(), IoStrategy::optimized()] {
        let dir = bundle_dir(&root.join(strategy.mode.label()), 0, 0, 0);
        std::fs::create_dir_all(&dir).map_err(|e| afc_drl::Error::io(&dir, e))?;
        let action_bytes = write_action(&dir, 0.8, &strategy)?;
        let bundle_bytes = write_bundle(&dir, &bundle, &strategy)?;
        let back = read_bundle(&dir, &strategy)?;
        assert!(back.bitwise_eq(&bundle));
        assert_eq!(read_action(&dir, &strategy)?, 0.8);
        println!(
            "{:9} bundle {bundle_bytes:>8} bytes, action {action_bytes:>3} bytes, round trip exact, in {}",
            strategy.mode.label(),
            dir.display()
        );
        sizes.push(bundle_bytes);
    }
    println!(
        "optimized bundle is {:.1}% smaller",
        100.0 * (1.0 - sizes[1] as f64 / sizes[0] as f64)
    );
    Ok(())
}
