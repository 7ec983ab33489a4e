//! The parallel linear-scan baseline, and a cross-check that the index
//! path returns exactly the same distances.

use serix::gen::{generate_dataset, Profile};
use serix::sfa::{learn_mcb, McbParams};
use serix::{parallel_scan_knn, Engine, IndexConfig};

fn main() -> serix::Result<()> {
    let n = 256;
    let ds = generate_dataset(Profile::Noisy, 20_000, n, 5)?;
    let queries = generate_dataset(Profile::Noisy, 3, n, 6)?;

    let model = learn_mcb(
        &ds,
        &McbParams {
            sampling_ratio: 0.05,
            ..Default::default()
        },
    )?;
    let engine = Engine::build(
        ds.clone(),
        model,
        IndexConfig {
            leaf_capacity: 500,
            initial_cardinality: 1,
            worker_count: 2,
        },
    )?;

    for qi in 0..queries.len() {
        let q = queries.series(qi);
        let (scan, scan_stats) = parallel_scan_knn(&ds, q, 10, 2)?;
        let (indexed, idx_stats) = engine.exact_knn(q, 10, 2)?;
        let same = scan
            .iter()
            .zip(&indexed)
            .all(|(a, b)| a.distance == b.distance);
        println!(
            "query {qi}: distances identical = {same}; scan touched {} series in {:?}, index touched {} in {:?}",
            scan_stats.exact_distance_computations,
            scan_stats.wall,
            idx_stats.exact_distance_computations,
            idx_stats.wall
        );
        assert!(same, "index result diverged from the scan oracle");
    }
    Ok(())
}
