//! Build a tree index over a synthetic corpus and answer exact k-NN
//! queries, showing how much of the data the lower bounds pruned away.

use serix::gen::{generate_dataset, Profile};
use serix::sfa::{learn_mcb, McbParams};
use serix::{Engine, IndexConfig};

fn main() -> serix::Result<()> {
    let n = 256;
    let ds = generate_dataset(Profile::Smooth, 50_000, n, 3)?;
    let queries = generate_dataset(Profile::Smooth, 5, n, 4)?;

    let model = learn_mcb(&ds, &McbParams::default())?;
    let total = ds.len();
    let engine = Engine::build(
        ds,
        model,
        IndexConfig {
            leaf_capacity: 1_000,
            initial_cardinality: 1,
            worker_count: 4,
        },
    )?;
    println!(
        "indexed {total} series; root fanout {}",
        engine.tree().root.len()
    );

    for qi in 0..queries.len() {
        let (neighbors, stats) = engine.exact_knn(queries.series(qi), 5, 4)?;
        let pruned = 1.0 - stats.exact_distance_computations as f64 / total as f64;
        println!(
            "query {qi}: 1-NN id {} at {:.4}, {:.1}% of series never touched, {:?}",
            neighbors[0].id,
            neighbors[0].distance,
            100.0 * pruned,
            stats.wall
        );
    }
    Ok(())
}
