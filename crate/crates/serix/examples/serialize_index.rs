//! Persist a built index as a snapshot (model + tree + content hashes)
//! and prove the reloaded engine answers identically.

use serix::gen::{generate, Profile};
use serix::index::{build_index, tree_from_bytes, IndexConfig};
use serix::io::{load_dataset, sha256_file, write_raw, Snapshot};
use serix::sfa::{learn_mcb, McbParams, QuantizationModel};
use serix::{Dataset, Engine};

fn main() -> serix::Result<()> {
    let n = 128;
    let dir = std::env::temp_dir();
    let data_path = dir.join("serix_example_data.f32");
    write_raw(&data_path, &generate(Profile::Noisy, 5_000, n, 30))?;

    let ds = load_dataset(&data_path, n, 0)?;
    let model = learn_mcb(
        &ds,
        &McbParams {
            sampling_ratio: 0.1,
            ..Default::default()
        },
    )?;
    let config = IndexConfig {
        leaf_capacity: 200,
        initial_cardinality: 1,
        worker_count: 2,
    };
    let tree = build_index(&ds, &model, config)?;
    let snapshot = Snapshot {
        model_bytes: model.to_bytes(),
        tree_bytes: tree.to_bytes(),
        data_hash: sha256_file(&data_path)?,
        series_count: ds.len() as u64,
        series_length: n as u64,
    };
    let index_path = dir.join("serix_example_index.sx");
    snapshot.write(&index_path)?;
    println!(
        "snapshot: {} bytes at {}",
        snapshot.to_bytes().len(),
        index_path.display()
    );

    // reload everything from disk and cross-check one query
    let snap = Snapshot::read(&index_path)?;
    snap.verify_data(&data_path)?;
    let ds2: Dataset = load_dataset(&data_path, n, 0)?;
    let model2 = QuantizationModel::from_bytes(&snap.model_bytes)?;
    let tree2 = tree_from_bytes(&snap.tree_bytes)?;

    let original = Engine::from_parts(ds.clone(), model, tree)?;
    let reloaded = Engine::from_parts(ds2, model2, tree2)?;
    let q = ds.series(17);
    let (a, _) = original.exact_knn(q, 5, 2)?;
    let (b, _) = reloaded.exact_knn(q, 5, 2)?;
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.distance, y.distance);
    }
    println!("reloaded engine reproduced all {} distances exactly", a.len());
    Ok(())
}
