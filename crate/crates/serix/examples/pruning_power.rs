//! Pruning power of the learned summarizer versus the mean-based one on
//! a high-frequency corpus — the case where segment means carry almost no
//! information and the learned frequency-domain summary keeps pruning.

use serix::eval::pruning_power;
use serix::gen::{generate_dataset, Profile};
use serix::sfa::{learn_mcb, McbParams};
use serix::{Engine, IndexConfig, SaxModel};

fn main() -> serix::Result<()> {
    let n = 256;
    let ds = generate_dataset(Profile::SquareWave, 20_000, n, 20)?;
    let queries = generate_dataset(Profile::SquareWave, 10, n, 21)?;
    let config = IndexConfig {
        leaf_capacity: 500,
        initial_cardinality: 1,
        worker_count: 2,
    };

    let model = learn_mcb(
        &ds,
        &McbParams {
            sampling_ratio: 0.05,
            // let variance selection reach the high-frequency coefficients
            candidate_limit: n / 2,
            ..Default::default()
        },
    )?;
    let sfa = Engine::build(ds.clone(), model, config)?;
    let sax = Engine::build(ds, SaxModel::new(n, 16, 256)?, config)?;

    let p_sfa = pruning_power(&sfa, &queries, 1, 2)?;
    let p_sax = pruning_power(&sax, &queries, 1, 2)?;
    println!("pruning power on {} square-wave series (k=1):", 20_000);
    println!("  learned (sfa): {:.1}%", 100.0 * p_sfa);
    println!("  gaussian (sax): {:.1}%", 100.0 * p_sax);
    Ok(())
}
