//! Learn a quantization model from a sample of the data and inspect what
//! it picked: which Fourier coefficients carry variance, and the learned
//! breakpoint rows.

use serix::gen::{generate_dataset, Profile};
use serix::sfa::{learn_mcb, Binning, McbParams};
use serix::spectral::mean_selected_index;
use serix::Summarizer;

fn main() -> serix::Result<()> {
    let ds = generate_dataset(Profile::Noisy, 5_000, 256, 1)?;
    for binning in [Binning::EquiWidth, Binning::EquiDepth] {
        let model = learn_mcb(
            &ds,
            &McbParams {
                binning,
                // equi-depth needs at least `a` sample values
                sampling_ratio: 0.1,
                ..Default::default()
            },
        )?;
        let sel = model.selected();
        println!(
            "{binning:?}: l={} a={}, selected layout positions {:?}",
            model.word_length(),
            model.alphabet_size(),
            sel.indices
        );
        println!(
            "  mean selected coefficient index {:.2}, {} skipped, {} nudged rows",
            mean_selected_index(sel)?,
            model.skipped_positions().len(),
            model.nudged_rows().len()
        );
        let row = model.breakpoint_row(0);
        println!(
            "  first row: {} breakpoints in [{:.3}, {:.3}]",
            row.len(),
            row[0],
            row[row.len() - 1]
        );
        let word = model.transform(ds.series(0));
        println!("  word of series 0: {:?}...", &word.symbols[..8]);
    }
    Ok(())
}
