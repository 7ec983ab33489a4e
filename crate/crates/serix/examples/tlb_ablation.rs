//! Tightness-of-lower-bound ablation: learned equi-width and equi-depth
//! quantization against the fixed Gaussian breakpoints, across alphabet
//! sizes. Higher is better; 1.0 means the bound equals the true distance.

use serix::eval::{tlb, TLB_CSV_HEADER};
use serix::gen::{generate_dataset, Profile};
use serix::sfa::{learn_mcb, Binning, McbParams};
use serix::SaxModel;

fn main() -> serix::Result<()> {
    let n = 256;
    let ds = generate_dataset(Profile::Noisy, 2_000, n, 10)?;
    let queries = generate_dataset(Profile::Noisy, 20, n, 11)?;

    println!("{TLB_CSV_HEADER}");
    for a in [4usize, 16, 64, 256] {
        for binning in [Binning::EquiWidth, Binning::EquiDepth] {
            let model = learn_mcb(
                &ds,
                &McbParams {
                    alphabet_size: a,
                    sampling_ratio: 0.2,
                    binning,
                    ..Default::default()
                },
            )?;
            let name = match binning {
                Binning::EquiWidth => "sfa-ew",
                Binning::EquiDepth => "sfa-ed",
            };
            println!("{}", tlb(&model, name, &ds, &queries, 500, 1)?.csv_row());
        }
        let sax = SaxModel::new(n, 16, a)?;
        println!("{}", tlb(&sax, "isax", &ds, &queries, 500, 1)?.csv_row());
    }
    Ok(())
}
