//! Generate synthetic corpora in every profile and write one to disk in
//! the raw-f32 format the CLI consumes.

use serix::gen::{generate, generate_dataset, Profile};
use serix::io::{load_dataset, write_raw};

fn main() -> serix::Result<()> {
    let n = 128;
    for profile in Profile::ALL {
        let ds = generate_dataset(profile, 1_000, n, 42)?;
        let mean_sigma: f64 =
            (0..ds.len()).map(|i| ds.stats(i).sigma).sum::<f64>() / ds.len() as f64;
        println!(
            "{:<12} {} series of length {}, mean source sigma {:.3}",
            profile.name(),
            ds.len(),
            n,
            mean_sigma
        );
    }

    let path = std::env::temp_dir().join("serix_example_corpus.f32");
    write_raw(&path, &generate(Profile::Noisy, 500, n, 7))?;
    let back = load_dataset(&path, n, 0)?;
    println!(
        "\nwrote and reloaded {} noisy series from {}",
        back.len(),
        path.display()
    );
    Ok(())
}
