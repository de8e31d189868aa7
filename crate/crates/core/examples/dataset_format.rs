//! Writing and reading the QBMD1 binary image format and the pixel
//! encoding fed to the visible units.

use qbm::data::{encode_item, synthetic, Dataset, Split};

pub fn run_example() -> qbm::Result<()> {
    let ds = synthetic([20, 5, 5], 1)?;
    let dir = std::env::temp_dir().join(format!("qbm-dataset-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("toy.qbmd");
    ds.save(&path)?;
    let bytes = std::fs::metadata(&path)?.len();
    let back = Dataset::load(&path)?;
    std::fs::remove_dir_all(&dir)?;
    println!(
        "{} items, {bytes} bytes on disk, round trip equal: {}",
        back.len(),
        back == ds
    );
    for split in Split::ALL {
        println!(
            "{:>5}: {} items, prevalence {:.2}",
            split.name(),
            back.count(split),
            back.prevalence(split).unwrap_or(f64::NAN)
        );
    }
    let p = encode_item(&back.items()[0]);
    let (lo, hi) = p
        .inputs
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    println!("first item: label {:?}, inputs in [{lo:.3}, {hi:.3}]", p.labels);
    Ok(())
}

fn main() {
    run_example().unwrap();
}
