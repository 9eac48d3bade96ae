use mudpod::datagen::{benchmark_generators, z_transform, GeneratorSpec};
use mudpod::io::{read_csv, write_csv};

fn main() -> mudpod::Result<()> {
    let dir = std::env::temp_dir().join("mudpod-synthetic");
    std::fs::create_dir_all(&dir)?;
    for (name, generator, multimodal) in benchmark_generators() {
        let data = GeneratorSpec::new(generator, 500, 1).generate()?;
        let path = dir.join(format!("{name}.csv"));
        write_csv(&path, &data)?;

        let back = read_csv(&path, true, Some(data.cols()))?;
        assert_eq!(back, data);
        let z = z_transform(&data)?;
        println!(
            "{name:<20} {}x{} multimodal={multimodal:<5} first row z-scored {:.3?}",
            data.rows(),
            data.cols(),
            z.row(0)
        );
    }
    println!("csv files in {}", dir.display());
    Ok(())
}
