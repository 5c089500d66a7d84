//! Writes a field as raw little-endian values with a sidecar header and
//! reads it back.

use topc::field::{Dims, ScalarField};
use topc::rawio::{read_raw, sidecar_path, write_raw, Dtype};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dims = Dims::new(4, 3, 2)?;
    let f = ScalarField::new(dims, (0..dims.len()).map(|i| i as f64 * 0.5).collect())?;
    let dir = std::env::temp_dir().join(format!("topc-raw-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("field.raw");

    write_raw(&path, &f, Dtype::F32)?;
    println!("sidecar {}:", sidecar_path(&path).display());
    print!("{}", std::fs::read_to_string(sidecar_path(&path))?);

    // dims and dtype come from the sidecar
    let g = read_raw(&path, None, None)?;
    assert_eq!(g.values(), f.values());
    println!("read back {} values", g.len());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
