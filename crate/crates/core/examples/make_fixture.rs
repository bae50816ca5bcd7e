//! Regenerates `tests/data/fixture_index.csv`.
//!
//! ```text
//! cargo run -p evotrade --example make_fixture [OUT]
//! ```

use std::fs::File;
use std::io::BufWriter;

fn main() -> evotrade::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/fixture_index.csv").to_string());
    let series = evotrade::synthetic::fixture_index();
    series.write_csv(BufWriter::new(File::create(&out)?))?;
    eprintln!("wrote {} bars ({}-{}) to {out}", series.len(), series.first_year(), series.last_year());
    Ok(())
}
