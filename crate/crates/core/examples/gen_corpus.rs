//! Regenerates the shipped corpus: `cargo run -p multiq-core --example gen_corpus -- corpus`

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "corpus".into());
    let manifest = multiq_core::corpus::write_corpus(&dir)?;
    println!("wrote {} circuits to {dir}", manifest.len());
    Ok(())
}
