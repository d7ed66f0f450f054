//! Regenerate the predictor table shipped inside the library: train on the
//! synthetic corpus and write `crates/microshift/src/default_table.bin`.

use microshift::context::train_table;
use microshift::quant::CodecParams;
use microshift_testimg::training_corpus;

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/microshift/src/default_table.bin".to_string());
    let params = CodecParams::default();
    let corpus = training_corpus(60, 256);
    let table = train_table(&corpus, &params).expect("training succeeds");
    table.write_file(&out).expect("table written");
    let nonzero = table.entries().iter().filter(|&&e| e != 0).count();
    println!("wrote {out}: crc32=0x{:08X}, {nonzero}/313 nonzero entries", table.crc32());
}
