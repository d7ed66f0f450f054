use microshift::encoder::encode_image;
use microshift::image::{ImagePlane, MultiPlaneImage};
use microshift::metrics::bpp;
use microshift::quant::CodecParams;

#[test]
fn constant_bpp() {
    let params = CodecParams::default();
    let table = microshift::default_table();
    let img = MultiPlaneImage::gray(ImagePlane::filled(30, 30, 128));
    let c = encode_image(&img, &params, &table).unwrap();
    println!("constant 30x30 bpp = {:.4}", bpp(&c));
    let lens: Vec<usize> = c.streams[0].iter().map(|s| s.len()).collect();
    println!("stream bytes: {lens:?}");
}
