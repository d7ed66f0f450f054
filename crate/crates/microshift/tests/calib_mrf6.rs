use microshift::decoder::decode_levels;
use microshift::encoder::encode_image;
use microshift::image::MultiPlaneImage;
use microshift::metrics::psnr;
use microshift::mrf::{mrf_decode, MrfParams};
use microshift::quant::CodecParams;
use microshift_testimg::standard_image;
use std::time::Instant;

#[test]
fn mrf_margin_probe() {
    let params = CodecParams::default();
    let table = microshift::default_table();
    let plane = standard_image("lena");
    let c = encode_image(&MultiPlaneImage::gray(plane.clone()), &params, &table).unwrap();
    let q = decode_levels(&c, &table, 9).unwrap();
    for (sigma, gamma, margin) in [(5.0, 0.02, 8u16), (5.0, 0.035, 8)] {
        let mp = MrfParams { sigma, gamma, label_margin: margin, ..MrfParams::default() };
        let t = Instant::now();
        let out = mrf_decode::<f64>(&q.planes[0], &mp, 9).unwrap();
        let p: f64 = psnr(&plane, &out).unwrap();
        let flips = plane.samples().iter().zip(out.samples())
            .filter(|(&a, &b)| (a as i32 - b as i32).abs() > 20).count();
        println!("s={sigma} g={gamma} m={margin}: psnr={p:.2} flips={flips} {:.0}s", t.elapsed().as_secs_f64());
    }
}
