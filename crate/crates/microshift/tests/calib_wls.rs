use microshift::decoder::decode_levels;
use microshift::encoder::encode_image;
use microshift::fastdec::{heuristic_decode, wls_smooth, WlsParams};
use microshift::image::MultiPlaneImage;
use microshift::metrics::psnr;
use microshift::quant::CodecParams;
use microshift_testimg::standard_image;

#[test]
fn wls_sweep() {
    let params = CodecParams::default();
    let table = microshift::default_table();
    for name in ["lena", "goldhill", "man", "airplane"] {
        let plane = standard_image(name);
        let c = encode_image(&MultiPlaneImage::gray(plane.clone()), &params, &table).unwrap();
        let q = decode_levels(&c, &table, 9).unwrap();
        let heur = heuristic_decode(&q.planes[0]).unwrap();
        let p0: f64 = psnr(&plane, &heur).unwrap();
        print!("{name:9} heur={p0:.2} | ");
        for (lam, sc) in [(2.0, 7.0), (5.0, 7.0), (10.0, 7.0), (25.0, 7.0), (5.0, 3.0), (10.0, 3.0), (25.0, 3.0), (10.0, 14.0), (3.0, 10.0)] {
            let p = WlsParams { iterations: 8, lambda: lam, sigma_c: sc };
            let sm = wls_smooth(&heur, &heur, &p).unwrap();
            let ps: f64 = psnr(&plane, &sm).unwrap();
            print!("L{lam}/s{sc}={ps:.2} ");
        }
        println!();
    }
}
