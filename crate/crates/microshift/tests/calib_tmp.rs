use microshift::encoder::encode_image;
use microshift::decoder::decode_levels;
use microshift::fastdec::{fast_decode, heuristic_decode, WlsParams};
use microshift::image::MultiPlaneImage;
use microshift::metrics::{bpp, psnr, ssim};
use microshift::quant::CodecParams;
use microshift_testimg::standard_test_images;
use std::time::Instant;

#[test]
fn calibration_report() {
    let params = CodecParams::default();
    let table = microshift::default_table();
    let mut sums = (0.0, 0.0, 0.0, 0.0);
    for (name, plane) in standard_test_images() {
        let t0 = Instant::now();
        let img = MultiPlaneImage::gray(plane.clone());
        let c = encode_image(&img, &params, &table).unwrap();
        let enc_t = t0.elapsed().as_secs_f64();
        let b = bpp(&c);
        let t1 = Instant::now();
        let q = decode_levels(&c, &table, 9).unwrap();
        let dec_t = t1.elapsed().as_secs_f64();
        let heur = heuristic_decode(&q.planes[0]).unwrap();
        let p_heur: f64 = psnr(&plane, &heur).unwrap();
        let t2 = Instant::now();
        let fast = fast_decode(&q.planes[0], &WlsParams::<f64>::default()).unwrap();
        let fast_t = t2.elapsed().as_secs_f64();
        let p_fast: f64 = psnr(&plane, &fast).unwrap();
        let s_fast: f64 = ssim(&plane, &fast).unwrap();
        println!("{name:10} bpp={b:.3} heur={p_heur:.2}dB fast={p_fast:.2}dB ssim={s_fast:.4} enc={enc_t:.2}s dec={dec_t:.2}s wls={fast_t:.2}s");
        sums.0 += b; sums.1 += p_heur; sums.2 += p_fast; sums.3 += s_fast;
    }
    let n = 12.0;
    println!("MEAN       bpp={:.3} heur={:.2} fast={:.2} ssim={:.4}", sums.0/n, sums.1/n, sums.2/n, sums.3/n);
}
