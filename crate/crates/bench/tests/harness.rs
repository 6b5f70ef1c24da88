use std::fs;

use image::{Rgb, RgbImage};
use tensor_ring::{DenseTensor, SolverConfig};
use tr_bench::data::{read_cifar10, read_coil100};
use tr_bench::harness::{compress_dataset, denoise_hsi, sweep_projection, sweep_spec};
use tr_bench::synth::low_rank_tensor;
use tr_bench::{write_csv, BenchError, Method, NoiseSpec, CSV_HEADER};

fn cfg(ranks: &[usize]) -> SolverConfig {
    SolverConfig {
        ranks: Some(ranks.to_vec()),
        max_sweeps: 30,
        ..SolverConfig::default()
    }
}

const SWEEP_METHODS: [Method; 4] = [Method::Trals, Method::Trsvd, Method::Rtrals, Method::Rtrsvd];

#[test]
fn sweep_emits_one_row_per_size_and_method() {
    let x = low_rank_tensor(&[20, 18, 5], &[2, 3, 2], 3).unwrap();
    let sizes = [6, 12, 40];
    let records = sweep_projection(&x, "cube", &sizes, &SWEEP_METHODS, &cfg(&[2, 3, 2]), Some(1e-10), 3).unwrap();
    assert_eq!(records.len(), sizes.len() * SWEEP_METHODS.len());
    for (i, r) in records.iter().enumerate() {
        let method = SWEEP_METHODS[i % 4];
        assert_eq!(r.method, method.name());
        if method.is_randomized() {
            let spec = sweep_spec(x.shape(), sizes[i / 4], 3);
            assert_eq!(
                r.k,
                spec.sketch_dims
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("x")
            );
        } else {
            assert_eq!(r.k, "-");
            assert_eq!(r, &records[i % 4]);
        }
        assert!(r.rse.is_finite() && r.cr > 0.0);
    }
    // sizes past the extent clip to it
    assert_eq!(records[10].k, "20x18x5");

    let mut buf = Vec::new();
    write_csv(&mut buf, &records).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), records.len());
}

#[test]
fn full_size_sketch_matches_deterministic_methods() {
    let x = low_rank_tensor(&[15, 15, 4], &[2, 2, 2], 8).unwrap();
    let records = sweep_projection(&x, "cube", &[15], &SWEEP_METHODS, &cfg(&[2, 2, 2]), None, 0).unwrap();
    assert!((records[0].rse - records[2].rse).abs() <= 1e-8);
    assert!((records[1].rse - records[3].rse).abs() <= 1e-8);
    assert_eq!(records[0].ranks, records[2].ranks);
}

#[test]
fn sweep_rejects_bad_input() {
    let cube = low_rank_tensor(&[6, 6, 2], &[1, 1, 1], 0).unwrap();
    let flat = DenseTensor::zeros(&[6, 6]).unwrap();
    let c = cfg(&[1, 1, 1]);
    assert!(matches!(
        sweep_projection(&flat, "x", &[2], &SWEEP_METHODS, &c, None, 0),
        Err(BenchError::Args(_))
    ));
    assert!(matches!(
        sweep_projection(&cube, "x", &[0], &SWEEP_METHODS, &c, None, 0),
        Err(BenchError::Args(_))
    ));
}

#[test]
fn compression_ratio_follows_core_sizes() {
    let dims = [8, 8, 3, 100];
    let ranks = [2, 3, 2, 2];
    let x = low_rank_tensor(&dims, &ranks, 5).unwrap();
    let (rec, factors) = compress_dataset(&x, "synthetic", Method::Trals, &cfg(&ranks), None).unwrap();
    let params: usize = (0..4).map(|n| ranks[n] * dims[n] * ranks[(n + 1) % 4]).sum();
    let entries: usize = dims.iter().product();
    assert!((rec.cr - entries as f64 / params as f64).abs() < 1e-12);
    assert_eq!(rec.ranks, "2x3x2x2");
    assert_eq!(factors.ranks(), ranks.to_vec());
    let recomputed = tensor_ring::rse(&x, &factors.reconstruct_full()).unwrap();
    assert!((recomputed - rec.rse).abs() < 1e-10);
}

fn cifar_record(label: u8, seed: u8) -> Vec<u8> {
    let mut rec = vec![label];
    rec.extend((0..3072u32).map(|i| (i as u8).wrapping_mul(seed).wrapping_add(seed)));
    rec
}

#[test]
fn cifar_records_map_to_column_major_images() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = cifar_record(3, 1);
    bytes.extend(cifar_record(7, 5));
    bytes.extend(cifar_record(0, 9));
    fs::write(dir.path().join("data_batch_1.bin"), &bytes).unwrap();
    fs::write(dir.path().join("data_batch_2.bin"), cifar_record(1, 2)).unwrap();
    fs::write(dir.path().join("readme.txt"), b"ignored").unwrap();

    let x = read_cifar10(dir.path(), None).unwrap();
    assert_eq!(x.shape(), &[32, 32, 3, 4]);
    // image 1, channel 2, row 4, column 9
    let raw = bytes[3073 + 1 + 2 * 1024 + 4 * 32 + 9];
    assert_eq!(x.get(&[4, 9, 2, 1]).unwrap(), f64::from(raw) / 255.0);
    assert_eq!(x.get(&[0, 0, 0, 3]).unwrap(), 2.0 / 255.0);

    let limited = read_cifar10(dir.path(), Some(2)).unwrap();
    assert_eq!(limited.shape(), &[32, 32, 3, 2]);
    assert_eq!(limited.data(), &x.data()[..limited.len()]);

    let single = read_cifar10(&dir.path().join("data_batch_2.bin"), None).unwrap();
    assert_eq!(single.shape(), &[32, 32, 3, 1]);

    let bad = dir.path().join("short.bin");
    fs::write(&bad, vec![0u8; 100]).unwrap();
    let err = read_cifar10(&bad, None).unwrap_err();
    assert!(matches!(err, BenchError::Data { .. }));
    assert_eq!(err.exit_code(), 3);
    assert!(read_cifar10(tempfile::tempdir().unwrap().path(), None).is_err());
}

#[test]
fn coil_views_stack_by_object_and_angle() {
    let dir = tempfile::tempdir().unwrap();
    for obj in 1..=2u8 {
        for view in 0..72u8 {
            let img = RgbImage::from_pixel(32, 32, Rgb([view, obj * 100, 255 - view]));
            img.save(dir.path().join(format!("obj{obj}__{}.png", u32::from(view) * 5)))
                .unwrap();
        }
    }
    let x = read_coil100(dir.path()).unwrap();
    assert_eq!(x.shape(), &[32, 32, 3, 72, 2]);
    assert_eq!(x.get(&[5, 7, 0, 10, 1]).unwrap(), 10.0 / 255.0);
    assert_eq!(x.get(&[31, 0, 1, 71, 1]).unwrap(), 200.0 / 255.0);
    assert_eq!(x.get(&[0, 31, 2, 3, 0]).unwrap(), 252.0 / 255.0);

    fs::remove_file(dir.path().join("obj2__90.png")).unwrap();
    assert!(matches!(read_coil100(dir.path()), Err(BenchError::Data { .. })));
}

#[test]
fn denoising_scores_against_the_clean_cube() {
    let clean = low_rank_tensor(&[64, 64, 16], &[3, 3, 2], 0).unwrap();
    let spec = tensor_ring::ProjectionSpec::new(vec![32, 32, 16], 0);
    let solver = SolverConfig {
        als_starts: 4,
        ..cfg(&[3, 3, 2])
    };
    let dump = tempfile::tempdir().unwrap();
    let noises = [NoiseSpec::none(), NoiseSpec::db(20.0, 0)];
    let records = denoise_hsi(
        &clean,
        "cube",
        &noises,
        &[Method::Rtrals],
        &solver,
        &spec,
        Some(dump.path()),
    )
    .unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].dataset, "cube@none");
    assert_eq!(records[1].dataset, "cube@20dB");
    assert!(records[0].rse < 0.05, "{}", records[0].rse);
    assert!(records[1].rse < 0.1, "{}", records[1].rse);
    let pgms = fs::read_dir(dump.path()).unwrap().count();
    assert_eq!(pgms, 16 * (1 + 2 + 2));
}
