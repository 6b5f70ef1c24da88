//! Dataset ingestion and band dumps.
//!
//! Images become `rows × cols × channels` tensors with pixel values scaled
//! to `[0, 1]`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use image::imageops::FilterType;
use image::RgbImage;
use tensor_ring::io::load_dten;
use tensor_ring::DenseTensor;

use crate::error::{BenchError, Result};

const CIFAR_SIDE: usize = 32;
const CIFAR_RECORD: usize = 1 + 3 * CIFAR_SIDE * CIFAR_SIDE;
const COIL_SIDE: u32 = 32;
const COIL_VIEWS: usize = 72;

pub fn rgb_tensor(img: &RgbImage) -> DenseTensor {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut data = vec![0.0; h * w * 3];
    for (x, y, px) in img.enumerate_pixels() {
        let (r, c) = (y as usize, x as usize);
        for ch in 0..3 {
            data[r + h * (c + w * ch)] = f64::from(px[ch]) / 255.0;
        }
    }
    DenseTensor::new(vec![h, w, 3], data).expect("length matches shape")
}

/// Loads an RGB image, optionally resampled (bilinear) to `side × side`.
pub fn load_image(path: &Path, side: Option<u32>) -> Result<DenseTensor> {
    let mut img = image::open(path)?.to_rgb8();
    if let Some(s) = side {
        if img.width() != s || img.height() != s {
            img = image::imageops::resize(&img, s, s, FilterType::Triangle);
        }
    }
    Ok(rgb_tensor(&img))
}

/// Reads a DTEN file, or any PNG/JPEG image as an RGB tensor.
pub fn load_tensor(path: &Path, side: Option<u32>) -> Result<DenseTensor> {
    let is_dten = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("dten"));
    if is_dten {
        load_dten(path).map_err(|e| BenchError::data(path, e.to_string()))
    } else {
        load_image(path, side)
    }
}

/// Batch files of CIFAR-10: the path itself, or the sorted
/// `data_batch_*.bin` files of a directory.
fn cifar_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("data_batch_") && n.ends_with(".bin"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(BenchError::data(path, "no data_batch_*.bin files"));
    }
    Ok(files)
}

/// CIFAR-10 binary records as a `32 × 32 × 3 × n` tensor. Labels are
/// dropped; `limit` caps the number of images.
pub fn read_cifar10(path: &Path, limit: Option<usize>) -> Result<DenseTensor> {
    let mut bytes = Vec::new();
    for file in cifar_files(path)? {
        let chunk = fs::read(&file)?;
        if chunk.is_empty() || chunk.len() % CIFAR_RECORD != 0 {
            return Err(BenchError::data(
                &file,
                format!(
                    "{} bytes is not a whole number of {CIFAR_RECORD}-byte records",
                    chunk.len()
                ),
            ));
        }
        bytes.extend_from_slice(&chunk);
    }
    let mut count = bytes.len() / CIFAR_RECORD;
    if let Some(l) = limit {
        count = count.min(l);
    }
    let plane = CIFAR_SIDE * CIFAR_SIDE;
    let mut data = vec![0.0; 3 * plane * count];
    for (img, record) in bytes.chunks_exact(CIFAR_RECORD).take(count).enumerate() {
        let pixels = &record[1..];
        for ch in 0..3 {
            for r in 0..CIFAR_SIDE {
                for c in 0..CIFAR_SIDE {
                    let v = pixels[ch * plane + r * CIFAR_SIDE + c];
                    data[r + CIFAR_SIDE * (c + CIFAR_SIDE * (ch + 3 * img))] = f64::from(v) / 255.0;
                }
            }
        }
    }
    Ok(DenseTensor::new(vec![CIFAR_SIDE, CIFAR_SIDE, 3, count], data)?)
}

/// COIL-100 stack `32 × 32 × 3 × 72 × objects` from `obj{k}__{angle}.png`
/// files (angles 0, 5, …, 355), resampled to 32×32. Objects `1..=n` must
/// all be complete, where `n` is the largest object number present.
pub fn read_coil100(dir: &Path) -> Result<DenseTensor> {
    let objects = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().into_string().ok()?;
            name.strip_prefix("obj")?.split("__").next()?.parse::<usize>().ok()
        })
        .max()
        .ok_or_else(|| BenchError::data(dir, "no obj*__*.png files"))?;
    let side = COIL_SIDE as usize;
    let frame = side * side * 3;
    let mut data = vec![0.0; frame * COIL_VIEWS * objects];
    for obj in 0..objects {
        for view in 0..COIL_VIEWS {
            let file = dir.join(format!("obj{}__{}.png", obj + 1, view * 5));
            if !file.exists() {
                return Err(BenchError::data(&file, "missing COIL-100 view"));
            }
            let t = load_image(&file, Some(COIL_SIDE))?;
            let start = frame * (view + COIL_VIEWS * obj);
            data[start..start + frame].copy_from_slice(t.data());
        }
    }
    Ok(DenseTensor::new(vec![side, side, 3, COIL_VIEWS, objects], data)?)
}

/// Binary PGM (P5) of a column-major `rows × cols` band, linearly rescaled
/// from its own min/max to 0..255.
pub fn write_pgm(path: &Path, band: &[f64], rows: usize, cols: usize) -> Result<()> {
    if band.len() != rows * cols {
        return Err(BenchError::Args(format!(
            "band of {} values is not {rows}x{cols}",
            band.len()
        )));
    }
    let lo = band.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = band.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = BufWriter::new(fs::File::create(path)?);
    write!(out, "P5\n{cols} {rows}\n255\n")?;
    let mut row = vec![0u8; cols];
    for r in 0..rows {
        for (c, px) in row.iter_mut().enumerate() {
            *px = (255.0 * (band[r + rows * c] - lo) / span).round() as u8;
        }
        out.write_all(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// One PGM per slice along the third mode, named `{prefix}_band{k:03}.pgm`.
pub fn dump_bands(cube: &DenseTensor, dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
    if cube.order() != 3 {
        return Err(BenchError::Args(format!(
            "band dumps need a cube, got order {}",
            cube.order()
        )));
    }
    fs::create_dir_all(dir)?;
    let (rows, cols, bands) = (cube.shape()[0], cube.shape()[1], cube.shape()[2]);
    let plane = rows * cols;
    (0..bands)
        .map(|k| {
            let path = dir.join(format!("{prefix}_band{k:03}.pgm"));
            write_pgm(&path, &cube.data()[k * plane..(k + 1) * plane], rows, cols)?;
            Ok(path)
        })
        .collect()
}
