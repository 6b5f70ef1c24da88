//! Binary tensor (`DTEN`) and tensor-ring (`TRNG`) files.
//!
//! `DTEN`: magic `DTEN`, u32 version (1), u32 order N, N × u64 extents, then
//! the entries as little-endian f64 in first-index-fastest order.
//!
//! `TRNG`: magic `TRNG`, u32 version (1), u32 core count N, then N `DTEN`
//! records, one per core, in ring order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, TrError};
use crate::tensor::DenseTensor;
use crate::tr::TRFactors;

const DTEN_MAGIC: &[u8; 4] = b"DTEN";
const TRNG_MAGIC: &[u8; 4] = b"TRNG";
const VERSION: u32 = 1;

pub fn write_dten<W: Write>(w: &mut W, t: &DenseTensor) -> Result<()> {
    w.write_all(DTEN_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(t.order() as u32).to_le_bytes())?;
    for &d in t.shape() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(t.len() * 8);
    for v in t.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_dten<R: Read>(r: &mut R) -> Result<DenseTensor> {
    expect_header(r, DTEN_MAGIC)?;
    let order = read_u32(r)? as usize;
    if order == 0 {
        return Err(TrError::Format("DTEN order must be at least 1".into()));
    }
    let mut shape = Vec::with_capacity(order);
    for _ in 0..order {
        let d = read_u64(r)?;
        let d = usize::try_from(d).map_err(|_| TrError::Format(format!("extent {d} too large")))?;
        shape.push(d);
    }
    let len = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&l| l > 0)
        .ok_or_else(|| TrError::Format(format!("invalid DTEN shape {shape:?}")))?;
    let bytes = len
        .checked_mul(8)
        .ok_or_else(|| TrError::Format(format!("DTEN shape {shape:?} overflows")))?;
    let mut buf = vec![0u8; bytes];
    r.read_exact(&mut buf).map_err(truncated)?;
    let data = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    DenseTensor::new(shape, data)
}

pub fn write_trng<W: Write>(w: &mut W, f: &TRFactors) -> Result<()> {
    w.write_all(TRNG_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(f.order() as u32).to_le_bytes())?;
    for core in f.cores() {
        write_dten(w, core)?;
    }
    Ok(())
}

pub fn read_trng<R: Read>(r: &mut R) -> Result<TRFactors> {
    expect_header(r, TRNG_MAGIC)?;
    let n = read_u32(r)? as usize;
    let cores = (0..n).map(|_| read_dten(r)).collect::<Result<Vec<_>>>()?;
    TRFactors::new(cores).map_err(|e| TrError::Format(format!("inconsistent TRNG cores: {e}")))
}

pub fn save_dten(path: impl AsRef<Path>, t: &DenseTensor) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_dten(&mut w, t)?;
    w.flush()?;
    Ok(())
}

pub fn load_dten(path: impl AsRef<Path>) -> Result<DenseTensor> {
    read_dten(&mut BufReader::new(File::open(path)?))
}

pub fn save_trng(path: impl AsRef<Path>, f: &TRFactors) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_trng(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn load_trng(path: impl AsRef<Path>) -> Result<TRFactors> {
    read_trng(&mut BufReader::new(File::open(path)?))
}

fn expect_header<R: Read>(r: &mut R, magic: &[u8; 4]) -> Result<()> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m).map_err(truncated)?;
    if &m != magic {
        return Err(TrError::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&m),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(TrError::Format(format!("unsupported version {version}")));
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> TrError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        TrError::Format("unexpected end of file".into())
    } else {
        TrError::Io(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn dten_layout_is_fixed() {
        let t = DenseTensor::new(vec![2, 1], vec![1.5, -2.0]).unwrap();
        let mut buf = Vec::new();
        write_dten(&mut buf, &t).unwrap();
        let mut expected = b"DTEN".to_vec();
        expected.extend(1u32.to_le_bytes());
        expected.extend(2u32.to_le_bytes());
        expected.extend(2u64.to_le_bytes());
        expected.extend(1u64.to_le_bytes());
        expected.extend(1.5f64.to_le_bytes());
        expected.extend((-2.0f64).to_le_bytes());
        assert_eq!(buf, expected);
    }

    #[test]
    fn trng_round_trip_is_bit_exact() {
        let f = TRFactors::random(&[3, 4, 2], &[2, 3, 1], &mut rng_from_seed(9)).unwrap();
        let mut buf = Vec::new();
        write_trng(&mut buf, &f).unwrap();
        let back = read_trng(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
        let mut again = Vec::new();
        write_trng(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(read_dten(&mut &b"NOPE"[..]), Err(TrError::Format(_))));
        let t = DenseTensor::filled(&[2, 2], 1.0).unwrap();
        let mut buf = Vec::new();
        write_dten(&mut buf, &t).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_dten(&mut buf.as_slice()), Err(TrError::Format(_))));
        let mut bad_version = b"DTEN".to_vec();
        bad_version.extend(2u32.to_le_bytes());
        assert!(matches!(
            read_dten(&mut bad_version.as_slice()),
            Err(TrError::Format(_))
        ));
    }
}
