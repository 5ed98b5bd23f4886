//! `SNNT` spike container.
//!
//! Little-endian: magic `SNNT`, version `u32`, `B`, `N`, `T` as `u32`,
//! `dt_ms` as `f64`, label count `u32` and that many `u16` labels, then
//! `B·N` rows of `ceil(T/8)` bytes, time packed LSB-first.

use std::io::{Read, Write};
use std::path::Path;

use super::{row_bytes, DatasetMeta, EncodedDataset};
use crate::{Error, Result};

pub const SNNT_MAGIC: [u8; 4] = *b"SNNT";
pub const SNNT_VERSION: u32 = 1;

pub fn write_spikes(mut w: impl Write, ds: &EncodedDataset) -> Result<()> {
    let to_u32 = |v: usize, what: &str| {
        u32::try_from(v).map_err(|_| Error::Format(format!("{what} {v} does not fit in u32")))
    };
    let mut head = Vec::with_capacity(32 + 2 * ds.labels.len());
    head.extend(SNNT_MAGIC);
    head.extend(SNNT_VERSION.to_le_bytes());
    head.extend(to_u32(ds.samples(), "batch")?.to_le_bytes());
    head.extend(to_u32(ds.meta.inputs, "neurons")?.to_le_bytes());
    head.extend(to_u32(ds.meta.steps, "steps")?.to_le_bytes());
    head.extend(ds.meta.dt_ms.to_le_bytes());
    head.extend(to_u32(ds.labels.len(), "label count")?.to_le_bytes());
    for &l in &ds.labels {
        let l = u16::try_from(l).map_err(|_| Error::Label(format!("label {l} does not fit in u16")))?;
        head.extend(l.to_le_bytes());
    }
    w.write_all(&head)?;
    w.write_all(ds.packed())?;
    Ok(())
}

fn take<'a>(buf: &'a [u8], at: &mut usize, n: usize) -> Result<&'a [u8]> {
    let s = buf.get(*at..*at + n).ok_or(Error::Length {
        expected: *at + n,
        found: buf.len(),
    })?;
    *at += n;
    Ok(s)
}

fn u32_at(buf: &[u8], at: &mut usize) -> Result<usize> {
    let b = take(buf, at, 4)?;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
}

pub fn read_spikes(mut r: impl Read) -> Result<EncodedDataset> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let mut at = 0;
    let magic = take(&buf, &mut at, 4)?;
    if magic != SNNT_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}, expected \"SNNT\"")));
    }
    let version = u32_at(&buf, &mut at)? as u32;
    if version != SNNT_VERSION {
        return Err(Error::Format(format!(
            "unsupported SNNT version {version} (expected {SNNT_VERSION})"
        )));
    }
    let (b, n, t) = (u32_at(&buf, &mut at)?, u32_at(&buf, &mut at)?, u32_at(&buf, &mut at)?);
    let dt = f64::from_le_bytes(take(&buf, &mut at, 8)?.try_into().expect("8 bytes"));
    let count = u32_at(&buf, &mut at)?;
    let labels: Vec<usize> = take(&buf, &mut at, 2 * count)?
        .chunks(2)
        .map(|c| usize::from(u16::from_le_bytes([c[0], c[1]])))
        .collect();
    let payload = b
        .checked_mul(n)
        .and_then(|x| x.checked_mul(row_bytes(t)))
        .ok_or_else(|| Error::Format(format!("dimensions {b}x{n}x{t} overflow")))?;
    if buf.len() - at != payload {
        return Err(Error::Length {
            expected: at + payload,
            found: buf.len(),
        });
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let meta = DatasetMeta {
        steps: t,
        dt_ms: dt,
        inputs: n,
        classes,
        encoder: "snnt".into(),
        seed: 0,
    };
    Ok(EncodedDataset::from_raw(meta, labels, buf[at..].to_vec()))
}

pub fn save_spikes(path: impl AsRef<Path>, ds: &EncodedDataset) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_spikes(&mut f, ds)?;
    f.flush()?;
    Ok(())
}

pub fn load_spikes(path: impl AsRef<Path>) -> Result<EncodedDataset> {
    read_spikes(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_synthetic;
    use crate::numerics::Tensor;

    fn sample(b: usize) -> EncodedDataset {
        let s = gen_synthetic::<f32>(b, 5, 13, 1.0, (50.0, 200.0), 4).unwrap();
        let meta = DatasetMeta {
            steps: 13,
            dt_ms: 0.5,
            inputs: 5,
            classes: 4,
            encoder: "snnt".into(),
            seed: 0,
        };
        EncodedDataset::from_spikes(&s, (0..b).map(|i| i % 4).collect(), meta).unwrap()
    }

    #[test]
    fn round_trip() {
        let ds = sample(6);
        let mut bytes = Vec::new();
        write_spikes(&mut bytes, &ds).unwrap();
        let back = read_spikes(&bytes[..]).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn empty_dataset() {
        let meta = DatasetMeta {
            steps: 8,
            dt_ms: 1.0,
            inputs: 3,
            classes: 0,
            encoder: "snnt".into(),
            seed: 0,
        };
        let ds = EncodedDataset::from_spikes(&Tensor::<f32>::zeros(&[0, 3, 8]), vec![], meta).unwrap();
        let mut bytes = Vec::new();
        write_spikes(&mut bytes, &ds).unwrap();
        let back = read_spikes(&bytes[..]).unwrap();
        assert_eq!(back.samples(), 0);
        assert_eq!(back.spikes::<f32>().shape(), &[0, 3, 8]);
    }

    #[test]
    fn corruption() {
        let mut bytes = Vec::new();
        write_spikes(&mut bytes, &sample(3)).unwrap();
        let full = bytes.len();
        match read_spikes(&bytes[..full - 2]) {
            Err(Error::Length { expected, found }) => assert_eq!((expected, found), (full, full - 2)),
            other => panic!("{other:?}"),
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(read_spikes(&bad[..]), Err(Error::Format(_))));
        let mut bad = bytes;
        bad[4] = 9;
        assert!(matches!(read_spikes(&bad[..]), Err(Error::Format(_))));
    }
}
