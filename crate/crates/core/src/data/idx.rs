//! Big-endian IDX files as used by MNIST.

use std::path::Path;

use crate::numerics::{Real, Tensor};
use crate::{Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(Error::Length {
            expected: at + 4,
            found: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], want: u32) -> Result<()> {
    let got = be_u32(bytes, 0)?;
    if got != want {
        return Err(Error::Format(format!(
            "bad IDX magic: expected {want:#010x}, found {got:#010x}"
        )));
    }
    Ok(())
}

fn payload(bytes: &[u8], header: usize, dims: &[u32]) -> Result<Vec<u8>> {
    let len = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
        .and_then(|n| n.checked_add(header))
        .ok_or_else(|| Error::Format(format!("IDX dimensions {dims:?} overflow")))?;
    if bytes.len() < len {
        return Err(Error::Length {
            expected: len,
            found: bytes.len(),
        });
    }
    Ok(bytes[header..len].to_vec())
}

/// `(count, rows, cols, pixels)` of a rank-3 `u8` image file.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, usize, Vec<u8>)> {
    check_magic(bytes, IDX_IMAGES_MAGIC)?;
    let dims = [be_u32(bytes, 4)?, be_u32(bytes, 8)?, be_u32(bytes, 12)?];
    let px = payload(bytes, 16, &dims)?;
    Ok((dims[0] as usize, dims[1] as usize, dims[2] as usize, px))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, IDX_LABELS_MAGIC)?;
    payload(bytes, 8, &[be_u32(bytes, 4)?])
}

/// Images as `[n, rows·cols]` intensities in `[0, 1]`, plus labels.
pub fn load_mnist_idx<T: Real>(images: impl AsRef<Path>, labels: impl AsRef<Path>) -> Result<(Tensor<T>, Vec<usize>)> {
    let (n, rows, cols, px) = parse_idx_images(&std::fs::read(images)?)?;
    let lab = parse_idx_labels(&std::fs::read(labels)?)?;
    if lab.len() != n {
        return Err(Error::Format(format!("{n} images but {} labels", lab.len())));
    }
    let scale = T::lit(1.0 / 255.0);
    let data = px.iter().map(|&p| T::lit(f64::from(p)) * scale).collect();
    Ok((Tensor::from_vec(&[n, rows * cols], data)?, lab.into_iter().map(usize::from).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_image_round_trip() {
        let mut img = Vec::new();
        img.extend(IDX_IMAGES_MAGIC.to_be_bytes());
        for d in [2u32, 2, 3] {
            img.extend(d.to_be_bytes());
        }
        img.extend([0u8, 255, 51, 1, 2, 3, 10, 20, 30, 40, 50, 60]);
        let (n, r, c, px) = parse_idx_images(&img).unwrap();
        assert_eq!((n, r, c), (2, 2, 3));
        assert_eq!(px, img[16..]);
        assert!(matches!(parse_idx_labels(&img), Err(Error::Format(_))));
    }

    #[test]
    fn truncation_reports_expected_length() {
        let mut lab = Vec::new();
        lab.extend(IDX_LABELS_MAGIC.to_be_bytes());
        lab.extend(5u32.to_be_bytes());
        lab.extend([1u8, 2, 3]);
        match parse_idx_labels(&lab) {
            Err(Error::Length { expected, found }) => assert_eq!((expected, found), (13, 11)),
            other => panic!("{other:?}"),
        }
    }
}
