//! The SPIM on-disk matrix format.
//!
//! Layout: magic `"SPIM"` (4 ASCII bytes), format version `u32 = 1`, row
//! count `u32`, column count `u32`, then `rows·cols` IEEE-754 `f64` values.
//! All integers and floats are little-endian. The payload is column-major
//! (one frame's bands are contiguous), so the file body of a `K×R` fragment
//! is exactly a dictionary column.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::masks::Mask;
use crate::spectrogram::Spectrogram;

pub const MAGIC: &[u8; 4] = b"SPIM";
pub const VERSION: u32 = 1;

/// Serialize a matrix into SPIM bytes.
pub fn write_matrix<W: Write>(mut out: W, matrix: &Array2<f64>) -> Result<()> {
    let (rows, cols) = matrix.dim();
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidConfig("cannot write empty matrix".into()));
    }
    if !matrix.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("SPIM payload"));
    }
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(rows as u32).to_le_bytes())?;
    out.write_all(&(cols as u32).to_le_bytes())?;
    for t in 0..cols {
        for k in 0..rows {
            out.write_all(&matrix[(k, t)].to_le_bytes())?;
        }
    }
    Ok(())
}

/// Parse a matrix from SPIM bytes.
pub fn read_matrix<R: Read>(mut input: R) -> Result<Array2<f64>> {
    let mut header = [0u8; 16];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::MalformedSpim("truncated header".into()))?;
    if &header[0..4] != MAGIC {
        return Err(Error::MalformedSpim("bad magic".into()));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::MalformedSpim(format!(
            "unsupported version {version}"
        )));
    }
    let rows = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::MalformedSpim(format!("empty shape {rows}x{cols}")));
    }
    let mut payload = vec![0u8; rows * cols * 8];
    input
        .read_exact(&mut payload)
        .map_err(|_| Error::MalformedSpim("truncated payload".into()))?;
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(Error::MalformedSpim("trailing bytes after payload".into()));
    }
    let mut matrix = Array2::zeros((rows, cols));
    for t in 0..cols {
        for k in 0..rows {
            let at = (t * rows + k) * 8;
            let v = f64::from_le_bytes(payload[at..at + 8].try_into().unwrap());
            if !v.is_finite() {
                return Err(Error::MalformedSpim(format!(
                    "non-finite value at row {k}, col {t}"
                )));
            }
            matrix[(k, t)] = v;
        }
    }
    Ok(matrix)
}

pub fn write_matrix_file<P: AsRef<Path>>(path: P, matrix: &Array2<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix(&mut w, matrix)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix_file<P: AsRef<Path>>(path: P) -> Result<Array2<f64>> {
    read_matrix(BufReader::new(File::open(path)?))
}

pub fn write_spectrogram_file<P: AsRef<Path>>(path: P, spec: &Spectrogram) -> Result<()> {
    write_matrix_file(path, spec.values())
}

pub fn read_spectrogram_file<P: AsRef<Path>>(path: P) -> Result<Spectrogram> {
    Spectrogram::from_array(read_matrix_file(path)?)
}

pub fn write_mask_file<P: AsRef<Path>>(path: P, mask: &Mask) -> Result<()> {
    write_matrix_file(path, mask.values())
}

pub fn read_mask_file<P: AsRef<Path>>(path: P) -> Result<Mask> {
    Mask::from_array(read_matrix_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_fixed() {
        let m = Array2::from_shape_fn((2, 3), |(k, t)| (k * 10 + t) as f64);
        let mut bytes = Vec::new();
        write_matrix(&mut bytes, &m).unwrap();
        assert_eq!(&bytes[0..4], b"SPIM");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 3);
        assert_eq!(bytes.len(), 16 + 6 * 8);
        // column-major: first payload value is (0,0), second is (1,0)
        assert_eq!(
            f64::from_le_bytes(bytes[16..24].try_into().unwrap()),
            m[(0, 0)]
        );
        assert_eq!(
            f64::from_le_bytes(bytes[24..32].try_into().unwrap()),
            m[(1, 0)]
        );
        assert_eq!(
            f64::from_le_bytes(bytes[32..40].try_into().unwrap()),
            m[(0, 1)]
        );
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let m = Array2::from_elem((1, 1), 0.5);
        let mut bytes = Vec::new();
        write_matrix(&mut bytes, &m).unwrap();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_matrix(&bad[..]),
            Err(Error::MalformedSpim(_))
        ));

        assert!(matches!(
            read_matrix(&bytes[..bytes.len() - 1]),
            Err(Error::MalformedSpim(_))
        ));

        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(
            read_matrix(&long[..]),
            Err(Error::MalformedSpim(_))
        ));
    }

    #[test]
    fn rejects_non_finite_payload() {
        let m = Array2::from_elem((1, 2), 1.0);
        let mut bytes = Vec::new();
        write_matrix(&mut bytes, &m).unwrap();
        bytes[16..24].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(
            read_matrix(&bytes[..]),
            Err(Error::MalformedSpim(_))
        ));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            rows in 1usize..6,
            cols in 1usize..6,
            seed in any::<u64>(),
        ) {
            // mix ordinary, tiny, huge, and negative-zero values
            let mut state = seed | 1;
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                match state % 5 {
                    0 => f64::from_bits(state >> 12) * 1e-300,
                    1 => -0.0,
                    2 => (state as f64 / u64::MAX as f64) * 1e300,
                    3 => -(state as f64 / u64::MAX as f64),
                    _ => state as f64 / 1e6,
                }
            };
            let m = Array2::from_shape_fn((rows, cols), |_| {
                let v = next();
                if v.is_finite() { v } else { 0.0 }
            });
            let mut bytes = Vec::new();
            write_matrix(&mut bytes, &m).unwrap();
            let back = read_matrix(&bytes[..]).unwrap();
            prop_assert_eq!(m.dim(), back.dim());
            for (a, b) in m.iter().zip(back.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
