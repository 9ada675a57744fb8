//! Binary tensor interchange and CSV matrix emission.
//!
//! 3-D arrays travel in a small self-describing container: an 8-byte magic,
//! three little-endian `u64` dimensions (T, N, C), then the payload as
//! row-major little-endian `f64`. Lower-rank arrays are stored with trailing
//! dimensions of 1. Series windows add a JSON sidecar (`<stem>.meta.json`)
//! holding the step interval and the start timestamp.
//!
//! 2-D artifacts (masks, scores, attention maps) are emitted as headerless
//! CSV — reals with 9 decimals, booleans as `0`/`1` — so golden-file
//! comparisons are stable.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::SeriesWindow;

/// Leading bytes of every tensor container.
pub const MAGIC: &[u8; 8] = b"HFARR3D\0";

/// Timing sidecar for a stored series window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub interval_minutes: u32,
    pub start_timestamp: i64,
}

/// `<stem>.meta.json` next to a container file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

/// Write a 3-D array as a container file.
pub fn write_array3(path: &Path, arr: &Array3<f64>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let dims = arr.dim();
    w.write_all(MAGIC).map_err(|e| Error::io(path, e))?;
    for d in [dims.0, dims.1, dims.2] {
        w.write_all(&(d as u64).to_le_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    for &x in arr.iter() {
        w.write_all(&x.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a container file back into a 3-D array.
pub fn read_array3(path: &Path) -> Result<Array3<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)
        .map_err(|_| Error::parse(path, 0, "file too short for the container magic"))?;
    if &magic != MAGIC {
        return Err(Error::parse(
            path,
            0,
            format!("bad magic {magic:?}; expected {MAGIC:?}"),
        ));
    }
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)
            .map_err(|_| Error::parse(path, 0, "truncated dimension header"))?;
        let raw = u64::from_le_bytes(buf);
        *d = usize::try_from(raw)
            .map_err(|_| Error::parse(path, 0, format!("dimension {raw} exceeds address space")))?;
    }
    let count = dims[0]
        .checked_mul(dims[1])
        .and_then(|x| x.checked_mul(dims[2]))
        .ok_or_else(|| Error::parse(path, 0, "dimension product overflows"))?;
    let mut data = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for i in 0..count {
        r.read_exact(&mut buf).map_err(|_| {
            Error::parse(path, 0, format!("payload truncated at element {i} of {count}"))
        })?;
        data.push(f64::from_le_bytes(buf));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(|e| Error::io(path, e))? != 0 {
        return Err(Error::parse(path, 0, "trailing bytes after the payload"));
    }
    Array3::from_shape_vec((dims[0], dims[1], dims[2]), data)
        .map_err(|e| Error::parse(path, 0, e.to_string()))
}

/// Store a 2-D array in the 3-D container with a trailing dimension of 1.
pub fn write_array2(path: &Path, arr: &Array2<f64>) -> Result<()> {
    let (r, c) = arr.dim();
    let as3 = arr
        .to_owned()
        .into_shape_with_order((r, c, 1))
        .expect("reshape with equal element count");
    write_array3(path, &as3)
}

/// Read a container written by [`write_array2`] (trailing dimension 1).
pub fn read_array2(path: &Path) -> Result<Array2<f64>> {
    let arr = read_array3(path)?;
    let (r, c, one) = arr.dim();
    if one != 1 {
        return Err(Error::parse(
            path,
            0,
            format!("expected trailing dimension 1 for a matrix, found {one}"),
        ));
    }
    Ok(arr
        .into_shape_with_order((r, c))
        .expect("reshape with equal element count"))
}

/// Store a 1-D array in the 3-D container with two trailing dimensions of 1.
pub fn write_array1(path: &Path, arr: &ndarray::Array1<f64>) -> Result<()> {
    let len = arr.len();
    let as3 = arr
        .to_owned()
        .into_shape_with_order((len, 1, 1))
        .expect("reshape with equal element count");
    write_array3(path, &as3)
}

/// Read a container written by [`write_array1`].
pub fn read_array1(path: &Path) -> Result<ndarray::Array1<f64>> {
    let arr = read_array3(path)?;
    let (len, a, b) = arr.dim();
    if a != 1 || b != 1 {
        return Err(Error::parse(
            path,
            0,
            format!("expected trailing dimensions 1×1 for a vector, found {a}×{b}"),
        ));
    }
    Ok(arr
        .into_shape_with_order(len)
        .expect("reshape with equal element count"))
}

/// Write a series window: the container plus its timing sidecar.
pub fn write_series(path: &Path, w: &SeriesWindow) -> Result<()> {
    write_array3(path, &w.data)?;
    let meta = SeriesMeta {
        interval_minutes: w.interval_minutes,
        start_timestamp: w.start_timestamp,
    };
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(&meta).expect("meta serialization cannot fail");
    std::fs::write(&side, json).map_err(|e| Error::io(&side, e))
}

/// Read a series window: the container plus its timing sidecar.
pub fn read_series(path: &Path) -> Result<SeriesWindow> {
    let data = read_array3(path)?;
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: SeriesMeta =
        serde_json::from_str(&text).map_err(|e| Error::parse(&side, e.line(), e.to_string()))?;
    SeriesWindow::new(data, meta.interval_minutes, meta.start_timestamp)
}

/// Emit a real matrix as headerless CSV with 9-decimal entries.
pub fn write_matrix_csv(path: &Path, m: &Array2<f64>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for row in m.rows() {
        let line = row
            .iter()
            .map(|x| format!("{x:.9}"))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Emit a boolean mask as headerless CSV of `0`/`1`.
pub fn write_mask_csv(path: &Path, m: &Array2<bool>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for row in m.rows() {
        let line = row
            .iter()
            .map(|&x| if x { "1" } else { "0" })
            .collect::<Vec<_>>()
            .join(",");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parse a headerless CSV of reals into a matrix; all rows must be equally
/// long.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse(path, idx + 1, format!("bad number {cell:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("row has {} cells, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(path, 0, "matrix file is empty"));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Array2::from_shape_vec((r, c), rows.into_iter().flatten().collect())
        .map_err(|e| Error::parse(path, 0, e.to_string()))
}
