//! Field dump format and small I/O helpers.
//!
//! A field dump is one UTF-8 JSON header line
//!
//! ```json
//! {"dims":[n,n,n],"spacing":h,"origin":[x,y,z],"layout":"planar",
//!  "components":["re0","re1","re2","re3","im0","im1","im2","im3"]}
//! ```
//!
//! followed by `8 * n^3` little-endian 64-bit floats in planar component
//! order (all `re0` values, then all `re1`, ...), C-order within each plane
//! set.
//!
//! ```
//! use std::io::BufReader;
//! use calderon3d::grid::{Grid3, QField};
//! use calderon3d::io::{read_field, write_field};
//! use calderon3d::quat::CQuat;
//!
//! let f = QField::constant(Grid3::default_box(4), CQuat::ONE);
//! let mut buf = Vec::new();
//! write_field(&f, &mut buf).unwrap();
//! let back = read_field(&mut BufReader::new(buf.as_slice())).unwrap();
//! assert!(back.rel_l2_error(&f) < 1e-15);
//! ```

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid3, QField};
use crate::quat::{CQuat, Vec3};

pub const COMPONENTS: [&str; 8] = ["re0", "re1", "re2", "re3", "im0", "im1", "im2", "im3"];

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DumpHeader {
    dims: [usize; 3],
    spacing: f64,
    origin: [f64; 3],
    layout: String,
    components: Vec<String>,
}

/// Write a field in the dump format.
pub fn write_field(f: &QField, w: &mut impl Write) -> Result<()> {
    let g = f.grid;
    let header = DumpHeader {
        dims: [g.n, g.n, g.n],
        spacing: g.h,
        origin: g.origin.0,
        layout: "planar".into(),
        components: COMPONENTS.iter().map(|s| s.to_string()).collect(),
    };
    let line = serde_json::to_string(&header).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(w, "{line}")?;
    for c in 0..4 {
        for q in &f.values {
            w.write_all(&q.0[c].re.to_le_bytes())?;
        }
    }
    for c in 0..4 {
        for q in &f.values {
            w.write_all(&q.0[c].im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read a field dump produced by [`write_field`].
pub fn read_field(r: &mut impl BufRead) -> Result<QField> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: DumpHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Parse(e.to_string()))?;
    if header.layout != "planar" {
        return Err(Error::Parse(format!("unsupported layout {}", header.layout)));
    }
    if header.components != COMPONENTS {
        return Err(Error::Parse("unexpected component list".into()));
    }
    let [ni, nj, nk] = header.dims;
    if ni != nj || nj != nk || ni == 0 {
        return Err(Error::Parse(format!("non-cubic dims {:?}", header.dims)));
    }
    let n3 = ni * nj * nk;
    let mut planes = vec![vec![0.0f64; n3]; 8];
    let mut buf = [0u8; 8];
    for plane in planes.iter_mut() {
        for v in plane.iter_mut() {
            r.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
    }
    let grid = Grid3 {
        origin: Vec3(header.origin),
        h: header.spacing,
        n: ni,
    };
    let values = (0..n3)
        .map(|i| {
            CQuat(std::array::from_fn(|c| {
                Complex64::new(planes[c][i], planes[c + 4][i])
            }))
        })
        .collect();
    Ok(QField { grid, values })
}

/// Write a pre-formatted text table (CSV or JSON) to a file path, creating
/// parent directories.
pub fn write_text(path: &std::path::Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Serialize any value as pretty JSON followed by a newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_phantom, Phantom};

    #[test]
    fn field_dump_round_trips() {
        let g = Grid3::default_box(8);
        let f = sample_phantom(&Phantom::default_smooth(), g).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        // header line is valid JSON and the payload has the right size
        let newline = buf.iter().position(|&b| b == b'\n').unwrap();
        let header: serde_json::Value =
            serde_json::from_slice(&buf[..newline]).unwrap();
        assert_eq!(header["layout"], "planar");
        assert_eq!(buf.len() - newline - 1, 8 * 8 * 8 * 8 * 8);

        let back = read_field(&mut std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(back.grid, g);
        assert!(back.sub(&f).linf_norm() == 0.0);
    }

    #[test]
    fn corrupt_header_is_rejected() {
        let mut buf = b"{\"layout\":\"interleaved\"}\n".to_vec();
        buf.extend_from_slice(&[0u8; 64]);
        assert!(read_field(&mut std::io::Cursor::new(&buf)).is_err());
    }
}
