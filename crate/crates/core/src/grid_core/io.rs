use std::io::{Read, Write};

use super::{GridFunction, GridSpec, ShapeSpec};
use crate::error::{Error, Result};

pub const GRID_MAGIC: &[u8; 4] = b"GWRS";
pub const GRID_VERSION: u32 = 1;

/// Writes `magic, version, d, n (per axis), extent` followed by the values,
/// all little-endian, row-major.
pub fn write_grid<W: Write>(mut w: W, g: &GridFunction) -> Result<()> {
    let spec = g.spec();
    w.write_all(GRID_MAGIC)?;
    w.write_all(&GRID_VERSION.to_le_bytes())?;
    w.write_all(&(spec.dim() as u32).to_le_bytes())?;
    for _ in 0..spec.dim() {
        w.write_all(&(spec.n() as u32).to_le_bytes())?;
    }
    w.write_all(&spec.extent().to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * g.values().len());
    for v in g.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_grid<R: Read>(mut r: R) -> Result<GridFunction> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|e| Error::Format(format!("grid header: {e}")))?;
    if &magic != GRID_MAGIC {
        return Err(Error::Format("not a grid file (bad magic)".into()));
    }
    let version = read_u32(&mut r)?;
    if version != GRID_VERSION {
        return Err(Error::Format(format!("unsupported grid version {version}")));
    }
    let d = read_u32(&mut r)? as usize;
    if !(1..=3).contains(&d) {
        return Err(Error::Format(format!("dimension {d} not in 1..=3")));
    }
    let mut sizes = Vec::with_capacity(d);
    for _ in 0..d {
        sizes.push(read_u32(&mut r)? as usize);
    }
    if sizes.iter().any(|&s| s != sizes[0]) {
        return Err(Error::Format(format!(
            "non-cubic grid {sizes:?} is not supported"
        )));
    }
    let mut eb = [0u8; 8];
    r.read_exact(&mut eb)
        .map_err(|e| Error::Format(format!("grid header: {e}")))?;
    let spec = GridSpec::new(d, f64::from_le_bytes(eb), sizes[0])?;

    let mut bytes = Vec::with_capacity(8 * spec.len());
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * spec.len() {
        return Err(Error::Format(format!(
            "expected {} bytes of values, found {}",
            8 * spec.len(),
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    GridFunction::new(spec, values)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|e| Error::Format(format!("grid header: {e}")))?;
    Ok(u32::from_le_bytes(b))
}

/// Parses and validates a JSON shape description.
pub fn read_shape<R: Read>(r: R) -> Result<ShapeSpec> {
    let spec: ShapeSpec =
        serde_json::from_reader(r).map_err(|e| Error::Format(format!("shape file: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_roundtrip() {
        let spec = GridSpec::new(2, 1.5, 3).unwrap();
        let g = GridFunction::new(spec, (0..9).map(|i| i as f64 / 7.0).collect()).unwrap();
        let mut buf = Vec::new();
        write_grid(&mut buf, &g).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 4 + 2 * 4 + 8 + 9 * 8);
        assert_eq!(&buf[..4], b"GWRS");
        assert_eq!(read_grid(&buf[..]).unwrap(), g);
    }

    #[test]
    fn rejects_corrupt_grids() {
        let spec = GridSpec::new(1, 1.0, 4).unwrap();
        let mut buf = Vec::new();
        write_grid(&mut buf, &GridFunction::zeros(spec)).unwrap();
        assert!(matches!(
            read_grid(&buf[..buf.len() - 1]),
            Err(Error::Format(_))
        ));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_grid(&bad[..]), Err(Error::Format(_))));
        let mut neg = buf.clone();
        let off = neg.len() - 8;
        neg[off..].copy_from_slice(&(-1.0f64).to_le_bytes());
        assert!(matches!(
            read_grid(&neg[..]),
            Err(Error::NegativeValue { .. })
        ));
    }

    #[test]
    fn shape_json() {
        let text = r#"{"type":"union","parts":[
            {"type":"box","lo":[0.0],"hi":[1.0]},
            {"type":"ball","center":[3.0],"radius":0.25}]}"#;
        let s = read_shape(text.as_bytes()).unwrap();
        assert_eq!(s.dim(), Some(1));
        let bad = r#"{"type":"ball","center":[0.0],"radius":-1.0}"#;
        assert!(read_shape(bad.as_bytes()).is_err());
    }
}
