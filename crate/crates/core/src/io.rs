//! Curve snapshot files and number formatting shared by the writers.
//!
//! Snapshots are CSV with header `gamma,x1,x2`, one row per node.

use std::io::{Read, Write};
use std::path::Path;

use crate::curve::ClosedCurve;
use crate::error::{Error, Result};
use crate::Vec2;

/// Decimal float with 17 significant digits (`null` for non-finite values).
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

pub fn write_curve_csv<W: Write>(curve: &ClosedCurve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::CurveFile(e.to_string());
    w.write_record(["gamma", "x1", "x2"]).map_err(io_err)?;
    for (j, p) in curve.nodes().iter().enumerate() {
        w.write_record([fmt17(curve.gamma(j)), fmt17(p.x), fmt17(p.y)]).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::CurveFile(e.to_string()))
}

pub fn read_curve_csv<R: Read>(input: R) -> Result<ClosedCurve> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| Error::CurveFile(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["gamma", "x1", "x2"] {
        return Err(Error::CurveFile(format!("expected header gamma,x1,x2, found {}", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut nodes = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::CurveFile(e.to_string()))?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| Error::CurveFile(format!("row {}: missing column {i}", row + 1)))?
                .trim()
                .parse()
                .map_err(|e| Error::CurveFile(format!("row {}: {e}", row + 1)))
        };
        nodes.push(Vec2::new(field(1)?, field(2)?));
    }
    ClosedCurve::new(nodes)
}

pub fn save_curve(curve: &ClosedCurve, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::CurveFile(format!("{}: {e}", path.display())))?;
    write_curve_csv(curve, std::io::BufWriter::new(f))
}

pub fn load_curve(path: &Path) -> Result<ClosedCurve> {
    let f = std::fs::File::open(path).map_err(|e| Error::CurveFile(format!("{}: {e}", path.display())))?;
    read_curve_csv(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn csv_round_trip_is_lossless() {
        let c = shapes::ellipse(16, 2.0, 1.0).rotated(0.3);
        let mut buf = Vec::new();
        write_curve_csv(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("gamma,x1,x2\n"));
        assert_eq!(read_curve_csv(buf.as_slice()).unwrap(), c);
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(read_curve_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
    }
}
