//! Serialization: dense CSV and a compact binary dump for sections, CSV
//! tables for coefficient sequences, norm curves, and kernel bound reports.
//!
//! Floats are written with the shortest round-trip formatting, so rewriting
//! the same data produces byte-identical files.

use crate::error::{Error, Result};
use crate::kernels::BoundRow;
use crate::matrices::{FiniteSection, Structure, WeightSequence};
use crate::norms::CurveRow;
use crate::series::CoefficientSequence;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: [u8; 4] = *b"TRSC";
/// Dump sizes past this are rejected before any allocation happens.
const MAX_DUMP_SIZE: u64 = 65_536;

fn complex_field(re: f64, im: f64) -> String {
    if im.is_sign_negative() {
        format!("{re}-{}i", -im)
    } else {
        format!("{re}+{im}i")
    }
}

/// Dense CSV, one matrix row per line. Real sections print plain reals;
/// complex sections print every entry as `re+imi` so the format is uniform
/// within a file.
pub fn write_section_csv(path: &Path, a: &FiniteSection) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let n = a.size();
    let real = a.is_real();
    for r in 0..n {
        let mut line = String::new();
        for c in 0..n {
            if c > 0 {
                line.push(',');
            }
            let v = a.entry(r, c);
            if real {
                line.push_str(&format!("{}", v.re));
            } else {
                line.push_str(&complex_field(v.re, v.im));
            }
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Compact binary dump: magic "TRSC", little-endian u64 size, one structure
/// tag byte (0 lower triangular, 1 general), then row-major entries as
/// little-endian f64 pairs (re, im).
pub fn write_section_binary(path: &Path, a: &FiniteSection) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&MAGIC)?;
    out.write_all(&(a.size() as u64).to_le_bytes())?;
    let tag: u8 = match a.structure() {
        Structure::LowerTriangular => 0,
        Structure::General => 1,
    };
    out.write_all(&[tag])?;
    for v in a.data() {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a dump written by write_section_binary, re-validating structure and
/// finiteness on the way in.
pub fn read_section_binary(path: &Path) -> Result<FiniteSection> {
    let mut inp = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    inp.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(Error::BadDump("wrong magic bytes"));
    }
    let mut size_bytes = [0u8; 8];
    inp.read_exact(&mut size_bytes)?;
    let n64 = u64::from_le_bytes(size_bytes);
    if n64 == 0 || n64 > MAX_DUMP_SIZE {
        return Err(Error::BadDump("unreasonable section size"));
    }
    let n = n64 as usize;
    let mut tag = [0u8; 1];
    inp.read_exact(&mut tag)?;
    let structure = match tag[0] {
        0 => Structure::LowerTriangular,
        1 => Structure::General,
        _ => return Err(Error::BadDump("unknown structure tag")),
    };
    let mut data = Vec::with_capacity(n * n);
    let mut buf = [0u8; 16];
    for _ in 0..n * n {
        inp.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[0..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(buf[8..16].try_into().expect("8 bytes"));
        data.push(crate::C64::new(re, im));
    }
    let mut extra = [0u8; 1];
    if inp.read(&mut extra)? != 0 {
        return Err(Error::BadDump("trailing bytes"));
    }
    FiniteSection::from_data(n, structure, data)
}

/// Coefficient table with an index,real,imag header.
pub fn write_coefficients_csv(path: &Path, seq: &CoefficientSequence) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(b"index,real,imag\n")?;
    for (k, v) in seq.coeffs().iter().enumerate() {
        out.write_all(format!("{k},{},{}\n", v.re, v.im).as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Norm curve table: N, p, kind, value, iterations, residual, seed. The seed
/// column is empty for estimates that used no random catalog.
pub fn write_norm_curve_csv(path: &Path, rows: &[CurveRow]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(b"N,p,kind,value,iterations,residual,seed\n")?;
    for r in rows {
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
        out.write_all(
            format!(
                "{},{},{},{},{},{},{}\n",
                r.n,
                r.p,
                r.estimate.kind,
                r.estimate.value,
                r.estimate.iterations,
                r.estimate.residual,
                seed
            )
            .as_bytes(),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Kernel pointwise-bound table: n, t, kernel_value, bound, ratio.
pub fn write_bound_report_csv(path: &Path, rows: &[BoundRow]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(b"n,t,kernel_value,bound,ratio\n")?;
    for r in rows {
        out.write_all(
            format!(
                "{},{},{},{},{}\n",
                r.n, r.t, r.kernel_value, r.bound, r.ratio
            )
            .as_bytes(),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a weight sequence from a text file with one positive value per
/// line; blank lines are skipped.
pub fn read_weight_csv(path: &Path) -> Result<WeightSequence> {
    let content = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t.parse().map_err(|e| Error::Parse {
            line: i + 1,
            msg: format!("{e}"),
        })?;
        values.push(v);
    }
    WeightSequence::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{build_structured, MatrixKind};
    use crate::C64;

    #[test]
    fn binary_round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("section.trsc");

        let f = build_structured(&MatrixKind::Fejer, 17).unwrap();
        write_section_binary(&path, &f).unwrap();
        let back = read_section_binary(&path).unwrap();
        assert_eq!(back, f);

        let e = build_structured(&MatrixKind::ELambda(C64::new(1.0, 1.0)), 9).unwrap();
        write_section_binary(&path, &e).unwrap();
        let back = read_section_binary(&path).unwrap();
        assert_eq!(back, e);
        assert_eq!(back.structure(), Structure::General);
    }

    #[test]
    fn binary_reader_rejects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("section.trsc");
        let f = build_structured(&MatrixKind::Fejer, 4).unwrap();
        write_section_binary(&path, &f).unwrap();

        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_section_binary(&path),
            Err(Error::BadDump("wrong magic bytes"))
        ));

        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'T';
        bytes[12] = 9; // structure tag
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_section_binary(&path),
            Err(Error::BadDump("unknown structure tag"))
        ));

        // a lower-triangular claim with nonzero upper entries must not load
        let g = FiniteSection::from_data(
            2,
            Structure::General,
            vec![
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        write_section_binary(&path, &g).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[12] = 0; // claim lower triangular
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_section_binary(&path),
            Err(Error::NotLowerTriangular)
        ));

        // truncated payload
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        std::fs::write(&path, &bytes).unwrap();
        assert!(read_section_binary(&path).is_err());

        // trailing garbage
        let f = build_structured(&MatrixKind::Fejer, 4).unwrap();
        write_section_binary(&path, &f).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.push(0);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_section_binary(&path),
            Err(Error::BadDump("trailing bytes"))
        ));
    }

    #[test]
    fn csv_outputs_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.csv");
        let p2 = dir.path().join("b.csv");
        let c = build_structured(&MatrixKind::Cesaro, 5).unwrap();
        write_section_csv(&p1, &c).unwrap();
        write_section_csv(&p2, &c).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        let text = std::fs::read_to_string(&p1).unwrap();
        assert!(text.starts_with("1,0,0,0,0\n0.5,0.5,0,0,0\n"));

        let e = build_structured(&MatrixKind::ELambda(C64::new(2.0, 1.0)), 2).unwrap();
        write_section_csv(&p1, &e).unwrap();
        let text = std::fs::read_to_string(&p1).unwrap();
        assert!(text.starts_with("1+0i,"), "got {text}");
    }

    #[test]
    fn coefficient_csv_has_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        let g = crate::series::log_symbol(3).unwrap();
        write_coefficients_csv(&path, &g).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,real,imag");
        assert_eq!(lines[1], "0,0,0");
        assert_eq!(lines[2], "1,1,0");
        assert_eq!(lines[3], "2,0.5,0");
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn weight_file_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        std::fs::write(&path, "1\n2\n\n3.5\n").unwrap();
        let w = read_weight_csv(&path).unwrap();
        assert_eq!(w.values(), &[1.0, 2.0, 3.5]);

        std::fs::write(&path, "1\n-2\n").unwrap();
        assert!(read_weight_csv(&path).is_err());
        std::fs::write(&path, "1\nzebra\n").unwrap();
        assert!(matches!(
            read_weight_csv(&path),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
