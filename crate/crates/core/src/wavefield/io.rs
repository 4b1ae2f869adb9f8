//! Binary and CSV export of wavefields.
//!
//! Binary layout, little-endian: the magic `WFLD`, a `u32` version (1),
//! then `nx, ny, dx, dy, x0, y0, z` as `f64`, then `nx·ny` pairs `(re, im)`
//! of `f64` in row-major order. The curvature phase is multiplied into the
//! stored samples; the global phase is not stored.

use super::WaveField;
use crate::beamkin::BeamKinematics;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"WFLD";
const VERSION: u32 = 1;

pub fn write_binary<W: Write>(psi: &WaveField, mut w: W) -> Result<()> {
    psi.check_shape()?;
    let mut baked = psi.clone();
    baked.bake_curvature();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for v in [baked.nx as f64, baked.ny as f64, baked.dx, baked.dy, baked.x0, baked.y0, baked.z] {
        w.write_all(&v.to_le_bytes())?;
    }
    for c in &baked.values {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|e| Error::Format(format!("truncated wavefield file: {e}")))?;
    Ok(f64::from_le_bytes(b))
}

fn read_count(v: f64, name: &str) -> Result<usize> {
    if v.fract() != 0.0 || !(1.0..=1_073_741_824.0).contains(&v) {
        return Err(Error::Format(format!("{name} = {v} is not a valid grid size")));
    }
    Ok(v as usize)
}

/// Reads a field written by [`write_binary`]; momentum and `ħc` come from
/// `beam` since the format does not carry them.
pub fn read_binary<R: Read>(mut r: R, beam: &BeamKinematics) -> Result<WaveField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| Error::Format(format!("missing header: {e}")))?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, expected WFLD".into()));
    }
    let mut ver = [0u8; 4];
    r.read_exact(&mut ver).map_err(|e| Error::Format(format!("missing version: {e}")))?;
    let version = u32::from_le_bytes(ver);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let nx = read_count(read_f64(&mut r)?, "nx")?;
    let ny = read_count(read_f64(&mut r)?, "ny")?;
    let [dx, dy, x0, y0, z] = [(); 5].map(|_| read_f64(&mut r)).map(|v| v.unwrap_or(f64::NAN));
    if ![dx, dy, x0, y0, z].iter().all(|v| v.is_finite()) {
        return Err(Error::Format("non-finite or truncated grid header".into()));
    }
    let mut values = Vec::with_capacity(nx * ny);
    for _ in 0..nx * ny {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        values.push(Complex64::new(re, im));
    }
    let psi = WaveField {
        nx,
        ny,
        dx,
        dy,
        x0,
        y0,
        values,
        z,
        p0c: beam.p0c,
        hbar_c: beam.hbar_c,
        curvature: 0.0,
        global_phase: 0.0,
    };
    psi.check_shape().map_err(|e| Error::Format(e.to_string()))?;
    Ok(psi)
}

pub fn write_binary_file(psi: &WaveField, path: &Path) -> Result<()> {
    write_binary(psi, BufWriter::new(File::create(path)?))
}

pub fn read_binary_file(path: &Path, beam: &BeamKinematics) -> Result<WaveField> {
    read_binary(BufReader::new(File::open(path)?), beam)
}

/// `x,y,intensity` rows, one per grid node.
pub fn write_intensity_csv<W: Write>(psi: &WaveField, mut w: W) -> Result<()> {
    psi.check_shape()?;
    writeln!(w, "x,y,intensity")?;
    for iy in 0..psi.ny {
        for ix in 0..psi.nx {
            let p = psi.values[iy * psi.nx + ix].norm_sqr();
            writeln!(w, "{:.16e},{:.16e},{:.16e}", psi.x(ix), psi.y(iy), p)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::{make_gaussian, GridSpec};

    #[test]
    fn binary_round_trip_bakes_curvature() {
        let b = BeamKinematics::electron(200_000.0).unwrap();
        let g = GridSpec::new(16, 8, 1e-6, 2e-6, 0.25).unwrap();
        let mut psi = make_gaussian(&g, &b, (1e-6, 0.0), 8e-6, (1e-5, 0.0)).unwrap();
        psi.curvature = 0.7;
        let mut buf = Vec::new();
        write_binary(&psi, &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 7 * 8 + 16 * 8 * 16);
        assert_eq!(&buf[..4], b"WFLD");
        let back = read_binary(&buf[..], &b).unwrap();
        assert_eq!((back.nx, back.ny, back.dx, back.z), (16, 8, 1e-6, 0.25));
        for iy in 0..8 {
            for ix in 0..16 {
                assert!((back.values[iy * 16 + ix] - psi.amplitude(ix, iy)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_corrupt_input() {
        let b = BeamKinematics::electron(200_000.0).unwrap();
        assert!(matches!(read_binary(&b"WFLX\x01\0\0\0"[..], &b), Err(Error::Format(_))));
        let g = GridSpec::square(4, 1.0, 0.0).unwrap();
        let psi = make_gaussian(&g, &b, (0.0, 0.0), 4.0, (0.0, 0.0)).unwrap();
        let mut buf = Vec::new();
        write_binary(&psi, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_binary(&buf[..], &b), Err(Error::Format(_))));
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let b = BeamKinematics::electron(200_000.0).unwrap();
        let g = GridSpec::square(4, 1.0, 0.0).unwrap();
        let psi = make_gaussian(&g, &b, (0.0, 0.0), 4.0, (0.0, 0.0)).unwrap();
        let mut buf = Vec::new();
        write_intensity_csv(&psi, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 17);
        let total: f64 = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
