//! Binary field snapshots.
//!
//! A snapshot is one ASCII header line
//!
//! ```text
//! LIENS1 <dim> <n> <l> <component_count> <physical|spectral>\n
//! ```
//!
//! followed by little-endian `f64` values, component-major and x-fastest.
//! Spectral snapshots store interleaved `(re, im)` pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, RealVectorField, SpectralVectorField};

pub const MAGIC: &str = "LIENS1";
const MAX_HEADER: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotKind {
    Physical,
    Spectral,
}

impl SnapshotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Physical => "physical",
            Self::Spectral => "spectral",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Physical(RealVectorField),
    Spectral(SpectralVectorField),
}

impl Snapshot {
    pub fn grid(&self) -> &Grid {
        match self {
            Self::Physical(f) => f.grid(),
            Self::Spectral(s) => s.grid(),
        }
    }

    pub fn kind(&self) -> SnapshotKind {
        match self {
            Self::Physical(_) => SnapshotKind::Physical,
            Self::Spectral(_) => SnapshotKind::Spectral,
        }
    }

    pub fn into_spectral(self) -> SpectralVectorField {
        match self {
            Self::Physical(f) => f.to_spectral(),
            Self::Spectral(s) => s,
        }
    }
}

fn header(grid: &Grid, kind: SnapshotKind) -> String {
    format!(
        "{MAGIC} {} {} {} {} {}\n",
        grid.dim(),
        grid.n(),
        grid.l(),
        grid.dim(),
        kind.as_str()
    )
}

pub fn write_physical(mut w: impl Write, f: &RealVectorField) -> Result<()> {
    w.write_all(header(f.grid(), SnapshotKind::Physical).as_bytes())?;
    for comp in f.components() {
        for x in comp {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectral(mut w: impl Write, s: &SpectralVectorField) -> Result<()> {
    w.write_all(header(s.grid(), SnapshotKind::Spectral).as_bytes())?;
    for comp in s.components() {
        for c in comp {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write(w: impl Write, snapshot: &Snapshot) -> Result<()> {
    match snapshot {
        Snapshot::Physical(f) => write_physical(w, f),
        Snapshot::Spectral(s) => write_spectral(w, s),
    }
}

pub fn save(path: impl AsRef<Path>, snapshot: &Snapshot) -> Result<()> {
    write(BufWriter::new(File::create(path)?), snapshot)
}

pub fn load(path: impl AsRef<Path>) -> Result<Snapshot> {
    read(BufReader::new(File::open(path)?))
}

fn parse_header(line: &str) -> Result<(Grid, SnapshotKind)> {
    let fields: Vec<&str> = line.split(' ').collect();
    if fields.len() != 6 || fields[0] != MAGIC {
        return Err(Error::Format(format!("bad header {line:?}")));
    }
    let num = |i: usize, what: &str| -> Result<usize> {
        fields[i]
            .parse()
            .map_err(|_| Error::Format(format!("bad {what} {:?}", fields[i])))
    };
    let dim = num(1, "dim")?;
    let n = num(2, "n")?;
    let l: f64 = fields[3]
        .parse()
        .map_err(|_| Error::Format(format!("bad box length {:?}", fields[3])))?;
    let count = num(4, "component count")?;
    let kind = match fields[5] {
        "physical" => SnapshotKind::Physical,
        "spectral" => SnapshotKind::Spectral,
        other => return Err(Error::Format(format!("unknown kind {other:?}"))),
    };
    let grid = Grid::new(dim, n, l)?;
    if count != dim {
        return Err(Error::Format(format!(
            "component count {count} does not match dim {dim}"
        )));
    }
    Ok((grid, kind))
}

pub fn read(mut r: impl Read) -> Result<Snapshot> {
    let mut line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        r.read_exact(&mut byte)
            .map_err(|_| Error::Format("truncated header".into()))?;
        if byte[0] == b'\n' {
            break;
        }
        line.push(byte[0]);
        if line.len() > MAX_HEADER {
            return Err(Error::Format("header too long".into()));
        }
    }
    let line = String::from_utf8(line).map_err(|_| Error::Format("header is not UTF-8".into()))?;
    let (grid, kind) = parse_header(&line)?;
    let per_component = match kind {
        SnapshotKind::Physical => grid.len(),
        SnapshotKind::Spectral => 2 * grid.len(),
    };
    let mut values = vec![0.0; per_component];
    let mut buf = [0u8; 8];
    let mut components = Vec::with_capacity(grid.dim());
    for _ in 0..grid.dim() {
        for v in values.iter_mut() {
            r.read_exact(&mut buf)
                .map_err(|_| Error::Format("truncated payload".into()))?;
            *v = f64::from_le_bytes(buf);
        }
        components.push(values.clone());
    }
    if r.read(&mut byte)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    match kind {
        SnapshotKind::Physical => Ok(Snapshot::Physical(RealVectorField::new(grid, components)?)),
        SnapshotKind::Spectral => {
            let comps = components
                .into_iter()
                .map(|c| {
                    c.chunks_exact(2)
                        .map(|p| Complex64::new(p[0], p[1]))
                        .collect()
                })
                .collect();
            Ok(Snapshot::Spectral(SpectralVectorField::new(grid, comps)?))
        }
    }
}
