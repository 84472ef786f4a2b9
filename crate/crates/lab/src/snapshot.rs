//! Field snapshots: a header `(kind, d, L, N)` followed by row-major
//! `(re, im)` pairs, as little-endian binary or as CSV.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use lpsq_core::{Complex64, Domain, DomainKind, SampledField};

use crate::error::{LabError, Result};

const MAGIC: &[u8; 4] = b"LPSQ";
const VERSION: u8 = 1;

fn kind_code(kind: DomainKind) -> u8 {
    match kind {
        DomainKind::Torus => 0,
        DomainKind::Line => 1,
    }
}

fn kind_name(kind: DomainKind) -> &'static str {
    match kind {
        DomainKind::Torus => "torus",
        DomainKind::Line => "line",
    }
}

fn parse_kind(s: &str) -> Result<DomainKind> {
    match s {
        "torus" => Ok(DomainKind::Torus),
        "line" => Ok(DomainKind::Line),
        other => Err(LabError::Snapshot(format!("unknown domain kind `{other}`"))),
    }
}

/// Layout: `LPSQ`, version, kind, d (one byte each after the magic), `L` as
/// f64, `N` as u64, then `N^d` pairs of f64.
pub fn write_binary(field: &SampledField, mut w: impl Write) -> std::io::Result<()> {
    let d = field.domain();
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION, kind_code(d.kind()), d.dim() as u8])?;
    w.write_all(&d.period().to_le_bytes())?;
    w.write_all(&(d.samples() as u64).to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|e| LabError::Snapshot(e.to_string()))?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_binary(mut r: impl Read) -> Result<SampledField> {
    let mut head = [0u8; 7];
    r.read_exact(&mut head).map_err(|e| LabError::Snapshot(e.to_string()))?;
    if &head[..4] != MAGIC {
        return Err(LabError::Snapshot("bad magic".into()));
    }
    if head[4] != VERSION {
        return Err(LabError::Snapshot(format!("unsupported version {}", head[4])));
    }
    let kind = match head[5] {
        0 => DomainKind::Torus,
        1 => DomainKind::Line,
        k => return Err(LabError::Snapshot(format!("unknown kind code {k}"))),
    };
    let period = read_f64(&mut r)?;
    let mut nb = [0u8; 8];
    r.read_exact(&mut nb).map_err(|e| LabError::Snapshot(e.to_string()))?;
    let samples = usize::try_from(u64::from_le_bytes(nb)).map_err(|e| LabError::Snapshot(e.to_string()))?;
    let domain = Domain::new(kind, head[6] as usize, period, samples)?;
    let values = (0..domain.len())
        .map(|_| Ok(Complex64::new(read_f64(&mut r)?, read_f64(&mut r)?)))
        .collect::<Result<Vec<_>>>()?;
    if r.read(&mut [0u8; 1]).map_err(|e| LabError::Snapshot(e.to_string()))? != 0 {
        return Err(LabError::Snapshot("trailing bytes after the last sample".into()));
    }
    Ok(SampledField::new(domain, values)?)
}

/// First record `kind,d,L,N`, second its values, then one `re,im` record per sample.
pub fn write_csv(field: &SampledField, w: impl Write) -> Result<()> {
    let d = field.domain();
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
    out.write_record(["kind", "d", "L", "N"])?;
    out.write_record([
        kind_name(d.kind()).to_string(),
        d.dim().to_string(),
        d.period().to_string(),
        d.samples().to_string(),
    ])?;
    for v in field.values() {
        out.write_record([v.re.to_string(), v.im.to_string()])?;
    }
    out.flush().map_err(|e| LabError::Snapshot(e.to_string()))
}

pub fn read_csv(r: impl Read) -> Result<SampledField> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(r);
    let mut records = rd.records();
    let mut next = |what: &str| {
        records
            .next()
            .ok_or_else(|| LabError::Snapshot(format!("missing {what}")))?
            .map_err(LabError::from)
    };
    let header = next("header")?;
    if header.iter().collect::<Vec<_>>() != ["kind", "d", "L", "N"] {
        return Err(LabError::Snapshot("first record must be `kind,d,L,N`".into()));
    }
    let meta = next("domain record")?;
    if meta.len() != 4 {
        return Err(LabError::Snapshot("domain record needs four fields".into()));
    }
    let num = |i: usize| -> Result<f64> {
        meta[i].parse().map_err(|_| LabError::Snapshot(format!("bad number `{}`", &meta[i])))
    };
    let count = |i: usize| -> Result<usize> {
        meta[i].parse().map_err(|_| LabError::Snapshot(format!("bad count `{}`", &meta[i])))
    };
    let domain = Domain::new(parse_kind(&meta[0])?, count(1)?, num(2)?, count(3)?)?;
    let mut values = Vec::with_capacity(domain.len());
    for rec in records {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(LabError::Snapshot(format!("sample record with {} fields", rec.len())));
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|_| LabError::Snapshot(format!("bad number `{s}`")));
        values.push(Complex64::new(parse(&rec[0])?, parse(&rec[1])?));
    }
    Ok(SampledField::new(domain, values)?)
}

/// Writes CSV for a `.csv` path and binary otherwise.
pub fn save(field: &SampledField, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    if is_csv(path) {
        write_csv(field, BufWriter::new(file))
    } else {
        write_binary(field, BufWriter::new(file)).map_err(|e| LabError::io(path, e))
    }
}

pub fn load(path: &Path) -> Result<SampledField> {
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    if is_csv(path) {
        read_csv(BufReader::new(file))
    } else {
        read_binary(BufReader::new(file))
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}
