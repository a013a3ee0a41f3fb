//! Base-station CSV import/export.
//!
//! Schema (header required): `bs_id,operator_id,x_m,y_m,shared`, with
//! `shared` in {0,1}. UTF-8, comma-separated, LF line endings.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use coexsim_core::topology::{BaseStation, Topology};
use coexsim_core::{BsId, OperatorId, Position, Rect};

pub const HEADER: &str = "bs_id,operator_id,x_m,y_m,shared";

#[derive(Debug, thiserror::Error)]
pub enum BsCsvError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: missing or wrong header (expected `{HEADER}`)")]
    Header { path: String },
    #[error("{path}:{line}: {msg}")]
    Row {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}: duplicate bs_id {id}")]
    DuplicateId { path: String, id: u32 },
    #[error("{path}: no base stations")]
    Empty { path: String },
}

pub fn load_bs_csv(path: &Path) -> Result<Topology, BsCsvError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| BsCsvError::Io {
        path: name.clone(),
        source,
    })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(BsCsvError::Header { path: name }),
    }
    let mut base_stations = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in lines {
        let line = idx + 1; // 1-based, counting the header as line 1
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 5 {
            return Err(BsCsvError::Row {
                path: name,
                line,
                msg: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let parse_err = |field: &str, what: &str| BsCsvError::Row {
            path: name.clone(),
            line,
            msg: format!("invalid {what}: `{field}`"),
        };
        let id: u32 = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(fields[0], "bs_id"))?;
        let operator_id: u32 = fields[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(fields[1], "operator_id"))?;
        let x_m: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(fields[2], "x_m"))?;
        let y_m: f64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| parse_err(fields[3], "y_m"))?;
        let shared = match fields[4].trim() {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(other, "shared (expected 0 or 1)")),
        };
        if !seen.insert(id) {
            return Err(BsCsvError::DuplicateId { path: name, id });
        }
        base_stations.push(BaseStation {
            id: BsId(id),
            operator_id: OperatorId(operator_id),
            position: Position::new(x_m, y_m),
            shared,
        });
    }
    if base_stations.is_empty() {
        return Err(BsCsvError::Empty { path: name });
    }
    let raw = Rect::bounding(base_stations.iter().map(|b| b.position), 0.0)
        .expect("non-empty base station list");
    let pad_x = 0.05 * (raw.max_x_m - raw.min_x_m).max(1.0);
    let pad_y = 0.05 * (raw.max_y_m - raw.min_y_m).max(1.0);
    let area = Rect::new(
        raw.min_x_m - pad_x,
        raw.min_y_m - pad_y,
        raw.max_x_m + pad_x,
        raw.max_y_m + pad_y,
    );
    Ok(Topology {
        base_stations,
        area,
    })
}

pub fn write_bs_csv(topology: &Topology, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for bs in &topology.base_stations {
        writeln!(
            out,
            "{},{},{},{},{}",
            bs.id.0,
            bs.operator_id.0,
            crate::output::fmt_sig(bs.position.x_m),
            crate::output::fmt_sig(bs.position.y_m),
            u8::from(bs.shared)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn three_valid_rows() {
        let f = write_tmp("bs_id,operator_id,x_m,y_m,shared\n0,1,0.0,0.0,1\n1,1,1000.0,0.0,1\n2,2,500.0,866.0,0\n");
        let topo = load_bs_csv(f.path()).unwrap();
        assert_eq!(topo.base_stations.len(), 3);
        assert!(!topo.base_stations[2].shared);
        assert!(topo.area.contains(&Position::new(500.0, 433.0)));
    }

    #[test]
    fn non_numeric_x_names_line() {
        let f = write_tmp("bs_id,operator_id,x_m,y_m,shared\n0,1,0.0,0.0,1\n1,1,oops,0.0,1\n");
        let err = load_bs_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains(":3:"), "{err}");
        assert!(err.to_string().contains("x_m"));
    }

    #[test]
    fn duplicate_id_rejected() {
        let f = write_tmp("bs_id,operator_id,x_m,y_m,shared\n5,1,0.0,0.0,1\n5,2,10.0,0.0,1\n");
        let err = load_bs_csv(f.path()).unwrap_err();
        assert!(matches!(err, BsCsvError::DuplicateId { id: 5, .. }));
    }

    #[test]
    fn roundtrip() {
        let f = write_tmp("bs_id,operator_id,x_m,y_m,shared\n0,1,0.0,0.0,1\n1,2,1000.0,500.0,0\n");
        let topo = load_bs_csv(f.path()).unwrap();
        let mut buf = Vec::new();
        write_bs_csv(&topo, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let f2 = write_tmp(&text);
        let topo2 = load_bs_csv(f2.path()).unwrap();
        assert_eq!(topo.base_stations, topo2.base_stations);
    }
}
