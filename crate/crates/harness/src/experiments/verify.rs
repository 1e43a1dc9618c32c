use std::path::Path;

use fracwave_core::sim::sha256_hex;

use super::Report;
use crate::outcome::{HarnessError, Outcome};
use crate::table::{TableMeta, HASH_COLUMN};

/// Re-checks every artifact in `dir`: CSV digests and per-row hashes against their sidecars,
/// the hash field of other JSON files, and the hash comment of figures. With `expected`,
/// every hash must also equal it.
pub fn verify_outputs(dir: &Path, expected: Option<&str>) -> Result<Report, HarnessError> {
    if !dir.is_dir() {
        return Err(HarnessError::Usage(format!("{} is not a directory", dir.display())));
    }
    let mut files: Vec<_> =
        std::fs::read_dir(dir)?.collect::<Result<Vec<_>, _>>()?.into_iter().map(|e| e.path()).collect();
    files.sort();
    let mut report = Report::new(Outcome::Pass);
    let mut checked = 0;
    for path in files.iter().filter(|p| p.extension().is_some_and(|e| e == "json")) {
        let name = path.display().to_string();
        let value: serde_json::Value = match std::fs::read(path).ok().and_then(|b| serde_json::from_slice(&b).ok()) {
            Some(v) => v,
            None => {
                report.fail(format!("{name}: not valid JSON"));
                continue;
            }
        };
        let Some(hash) = value.get("config_hash").and_then(|h| h.as_str()).map(str::to_string) else {
            report.fail(format!("{name}: no config_hash"));
            continue;
        };
        checked += 1;
        if let Some(e) = expected {
            if hash != e {
                report.fail(format!("{name}: hash {hash} differs from the config hash {e}"));
            }
        }
        let csv_path = path.with_extension("csv");
        if csv_path.exists() {
            match serde_json::from_value::<TableMeta>(value) {
                Ok(meta) => check_table(&csv_path, &meta, &mut report)?,
                Err(e) => report.fail(format!("{name}: bad table metadata: {e}")),
            }
        }
        for ext in ["svg", "gp"] {
            let fig = path.with_extension(ext);
            if fig.exists() {
                checked += 1;
                let text = std::fs::read_to_string(&fig)?;
                if !text.contains(&format!("{HASH_COLUMN}: {hash}")) {
                    report.fail(format!("{}: missing or wrong config hash", fig.display()));
                }
            }
        }
    }
    for path in files.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")) {
        if !path.with_extension("json").exists() {
            report.fail(format!("{}: no metadata sidecar", path.display()));
        }
    }
    report.messages.push(format!("checked {checked} artifacts in {}", dir.display()));
    Ok(report)
}

fn check_table(csv_path: &Path, meta: &TableMeta, report: &mut Report) -> Result<(), HarnessError> {
    let name = csv_path.display().to_string();
    let bytes = std::fs::read(csv_path)?;
    if sha256_hex(&bytes) != meta.csv_sha256 {
        report.fail(format!("{name}: content differs from the recorded digest"));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(bytes.as_slice());
    let mut rows = 0;
    for (i, rec) in reader.records().enumerate() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                report.fail(format!("{name}: unreadable: {e}"));
                return Ok(());
            }
        };
        let last = rec.get(rec.len().saturating_sub(1)).unwrap_or("");
        let want = match i {
            0 => HASH_COLUMN,
            1 => "-",
            _ => {
                rows += 1;
                meta.config_hash.as_str()
            }
        };
        if last != want {
            report.fail(format!("{name}: line {} ends in {last:?}, expected {want:?}", i + 1));
            return Ok(());
        }
    }
    if rows != meta.rows {
        report.fail(format!("{name}: {rows} rows, metadata records {}", meta.rows));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::ResultTable;

    #[test]
    fn detects_tampering_and_foreign_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = ResultTable::new("t", &[("x", "1")]);
        t.push(vec![1.0.into()]).unwrap();
        let path = t.write(dir.path(), "abc").unwrap();
        assert_eq!(verify_outputs(dir.path(), Some("abc")).unwrap().outcome, Outcome::Pass);
        assert_eq!(verify_outputs(dir.path(), Some("xyz")).unwrap().outcome, Outcome::AssertionFailure);
        let text = std::fs::read_to_string(&path).unwrap().replace("1,abc", "2,abc");
        std::fs::write(&path, text).unwrap();
        assert_eq!(verify_outputs(dir.path(), None).unwrap().outcome, Outcome::AssertionFailure);
        assert!(verify_outputs(&dir.path().join("missing"), None).is_err());
    }
}
