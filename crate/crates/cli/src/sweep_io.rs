//! Reads QCRB sweep tables written by `antipt qcrb`.

use antipt_core::metrology::RowStatus;
use antipt_core::SweepRow;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSweep {
    pub rows: Vec<SweepRow>,
    /// Present when the file recorded its probe settings.
    pub derivative_step: Option<f64>,
}

pub fn parse_sweep(bytes: &[u8]) -> Result<LoadedSweep, CliError> {
    let first = bytes.iter().find(|b| !b.is_ascii_whitespace());
    match first {
        None => Err(bad("empty sweep input")),
        Some(b'{') => parse_json(bytes),
        Some(_) => parse_csv(bytes),
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Usage(format!("sweep input: {}", msg.into()))
}

fn status(s: &str) -> Result<RowStatus, CliError> {
    RowStatus::parse(s).ok_or_else(|| bad(format!("unknown status '{s}'")))
}

fn parse_csv(bytes: &[u8]) -> Result<LoadedSweep, CliError> {
    let mut reader = csv::Reader::from_reader(bytes);
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("missing column '{name}'")))
    };
    let (iw, iq, ib, is) = (col("omega")?, col("qfi")?, col("qcrb")?, col("status")?);
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64, CliError> {
            record[i]
                .trim()
                .parse()
                .map_err(|_| bad(format!("row {}: bad number '{}'", line + 1, &record[i])))
        };
        rows.push(SweepRow {
            omega: num(iw)?,
            qfi: num(iq)?,
            qcrb: num(ib)?,
            status: status(record[is].trim())?,
        });
    }
    Ok(LoadedSweep {
        rows,
        derivative_step: None,
    })
}

fn parse_json(bytes: &[u8]) -> Result<LoadedSweep, CliError> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| bad(e.to_string()))?;
    let rows = doc["rows"]
        .as_array()
        .ok_or_else(|| bad("missing 'rows' array"))?;
    let field = |row: &Value, name: &str| -> Result<f64, CliError> {
        match &row[name] {
            Value::Null => Ok(f64::INFINITY),
            v => v
                .as_f64()
                .ok_or_else(|| bad(format!("field '{name}' is not a number"))),
        }
    };
    let rows = rows
        .iter()
        .map(|row| {
            let label = row["status"]
                .as_str()
                .ok_or_else(|| bad("missing 'status'"))?;
            Ok(SweepRow {
                omega: field(row, "omega")?,
                qfi: field(row, "qfi")?,
                qcrb: field(row, "qcrb")?,
                status: status(label)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(LoadedSweep {
        rows,
        derivative_step: doc["params"]["probe"]["derivative_step"].as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_csv() {
        let text = "omega,qfi,qcrb,status\n1e-3,4.0e0,5.0e-1,ok\n2e-3,inf,0e0,singular-frequency\n";
        let s = parse_sweep(text.as_bytes()).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert_eq!(s.rows[1].status, RowStatus::SingularFrequency);
        assert!(s.rows[1].qfi.is_infinite());
        assert_eq!(s.derivative_step, None);
    }

    #[test]
    fn reads_json() {
        let text = r#"{"params":{"probe":{"derivative_step":1e-7}},"grid":null,
            "rows":[{"omega":1e-3,"qfi":null,"qcrb":0.0,"status":"singular-covariance"}]}"#;
        let s = parse_sweep(text.as_bytes()).unwrap();
        assert_eq!(s.derivative_step, Some(1e-7));
        assert_eq!(s.rows[0].status, RowStatus::SingularCovariance);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_sweep(b"").is_err());
        assert!(parse_sweep(b"omega,qfi\n1,2\n").is_err());
        assert!(parse_sweep(b"omega,qfi,qcrb,status\nx,1,1,ok\n").is_err());
    }
}
