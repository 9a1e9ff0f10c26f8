//! Dataset and state files.
//!
//! - `.json`: `{"dim": n, "elements": [{"re": [[..]], "im": [[..]], "count": c}, ..]}`
//!   with `n × n` row arrays. `im` may be omitted for real elements.
//! - `.csv`: header `theta,x`, one homodyne sample per row. Converted to
//!   rank-one quadrature projectors truncated at `dim` Fock states.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rhor_core::{
    quadrature_dataset, CMatrix, Dataset, DensityMatrix, HermitianOperator, PovmElement,
    QuadratureSample, Record,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::format::{fmt_f64, MatrixJson, Num};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    dim: usize,
    elements: Vec<ElementFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementFile {
    re: Vec<Vec<f64>>,
    im: Option<Vec<Vec<f64>>>,
    count: f64,
}

/// A bare matrix `{"re": [[..]], "im": [[..]]}`, used for true-state files.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    re: Vec<Vec<f64>>,
    im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

pub fn format_of(path: &Path) -> Result<Format, CliError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => Ok(Format::Json),
        Some(e) if e.eq_ignore_ascii_case("csv") => Ok(Format::Csv),
        _ => Err(CliError::Parse(format!(
            "{}: expected a .json or .csv file",
            path.display()
        ))),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Loads and validates a dataset. `dim` is required for CSV input and, for
/// JSON input, must agree with the file when given.
pub fn parse_dataset(path: &Path, dim: Option<usize>) -> Result<Dataset, CliError> {
    match format_of(path)? {
        Format::Json => {
            let text = read(path)?;
            let file: DatasetFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            if let Some(d) = dim {
                if d != file.dim {
                    return Err(CliError::Validation(format!(
                        "{}: file has dim {}, --dim is {d}",
                        path.display(),
                        file.dim
                    )));
                }
            }
            dataset_from_file(file)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
        }
        Format::Csv => {
            let dim = dim.ok_or_else(|| {
                CliError::Validation("--dim is required for quadrature CSV input".into())
            })?;
            let samples = read_quadratures(path)?;
            quadrature_dataset(&samples, dim)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
        }
    }
}

fn dataset_from_file(file: DatasetFile) -> Result<Dataset, String> {
    if file.dim == 0 {
        return Err("dim must be at least 1".into());
    }
    if file.elements.is_empty() {
        return Err("no elements".into());
    }
    let records = file
        .elements
        .into_iter()
        .enumerate()
        .map(|(i, el)| {
            let m = matrix_from_parts(file.dim, &el.re, el.im.as_deref())
                .map_err(|e| format!("element {i}: {e}"))?;
            let op = HermitianOperator::new(m).map_err(|e| format!("element {i}: {e}"))?;
            let element = PovmElement::new(op).map_err(|e| format!("element {i}: {e}"))?;
            Ok(Record {
                element,
                count: el.count,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Dataset::new(records).map_err(|e| e.to_string())
}

fn matrix_from_parts(
    dim: usize,
    re: &[Vec<f64>],
    im: Option<&[Vec<f64>]>,
) -> Result<CMatrix, String> {
    let zeros;
    let im = match im {
        Some(im) => im,
        None => {
            zeros = vec![vec![0.0; dim]; dim];
            &zeros
        }
    };
    for (name, part) in [("re", re), ("im", im)] {
        if part.len() != dim {
            return Err(format!("{name} has {} rows, expected {dim}", part.len()));
        }
        if let Some((r, row)) = part.iter().enumerate().find(|(_, row)| row.len() != dim) {
            return Err(format!(
                "{name} row {r} has {} entries, expected {dim}",
                row.len()
            ));
        }
    }
    CMatrix::from_parts(re, im).map_err(|e| e.to_string())
}

/// Reads a true-state file and validates it as a density matrix.
pub fn parse_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = read(path)?;
    let file: MatrixFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let dim = file.re.len();
    let invalid = |e: String| CliError::Validation(format!("{}: {e}", path.display()));
    if dim == 0 {
        return Err(invalid("empty matrix".into()));
    }
    let m = matrix_from_parts(dim, &file.re, file.im.as_deref()).map_err(invalid)?;
    let op = HermitianOperator::new(m).map_err(|e| invalid(e.to_string()))?;
    Ok(DensityMatrix::new(op)?)
}

/// POVM elements of a dataset file, counts ignored.
pub fn parse_povm(path: &Path) -> Result<Vec<PovmElement>, CliError> {
    if format_of(path)? != Format::Json {
        return Err(CliError::Parse(format!(
            "{}: POVM files must be JSON",
            path.display()
        )));
    }
    let text = read(path)?;
    let file: DatasetFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    file.elements
        .iter()
        .enumerate()
        .map(|(i, el)| {
            let m = matrix_from_parts(file.dim, &el.re, el.im.as_deref())
                .map_err(|e| format!("element {i}: {e}"))?;
            let op = HermitianOperator::new(m).map_err(|e| format!("element {i}: {e}"))?;
            PovmElement::new(op).map_err(|e| format!("element {i}: {e}"))
        })
        .collect::<Result<_, String>>()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn read_quadratures(path: &Path) -> Result<Vec<QuadratureSample>, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let parse_err = |msg: String| CliError::Parse(format!("{}: {msg}", path.display()));
    let headers = reader
        .headers()
        .map_err(|e| parse_err(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["theta", "x"] {
        return Err(parse_err(format!(
            "expected header `theta,x`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut samples = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| parse_err(e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| {
            row[i].parse::<f64>().map_err(|_| {
                parse_err(format!("line {line}: {name} `{}` is not a number", &row[i]))
            })
        };
        let (theta, x) = (field(0, "theta")?, field(1, "x")?);
        let sample = QuadratureSample::new(theta, x)
            .map_err(|e| CliError::Validation(format!("{}: line {line}: {e}", path.display())))?;
        samples.push(sample);
    }
    Ok(samples)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::io(path, std::io::Error::other(e)))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct DatasetOut {
    dim: usize,
    elements: Vec<ElementOut>,
}

#[derive(Serialize)]
struct ElementOut {
    re: Vec<Vec<Num>>,
    im: Vec<Vec<Num>>,
    count: Num,
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<(), CliError> {
    let out = DatasetOut {
        dim: data.dim(),
        elements: data
            .records()
            .iter()
            .map(|r| {
                let MatrixJson { re, im } = MatrixJson::from(r.element.matrix());
                ElementOut {
                    re,
                    im,
                    count: Num(r.count),
                }
            })
            .collect(),
    };
    write_json(path, &out)
}

pub fn write_quadratures(path: &Path, samples: &[QuadratureSample]) -> Result<(), CliError> {
    let w = create(path)?;
    let mut writer = csv::Writer::from_writer(w);
    let io_err = |e: csv::Error| CliError::io(path, std::io::Error::other(e));
    writer.write_record(["theta", "x"]).map_err(io_err)?;
    for s in samples {
        writer
            .write_record([fmt_f64(s.theta), fmt_f64(s.x)])
            .map_err(io_err)?;
    }
    writer.flush().map_err(|e| CliError::io(path, e))
}

/// SHA-256 over the exact bit patterns of every element and count.
pub fn dataset_hash(data: &Dataset) -> String {
    // adding +0.0 maps -0.0 to +0.0 and leaves every other value alone
    let bits = |x: f64| (x + 0.0).to_bits().to_le_bytes();
    let mut h = Sha256::new();
    h.update((data.dim() as u64).to_le_bytes());
    h.update((data.len() as u64).to_le_bytes());
    for r in data.records() {
        h.update(bits(r.count));
        for c in r.element.matrix().as_slice() {
            h.update(bits(c.re));
            h.update(bits(c.im));
        }
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rhor_core::counterexample_dataset;

    const COUNTEREXAMPLE: &str = r#"{"dim": 2, "elements": [
        {"re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 0]], "count": 1},
        {"re": [[0, 0], [0, 1]], "count": 2}
    ]}"#;

    fn temp_file(name: &str, text: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        (dir, path)
    }

    #[test]
    fn counterexample_fixture() {
        let (_d, path) = temp_file("c.json", COUNTEREXAMPLE);
        let data = parse_dataset(&path, None).unwrap();
        assert_eq!(data.total(), 3.0);
        assert_eq!(dataset_hash(&data), dataset_hash(&counterexample_dataset()));
    }

    #[test]
    fn single_quadrature_row() {
        let (_d, path) = temp_file("q.csv", "theta,x\n0.0,0.0\n");
        let data = parse_dataset(&path, Some(2)).unwrap();
        assert_eq!(data.len(), 1);
        let m = data.records()[0].element.matrix();
        assert!((m[(0, 0)].re - std::f64::consts::PI.powf(-0.5)).abs() < 1e-15);
        assert!(m[(1, 1)].norm() < 1e-15 && m[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn negative_element_rejected() {
        let text = r#"{"dim": 2, "elements": [{"re": [[1, 0], [0, -0.5]], "count": 1}]}"#;
        let (_d, path) = temp_file("n.json", text);
        match parse_dataset(&path, None) {
            Err(CliError::Validation(msg)) => assert!(msg.contains("element 0"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_are_parse_errors() {
        for text in [
            "{",
            r#"{"dim": 2}"#,
            r#"{"dim": 2, "elements": [], "x": 1}"#,
        ] {
            let (_d, path) = temp_file("bad.json", text);
            assert!(
                matches!(parse_dataset(&path, None), Err(CliError::Parse(_))),
                "{text}"
            );
        }
        let (_d, path) = temp_file("bad.csv", "phase,x\n0,0\n");
        assert!(matches!(
            parse_dataset(&path, Some(2)),
            Err(CliError::Parse(_))
        ));
        let (_d, path) = temp_file("bad.csv", "theta,x\n0,zero\n");
        match parse_dataset(&path, Some(2)) {
            Err(CliError::Parse(msg)) => assert!(msg.contains("line 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_shape_reports_row() {
        let text = r#"{"dim": 2, "elements": [{"re": [[1, 0], [0]], "count": 1}]}"#;
        let (_d, path) = temp_file("s.json", text);
        match parse_dataset(&path, None) {
            Err(CliError::Validation(msg)) => assert!(msg.contains("re row 1"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dataset_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let data = quadrature_dataset(
            &[
                QuadratureSample::new(0.3, -1.25).unwrap(),
                QuadratureSample::new(2.0, 0.1).unwrap(),
            ],
            4,
        )
        .unwrap();
        let path = dir.path().join("d.json");
        write_dataset(&path, &data).unwrap();
        let back = parse_dataset(&path, Some(4)).unwrap();
        assert_eq!(dataset_hash(&back), dataset_hash(&data));
    }

    #[test]
    fn quadrature_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let samples = vec![
            QuadratureSample::new(0.1, 1.0 / 3.0).unwrap(),
            QuadratureSample::new(3.0, -2.0e-7).unwrap(),
        ];
        let path = dir.path().join("q.csv");
        write_quadratures(&path, &samples).unwrap();
        assert_eq!(read_quadratures(&path).unwrap(), samples);
    }

    #[test]
    fn missing_file_is_io() {
        let err = parse_dataset(Path::new("/nonexistent/x.json"), None).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
