//! Real-data ingestion for bootstrap replicates.

use std::collections::HashMap;
use std::path::Path;

use postadc_core::CandidateSet;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::HarnessError;

/// Candidate set built from a table plus the responses of every original row
/// that maps to each candidate.
#[derive(Debug, Clone)]
pub struct RealData {
    pub candidates: CandidateSet,
    pub responses: Vec<Vec<f64>>,
}

impl RealData {
    pub fn row_count(&self) -> usize {
        self.responses.iter().map(Vec::len).sum()
    }
}

fn parse_cell(raw: &str, column: &str, line: usize) -> Result<f64, HarnessError> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| HarnessError::Data(format!("non-numeric value '{raw}' in column '{column}' on line {line}")))
}

pub fn load_real_csv(
    path: impl AsRef<Path>,
    feature_columns: &[String],
    response_column: &str,
    max_candidates: usize,
    seed: u64,
) -> Result<RealData, HarnessError> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    read_table(&mut reader, feature_columns, response_column, max_candidates, seed)
}

pub fn read_table<R: std::io::Read>(
    reader: &mut csv::Reader<R>,
    feature_columns: &[String],
    response_column: &str,
    max_candidates: usize,
    seed: u64,
) -> Result<RealData, HarnessError> {
    if feature_columns.is_empty() {
        return Err(HarnessError::Config("no feature columns given".into()));
    }
    if max_candidates == 0 {
        return Err(HarnessError::Config("max_candidates must be at least 1".into()));
    }
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| HarnessError::Data(format!("missing column '{name}'")))
    };
    let feature_idx: Vec<usize> = feature_columns.iter().map(|c| find(c)).collect::<Result<_, _>>()?;
    let response_idx = find(response_column)?;

    let mut features: Vec<Vec<f64>> = Vec::new();
    let mut responses: Vec<f64> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let cell = |i: usize| record.get(i).unwrap_or("");
        let x = feature_idx
            .iter()
            .zip(feature_columns)
            .map(|(&i, name)| parse_cell(cell(i), name, line))
            .collect::<Result<Vec<_>, _>>()?;
        features.push(x);
        responses.push(parse_cell(cell(response_idx), response_column, line)?);
    }
    if features.is_empty() {
        return Err(HarnessError::Data("data file has no rows".into()));
    }

    let d = feature_columns.len();
    for j in 0..d {
        let lo = features.iter().map(|x| x[j]).fold(f64::INFINITY, f64::min);
        let hi = features.iter().map(|x| x[j]).fold(f64::NEG_INFINITY, f64::max);
        for x in &mut features {
            x[j] = if hi > lo { (x[j] - lo) / (hi - lo) } else { 0.0 };
        }
    }

    let mut lookup: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut distinct: Vec<Vec<f64>> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (x, y) in features.into_iter().zip(responses) {
        let key: Vec<u64> = x.iter().map(|v| (v + 0.0).to_bits()).collect();
        let id = *lookup.entry(key).or_insert_with(|| {
            distinct.push(x);
            rows.push(Vec::new());
            distinct.len() - 1
        });
        rows[id].push(y);
    }

    let keep: Vec<usize> = if distinct.len() > max_candidates {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chosen = sample(&mut rng, distinct.len(), max_candidates).into_vec();
        chosen.sort_unstable();
        chosen
    } else {
        (0..distinct.len()).collect()
    };
    let points: Vec<Vec<f64>> = keep.iter().map(|&i| distinct[i].clone()).collect();
    let responses = keep.iter().map(|&i| std::mem::take(&mut rows[i])).collect();
    Ok(RealData {
        candidates: CandidateSet::from_points(d, &points)?,
        responses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, max: usize) -> Result<RealData, HarnessError> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        read_table(&mut reader, &["a".into(), "b".into()], "y", max, 7)
    }

    #[test]
    fn rescales_and_deduplicates() {
        let data = load("a,b,y\n1,10,0.5\n3,10,1.5\n1,10,2.5\n2,30,3.0\n", 1024).unwrap();
        assert_eq!(data.candidates.len(), 3);
        assert_eq!(data.candidates.point(0), &[0.0, 0.0]);
        assert_eq!(data.candidates.point(1), &[1.0, 0.0]);
        assert_eq!(data.candidates.point(2), &[0.5, 1.0]);
        assert_eq!(data.responses[0], vec![0.5, 2.5]);
        assert_eq!(data.row_count(), 4);
    }

    #[test]
    fn subsamples_deterministically() {
        let mut text = String::from("a,b,y\n");
        for i in 0..50 {
            text.push_str(&format!("{i},{},{}\n", i % 7, i as f64 * 0.1));
        }
        let a = load(&text, 10).unwrap();
        let b = load(&text, 10).unwrap();
        assert_eq!(a.candidates.len(), 10);
        assert_eq!(a.candidates, b.candidates);
        assert_eq!(a.responses, b.responses);
    }

    #[test]
    fn reports_bad_input() {
        assert!(matches!(load("a,b,y\n", 10), Err(HarnessError::Data(_))));
        assert!(matches!(load("a,c,y\n1,2,3\n", 10), Err(HarnessError::Data(_))));
        assert!(matches!(load("a,b,y\n1,x,3\n", 10), Err(HarnessError::Data(_))));
    }
}
