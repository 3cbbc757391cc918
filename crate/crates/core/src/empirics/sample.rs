use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::SamplerSpec;
use crate::distances::Domain;
use crate::error::{Error, Result};
use crate::rng;

/// A finite point set with a domain tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    points: Vec<Vec<f64>>,
    domain: Domain,
    pub label: String,
}

impl Sample {
    /// Rows must share one dimension and lie in `domain`.
    pub fn new(points: Vec<Vec<f64>>, domain: Domain, label: impl Into<String>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidParameter("a sample needs at least one point".into()));
        };
        let k = first.len();
        if k == 0 {
            return Err(Error::InvalidParameter("points need at least one coordinate".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != k {
                return Err(Error::DimensionMismatch { expected: k, found: p.len() });
            }
            if !domain.contains(p) {
                return Err(Error::DomainViolation(format!("row {i} is outside the {domain:?} domain")));
            }
        }
        Ok(Sample { points, domain, label: label.into() })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

/// Draw `n ≥ 2` i.i.d. points; deterministic in `seed`.
pub fn generate(dist: &SamplerSpec, n: usize, seed: u64) -> Result<Sample> {
    dist.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("sample size must be >= 2, got {n}")));
    }
    let mut rng = rng::substream(seed, 0);
    let k = dist.dim();
    let points = (0..n)
        .map(|_| {
            let mut p = vec![0.0; k];
            dist.sample_into(&mut rng, &mut p);
            p
        })
        .collect();
    Sample::new(points, dist.domain(), "generated")
}

/// Read one point per row; a single leading header row is detected by the
/// presence of a non-numeric field.
pub fn read_sample_csv<R: Read>(reader: R, domain: Domain, label: &str) -> Result<Sample> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidParameter(format!("{label}: csv: {e}")))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(p) => points.push(p),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::InvalidParameter(format!("{label}: row {}: {e}", i + 1))),
        }
    }
    Sample::new(points, domain, label)
}

/// Write one point per row without a header.
pub fn write_sample_csv<W: Write>(sample: &Sample, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for p in sample.points() {
        w.serialize(p).map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DensitySpec;

    #[test]
    fn generation_is_deterministic() {
        let g = DensitySpec::gaussian(vec![0.0], vec![1.0]).unwrap();
        let a = generate(&g, 3, 17).unwrap();
        assert_eq!(a, generate(&g, 3, 17).unwrap());
        assert_ne!(a, generate(&g, 3, 18).unwrap());
        assert!(generate(&g, 1, 17).is_err());
    }

    #[test]
    fn exponential_rows_are_positive() {
        let e = DensitySpec::ProductExponential { rates: vec![1.0, 1.0] };
        let s = generate(&e, 10_000, 2).unwrap();
        assert!(s.points().iter().flatten().all(|&v| v > 0.0));
        assert_eq!(s.domain(), Domain::PositiveOrthant);
    }

    #[test]
    fn uniform_sphere_has_small_resultant() {
        let s = generate(&DensitySpec::uniform_sphere(), 10_000, 9).unwrap();
        let mut r = [0.0; 3];
        for p in s.points() {
            (0..3).for_each(|i| r[i] += p[i]);
        }
        let len = r.iter().map(|v| v * v).sum::<f64>().sqrt() / s.len() as f64;
        assert!(len < 0.05, "{len}");
    }

    #[test]
    fn csv_round_trip_and_header_detection() {
        let text = "x,y\n1.5, 2\n-3,4e-1\n";
        let s = read_sample_csv(text.as_bytes(), Domain::Euclidean, "a").unwrap();
        assert_eq!(s.points(), &[vec![1.5, 2.0], vec![-3.0, 0.4]]);
        let mut buf = Vec::new();
        write_sample_csv(&s, &mut buf).unwrap();
        let back = read_sample_csv(buf.as_slice(), Domain::Euclidean, "a").unwrap();
        assert_eq!(back, s);

        assert!(read_sample_csv("1\nfoo\n".as_bytes(), Domain::Euclidean, "a").is_err());
        assert!(matches!(
            read_sample_csv("1\n-2\n".as_bytes(), Domain::PositiveOrthant, "a"),
            Err(Error::DomainViolation(_))
        ));
        assert!(matches!(
            read_sample_csv("1,2\n3\n".as_bytes(), Domain::Euclidean, "a"),
            Err(Error::InvalidParameter(_)) | Err(Error::DimensionMismatch { .. })
        ));
    }
}
