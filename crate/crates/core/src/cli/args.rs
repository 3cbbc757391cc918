use crate::distances::{DistanceSpec, Family};
use crate::error::{Error, Result};

/// Parse a distance given as inline JSON (`{"family": …, "dim": …}`) or as a
/// shorthand: `l1`, `l2`, `lp:P`, `lpp:P`, `canberra`, `bray-curtis`,
/// `entropic`, `sphere`, `oscillatory[:EPS[:SCALE]]`.
///
/// Shorthands take their dimension from `dim` (for `sphere`, the ambient one).
pub fn parse_distance(text: &str, dim: usize) -> Result<DistanceSpec> {
    let text = text.trim();
    if text.starts_with('{') {
        let spec: DistanceSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("distance JSON: {e}")))?;
        if spec.dim != dim {
            return Err(Error::DimensionMismatch { expected: spec.dim, found: dim });
        }
        return Ok(spec);
    }
    let mut parts = text.split(':');
    let name = parts.next().unwrap_or_default().to_ascii_lowercase();
    let params: Vec<f64> = parts
        .map(|p| p.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad distance parameter `{p}`"))))
        .collect::<Result<_>>()?;
    let param = |i: usize| {
        params.get(i).copied().ok_or_else(|| Error::InvalidParameter(format!("`{name}` needs a parameter")))
    };
    let family = match name.as_str() {
        "l1" => Family::Lp { p: 1.0 },
        "l2" | "euclidean" => Family::Lp { p: 2.0 },
        "lp" => Family::Lp { p: param(0)? },
        "lpp" | "lp_pow_p" => Family::LpPowP { p: param(0)? },
        "canberra" => Family::Canberra,
        "bray-curtis" | "bray_curtis" | "braycurtis" => Family::BrayCurtis,
        "entropic" => Family::Entropic,
        "sphere" | "geodesic" => Family::SphereGeodesic { ambient_dim: dim },
        "oscillatory" => Family::OscillatoryTest {
            eps: params.first().copied().unwrap_or(0.2),
            amplitude_scale: params.get(1).copied().unwrap_or(0.5),
        },
        _ => return Err(Error::InvalidParameter(format!("unknown distance `{text}`"))),
    };
    DistanceSpec::new(family, dim)
}

/// Dimension carried by an inline JSON distance, if any.
pub fn json_dim(text: &str) -> Option<usize> {
    let v: serde_json::Value = serde_json::from_str(text.trim()).ok()?;
    v.get("dim")?.as_u64().map(|d| d as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthands() {
        assert_eq!(parse_distance("l2", 3).unwrap(), DistanceSpec::lp(2.0, 3).unwrap());
        assert_eq!(parse_distance("lp:3", 2).unwrap(), DistanceSpec::lp(3.0, 2).unwrap());
        assert_eq!(parse_distance("lpp:2", 2).unwrap(), DistanceSpec::lp_pow_p(2.0, 2).unwrap());
        assert_eq!(parse_distance("Canberra", 4).unwrap(), DistanceSpec::canberra(4));
        assert_eq!(parse_distance("sphere", 3).unwrap(), DistanceSpec::sphere(3).unwrap());
        assert_eq!(parse_distance("oscillatory", 2).unwrap(), DistanceSpec::oscillatory(0.2, 0.5, 2).unwrap());
        assert!(parse_distance("oscillatory:0.9", 2).is_err());
        assert!(parse_distance("lp", 2).is_err());
        assert!(parse_distance("hamming", 2).is_err());
    }

    #[test]
    fn inline_json() {
        let s = r#"{"family":"lp","params":{"p":3.0},"dim":2}"#;
        assert_eq!(json_dim(s), Some(2));
        assert_eq!(parse_distance(s, 2).unwrap(), DistanceSpec::lp(3.0, 2).unwrap());
        assert!(matches!(parse_distance(s, 3), Err(Error::DimensionMismatch { .. })));
    }
}
