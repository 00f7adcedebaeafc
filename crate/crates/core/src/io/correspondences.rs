//! Correspondence lists: one `pointId qx qy qz` per line, pairing a cloud
//! point with its position in the mesh frame.

use std::fs;
use std::path::Path;

use super::FormatError;
use crate::eval::CorrespondenceSet;
use crate::Vec3;

pub fn parse_correspondences(text: &str) -> Result<CorrespondenceSet, FormatError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let [id, x, y, z] = tokens[..] else {
            return Err(FormatError::parse(line, "expected `pointId qx qy qz`"));
        };
        let id: u64 = id
            .parse()
            .map_err(|_| FormatError::parse(line, format!("bad point id {id:?}")))?;
        let coords = [x, y, z]
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()));
        let [Some(x), Some(y), Some(z)] = coords else {
            return Err(FormatError::parse(line, "bad coordinate"));
        };
        pairs.push((id, Vec3::new(x, y, z)));
    }
    Ok(CorrespondenceSet::new(pairs))
}

pub fn read_correspondences(path: impl AsRef<Path>) -> Result<CorrespondenceSet, FormatError> {
    parse_correspondences(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs() {
        let c = parse_correspondences("# id x y z\n3 0.5 1 -2\n\n10 0 0 0\n").unwrap();
        assert_eq!(c.pairs, vec![(3, Vec3::new(0.5, 1.0, -2.0)), (10, Vec3::zeros())]);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(parse_correspondences("1 2 3\n"), Err(FormatError::Parse { line: 1, .. })));
        assert!(matches!(parse_correspondences("-1 0 0 0\n"), Err(FormatError::Parse { .. })));
        assert!(matches!(parse_correspondences("1 0 nan 0\n"), Err(FormatError::Parse { .. })));
    }
}
