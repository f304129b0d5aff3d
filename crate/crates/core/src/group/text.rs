//! Plain-text set format: a `group <spec>` header, then one element per line
//! as comma-separated coordinates. Blank lines and `#` comments are skipped.

use super::Group;
use crate::error::{Error, Result};
use crate::setcalc::GSet;

pub fn write_set(set: &GSet) -> Result<String> {
    let g = set.group();
    if g.is_quotient() {
        return Err(Error::Unsupported("text output of quotient sets".into()));
    }
    let mut out = format!("group {}\n", g.descriptor());
    for e in set.iter() {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_set(text: &str) -> Result<GSet> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("missing group header".into()))?;
    let spec = header
        .strip_prefix("group ")
        .ok_or_else(|| Error::Parse(format!("expected `group <spec>`, got `{header}`")))?;
    let group = Group::parse(spec.trim())?;
    let mut elems = Vec::new();
    for line in lines {
        let coords = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::Parse(format!("bad coordinate `{t}`: {e}")))
            })
            .collect::<Result<Vec<i64>>>()?;
        elems.push(group.element(&coords)?);
    }
    GSet::new(&group, elems)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "group prod:(ut:3:5);(ab:0)\n1,2,3,-4\n0,0,0,0\n";
        let s = parse_set(text).unwrap();
        assert_eq!(s.len(), 2);
        let again = parse_set(&write_set(&s).unwrap()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn residues_are_reduced() {
        let s = parse_set("group ab:10\n13\n-1\n").unwrap();
        let coords: Vec<i64> = s.iter().map(|e| e.0[0]).collect();
        assert_eq!(coords, vec![3, 9]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_set("").is_err());
        assert!(parse_set("grp ab:3\n").is_err());
        assert!(parse_set("group ab:3\n1,2\n").is_err());
        assert!(parse_set("group ab:3\nx\n").is_err());
    }
}
