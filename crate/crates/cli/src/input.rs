use std::fs;
use std::io::Read;
use std::path::Path;

use schlomilch::distributions::{FamilyParams, ParamsDoc};

use crate::Failure;

pub fn read_doc(path: Option<&Path>) -> Result<ParamsDoc, Failure> {
    let path = path.ok_or_else(|| Failure::Usage("--params PATH is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    ParamsDoc::from_json(&text).map_err(|e| Failure::Usage(e.to_string()))
}

pub fn read_family(path: Option<&Path>) -> Result<(ParamsDoc, FamilyParams), Failure> {
    let doc = read_doc(path)?;
    let fam = doc.to_family().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok((doc, fam))
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| Failure::Usage(format!("invalid {what} entry '{t}'"))))
        .collect()
}

/// One input record: its 1-based number and either coordinates or a parse error.
pub struct Record {
    pub number: usize,
    pub point: Result<Vec<f64>, String>,
}

fn parse_row(line: &str) -> Result<Vec<f64>, String> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: '{t}'")))
        .collect()
}

fn is_header(line: &str) -> bool {
    line.trim_start().starts_with(|c: char| c.is_ascii_alphabetic()) && parse_row(line).is_err()
}

/// Points from a CSV-like text (one point per line, optional header, `#`
/// comments) or a JSON array of arrays / object with a `samples` array.
pub fn parse_points(text: &str) -> Result<Vec<Record>, Failure> {
    let t = text.trim_start();
    if t.starts_with('[') || t.starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(t).map_err(|e| Failure::Usage(format!("invalid JSON points: {e}")))?;
        let rows = match &v {
            serde_json::Value::Array(a) => a.clone(),
            serde_json::Value::Object(o) => match o.get("samples").or_else(|| o.get("points")) {
                Some(serde_json::Value::Array(a)) => a.clone(),
                _ => return Err(Failure::Usage("JSON points object needs a 'samples' or 'points' array".into())),
            },
            _ => return Err(Failure::Usage("JSON points must be an array".into())),
        };
        return Ok(rows
            .iter()
            .enumerate()
            .map(|(i, r)| Record {
                number: i + 1,
                point: r
                    .as_array()
                    .ok_or_else(|| "record is not an array".to_string())
                    .and_then(|a| a.iter().map(|x| x.as_f64().ok_or_else(|| format!("not a number: {x}"))).collect()),
            })
            .collect());
    }
    let mut out = Vec::new();
    let mut first = true;
    for line in text.lines() {
        let l = line.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if first && is_header(l) {
            first = false;
            continue;
        }
        first = false;
        out.push(Record { number: out.len() + 1, point: parse_row(l) });
    }
    Ok(out)
}

pub fn read_points(path: Option<&Path>, inline: &[String]) -> Result<Vec<Record>, Failure> {
    let mut out = Vec::new();
    if let Some(p) = path {
        let text = if p == Path::new("-") {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("cannot read stdin: {e}")))?;
            s
        } else {
            fs::read_to_string(p).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))?
        };
        out = parse_points(&text)?;
    }
    for s in inline {
        out.push(Record { number: out.len() + 1, point: parse_row(s) });
    }
    if path.is_none() && inline.is_empty() {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("cannot read stdin: {e}")))?;
        out = parse_points(&s)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_header_and_comments() {
        let r = parse_points("x1,x2\n# note\n0.3,0.7\n\n0.5 0.5\nfoo,1\n").unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r[0].point.as_ref().unwrap(), &vec![0.3, 0.7]);
        assert_eq!(r[1].point.as_ref().unwrap(), &vec![0.5, 0.5]);
        assert!(r[2].point.is_err());
        assert_eq!(r[2].number, 3);
    }

    #[test]
    fn json_forms() {
        let r = parse_points("[[0.2, 0.8], [0.4, \"a\"]]").unwrap();
        assert!(r[0].point.is_ok() && r[1].point.is_err());
        let r = parse_points("{\"samples\": [[0.1, 0.9]]}").unwrap();
        assert_eq!(r[0].point.as_ref().unwrap(), &vec![0.1, 0.9]);
    }
}
