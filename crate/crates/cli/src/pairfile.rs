//! Pair files: a line-oriented text format and a JSON alternative, both
//! tagged with the schema string `cbpkit.pair/1`.
//!
//! Text layout:
//!
//! ```text
//! cbpkit.pair/1
//! field extension 5 1,1,1
//! d 2
//! label optional free text
//! provenance optional free text
//! matrix A
//! (0,1) 0 1
//! ...
//! matrix Astar
//! ...
//! matrix P
//! ...
//! ```
//!
//! Elements use the canonical encoding of [`Element`]'s `Display`. Extra
//! matrices (transition `P`, raising `R`) follow `Astar` in name order.

use std::collections::BTreeMap;

use cbpkit::exactla::{LinalgError, Matrix};
use cbpkit::families::{CbpPair, FamilyError};
use cbpkit::{Element, Field, FieldDescriptor, FieldError};
use serde_json::{json, Map, Value};
use thiserror::Error;

pub const SCHEMA: &str = "cbpkit.pair/1";

#[derive(Debug, Error)]
pub enum PairFileError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Schema(String),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairFile {
    pub pair: CbpPair,
    pub label: Option<String>,
    pub provenance: Option<String>,
    pub extra: BTreeMap<String, Matrix>,
}

impl PairFile {
    pub fn new(pair: CbpPair) -> PairFile {
        PairFile {
            pair,
            label: None,
            provenance: None,
            extra: BTreeMap::new(),
        }
    }

    /// Reads either format; JSON is recognised by a leading `{`.
    pub fn parse(src: &str) -> Result<PairFile, PairFileError> {
        if src.trim_start().starts_with('{') {
            Self::parse_json(src)
        } else {
            Self::parse_text(src)
        }
    }

    pub fn render(&self, fmt: Format) -> String {
        match fmt {
            Format::Text => self.to_text(),
            Format::Json => self.to_json_string(),
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut v = Map::new();
        v.insert("schema".into(), SCHEMA.into());
        v.insert("field".into(), json!(self.pair.field().descriptor()));
        v.insert("d".into(), self.pair.d().into());
        v.insert("A".into(), self.pair.a.rows_json());
        v.insert("Astar".into(), self.pair.astar.rows_json());
        if let Some(l) = &self.label {
            v.insert("label".into(), l.clone().into());
        }
        if let Some(p) = &self.provenance {
            v.insert("provenance".into(), p.clone().into());
        }
        if !self.extra.is_empty() {
            let ex: Map<String, Value> = self
                .extra
                .iter()
                .map(|(k, m)| (k.clone(), m.rows_json()))
                .collect();
            v.insert("extra".into(), Value::Object(ex));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(v)).expect("values serialize");
        s.push('\n');
        s
    }

    pub fn parse_json(src: &str) -> Result<PairFile, PairFileError> {
        let v: Value = serde_json::from_str(src)?;
        if v["schema"] != SCHEMA {
            return Err(PairFileError::Schema(format!(
                "expected schema {SCHEMA:?}, found {}",
                v["schema"]
            )));
        }
        let desc: FieldDescriptor = serde_json::from_value(v["field"].clone())?;
        let field = Field::new(&desc)?;
        let a = Matrix::rows_from_json(&field, &v["A"])?;
        let astar = Matrix::rows_from_json(&field, &v["Astar"])?;
        let pair = CbpPair::new(a, astar)?;
        check_d(&pair, v["d"].as_u64())?;
        let text = |key: &str| -> Result<Option<String>, PairFileError> {
            match &v[key] {
                Value::Null => Ok(None),
                Value::String(s) if !s.contains('\n') => Ok(Some(s.clone())),
                _ => Err(PairFileError::Schema(format!(
                    "{key} must be a single-line string"
                ))),
            }
        };
        let mut out = PairFile {
            label: text("label")?,
            provenance: text("provenance")?,
            pair,
            extra: BTreeMap::new(),
        };
        match &v["extra"] {
            Value::Null => {}
            Value::Object(m) => {
                for (k, rows) in m {
                    out.add_extra(k, Matrix::rows_from_json(&field, rows)?)?;
                }
            }
            _ => return Err(PairFileError::Schema("extra must be an object".into())),
        }
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{SCHEMA}\nfield {}\nd {}\n",
            field_line(self.pair.field()),
            self.pair.d()
        );
        if let Some(l) = &self.label {
            s += &format!("label {l}\n");
        }
        if let Some(p) = &self.provenance {
            s += &format!("provenance {p}\n");
        }
        let mats = [("A", &self.pair.a), ("Astar", &self.pair.astar)]
            .into_iter()
            .chain(self.extra.iter().map(|(k, m)| (k.as_str(), m)));
        for (name, m) in mats {
            s += &format!("matrix {name}\n");
            for row in m.rows() {
                let toks: Vec<String> = row.iter().map(Element::to_string).collect();
                s += &toks.join(" ");
                s.push('\n');
            }
        }
        s
    }

    pub fn parse_text(src: &str) -> Result<PairFile, PairFileError> {
        let mut lines = src
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .peekable();
        let syntax = |line: usize, msg: &str| PairFileError::Syntax {
            line,
            msg: msg.to_string(),
        };

        let (n, head) = lines.next().ok_or_else(|| syntax(0, "empty file"))?;
        if head != SCHEMA {
            return Err(syntax(n, &format!("expected header {SCHEMA:?}")));
        }
        let (n, fl) = lines
            .next()
            .ok_or_else(|| syntax(n, "missing field line"))?;
        let field = parse_field_line(fl).map_err(|m| syntax(n, &m))?;
        let (n, dl) = lines.next().ok_or_else(|| syntax(n, "missing d line"))?;
        let d: usize = dl
            .strip_prefix("d ")
            .and_then(|x| x.trim().parse().ok())
            .ok_or_else(|| syntax(n, "expected `d <integer>`"))?;

        let mut label = None;
        let mut provenance = None;
        let mut mats: Vec<(String, Matrix)> = Vec::new();
        while let Some((n, l)) = lines.next() {
            if let Some(rest) = l.strip_prefix("label ") {
                label = Some(rest.to_string());
            } else if let Some(rest) = l.strip_prefix("provenance ") {
                provenance = Some(rest.to_string());
            } else if let Some(name) = l.strip_prefix("matrix ") {
                let mut rows = Vec::with_capacity(d + 1);
                for _ in 0..=d {
                    let (rn, rl) = lines.next().ok_or_else(|| syntax(n, "matrix ends early"))?;
                    let row: Vec<Element> = rl
                        .split_whitespace()
                        .map(|t| field.parse_element(t))
                        .collect::<Result<_, _>>()
                        .map_err(|e| syntax(rn, &e.to_string()))?;
                    if row.len() != d + 1 {
                        return Err(syntax(rn, &format!("expected {} entries", d + 1)));
                    }
                    rows.push(row);
                }
                mats.push((name.trim().to_string(), Matrix::from_rows(&field, rows)?));
            } else {
                return Err(syntax(n, &format!("unexpected line {l:?}")));
            }
        }
        let mut mats = mats.into_iter();
        let (Some((na, a)), Some((ns, astar))) = (mats.next(), mats.next()) else {
            return Err(PairFileError::Schema(
                "matrices A and Astar are required".into(),
            ));
        };
        if na != "A" || ns != "Astar" {
            return Err(PairFileError::Schema(
                "the first two matrices must be A then Astar".into(),
            ));
        }
        let pair = CbpPair::new(a, astar)?;
        let mut out = PairFile {
            pair,
            label,
            provenance,
            extra: BTreeMap::new(),
        };
        for (k, m) in mats {
            out.add_extra(&k, m)?;
        }
        Ok(out)
    }

    pub fn add_extra(&mut self, name: &str, m: Matrix) -> Result<(), PairFileError> {
        if name == "A" || name == "Astar" || name.is_empty() || name.contains(char::is_whitespace) {
            return Err(PairFileError::Schema(format!(
                "bad extra matrix name {name:?}"
            )));
        }
        if m.dim() != self.pair.dim() || m.field() != self.pair.field() {
            return Err(PairFileError::Schema(format!(
                "extra matrix {name} has the wrong shape or field"
            )));
        }
        if self.extra.insert(name.to_string(), m).is_some() {
            return Err(PairFileError::Schema(format!("duplicate matrix {name}")));
        }
        Ok(())
    }
}

fn check_d(pair: &CbpPair, d: Option<u64>) -> Result<(), PairFileError> {
    if d != Some(pair.d() as u64) {
        return Err(PairFileError::Schema(
            "d does not match the matrix size".into(),
        ));
    }
    Ok(())
}

fn field_line(f: &Field) -> String {
    match f.descriptor() {
        FieldDescriptor::Prime { p } => format!("prime {p}"),
        FieldDescriptor::Extension { p, modulus } => {
            let m: Vec<String> = modulus.iter().map(u64::to_string).collect();
            format!("extension {p} {}", m.join(","))
        }
        FieldDescriptor::Cyclotomic { n } => format!("cyclotomic {n}"),
    }
}

fn parse_field_line(l: &str) -> Result<Field, String> {
    let toks: Vec<&str> = l.split_whitespace().collect();
    let num = |t: &str| t.parse::<u64>().map_err(|_| format!("bad number {t:?}"));
    let desc = match toks.as_slice() {
        ["field", "prime", p] => FieldDescriptor::Prime { p: num(p)? },
        ["field", "extension", p, m] => FieldDescriptor::Extension {
            p: num(p)?,
            modulus: m.split(',').map(num).collect::<Result<_, _>>()?,
        },
        ["field", "cyclotomic", n] => FieldDescriptor::Cyclotomic {
            n: u32::try_from(num(n)?).map_err(|_| format!("conductor {n} too large"))?,
        },
        _ => {
            return Err(format!(
                "expected `field prime|extension|cyclotomic ...`, found {l:?}"
            ))
        }
    };
    Field::new(&desc).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use cbpkit::families::{make_cbp_q, make_p_q, FamilyParamsQ};

    fn sample(f: &Field, q: Element, eps: Element) -> PairFile {
        let p = FamilyParamsQ::new(2, q, eps).unwrap();
        let mut pf = PairFile::new(make_cbp_q(&p));
        pf.label = Some("sample pair".into());
        pf.add_extra("P", make_p_q(&p)).unwrap();
        assert_eq!(pf.pair.field(), f);
        pf
    }

    #[test]
    fn both_formats_round_trip() {
        let c = Field::cyclotomic(3).unwrap();
        let z = c.generator().unwrap();
        let half = c.parse_element("(1/2,-3)").unwrap();
        let g = Field::extension(2, vec![1, 1, 1]).unwrap();
        for pf in [
            sample(&c, z.clone(), half),
            sample(&c, z, c.zero()),
            sample(
                &Field::prime(7).unwrap(),
                Field::prime(7).unwrap().from_i64(2),
                Field::prime(7).unwrap().from_i64(3),
            ),
            sample(&g, g.generator().unwrap(), g.zero()),
        ] {
            for fmt in [Format::Text, Format::Json] {
                let s = pf.render(fmt);
                let back = PairFile::parse(&s).unwrap();
                assert_eq!(back, pf);
                assert_eq!(back.render(fmt), s);
            }
        }
    }

    #[test]
    fn rejects_malformed_text() {
        let good = sample(
            &Field::prime(7).unwrap(),
            Field::prime(7).unwrap().from_i64(2),
            Field::prime(7).unwrap().from_i64(0),
        )
        .to_text();
        assert!(PairFile::parse(&good.replace("cbpkit.pair/1", "cbpkit.pair/0")).is_err());
        assert!(PairFile::parse(&good.replace("d 2", "d 3")).is_err());
        assert!(PairFile::parse(&good.replace("prime 7", "prime 8")).is_err());
        let short: String = good.lines().take(6).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            PairFile::parse(&short),
            Err(PairFileError::Syntax { .. })
        ));
    }
}
