//! Workload files: one JSON object per line, a header followed by operations.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::engine::Char;
use crate::error::{Error, Result};
use crate::harness::InstanceConfig;
use crate::types::{Answer, Target};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadHeader {
    pub config: InstanceConfig,
    pub pattern: Vec<Char>,
    pub text: Vec<Char>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Record {
    Update {
        target: Target,
        index: usize,
        char: Char,
    },
    Query {
        index: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expected: Option<Answer>,
    },
}

enum Line {
    Header(WorkloadHeader),
    Op(Record),
}

impl Line {
    fn parse(line: &str) -> Result<Line> {
        let mut value: serde_json::Value = serde_json::from_str(line)?;
        if value.get("type").and_then(|t| t.as_str()) == Some("header") {
            value.as_object_mut().expect("tagged object").remove("type");
            Ok(Line::Header(serde_json::from_value(value)?))
        } else {
            Ok(Line::Op(serde_json::from_value(value)?))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Workload {
    pub header: WorkloadHeader,
    pub records: Vec<Record>,
}

impl Workload {
    pub fn new(config: InstanceConfig, pattern: Vec<Char>, text: Vec<Char>) -> Self {
        Workload {
            header: WorkloadHeader { config, pattern, text },
            records: Vec::new(),
        }
    }

    pub fn queries(&self) -> usize {
        self.records.iter().filter(|r| matches!(r, Record::Query { .. })).count()
    }

    pub fn updates(&self) -> usize {
        self.records.len() - self.queries()
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let mut header = serde_json::Map::new();
        header.insert("type".into(), "header".into());
        if let serde_json::Value::Object(fields) = serde_json::to_value(&self.header)? {
            header.extend(fields);
        }
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let mut header = None;
        let mut records = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed = Line::parse(&line).map_err(|e| Error::Format(format!("line {}: {e}", n + 1)))?;
            match (parsed, &header) {
                (Line::Header(h), None) => header = Some(h),
                (Line::Header(_), Some(_)) => return Err(Error::Format(format!("line {}: second header", n + 1))),
                (Line::Op(_), None) => return Err(Error::Format("workload must start with a header".into())),
                (Line::Op(rec), Some(_)) => records.push(rec),
            }
        }
        let header = header.ok_or_else(|| Error::Format("empty workload".into()))?;
        Ok(Workload { header, records })
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn from_jsonl(s: &str) -> Result<Self> {
        Self::read_from(s.as_bytes())
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::StructureKind;

    fn sample() -> Workload {
        let config = InstanceConfig::new(4, 2, 1, 3, StructureKind::Kangaroo);
        let mut w = Workload::new(config, vec![0, 1], vec![0, 1, 2, 0]);
        w.records.push(Record::Update {
            target: Target::Text,
            index: 3,
            char: 1,
        });
        w.records.push(Record::Query { index: 2, expected: None });
        w.records.push(Record::Query {
            index: 0,
            expected: Some(Answer::Infinity),
        });
        w
    }

    #[test]
    fn round_trip() {
        let w = sample();
        let s = w.to_jsonl();
        assert_eq!(s.lines().count(), 4);
        assert!(s.lines().nth(1).unwrap().contains(r#""type":"update""#));
        assert!(s.lines().nth(3).unwrap().contains(r#""expected":"inf""#));
        assert_eq!(Workload::from_jsonl(&s).unwrap(), w);
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(Workload::from_jsonl(""), Err(Error::Format(_))));
        let s = sample().to_jsonl();
        let body: String = s.lines().skip(1).map(|l| format!("{l}\n")).collect();
        assert!(matches!(Workload::from_jsonl(&body), Err(Error::Format(_))));
        assert!(matches!(Workload::from_jsonl(&format!("{s}{{\"type\":\"jump\"}}\n")), Err(Error::Format(_))));
    }
}
