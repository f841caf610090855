use std::io::{BufRead, Write};

use crate::KernelError;

const MAGIC: &str = "radon-grid 1";

/// Self-describing text dump of a function on a cell-centered grid.
///
/// ```text
/// radon-grid 1
/// <key> <value>          free-form header lines
/// shape n_1 … n_N
/// domain lo_1 hi_1 … lo_N hi_N
/// values
/// v_0
/// …                      row-major, last axis fastest
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct GridDump {
    pub header: Vec<(String, String)>,
    pub shape: Vec<usize>,
    pub domain: Vec<(f64, f64)>,
    pub values: Vec<f64>,
}

impl GridDump {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<(), KernelError> {
        writeln!(w, "{MAGIC}")?;
        for (k, v) in &self.header {
            if k.contains(char::is_whitespace) || matches!(k.as_str(), "shape" | "domain" | "values") {
                return Err(KernelError::Format(format!("bad header key {k:?}")));
            }
            writeln!(w, "{k} {v}")?;
        }
        let shape: Vec<String> = self.shape.iter().map(|s| s.to_string()).collect();
        writeln!(w, "shape {}", shape.join(" "))?;
        let dom: Vec<String> = self.domain.iter().flat_map(|(a, b)| [a.to_string(), b.to_string()]).collect();
        writeln!(w, "domain {}", dom.join(" "))?;
        writeln!(w, "values")?;
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self, KernelError> {
        let mut lines = r.lines();
        let bad = |s: String| KernelError::Format(s);
        let first = lines.next().transpose()?;
        if first.as_deref().map(str::trim) != Some(MAGIC) {
            return Err(bad("missing magic line".into()));
        }
        let (mut header, mut shape, mut domain) = (Vec::new(), None, None);
        for line in lines.by_ref() {
            let line = line?;
            let line = line.trim();
            if line == "values" {
                break;
            }
            let (k, v) = line.split_once(' ').unwrap_or((line, ""));
            match k {
                "shape" => {
                    let s: Result<Vec<usize>, _> = v.split_whitespace().map(str::parse).collect();
                    shape = Some(s.map_err(|e| bad(format!("shape: {e}")))?);
                }
                "domain" => {
                    let d: Result<Vec<f64>, _> = v.split_whitespace().map(str::parse).collect();
                    let d = d.map_err(|e| bad(format!("domain: {e}")))?;
                    if d.len() % 2 != 0 {
                        return Err(bad("domain needs lo/hi pairs".into()));
                    }
                    domain = Some(d.chunks(2).map(|c| (c[0], c[1])).collect::<Vec<_>>());
                }
                _ => header.push((k.to_string(), v.to_string())),
            }
        }
        let shape: Vec<usize> = shape.ok_or_else(|| bad("missing shape".into()))?;
        let domain = domain.ok_or_else(|| bad("missing domain".into()))?;
        if domain.len() != shape.len() {
            return Err(bad(format!("{} axes in shape, {} in domain", shape.len(), domain.len())));
        }
        let mut values = Vec::with_capacity(shape.iter().product());
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            values.push(line.trim().parse::<f64>().map_err(|e| bad(format!("value {}: {e}", values.len())))?);
        }
        if values.len() != shape.iter().product::<usize>() {
            return Err(bad(format!("expected {} values, found {}", shape.iter().product::<usize>(), values.len())));
        }
        Ok(GridDump { header, shape, domain, values })
    }
}
