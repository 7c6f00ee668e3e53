//! Plain-text scenarios: one `key = value` per line, `#` comments, keys unique.
//! Fixed-point data are keys of the form `fixed.<label>`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use ncindex_core::algebra::{parse_group_spec, parse_gset_spec, GSetSpec, GroupSpec, Haar};
use ncindex_core::localization::{FixedPointDatum, Locus};
use ncindex_core::scalar::C64;
use ncindex_core::{Error, Result};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct Scenario {
    pub id: String,
    pub hash: String,
    pub dir: PathBuf,
    entries: BTreeMap<String, (usize, String)>,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Io(format!("{} is not UTF-8", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut s = Self::parse(&text, dir)?;
        s.hash = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        Ok(s)
    }

    pub fn parse(text: &str, dir: PathBuf) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| parse_err(n + 1, format!("expected key = value, got {line:?}")))?;
            let k = k.trim().to_string();
            if k.is_empty() {
                return Err(parse_err(n + 1, "empty key"));
            }
            if entries.insert(k.clone(), (n + 1, v.trim().to_string())).is_some() {
                return Err(parse_err(n + 1, format!("duplicate key {k:?}")));
            }
        }
        let id = entries.get("id").map(|(_, v)| v.clone()).ok_or_else(|| parse_err(0, "missing id"))?;
        let hash = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        let s = Scenario { id, hash, dir, entries };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        for (k, (line, v)) in &self.entries {
            if k.starts_with("tol") {
                let x: f64 = v.parse().map_err(|_| parse_err(*line, format!("{k} is not a number")))?;
                if !(x > 0.0) {
                    return Err(parse_err(*line, format!("{k} must be positive")));
                }
            }
        }
        if let Some((line, v)) = self.entries.get("times") {
            if self.times()?.iter().any(|t| *t <= 0.0) {
                return Err(parse_err(*line, format!("times must be positive: {v}")));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map(|(l, _)| *l).unwrap_or(0)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Precondition(format!("scenario {} has no `{key}`", self.id)))
    }

    pub fn number<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| parse_err(self.line(key), format!("bad value for {key}: {v:?}"))),
        }
    }

    pub fn floats(&self, key: &str) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some(v) => list(v).iter().map(|x| x.parse().map_err(|_| parse_err(self.line(key), format!("bad number {x:?} in {key}")))).collect(),
        }
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        let t = self.floats("times")?;
        Ok(if t.is_empty() { vec![0.5, 1.0, 2.0] } else { t })
    }

    pub fn tolerance(&self, key: &str, default: f64) -> Result<f64> {
        self.number(key, default)
    }

    pub fn group(&self) -> Result<GroupSpec> {
        parse_group_spec(self.get("group").unwrap_or("trivial"), &self.dir)
    }

    pub fn gset(&self, group: &GroupSpec) -> Result<GSetSpec> {
        parse_gset_spec(self.get("gset").unwrap_or("regular"), group, &self.dir)
    }

    pub fn haar(&self) -> Result<Haar> {
        match self.get("haar").unwrap_or("counting") {
            "counting" | "discrete" => Ok(Haar::Counting),
            "normalized" | "compact" => Ok(Haar::Normalized),
            v => Err(parse_err(self.line("haar"), format!("haar must be counting or normalized, got {v:?}"))),
        }
    }

    /// Group elements named in `tuples`, defaulting to every element.
    pub fn tuples(&self, order: usize) -> Result<Vec<u32>> {
        match self.get("tuples") {
            None => Ok((0..order as u32).collect()),
            Some(v) => list(v)
                .iter()
                .map(|x| match x.parse::<u32>() {
                    Ok(g) if (g as usize) < order => Ok(g),
                    _ => Err(parse_err(self.line("tuples"), format!("bad group element {x:?}"))),
                })
                .collect(),
        }
    }

    /// `fixed.<label> = element; locus; dim; angles/pi; re,im; orientation; spin_lift`
    /// with locus one of `point:<x>`, `torus:<a>,<b>,..` (units of pi/2) or `whole`.
    pub fn fixed_data(&self) -> Result<Vec<FixedPointDatum>> {
        let mut out = Vec::new();
        for (k, (line, v)) in self.entries.range("fixed.".to_string()..) {
            let Some(label) = k.strip_prefix("fixed.") else { break };
            let err = |m: &str| parse_err(*line, format!("{k}: {m}"));
            let f: Vec<&str> = v.split(';').map(str::trim).collect();
            if f.len() != 7 {
                return Err(err("expected 7 fields separated by ';'"));
            }
            let element: usize = f[0].parse().map_err(|_| err("bad element"))?;
            let locus = match f[1].split_once(':') {
                None if f[1] == "whole" => Locus::Whole,
                Some(("point", x)) => Locus::FinitePoint(x.trim().parse().map_err(|_| err("bad point"))?),
                Some(("torus", xs)) => Locus::TorusPoint(list(xs).iter().map(|x| x.parse().map_err(|_| err("bad torus point"))).collect::<Result<_>>()?),
                _ => return Err(err("bad locus")),
            };
            let dim: usize = f[2].parse().map_err(|_| err("bad dim"))?;
            let angles: Vec<f64> = list(f[3]).iter().map(|x| x.parse::<f64>().map(|a| a * PI).map_err(|_| err("bad angle"))).collect::<Result<_>>()?;
            let rc = list(f[4]);
            if rc.len() != 2 {
                return Err(err("relative character is re,im"));
            }
            let re: f64 = rc[0].parse().map_err(|_| err("bad re"))?;
            let im: f64 = rc[1].parse().map_err(|_| err("bad im"))?;
            let orientation: f64 = f[5].parse().map_err(|_| err("bad orientation"))?;
            let spin: f64 = f[6].parse().map_err(|_| err("bad spin lift"))?;
            out.push(FixedPointDatum::flat(label, element, locus, dim, angles, C64::new(re, im), orientation, spin)?);
        }
        Ok(out)
    }
}

fn list(v: &str) -> Vec<&str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_fixed_data() {
        let s = Scenario::parse(
            "id = t\n# comment\ngroup = cyclic:4\ntimes = 0.3, 0.6\ntol = 1e-8\nfixed.a = 1; torus:0,2; 0; 1; 1,0; 1; -1\n",
            PathBuf::new(),
        )
        .unwrap();
        assert_eq!(s.group().unwrap().order(), 4);
        assert_eq!(s.times().unwrap(), vec![0.3, 0.6]);
        let f = s.fixed_data().unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].locus, Locus::TorusPoint(vec![0, 2]));
        assert_eq!(f[0].spin_lift, -1.0);
    }

    #[test]
    fn rejects_bad_scenarios() {
        assert!(Scenario::parse("group = cyclic:2\n", PathBuf::new()).is_err());
        assert!(Scenario::parse("id = a\nid = b\n", PathBuf::new()).is_err());
        assert!(Scenario::parse("id = a\ntol = -1\n", PathBuf::new()).is_err());
        assert!(Scenario::parse("id = a\nnonsense\n", PathBuf::new()).is_err());
        let s = Scenario::parse("id = a\nfixed.x = 1; nowhere; 0; ; 1,0; 1; 1\n", PathBuf::new()).unwrap();
        assert!(s.fixed_data().is_err());
    }
}
