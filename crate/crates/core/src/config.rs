//! Flat key-value experiment configuration: `key = value` lines with dotted
//! section keys, one dot deep, `#` comments. Typed getters validate on
//! access and report the offending key.

use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{CompactRegion, ClosedDisk, DomainSpec};
use crate::rational::{exp_taylor, poly_from_string, RationalFunction};

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if key.is_empty() || key.matches('.').count() > 1 {
                return Err(Error::Config(format!(
                    "line {}: keys use at most one dot, got '{key}'",
                    lineno + 1
                )));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Config { entries })
    }

    pub fn from_entries(entries: BTreeMap<String, String>) -> Config {
        Config { entries }
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing key '{key}'")))
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| Error::Config(format!("key '{key}': expected a number, got '{s}'"))),
        }
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.require(key)?
            .parse()
            .map_err(|_| Error::Config(format!("key '{key}': expected a number")))
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| Error::Config(format!("key '{key}': expected an integer, got '{s}'"))),
        }
    }

    pub fn get_complex(&self, key: &str, default: Complex64) -> Result<Complex64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => parse_complex(s)
                .ok_or_else(|| Error::Config(format!("key '{key}': expected 're,im', got '{s}'"))),
        }
    }

    /// Geometry under `region.*`.
    pub fn region(&self) -> Result<CompactRegion> {
        let kind = self.get("region.kind").unwrap_or("disk");
        let center = self.get_complex("region.center", Complex64::new(0.0, 0.0))?;
        match kind {
            "disk" => CompactRegion::disk(center, self.get_f64("region.radius", 1.0)?),
            "annulus" => CompactRegion::annulus(
                center,
                self.get_f64("region.inner-radius", 0.5)?,
                self.get_f64("region.outer-radius", 2.0)?,
            ),
            "disk-union" => {
                let spec = self.require("region.disks")?;
                CompactRegion::disk_union(parse_disks(spec)?)
            }
            "holed-disk" => {
                let outer = ClosedDisk::new(center, self.get_f64("region.radius", 1.0)?)?;
                let holes = parse_disks(self.require("region.holes")?)?;
                CompactRegion::holed_disk(outer, holes)
            }
            other => Err(Error::Config(format!("unknown region.kind '{other}'"))),
        }
    }

    /// Domain under `domain.*`.
    pub fn domain(&self) -> Result<DomainSpec> {
        match self.get("domain.kind").unwrap_or("whole-plane") {
            "whole-plane" => Ok(DomainSpec::WholePlane),
            "unit-disk" => Ok(DomainSpec::UnitDisk),
            "punctured-plane" => {
                let raw = self.get("domain.punctures").unwrap_or("0,0");
                let punctures = raw
                    .split(';')
                    .map(|s| {
                        parse_complex(s).ok_or_else(|| {
                            Error::Config(format!("domain.punctures: bad entry '{s}'"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                DomainSpec::punctured(punctures)
            }
            "simply-connected" => {
                let center = self.get_complex("domain.center", Complex64::new(0.0, 0.0))?;
                let radius = self.get_f64("domain.radius", 10.0)?;
                Ok(DomainSpec::SimplyConnected(ClosedDisk::new(center, radius)?))
            }
            other => Err(Error::Config(format!("unknown domain.kind '{other}'"))),
        }
    }

    /// A function specification under the given prefix: `<prefix>.kind` one
    /// of identity | reciprocal | exp-taylor | polynomial | rational.
    pub fn function(&self, prefix: &str) -> Result<RationalFunction> {
        let kind_key = format!("{prefix}.kind");
        match self.require(&kind_key)? {
            "identity" => Ok(RationalFunction::identity()),
            "reciprocal" => Ok(RationalFunction::reciprocal()),
            "exp-taylor" => {
                let degree = self.get_usize(&format!("{prefix}.degree"), 12)?;
                Ok(RationalFunction::from_polynomial(exp_taylor(degree)))
            }
            "polynomial" => {
                let coeffs = self.require(&format!("{prefix}.coefficients"))?;
                Ok(RationalFunction::from_polynomial(poly_from_string(coeffs)?))
            }
            "rational" => {
                let num = poly_from_string(self.require(&format!("{prefix}.numerator"))?)?;
                let den = poly_from_string(self.require(&format!("{prefix}.denominator"))?)?;
                RationalFunction::new(num, den)
            }
            other => Err(Error::Config(format!(
                "key '{kind_key}': unknown function kind '{other}'"
            ))),
        }
    }

    /// Indexed function list: target1.*, target2.*, ... (contiguous from 1).
    pub fn target_list(&self) -> Result<Vec<RationalFunction>> {
        let mut targets = Vec::new();
        let mut i = 1usize;
        while self.get(&format!("target{i}.kind")).is_some() {
            targets.push(self.function(&format!("target{i}"))?);
            i += 1;
        }
        if targets.is_empty() {
            return Err(Error::Config("no targets given (target1.kind, ...)".into()));
        }
        Ok(targets)
    }
}

pub fn parse_complex(s: &str) -> Option<Complex64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [re] => re.parse().ok().map(|r| Complex64::new(r, 0.0)),
        [re, im] => match (re.parse(), im.parse()) {
            (Ok(r), Ok(i)) => Some(Complex64::new(r, i)),
            _ => None,
        },
        _ => None,
    }
}

fn parse_disks(spec: &str) -> Result<Vec<ClosedDisk>> {
    spec.split(';')
        .map(|part| {
            let nums: Vec<&str> = part.split(',').map(str::trim).collect();
            if nums.len() != 3 {
                return Err(Error::Config(format!(
                    "disk entry '{part}': expected 'c_re,c_im,radius'"
                )));
            }
            let re: f64 = nums[0]
                .parse()
                .map_err(|_| Error::Config(format!("bad number '{}'", nums[0])))?;
            let im: f64 = nums[1]
                .parse()
                .map_err(|_| Error::Config(format!("bad number '{}'", nums[1])))?;
            let r: f64 = nums[2]
                .parse()
                .map_err(|_| Error::Config(format!("bad number '{}'", nums[2])))?;
            ClosedDisk::new(Complex64::new(re, im), r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_keys_and_comments() {
        let cfg = Config::parse(
            "# experiment setup\nexperiment = runge\nregion.kind = annulus\nregion.inner-radius = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.get("experiment"), Some("runge"));
        assert!(matches!(
            cfg.region().unwrap(),
            CompactRegion::Annulus { .. }
        ));
    }

    #[test]
    fn rejects_deep_keys() {
        assert!(Config::parse("a.b.c = 1").is_err());
    }

    #[test]
    fn function_specs() {
        let cfg = Config::parse(
            "f.kind = rational\nf.numerator = 0,0;1,0\nf.denominator = 1,0\ng.kind = exp-taylor\ng.degree = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.function("f").unwrap(), RationalFunction::identity());
        let g = cfg.function("g").unwrap();
        assert_eq!(g.numerator().degree(), Some(4));
    }
}
