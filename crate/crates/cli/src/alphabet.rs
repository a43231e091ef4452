use cfdim::indexsets::{
    build_i_delta, build_liouville_set, build_r, parse_alphabet_file, parse_family, parse_set, Construction, ConstructionBudget,
    IndexSet,
};
use cfdim::{Error, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Exactly one of `--set`, `--family`, `--alphabet-file`.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
pub struct AlphabetArgs {
    /// Explicit digits ("1,2,5-9") or "full".
    #[arg(long)]
    pub set: Option<String>,
    /// full, geometric:A, i0:D, iplus:D, iminus:D, r:D, idelta:D, liouville:D:STAGES
    #[arg(long)]
    pub family: Option<String>,
    /// One positive integer per line, ascending, '#' comments.
    #[arg(long)]
    pub alphabet_file: Option<PathBuf>,
    /// Last candidate examined by the greedy constructions.
    #[arg(long)]
    pub n_max: Option<u64>,
}

impl AlphabetArgs {
    pub fn merged(&self, preset: Option<&AlphabetArgs>) -> AlphabetArgs {
        let p = preset.cloned().unwrap_or_default();
        let explicit = self.set.is_some() || self.family.is_some() || self.alphabet_file.is_some();
        AlphabetArgs {
            set: if explicit { self.set.clone() } else { p.set },
            family: if explicit { self.family.clone() } else { p.family },
            alphabet_file: if explicit { self.alphabet_file.clone() } else { p.alphabet_file },
            n_max: self.n_max.or(p.n_max),
        }
    }

    pub fn budget(&self) -> ConstructionBudget {
        let mut b = ConstructionBudget::default();
        if let Some(n) = self.n_max {
            b.n_max = n;
        }
        b
    }

    pub fn label(&self) -> String {
        if let Some(s) = &self.set {
            format!("set:{s}")
        } else if let Some(f) = &self.family {
            format!("family:{f}")
        } else if let Some(p) = &self.alphabet_file {
            format!("file:{}", p.display())
        } else {
            "none".into()
        }
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let given = [self.set.is_some(), self.family.is_some(), self.alphabet_file.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(Error::Parse("give exactly one of --set, --family, --alphabet-file".into()));
        }
        if let Some(s) = &self.set {
            return Ok(Resolved { set: parse_set(s)?, construction: None });
        }
        if let Some(p) = &self.alphabet_file {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            return Ok(Resolved { set: parse_alphabet_file(&text)?, construction: None });
        }
        let spec = self.family.as_deref().unwrap();
        let mut it = spec.split(':');
        let name = it.next().unwrap_or("").trim();
        let num = |v: Option<&str>, what: &str| -> Result<f64> {
            v.and_then(|s| s.trim().parse().ok()).ok_or_else(|| Error::Parse(format!("{what} missing or malformed in {spec:?}")))
        };
        let c = match name {
            "r" => build_r(num(it.next(), "δ")?, self.budget())?,
            "idelta" => build_i_delta(num(it.next(), "δ")?, self.budget())?,
            "liouville" => {
                let d = num(it.next(), "δ")?;
                let stages = num(it.next(), "stage count")? as usize;
                build_liouville_set(d, stages, self.budget())?
            }
            _ => return Ok(Resolved { set: parse_family(spec)?, construction: None }),
        };
        Ok(Resolved { set: c.set.clone(), construction: Some(c) })
    }
}

pub struct Resolved {
    pub set: IndexSet,
    pub construction: Option<Construction>,
}
