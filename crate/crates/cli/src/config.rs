//! Plain-text run configuration: `[section]` headers and `key = value` lines,
//! `#` starts a comment. Every key has a default, so an empty file is valid.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use jost_core::contour::{DomainPolicy, ThetaPolicy};
use jost_core::{Complex64, JostSolver, Model, RadialPotential, UnitSystem};

/// The configuration shipped with the binary: the quantum-dot model and the
/// search windows that cover its S-wave spectrum.
pub const DEFAULT_CONFIG: &str = include_str!("../config/default.conf");

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Float,
    Int,
    Bool,
    Complex,
    Theta,
    Text,
    IntList,
    Choice(&'static [&'static str]),
}

struct KeySpec {
    section: &'static str,
    key: &'static str,
    default: &'static str,
    kind: Kind,
}

const fn key(
    section: &'static str,
    key: &'static str,
    default: &'static str,
    kind: Kind,
) -> KeySpec {
    KeySpec {
        section,
        key,
        default,
        kind,
    }
}

const SCHEMA: &[KeySpec] = &[
    key("model", "potential", "dot", Kind::Choice(&["dot", "zero"])),
    key("model", "v0", "25", Kind::Float),
    key("model", "r0", "2", Kind::Float),
    key("model", "range", "2", Kind::Float),
    key(
        "model",
        "units",
        "donor",
        Kind::Choice(&["donor", "natural"]),
    ),
    key("model", "c2mu", "2", Kind::Float),
    key("solver", "ell", "0", Kind::Int),
    key("solver", "theta", "auto", Kind::Theta),
    key("solver", "r_max", "70", Kind::Float),
    key("solver", "tol", "1e-10", Kind::Float),
    key("solver", "strict_domain", "false", Kind::Bool),
    key("spectrum", "bound_min", "-50", Kind::Float),
    key("spectrum", "bound_max", "-0.01", Kind::Float),
    key("spectrum", "res_re_min", "0", Kind::Float),
    key("spectrum", "res_re_max", "10", Kind::Float),
    key("spectrum", "res_im_min", "-22", Kind::Float),
    key("spectrum", "res_im_max", "0", Kind::Float),
    key("spectrum", "re_step", "0.25", Kind::Float),
    key("spectrum", "im_step", "0.5", Kind::Float),
    key("expand", "e0", "7", Kind::Complex),
    key("expand", "order", "4", Kind::Int),
    key("eval", "energy", "7", Kind::Complex),
    key(
        "eval",
        "sheet",
        "physical",
        Kind::Choice(&["physical", "resonance"]),
    ),
    key(
        "eval",
        "source",
        "direct",
        Kind::Choice(&["direct", "factorized", "expansion"]),
    ),
    key("eval", "expansion_file", "", Kind::Text),
    key("xsection", "e_min", "0.1", Kind::Float),
    key("xsection", "e_max", "10", Kind::Float),
    key("xsection", "e_step", "0.1", Kind::Float),
    key("xsection", "ells", "0", Kind::IntList),
    key("xsection", "expansion_file", "", Kind::Text),
    key("phaseshift", "e_min", "1e-6", Kind::Float),
    key("phaseshift", "e_max", "10", Kind::Float),
    key("phaseshift", "step", "0.05", Kind::Float),
    key("phaseshift", "refine", "true", Kind::Bool),
    key("phaseshift", "bound_count", "3", Kind::Int),
    key("phaseshift", "levinson_tol", "0.05", Kind::Float),
    key("effrange", "order", "2", Kind::Int),
    key("fit", "data_file", "", Kind::Text),
    key(
        "fit",
        "observable",
        "cross-section",
        Kind::Choice(&["cross-section", "phase-shift"]),
    ),
    key("fit", "e0", "1", Kind::Float),
    key("fit", "order", "2", Kind::Int),
    key("output", "path", "-", Kind::Text),
];

/// A bad config entry; `line` is 1-based and absent for overrides and
/// cross-key checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "config line {n}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn lookup(section: &str, key: &str) -> Option<&'static KeySpec> {
    SCHEMA.iter().find(|s| s.section == section && s.key == key)
}

/// Checks `raw` against `kind` and returns its canonical spelling.
fn canonical(kind: Kind, raw: &str) -> Result<String, String> {
    let raw = raw.trim();
    match kind {
        Kind::Float => raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(|v| format!("{v:?}"))
            .ok_or_else(|| format!("expected a finite number, got '{raw}'")),
        Kind::Int => raw
            .parse::<u32>()
            .map(|v| v.to_string())
            .map_err(|_| format!("expected a non-negative integer, got '{raw}'")),
        Kind::Bool => match raw {
            "true" | "yes" | "1" => Ok("true".into()),
            "false" | "no" | "0" => Ok("false".into()),
            _ => Err(format!("expected true or false, got '{raw}'")),
        },
        Kind::Complex => Complex64::from_str(&raw.replace(' ', ""))
            .ok()
            .filter(|z| z.re.is_finite() && z.im.is_finite())
            .map(|z| z.to_string())
            .ok_or_else(|| format!("expected a complex number such as 7.55-1.06i, got '{raw}'")),
        Kind::Theta => match raw {
            "auto" | "real" | "zero-im-kr" => Ok(raw.into()),
            _ => raw
                .parse::<f64>()
                .ok()
                .filter(|t| t.abs() < std::f64::consts::FRAC_PI_2)
                .map(|t| t.to_string())
                .ok_or_else(|| {
                    format!("expected auto, real, zero-im-kr or an angle below pi/2 in radians, got '{raw}'")
                }),
        },
        Kind::Text => Ok(raw.into()),
        Kind::IntList => {
            let items: Result<Vec<u32>, _> = raw.split(',').map(|s| s.trim().parse::<u32>()).collect();
            match items {
                Ok(v) if !v.is_empty() => Ok(v.iter().map(u32::to_string).collect::<Vec<_>>().join(",")),
                _ => Err(format!("expected a comma-separated list of integers, got '{raw}'")),
            }
        }
        Kind::Choice(options) => {
            if options.contains(&raw) {
                Ok(raw.into())
            } else {
                Err(format!("expected one of {}, got '{raw}'", options.join(", ")))
            }
        }
    }
}

/// Validated settings of one run, keyed by `(section, key)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<(&'static str, &'static str), String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            values: SCHEMA
                .iter()
                .map(|s| {
                    (
                        (s.section, s.key),
                        canonical(s.kind, s.default).expect("valid schema default"),
                    )
                })
                .collect(),
        }
    }
}

impl RunConfig {
    /// Parses a config file on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let err = |message: String| ConfigError {
                line: Some(n),
                message,
            };
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("unterminated section header '{line}'")))?
                    .trim();
                if !SCHEMA.iter().any(|s| s.section == name) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim();
            let sec = section
                .as_deref()
                .ok_or_else(|| err(format!("key '{key}' appears before any [section]")))?;
            cfg.set_in(sec, key, value).map_err(err)?;
        }
        Ok(cfg)
    }

    fn set_in(&mut self, section: &str, key: &str, value: &str) -> Result<(), String> {
        let entry =
            lookup(section, key).ok_or_else(|| format!("unknown key '{key}' in [{section}]"))?;
        let v = canonical(entry.kind, value)
            .map_err(|m| format!("bad value for '{key}' in [{section}]: {m}"))?;
        self.values.insert((entry.section, entry.key), v);
        Ok(())
    }

    /// Applies `section.key=value`.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let err = |message: String| ConfigError {
            line: None,
            message,
        };
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| err(format!("expected section.key=value, got '{assignment}'")))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| err(format!("expected section.key=value, got '{assignment}'")))?;
        self.set_in(section, key, value).map_err(err)
    }

    /// Canonical text form; parsing it gives back an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for s in SCHEMA {
            if s.section != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("[{}]\n", s.section));
                current = s.section;
            }
            out.push_str(&format!(
                "{} = {}\n",
                s.key,
                self.values[&(s.section, s.key)]
            ));
        }
        out
    }

    fn raw(&self, section: &'static str, key: &'static str) -> &str {
        self.values
            .get(&(section, key))
            .map(String::as_str)
            .unwrap_or_else(|| panic!("{section}.{key} is not in the schema"))
    }

    // Values are validated on the way in, so these parses cannot fail.
    pub fn float(&self, section: &'static str, key: &'static str) -> f64 {
        self.raw(section, key).parse().expect("validated float")
    }

    pub fn int(&self, section: &'static str, key: &'static str) -> u32 {
        self.raw(section, key).parse().expect("validated integer")
    }

    pub fn flag(&self, section: &'static str, key: &'static str) -> bool {
        self.raw(section, key) == "true"
    }

    pub fn complex(&self, section: &'static str, key: &'static str) -> Complex64 {
        Complex64::from_str(self.raw(section, key)).expect("validated complex")
    }

    pub fn text(&self, section: &'static str, key: &'static str) -> &str {
        self.raw(section, key)
    }

    pub fn int_list(&self, section: &'static str, key: &'static str) -> Vec<u32> {
        self.raw(section, key)
            .split(',')
            .map(|s| s.parse().expect("validated integer list"))
            .collect()
    }

    pub fn theta_policy(&self) -> Option<ThetaPolicy> {
        match self.raw("solver", "theta") {
            "auto" => None,
            "real" => Some(ThetaPolicy::RealAxis),
            "zero-im-kr" => Some(ThetaPolicy::ZeroImKr),
            t => Some(ThetaPolicy::Fixed(t.parse().expect("validated angle"))),
        }
    }

    pub fn model(&self) -> Result<Model, ConfigError> {
        let units = match self.raw("model", "units") {
            "donor" => UnitSystem::DONOR,
            _ => {
                let c2mu = self.float("model", "c2mu");
                if !(c2mu > 0.0) {
                    return Err(ConfigError {
                        line: None,
                        message: "model.c2mu must be positive".into(),
                    });
                }
                UnitSystem::natural(c2mu)
            }
        };
        let potential = match self.raw("model", "potential") {
            "zero" => RadialPotential::Zero,
            _ => RadialPotential::dot_model(
                self.float("model", "v0"),
                self.float("model", "r0"),
                self.float("model", "range"),
            )
            .map_err(|e| ConfigError {
                line: None,
                message: e.to_string(),
            })?,
        };
        Ok(Model::new(potential, units))
    }

    pub fn solver(&self) -> Result<JostSolver, ConfigError> {
        let tol = self.float("solver", "tol");
        let r_max = self.float("solver", "r_max");
        if !(tol > 0.0 && tol < 1e-2) {
            return Err(ConfigError {
                line: None,
                message: format!("solver.tol must lie in (0, 1e-2), got {tol}"),
            });
        }
        if !(r_max > 1.0) {
            return Err(ConfigError {
                line: None,
                message: format!("solver.r_max must exceed 1, got {r_max}"),
            });
        }
        let mut solver = JostSolver::new(self.model()?).with_tolerance(tol);
        solver.contour.r_max = r_max;
        solver.theta = self.theta_policy();
        solver.domain = if self.flag("solver", "strict_domain") {
            DomainPolicy::Strict
        } else {
            DomainPolicy::Warn
        };
        Ok(solver)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_default_parses_and_round_trips() {
        let cfg = RunConfig::parse(DEFAULT_CONFIG).unwrap();
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn values_are_canonicalized() {
        let cfg = RunConfig::parse("[expand]\ne0 = 7.55 - 1.06i\norder = 04\n").unwrap();
        assert_eq!(cfg.complex("expand", "e0"), Complex64::new(7.55, -1.06));
        assert_eq!(cfg.int("expand", "order"), 4);
        assert!(cfg.to_text().contains("e0 = 7.55-1.06i\n"));
    }

    #[test]
    fn errors_carry_line_numbers_and_key_names() {
        let e = RunConfig::parse("# comment\n[model]\nv0 = 25\nwidth = 3\n").unwrap_err();
        assert_eq!(e.line, Some(4));
        assert!(e.message.contains("'width'"), "{e}");
        let e = RunConfig::parse("[solver]\ntol = fast\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.message.contains("'tol'"), "{e}");
        let e = RunConfig::parse("v0 = 1\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        assert!(RunConfig::parse("[nowhere]\n")
            .unwrap_err()
            .message
            .contains("[nowhere]"));
        assert!(RunConfig::parse("[solver]\ntheta = 2\n").is_err());
    }

    #[test]
    fn overrides_use_dotted_keys() {
        let mut cfg = RunConfig::default();
        cfg.apply_override("solver.theta=0.3").unwrap();
        assert_eq!(cfg.theta_policy(), Some(ThetaPolicy::Fixed(0.3)));
        assert!(cfg.apply_override("solver.nope=1").is_err());
        assert!(cfg.apply_override("theta=1").is_err());
    }

    #[test]
    fn float_round_trip_is_exact() {
        let mut cfg = RunConfig::default();
        cfg.apply_override("model.c2mu=1.8814440591623736").unwrap();
        let back = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back.float("model", "c2mu"), 1.8814440591623736);
    }
}
