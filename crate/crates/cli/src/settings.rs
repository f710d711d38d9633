use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// Every key accepted in a config file or as a `--key value` flag.
pub const KNOWN_KEYS: &[&str] = &[
    "m", "T", "hbar", "L", "F", "D", "F_alt", "D_alt", "sigma_x", "r", "x0", "p0", "nx", "np", "xmin", "xmax", "pmin", "pmax",
    "steps", "mode", "state", "family", "scenario", "dP", "dE", "seed", "eps", "t", "coupling", "kappa",
];

/// Failure reported as a single machine-parsable line.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: &'static str,
    pub key: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, key: Option<&str>, message: impl Into<String>) -> Self {
        Self { code, key: key.map(str::to_owned), message: message.into() }
    }

    pub fn invalid(key: &str, message: impl Into<String>) -> Self {
        Self::new("invalid_parameter", Some(key), message)
    }

    pub fn missing(key: &str) -> Self {
        Self::new("missing_parameter", Some(key), format!("`{key}` is required"))
    }

    pub fn line(&self) -> String {
        let message = self.message.replace(['\n', '\r'], " ").replace('"', "'");
        match &self.key {
            Some(k) => format!("error code={} key={k} message=\"{message}\"", self.code),
            None => format!("error code={} message=\"{message}\"", self.code),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Merges a config file with flag overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

pub fn parse_config(text: &str) -> Result<Settings, CliError> {
    let mut values = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::new("config_syntax", None, format!("line {}: expected `key = value`", n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::new("unknown_key", Some(key), format!("line {}: unknown key `{key}`", n + 1)));
        }
        if value.is_empty() {
            return Err(CliError::invalid(key, format!("line {}: empty value", n + 1)));
        }
        values.insert(key.to_owned(), value.to_owned());
    }
    Ok(Settings { values })
}

impl Settings {
    pub fn load(config: Option<&Path>, overrides: &[(&'static str, Option<&str>)]) -> Result<Self, CliError> {
        let mut settings = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::new("io", Some("config"), format!("cannot read {}: {e}", path.display())))?;
                parse_config(&text)?
            }
            None => Settings::default(),
        };
        for (key, value) in overrides {
            if let Some(v) = value {
                settings.values.insert((*key).to_owned(), (*v).to_owned());
            }
        }
        Ok(settings)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.str(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::invalid(key, format!("`{v}` is not a finite number")))
            })
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.str(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| CliError::invalid(key, format!("`{v}` is not a positive integer"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.str(key) {
            None => Ok(default),
            Some(v) => v.parse::<u64>().map_err(|_| CliError::invalid(key, format!("`{v}` is not a non-negative integer"))),
        }
    }

    /// Comma-separated numbers.
    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.str(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    let s = s.trim();
                    s.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| CliError::invalid(key, format!("`{s}` is not a finite number")))
                })
                .collect(),
        }
    }

    pub fn choice<'a>(&self, key: &str, options: &[&'a str]) -> Result<&'a str, CliError> {
        match self.str(key) {
            None => Ok(options[0]),
            Some(v) => options
                .iter()
                .find(|o| **o == v)
                .copied()
                .ok_or_else(|| CliError::invalid(key, format!("`{v}` is not one of {}", options.join("|")))),
        }
    }

    /// `(m, T, ħ)`: all three given, or none given for natural units.
    pub fn units(&self) -> Result<(f64, f64, f64), CliError> {
        let keys = ["m", "T", "hbar"];
        if keys.iter().all(|k| !self.has(k)) {
            return Ok((1.0, 1.0, 1.0));
        }
        if let Some(k) = keys.iter().find(|k| !self.has(k)) {
            return Err(CliError::new(
                "missing_parameter",
                Some(k),
                format!("`{k}` is required when any of m, T, hbar is given"),
            ));
        }
        Ok((self.f64("m")?.unwrap(), self.f64("T")?.unwrap(), self.f64("hbar")?.unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let s = parse_config("# header\n\nm = 2   # kg\nT=3\n hbar =0.5\n").unwrap();
        assert_eq!(s.units().unwrap(), (2.0, 3.0, 0.5));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert_eq!(parse_config("mass = 1").unwrap_err().key.as_deref(), Some("mass"));
        assert_eq!(parse_config("m 1").unwrap_err().code, "config_syntax");
        assert_eq!(parse_config("m =").unwrap_err().key.as_deref(), Some("m"));
    }

    #[test]
    fn units_default_or_complete() {
        assert_eq!(Settings::default().units().unwrap(), (1.0, 1.0, 1.0));
        let partial = parse_config("T = 1\nhbar = 1").unwrap();
        assert_eq!(partial.units().unwrap_err().key.as_deref(), Some("m"));
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("qbm-settings-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "D = 0.5\nL = 3\n").unwrap();
        let s = Settings::load(Some(&path), &[("D", Some("0.25")), ("F", None)]).unwrap();
        assert_eq!(s.f64("D").unwrap(), Some(0.25));
        assert_eq!(s.f64("L").unwrap(), Some(3.0));
        assert_eq!(s.f64("F").unwrap(), None);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn typed_getters_name_the_key() {
        let s = parse_config("nx = -3\neps = 0.1, x\nmode = fast").unwrap();
        assert_eq!(s.usize_or("nx", 4).unwrap_err().key.as_deref(), Some("nx"));
        assert_eq!(s.list_or("eps", &[]).unwrap_err().key.as_deref(), Some("eps"));
        assert!(s.choice("mode", &["analytic", "grid"]).is_err());
    }

    #[test]
    fn error_line_is_single_line() {
        let e = CliError::invalid("m", "bad \"value\"\nsecond");
        assert_eq!(e.line(), "error code=invalid_parameter key=m message=\"bad 'value' second\"");
    }
}
