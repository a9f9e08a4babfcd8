use std::net::SocketAddr;
use std::path::PathBuf;

use thiserror::Error;

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const DEFAULT_BUDGET: usize = 4096;

#[derive(Debug, Error)]
#[error("invalid value {value:?} for {key}: {reason}")]
pub struct ConfigError {
    pub key: &'static str,
    pub value: String,
    pub reason: String,
}

/// Which browser origins may call the service.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorsPolicy {
    Any,
    /// Exact origins, or prefixes ending in `*` such as `chrome-extension://*`.
    Origins(Vec<String>),
}

impl CorsPolicy {
    /// `*` or a comma-separated list.
    pub fn parse(spec: &str) -> Self {
        let items: Vec<String> = spec
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if items.is_empty() || items.iter().any(|s| s == "*") {
            CorsPolicy::Any
        } else {
            CorsPolicy::Origins(items)
        }
    }

    pub fn allows(&self, origin: &str) -> bool {
        match self {
            CorsPolicy::Any => true,
            CorsPolicy::Origins(list) => list.iter().any(|p| match p.strip_suffix('*') {
                Some(prefix) => origin.starts_with(prefix),
                None => origin == p,
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub model_path: Option<PathBuf>,
    pub bind_addr: SocketAddr,
    pub explain_budget: usize,
    pub seed: u64,
    pub cors: CorsPolicy,
    /// Include raw request text in the request log.
    pub log_text: bool,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            model_path: None,
            bind_addr: DEFAULT_BIND.parse().unwrap(),
            explain_budget: DEFAULT_BUDGET,
            seed: 0,
            cors: CorsPolicy::Any,
            log_text: false,
        }
    }
}

impl ServiceConfig {
    /// Read `MODEL_PATH`, `BIND_ADDR`, `EXPLAIN_BUDGET`, `SEED`, `CORS_ORIGINS`
    /// and `LOG_TEXT` through `lookup`, falling back to defaults.
    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let mut cfg = ServiceConfig::default();
        if let Some(p) = lookup("MODEL_PATH").filter(|s| !s.is_empty()) {
            cfg.model_path = Some(PathBuf::from(p));
        }
        if let Some(v) = lookup("BIND_ADDR") {
            cfg.bind_addr = parse("BIND_ADDR", &v)?;
        }
        if let Some(v) = lookup("EXPLAIN_BUDGET") {
            cfg.explain_budget = parse("EXPLAIN_BUDGET", &v)?;
        }
        if let Some(v) = lookup("SEED") {
            cfg.seed = parse("SEED", &v)?;
        }
        if let Some(v) = lookup("CORS_ORIGINS") {
            cfg.cors = CorsPolicy::parse(&v);
        }
        if let Some(v) = lookup("LOG_TEXT") {
            cfg.log_text = matches!(v.trim(), "1" | "true" | "yes");
        }
        Ok(cfg)
    }

    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }
}

fn parse<T: std::str::FromStr>(key: &'static str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError {
        key,
        value: value.to_string(),
        reason: e.to_string(),
    })
}
