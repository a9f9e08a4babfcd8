//! JSON-lines request log.

use std::io::Write;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRecord {
    pub timestamp_ms: u128,
    pub endpoint: &'static str,
    pub status: u16,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    pub elapsed_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl LogRecord {
    pub fn new(endpoint: &'static str, status: u16, elapsed_ms: f64) -> Self {
        LogRecord {
            timestamp_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_millis()),
            endpoint,
            status,
            text_length: None,
            label: None,
            method: None,
            elapsed_ms,
            text: None,
        }
    }
}

pub struct RequestLog {
    sink: Mutex<Box<dyn Write + Send>>,
}

impl RequestLog {
    pub fn new(sink: Box<dyn Write + Send>) -> Self {
        RequestLog {
            sink: Mutex::new(sink),
        }
    }

    pub fn stderr() -> Self {
        Self::new(Box::new(std::io::stderr()))
    }

    pub fn discard() -> Self {
        Self::new(Box::new(std::io::sink()))
    }

    pub fn write(&self, record: &LogRecord) {
        let line = serde_json::to_string(record).expect("log record serializes");
        if let Ok(mut sink) = self.sink.lock() {
            // logging must never fail a request
            let _ = writeln!(sink, "{line}");
            let _ = sink.flush();
        }
    }
}
