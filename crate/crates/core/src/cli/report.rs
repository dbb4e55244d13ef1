use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Machine-readable result of one command. Field names are stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub model_hash: String,
    pub command: String,
    pub parameters: Map<String, Value>,
    pub results: Value,
    pub wall_time_ms: u64,
}

impl Report {
    pub fn new(command: &str, model_hash: String) -> Self {
        Report {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            model_hash,
            command: command.to_string(),
            parameters: Map::new(),
            results: Value::Null,
            wall_time_ms: 0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).expect("parameters serialize"));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }
}
