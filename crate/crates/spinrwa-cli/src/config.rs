//! Optional JSON config file: every field mirrors a flag and fills in when
//! that flag is omitted (flags > file > built-in defaults).

use std::path::Path;

use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub spin: Option<f64>,
    #[serde(rename = "Q")]
    pub q: Option<f64>,
    #[serde(rename = "B0")]
    pub b0: Option<f64>,
    #[serde(rename = "B1")]
    pub b1: Option<f64>,
    pub omega: Option<f64>,
    pub t_max_pi: Option<f64>,
    pub samples: Option<usize>,
    pub initial: Option<String>,
    pub methods: Option<String>,
    pub m_target: Option<f64>,
    pub vary: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
    pub window: Option<f64>,
    pub metric: Option<String>,
    pub parallel: Option<usize>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig, String> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_fields_and_rejects_unknown() {
        let cfg: FileConfig =
            serde_json::from_str(r#"{"spin": 3, "Q": 1.0, "B1": 0.5, "vary": "omega"}"#).unwrap();
        assert_eq!(cfg.spin, Some(3.0));
        assert_eq!(cfg.q, Some(1.0));
        assert_eq!(cfg.b1, Some(0.5));
        assert_eq!(cfg.vary.as_deref(), Some("omega"));
        assert_eq!(cfg.b0, None);

        let bad = serde_json::from_str::<FileConfig>(r#"{"spinn": 3}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn missing_path_is_empty_config() {
        let cfg = load(None).unwrap();
        assert!(cfg.spin.is_none());
    }
}
