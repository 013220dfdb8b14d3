//! Minimal `[section]` / `key = value` text format shared by config and
//! scene files. `#` starts a comment; keys are case-sensitive.

use crate::error::{Result, SalsaError};

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    /// 1-based line of the header, or 0 for the implicit leading section.
    pub line: usize,
    pub entries: Vec<(String, String, usize)>,
}

impl Section {
    /// Last value for `key` with its line number.
    pub fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, l)| (v.as_str(), *l))
    }
}

/// Split text into sections. Entries before the first header land in a
/// section with an empty name, which is dropped when it has no entries.
pub fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections = vec![Section {
        name: String::new(),
        line: 0,
        entries: Vec::new(),
    }];
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| SalsaError::Parse {
                line: line_no,
                message: format!("unterminated section header '{line}'"),
            })?;
            sections.push(Section {
                name: name.trim().to_string(),
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| SalsaError::Parse {
            line: line_no,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(SalsaError::Parse {
                line: line_no,
                message: "empty key".into(),
            });
        }
        sections
            .last_mut()
            .expect("at least one section")
            .entries
            .push((key.to_string(), value.trim().to_string(), line_no));
    }
    if sections[0].entries.is_empty() {
        sections.remove(0);
    }
    Ok(sections)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let s = parse_sections("# header\na = 1\n[x]\nb = two  # trailing\n\n[y]\n").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].get("a"), Some(("1", 2)));
        assert_eq!(s[1].name, "x");
        assert_eq!(s[1].get("b"), Some(("two", 4)));
        assert!(s[2].entries.is_empty());
    }

    #[test]
    fn malformed_lines_report_position() {
        assert!(matches!(
            parse_sections("[x]\nnonsense\n"),
            Err(SalsaError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_sections("[x\n"),
            Err(SalsaError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_sections(" = 3\n"),
            Err(SalsaError::Parse { line: 1, .. })
        ));
    }
}
