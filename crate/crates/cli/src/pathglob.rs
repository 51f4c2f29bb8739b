//! Minimal `*` glob expansion for the `--input` flag, for shells (or quoted
//! arguments) that hand the pattern through unexpanded. Wildcards are
//! supported in the file name component only; matches come back sorted so
//! downstream output is independent of directory iteration order.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

pub fn expand(pattern: &str) -> Result<Vec<PathBuf>> {
    if !pattern.contains('*') {
        return Ok(vec![PathBuf::from(pattern)]);
    }

    let path = Path::new(pattern);
    let file_pattern = path
        .file_name()
        .and_then(|n| n.to_str())
        .context("glob pattern has no file name component")?;
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    if parent.to_string_lossy().contains('*') {
        bail!("wildcards are only supported in the file name: `{pattern}`");
    }

    let mut matches: Vec<PathBuf> = std::fs::read_dir(&parent)
        .with_context(|| format!("reading directory {}", parent.display()))?
        .filter_map(|entry| entry.ok())
        .filter(|entry| {
            entry
                .file_name()
                .to_str()
                .is_some_and(|name| wildcard_match(file_pattern, name))
        })
        .map(|entry| entry.path())
        .collect();
    matches.sort();
    if matches.is_empty() {
        bail!("no files match `{pattern}`");
    }
    Ok(matches)
}

/// Literal match with `*` standing for any (possibly empty) substring.
fn wildcard_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let t: Vec<char> = text.chars().collect();
    let (mut pi, mut ti) = (0usize, 0usize);
    let mut star: Option<usize> = None;
    let mut mark = 0usize;
    while ti < t.len() {
        if pi < p.len() && p[pi] == t[ti] {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some(pi);
            mark = ti;
            pi += 1;
        } else if let Some(s) = star {
            pi = s + 1;
            mark += 1;
            ti = mark;
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_and_star_matching() {
        assert!(wildcard_match("a.csv", "a.csv"));
        assert!(wildcard_match("*.csv", "shard-00.csv"));
        assert!(wildcard_match("shard-*.csv", "shard-00.csv"));
        assert!(wildcard_match("*", "anything"));
        assert!(wildcard_match("a*b*c", "aXXbYYc"));
        assert!(!wildcard_match("*.csv", "shard-00.txt"));
        assert!(!wildcard_match("shard-*.csv", "other-00.csv"));
        assert!(!wildcard_match("a.csv", "ab.csv"));
    }

    #[test]
    fn expands_sorted_matches() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b.csv", "a.csv", "c.txt"] {
            std::fs::write(dir.path().join(name), "x").unwrap();
        }
        let pattern = format!("{}/*.csv", dir.path().display());
        let matched = expand(&pattern).unwrap();
        let names: Vec<_> = matched
            .iter()
            .map(|p| p.file_name().unwrap().to_str().unwrap().to_string())
            .collect();
        assert_eq!(names, ["a.csv", "b.csv"]);
    }

    #[test]
    fn no_match_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let pattern = format!("{}/*.csv", dir.path().display());
        assert!(expand(&pattern).is_err());
    }

    #[test]
    fn plain_path_passes_through() {
        let matched = expand("just/a/path.csv").unwrap();
        assert_eq!(matched, vec![PathBuf::from("just/a/path.csv")]);
    }
}
