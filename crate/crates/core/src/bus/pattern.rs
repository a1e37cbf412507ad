use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Literal(String),
    Param(String),
}

/// `/`-separated path template, e.g. `/api/getMachine/{id}/getStatus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathPattern {
    raw: String,
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid path pattern `{pattern}`: {reason}")]
pub struct PatternError {
    pub pattern: String,
    pub reason: String,
}

pub(crate) fn split_path(path: &str) -> impl Iterator<Item = &str> {
    path.split('/').filter(|s| !s.is_empty())
}

impl PathPattern {
    pub fn parse(pattern: &str) -> Result<Self, PatternError> {
        let err = |reason: &str| PatternError {
            pattern: pattern.to_string(),
            reason: reason.to_string(),
        };
        if !pattern.starts_with('/') {
            return Err(err("must start with `/`"));
        }
        let mut segments = Vec::new();
        let mut names = Vec::new();
        for seg in split_path(pattern) {
            if let Some(inner) = seg.strip_prefix('{') {
                let name = inner.strip_suffix('}').ok_or_else(|| err("unterminated `{`"))?;
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(err("parameter names are alphanumeric"));
                }
                if names.contains(&name) {
                    return Err(err("repeated parameter name"));
                }
                names.push(name);
                segments.push(Segment::Param(name.to_string()));
            } else if seg.contains(['{', '}', '*', '?']) {
                return Err(err("literal segments may not contain `{`, `}`, `*` or `?`"));
            } else {
                segments.push(Segment::Literal(seg.to_string()));
            }
        }
        Ok(PathPattern {
            raw: pattern.to_string(),
            segments,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }

    /// Parameters bound by `path`, or `None` if it does not match.
    pub fn matches(&self, path: &str) -> Option<BTreeMap<String, String>> {
        let mut params = BTreeMap::new();
        let mut parts = split_path(path);
        for seg in &self.segments {
            let part = parts.next()?;
            match seg {
                Segment::Literal(l) if l == part => {}
                Segment::Literal(_) => return None,
                Segment::Param(name) => {
                    params.insert(name.clone(), part.to_string());
                }
            }
        }
        if parts.next().is_some() {
            return None;
        }
        Some(params)
    }

    /// True when some concrete path would match both patterns.
    pub fn overlaps(&self, other: &PathPattern) -> bool {
        self.segments.len() == other.segments.len()
            && self.segments.iter().zip(&other.segments).all(|pair| match pair {
                (Segment::Literal(a), Segment::Literal(b)) => a == b,
                _ => true,
            })
    }
}

impl fmt::Display for PathPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PathPattern {
        PathPattern::parse(s).unwrap()
    }

    #[test]
    fn binds_parameters() {
        let m = p("/api/getMachine/{id}/getStatus").matches("/api/getMachine/000X/getStatus").unwrap();
        assert_eq!(m["id"], "000X");
        assert!(p("/api/getMachine/{id}/getStatus").matches("/api/getMachine/000X").is_none());
        assert!(p("/api/getMachine/{id}/getStatus").matches("/api/getMachine/000X/getStatus/x").is_none());
    }

    #[test]
    fn overlap_rules() {
        assert!(p("/api/x/{a}").overlaps(&p("/api/x/{a}")));
        assert!(p("/api/x/{a}").overlaps(&p("/api/x/lit")));
        assert!(!p("/api/x/{a}").overlaps(&p("/api/x/{a}/{b}")));
        assert!(!p("/api/mwp/generate").overlaps(&p("/api/mwp/{id}/feasibility")));
        assert!(!p("/api/a/{x}").overlaps(&p("/api/b/{x}")));
    }

    #[test]
    fn rejects_bad_patterns() {
        for bad in ["api/x", "/api/{", "/api/{}", "/api/x*", "/api/{a}/{a}"] {
            assert!(PathPattern::parse(bad).is_err(), "{bad}");
        }
    }
}
