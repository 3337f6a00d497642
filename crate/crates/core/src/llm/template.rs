//! Prompt templates with named `{placeholder}` slots.
//!
//! `{{` and `}}` produce literal braces. Only the names in [`PLACEHOLDERS`]
//! may appear in a template; anything else is rejected when it is loaded.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::agent::ToMOrder;

pub const PLACEHOLDERS: [&str; 9] = [
    "rule",
    "conversion_rule",
    "observation",
    "history",
    "pattern",
    "my_pattern",
    "reflexion",
    "valid_actions",
    "belief",
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template {template}: unknown placeholder {{{name}}}")]
    UnknownPlaceholder { template: String, name: String },
    #[error("template {template}: no binding for placeholder {{{name}}}")]
    MissingBinding { template: String, name: String },
    #[error("template {template}: unbalanced brace at byte {offset}")]
    Unbalanced { template: String, offset: usize },
    #[error("cannot read template {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    id: String,
    pieces: Vec<Piece>,
}

impl Template {
    pub fn new(id: impl Into<String>, text: &str) -> Result<Template, TemplateError> {
        let id = id.into();
        let mut pieces = Vec::new();
        let mut text_buf = String::new();
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < text.len() {
            let c = bytes[i];
            if c == b'{' && bytes.get(i + 1) == Some(&b'{') {
                text_buf.push('{');
                i += 2;
            } else if c == b'}' && bytes.get(i + 1) == Some(&b'}') {
                text_buf.push('}');
                i += 2;
            } else if c == b'{' {
                let end = text[i..].find('}').map(|e| i + e).ok_or_else(|| TemplateError::Unbalanced {
                    template: id.clone(),
                    offset: i,
                })?;
                let name = &text[i + 1..end];
                if !PLACEHOLDERS.contains(&name) {
                    return Err(TemplateError::UnknownPlaceholder {
                        template: id,
                        name: name.to_owned(),
                    });
                }
                if !text_buf.is_empty() {
                    pieces.push(Piece::Text(std::mem::take(&mut text_buf)));
                }
                pieces.push(Piece::Slot(name.to_owned()));
                i = end + 1;
            } else if c == b'}' {
                return Err(TemplateError::Unbalanced { template: id, offset: i });
            } else {
                let ch = text[i..].chars().next().expect("in bounds");
                text_buf.push(ch);
                i += ch.len_utf8();
            }
        }
        if !text_buf.is_empty() {
            pieces.push(Piece::Text(text_buf));
        }
        Ok(Template { id, pieces })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn placeholders(&self) -> impl Iterator<Item = &str> {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Slot(s) => Some(s.as_str()),
            Piece::Text(_) => None,
        })
    }
}

/// Substitutes every placeholder. Extra bindings are ignored.
pub fn render_template(template: &Template, bindings: &BTreeMap<String, String>) -> Result<String, TemplateError> {
    let mut out = String::new();
    for p in &template.pieces {
        match p {
            Piece::Text(t) => out.push_str(t),
            Piece::Slot(name) => out.push_str(bindings.get(name).ok_or_else(|| TemplateError::MissingBinding {
                template: template.id.clone(),
                name: name.clone(),
            })?),
        }
    }
    Ok(out)
}

/// Every prompt the agent uses: one observation template plus one analysis
/// and one planning template per ToM order.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    pub observation: Template,
    pub analysis: [Template; 3],
    pub plan: [Template; 3],
}

const EMBEDDED: [(&str, &str); 7] = [
    ("observation", include_str!("../../templates/observation.txt")),
    ("analysis_zero", include_str!("../../templates/analysis_zero.txt")),
    ("analysis_first", include_str!("../../templates/analysis_first.txt")),
    ("analysis_second", include_str!("../../templates/analysis_second.txt")),
    ("plan_zero", include_str!("../../templates/plan_zero.txt")),
    ("plan_first", include_str!("../../templates/plan_first.txt")),
    ("plan_second", include_str!("../../templates/plan_second.txt")),
];

impl TemplateSet {
    /// The built-in templates.
    pub fn embedded() -> TemplateSet {
        TemplateSet::build(|_, text| Ok(text.to_owned())).expect("embedded templates are valid")
    }

    /// Built-in templates, replaced by `<dir>/<id>.txt` where such a file exists.
    pub fn load_dir(dir: &Path) -> Result<TemplateSet, TemplateError> {
        TemplateSet::build(|id, text| {
            let path = dir.join(format!("{id}.txt"));
            if path.exists() {
                std::fs::read_to_string(&path).map_err(|e| TemplateError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })
            } else {
                Ok(text.to_owned())
            }
        })
    }

    fn build(source: impl Fn(&str, &str) -> Result<String, TemplateError>) -> Result<TemplateSet, TemplateError> {
        let mut t = Vec::with_capacity(EMBEDDED.len());
        for (id, text) in EMBEDDED {
            t.push(Template::new(id, &source(id, text)?)?);
        }
        let mut it = t.into_iter();
        let mut next = || it.next().expect("seven templates");
        Ok(TemplateSet {
            observation: next(),
            analysis: [next(), next(), next()],
            plan: [next(), next(), next()],
        })
    }

    pub fn analysis(&self, order: ToMOrder) -> &Template {
        &self.analysis[order.index()]
    }

    pub fn plan(&self, order: ToMOrder) -> &Template {
        &self.plan[order.index()]
    }
}
