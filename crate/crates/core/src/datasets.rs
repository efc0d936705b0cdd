//! Manifests, class counts and stratified splits.
//!
//! Two manifest layouts are accepted:
//!
//! - `path,label` rows (optionally preceded by a `path,label` header); class
//!   names are the distinct labels in sorted order.
//! - one-hot rows under a header `image,CLASS_A,CLASS_B,...` where each row
//!   carries exactly one `1` indicator.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::format::{fields, skip_line};
use crate::loss::ClassStats;
use crate::rng::{stream, SPLIT};
use crate::scalar::round_half_up;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ManifestLayout {
    PathLabel { header: bool },
    OneHot { id_column: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    /// Image path (relative to the manifest) or sample id.
    pub id: String,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub layout: ManifestLayout,
    pub class_names: Vec<String>,
    pub entries: Vec<Entry>,
    /// Directory relative paths resolve against.
    pub base_dir: Option<PathBuf>,
}

impl Manifest {
    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.label).collect()
    }

    /// Location of an entry's image. Ids without an extension (as in
    /// challenge ground-truth files) fall back to `.jpg`, `.png`, `.jpeg`.
    pub fn resolve(&self, entry: &Entry) -> PathBuf {
        let base = self.base_dir.clone().unwrap_or_default();
        let direct = base.join(&entry.id);
        if direct.exists() || Path::new(&entry.id).extension().is_some() {
            return direct;
        }
        for ext in ["jpg", "png", "jpeg"] {
            let p = base.join(format!("{}.{ext}", entry.id));
            if p.exists() {
                return p;
            }
        }
        direct
    }

    /// Same classes and layout, a subset of the entries.
    fn with_entries(&self, entries: Vec<Entry>) -> Manifest {
        Manifest {
            layout: self.layout.clone(),
            class_names: self.class_names.clone(),
            entries,
            base_dir: self.base_dir.clone(),
        }
    }
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut m = parse_manifest(&text).map_err(|e| e.with_path(path))?;
    m.base_dir = Some(path.parent().map(Path::to_path_buf).unwrap_or_default());
    Ok(m)
}

fn is_path_label_header(f: &[&str]) -> bool {
    let a = f[0].to_ascii_lowercase();
    let b = f[1].to_ascii_lowercase();
    matches!(a.as_str(), "path" | "image" | "id" | "sample_id") && matches!(b.as_str(), "label" | "class")
}

pub fn parse_manifest(text: &str) -> Result<Manifest> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !skip_line(l))
        .collect();
    let Some(&(first_no, first)) = lines.first() else {
        return Err(Error::parse(1, "manifest is empty"));
    };
    let head = fields(first);
    match head.len() {
        0 | 1 => Err(Error::parse(first_no, "expected at least two columns")),
        2 => parse_path_label(&lines),
        _ => parse_one_hot(&head, &lines[1..]),
    }
}

fn parse_path_label(lines: &[(usize, &str)]) -> Result<Manifest> {
    let header = is_path_label_header(&fields(lines[0].1));
    let body = if header { &lines[1..] } else { lines };
    let mut raw = Vec::with_capacity(body.len());
    for &(no, line) in body {
        let f = fields(line);
        if f.len() != 2 {
            return Err(Error::parse(no, format!("expected path,label but found {} fields", f.len())));
        }
        if f[0].is_empty() || f[1].is_empty() {
            return Err(Error::parse(no, "empty path or label"));
        }
        raw.push((f[0].to_string(), f[1].to_string()));
    }
    let mut class_names: Vec<String> = raw.iter().map(|(_, l)| l.clone()).collect();
    class_names.sort();
    class_names.dedup();
    let entries = raw
        .into_iter()
        .map(|(id, l)| Entry {
            label: class_names.binary_search(&l).expect("label collected above"),
            id,
        })
        .collect();
    Ok(Manifest {
        layout: ManifestLayout::PathLabel { header },
        class_names,
        entries,
        base_dir: None,
    })
}

fn parse_one_hot(head: &[&str], body: &[(usize, &str)]) -> Result<Manifest> {
    let class_names: Vec<String> = head[1..].iter().map(|s| s.to_string()).collect();
    let mut seen = class_names.clone();
    seen.sort();
    seen.dedup();
    if seen.len() != class_names.len() || class_names.iter().any(String::is_empty) {
        return Err(Error::parse(1, "class names in the header must be unique and non-empty"));
    }
    let mut entries = Vec::with_capacity(body.len());
    for &(no, line) in body {
        let f = fields(line);
        if f.len() != head.len() {
            return Err(Error::parse(no, format!("expected {} fields, found {}", head.len(), f.len())));
        }
        let mut label = None;
        for (k, v) in f[1..].iter().enumerate() {
            let x: f64 = v
                .parse()
                .map_err(|_| Error::parse(no, format!("indicator {v:?} is not a number")))?;
            if x == 1.0 {
                if label.is_some() {
                    return Err(Error::parse(no, "multi-hot row: more than one class indicator set"));
                }
                label = Some(k);
            } else if x != 0.0 {
                return Err(Error::parse(no, format!("indicator {v:?} is neither 0 nor 1")));
            }
        }
        let label = label.ok_or_else(|| Error::parse(no, "row has no class indicator set"))?;
        entries.push(Entry {
            id: f[0].to_string(),
            label,
        });
    }
    Ok(Manifest {
        layout: ManifestLayout::OneHot {
            id_column: head[0].to_string(),
        },
        class_names,
        entries,
        base_dir: None,
    })
}

/// Serializes in the manifest's own layout.
pub fn write_manifest(m: &Manifest) -> String {
    let mut out = String::new();
    match &m.layout {
        ManifestLayout::PathLabel { header } => {
            if *header {
                out.push_str("path,label\n");
            }
            for e in &m.entries {
                out.push_str(&format!("{},{}\n", e.id, m.class_names[e.label]));
            }
        }
        ManifestLayout::OneHot { id_column } => {
            out.push_str(id_column);
            for c in &m.class_names {
                out.push(',');
                out.push_str(c);
            }
            out.push('\n');
            for e in &m.entries {
                out.push_str(&e.id);
                for k in 0..m.class_names.len() {
                    out.push_str(if k == e.label { ",1.0" } else { ",0.0" });
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Per-class counts in `class_names` order.
pub fn class_stats(m: &Manifest) -> Result<ClassStats> {
    if m.is_empty() {
        return Err(Error::param("manifest has no entries"));
    }
    ClassStats::from_labels(&m.labels(), m.num_classes())
}

/// Per-class shuffled split of sample indices: `round(N_i * fraction)`
/// (half up, at least 1, at most `N_i - 1`) go to the first side.
pub fn stratified_indices(
    labels: &[usize],
    num_classes: usize,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::param(format!("split fraction {fraction} outside (0, 1)")));
    }
    let mut by_class = vec![Vec::new(); num_classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class
            .get_mut(y)
            .ok_or_else(|| Error::param(format!("label {y} outside 0..{num_classes}")))?
            .push(i);
    }
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (class, mut idx) in by_class.into_iter().enumerate() {
        let n = idx.len();
        if n < 2 {
            return Err(Error::UndefinedClass {
                class,
                msg: format!("{n} samples; a stratified split needs at least 2"),
            });
        }
        idx.shuffle(&mut stream(seed, SPLIT, &[class as u64]));
        let k = (round_half_up(n as f64 * fraction) as usize).clamp(1, n - 1);
        first.extend_from_slice(&idx[..k]);
        second.extend_from_slice(&idx[k..]);
    }
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

/// Splits into `(train, val)` with `fraction` of each class in train.
pub fn stratified_split(m: &Manifest, fraction: f64, seed: u64) -> Result<(Manifest, Manifest)> {
    let (a, b) = stratified_indices(&m.labels(), m.num_classes(), fraction, seed).map_err(|e| match e {
        Error::UndefinedClass { class, msg } => Error::UndefinedClass {
            class,
            msg: format!("{} ({msg})", m.class_names[class]),
        },
        other => other,
    })?;
    let pick = |ix: Vec<usize>| m.with_entries(ix.into_iter().map(|i| m.entries[i].clone()).collect());
    Ok((pick(a), pick(b)))
}
