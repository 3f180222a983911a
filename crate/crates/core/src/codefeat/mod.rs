//! Type and package features.
//!
//! Java files are scanned for type references (imports, supertypes, declared
//! variable/parameter/return types, object creations, casts, catch clauses,
//! `instanceof`, generic arguments and qualified name usages). References are
//! bound to fully qualified names with an import-based heuristic that stands in
//! for partial program analysis:
//!
//! 1. a single-type import ending in `.S`;
//! 2. a type `S` declared in the file's own package somewhere in the release;
//! 3. the unique on-demand import `p.*` for which `p.S` is declared in the
//!    release or listed in the bundled JDK table (two or more is ambiguous);
//! 4. `java.lang.S` when listed in the bundled JDK table;
//! 5. otherwise the name stays unresolved.
//!
//! Qualified references bind to themselves. Nested types are represented by
//! their top-level type (`java.util.Map.Entry` counts as `java.util.Map`).

mod extract;
mod jdk;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::corpus::SourceFile;
use crate::error::{Error, Result};
use crate::java;
use crate::matrix::{FeatureKind, FeatureMatrix};

pub use extract::{parse_types, parse_types_text, Import, TypeRefs};
pub use jdk::JdkTable;

/// Declared top-level types of a release, keyed by simple name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReleaseIndex {
    by_simple: BTreeMap<String, BTreeSet<String>>,
}

impl ReleaseIndex {
    /// Indexes each file's top-level type declarations plus the type named by
    /// its qualified name. Default-package files are not indexed.
    pub fn build(files: &[SourceFile]) -> Self {
        let mut index = ReleaseIndex::default();
        for file in files {
            let pkg = file.package();
            if pkg.is_empty() {
                continue;
            }
            let tokens = java::tokenize(&file.text);
            let stem = file.qualified_name.rsplit('.').next().unwrap_or_default();
            let mut names = java::top_level_type_names(&tokens);
            names.push(stem.to_string());
            for name in names {
                index.insert(pkg, &name);
            }
        }
        index
    }

    pub fn insert(&mut self, package: &str, simple: &str) {
        self.by_simple
            .entry(simple.to_string())
            .or_default()
            .insert(format!("{package}.{simple}"));
    }

    pub fn contains(&self, qualified: &str) -> bool {
        qualified
            .rsplit_once('.')
            .and_then(|(_, simple)| self.by_simple.get(simple))
            .is_some_and(|set| set.contains(qualified))
    }

    pub fn candidates(&self, simple: &str) -> impl Iterator<Item = &String> {
        self.by_simple.get(simple).into_iter().flatten()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolveOptions {
    /// Whether a single-type import by itself marks the type as present.
    pub count_imports: bool,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions { count_imports: true }
    }
}

/// Resolution result for one file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileTypes {
    pub resolved: BTreeSet<String>,
    pub unresolved: BTreeSet<String>,
    pub warnings: Vec<String>,
}

impl FileTypes {
    /// Qualified names minus their final segment.
    pub fn packages(&self) -> BTreeSet<String> {
        self.resolved.iter().map(|t| package_of(t).to_string()).collect()
    }
}

pub fn package_of(qualified: &str) -> &str {
    qualified.rsplit_once('.').map(|(p, _)| p).unwrap_or("")
}

/// Binds every raw reference of one file to a qualified name where possible.
pub fn resolve(refs: &TypeRefs, index: &ReleaseIndex, jdk: &JdkTable, options: ResolveOptions) -> FileTypes {
    let mut out = FileTypes {
        warnings: refs.warnings.clone(),
        ..FileTypes::default()
    };
    let single: Vec<&Import> = refs.imports.iter().filter(|i| !i.on_demand && !i.is_static).collect();
    let wildcard: Vec<&str> = refs
        .imports
        .iter()
        .filter(|i| i.on_demand && !i.is_static)
        .map(|i| i.path.as_str())
        .collect();

    if options.count_imports {
        // static imports name the type whose members they pull in
        out.resolved.extend(refs.imports.iter().filter_map(Import::imported_type));
    }

    for q in &refs.qualified {
        out.resolved.insert(q.clone());
    }

    for simple in &refs.simple {
        // 1. explicit single-type import
        if let Some(import) = single.iter().find(|i| i.simple_name() == Some(simple.as_str())) {
            if let Some(t) = import.imported_type() {
                out.resolved.insert(t);
                continue;
            }
        }
        // 2. same package, declared in the release
        if let Some(pkg) = refs.package.as_deref() {
            let candidate = format!("{pkg}.{simple}");
            if index.contains(&candidate) {
                out.resolved.insert(candidate);
                continue;
            }
        }
        // 3. on-demand imports
        let candidates: BTreeSet<String> = wildcard
            .iter()
            .map(|pkg| format!("{pkg}.{simple}"))
            .filter(|q| index.contains(q) || jdk.contains_qualified(q))
            .collect();
        match candidates.len() {
            1 => {
                out.resolved.extend(candidates);
                continue;
            }
            0 => {}
            _ => {
                out.warnings.push(format!(
                    "WARN ambiguous_type {simple} {}",
                    candidates.into_iter().collect::<Vec<_>>().join(";")
                ));
                out.unresolved.insert(simple.clone());
                continue;
            }
        }
        // 4. implicit java.lang
        if jdk.contains("java.lang", simple) {
            out.resolved.insert(format!("java.lang.{simple}"));
            continue;
        }
        // 5.
        out.unresolved.insert(simple.clone());
    }
    out
}

/// Resolved types for every file of a release, in release order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeCatalog {
    pub files: Vec<String>,
    pub entries: Vec<FileTypes>,
}

impl TypeCatalog {
    /// Two-phase build: index every file's declarations, then resolve each file.
    pub fn build(files: &[SourceFile], options: ResolveOptions) -> Self {
        use rayon::prelude::*;
        let index = ReleaseIndex::build(files);
        let jdk = JdkTable::bundled();
        let entries = files
            .par_iter()
            .map(|f| resolve(&parse_types(f), &index, jdk, options))
            .collect();
        TypeCatalog {
            files: files.iter().map(|f| f.qualified_name.clone()).collect(),
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn warnings(&self) -> impl Iterator<Item = (&str, &str)> {
        self.files
            .iter()
            .zip(&self.entries)
            .flat_map(|(f, e)| e.warnings.iter().map(move |w| (f.as_str(), w.as_str())))
    }

    pub fn type_sets(&self) -> Vec<BTreeSet<String>> {
        self.entries.iter().map(|e| e.resolved.clone()).collect()
    }

    pub fn package_sets(&self) -> Vec<BTreeSet<String>> {
        self.entries.iter().map(FileTypes::packages).collect()
    }

    /// `file,resolved_types,packages` with `;`-joined lists.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::InvalidParameter(format!("csv write failed: {e}"));
        writer.write_record(["file", "resolved_types", "packages"]).map_err(err)?;
        for (file, entry) in self.files.iter().zip(&self.entries) {
            let types = entry.resolved.iter().cloned().collect::<Vec<_>>().join(";");
            let packages = entry.packages().into_iter().collect::<Vec<_>>().join(";");
            writer.write_record([file.as_str(), &types, &packages]).map_err(err)?;
        }
        writer
            .flush()
            .map_err(|e| Error::InvalidParameter(format!("csv flush failed: {e}")))
    }

    /// Reads a catalog written by [`TypeCatalog::write_csv`]. Unresolved names
    /// and warnings are not persisted.
    pub fn read_csv<R: BufRead>(input: R) -> std::result::Result<Self, String> {
        let mut reader = csv::Reader::from_reader(input);
        let mut catalog = TypeCatalog::default();
        for record in reader.records() {
            let record = record.map_err(|e| e.to_string())?;
            let file = record.get(0).ok_or("missing file column")?.to_string();
            let types = record.get(1).unwrap_or("");
            let resolved = types
                .split(';')
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect();
            catalog.files.push(file);
            catalog.entries.push(FileTypes {
                resolved,
                ..FileTypes::default()
            });
        }
        Ok(catalog)
    }
}

/// Binary presence matrix over the given per-row sets. Columns default to the
/// sorted union of the sets; with explicit columns, names absent from every
/// row still get a (zero) column.
pub fn presence_matrix(
    kind: FeatureKind,
    sets: &[BTreeSet<String>],
    rows: Vec<String>,
    columns: Option<&[String]>,
) -> Result<FeatureMatrix> {
    if sets.len() != rows.len() {
        return Err(Error::LengthMismatch {
            left: sets.len(),
            right: rows.len(),
        });
    }
    let columns: Vec<String> = match columns {
        Some(c) => c.to_vec(),
        None => sets
            .iter()
            .flatten()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let values = DMatrix::from_fn(sets.len(), columns.len(), |i, j| {
        if sets[i].contains(&columns[j]) {
            1.0
        } else {
            0.0
        }
    });
    FeatureMatrix::new(kind, rows, columns, values)
}

pub fn type_matrix(catalog: &TypeCatalog) -> Result<FeatureMatrix> {
    presence_matrix(FeatureKind::Type, &catalog.type_sets(), catalog.files.clone(), None)
}

pub fn package_matrix(catalog: &TypeCatalog) -> Result<FeatureMatrix> {
    presence_matrix(FeatureKind::Package, &catalog.package_sets(), catalog.files.clone(), None)
}
