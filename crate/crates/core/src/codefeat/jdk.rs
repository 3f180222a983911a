use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

const BUNDLED: &str = include_str!("../../data/jdk_types.txt");

/// Package to simple-type-name table for the Java standard library.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JdkTable {
    pub version: String,
    packages: BTreeMap<String, BTreeSet<String>>,
}

impl JdkTable {
    /// The table shipped in `data/jdk_types.txt`.
    pub fn bundled() -> &'static JdkTable {
        static TABLE: OnceLock<JdkTable> = OnceLock::new();
        TABLE.get_or_init(|| JdkTable::parse(BUNDLED))
    }

    pub fn parse(text: &str) -> Self {
        let mut table = JdkTable::default();
        for line in text.lines() {
            let line = line.trim();
            if let Some(header) = line.strip_prefix("# jdk-type-table ") {
                table.version = header.trim().to_string();
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((pkg, names)) = line.split_once(':') {
                table
                    .packages
                    .entry(pkg.trim().to_string())
                    .or_default()
                    .extend(names.split_whitespace().map(str::to_string));
            }
        }
        table
    }

    pub fn contains(&self, package: &str, simple: &str) -> bool {
        self.packages.get(package).is_some_and(|s| s.contains(simple))
    }

    pub fn contains_qualified(&self, qualified: &str) -> bool {
        qualified
            .rsplit_once('.')
            .is_some_and(|(pkg, simple)| self.contains(pkg, simple))
    }

    pub fn package_count(&self) -> usize {
        self.packages.len()
    }
}
