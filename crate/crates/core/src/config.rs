use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::variant::{LinkMode, VariantSpec};

/// First-stage decision: which terminals open and which rail links exist.
///
/// Links are unordered pairs stored as `(k, m)` with `k < m`. The derived
/// ordering is a deterministic total order used to break ties.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    open: BTreeSet<usize>,
    links: BTreeSet<(usize, usize)>,
}

pub fn link_key(k: usize, m: usize) -> (usize, usize) {
    if k < m {
        (k, m)
    } else {
        (m, k)
    }
}

impl Configuration {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a configuration; link pairs are normalized. Does not open
    /// link endpoints, see [`Configuration::check`].
    pub fn new(
        open: impl IntoIterator<Item = usize>,
        links: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        Self {
            open: open.into_iter().collect(),
            links: links.into_iter().map(|(k, m)| link_key(k, m)).collect(),
        }
    }

    pub fn open(&self) -> &BTreeSet<usize> {
        &self.open
    }

    pub fn links(&self) -> &BTreeSet<(usize, usize)> {
        &self.links
    }

    pub fn is_open(&self, k: usize) -> bool {
        self.open.contains(&k)
    }

    pub fn has_link(&self, k: usize, m: usize) -> bool {
        self.links.contains(&link_key(k, m))
    }

    pub fn open_terminal(&mut self, k: usize) {
        self.open.insert(k);
    }

    /// Closes `k` and drops its incident links.
    pub fn close_terminal(&mut self, k: usize) {
        self.open.remove(&k);
        self.links.retain(|&(a, b)| a != k && b != k);
    }

    /// Adds a link and opens both endpoints.
    pub fn add_link(&mut self, k: usize, m: usize) {
        self.open.insert(k);
        self.open.insert(m);
        self.links.insert(link_key(k, m));
    }

    pub fn remove_link(&mut self, k: usize, m: usize) {
        self.links.remove(&link_key(k, m));
    }

    /// Links incident to `k`.
    pub fn degree(&self, k: usize) -> usize {
        self.links.iter().filter(|&&(a, b)| a == k || b == k).count()
    }

    /// Checks indices and that every link joins two open terminals.
    pub fn check(&self, p: usize) -> Result<()> {
        if let Some(&k) = self.open.iter().find(|&&k| k >= p) {
            return Err(Error::InvalidConfiguration(format!("terminal {k} out of range (p = {p})")));
        }
        for &(k, m) in &self.links {
            if k == m {
                return Err(Error::InvalidConfiguration(format!("self link at terminal {k}")));
            }
            if m >= p {
                return Err(Error::InvalidConfiguration(format!("link ({k}, {m}) out of range (p = {p})")));
            }
            for t in [k, m] {
                if !self.open.contains(&t) {
                    return Err(Error::InvalidConfiguration(format!(
                        "link ({k}, {m}) uses closed terminal {t}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether the terminal and link counts meet the variant's cardinality
    /// rows.
    pub fn meets_cardinality(&self, variant: &VariantSpec) -> bool {
        if let Some(q) = variant.q_terminals {
            if self.open.len() != q {
                return false;
            }
        }
        if let Some(l) = variant.l {
            let ok = match variant.link_mode {
                LinkMode::Exact => self.links.len() == l,
                LinkMode::AtMost => self.links.len() <= l,
            };
            if !ok {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open: Vec<String> = self.open.iter().map(ToString::to_string).collect();
        let links: Vec<String> = self.links.iter().map(|(k, m)| format!("{k}-{m}")).collect();
        write!(f, "open [{}] links [{}]", open.join(" "), links.join(" "))
    }
}
