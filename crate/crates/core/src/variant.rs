use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instance::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariantKind {
    /// Fixed costs plus routing, a prescribed number of links.
    Base,
    /// Routing plus link costs, a prescribed number of open terminals.
    MinLinks,
    /// Base plus asymmetric handling costs on each link.
    Handling,
    /// Routing only, prescribed terminal and link counts.
    PL,
}

impl VariantKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariantKind::Base => "base",
            VariantKind::MinLinks => "min-links",
            VariantKind::Handling => "handling",
            VariantKind::PL => "pl",
        }
    }

    pub fn has_link_count(self) -> bool {
        !matches!(self, VariantKind::MinLinks)
    }

    pub fn has_terminal_count(self) -> bool {
        matches!(self, VariantKind::MinLinks | VariantKind::PL)
    }

    pub fn charges_fixed_costs(self) -> bool {
        matches!(self, VariantKind::Base | VariantKind::Handling)
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(VariantKind::Base),
            "min-links" => Ok(VariantKind::MinLinks),
            "handling" => Ok(VariantKind::Handling),
            "pl" => Ok(VariantKind::PL),
            other => Err(Error::InvalidVariant(format!("unknown variant {other:?}"))),
        }
    }
}

/// Whether the link-count row is an equality or an upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LinkMode {
    #[default]
    Exact,
    AtMost,
}

impl LinkMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkMode::Exact => "exact",
            LinkMode::AtMost => "atmost",
        }
    }
}

impl fmt::Display for LinkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(LinkMode::Exact),
            "atmost" => Ok(LinkMode::AtMost),
            other => Err(Error::InvalidVariant(format!("unknown link mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantSpec {
    pub kind: VariantKind,
    pub l: Option<usize>,
    pub q_terminals: Option<usize>,
    pub link_mode: LinkMode,
    pub handling_cost: Option<Matrix>,
}

/// More links requested than the allowed terminals can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuralInfeasibility {
    pub required_links: usize,
    pub max_links: usize,
    pub terminals: usize,
}

impl fmt::Display for StructuralInfeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} links requested but {} terminals admit at most {}*({}-1)/2 = {}",
            self.required_links, self.terminals, self.terminals, self.terminals, self.max_links
        )
    }
}

pub fn max_links(terminals: usize) -> usize {
    terminals * terminals.saturating_sub(1) / 2
}

impl VariantSpec {
    pub fn base(l: usize, link_mode: LinkMode) -> Self {
        Self {
            kind: VariantKind::Base,
            l: Some(l),
            q_terminals: None,
            link_mode,
            handling_cost: None,
        }
    }

    pub fn min_links(q_terminals: usize) -> Self {
        Self {
            kind: VariantKind::MinLinks,
            l: None,
            q_terminals: Some(q_terminals),
            link_mode: LinkMode::Exact,
            handling_cost: None,
        }
    }

    pub fn handling(l: usize, handling_cost: Matrix, link_mode: LinkMode) -> Self {
        Self {
            kind: VariantKind::Handling,
            l: Some(l),
            q_terminals: None,
            link_mode,
            handling_cost: Some(handling_cost),
        }
    }

    pub fn pl(q_terminals: usize, l: usize, link_mode: LinkMode) -> Self {
        Self {
            kind: VariantKind::PL,
            l: Some(l),
            q_terminals: Some(q_terminals),
            link_mode,
            handling_cost: None,
        }
    }

    /// Checks the variant's parameters against an instance with `p` sites.
    pub fn check(&self, p: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidVariant(m));
        if self.kind.has_link_count() != self.l.is_some() {
            return bad(format!(
                "variant {} {} a link count",
                self.kind,
                if self.l.is_some() { "does not take" } else { "requires" }
            ));
        }
        if self.kind.has_terminal_count() != self.q_terminals.is_some() {
            return bad(format!(
                "variant {} {} a terminal count",
                self.kind,
                if self.q_terminals.is_some() { "does not take" } else { "requires" }
            ));
        }
        if let Some(q) = self.q_terminals {
            if q > p {
                return bad(format!("terminal count {q} exceeds the {p} candidate sites"));
            }
        }
        match (&self.handling_cost, self.kind) {
            (Some(t), VariantKind::Handling) => {
                if t.rows() != p || t.cols() != p {
                    return bad(format!("handling cost is {}x{}, expected {p}x{p}", t.rows(), t.cols()));
                }
                if t.values().iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return bad("handling costs must be finite and nonnegative".into());
                }
            }
            (None, VariantKind::Handling) => return bad("handling variant requires handling costs".into()),
            (Some(_), kind) => return bad(format!("variant {kind} does not take handling costs")),
            (None, _) => {}
        }
        Ok(())
    }

    /// Detects link counts that no graph on the admissible terminals can
    /// carry. Only equality link rows can be structurally infeasible.
    pub fn structural_infeasibility(&self, p: usize) -> Option<StructuralInfeasibility> {
        let l = self.l?;
        if self.link_mode != LinkMode::Exact {
            return None;
        }
        let terminals = match self.kind {
            VariantKind::PL => self.q_terminals.unwrap_or(p).min(p),
            _ => p,
        };
        let max = max_links(terminals);
        (l > max).then_some(StructuralInfeasibility {
            required_links: l,
            max_links: max,
            terminals,
        })
    }

    /// Objective coefficient of an established link `{k, m}`.
    pub fn link_cost(&self, inter_cost: &Matrix, k: usize, m: usize) -> f64 {
        match self.kind {
            VariantKind::MinLinks => inter_cost.get(k, m),
            VariantKind::Handling => {
                let t = self.handling_cost.as_ref().expect("checked handling variant");
                t.get(k, m) + t.get(m, k)
            }
            VariantKind::Base | VariantKind::PL => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structural_bound() {
        assert_eq!(
            VariantSpec::base(46, LinkMode::Exact).structural_infeasibility(10),
            Some(StructuralInfeasibility { required_links: 46, max_links: 45, terminals: 10 })
        );
        assert_eq!(VariantSpec::base(45, LinkMode::Exact).structural_infeasibility(10), None);
        assert_eq!(VariantSpec::base(46, LinkMode::AtMost).structural_infeasibility(10), None);
        assert!(VariantSpec::pl(2, 2, LinkMode::Exact).structural_infeasibility(5).is_some());
        assert!(VariantSpec::pl(2, 1, LinkMode::Exact).structural_infeasibility(5).is_none());
        assert!(VariantSpec::min_links(3).structural_infeasibility(5).is_none());
    }

    #[test]
    fn check_rejects_incoherent_specs() {
        assert!(VariantSpec::min_links(6).check(5).is_err());
        let mut v = VariantSpec::base(1, LinkMode::Exact);
        v.handling_cost = Some(Matrix::zeros(2, 2));
        assert!(v.check(2).is_err());
        let mut h = VariantSpec::handling(1, Matrix::zeros(2, 2), LinkMode::Exact);
        assert!(h.check(2).is_ok());
        h.handling_cost = None;
        assert!(h.check(2).is_err());
        assert!(VariantSpec::handling(1, Matrix::zeros(3, 3), LinkMode::Exact).check(2).is_err());
    }

    #[test]
    fn handling_link_cost_is_symmetrized() {
        let mut t = Matrix::zeros(2, 2);
        t.set(0, 1, 3.0);
        t.set(1, 0, 5.0);
        let v = VariantSpec::handling(1, t, LinkMode::Exact);
        assert_eq!(v.link_cost(&Matrix::zeros(2, 2), 0, 1), 8.0);
    }
}
