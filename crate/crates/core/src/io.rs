//! Text formats for instances and solutions, and CPLEX LP export.
//!
//! Both documents are line oriented: a `format` header, then `key value`
//! lines in a fixed order, with matrices written one row per line after
//! their key. Floating-point values use 17 significant digits so a parse of
//! a render reproduces every bit. Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::formulation::MipModel;
use crate::instance::{Coordinates, Instance, Matrix, Point};
use crate::lp::Relation;
use crate::solution::{Breakdown, Infeasibility, RoadFlow, RouteFlow, SolveMeta, SolveStatus, Solution};
use crate::variant::{LinkMode, StructuralInfeasibility, VariantKind, VariantSpec};

pub const INSTANCE_HEADER: &str = "format itlp-instance 1";
pub const SOLUTION_HEADER: &str = "format itlp-solution 1";

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn row_line(values: &[f64]) -> String {
    values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" ")
}

fn write_matrix(out: &mut String, key: &str, m: &Matrix) {
    let _ = writeln!(out, "{key}");
    for i in 0..m.rows() {
        let _ = writeln!(out, "{}", row_line(m.row(i)));
    }
}

fn write_points(out: &mut String, key: &str, pts: &[Point]) {
    let _ = writeln!(out, "{key}");
    for p in pts {
        let _ = writeln!(out, "{} {}", num(p.x), num(p.y));
    }
}

pub fn render_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{INSTANCE_HEADER}");
    let _ = writeln!(out, "n {}", inst.n());
    let _ = writeln!(out, "p {}", inst.p());
    let _ = writeln!(out, "alpha {}", num(inst.alpha()));
    if let Some(c) = inst.coordinates() {
        write_points(&mut out, "customers", &c.customers);
        write_points(&mut out, "sites", &c.sites);
    }
    write_matrix(&mut out, "demand", inst.demand());
    let _ = writeln!(out, "fixed_cost {}", row_line(inst.fixed_cost()));
    let _ = writeln!(out, "capacity {}", row_line(inst.capacity()));
    write_matrix(&mut out, "road_cost", inst.road_cost());
    write_matrix(&mut out, "access_cost", inst.access_cost());
    write_matrix(&mut out, "inter_cost", inst.inter_cost());
    out
}

/// Line cursor over a document, skipping blanks and comments.
struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Self { lines, pos: 0 }
    }

    fn line_no(&self) -> usize {
        self.lines.get(self.pos).map_or_else(|| self.lines.last().map_or(1, |l| l.0 + 1), |l| l.0)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line_no(),
            message: message.into(),
        }
    }

    fn peek_key(&self) -> Option<&'a str> {
        self.lines.get(self.pos).and_then(|l| l.1.split_whitespace().next())
    }

    fn next(&mut self) -> Result<&'a str> {
        let l = self.lines.get(self.pos).ok_or_else(|| self.err("unexpected end of document"))?.1;
        self.pos += 1;
        Ok(l)
    }

    /// Next line must start with `key`; returns the rest.
    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.lines.get(self.pos).ok_or_else(|| self.err(format!("expected `{key}`, found end of document")))?.1;
        let mut parts = line.splitn(2, char::is_whitespace);
        let first = parts.next().unwrap_or("");
        if first != key {
            return Err(self.err(format!("expected `{key}`, found `{first}`")));
        }
        self.pos += 1;
        Ok(parts.next().unwrap_or("").trim())
    }

    fn parse<T: FromStr>(&self, tok: &str, what: &str) -> Result<T> {
        tok.parse().map_err(|_| Error::Parse {
            line: self.lines.get(self.pos.saturating_sub(1)).map_or(0, |l| l.0),
            message: format!("bad {what} `{tok}`"),
        })
    }

    fn value<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let rest = self.keyed(key)?;
        self.parse(rest, key)
    }

    fn floats(&self, text: &str, expect: usize, what: &str) -> Result<Vec<f64>> {
        let vals: Vec<f64> = text
            .split_whitespace()
            .map(|t| self.parse::<f64>(t, what))
            .collect::<Result<_>>()?;
        if vals.len() != expect {
            return Err(Error::Parse {
                line: self.lines.get(self.pos.saturating_sub(1)).map_or(0, |l| l.0),
                message: format!("{what}: expected {expect} values, found {}", vals.len()),
            });
        }
        Ok(vals)
    }

    fn matrix(&mut self, key: &str, rows: usize, cols: usize) -> Result<Matrix> {
        self.keyed(key)?;
        let mut data = Vec::with_capacity(rows);
        for _ in 0..rows {
            let line = self.next()?;
            data.push(self.floats(line, cols, key)?);
        }
        if rows == 0 {
            return Ok(Matrix::zeros(0, cols));
        }
        Matrix::from_rows(data)
    }

    fn points(&mut self, key: &str, count: usize) -> Result<Vec<Point>> {
        self.keyed(key)?;
        (0..count)
            .map(|_| {
                let line = self.next()?;
                let v = self.floats(line, 2, key)?;
                Ok(Point::new(v[0], v[1]))
            })
            .collect()
    }

    fn finish(&self) -> Result<()> {
        if self.pos < self.lines.len() {
            return Err(self.err(format!("unexpected trailing content `{}`", self.lines[self.pos].1)));
        }
        Ok(())
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = Lines::new(text);
    let header = lines.next()?;
    if header != INSTANCE_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{INSTANCE_HEADER}`"),
        });
    }
    let n: usize = lines.value("n")?;
    let p: usize = lines.value("p")?;
    let alpha: f64 = lines.value("alpha")?;
    let coords = if lines.peek_key() == Some("customers") {
        let customers = lines.points("customers", n)?;
        let sites = lines.points("sites", p)?;
        Some(Coordinates { customers, sites })
    } else {
        None
    };
    let demand = lines.matrix("demand", n, n)?;
    let rest = lines.keyed("fixed_cost")?;
    let fixed = lines.floats(rest, p, "fixed_cost")?;
    let rest = lines.keyed("capacity")?;
    let capacity = lines.floats(rest, p, "capacity")?;
    let road = lines.matrix("road_cost", n, n)?;
    let access = lines.matrix("access_cost", n, p)?;
    let inter = lines.matrix("inter_cost", p, p)?;
    lines.finish()?;
    let inst = Instance::from_costs(demand, fixed, capacity, alpha, road, access, inter)?;
    match coords {
        Some(c) => inst.with_coordinates(c),
        None => Ok(inst),
    }
}

fn render_variant(out: &mut String, v: &VariantSpec) {
    let opt = |x: Option<usize>| x.map_or("-".to_string(), |v| v.to_string());
    let _ = writeln!(out, "variant {}", v.kind);
    let _ = writeln!(out, "l {}", opt(v.l));
    let _ = writeln!(out, "q {}", opt(v.q_terminals));
    let _ = writeln!(out, "link_mode {}", v.link_mode);
    match &v.handling_cost {
        Some(t) => write_matrix(out, "handling_cost", t),
        None => {
            let _ = writeln!(out, "handling_cost -");
        }
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or("-".to_string(), num)
}

/// Renders a solution. `name` labels the instance it belongs to.
pub fn render_solution(name: &str, sol: &Solution) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SOLUTION_HEADER}");
    let _ = writeln!(out, "instance {}", if name.is_empty() { "-" } else { name });
    render_variant(&mut out, &sol.variant);
    let _ = writeln!(out, "status {}", sol.status);
    let why = match sol.infeasibility {
        None => "-".to_string(),
        Some(Infeasibility::Structural(s)) => {
            format!("structural {} {} {}", s.required_links, s.max_links, s.terminals)
        }
        Some(Infeasibility::Cardinality) => "cardinality".into(),
        Some(Infeasibility::Lp) => "lp".into(),
    };
    let _ = writeln!(out, "infeasibility {why}");
    let _ = writeln!(out, "objective {}", num(sol.objective));
    let b = &sol.breakdown;
    let _ = writeln!(out, "routing_road {}", num(b.routing_road));
    let _ = writeln!(out, "routing_intermodal {}", num(b.routing_intermodal));
    let _ = writeln!(out, "fixed_cost_total {}", num(b.fixed_cost_total));
    let _ = writeln!(out, "link_cost_total {}", num(b.link_cost_total));
    let open: Vec<String> = sol.configuration.open().iter().map(ToString::to_string).collect();
    let links: Vec<String> = sol.configuration.links().iter().map(|(k, m)| format!("{k}-{m}")).collect();
    let _ = writeln!(out, "open {}", open.join(" "));
    let _ = writeln!(out, "links {}", links.join(" "));
    let m = &sol.meta;
    let _ = writeln!(out, "nodes {}", m.nodes);
    let _ = writeln!(out, "lp_solves {}", m.lp_solves);
    let _ = writeln!(out, "wall_time {}", num(m.wall_time));
    let _ = writeln!(out, "best_bound {}", opt_num(m.best_bound));
    let _ = writeln!(out, "limit_reached {}", m.limit_reached);
    let _ = writeln!(out, "reference_gap {}", opt_num(m.reference_gap));
    let _ = writeln!(out, "flows {}", sol.routes.len() + sol.roads.len());
    for r in &sol.routes {
        let _ = writeln!(out, "x_{}_{}_{}_{} {}", r.i, r.j, r.k, r.m, num(r.amount));
    }
    for r in &sol.roads {
        let _ = writeln!(out, "w_{}_{} {}", r.i, r.j, num(r.amount));
    }
    out
}

fn parse_opt<T: FromStr>(lines: &Lines, tok: &str, what: &str) -> Result<Option<T>> {
    if tok == "-" {
        Ok(None)
    } else {
        lines.parse(tok, what).map(Some)
    }
}

fn indices(lines: &Lines, name: &str, prefix: &str, count: usize) -> Result<Vec<usize>> {
    let body = name
        .strip_prefix(prefix)
        .ok_or_else(|| lines.err(format!("bad flow name `{name}`")))?;
    let idx: Vec<usize> = body.split('_').map(|t| lines.parse(t, "flow index")).collect::<Result<_>>()?;
    if idx.len() != count {
        return Err(lines.err(format!("bad flow name `{name}`")));
    }
    Ok(idx)
}

/// Parses a solution document; returns the instance label and the
/// solution.
pub fn parse_solution(text: &str) -> Result<(String, Solution)> {
    let mut lines = Lines::new(text);
    if lines.next()? != SOLUTION_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{SOLUTION_HEADER}`"),
        });
    }
    let name = lines.keyed("instance")?.to_string();
    let name = if name == "-" { String::new() } else { name };
    let kind: VariantKind = {
        let t = lines.keyed("variant")?;
        t.parse().map_err(|_| lines.err(format!("unknown variant `{t}`")))?
    };
    let t = lines.keyed("l")?;
    let l = parse_opt(&lines, t, "l")?;
    let t = lines.keyed("q")?;
    let q_terminals = parse_opt(&lines, t, "q")?;
    let link_mode: LinkMode = {
        let t = lines.keyed("link_mode")?;
        t.parse().map_err(|_| lines.err(format!("unknown link mode `{t}`")))?
    };
    let handling_cost = if lines.lines.get(lines.pos).map(|l| l.1) == Some("handling_cost -") {
        lines.pos += 1;
        None
    } else {
        // square matrix: its size is the number of values on the first row
        lines.keyed("handling_cost")?;
        let first = lines.lines.get(lines.pos).map_or(0, |l| l.1.split_whitespace().count());
        lines.pos -= 1;
        Some(lines.matrix("handling_cost", first, first)?)
    };
    let variant = VariantSpec {
        kind,
        l,
        q_terminals,
        link_mode,
        handling_cost,
    };
    let status: SolveStatus = {
        let t = lines.keyed("status")?;
        t.parse().map_err(|e: String| lines.err(e))?
    };
    let why = lines.keyed("infeasibility")?;
    let toks: Vec<&str> = why.split_whitespace().collect();
    let infeasibility = match toks.as_slice() {
        ["-"] => None,
        ["cardinality"] => Some(Infeasibility::Cardinality),
        ["lp"] => Some(Infeasibility::Lp),
        ["structural", a, b, c] => Some(Infeasibility::Structural(StructuralInfeasibility {
            required_links: lines.parse(a, "required links")?,
            max_links: lines.parse(b, "max links")?,
            terminals: lines.parse(c, "terminals")?,
        })),
        _ => return Err(lines.err(format!("bad infeasibility `{why}`"))),
    };
    let objective = lines.value("objective")?;
    let breakdown = Breakdown {
        routing_road: lines.value("routing_road")?,
        routing_intermodal: lines.value("routing_intermodal")?,
        fixed_cost_total: lines.value("fixed_cost_total")?,
        link_cost_total: lines.value("link_cost_total")?,
    };
    let open_text = lines.keyed("open")?;
    let open: Vec<usize> =
        open_text.split_whitespace().map(|t| lines.parse(t, "terminal")).collect::<Result<_>>()?;
    let link_text = lines.keyed("links")?;
    let mut links = Vec::new();
    for t in link_text.split_whitespace() {
        let (a, b) = t.split_once('-').ok_or_else(|| lines.err(format!("bad link `{t}`")))?;
        links.push((lines.parse(a, "link")?, lines.parse(b, "link")?));
    }
    let nodes = lines.value("nodes")?;
    let lp_solves = lines.value("lp_solves")?;
    let wall_time = lines.value("wall_time")?;
    let t = lines.keyed("best_bound")?;
    let best_bound = parse_opt(&lines, t, "best_bound")?;
    let limit_reached = lines.value("limit_reached")?;
    let t = lines.keyed("reference_gap")?;
    let reference_gap = parse_opt(&lines, t, "reference_gap")?;
    let count: usize = lines.value("flows")?;
    let mut routes = Vec::new();
    let mut roads = Vec::new();
    for _ in 0..count {
        let line = lines.next()?;
        let (name, value) = line.split_once(char::is_whitespace).ok_or_else(|| lines.err("bad flow line"))?;
        let amount: f64 = lines.parse(value.trim(), "flow")?;
        if name.starts_with("x_") {
            let i = indices(&lines, name, "x_", 4)?;
            routes.push(RouteFlow { i: i[0], j: i[1], k: i[2], m: i[3], amount });
        } else {
            let i = indices(&lines, name, "w_", 2)?;
            roads.push(RoadFlow { i: i[0], j: i[1], amount });
        }
    }
    lines.finish()?;
    Ok((
        name,
        Solution {
            variant,
            status,
            infeasibility,
            configuration: Configuration::new(open, links),
            routes,
            roads,
            objective,
            breakdown,
            meta: SolveMeta {
                wall_time,
                nodes,
                lp_solves,
                best_bound,
                limit_reached,
                reference_gap,
            },
        },
    ))
}

fn lp_term(out: &mut String, line_len: &mut usize, coef: f64, name: &str, first: bool) {
    let sign = if coef < 0.0 { "-" } else { "+" };
    let term = if first && coef >= 0.0 {
        format!(" {} {name}", coef.abs())
    } else {
        format!(" {sign} {} {name}", coef.abs())
    };
    // LP readers limit line length
    if *line_len + term.len() > 200 {
        out.push_str("\n   ");
        *line_len = 3;
    }
    out.push_str(&term);
    *line_len += term.len();
}

/// The model in CPLEX LP format. Variables are named `x_i_j_k_m`,
/// `w_i_j` and `z_k_m`.
pub fn render_lp(model: &MipModel) -> String {
    let names: Vec<String> = model.variables.iter().map(|v| v.role.name()).collect();
    let mut out = String::from("\\ intermodal terminal location model\nMinimize\n obj:");
    let mut len = 5;
    let mut first = true;
    for (j, &c) in model.objective.iter().enumerate() {
        if c != 0.0 {
            lp_term(&mut out, &mut len, c, &names[j], first);
            first = false;
        }
    }
    if first {
        // an objective needs at least one term
        if let Some(n) = names.first() {
            out.push_str(&format!(" 0 {n}"));
        }
    }
    if model.objective_constant != 0.0 {
        out.push_str(&format!(" + {} constant", model.objective_constant));
    }
    out.push_str("\nSubject To\n");
    let mut counters = std::collections::BTreeMap::new();
    for row in &model.rows {
        let c = counters.entry(row.family).or_insert(0usize);
        let label = format!(" {}_{}:", row.family.as_str(), c);
        *c += 1;
        out.push_str(&label);
        let mut len = label.len();
        if row.coeffs.is_empty() {
            out.push_str(&format!(" 0 {}", names.first().map_or("x", |s| s.as_str())));
        }
        for (idx, &(j, a)) in row.coeffs.iter().enumerate() {
            lp_term(&mut out, &mut len, a, &names[j], idx == 0);
        }
        let rel = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        out.push_str(&format!(" {rel} {}\n", row.rhs));
    }
    out.push_str("Bounds\n");
    for (v, name) in model.variables.iter().zip(&names) {
        if v.integer {
            continue;
        }
        if v.upper.is_finite() {
            out.push_str(&format!(" {} <= {name} <= {}\n", v.lower, v.upper));
        } else if v.lower != 0.0 {
            out.push_str(&format!(" {name} >= {}\n", v.lower));
        }
    }
    if model.objective_constant != 0.0 {
        out.push_str(" constant = 1\n");
    }
    let bins: Vec<&str> = model
        .variables
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.integer)
        .map(|(_, n)| n.as_str())
        .collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for chunk in bins.chunks(10) {
            out.push_str(&format!(" {}\n", chunk.join(" ")));
        }
    }
    out.push_str("End\n");
    out
}
